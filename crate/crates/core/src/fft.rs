//! Unitary DFT helpers.
//!
//! `W` is the unitary Fourier matrix with `(W)_{kl} = n^{-1/2} e^{-i 2 pi k l / n}`.
//! The "raw" transforms are the unnormalized sums, so that `raw_forward(x) =
//! sqrt(n) * W x`. The frequency response of a zero-padded impulse response
//! `h` is `raw_forward([h, 0])`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

#[derive(Clone)]
pub struct Dft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `x <- sum_l x_l e^{-i 2 pi k l / n}`.
    pub fn raw_forward(&self, x: &mut [C64]) {
        self.forward.process(x);
    }

    /// `x <- sum_k x_k e^{+i 2 pi k l / n}`.
    pub fn raw_inverse(&self, x: &mut [C64]) {
        self.inverse.process(x);
    }

    /// `x <- W x`.
    pub fn forward(&self, x: &mut [C64]) {
        self.forward.process(x);
        x.iter_mut().for_each(|v| *v *= self.scale);
    }

    /// `x <- W* x`.
    pub fn inverse(&self, x: &mut [C64]) {
        self.inverse.process(x);
        x.iter_mut().for_each(|v| *v *= self.scale);
    }
}

pub fn norm(x: &[C64]) -> f64 {
    norm_sqr(x).sqrt()
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// `<x, y> = sum conj(x_i) y_i`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_vec(n: usize, seed: u64) -> Vec<C64> {
        let mut r = rng::stream(seed, rng::Domain::Aux, 0);
        (0..n)
            .map(|_| C64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)))
            .collect()
    }

    #[test]
    fn parseval_holds_for_unitary_transform() {
        for (n, seed) in [(8, 1), (64, 2), (1000, 3)] {
            let x = random_vec(n, seed);
            let mut y = x.clone();
            Dft::new(n).forward(&mut y);
            assert!((norm(&x) - norm(&y)).abs() <= 1e-10 * norm(&x).max(1.0));
        }
    }

    #[test]
    fn forward_matches_matrix_definition() {
        let n = 12;
        let x = random_vec(n, 9);
        let mut y = x.clone();
        Dft::new(n).forward(&mut y);
        for (k, yk) in y.iter().enumerate() {
            let expected: C64 = (0..n)
                .map(|l| {
                    let ang = -2.0 * std::f64::consts::PI * (k * l) as f64 / n as f64;
                    x[l] * C64::from_polar(1.0 / (n as f64).sqrt(), ang)
                })
                .sum();
            assert!((yk - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let x = random_vec(30, 4);
        let mut y = x.clone();
        let dft = Dft::new(30);
        dft.forward(&mut y);
        dft.inverse(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
