//! BPDN against optima computed by an interior-point solver
//! (`fixtures/gen_bpdn.py`).

use cra_core::recovery::{bpdn, BpdnCfg};
use cra_core::sensing::DenseOperator;
use cra_core::C64;
use nalgebra::DMatrix;
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    rows: usize,
    cols: usize,
    a_re: Vec<f64>,
    a_im: Vec<f64>,
    y_re: Vec<f64>,
    y_im: Vec<f64>,
    eps: f64,
    objective: f64,
    x_re: Vec<f64>,
    x_im: Vec<f64>,
}

#[derive(Deserialize)]
struct Fixture {
    cases: Vec<Case>,
}

fn zip(re: &[f64], im: &[f64]) -> Vec<C64> {
    re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect()
}

#[test]
fn matches_reference_optimum() {
    let f: Fixture = serde_json::from_str(include_str!("fixtures/bpdn_small.json")).expect("fixture parses");
    for c in &f.cases {
        let a = zip(&c.a_re, &c.a_im);
        let op = DenseOperator::new(DMatrix::from_row_slice(c.rows, c.cols, &a));
        let y = zip(&c.y_re, &c.y_im);
        let cfg = BpdnCfg {
            obj_tol: 1e-5,
            feas_tol: 1e-6,
            max_iter: 200_000,
            ..BpdnCfg::default()
        };
        let out = bpdn(&op, &y, c.eps, &cfg).unwrap();
        assert!(out.converged);
        let obj: f64 = out.h_hat.iter().map(|v| v.norm()).sum();
        assert!(
            (obj - c.objective).abs() <= 1e-4 * c.objective,
            "{obj} vs {}",
            c.objective
        );
        let x_ref = zip(&c.x_re, &c.x_im);
        let err: f64 = out
            .h_hat
            .iter()
            .zip(&x_ref)
            .map(|(p, q)| (p - q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = x_ref.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-2 * scale, "solution error {err}");
        assert!(out.residual_norm <= c.eps * (1.0 + 1e-6) + 1e-12);
    }
}
