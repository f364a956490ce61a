//! The compound measurement operator and dense helpers around it.

mod compound;
mod rip;

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

pub use compound::{SensingOperator, Strategy};
pub use rip::{rip_constant_exact, rip_sample_complexity, RipReport, RIP_MAX_COLUMNS, RIP_MAX_K};

/// Default column cap for [`materialize`].
pub const MATERIALIZE_CAP: usize = 4096;

/// A linear map `C^cols -> C^rows` with its adjoint.
///
/// Columns are grouped into consecutive blocks of [`block_len`](Self::block_len);
/// each block holds one user's impulse response.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    fn block_len(&self) -> usize {
        self.cols()
    }

    fn apply_unchecked(&self, x: &[C64]) -> Vec<C64>;
    fn adjoint_unchecked(&self, y: &[C64]) -> Vec<C64>;

    fn column(&self, j: usize) -> Vec<C64> {
        let mut e = vec![C64::new(0.0, 0.0); self.cols()];
        e[j] = C64::new(1.0, 0.0);
        self.apply_unchecked(&e)
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.cols(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    fn adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        check_len(self.rows(), y.len())?;
        Ok(self.adjoint_unchecked(y))
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// An explicit matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    block_len: usize,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<C64>) -> Self {
        let block_len = matrix.ncols().max(1);
        Self { matrix, block_len }
    }

    pub fn with_block_len(mut self, block_len: usize) -> Self {
        self.block_len = block_len;
        self
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    fn block_len(&self) -> usize {
        self.block_len
    }

    fn apply_unchecked(&self, x: &[C64]) -> Vec<C64> {
        (&self.matrix * DVector::from_column_slice(x)).data.into()
    }

    fn adjoint_unchecked(&self, y: &[C64]) -> Vec<C64> {
        self.matrix.ad_mul(&DVector::from_column_slice(y)).data.into()
    }

    fn column(&self, j: usize) -> Vec<C64> {
        self.matrix.column(j).iter().copied().collect()
    }
}

/// Dense `rows x cols` copy of `op`, built column by column.
pub fn materialize<O: LinearOperator + ?Sized>(op: &O, cap: usize) -> Result<DMatrix<C64>> {
    if op.cols() > cap {
        return Err(Error::Limit {
            what: "operator columns",
            got: op.cols(),
            limit: cap,
        });
    }
    let mut a = DMatrix::zeros(op.rows(), op.cols());
    for j in 0..op.cols() {
        a.set_column(j, &DVector::from_vec(op.column(j)));
    }
    Ok(a)
}

/// Least-squares solution supported on a column subset.
#[derive(Clone, Debug)]
pub struct Lstsq {
    /// Full-length vector, zero off the support.
    pub x: Vec<C64>,
    /// The submatrix was numerically rank deficient; `x` is the minimum-norm
    /// solution.
    pub rank_deficient: bool,
}

/// Minimizes `||A_S z - y||` over vectors supported on `support`.
pub fn restricted_lstsq<O: LinearOperator + ?Sized>(op: &O, y: &[C64], support: &[usize]) -> Result<Lstsq> {
    check_len(op.rows(), y.len())?;
    let mut x = vec![C64::new(0.0, 0.0); op.cols()];
    if support.is_empty() {
        return Ok(Lstsq {
            x,
            rank_deficient: false,
        });
    }
    if support.len() > op.rows() {
        return Err(Error::Limit {
            what: "support size",
            got: support.len(),
            limit: op.rows(),
        });
    }
    if let Some(&j) = support.iter().find(|&&j| j >= op.cols()) {
        return Err(Error::Dimension {
            expected: op.cols(),
            got: j + 1,
        });
    }
    let mut a = DMatrix::zeros(op.rows(), support.len());
    for (c, &j) in support.iter().enumerate() {
        a.set_column(c, &DVector::from_vec(op.column(j)));
    }
    let (z, rank_deficient) = solve_least_squares(a, DVector::from_column_slice(y));
    for (&j, v) in support.iter().zip(z.iter()) {
        x[j] = *v;
    }
    Ok(Lstsq { x, rank_deficient })
}

/// Householder QR when `a` has full column rank, SVD pseudo-inverse otherwise.
fn solve_least_squares(a: DMatrix<C64>, b: DVector<C64>) -> (DVector<C64>, bool) {
    let tol_factor = (a.nrows().max(a.ncols()) as f64) * f64::EPSILON * 16.0;
    let qr = a.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let well_posed = diag_max > 0.0 && r.diagonal().iter().all(|v| v.norm() > 1e3 * tol_factor * diag_max);
    if well_posed {
        let qtb = qr.q().ad_mul(&b);
        if let Some(z) = r.solve_upper_triangular(&qtb) {
            return (z, false);
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = (tol_factor * smax).max(f64::MIN_POSITIVE);
    let rank_deficient = svd.singular_values.iter().any(|&s| s <= cutoff);
    let z = svd.solve(&b, cutoff).unwrap_or_else(|_| DVector::zeros(b.len()));
    (z, rank_deficient)
}

/// Writes `a` row-major, one `re,im` pair per cell.
pub fn write_matrix_csv<W: Write>(a: &DMatrix<C64>, mut out: W) -> Result<()> {
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols())
            .map(|j| format!("{:e},{:e}", a[(i, j)].re, a[(i, j)].im))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
