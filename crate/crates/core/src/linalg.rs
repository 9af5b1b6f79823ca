//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors.
    pub vectors: CMat,
}

pub fn eigh(m: &CMat) -> HermEigen {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    HermEigen { values, vectors }
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// exp(i t G) for Hermitian G.
pub fn expi_hermitian(g: &CMat, t: f64) -> CMat {
    let e = eigh(g);
    let phases = CMat::from_diagonal(&CVec::from_iterator(
        e.values.len(),
        e.values.iter().map(|&w| Complex64::from_polar(1.0, t * w)),
    ));
    &e.vectors * phases * e.vectors.adjoint()
}

/// Modified Gram-Schmidt with one reorthogonalisation pass.
pub fn gram_schmidt(vectors: &[CVec]) -> Result<Vec<CVec>> {
    let mut out: Vec<CVec> = Vec::with_capacity(vectors.len());
    for (idx, v) in vectors.iter().enumerate() {
        let scale = v.norm();
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c = u.dotc(&w);
                w -= u * c;
            }
        }
        let norm = w.norm();
        if scale == 0.0 || norm <= 1e-12 * scale {
            return invalid(format!("vector {idx} is linearly dependent on its predecessors"));
        }
        out.push(w.unscale(norm));
    }
    Ok(out)
}

/// Largest entry of |V†V - I| for the given columns.
pub fn orthonormality_error(vectors: &[CVec]) -> f64 {
    let mut err: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((a.dotc(b) - target).norm());
        }
    }
    err
}

pub fn columns(m: &CMat) -> Vec<CVec> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

pub fn from_columns(cols: &[CVec]) -> CMat {
    CMat::from_columns(cols)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().sum()
}

/// ⟨a| M |b⟩
pub fn sandwich(a: &CVec, m: &CMat, b: &CVec) -> Complex64 {
    a.dotc(&(m * b))
}
