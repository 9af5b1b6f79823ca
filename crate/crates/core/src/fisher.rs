//! Exact quantum Fisher information through symmetric logarithmic derivatives.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{eigh, hermiticity_error, hermitize, max_abs, trace, CMat, CVec, HermEigen};
use crate::states::{derivatives, evolve, DensityMatrix, ProbeState, StateKind};

/// Relative pseudo-inverse threshold used when the caller passes `None`.
pub const DEFAULT_REL_CUTOFF: f64 = 1e-12;

/// Below this diffusion width the Δ information is taken from its small-Δ limit.
pub const SMALL_DELTA_SWITCH: f64 = 1e-6;

/// 2×2 symmetric Fisher matrix over (φ, Δ). Used for both quantum and classical information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherMatrix {
    pub h11: f64,
    pub h22: f64,
    pub h12: f64,
}

impl FisherMatrix {
    pub fn new(h11: f64, h22: f64, h12: f64) -> Self {
        Self { h11, h22, h12 }
    }

    pub fn diagonal(h11: f64, h22: f64) -> Self {
        Self { h11, h22, h12: 0.0 }
    }

    pub fn zero() -> Self {
        Self::diagonal(0.0, 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct SldPair {
    pub l1: CMat,
    pub l2: CMat,
    pub cutoff_used: f64,
}

/// Reusable eigendecomposition of ρ for repeated SLD solves.
pub struct SldSolver {
    eig: HermEigen,
    cutoff: f64,
}

impl SldSolver {
    pub fn new(rho: &CMat, cutoff: Option<f64>) -> Result<Self> {
        check_square(rho)?;
        if hermiticity_error(rho) > 1e-10 * max_abs(rho).max(1.0) {
            return invalid("density matrix is not Hermitian");
        }
        let eig = eigh(rho);
        let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
        let cutoff = match cutoff {
            Some(c) if c >= 0.0 && c.is_finite() => c,
            Some(c) => return invalid(format!("cutoff must be finite and >= 0, got {c}")),
            None => DEFAULT_REL_CUTOFF * top,
        };
        Ok(Self { eig, cutoff })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn eigen(&self) -> &HermEigen {
        &self.eig
    }

    /// Solves `L ρ + ρ L = 2 ∂ρ` on eigenvalue pairs whose sum exceeds the cutoff.
    pub fn solve(&self, drho: &CMat) -> Result<CMat> {
        let n = self.eig.values.len();
        if drho.nrows() != n || drho.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: drho.nrows() });
        }
        if hermiticity_error(drho) > 1e-10 * max_abs(drho).max(1.0) {
            return invalid("derivative matrix is not Hermitian");
        }
        let v = &self.eig.vectors;
        let e = &self.eig.values;
        let m = v.adjoint() * drho * v;
        let mut lp = CMat::zeros(n, n);
        let mut resid: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s = e[i] + e[j];
                if s > self.cutoff {
                    lp[(i, j)] = m[(i, j)] * (2.0 / s);
                    resid = resid.max((lp[(i, j)] * s - m[(i, j)] * 2.0).norm());
                }
            }
        }
        let l = hermitize(&(v * lp * v.adjoint()));

        // residual in the original basis, restricted to solved eigen-pairs
        let rho = v * CMat::from_diagonal(&CVec::from_iterator(n, e.iter().map(|&x| x.into()))) * v.adjoint();
        let r = v.adjoint() * (&l * &rho + &rho * &l - drho * Complex64::from(2.0)) * v;
        for i in 0..n {
            for j in 0..n {
                if e[i] + e[j] > self.cutoff {
                    resid = resid.max(r[(i, j)].norm());
                }
            }
        }
        let tol = 1e-8 * max_abs(drho).max(1.0);
        if resid > tol || !resid.is_finite() {
            return Err(Error::NumericalFailure { context: "SLD equation residual".into(), residual: resid });
        }
        Ok(l)
    }
}

fn check_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    Ok(())
}

/// One-shot SLD solve. `cutoff = None` selects `1e-12 × λ_max`.
pub fn solve_sld(rho: &CMat, drho: &CMat, cutoff: Option<f64>) -> Result<CMat> {
    SldSolver::new(rho, cutoff)?.solve(drho)
}

pub fn sld_pair(rho: &CMat, d1: &CMat, d2: &CMat, cutoff: Option<f64>) -> Result<SldPair> {
    let solver = SldSolver::new(rho, cutoff)?;
    Ok(SldPair { l1: solver.solve(d1)?, l2: solver.solve(d2)?, cutoff_used: solver.cutoff() })
}

/// `H_ij = Re Tr[ρ L_i L_j]`
pub fn fisher_from_slds(rho: &CMat, slds: &SldPair) -> FisherMatrix {
    let h = |a: &CMat, b: &CMat| trace(&(rho * a * b)).re;
    let h12 = 0.5 * (h(&slds.l1, &slds.l2) + h(&slds.l2, &slds.l1));
    FisherMatrix::new(h(&slds.l1, &slds.l1), h(&slds.l2, &slds.l2), h12)
}

/// Exact QFI matrix of the dephased probe.
pub fn qfi_matrix(state: &ProbeState, phi: f64, delta: f64, cutoff: Option<f64>) -> Result<FisherMatrix> {
    let rho = evolve(state, phi, delta)?;
    let (d1, d2) = derivatives(state, phi, delta)?;
    let slds = sld_pair(&rho.entries, &d1, &d2, cutoff)?;
    let mut h = fisher_from_slds(&rho.entries, &slds);
    if delta < SMALL_DELTA_SWITCH {
        h.h22 = small_delta_h22(state, delta);
        h.h12 = 0.0;
    }
    Ok(h)
}

/// Δ information in the limit Δ → 0, where the direct route is 0/0.
fn small_delta_h22(state: &ProbeState, delta: f64) -> f64 {
    match state.kind() {
        StateKind::HollandBurnett => crate::regime_small::qfi_small_delta(state.half_number(), delta).h22,
        StateKind::Generic => {
            let v4 = 4.0 * state.number_variance();
            v4 - 0.5 * v4 * v4 * delta * delta
        }
    }
}

/// Eigen-decomposition derivative data for one parameter.
#[derive(Debug, Clone)]
pub struct EigenDerivative {
    pub values: Vec<f64>,
    pub vectors: Vec<CVec>,
}

/// First-order perturbation theory for `∂E_m` and `∂|e_m⟩` (gauge `⟨e_m|∂e_m⟩ = 0`).
/// Pairs closer than `gap_tol` are treated as degenerate and skipped.
pub fn eigen_derivatives(eig: &HermEigen, drho: &CMat, gap_tol: f64) -> EigenDerivative {
    let n = eig.values.len();
    let v = &eig.vectors;
    let m = v.adjoint() * drho * v;
    let values = (0..n).map(|i| m[(i, i)].re).collect();
    let vectors = (0..n)
        .map(|mi| {
            let mut d = CVec::zeros(n);
            for ni in 0..n {
                let gap = eig.values[mi] - eig.values[ni];
                if ni != mi && gap.abs() > gap_tol {
                    d += v.column(ni) * (m[(ni, mi)] / gap);
                }
            }
            d
        })
        .collect();
    EigenDerivative { values, vectors }
}

/// Eigenbasis QFI:
/// `Σ ∂_iE ∂_jE / E + 4 Σ E_m (E_n - E_m)² / (E_n + E_m)² Re(⟨e_n|∂_i e_m⟩⟨∂_j e_m|e_n⟩)`.
pub fn qfi_from_eigensystem(
    values: &[f64],
    vectors: &[CVec],
    d: [&EigenDerivative; 2],
    cutoff: f64,
) -> Result<FisherMatrix> {
    let n = values.len();
    if vectors.len() != n || d.iter().any(|x| x.values.len() != n || x.vectors.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: vectors.len() });
    }
    if values.iter().any(|&e| e < -1e-10) {
        return invalid("eigenvalues must be nonnegative");
    }
    if crate::linalg::orthonormality_error(vectors) > 1e-10 {
        return invalid("eigenvectors are not orthonormal");
    }
    let mut h = [[0.0f64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0.0;
            for m in 0..n {
                if values[m] > cutoff {
                    acc += d[i].values[m] * d[j].values[m] / values[m];
                }
            }
            for m in 0..n {
                for nn in 0..n {
                    let s = values[nn] + values[m];
                    if nn == m || s <= cutoff {
                        continue;
                    }
                    let w = 4.0 * values[m] * (values[nn] - values[m]).powi(2) / (s * s);
                    let a = vectors[nn].dotc(&d[i].vectors[m]);
                    let b = d[j].vectors[m].dotc(&vectors[nn]);
                    acc += w * (a * b).re;
                }
            }
            h[i][j] = acc;
        }
    }
    Ok(FisherMatrix::new(h[0][0], h[1][1], 0.5 * (h[0][1] + h[1][0])))
}

/// QFI of the dephased probe through the eigenbasis formula.
pub fn qfi_eigen_route(state: &ProbeState, phi: f64, delta: f64, cutoff: Option<f64>) -> Result<FisherMatrix> {
    let rho = evolve(state, phi, delta)?;
    let (d1, d2) = derivatives(state, phi, delta)?;
    let eig = eigh(&rho.entries);
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = cutoff.unwrap_or(DEFAULT_REL_CUTOFF * top);
    let gap_tol = 1e-13 * top.max(1.0);
    let e1 = eigen_derivatives(&eig, &d1, gap_tol);
    let e2 = eigen_derivatives(&eig, &d2, gap_tol);
    let values: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
    qfi_from_eigensystem(&values, &crate::linalg::columns(&eig.vectors), [&e1, &e2], cutoff)
}

/// `|Tr ρ [L1, L2]|`
pub fn weak_commutativity(rho: &DensityMatrix, slds: &SldPair) -> Result<f64> {
    let n = rho.dim();
    for l in [&slds.l1, &slds.l2] {
        if l.nrows() != n || l.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: l.nrows() });
        }
    }
    let comm = &slds.l1 * &slds.l2 - &slds.l2 * &slds.l1;
    Ok(trace(&(&rho.entries * comm)).norm())
}
