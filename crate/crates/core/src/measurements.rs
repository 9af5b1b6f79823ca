//! Projective measurements, classical Fisher information and the trade-off `Tr[F H⁻¹]`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fisher::{qfi_matrix, FisherMatrix};
use crate::linalg::{columns, gram_schmidt, max_abs, CMat, CVec};
use crate::states::{derivatives, evolve, DensityMatrix, ProbeState};

/// Outcomes with probability below this are left out of Fisher sums.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// Largest completeness deviation accepted (and then repaired) on construction.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-6;

/// Complete orthonormal family `{|v_y⟩}`; the vectors are stored as matrix columns.
#[derive(Debug, Clone)]
pub struct ProjectivePovm {
    frame: CMat,
    input_deviation: f64,
}

impl ProjectivePovm {
    /// Validates and re-orthonormalises a square family of vectors.
    pub fn new(vectors: Vec<CVec>) -> Result<Self> {
        let dim = vectors.first().map_or(0, |v| v.len());
        if dim == 0 {
            return invalid("empty POVM");
        }
        if vectors.len() != dim || vectors.iter().any(|v| v.len() != dim) {
            return invalid(format!("need {dim} vectors of length {dim}, got {}", vectors.len()));
        }
        let frame = CMat::from_columns(&vectors);
        let deviation = completeness_error(&frame);
        if !(deviation <= COMPLETENESS_TOLERANCE) {
            return invalid(format!("POVM is not complete (deviation {deviation:.3e})"));
        }
        let fixed = gram_schmidt(&vectors)?;
        Ok(Self { frame: CMat::from_columns(&fixed), input_deviation: deviation })
    }

    /// Columns of a unitary matrix, assumed orthonormal to working precision.
    pub(crate) fn from_unitary(frame: CMat) -> Self {
        Self { frame, input_deviation: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn vectors(&self) -> Vec<CVec> {
        columns(&self.frame)
    }

    /// Completeness deviation of the vectors passed to [`ProjectivePovm::new`].
    pub fn input_deviation(&self) -> f64 {
        self.input_deviation
    }

    pub fn completeness_error(&self) -> f64 {
        completeness_error(&self.frame)
    }

    /// Magnitudes `r_{y,n}`.
    pub fn magnitudes(&self, y: usize) -> Vec<f64> {
        self.frame.column(y).iter().map(|z| z.norm()).collect()
    }

    /// Phases `X_{y,n}`.
    pub fn phases(&self, y: usize) -> Vec<f64> {
        self.frame.column(y).iter().map(|z| z.arg()).collect()
    }
}

fn completeness_error(frame: &CMat) -> f64 {
    let n = frame.nrows();
    max_abs(&(frame * frame.adjoint() - CMat::identity(n, n)))
}

/// Same as [`ProjectivePovm::new`].
pub fn make_povm(vectors: Vec<CVec>) -> Result<ProjectivePovm> {
    ProjectivePovm::new(vectors)
}

fn check_dim(povm: &ProjectivePovm, n: usize) -> Result<()> {
    if povm.dim() != n {
        return Err(Error::DimensionMismatch { expected: povm.dim(), got: n });
    }
    Ok(())
}

/// `⟨v_y| M |v_y⟩` for each outcome, real part.
fn diag_expectations(frame: &CMat, m: &CMat) -> Vec<f64> {
    let mv = m * frame;
    (0..frame.ncols()).map(|y| frame.column(y).dotc(&mv.column(y)).re).collect()
}

pub fn probabilities(povm: &ProjectivePovm, rho: &DensityMatrix) -> Result<Vec<f64>> {
    check_dim(povm, rho.dim())?;
    Ok(diag_expectations(povm.frame(), &rho.entries).into_iter().map(|p| p.max(0.0)).collect())
}

/// `F_ij = Σ_y ∂_i p_y ∂_j p_y / p_y` from a density matrix and its two derivatives.
pub fn classical_fisher_from(frame: &CMat, rho: &CMat, d1: &CMat, d2: &CMat) -> FisherMatrix {
    let p = diag_expectations(frame, rho);
    let q1 = diag_expectations(frame, d1);
    let q2 = diag_expectations(frame, d2);
    let mut f = FisherMatrix::zero();
    for y in 0..p.len() {
        if p[y] < PROBABILITY_FLOOR {
            continue;
        }
        f.h11 += q1[y] * q1[y] / p[y];
        f.h22 += q2[y] * q2[y] / p[y];
        f.h12 += q1[y] * q2[y] / p[y];
    }
    f
}

pub fn classical_fisher(povm: &ProjectivePovm, state: &ProbeState, phi: f64, delta: f64) -> Result<FisherMatrix> {
    check_dim(povm, state.dim())?;
    let rho = evolve(state, phi, delta)?;
    let (d1, d2) = derivatives(state, phi, delta)?;
    Ok(classical_fisher_from(povm.frame(), &rho.entries, &d1, &d2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffTerms {
    pub f11_over_h11: f64,
    pub f22_over_h22: f64,
    pub total: f64,
}

pub fn tradeoff_terms(f: &FisherMatrix, h: &FisherMatrix) -> Result<TradeoffTerms> {
    if !(h.h11 > 0.0 && h.h22 > 0.0) {
        return invalid(format!("QFI diagonal must be positive (h11={}, h22={})", h.h11, h.h22));
    }
    let (a, b) = (f.h11 / h.h11, f.h22 / h.h22);
    Ok(TradeoffTerms { f11_over_h11: a, f22_over_h22: b, total: a + b })
}

/// `Tr[F H⁻¹] = F11/H11 + F22/H22`
pub fn tradeoff(f: &FisherMatrix, h: &FisherMatrix) -> Result<f64> {
    Ok(tradeoff_terms(f, h)?.total)
}

/// Discretised phase-state measurement over the `K+1` HB support states.
pub fn canonical_phase_povm(k_half: usize) -> ProjectivePovm {
    fourier_povm(k_half + 1, 0.0)
}

/// `|v_y⟩ = Σ_m e^{i m (2π y / D + offset)} |m⟩ / √D`
pub fn fourier_povm(dim: usize, offset: f64) -> ProjectivePovm {
    let r = 1.0 / (dim as f64).sqrt();
    let two_pi = 2.0 * std::f64::consts::PI;
    let frame = CMat::from_fn(dim, dim, |m, y| {
        Complex64::from_polar(r, two_pi * ((m * y) % dim) as f64 / dim as f64 + m as f64 * offset)
    });
    ProjectivePovm::from_unitary(frame)
}

/// Canonical measurement with its phase reference aligned to the probe.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlignedTradeoff {
    pub offset: f64,
    pub terms: TradeoffTerms,
}

/// Trade-off of the canonical measurement maximised over the reference phase offset.
///
/// Shifting the reference by `2π/(K+1)` only permutes outcomes, so one period is searched:
/// a uniform grid followed by golden-section refinement.
pub fn canonical_tradeoff_aligned(state: &ProbeState, delta: f64) -> Result<AlignedTradeoff> {
    let dim = state.dim();
    let h = qfi_matrix(state, 0.0, delta, None)?;
    let rho = evolve(state, 0.0, delta)?;
    let (d1, d2) = derivatives(state, 0.0, delta)?;
    align_fourier_offset(dim, |offset| {
        let povm = fourier_povm(dim, offset);
        tradeoff_terms(&classical_fisher_from(povm.frame(), &rho.entries, &d1, &d2), &h)
    })
}

/// Maximises `eval(offset)` over one period `2π/dim` of the Fourier reference phase.
pub fn align_fourier_offset<F>(dim: usize, eval: F) -> Result<AlignedTradeoff>
where
    F: Fn(f64) -> Result<TradeoffTerms>,
{
    let period = 2.0 * std::f64::consts::PI / dim as f64;
    let grid = 64;
    let mut best = (0.0, eval(0.0)?);
    for i in 1..grid {
        let o = period * i as f64 / grid as f64;
        let t = eval(o)?;
        if t.total > best.1.total {
            best = (o, t);
        }
    }
    let (mut lo, mut hi) = (best.0 - period / grid as f64, best.0 + period / grid as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if eval(a)?.total >= eval(b)?.total {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    let t = eval(mid)?;
    if t.total > best.1.total {
        best = (mid, t);
    }
    Ok(AlignedTradeoff { offset: best.0.rem_euclid(period), terms: best.1 })
}
