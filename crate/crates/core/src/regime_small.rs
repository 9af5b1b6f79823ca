//! Small phase-diffusion regime for Holland-Burnett probes.
//!
//! The Taylor-expanded density matrix lives in the span of the first 3 (second order)
//! or 5 (fourth order) Gram-Schmidt vectors built from `|φ_n⟩ = b_n e^{2iφn} |n⟩`, where
//! `n = 0..K` indexes the HB support. In that basis it becomes a small real matrix that
//! depends on `K` and `Δ` only.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fisher::{qfi_matrix, FisherMatrix};
use crate::linalg::{gram_schmidt, CMat, CVec};
use crate::measurements::{ProjectivePovm, TradeoffTerms, PROBABILITY_FLOOR};
use crate::regime_large::diagonal_relative_error;
use crate::states::{check_order, hb_coefficients, ProbeState};

/// Second- or fourth-order reduced description of the Taylor-expanded HB density matrix.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub order: usize,
    pub basis: Vec<CVec>,
    pub reduced: DMatrix<f64>,
    /// Retained eigenvalues, descending. Empty until [`small_eigensystem`] fills it.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of `reduced` matching `eigenvalues`.
    pub eigenvectors: Vec<DVector<f64>>,
    /// Raw values of the roots that were set to zero.
    pub discarded: Vec<f64>,
}

impl ReducedSystem {
    /// Eigenvectors mapped back to the `(K+1)`-dimensional support space.
    pub fn support_eigenvectors(&self) -> Vec<CVec> {
        self.eigenvectors
            .iter()
            .map(|c| {
                let mut v = CVec::zeros(self.basis[0].len());
                for (j, b) in self.basis.iter().enumerate() {
                    v += b * Complex64::from(c[j]);
                }
                v
            })
            .collect()
    }

    /// `Σ_ij ρ'_ij |v_i⟩⟨v_j|`
    pub fn expand(&self) -> CMat {
        let n = self.basis[0].len();
        let mut out = CMat::zeros(n, n);
        for (i, vi) in self.basis.iter().enumerate() {
            for (j, vj) in self.basis.iter().enumerate() {
                let c = self.reduced[(i, j)];
                if c != 0.0 {
                    out += vi * vj.adjoint() * Complex64::from(c);
                }
            }
        }
        out
    }

    /// `Σ E_i |u_i⟩⟨u_i|` over retained eigenpairs.
    pub fn reconstruct(&self) -> CMat {
        let n = self.basis[0].len();
        let mut out = CMat::zeros(n, n);
        for (e, u) in self.eigenvalues.iter().zip(self.support_eigenvectors()) {
            if *e > 0.0 {
                out += &u * u.adjoint() * Complex64::from(*e);
            }
        }
        out
    }
}

fn vectors_needed(order: usize) -> usize {
    if order == 2 {
        3
    } else {
        5
    }
}

/// `Π_{j=0}^{len-1} (j + K + shift)`
fn rising(k: f64, shift: f64, len: usize) -> f64 {
    (0..len).map(|j| j as f64 + k + shift).product()
}

/// Closed-form `j`-th orthonormal vector (`j = 1..=5`) over the HB support.
pub fn closed_form_vector(k_half: usize, phi: f64, j: usize) -> Result<CVec> {
    if !(1..=5).contains(&j) {
        return invalid(format!("vector index must be 1..=5, got {j}"));
    }
    if k_half + 1 < j {
        return invalid(format!("K={k_half} supports at most {} independent vectors", k_half + 1));
    }
    let b = hb_coefficients(k_half);
    let k = k_half as f64;
    let s2 = 2f64.sqrt();
    let poly = |n: f64| -> f64 {
        match j {
            1 => 1.0,
            2 => 2.0 * s2 * (n - k / 2.0) / rising(k, 0.0, 2).sqrt(),
            3 => 8.0 * s2 * ((n - k / 2.0).powi(2) - k * (k + 1.0) / 8.0) / rising(k, -1.0, 4).sqrt(),
            4 => -s2 / rising(k, -2.0, 6).sqrt() * (k - 2.0 * n) * (2.0 + (k - 3.0) * k + 16.0 * n * (n - k)),
            _ => {
                s2 / rising(k, -3.0, 8).sqrt()
                    * (k * (k - 1.0) * (k - 2.0) * (k - 3.0) - 32.0 * k * (2.0 + (k - 1.0) * k) * n
                        + 32.0 * (2.0 + k * (5.0 * k - 1.0)) * n * n
                        - 256.0 * k * n.powi(3)
                        + 128.0 * n.powi(4))
            }
        }
    };
    Ok(CVec::from_iterator(
        k_half + 1,
        (0..=k_half).map(|n| Complex64::from_polar(b[n] * poly(n as f64), 2.0 * phi * n as f64)),
    ))
}

/// Orthonormal basis of 3 (order 2) or 5 (order 4) vectors.
pub fn gram_schmidt_basis(k_half: usize, phi: f64, order: usize) -> Result<Vec<CVec>> {
    check_order(order)?;
    let need = vectors_needed(order);
    if k_half + 1 < need {
        return invalid(format!("order {order} needs K+1 >= {need} linearly independent vectors, K={k_half}"));
    }
    let raw = (1..=need).map(|j| closed_form_vector(k_half, phi, j)).collect::<Result<Vec<_>>>()?;
    gram_schmidt(&raw)
}

/// Closed-form reduced matrix entries.
pub fn reduced_matrix(k_half: usize, delta: f64, order: usize) -> Result<DMatrix<f64>> {
    check_order(order)?;
    let k = k_half as f64;
    let kk = k * (k + 1.0);
    let d2 = delta * delta;
    let d4 = d2 * d2;
    let s2 = 2f64.sqrt();
    if order == 2 {
        let b11 = 1.0 - d2 * kk / 2.0;
        let b13 = -(d2 / (4.0 * s2)) * rising(k, -1.0, 4).sqrt();
        let b22 = d2 * kk / 2.0;
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = b11;
        m[(0, 2)] = b13;
        m[(2, 0)] = b13;
        m[(1, 1)] = b22;
        return Ok(m);
    }
    let c11 = 1.0 + d2 / 32.0 * kk * (-16.0 + d2 * (-2.0 + 9.0 * kk));
    let c13 = 1.0 / (8.0 * s2) * rising(k, -1.0, 4).sqrt() * (-2.0 * d2 + d4 * (-1.0 + 2.0 * kk));
    let c15 = d4 / (64.0 * s2) * rising(k, -3.0, 8).sqrt();
    let c22 = -(d2 / 8.0) * kk * (-4.0 + d2 * (-2.0 + 3.0 * kk));
    let c24 = -(d4 / 16.0) * (kk * rising(k, -2.0, 6)).sqrt();
    let c33 = 3.0 * d4 / 32.0 * rising(k, -1.0, 4);
    let mut m = DMatrix::zeros(5, 5);
    m[(0, 0)] = c11;
    m[(1, 1)] = c22;
    m[(2, 2)] = c33;
    for (i, j, v) in [(0, 2, c13), (0, 4, c15), (1, 3, c24)] {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}

pub fn reduced_density(k_half: usize, phi: f64, delta: f64, order: usize) -> Result<ReducedSystem> {
    let basis = gram_schmidt_basis(k_half, phi, order)?;
    let reduced = reduced_matrix(k_half, delta, order)?;
    Ok(ReducedSystem { order, basis, reduced, eigenvalues: Vec::new(), eigenvectors: Vec::new(), discarded: Vec::new() })
}

/// Leading-order eigenvalues: `{b22, 0, b11}` or `{c22, c11 + K(K+1)(K(K+1)-2)Δ⁴/32, (2/3)c33}`.
pub fn closed_form_eigenvalues(k_half: usize, delta: f64, order: usize) -> Result<Vec<f64>> {
    let m = reduced_matrix(k_half, delta, order)?;
    if order == 2 {
        return Ok(vec![m[(1, 1)], 0.0, m[(0, 0)]]);
    }
    let kk = (k_half * (k_half + 1)) as f64;
    let d4 = delta.powi(4);
    Ok(vec![m[(1, 1)], m[(0, 0)] + kk * (kk - 2.0) * d4 / 32.0, 2.0 / 3.0 * m[(2, 2)]])
}

/// Numerical eigensystem of the reduced matrix.
///
/// Only the leading 2 (order 2) or 3 (order 4) roots carry physical weight; the rest,
/// together with any negative root or any root at most `10 Δ^{order+2}`, are set to zero.
pub fn small_eigensystem(k_half: usize, phi: f64, delta: f64, order: usize) -> Result<ReducedSystem> {
    let mut sys = reduced_density(k_half, phi, delta, order)?;
    let eig = nalgebra::SymmetricEigen::new(sys.reduced.clone());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let rank = if order == 2 { 2 } else { 3 };
    let floor = 10.0 * delta.powi(order as i32 + 2);
    for (pos, &i) in idx.iter().enumerate() {
        let e = eig.eigenvalues[i];
        if pos >= rank || e <= floor {
            sys.eigenvalues.push(0.0);
            sys.discarded.push(e);
        } else {
            sys.eigenvalues.push(e);
        }
    }
    sys.eigenvectors = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    Ok(sys)
}

/// `H11 = 2K(K+1) - (2K(K+1))²Δ²`, `H22 = 2K(K+1) - ½(2K(K+1))²Δ²`.
pub fn qfi_small_delta(k_half: usize, delta: f64) -> FisherMatrix {
    if k_half > 0 && delta > validity_small(k_half) {
        log::warn!("small-delta closed form used at delta={delta} above 1/K={}", validity_small(k_half));
    }
    qfi_small_delta_quiet(k_half, delta)
}

fn qfi_small_delta_quiet(k_half: usize, delta: f64) -> FisherMatrix {
    let kk = 2.0 * (k_half * (k_half + 1)) as f64;
    let d2 = delta * delta;
    FisherMatrix::diagonal(kk - kk * kk * d2, kk - 0.5 * kk * kk * d2)
}

/// Raw validity scale `1/K` of the second-order expansion.
pub fn validity_small(k_half: usize) -> f64 {
    1.0 / k_half as f64
}

/// Validity scale `√(2/3)/K` of the fourth-order expansion.
pub fn validity_small_fourth(k_half: usize) -> f64 {
    (2.0f64 / 3.0).sqrt() / k_half as f64
}

/// Δ → 0 trade-off expression for an arbitrary projective measurement on the HB support.
pub fn tradeoff_small(povm: &ProjectivePovm, k_half: usize, phi: f64, delta: f64) -> Result<TradeoffTerms> {
    if k_half == 0 {
        return invalid("K must be at least 1");
    }
    if povm.dim() != k_half + 1 {
        return Err(Error::DimensionMismatch { expected: k_half + 1, got: povm.dim() });
    }
    let b = hb_coefficients(k_half);
    let pref = 2.0 / (k_half * (k_half + 1)) as f64;
    let (mut t1, mut t2) = (0.0, 0.0);
    for y in 0..povm.dim() {
        let r = povm.magnitudes(y);
        let x = povm.phases(y);
        let (mut s, mut c2, mut c0) = (0.0, 0.0, 0.0);
        for n in 0..=k_half {
            for m in 0..=k_half {
                let d = n as f64 - m as f64;
                let rr = r[n] * r[m] * b[n] * b[m];
                let theta = x[m] - x[n] + 2.0 * phi * d;
                s += rr * theta.sin() * d;
                c2 += rr * theta.cos() * d * d;
                c0 += rr * theta.cos();
            }
        }
        if c0 < PROBABILITY_FLOOR {
            continue;
        }
        t1 += s * s / c0;
        t2 += 4.0 * delta * delta * c2 * c2 / c0;
    }
    let (a, bb) = (pref * t1, pref * t2);
    Ok(TradeoffTerms { f11_over_h11: a, f22_over_h22: bb, total: a + bb })
}

/// Largest Δ below which the closed-form QFI stays within relative error `f` of the
/// exact QFI. Scans a grid on `(0, upper]` upward, then bisects the first crossing.
pub fn numeric_threshold_small(k_half: usize, f: f64, upper: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return invalid(format!("relative error budget f must lie in (0,1), got {f}"));
    }
    if !(upper > 0.0 && upper.is_finite()) {
        return invalid("upper search bound must be finite and > 0");
    }
    let state = ProbeState::hb(k_half)?;
    let err = |d: f64| -> Result<f64> {
        Ok(diagonal_relative_error(&qfi_small_delta_quiet(k_half, d), &qfi_matrix(&state, 0.0, d, None)?))
    };
    let n = 200;
    let step = upper / n as f64;
    let mut passing = 0.0;
    let mut failing = None;
    for i in 1..=n {
        let d = step * i as f64;
        if err(d)? > f {
            failing = Some(d);
            break;
        }
        passing = d;
    }
    let Some(mut hi) = failing else {
        log::warn!("relative error stays below f={f} up to delta={upper}");
        return Ok(upper);
    };
    let mut lo = passing;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if err(mid)? > f {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, orthonormality_error};
    use crate::measurements::canonical_phase_povm;
    use crate::states::taylor_small_delta;

    #[test]
    fn k1_second_vector() {
        let v = closed_form_vector(1, 0.3, 2).unwrap();
        let b = hb_coefficients(1);
        assert!((v[0] + Complex64::from(b[0])).norm() < 1e-15);
        assert!((v[1] - Complex64::from_polar(b[1], 0.6)).norm() < 1e-15);
        let v1 = closed_form_vector(1, 0.3, 1).unwrap();
        assert!(v1.dotc(&v).norm() < 1e-15);
    }

    #[test]
    fn basis_needs_enough_support() {
        assert!(gram_schmidt_basis(1, 0.0, 2).is_err());
        assert!(gram_schmidt_basis(3, 0.0, 4).is_err());
        assert!(gram_schmidt_basis(2, 0.0, 2).is_ok());
        assert!(gram_schmidt_basis(4, 0.0, 5).is_err());
    }

    #[test]
    fn closed_forms_already_orthonormal() {
        for k in [4usize, 7, 15] {
            let raw: Vec<CVec> = (1..=5).map(|j| closed_form_vector(k, 0.4, j).unwrap()).collect();
            assert!(orthonormality_error(&raw) < 1e-10);
        }
    }

    #[test]
    fn order2_entries_k2() {
        let d: f64 = 0.01;
        let m = reduced_matrix(2, d, 2).unwrap();
        assert!((m[(1, 1)] - 3e-4).abs() < 1e-16);
        assert!((m[(0, 0)] - (1.0 - 3e-4)).abs() < 1e-16);
        assert!((m[(0, 2)] + 24f64.sqrt() * 1e-4 / (4.0 * 2f64.sqrt())).abs() < 1e-17);
    }

    #[test]
    fn zero_delta_is_pure() {
        for order in [2, 4] {
            let m = reduced_matrix(6, 0.0, order).unwrap();
            let mut want = DMatrix::zeros(m.nrows(), m.ncols());
            want[(0, 0)] = 1.0;
            assert_eq!(m, want);
        }
    }

    #[test]
    fn expansion_reproduces_taylor() {
        for (k, order) in [(5usize, 2usize), (5, 4), (9, 4)] {
            let sys = reduced_density(k, 0.37, 0.01, order).unwrap();
            let t = taylor_small_delta(k, 0.37, 0.01, order).unwrap();
            assert!(max_abs(&(sys.expand() - t.entries)) < 1e-12, "K={k} order={order}");
        }
    }

    #[test]
    fn k1_eigenvalues() {
        let d: f64 = 0.03;
        let e = closed_form_eigenvalues(1, d, 2).unwrap();
        assert!((e[0] - d * d).abs() < 1e-16);
        assert!((e[2] - (1.0 - d * d)).abs() < 1e-16);
    }

    #[test]
    fn numeric_eigenvalues_match_closed_forms() {
        let (k, d) = (6usize, 0.005);
        for order in [2usize, 4] {
            let sys = small_eigensystem(k, 0.0, d, order).unwrap();
            let mut want = closed_form_eigenvalues(k, d, order).unwrap();
            want.sort_by(|a, b| b.total_cmp(a));
            let scale = ((k * (k + 1)) as f64 * d * d).powi(order as i32 / 2 + 1);
            for (got, w) in sys.eigenvalues.iter().zip(&want) {
                assert!((got - w).abs() < 10.0 * scale, "order {order}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn reconstruction_k4_fourth_order() {
        // the error is exactly the discarded spectral weight, which is O(Δ⁶)
        let mut errs = Vec::new();
        for d in [0.02f64, 0.01] {
            let sys = small_eigensystem(4, 0.2, d, 4).unwrap();
            let t = taylor_small_delta(4, 0.2, d, 4).unwrap();
            let err = max_abs(&(sys.reconstruct() - t.entries));
            let dropped: f64 = sys.discarded.iter().map(|e| e.abs()).sum();
            assert!(err <= dropped + 1e-15);
            let sum: f64 = sys.eigenvalues.iter().sum();
            assert!((sum - 1.0).abs() <= dropped + 1e-15);
            errs.push(err);
        }
        assert!((errs[0] / errs[1]).log2() >= 5.5);
    }

    #[test]
    fn qfi_closed_forms() {
        let h = qfi_small_delta(2, 0.0);
        assert_eq!((h.h11, h.h22), (12.0, 12.0));
        let d = 0.01;
        let h1 = qfi_small_delta(1, d);
        assert!((h1.h22 - (4.0 - 8.0 * d * d)).abs() < 1e-15);
    }

    #[test]
    fn validity_scales() {
        assert_eq!(validity_small(20), 0.05);
        assert_eq!(validity_small(1), 1.0);
        assert!((validity_small_fourth(1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn k1_pair_limits() {
        let p = canonical_phase_povm(1);
        let t = tradeoff_small(&p, 1, std::f64::consts::FRAC_PI_4, 1e-6).unwrap();
        assert!((t.f11_over_h11 - 1.0).abs() < 1e-10);
        assert!(t.f22_over_h22 < 1e-10);
        let t0 = tradeoff_small(&p, 1, 0.0, 1e-3).unwrap();
        assert!(t0.f11_over_h11.abs() < 1e-12);
        assert!(t0.total <= 1.0);
    }

    #[test]
    fn dimension_checked() {
        assert!(tradeoff_small(&canonical_phase_povm(3), 2, 0.0, 0.01).is_err());
    }
}
