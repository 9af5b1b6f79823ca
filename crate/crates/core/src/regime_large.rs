//! Large phase-diffusion regime: tridiagonal density matrix closed forms.
//!
//! With `x = exp(-Δ²/4)` only the `±k` off-diagonal survives and the QFI reduces to
//! `H11 = 4k² x^{4k²} A`, `H22 = k² Δ² H11`, where
//! `A = Σ |a_n|²|a_{n-k}|² / (|a_n|² + |a_{n-k}|²) ≤ 1/2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fisher::{qfi_matrix, FisherMatrix, SldPair};
use crate::linalg::{CMat, CVec};
use crate::measurements::ProjectivePovm;
use crate::states::{ProbeState, StateKind};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LargeDeltaReport {
    pub h11: f64,
    pub h22: f64,
    pub delta_threshold: f64,
    pub f: f64,
    pub sum_a: f64,
}

/// The shared sum `A` over label pairs `(n, n-k)`.
pub fn sum_a(state: &ProbeState) -> f64 {
    let k = state.offdiag_step();
    let a = state.amplitudes();
    (k..a.len())
        .map(|n| {
            let (p, q) = (a[n].norm_sqr(), a[n - k].norm_sqr());
            if p + q > 0.0 {
                p * q / (p + q)
            } else {
                0.0
            }
        })
        .sum()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return invalid(format!("delta must be finite and > 0, got {delta}"));
    }
    Ok(())
}

fn check_f(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return invalid(format!("relative error budget f must lie in (0,1), got {f}"));
    }
    Ok(())
}

pub fn qfi_large_delta(state: &ProbeState, delta: f64) -> Result<FisherMatrix> {
    check_delta(delta)?;
    let k = state.offdiag_step() as f64;
    let x4 = (-k * k * delta * delta).exp();
    let h11 = 4.0 * k * k * x4 * sum_a(state);
    Ok(FisherMatrix::diagonal(h11, k * k * delta * delta * h11))
}

pub fn large_delta_report(state: &ProbeState, delta: f64, f: f64) -> Result<LargeDeltaReport> {
    let h = qfi_large_delta(state, delta)?;
    Ok(LargeDeltaReport {
        h11: h.h11,
        h22: h.h22,
        delta_threshold: delta_threshold(state, f)?,
        f,
        sum_a: sum_a(state),
    })
}

/// Closed-form SLDs over the support basis.
pub fn sld_large_delta(state: &ProbeState, phi: f64, delta: f64) -> Result<SldPair> {
    check_delta(delta)?;
    let k = state.offdiag_step();
    let kf = k as f64;
    let x2 = (-kf * kf * delta * delta / 2.0).exp();
    let s = state.support();
    let a = state.amplitudes();
    let core = |i: usize, j: usize| -> Option<Complex64> {
        if s[i].abs_diff(s[j]) != k {
            return None;
        }
        let (an, am) = (a[s[i]], a[s[j]]);
        let d = s[i] as f64 - s[j] as f64;
        Some(an * am.conj() / (an.norm_sqr() + am.norm_sqr()) * Complex64::from_polar(1.0, phi * d))
    };
    let dim = s.len();
    let l1 = CMat::from_fn(dim, dim, |i, j| {
        core(i, j).map_or(Complex64::new(0.0, 0.0), |c| {
            c * Complex64::new(0.0, 2.0 * x2 * (s[i] as f64 - s[j] as f64))
        })
    });
    let l2 = CMat::from_fn(dim, dim, |i, j| {
        core(i, j).map_or(Complex64::new(0.0, 0.0), |c| c * (-2.0 * kf * kf * delta * x2))
    });
    Ok(SldPair { l1, l2, cutoff_used: 0.0 })
}

/// `√((1/8) ln(K/f))`
pub fn hb_threshold(k_half: usize, f: f64) -> Result<f64> {
    check_f(f)?;
    if k_half == 0 {
        return invalid("K must be at least 1");
    }
    Ok(((k_half as f64 / f).ln() / 8.0).sqrt())
}

/// `√((2/(k+1)²) ln(2K/f))`
pub fn fpn_threshold(k_half: usize, step: usize, f: f64) -> Result<f64> {
    check_f(f)?;
    if k_half == 0 || step == 0 {
        return invalid("K and k must be positive");
    }
    let k1 = (step + 1) as f64;
    Ok((2.0 / (k1 * k1) * (2.0 * k_half as f64 / f).ln()).sqrt())
}

/// Closed-form threshold for the state's family (HB or generic FPN).
pub fn delta_threshold(state: &ProbeState, f: f64) -> Result<f64> {
    match state.kind() {
        StateKind::HollandBurnett => hb_threshold(state.half_number(), f),
        StateKind::Generic => fpn_threshold(state.half_number(), state.offdiag_step(), f),
    }
}

/// Threshold from the actual coefficients: the discarded entries sum to at most
/// `S exp(-g²Δ²/2)` with `S = Σ |a_n||a_n'|` over discarded pairs and `g` the
/// smallest discarded gap. Returns 0 when nothing is discarded or `S ≤ f`.
pub fn delta_threshold_tight(state: &ProbeState, f: f64) -> Result<f64> {
    check_f(f)?;
    let k = state.offdiag_step();
    let s = state.support();
    let a = state.amplitudes();
    let mut total = 0.0;
    let mut gap = usize::MAX;
    for (i, &n) in s.iter().enumerate() {
        for &m in &s[i + 1..] {
            let g = m - n;
            if g != k {
                total += 2.0 * a[n].norm() * a[m].norm();
                gap = gap.min(g);
            }
        }
    }
    if gap == usize::MAX || total <= f {
        return Ok(0.0);
    }
    let g = gap as f64;
    Ok((2.0 / (g * g) * (total / f).ln()).sqrt())
}

fn require_equal_spacing(state: &ProbeState) -> Result<()> {
    if !state.equally_spaced() {
        return invalid("support gaps are not all equal to the off-diagonal step");
    }
    Ok(())
}

/// Equal-weight projectors with phases `X_{y,m} = θ_m - 2π y m / D` over the support.
pub fn optimal_povm_large(state: &ProbeState) -> Result<ProjectivePovm> {
    require_equal_spacing(state)?;
    let amps = state.support_amplitudes();
    let d = amps.len();
    let r = 1.0 / (d as f64).sqrt();
    let two_pi = 2.0 * std::f64::consts::PI;
    let vectors = (0..d)
        .map(|y| {
            CVec::from_iterator(
                d,
                amps.iter().enumerate().map(|(m, a)| {
                    Complex64::from_polar(r, a.arg() - two_pi * (y * m % d) as f64 / d as f64)
                }),
            )
        })
        .collect();
    ProjectivePovm::new(vectors)
}

/// `(Σ |a_n||a_{n-k}|)² / A`
pub fn tradeoff_large_analytic(state: &ProbeState) -> Result<f64> {
    require_equal_spacing(state)?;
    let a = state.support_amplitudes();
    if a.len() < 2 {
        return invalid("state needs at least two support components");
    }
    let cross: f64 = a.windows(2).map(|w| w[0].norm() * w[1].norm()).sum();
    Ok(cross * cross / sum_a(state))
}

/// Larger of the two diagonal relative errors of `approx` against `exact`.
pub fn diagonal_relative_error(approx: &FisherMatrix, exact: &FisherMatrix) -> f64 {
    let r = |a: f64, e: f64| if e != 0.0 { ((a - e) / e).abs() } else { a.abs() };
    r(approx.h11, exact.h11).max(r(approx.h22, exact.h22))
}

/// Smallest Δ above which the closed-form QFI stays within relative error `f` of the
/// exact QFI. Scans a grid on `(0, upper]` from the top down, then bisects the first
/// crossing. Returns 0 when the tridiagonal form is exact (nothing discarded).
pub fn numeric_threshold_large(state: &ProbeState, f: f64, upper: f64) -> Result<f64> {
    check_f(f)?;
    check_delta(upper)?;
    if state.support().len() <= 2 {
        return Ok(0.0);
    }
    let err = |d: f64| -> Result<f64> {
        Ok(diagonal_relative_error(&qfi_large_delta(state, d)?, &qfi_matrix(state, 0.0, d, None)?))
    };
    let n = 200;
    let step = upper / n as f64;
    if err(upper)? > f {
        log::warn!("relative error exceeds f={f} even at delta={upper}");
        return Ok(upper);
    }
    let mut passing = upper;
    let mut failing = None;
    for i in (1..n).rev() {
        let d = step * i as f64;
        if err(d)? > f {
            failing = Some(d);
            break;
        }
        passing = d;
    }
    let Some(mut lo) = failing else { return Ok(0.0) };
    let mut hi = passing;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if err(mid)? > f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
