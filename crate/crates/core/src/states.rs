//! Fixed-particle-number probe states and their dephased density matrices.
//!
//! A probe with `2K` particles is `Σ a_n |n, 2K-n⟩`. Matrices are stored over
//! the support of the state only, so the Holland-Burnett probe (even `n` only)
//! lives in a `(K+1)`-dimensional space while keeping its original labels `n`.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    HollandBurnett,
    Generic,
}

#[derive(Debug, Clone)]
pub struct ProbeState {
    half_number: usize,
    amplitudes: Vec<Complex64>,
    offdiag_step: usize,
    support: Vec<usize>,
    kind: StateKind,
}

impl ProbeState {
    /// Holland-Burnett state from two Fock states of `k_half` particles each.
    pub fn hb(k_half: usize) -> Result<Self> {
        if k_half == 0 {
            return invalid("K must be at least 1");
        }
        let b = hb_coefficients(k_half);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * k_half + 1];
        for (m, &bm) in b.iter().enumerate() {
            amplitudes[2 * m] = bm.into();
        }
        Ok(Self {
            half_number: k_half,
            amplitudes,
            offdiag_step: 2,
            support: (0..=k_half).map(|m| 2 * m).collect(),
            kind: StateKind::HollandBurnett,
        })
    }

    /// Generic state from `2K+1` complex amplitudes; the vector is normalised.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 3 || len % 2 == 0 {
            return invalid(format!("expected 2K+1 amplitudes with K >= 1, got {len}"));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return invalid("amplitudes must be finite");
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return invalid("amplitude vector is zero");
        }
        let amplitudes: Vec<Complex64> = amplitudes.into_iter().map(|a| a / norm).collect();
        let support: Vec<usize> = (0..len).filter(|&n| amplitudes[n].norm() > 0.0).collect();
        let offdiag_step = support.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(1);
        Ok(Self {
            half_number: (len - 1) / 2,
            amplitudes,
            offdiag_step,
            support,
            kind: StateKind::Generic,
        })
    }

    /// Equal-weight state over `{0, step, 2 step, ...} ∩ [0, 2K]`.
    pub fn uniform(k_half: usize, step: usize) -> Result<Self> {
        if k_half == 0 || step == 0 {
            return invalid("K and step must be positive");
        }
        let amps = (0..=2 * k_half)
            .map(|n| if n % step == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn half_number(&self) -> usize {
        self.half_number
    }

    /// Full amplitude list over `n = 0..=2K`.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn offdiag_step(&self) -> usize {
        self.offdiag_step
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn support_amplitudes(&self) -> Vec<Complex64> {
        self.support.iter().map(|&n| self.amplitudes[n]).collect()
    }

    /// True when consecutive support labels are all exactly `offdiag_step` apart.
    pub fn equally_spaced(&self) -> bool {
        self.support.windows(2).all(|w| w[1] - w[0] == self.offdiag_step)
    }

    /// Variance of the label `n` in the pure probe.
    pub fn number_variance(&self) -> f64 {
        let (mut m1, mut m2) = (0.0, 0.0);
        for &n in &self.support {
            let p = self.amplitudes[n].norm_sqr();
            m1 += p * n as f64;
            m2 += p * (n * n) as f64;
        }
        m2 - m1 * m1
    }
}

/// Normalised HB coefficients `b_0..b_K`, evaluated through log-factorials.
pub fn hb_coefficients(k_half: usize) -> Vec<f64> {
    let lf = log_factorials(2 * k_half);
    let k = k_half;
    let ln2 = std::f64::consts::LN_2;
    let logs: Vec<f64> = (0..=k)
        .map(|m| 0.5 * (lf[2 * m] + lf[2 * k - 2 * m]) - k as f64 * ln2 - lf[m] - lf[k - m])
        .collect();
    let mut b: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    b.iter_mut().for_each(|x| *x /= norm);
    // enforce the mirror symmetry exactly
    for m in 0..=k / 2 {
        let avg = 0.5 * (b[m] + b[k - m]);
        b[m] = avg;
        b[k - m] = avg;
    }
    b
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub entries: CMat,
    /// Fock labels `n` of the basis states `|n, 2K-n⟩`.
    pub labels: Vec<usize>,
    pub phi: f64,
    pub delta: f64,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `x = exp(-Δ²/4)`
    pub fn x(&self) -> f64 {
        (-self.delta * self.delta / 4.0).exp()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return invalid(format!("delta must be finite and >= 0, got {delta}"));
    }
    Ok(())
}

fn build(state: &ProbeState, f: impl Fn(Complex64, f64) -> Complex64) -> CMat {
    let s = state.support();
    let a = state.amplitudes();
    CMat::from_fn(s.len(), s.len(), |i, j| {
        let d = s[i] as f64 - s[j] as f64;
        f(a[s[i]] * a[s[j]].conj(), d)
    })
}

/// Evolved density matrix after phase `phi` and Gaussian phase diffusion `delta`.
pub fn evolve(state: &ProbeState, phi: f64, delta: f64) -> Result<DensityMatrix> {
    check_delta(delta)?;
    let entries = build(state, |aa, d| aa * Complex64::from_polar((-0.5 * delta * delta * d * d).exp(), phi * d));
    Ok(DensityMatrix { entries, labels: state.support().to_vec(), phi, delta })
}

/// Analytic `(∂_φ ρ, ∂_Δ ρ)`.
pub fn derivatives(state: &ProbeState, phi: f64, delta: f64) -> Result<(CMat, CMat)> {
    check_delta(delta)?;
    let base = |aa: Complex64, d: f64| aa * Complex64::from_polar((-0.5 * delta * delta * d * d).exp(), phi * d);
    let dphi = build(state, |aa, d| base(aa, d) * Complex64::new(0.0, d));
    let ddelta = build(state, |aa, d| base(aa, d) * (-delta * d * d));
    Ok((dphi, ddelta))
}

/// Keeps the diagonal and the `±k` off-diagonal of the evolved matrix.
pub fn tridiagonal_approx(state: &ProbeState, phi: f64, delta: f64) -> Result<DensityMatrix> {
    let mut rho = evolve(state, phi, delta)?;
    let threshold = crate::regime_large::delta_threshold_tight(state, 0.05)?;
    if delta < threshold {
        log::warn!("tridiagonal approximation used at delta={delta} below threshold {threshold:.4}");
    }
    let k = state.offdiag_step();
    let s = state.support();
    for i in 0..s.len() {
        for j in 0..s.len() {
            let gap = s[i].abs_diff(s[j]);
            if gap != 0 && gap != k {
                rho.entries[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(rho)
}

/// Taylor-expanded HB density matrix in `Δ²`, truncated at `order` (2 or 4).
pub fn taylor_small_delta(k_half: usize, phi: f64, delta: f64, order: usize) -> Result<DensityMatrix> {
    check_order(order)?;
    check_delta(delta)?;
    if k_half == 0 {
        return invalid("K must be at least 1");
    }
    let b = hb_coefficients(k_half);
    let d2 = delta * delta;
    let entries = CMat::from_fn(k_half + 1, k_half + 1, |i, j| {
        let d = i as f64 - j as f64;
        let t = d2 * d * d;
        let series = if order == 2 { 1.0 - 2.0 * t } else { 1.0 - 2.0 * t + 2.0 * t * t };
        Complex64::from_polar(b[i] * b[j] * series, 2.0 * phi * d)
    });
    Ok(DensityMatrix { entries, labels: (0..=k_half).map(|m| 2 * m).collect(), phi, delta })
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order != 2 && order != 4 {
        return invalid(format!("order must be 2 or 4, got {order}"));
    }
    Ok(())
}
