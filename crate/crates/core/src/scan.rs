//! Parameter sweeps behind the command-line front-end.
//!
//! Every sweep evaluates rows independently inside a rayon pool of the requested size and
//! assembles them in grid order, so the output does not depend on the job count.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fisher::{qfi_matrix, FisherMatrix};
use crate::linalg::{CMat, CVec};
use crate::measurements::{
    align_fourier_offset, canonical_tradeoff_aligned, classical_fisher_from, fourier_povm, make_povm, tradeoff_terms,
    ProjectivePovm, TradeoffTerms,
};
use crate::optimizer::{optimize_tradeoff, AnnealConfig, AnnealResult};
use crate::output::{Cell, Table};
use crate::regime_large::{
    delta_threshold, delta_threshold_tight, numeric_threshold_large, optimal_povm_large, qfi_large_delta,
    tradeoff_large_analytic,
};
use crate::regime_small::{
    numeric_threshold_small, qfi_small_delta, tradeoff_small, validity_small, validity_small_fourth,
};
use crate::states::{derivatives, evolve, ProbeState, StateKind};

/// Small-Δ rows are flagged valid while `K Δ` stays below this.
pub const SMALL_VALIDITY_KDELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Hb,
    Amplitudes(Vec<Complex64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Large,
    Small,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Large => "large",
            Method::Small => "small",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Method::Exact),
            "large" => Ok(Method::Large),
            "small" => Ok(Method::Small),
            other => Err(format!("unknown method '{other}' (expected exact, large or small)")),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PovmChoice {
    /// Fourier basis with its reference phase aligned to maximise the trade-off.
    Canonical,
    /// Fourier basis with zero reference phase.
    CanonicalRaw,
    LargeOptimal,
    Explicit(ProjectivePovm),
}

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub state: StateSpec,
    pub ks: Vec<usize>,
    pub deltas: Vec<f64>,
    pub phi: f64,
    pub method: Method,
    /// Relative error budget used for validity flags and thresholds.
    pub f: f64,
    pub jobs: Option<usize>,
    pub seed: u64,
}

impl ScanSpec {
    pub fn new(ks: Vec<usize>, deltas: Vec<f64>) -> Self {
        Self { state: StateSpec::Hb, ks, deltas, phi: 0.0, method: Method::Exact, f: 0.05, jobs: None, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() {
            return invalid("K grid is empty");
        }
        if self.ks.contains(&0) {
            return invalid("K must be at least 1");
        }
        if self.deltas.is_empty() {
            return invalid("delta grid is empty");
        }
        if let Some(d) = self.deltas.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return invalid(format!("delta must be finite and >= 0, got {d}"));
        }
        if !self.phi.is_finite() {
            return invalid("phi must be finite");
        }
        if !(self.f > 0.0 && self.f < 1.0) {
            return invalid(format!("f must lie in (0,1), got {}", self.f));
        }
        if self.jobs == Some(0) {
            return invalid("--jobs must be at least 1");
        }
        if self.method == Method::Small && self.state != StateSpec::Hb {
            return invalid("the small-delta method is only available for HB states");
        }
        if self.method == Method::Large && self.deltas.contains(&0.0) {
            return invalid("the large-delta method needs delta > 0");
        }
        Ok(())
    }

    pub fn probe(&self, k: usize) -> Result<ProbeState> {
        match &self.state {
            StateSpec::Hb => ProbeState::hb(k),
            StateSpec::Amplitudes(a) => ProbeState::from_amplitudes(a.clone()),
        }
    }

    fn grid(&self) -> Vec<(usize, f64)> {
        self.ks.iter().flat_map(|&k| self.deltas.iter().map(move |&d| (k, d))).collect()
    }
}

/// Runs `f` over `items` on a pool of `jobs` threads (default: available parallelism),
/// returning results in input order. The first failing row (in grid order) is reported.
pub fn run_rows<T, R, F>(jobs: Option<usize>, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect::<Vec<_>>()).into_iter().collect()
}

fn at_row(k: usize, delta: f64, e: Error) -> Error {
    match e {
        Error::NumericalFailure { context, residual } => {
            Error::NumericalFailure { context: format!("row K={k} delta={delta}: {context}"), residual }
        }
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("row K={k} delta={delta}: {m}")),
        other => other,
    }
}

fn hb_k(state: &ProbeState) -> usize {
    state.half_number()
}

/// One QFI row: `(h, valid_flag)`.
pub fn qfi_row(spec: &ScanSpec, k: usize, delta: f64) -> Result<(ProbeState, FisherMatrix, bool)> {
    let state = spec.probe(k)?;
    let (h, valid) = match spec.method {
        Method::Exact => (qfi_matrix(&state, spec.phi, delta, None)?, true),
        Method::Large => {
            let threshold = delta_threshold(&state, spec.f)?;
            (qfi_large_delta(&state, delta)?, delta >= threshold)
        }
        Method::Small => {
            let k = hb_k(&state);
            (qfi_small_delta(k, delta), k as f64 * delta <= SMALL_VALIDITY_KDELTA)
        }
    };
    Ok((state, h, valid))
}

pub fn qfi_table(spec: &ScanSpec) -> Result<Table> {
    spec.validate()?;
    let grid = spec.grid();
    let rows = run_rows(spec.jobs, &grid, |&(k, d)| qfi_row(spec, k, d).map_err(|e| at_row(k, d, e)))?;
    let mut t = Table::new("qfi", &["K", "delta", "method", "h11", "h22", "h12", "valid_flag"]);
    for ((_, d), (state, h, valid)) in grid.iter().zip(rows) {
        t.push(vec![
            state.half_number().into(),
            (*d).into(),
            spec.method.name().into(),
            h.h11.into(),
            h.h22.into(),
            h.h12.into(),
            valid.into(),
        ]);
    }
    Ok(t)
}

/// Derivatives restricted to the `±k` off-diagonal.
fn tridiagonal_model(state: &ProbeState, phi: f64, delta: f64) -> Result<(CMat, CMat, CMat)> {
    let rho = evolve(state, phi, delta)?;
    let (mut d1, mut d2) = derivatives(state, phi, delta)?;
    let mut r = rho.entries;
    let s = state.support();
    let k = state.offdiag_step();
    for i in 0..s.len() {
        for j in 0..s.len() {
            let g = s[i].abs_diff(s[j]);
            if g != 0 && g != k {
                r[(i, j)] = Complex64::new(0.0, 0.0);
                d1[(i, j)] = Complex64::new(0.0, 0.0);
                d2[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok((r, d1, d2))
}

fn fixed_povm(choice: &PovmChoice, state: &ProbeState) -> Result<ProjectivePovm> {
    let povm = match choice {
        PovmChoice::Canonical | PovmChoice::CanonicalRaw => fourier_povm(state.dim(), 0.0),
        PovmChoice::LargeOptimal => optimal_povm_large(state)?,
        PovmChoice::Explicit(p) => p.clone(),
    };
    if povm.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), got: povm.dim() });
    }
    Ok(povm)
}

fn exact_terms(povm: &ProjectivePovm, state: &ProbeState, phi: f64, delta: f64) -> Result<TradeoffTerms> {
    let rho = evolve(state, phi, delta)?;
    let (d1, d2) = derivatives(state, phi, delta)?;
    let h = qfi_matrix(state, phi, delta, None)?;
    tradeoff_terms(&classical_fisher_from(povm.frame(), &rho.entries, &d1, &d2), &h)
}

/// Trade-off terms for one `(K, Δ)` under the spec's method.
///
/// * exact: CFI of the measurement on the full density matrix against the exact QFI.
///   The aligned canonical measurement is phase covariant, so φ does not enter it.
/// * large: the equal-weight measurement reports the closed-form value (split evenly
///   between the two terms when `D ≥ 3`; at `D = 2` the model is exact and the exact
///   route is used); other measurements use the tridiagonal model.
/// * small: the Δ → 0 trade-off expression for HB states.
pub fn tradeoff_row(spec: &ScanSpec, choice: &PovmChoice, k: usize, delta: f64) -> Result<(ProbeState, TradeoffTerms)> {
    let state = spec.probe(k)?;
    let phi = spec.phi;
    let terms = match spec.method {
        Method::Exact => match choice {
            PovmChoice::Canonical => canonical_tradeoff_aligned(&state, delta)?.terms,
            _ => exact_terms(&fixed_povm(choice, &state)?, &state, phi, delta)?,
        },
        Method::Large => match choice {
            PovmChoice::LargeOptimal if state.support().len() >= 3 => {
                let t = tradeoff_large_analytic(&state)?;
                TradeoffTerms { f11_over_h11: 0.5 * t, f22_over_h22: 0.5 * t, total: t }
            }
            PovmChoice::LargeOptimal => exact_terms(&fixed_povm(choice, &state)?, &state, phi, delta)?,
            PovmChoice::Canonical => {
                let h = qfi_large_delta(&state, delta)?;
                let (r, d1, d2) = tridiagonal_model(&state, 0.0, delta)?;
                let dim = state.dim();
                align_fourier_offset(dim, |o| {
                    tradeoff_terms(&classical_fisher_from(fourier_povm(dim, o).frame(), &r, &d1, &d2), &h)
                })?
                .terms
            }
            _ => {
                let povm = fixed_povm(choice, &state)?;
                let h = qfi_large_delta(&state, delta)?;
                let (r, d1, d2) = tridiagonal_model(&state, phi, delta)?;
                tradeoff_terms(&classical_fisher_from(povm.frame(), &r, &d1, &d2), &h)?
            }
        },
        Method::Small => {
            let kh = hb_k(&state);
            match choice {
                PovmChoice::Canonical => {
                    let dim = state.dim();
                    align_fourier_offset(dim, |o| tradeoff_small(&fourier_povm(dim, o), kh, 0.0, delta))?.terms
                }
                _ => tradeoff_small(&fixed_povm(choice, &state)?, kh, phi, delta)?,
            }
        }
    };
    Ok((state, terms))
}

pub fn tradeoff_table(spec: &ScanSpec, choice: &PovmChoice) -> Result<Table> {
    spec.validate()?;
    let grid = spec.grid();
    let rows = run_rows(spec.jobs, &grid, |&(k, d)| tradeoff_row(spec, choice, k, d).map_err(|e| at_row(k, d, e)))?;
    let mut t = Table::new("tradeoff", &["K", "delta", "f11_over_h11", "f22_over_h22", "total"]);
    for ((_, d), (state, terms)) in grid.iter().zip(rows) {
        t.push(vec![
            state.half_number().into(),
            (*d).into(),
            terms.f11_over_h11.into(),
            terms.f22_over_h22.into(),
            terms.total.into(),
        ]);
    }
    Ok(t)
}

pub struct AnnealTables {
    pub summary: Table,
    pub history: Table,
}

pub fn anneal_results(spec: &ScanSpec, config: &AnnealConfig) -> Result<Vec<(usize, f64, AnnealResult)>> {
    spec.validate()?;
    config.validate()?;
    if spec.phi != 0.0 {
        log::warn!("annealing evaluates at phi = 0; --phi {} ignored", spec.phi);
    }
    if spec.method != Method::Exact {
        log::warn!("annealing always uses the exact route; --method {} ignored", spec.method.name());
    }
    let grid = spec.grid();
    let config = AnnealConfig { seed: spec.seed, ..*config };
    let rows = run_rows(spec.jobs, &grid, |&(k, d)| {
        let state = spec.probe(k).map_err(|e| at_row(k, d, e))?;
        let r = optimize_tradeoff(&state, d, &config).map_err(|e| at_row(k, d, e))?;
        Ok((state.half_number(), d, r))
    })?;
    Ok(rows)
}

pub fn anneal_tables(spec: &ScanSpec, config: &AnnealConfig) -> Result<AnnealTables> {
    let rows = anneal_results(spec, config)?;
    let mut summary = Table::new("anneal", &["K", "delta", "best_value", "evaluations", "seed"]);
    let mut history = Table::new("anneal-history", &["K", "delta", "evaluation", "value"]);
    for (k, d, r) in rows {
        summary.push(vec![k.into(), d.into(), r.best_value.into(), r.evaluations.into(), r.seed.into()]);
        for (i, v) in r.history {
            history.push(vec![k.into(), d.into(), i.into(), v.into()]);
        }
    }
    Ok(AnnealTables { summary, history })
}

/// Threshold table. The numeric columns are the expensive part and only filled on request.
pub fn validity_table(spec: &ScanSpec, numeric: bool) -> Result<Table> {
    spec.validate()?;
    let mut cols = vec!["K", "f", "large_closed", "large_tight", "small_scale", "small_scale_fourth"];
    if numeric {
        cols.extend(["large_numeric", "small_numeric"]);
    }
    let f = spec.f;
    let rows = run_rows(spec.jobs, &spec.ks, |&k| -> Result<Vec<Cell>> {
        let state = spec.probe(k)?;
        let kh = state.half_number();
        let hb = state.kind() == StateKind::HollandBurnett;
        let closed = delta_threshold(&state, f)?;
        let mut row: Vec<Cell> = vec![
            kh.into(),
            f.into(),
            closed.into(),
            delta_threshold_tight(&state, f)?.into(),
            if hb { validity_small(kh) } else { f64::NAN }.into(),
            if hb { validity_small_fourth(kh) } else { f64::NAN }.into(),
        ];
        if numeric {
            row.push(numeric_threshold_large(&state, f, 2.0 * closed + 0.5)?.into());
            let small = if hb { numeric_threshold_small(kh, f, 2.0 / kh as f64)? } else { f64::NAN };
            row.push(small.into());
        }
        Ok(row)
    })?;
    let mut t = Table::new("validity", &cols);
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

/// Amplitude file: JSON list of `[re, im]` pairs indexed by n = 0..2K.
pub fn read_amplitudes(path: &Path) -> Result<Vec<Complex64>> {
    let text = std::fs::read_to_string(path)?;
    let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("{}: expected a JSON list of [re, im] pairs: {e}", path.display())))?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

/// POVM file: JSON list of outcome vectors, each a list of `[re, im]` pairs over the support.
pub fn read_povm(path: &Path) -> Result<ProjectivePovm> {
    let text = std::fs::read_to_string(path)?;
    let vecs: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidArgument(format!("{}: expected a JSON list of vectors of [re, im] pairs: {e}", path.display()))
    })?;
    let vectors = vecs
        .into_iter()
        .map(|v| CVec::from_iterator(v.len(), v.into_iter().map(|[re, im]| Complex64::new(re, im))))
        .collect();
    make_povm(vectors)
}
