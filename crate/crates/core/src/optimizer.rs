//! Simulated annealing over projective measurements, maximising `Tr[F H⁻¹]` at φ = 0.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fisher::{qfi_matrix, FisherMatrix};
use crate::linalg::{columns, eigh, expi_hermitian, from_columns, gram_schmidt, CMat};
use crate::measurements::{classical_fisher_from, fourier_povm, ProjectivePovm};
use crate::regime_large::optimal_povm_large;
use crate::states::{derivatives, evolve, ProbeState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealConfig {
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub steps_per_temperature: usize,
    pub temperature_levels: usize,
    pub initial_step_size: f64,
    pub step_decay: f64,
    /// Independent annealing runs; 0 is treated as a single run.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 0.1,
            cooling_factor: 0.95,
            steps_per_temperature: 200,
            temperature_levels: 60,
            initial_step_size: 0.3,
            step_decay: 0.97,
            restarts: 4,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return invalid("initial temperature must be > 0");
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return invalid("cooling factor must lie in (0,1)");
        }
        if self.steps_per_temperature == 0 || self.temperature_levels == 0 {
            return invalid("steps per temperature and temperature levels must be positive");
        }
        if !(self.initial_step_size > 0.0 && self.initial_step_size.is_finite()) {
            return invalid("initial step size must be > 0");
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return invalid("step decay must lie in (0,1]");
        }
        Ok(())
    }

    pub fn runs(&self) -> usize {
        self.restarts.max(1)
    }

    fn evaluations_per_run(&self) -> u64 {
        1 + (self.temperature_levels * self.steps_per_temperature) as u64
    }
}

#[derive(Debug, Clone)]
pub struct AnnealResult {
    pub best_value: f64,
    pub best_povm: ProjectivePovm,
    /// `(evaluation index, value)` each time a run improves on its best so far.
    pub history: Vec<(u64, f64)>,
    pub seed: u64,
    pub evaluations: u64,
}

fn gaussian_matrix(dim: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Columns of a Haar-distributed unitary (QR of a complex Gaussian matrix with phase fix).
pub fn random_povm(dim: usize, rng: &mut impl Rng) -> ProjectivePovm {
    let z = gaussian_matrix(dim, rng);
    let qr = z.qr();
    let r = qr.r();
    let mut u = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let col = u.column(j) * (d / d.norm());
            u.set_column(j, &col);
        }
    }
    ProjectivePovm::from_unitary(u)
}

/// `U exp(i step G)` with `G` a Gaussian Hermitian matrix scaled to unit spectral radius.
pub fn perturb(povm: &ProjectivePovm, step: f64, rng: &mut impl Rng) -> ProjectivePovm {
    let dim = povm.dim();
    let a = gaussian_matrix(dim, rng);
    let g = (&a + a.adjoint()).scale(0.5);
    let radius = eigh(&g).values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let g = if radius > 0.0 { g.unscale(radius) } else { g };
    ProjectivePovm::from_unitary(povm.frame() * expi_hermitian(&g, step))
}

fn reorthonormalize(p: &ProjectivePovm) -> ProjectivePovm {
    match gram_schmidt(&columns(p.frame())) {
        Ok(cols) => ProjectivePovm::from_unitary(from_columns(&cols)),
        Err(_) => p.clone(),
    }
}

struct Objective {
    rho: CMat,
    d1: CMat,
    d2: CMat,
    h: FisherMatrix,
}

impl Objective {
    fn value(&self, povm: &ProjectivePovm) -> f64 {
        let f = classical_fisher_from(povm.frame(), &self.rho, &self.d1, &self.d2);
        f.h11 / self.h.h11 + f.h22 / self.h.h22
    }
}

struct RunOutcome {
    best_value: f64,
    best: ProjectivePovm,
    history: Vec<(u64, f64)>,
}

fn anneal_run(obj: &Objective, start: ProjectivePovm, cfg: &AnnealConfig, rng: &mut ChaCha8Rng, offset: u64) -> RunOutcome {
    let mut current = start;
    let mut value = obj.value(&current);
    let mut best = current.clone();
    let mut best_value = value;
    let mut history = vec![(offset, value)];
    let mut eval = offset;
    let mut temperature = cfg.initial_temperature;
    let mut step = cfg.initial_step_size;
    for _ in 0..cfg.temperature_levels {
        for _ in 0..cfg.steps_per_temperature {
            let candidate = perturb(&current, step, rng);
            let v = obj.value(&candidate);
            eval += 1;
            let u: f64 = rng.random();
            if v >= value || u < ((v - value) / temperature).exp() {
                current = candidate;
                value = v;
                if value > best_value {
                    best_value = value;
                    best = current.clone();
                    history.push((eval, value));
                }
            }
        }
        current = reorthonormalize(&current);
        temperature *= cfg.cooling_factor;
        step *= cfg.step_decay;
    }
    RunOutcome { best_value, best, history }
}

/// Anneals at φ = 0. Run 0 starts from the Fourier (canonical) frame, run 1 from the
/// large-Δ equal-weight frame when the state admits one; further runs start Haar-random.
/// Both fixed frames are also scored up front so the result never falls below them.
pub fn optimize_tradeoff(state: &ProbeState, delta: f64, config: &AnnealConfig) -> Result<AnnealResult> {
    config.validate()?;
    let rho = evolve(state, 0.0, delta)?;
    let (d1, d2) = derivatives(state, 0.0, delta)?;
    let h = qfi_matrix(state, 0.0, delta, None)?;
    if !(h.h11 > 0.0 && h.h22 > 0.0) {
        return invalid(format!("QFI vanishes at delta={delta}; trade-off undefined"));
    }
    let obj = Objective { rho: rho.entries, d1, d2, h };
    let dim = state.dim();

    let mut baselines = vec![fourier_povm(dim, 0.0)];
    if let Ok(p) = optimal_povm_large(state) {
        baselines.push(p);
    }
    let nb = baselines.len() as u64;
    let per_run = config.evaluations_per_run();

    let outcomes: Vec<RunOutcome> = (0..config.runs())
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            let start = match baselines.get(r) {
                Some(p) => p.clone(),
                None => random_povm(dim, &mut rng),
            };
            anneal_run(&obj, start, config, &mut rng, nb + r as u64 * per_run)
        })
        .collect();

    let mut history: Vec<(u64, f64)> = baselines.iter().enumerate().map(|(i, p)| (i as u64, obj.value(p))).collect();
    let (mut best_value, mut best_povm) = history
        .iter()
        .zip(&baselines)
        .fold((f64::NEG_INFINITY, baselines[0].clone()), |acc, (&(_, v), p)| if v > acc.0 { (v, p.clone()) } else { acc });
    for o in outcomes {
        history.extend(o.history);
        if o.best_value > best_value {
            best_value = o.best_value;
            best_povm = o.best;
        }
    }
    Ok(AnnealResult {
        best_value,
        best_povm,
        history,
        seed: config.seed,
        evaluations: nb + per_run * config.runs() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> AnnealConfig {
        AnnealConfig { steps_per_temperature: 40, temperature_levels: 20, restarts: 2, seed: 7, ..Default::default() }
    }

    #[test]
    fn dim_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_povm(1, &mut rng);
        assert!((p.frame()[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_povm_reproducible_and_complete() {
        let a = random_povm(5, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_povm(5, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a.frame(), b.frame());
        assert!(a.completeness_error() < 1e-10);
    }

    #[test]
    fn perturb_small_step_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_povm(4, &mut rng);
        let q = perturb(&p, 1e-14, &mut rng);
        assert!(crate::linalg::max_abs(&(p.frame() - q.frame())) < 1e-12);
        let r = perturb(&random_povm(6, &mut rng), 0.5, &mut rng);
        assert!(r.completeness_error() < 1e-10);
    }

    #[test]
    fn bad_config_rejected() {
        let s = ProbeState::hb(2).unwrap();
        for cfg in [
            AnnealConfig { cooling_factor: 1.0, ..Default::default() },
            AnnealConfig { initial_temperature: 0.0, ..Default::default() },
            AnnealConfig { steps_per_temperature: 0, ..Default::default() },
            AnnealConfig { step_decay: 0.0, ..Default::default() },
        ] {
            assert!(optimize_tradeoff(&s, 0.3, &cfg).is_err());
        }
    }

    #[test]
    fn k1_is_one() {
        let s = ProbeState::hb(1).unwrap();
        let r = optimize_tradeoff(&s, 0.4, &quick()).unwrap();
        assert!((r.best_value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic() {
        let s = ProbeState::hb(3).unwrap();
        let a = optimize_tradeoff(&s, 0.3, &quick()).unwrap();
        let b = optimize_tradeoff(&s, 0.3, &quick()).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best_value, b.best_value);
        assert_eq!(a.evaluations, 2 + 2 * (1 + 40 * 20));
        let top = a.history.iter().map(|h| h.1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(top, a.best_value);
    }
}
