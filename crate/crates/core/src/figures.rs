//! Fixed scan presets reproducing the data series of each figure.
//!
//! Annealing presets use the default [`AnnealConfig`] with the requested seed and reduced
//! K grids so they run on a desktop.

use serde_json::{json, Value as Json};

use crate::error::{invalid, Result};
use crate::fisher::qfi_matrix;
use crate::measurements::canonical_tradeoff_aligned;
use crate::optimizer::{optimize_tradeoff, AnnealConfig};
use crate::output::{Cell, Table};
use crate::regime_large::{
    delta_threshold_tight, hb_threshold, numeric_threshold_large, qfi_large_delta, sum_a, tradeoff_large_analytic,
};
use crate::regime_small::{numeric_threshold_small, qfi_small_delta, validity_small, validity_small_fourth};
use crate::scan::run_rows;
use crate::states::ProbeState;

pub const FIGURES: [&str; 11] =
    ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig13"];

#[derive(Debug, Clone)]
pub struct FigureBundle {
    pub name: String,
    pub tables: Vec<Table>,
    pub preset: Json,
}

impl FigureBundle {
    pub fn manifest(&self, file_names: &[String]) -> Json {
        json!({
            "format": "qest-figure",
            "version": crate::output::FORMAT_VERSION,
            "figure": self.name,
            "preset": self.preset,
            "tables": self.tables.iter().zip(file_names).map(|(t, f)| json!({
                "command": t.command,
                "file": f,
                "rows": t.rows.len(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()
}

fn exact_vs_approx(
    name: &str,
    grid: &[(usize, f64)],
    jobs: Option<usize>,
    large: bool,
) -> Result<Table> {
    let rows = run_rows(jobs, grid, |&(k, d)| {
        let s = ProbeState::hb(k)?;
        let e = qfi_matrix(&s, 0.0, d, None)?;
        let a = if large { qfi_large_delta(&s, d)? } else { qfi_small_delta(k, d) };
        Ok((e, a))
    })?;
    let mut t = Table::new(name, &["K", "delta", "h11_exact", "h22_exact", "h11_approx", "h22_approx"]);
    for (&(k, d), (e, a)) in grid.iter().zip(rows) {
        t.push(vec![k.into(), d.into(), e.h11.into(), e.h22.into(), a.h11.into(), a.h22.into()]);
    }
    Ok(t)
}

fn anneal_grid(name: &str, grid: &[(usize, f64)], cfg: &AnnealConfig, jobs: Option<usize>) -> Result<Table> {
    let rows = run_rows(jobs, grid, |&(k, d)| optimize_tradeoff(&ProbeState::hb(k)?, d, cfg))?;
    let mut t = Table::new(name, &["K", "delta", "best_value", "evaluations", "seed"]);
    for (&(k, d), r) in grid.iter().zip(rows) {
        t.push(vec![k.into(), d.into(), r.best_value.into(), r.evaluations.into(), r.seed.into()]);
    }
    Ok(t)
}

fn float(c: &Cell) -> f64 {
    match c {
        Cell::Float(x) => *x,
        Cell::Int(i) => *i as f64,
        _ => f64::NAN,
    }
}

pub fn build(name: &str, seed: u64, jobs: Option<usize>) -> Result<FigureBundle> {
    let cfg = AnnealConfig { seed, ..AnnealConfig::default() };
    let (tables, preset) = match name {
        "fig2" => {
            let grid: Vec<_> = (1..=30).map(|k| (k, 1.0)).collect();
            (vec![exact_vs_approx("fig2", &grid, jobs, true)?], json!({"state": "hb", "K": [1, 30], "delta": 1.0, "approx": "large"}))
        }
        "fig3" => {
            let grid: Vec<_> = linspace(0.6, 2.0, 29).into_iter().map(|d| (25, d)).collect();
            (vec![exact_vs_approx("fig3", &grid, jobs, true)?], json!({"state": "hb", "K": 25, "delta": [0.6, 2.0, 29], "approx": "large"}))
        }
        "fig4" => {
            let ks: Vec<usize> = (1..=100).chain((150..=1500).step_by(50)).collect();
            let vals = run_rows(jobs, &ks, |&k| tradeoff_large_analytic(&ProbeState::hb(k)?))?;
            let mut analytic = Table::new("fig4-analytic", &["K", "tradeoff_analytic"]);
            for (&k, v) in ks.iter().zip(vals) {
                analytic.push(vec![k.into(), v.into()]);
            }
            let grid: Vec<_> = (1..=6).map(|k| (k, 1.0)).collect();
            let mut anneal = anneal_grid("fig4-anneal", &grid, &cfg, jobs)?;
            anneal.columns.push("tradeoff_analytic".into());
            for row in &mut anneal.rows {
                let k = float(&row[0]) as usize;
                row.push(tradeoff_large_analytic(&ProbeState::hb(k)?)?.into());
            }
            (
                vec![analytic, anneal],
                json!({"state": "hb", "analytic_K": "1..100, 150..1500 step 50", "anneal_K": [1, 6], "anneal_delta": 1.0, "anneal": cfg}),
            )
        }
        "fig5" => {
            let grid: Vec<_> = (1..=30).map(|k| (k, 0.01)).collect();
            (vec![exact_vs_approx("fig5", &grid, jobs, false)?], json!({"state": "hb", "K": [1, 30], "delta": 0.01, "approx": "small"}))
        }
        "fig6" => {
            let deltas = linspace(0.05, 1.5, 30);
            let grid: Vec<_> = (2..=5).flat_map(|k| deltas.iter().map(move |&d| (k, d))).collect();
            let main = anneal_grid("fig6", &grid, &cfg, jobs)?;
            let mut peak = Table::new("fig6-peak", &["K", "peak_delta", "peak_value"]);
            for k in 2..=5usize {
                let best = main
                    .rows
                    .iter()
                    .filter(|r| float(&r[0]) as usize == k)
                    .map(|r| (float(&r[1]), float(&r[2])))
                    .fold((f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                peak.push(vec![k.into(), best.0.into(), best.1.into()]);
            }
            (vec![main, peak], json!({"state": "hb", "K": [2, 5], "delta": [0.05, 1.5, 30], "anneal": cfg}))
        }
        "fig7" => {
            let grid: Vec<_> = linspace(0.002, 0.03, 15).into_iter().map(|d| (20, d)).collect();
            (vec![exact_vs_approx("fig7", &grid, jobs, false)?], json!({"state": "hb", "K": 20, "delta": [0.002, 0.03, 15], "approx": "small"}))
        }
        "fig8" => {
            let deltas = [0.01, 0.02, 0.05, 0.1, 0.15, 0.2];
            let grid: Vec<_> = (2..=5).flat_map(|k| deltas.iter().map(move |&d| (k, d))).collect();
            let main = anneal_grid("fig8", &grid, &cfg, jobs)?;
            let inlay_grid: Vec<_> = (1..=6).map(|k| (k, 0.01)).collect();
            let inlay = anneal_grid("fig8-inlay", &inlay_grid, &cfg, jobs)?;
            (vec![main, inlay], json!({"state": "hb", "K": [2, 5], "delta": deltas, "inlay_K": [1, 6], "inlay_delta": 0.01, "anneal": cfg}))
        }
        "fig9" => {
            let ks: Vec<usize> = (1..=80).collect();
            let rows = run_rows(jobs, &ks, |&k| canonical_tradeoff_aligned(&ProbeState::hb(k)?, 0.01))?;
            let mut t = Table::new("fig9", &["K", "delta", "offset", "f11_over_h11", "f22_over_h22", "total"]);
            for (&k, r) in ks.iter().zip(rows) {
                t.push(vec![
                    k.into(),
                    0.01.into(),
                    r.offset.into(),
                    r.terms.f11_over_h11.into(),
                    r.terms.f22_over_h22.into(),
                    r.terms.total.into(),
                ]);
            }
            (vec![t], json!({"state": "hb", "K": [1, 80], "delta": 0.01, "povm": "canonical"}))
        }
        "fig10" => {
            let ks: Vec<usize> = (1..=1000).collect();
            let vals = run_rows(jobs, &ks, |&k| Ok(sum_a(&ProbeState::hb(k)?)))?;
            let mut t = Table::new("fig10", &["K", "A"]);
            for (&k, v) in ks.iter().zip(vals) {
                t.push(vec![k.into(), v.into()]);
            }
            (vec![t], json!({"state": "hb", "K": [1, 1000]}))
        }
        "fig11" => {
            let f = 0.05;
            let ks: Vec<usize> = (2..=30).collect();
            let rows = run_rows(jobs, &ks, |&k| {
                let s = ProbeState::hb(k)?;
                let closed = hb_threshold(k, f)?;
                Ok((numeric_threshold_large(&s, f, 2.0 * closed + 0.5)?, closed, delta_threshold_tight(&s, f)?))
            })?;
            let mut t = Table::new("fig11", &["K", "f", "numeric", "closed", "tight"]);
            for (&k, (n, c, g)) in ks.iter().zip(rows) {
                t.push(vec![k.into(), f.into(), n.into(), c.into(), g.into()]);
            }
            (vec![t], json!({"state": "hb", "K": [2, 30], "f": f}))
        }
        "fig13" => {
            let f = 0.05;
            let ks: Vec<usize> = (1..=30).collect();
            let rows = run_rows(jobs, &ks, |&k| numeric_threshold_small(k, f, 2.0 / k as f64))?;
            let mut t = Table::new("fig13", &["K", "f", "numeric", "scale", "scale_fourth"]);
            for (&k, n) in ks.iter().zip(rows) {
                t.push(vec![k.into(), f.into(), n.into(), validity_small(k).into(), validity_small_fourth(k).into()]);
            }
            (vec![t], json!({"state": "hb", "K": [1, 30], "f": f}))
        }
        other => return invalid(format!("unknown figure '{other}' (expected one of {})", FIGURES.join(", "))),
    };
    Ok(FigureBundle { name: name.into(), tables, preset: json!({"seed": seed, "series": preset}) })
}
