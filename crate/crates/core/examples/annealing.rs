//! Simulated-annealing search for the measurement maximising Tr[F H^-1].

use qest::optimizer::{optimize_tradeoff, AnnealConfig};
use qest::ProbeState;

fn main() -> qest::Result<()> {
    let state = ProbeState::hb(3)?;
    let cfg = AnnealConfig { steps_per_temperature: 100, temperature_levels: 40, seed: 11, ..Default::default() };
    println!("K=3, {} runs of {} evaluations", cfg.runs(), 1 + cfg.steps_per_temperature * cfg.temperature_levels);
    println!("delta   best     evaluations");
    for delta in [0.01, 0.1, 0.2, 0.3, 0.35, 0.4, 0.6, 1.0, 1.5] {
        let r = optimize_tradeoff(&state, delta, &cfg)?;
        println!("{delta:<5}   {:.4}   {}", r.best_value, r.evaluations);
    }
    Ok(())
}
