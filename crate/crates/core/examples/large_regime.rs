//! Tridiagonal closed forms at strong diffusion, their thresholds and the attainable trade-off.

use qest::fisher::qfi_matrix;
use qest::regime_large::{
    delta_threshold, delta_threshold_tight, numeric_threshold_large, qfi_large_delta, sum_a, tradeoff_large_analytic,
};
use qest::ProbeState;

fn main() -> qest::Result<()> {
    let s = ProbeState::hb(25)?;
    println!("K=25   delta   err(h11)   err(h22)");
    for delta in [0.8, 1.0, 1.2, 1.5] {
        let e = qfi_matrix(&s, 0.0, delta, None)?;
        let a = qfi_large_delta(&s, delta)?;
        println!(
            "       {delta:.2}    {:6.3}%    {:6.3}%",
            100.0 * (a.h11 - e.h11).abs() / e.h11,
            100.0 * (a.h22 - e.h22).abs() / e.h22
        );
    }

    let f = 0.05;
    println!(
        "\nthresholds at f={f}: closed {:.4}, tight {:.4}, numeric {:.4}",
        delta_threshold(&s, f)?,
        delta_threshold_tight(&s, f)?,
        numeric_threshold_large(&s, f, 2.5)?
    );

    println!("\n    K   A(K)      Tr[F H^-1]");
    for k in [1, 10, 100, 1000, 1500] {
        let p = ProbeState::hb(k)?;
        println!("{k:>5}   {:.5}   {:.5}", sum_a(&p), tradeoff_large_analytic(&p)?);
    }
    Ok(())
}
