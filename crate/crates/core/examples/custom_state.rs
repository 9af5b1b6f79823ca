//! A generic fixed-particle-number probe built from explicit amplitudes.

use num_complex::Complex64;
use qest::fisher::qfi_matrix;
use qest::regime_large::{delta_threshold, optimal_povm_large, qfi_large_delta, tradeoff_large_analytic};
use qest::measurements::{classical_fisher, tradeoff};
use qest::ProbeState;

fn main() -> qest::Result<()> {
    // 2K = 6 particles, support on n = 0, 3, 6
    let mut amps = vec![Complex64::new(0.0, 0.0); 7];
    amps[0] = Complex64::new(0.5, 0.0);
    amps[3] = Complex64::new(0.0, 0.6);
    amps[6] = Complex64::new(0.4, 0.3);
    let s = ProbeState::from_amplitudes(amps)?;
    println!("support {:?}, step k = {}", s.support(), s.offdiag_step());

    let delta = 0.6;
    let e = qfi_matrix(&s, 0.0, delta, None)?;
    let a = qfi_large_delta(&s, delta)?;
    println!("exact h11 {:.6e} h22 {:.6e}", e.h11, e.h22);
    println!("large h11 {:.6e} h22 {:.6e}  (threshold {:.4})", a.h11, a.h22, delta_threshold(&s, 0.05)?);

    let povm = optimal_povm_large(&s)?;
    let f = classical_fisher(&povm, &s, 0.0, 1.5)?;
    let h = qfi_matrix(&s, 0.0, 1.5, None)?;
    println!("equal-weight measurement at delta=1.5: {:.5} (analytic {:.5})", tradeoff(&f, &h)?, tradeoff_large_analytic(&s)?);
    Ok(())
}
