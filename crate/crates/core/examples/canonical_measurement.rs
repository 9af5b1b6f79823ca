//! Fourier (canonical phase) measurement at weak diffusion.

use qest::measurements::{canonical_phase_povm, canonical_tradeoff_aligned, classical_fisher, tradeoff_terms};
use qest::fisher::qfi_matrix;
use qest::ProbeState;

fn main() -> qest::Result<()> {
    let delta = 0.01;
    println!(" K   offset    F11/H11   F22/H22   total   (zero offset total)");
    for k in [1, 2, 5, 10, 20, 40, 80] {
        let s = ProbeState::hb(k)?;
        let aligned = canonical_tradeoff_aligned(&s, delta)?;
        let raw = tradeoff_terms(
            &classical_fisher(&canonical_phase_povm(k), &s, 0.0, delta)?,
            &qfi_matrix(&s, 0.0, delta, None)?,
        )?;
        let t = aligned.terms;
        println!(
            "{k:>2}   {:.5}   {:.5}   {:.5}   {:.5}   ({:.5})",
            aligned.offset, t.f11_over_h11, t.f22_over_h22, t.total, raw.total
        );
    }
    Ok(())
}
