//! Low-rank structure of weakly dephased HB states and the small-diffusion closed forms.

use qest::fisher::qfi_matrix;
use qest::regime_small::{closed_form_eigenvalues, qfi_small_delta, small_eigensystem};
use qest::ProbeState;

fn main() -> qest::Result<()> {
    let (k, delta) = (6, 0.01);
    let sys = small_eigensystem(k, 0.0, delta, 4)?;
    println!("K={k} delta={delta}: kept eigenvalues {:?}", sys.eigenvalues);
    println!("closed-form eigenvalues {:?}", closed_form_eigenvalues(k, delta, 4)?);
    println!("discarded {:?}", sys.discarded);

    let s = ProbeState::hb(20)?;
    println!("\nK=20   delta    err(h11)   err(h22)");
    for delta in [0.005, 0.01, 0.018, 0.02] {
        let e = qfi_matrix(&s, 0.0, delta, None)?;
        let a = qfi_small_delta(20, delta);
        println!(
            "       {delta:.3}   {:6.3}%    {:6.3}%",
            100.0 * (a.h11 - e.h11).abs() / e.h11,
            100.0 * (a.h22 - e.h22).abs() / e.h22
        );
    }
    Ok(())
}
