//! Exact QFI matrix of Holland-Burnett probes, by SLD and by eigendecomposition.

use qest::fisher::{qfi_eigen_route, qfi_matrix};
use qest::ProbeState;

fn main() -> qest::Result<()> {
    let delta = 0.5;
    let k1 = qfi_matrix(&ProbeState::hb(1)?, 0.0, delta, None)?;
    let x4 = (-4.0 * delta * delta).exp();
    println!("K=1  h11 = {:.12}  closed form {:.12}", k1.h11, 4.0 * x4);
    println!("K=1  h22 = {:.12}  closed form {:.12}", k1.h22, 16.0 * delta * delta * x4 / (1.0 - x4));

    println!("\n K   h11(SLD)        h11(eigen)      h22(SLD)        h22(eigen)");
    for k in [2, 5, 10, 20] {
        let s = ProbeState::hb(k)?;
        let a = qfi_matrix(&s, 0.0, delta, None)?;
        let b = qfi_eigen_route(&s, 0.0, delta, None)?;
        println!("{k:>3}  {:<14.8e}  {:<14.8e}  {:<14.8e}  {:<14.8e}", a.h11, b.h11, a.h22, b.h22);
    }
    Ok(())
}
