//! Joint estimation of phase and collective phase diffusion with fixed-particle-number probes.
//!
//! The crate computes exact quantum Fisher information (QFI) matrices, closed-form
//! approximations in the large- and small-diffusion regimes, classical Fisher information
//! of projective measurements, and the trade-off `Tr[F H⁻¹] = F11/H11 + F22/H22`.
//! Measurements maximising the trade-off are searched by simulated annealing.
//!
//! ```
//! use qest::{states::ProbeState, fisher::qfi_matrix};
//!
//! let probe = ProbeState::hb(2).unwrap();
//! let h = qfi_matrix(&probe, 0.0, 0.0, None).unwrap();
//! assert!((h.h11 - 12.0).abs() < 1e-9);
//! ```

#![forbid(unsafe_code)]

pub mod cli;
pub mod error;
pub mod figures;
pub mod fisher;
pub mod linalg;
pub mod measurements;
pub mod optimizer;
pub mod output;
pub mod regime_large;
pub mod regime_small;
pub mod scan;
pub mod states;

pub use error::{Error, Result};
pub use fisher::FisherMatrix;
pub use measurements::ProjectivePovm;
pub use states::{DensityMatrix, ProbeState};
