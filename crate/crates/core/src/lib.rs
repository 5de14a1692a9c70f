//! Two FitzHugh–Nagumo elements coupled through the phase of their partner.
//!
//! Each element receives a constant current from the other while the
//! partner's polar angle lies in a sector `[α, α + δ]`. The crate locates
//! equilibria and Andronov–Hopf curves analytically, integrates the
//! system, and classifies the limit regimes it settles on (in-phase,
//! anti-phase, sequential activation words, chaos) across the `(α, δ)`
//! plane.
//!
//! ```
//! use fhn_pair::model::{phase_angle, Parameters};
//!
//! let p = Parameters::with_angles_deg(210.0, 50.0).unwrap();
//! assert!((p.beta().to_degrees() - 260.0).abs() < 1e-9);
//! let phi = phase_angle(-1.01, -0.66657).unwrap();
//! assert!((phi.to_degrees() - 213.42).abs() < 0.01);
//! ```

pub mod attractors;
pub mod cli;
pub mod equilibria;
pub mod error;
pub mod integrator;
pub mod model;
pub mod output;
pub mod sweep;

pub use error::{Error, Result};
