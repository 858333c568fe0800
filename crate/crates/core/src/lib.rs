//! Optimal vaccination, treatment and educational-campaign controls for
//! scaled SIR and SEIR epidemic models.
//!
//! The controls are computed by the indirect method: the adjoint equations
//! and control characterizations of each strategy ([`pmp`]) are solved
//! together with the controlled dynamics ([`models`]) by a forward-backward
//! sweep ([`fbs`]) built on fixed-step RK4 integration ([`integrator`]).
//! [`runner`] wraps it all in scenario files, presets and CSV output.
//!
//! ```
//! use ebola_ocp::{fbs, FbsSettings, SirParams, Strategy};
//!
//! let strategy = Strategy::SirVaccination { params: SirParams::default(), b: 1.0 };
//! let report = fbs::solve(&strategy, &[0.95, 0.05, 0.0], &FbsSettings::default()).unwrap();
//! assert!(report.converged);
//! ```

pub mod error;
pub mod exec;
pub mod fbs;
pub mod integrator;
pub mod models;
pub mod pmp;
pub mod runner;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fbs::{FbsSettings, SolveReport};
pub use integrator::{ControlTrajectory, TimeGrid, Trajectory};
pub use models::{
    CostWeights, ModelFamily, ModelParams, SeirParams, SeirState, SirParams, SirState, Strategy,
    StrategyTag,
};
