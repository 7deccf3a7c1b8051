//! Immigration processes with binomial catastrophes and random survival
//! parameters.
//!
//! A colony receives immigrants at rate `lambda` and is hit by catastrophes at
//! rate 1. At each catastrophe every individual survives independently. The
//! crate covers four survival mechanisms:
//!
//! * **classical**: a fixed survival probability `p`;
//! * **catastrophe-random**: `p` is redrawn from a law `nu` at every catastrophe;
//! * **individual-random**: each individual draws its own `p` from `nu` at birth;
//! * **general lifetime**: each individual draws the number of catastrophes it
//!   will survive from an integer law.
//!
//! The individual-random and general-lifetime processes are analysed through
//! the Firework rumour process on the half-line ([`firework`]).
//!
//! [`laws`] holds the survival-parameter distributions. Exact values live in
//! [`exact`] and [`firework`], with independent checks in [`oracle`].
//! Simulation is in [`montecarlo`]; [`cli`] and [`verify`] back the
//! `catastro` binary.

pub mod cli;
pub mod error;
pub mod exact;
pub mod firework;
pub mod laws;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{CriterionRoute, CriterionVerdict, EvalResult, ErrorBound, Extended, Method, Verdict};
pub use firework::{RadiusLaw, RenewalData};
pub use laws::SurvivalLaw;
pub use montecarlo::{Estimate, Mechanism, ModelSpec, ReplicaOutcome, SimConfig, SimModel, Statistic};
