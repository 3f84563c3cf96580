//! Exactly solvable growth-collapse Markov chains with total disasters.
//!
//! Two chains on the non-negative integers move up by one unit or collapse
//! to zero, with state-dependent collapse probabilities
//! `q_x = alpha/(nu + x^beta)` (model A) or `q_x = 1 - (1+x^-beta)^-alpha`
//! (model B), partial reflection at the origin and an optional
//! Poissonization with algebraic jump rates `r_x = r0 (x+1)^lambda`. Both
//! are exactly solvable: this crate implements their closed-form laws
//! (invariant measures, return times, excursion heights, Green kernels,
//! extinction and contact probabilities), the divisibility diagnostics of
//! the stationary laws, and seed-deterministic simulators that double as
//! independent oracles for every closed form.
//!
//! The crate is organized by object of study:
//!
//! * [`model`] — transition kernels, rates and phase classification
//! * [`special`] — 2F1, polylog, zeta and log-gamma kernels
//! * [`stationary`] — invariant measures and stationary pgfs/moments
//! * [`hitting`] — return times, scale function, heights, extinction,
//!   Green kernels and contact probabilities
//! * [`ctmc`] — continuous-time excursion lengths and explosion
//! * [`divisibility`] — ID/SD diagnostics of the stationary laws
//! * [`mc`] — reproducible simulation of everything above
//! * [`verify`] — the cross-checking suite pairing each closed form with
//!   its independent oracle

pub mod ctmc;
pub mod divisibility;
pub mod error;
pub mod hitting;
pub mod mc;
pub mod model;
pub mod quadrature;
pub mod series;
pub mod special;
pub mod stationary;
pub mod tails;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
pub use model::{ChainClassification, CtLayer, CumLogGrowth, ModelKind, ModelSpec, Recurrence};
pub use series::PowerSeries;
pub use special::SeriesValue;
pub use stationary::{CriterionReport, PmfTable, Provenance};
