//! Two-qubit states, single-qubit Kraus channels and Wootters concurrence,
//! with numerical checks of how one-sided noise rescales entanglement.
//!
//! The headline relation: for a channel `$` on one qubit of a pure state
//! `|psi>`,
//!
//! ```text
//! C[(1 (x) $)|psi><psi|] = C[(1 (x) $)|phi+><phi+|] * C(|psi>)
//! ```
//!
//! so the decay of any pure state's concurrence is fixed by the channel's
//! Choi state alone. [`entanglement`] evaluates this and the bounds that
//! follow from it, [`duality`] and [`circuits`] implement the channel-state
//! correspondence behind it, and [`campaign`] runs seeded Monte-Carlo checks.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod channels;
pub mod circuits;
pub mod duality;
pub mod entanglement;
pub mod error;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod states;

pub use channels::{ApplicationResult, KrausChannel, Side};
pub use duality::ChoiState;
pub use entanglement::{concurrence, BoundReport};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Spectrum, C64};
pub use states::{DensityMatrix, PureState};
