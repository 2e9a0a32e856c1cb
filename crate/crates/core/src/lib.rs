//! Bell inequalities with two settings per party, built from graph states.
//!
//! The crate builds Bell operators out of graph-state stabilizer elements,
//! certifies their classical bounds by exhaustive search over local
//! deterministic models, and checks quantum values both symbolically and
//! against a dense linear-algebra back end.

pub mod bell;
pub mod dense;
pub mod error;
pub mod graph;
pub mod lhv;
pub mod pauli;

pub use bell::{BellInequality, ObservableMap, PartyLayout, TwoSettingExpression};
pub use dense::{SpectrumSummary, StateVector};
pub use lhv::{BoundsReport, FacetReport};
pub use error::{Error, Result};
pub use graph::{Family, Graph};
pub use pauli::{Letter, PauliString, PauliSum};
