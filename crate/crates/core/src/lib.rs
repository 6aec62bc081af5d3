//! Workbench for the reduction-based quantum query lower bound on the set
//! equality problem.
//!
//! The crate covers the randomized reductions from the collision problem, the
//! image-multiplicity statistics of reduced pairs, exact tail probabilities,
//! adversary relation counts, a statevector simulator for the matching upper
//! bound algorithms, and the numerical composition of the bound terms.

pub mod adversary;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod inv;
pub mod model;
pub mod probability;
pub mod reductions;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use exact::ExactRational;
pub use inv::{BadCriterion, InvProfile};
pub use model::{OracleFunction, PartialFunction, Permutation, Promise};
pub use reductions::{FunctionPair, Origin};
pub use rng::SeededRng;
pub use sim::{QueryTally, StateVector};
