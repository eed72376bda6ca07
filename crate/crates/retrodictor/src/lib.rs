//! Probabilities of sequences of projective quantum measurements.
//!
//! The crate has two computational routes to every conditional probability
//! between a preparation and a post-selection:
//!
//! * closed forms in [`retrodict`]: the textbook retrodiction formula for
//!   complete or coarse intermediate observations, the corrected Bayes
//!   expression that names its conditioning event explicitly, and the
//!   naive Bayes and marginal formulas that are kept around precisely
//!   because they misname it;
//! * a brute-force oracle in [`sequence`]: exact joint distributions over
//!   outcome sequences built by chaining the projective state-update rule,
//!   with marginal and conditional queries that always carry their full
//!   observation plan.
//!
//! Every closed form is cross-checked against the oracle, both in the test
//! suites and at runtime through the `oracle-check` command of the bundled
//! `retrodictor` binary. The [`scenario`] module runs declarative JSON
//! scenario files and renders the built-in demonstrations.

pub mod qla;
pub mod random;
pub mod retrodict;
pub mod scenario;
pub mod sequence;
pub mod tol;

pub use sequence::Conditional;
