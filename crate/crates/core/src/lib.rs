//! Exact-arithmetic toolkit for Haar null sets in `Z^ω`.
//!
//! * [`measure`]: finitely supported measures on `Z`, product measures on
//!   `Z^ω` and cylinder sets, all with exact rational masses.
//! * [`witness`]: synthesis of a witness sequence `a` from a product witness
//!   measure, and exact checks of the convolution identities behind it.
//! * [`codec`]: the order isomorphism `θ : T → N`, its inverse `ι`, and their
//!   coordinatewise lifts.
//! * [`eset`]: finite-depth images of graph data under the lift `t`, with the
//!   pairwise gap and coin-flip checks.
//! * [`acceptance`]: the acceptance criteria as runnable checks.

pub mod acceptance;
pub mod codec;
pub mod error;
pub mod eset;
pub mod measure;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod sampling;
pub mod witness;

pub use error::{Error, Result};
pub use rational::Rational;
pub use report::{Status, VerificationReport};
