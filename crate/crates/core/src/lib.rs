//! Consistent tests of uniformity on the unit hypercube `[0,1]^p`.
//!
//! The empirical process of a sample on `[0,1]^p` splits into `2^p - 1`
//! asymptotically independent *tents*, one per nonempty coordinate subset
//! `H`. Each tent has a squared L² norm with a closed form in the data
//! ([`tent::tent_norm`]), and the per-subset p-values are combined either
//! through their minimum (m-test) or through a sum of χ²₁ quantiles
//! (s-test). See [`inference`] for the decision rules.
//!
//! Supporting machinery:
//!
//! - [`decompose`]: ramp/tent decomposition of grid functions vanishing on the
//!   lower boundary of the cube.
//! - [`brownian`]: Karhunen–Loève simulation of Brownian tents, the Brownian
//!   sheet as a sum of independent ramps, and the asymptotic norm laws.
//! - [`alternatives`]: samplers for the copula, Beta and normal-copula
//!   alternatives used in power studies.
//! - [`power`]: the Monte Carlo power harness.

pub mod alternatives;
pub mod brownian;
pub mod decompose;
mod error;
pub mod inference;
pub mod power;
pub mod published;
mod sample;
pub mod special;
mod stream;
mod subset;
pub mod tent;

pub use error::{Error, Result};
pub use sample::{uniform_sample, Sample, MAX_DIMENSION};
pub use stream::{domain, RandomStream};
pub use subset::{enumerate_subsets, SubsetMask};
