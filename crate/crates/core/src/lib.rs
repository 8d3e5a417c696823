//! Rearrangements of i.u.d. samples and the rank statistics they induce.
//!
//! The crate is organised bottom-up:
//!
//! * [`rankcore`]: permutations, initial ranks and rank arrays.
//! * [`directing`]: piecewise-linear directing functions and their
//!   measure-preserving canonical form.
//! * [`rearrangements`]: the rearrangement constructions (travellers',
//!   binary, fixed-position/switching-scheme families, randomized blocks) and
//!   their closed-form rank laws.
//! * [`pointprocess`]: uniform m-point processes on interval unions.
//! * [`exactgeom`]: exact rational geometry of the two-point case.
//! * [`sritest`]: chi-square testing of strong rank independence.
//!
//! All randomness flows through [`stream::TrialStreams`], which hands every
//! trial its own counter-addressed substream, so Monte Carlo results do not
//! depend on the number of worker threads.

pub mod directing;
pub mod error;
pub mod exactgeom;
pub mod intervals;
pub mod pointprocess;
pub mod rankcore;
pub mod rearrangements;
pub mod scalar;
pub mod sritest;
pub mod stats;
pub mod stream;

pub use error::{Error, Result};
pub use rankcore::{Permutation, RankArray, RankTuple};
pub use rearrangements::{RearrangementSpec, TrialRecord};
pub use stream::{RunConfig, TrialStreams};
