//! Fair ε-nets, fair ε-samples and fair geometric hitting sets over colored
//! (optionally weighted) point sets.
//!
//! The crate covers the range-space model ([`points`], [`range`],
//! [`incidence`]), fairness targets and metrics ([`fairness`]), sampling
//! constructions ([`netbuild`]), deterministic discrepancy constructions
//! ([`discrepancy`]), LP-based hitting sets ([`hitting`], [`lp`]), brute-force
//! verification ([`oracle`]), instance generation ([`datagen`]) and file
//! formats ([`io`]).

pub mod bitrow;
pub mod datagen;
pub mod discrepancy;
pub mod error;
pub mod fairness;
pub mod hitting;
pub mod incidence;
pub mod io;
pub mod lp;
pub mod netbuild;
pub mod oracle;
pub mod points;
pub mod range;
pub mod rng;

pub use bitrow::BitRow;
pub use error::{Error, Result};
pub use fairness::{dp_ratios, f2, finf, GroupRatios, RatioSpec};
pub use incidence::IncidenceMatrix;
pub use points::ColoredPointSet;
pub use range::{Range, RangeFamily};
