//! Meromorphic continuation of the double Dirichlet series
//! `Phi_2(s1, s2; 1, alpha) = sum_{m1, m2 >= 1} alpha(m2) m1^{-s1} (m1 + m2)^{-s2}`
//! for `alpha` the von Mangoldt function and the Moebius function, together
//! with exact residue arithmetic and numerical singular expansions at the
//! non-positive integer points.

pub mod error;
pub mod exact;
pub mod hp;
pub mod special;
pub mod series;
pub mod arith;
pub mod zeros;
pub mod quad;
pub mod continuation;
pub mod limits;

pub use error::{Error, Result};
pub use hp::{HpComplex, HpReal, PrecisionContext};
pub use series::{PluginSeries, SeriesKind, SeriesSpec};
