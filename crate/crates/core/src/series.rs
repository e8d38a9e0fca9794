//! Descriptors of the coefficient sequence `alpha~` in
//! `Phi_2(s1, s2; 1, alpha~) = sum alpha~(m2) m1^-s1 (m1 + m2)^-s2`.

use std::fmt;
use std::sync::Arc;

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hp::{HpComplex, PrecisionContext};

pub type PhiFn = Arc<dyn Fn(&HpComplex) -> Result<HpComplex> + Send + Sync>;
pub type IndexedFn = Arc<dyn Fn(u32, &PrecisionContext) -> Result<HpComplex> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&PrecisionContext) -> Result<HpComplex> + Send + Sync>;
pub type CoefficientFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// A user-supplied `alpha` with `alpha~ = alpha * mu`, i.e. `Phi(s; alpha~) = Phi(s; alpha) / zeta(s)`.
#[derive(Clone)]
pub struct PluginSeries {
    pub name: String,
    /// Abscissa of the only pole of `Phi(s; alpha)`; `None` when it is entire.
    pub delta: Option<Rational>,
    /// `Res_{s = delta} Phi(s; alpha) / zeta(s)`.
    pub residue_at_delta: ScalarFn,
    /// `Phi(s; alpha)` on all of its domain (needed at the zeros and on the contour).
    pub phi: PhiFn,
    /// `Phi(-k; alpha)` for `k >= 0`.
    pub phi_at_neg_k: IndexedFn,
    /// Constant term of the Laurent series of `Phi(s; alpha) / zeta(s)` at `s = -k`, `k` even.
    pub c_k: IndexedFn,
    /// `alpha~(n)` for the direct double-sum oracle, if available.
    pub alpha_tilde: Option<CoefficientFn>,
}

impl fmt::Debug for PluginSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PluginSeries").field("name", &self.name).field("delta", &self.delta).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum SeriesSpec {
    /// `alpha~ = Lambda`, the von Mangoldt function.
    Lambda,
    /// `alpha~ = mu`, the Moebius function (`Phi(s; alpha) = 1`).
    Mu,
    Plugin(Arc<PluginSeries>),
}

/// Plain tag of a [`SeriesSpec`], used in serialized output and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Lambda,
    Mu,
    Plugin,
}

impl SeriesSpec {
    pub fn kind(&self) -> SeriesKind {
        match self {
            SeriesSpec::Lambda => SeriesKind::Lambda,
            SeriesSpec::Mu => SeriesKind::Mu,
            SeriesSpec::Plugin(_) => SeriesKind::Plugin,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            SeriesSpec::Lambda => "lambda",
            SeriesSpec::Mu => "mu",
            SeriesSpec::Plugin(p) => &p.name,
        }
    }

    /// Pole abscissa `delta` of `Phi(s; alpha)` relevant to the singular sets, if any.
    /// The sets attached to `delta` are dropped when `delta = 1`.
    pub fn effective_delta(&self) -> Option<Rational> {
        match self {
            SeriesSpec::Plugin(p) => p.delta.clone().filter(|d| *d != 1),
            _ => None,
        }
    }

    /// Real-part bounds `(Re s2 >, Re (s1 + s2) >)` of absolute convergence.
    pub fn convergence_bounds(&self) -> (f64, f64) {
        match self {
            SeriesSpec::Plugin(p) => {
                let d = p.delta.as_ref().map_or(0.0, |d| d.to_f64());
                (d.max(1.0), (1.0 + d).max(2.0))
            }
            _ => (1.0, 2.0),
        }
    }
}

impl std::str::FromStr for SeriesKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lambda" => Ok(SeriesKind::Lambda),
            "mu" => Ok(SeriesKind::Mu),
            "plugin" => Ok(SeriesKind::Plugin),
            other => Err(format!("unknown series {other:?} (expected lambda or mu)")),
        }
    }
}
