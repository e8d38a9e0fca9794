//! Tables of ordinates `gamma_n > 0` of the nontrivial zeros `1/2 + i gamma_n`.
//!
//! File format: plain text, `#` comment lines ignored, one positive decimal
//! ordinate per remaining line, strictly ascending. A comment of the form
//! `# source_digits: D` declares the accuracy of the data.

use std::path::Path;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hp::{digits_for_bits, fmt_real, HpComplex, HpReal, PrecisionContext};
use crate::special::zeta;

/// First 100 ordinates shipped with the library.
pub const BUNDLED_ZEROS: &str = include_str!("../data/zeros100.txt");

/// The first zero ordinate must lie within this distance of 14.1347.
const FIRST_ORDINATE: f64 = 14.134725;
const FIRST_ORDINATE_TOL: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct ZeroTable {
    pub gammas: Vec<HpReal>,
    pub source_digits: u32,
    /// Non-fatal findings such as insufficient source accuracy.
    pub warnings: Vec<String>,
}

impl ZeroTable {
    pub fn count(&self) -> usize {
        self.gammas.len()
    }

    pub fn last_gamma(&self) -> Option<&HpReal> {
        self.gammas.last()
    }

    /// Text form accepted by [`parse_zeros`], reproducing every ordinate at its precision.
    pub fn serialize(&self) -> String {
        let mut out = format!("# source_digits: {}\n", self.source_digits);
        for g in &self.gammas {
            out.push_str(&fmt_real(g, digits_for_bits(g.prec()) + 3));
            out.push('\n');
        }
        out
    }
}

/// How many zeros enter a zero sum and the tolerance its tail must meet.
#[derive(Clone, Debug)]
pub struct ZeroSumPolicy {
    pub max_zeros: usize,
    pub tail_tolerance: HpReal,
}

impl ZeroSumPolicy {
    pub fn new(max_zeros: usize, tail_tolerance: HpReal, table: &ZeroTable) -> Result<Self> {
        if max_zeros > table.count() {
            return Err(Error::pre(format!("max_zeros = {max_zeros} exceeds the table size {}", table.count())));
        }
        if tail_tolerance <= 0 {
            return Err(Error::pre("tail tolerance must be positive"));
        }
        Ok(ZeroSumPolicy { max_zeros, tail_tolerance })
    }
}

/// Parse a zero table held in memory.
pub fn parse_zeros(text: &str, ctx: &PrecisionContext) -> Result<ZeroTable> {
    let mut gammas: Vec<HpReal> = Vec::new();
    let mut source_digits: Option<u32> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("source_digits:") {
                let d = v.trim().parse::<u32>().map_err(|e| Error::Parse { line: line_no, msg: format!("bad source_digits: {e}") })?;
                source_digits = Some(d);
            }
            continue;
        }
        let g = ctx.parse(line).map_err(|_| Error::Parse { line: line_no, msg: format!("not a decimal number: {line:?}") })?;
        if !g.is_finite() || g <= 0 {
            return Err(Error::Parse { line: line_no, msg: "ordinates must be positive".into() });
        }
        if let Some(prev) = gammas.last() {
            if g <= *prev {
                return Err(Error::Ordering { line: line_no });
            }
        }
        gammas.push(g);
    }
    if gammas.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no ordinates found".into() });
    }
    if (gammas[0].to_f64() - FIRST_ORDINATE).abs() > FIRST_ORDINATE_TOL {
        return Err(Error::Parse { line: 0, msg: format!("first ordinate {} is not the first zero", gammas[0].to_f64()) });
    }
    // Without a declaration the accuracy is the shortest digit string seen.
    let source_digits = source_digits.unwrap_or_else(|| {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.chars().filter(|c| c.is_ascii_digit()).count() as u32)
            .min()
            .unwrap_or(0)
    });
    let mut warnings = Vec::new();
    if source_digits < ctx.target_decimal {
        warnings.push(format!(
            "zero table carries {source_digits} digits, below the requested {} digits; zero-sum terms are limited to that accuracy",
            ctx.target_decimal
        ));
    }
    Ok(ZeroTable { gammas, source_digits, warnings })
}

pub fn load_zeros(path: &Path, ctx: &PrecisionContext) -> Result<ZeroTable> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::ZerosMissing(path.display().to_string()),
        _ => Error::Io(e),
    })?;
    parse_zeros(&text, ctx)
}

pub fn bundled_zeros(ctx: &PrecisionContext) -> ZeroTable {
    parse_zeros(BUNDLED_ZEROS, ctx).expect("bundled zero table is well formed")
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checked: usize,
    /// `log10 |zeta(1/2 + i gamma_n)|` per checked zero.
    pub residuals_log10: Vec<f64>,
    pub max_residual_log10: f64,
    pub threshold_log10: f64,
}

/// Checks `|zeta(1/2 + i gamma)| < 10^(5 - D)` for the first `k` zeros, where
/// `D` is the smaller of the source accuracy and the requested working digits.
/// Simplicity of the zeros is assumed, not checked.
pub fn validate_zeros(table: &ZeroTable, k: usize, ctx: &PrecisionContext) -> Result<ValidationReport> {
    if k > table.count() {
        return Err(Error::pre(format!("k = {k} exceeds the table size {}", table.count())));
    }
    let threshold = 5.0 - table.source_digits.min(ctx.target_decimal) as f64;
    let half = Float::with_val(ctx.bits, 0.5);
    let mut residuals = Vec::with_capacity(k);
    let mut bad = Vec::new();
    for (i, g) in table.gammas.iter().take(k).enumerate() {
        let s = HpComplex::new(half.clone(), Float::with_val(ctx.bits, g));
        let r = zeta(&s)?.log10_abs();
        if !(r < threshold) {
            bad.push(i);
        }
        residuals.push(r);
    }
    if !bad.is_empty() {
        return Err(Error::Validation(bad));
    }
    let max = residuals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ValidationReport { checked: k, residuals_log10: residuals, max_residual_log10: max, threshold_log10: threshold })
}

/// Natural log of the tail integrand at height `x`: zero density
/// `log(x / 2 pi) / (2 pi)` times the Gamma decay `e^{-(pi/2)(|x - t2| + x)}`
/// of the pair `Gamma(s2 - rho) Gamma(rho)`, times a polynomial `(1 + x)^a`.
fn log_tail_integrand(x: f64, t2: f64, a: f64) -> f64 {
    let density = ((x / std::f64::consts::TAU).ln().max(1e-3) / std::f64::consts::TAU).ln();
    let decay = -std::f64::consts::FRAC_PI_2 * ((x - t2.abs()).abs() + x);
    density + decay + a * (1.0 + x).ln()
}

/// Heuristic bound on the omitted part of a zero sum beyond `last_gamma`,
/// with polynomial growth exponent `growth` for the remaining factors
/// (zeta at shifted arguments, `1/zeta'(rho)`, `1/Gamma(s2)`).
pub fn zero_sum_tail_bound_with(s2: &HpComplex, last_gamma: &HpReal, growth: f64) -> Result<HpReal> {
    let t2 = s2.im.to_f64();
    let l = last_gamma.to_f64();
    if !(l > t2.abs() + 10.0) {
        return Err(Error::pre(format!("last ordinate {l} must exceed |Im s2| + 10 = {}", t2.abs() + 10.0)));
    }
    let a = growth.max(0.0);
    // Integrate e^{f(x) - f(l)} over [l, l + span] by the trapezoid rule in f64.
    let f0 = log_tail_integrand(l, t2, a);
    let span = 40.0 + a;
    let steps = 4000usize;
    let h = span / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let x = l + i as f64 * h;
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += w * (log_tail_integrand(x, t2, a) - f0).exp();
    }
    // The second sum over conjugate zeros decays at least as fast; count it twice.
    let log_value = f0 + (2.0 * acc * h).ln() + (a + 4.0) * std::f64::consts::LN_2;
    let bits = s2.prec();
    Ok(Float::with_val(bits, log_value).exp())
}

/// Heuristic tail bound with the default polynomial exponent `|Re s2| + 2`.
pub fn zero_sum_tail_bound(s2: &HpComplex, last_gamma: &HpReal) -> Result<HpReal> {
    zero_sum_tail_bound_with(s2, last_gamma, s2.re.to_f64().abs() + 2.0)
}
