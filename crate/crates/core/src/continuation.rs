//! Evaluation of the meromorphic continuation of
//! `Phi_2(s1, s2; 1, alpha~) = sum alpha~(m2) m1^{-s1} (m1 + m2)^{-s2}`.
//!
//! Starting from the Mellin–Barnes representation
//! `(1/2 pi i) int Gamma(s2+z) Gamma(-z) / Gamma(s2) Phi(-z; alpha~) zeta(s1+s2+z) dz`
//! the contour is moved to `Re z = N - eta`. The result is a finite sum of
//! residues (at `z = -1` or `z = -delta`, `z = 0`, `z = 1, ..., N-1` and
//! `z = -rho` for the nontrivial zeros `rho`) plus the remaining line integral,
//! which is analytic on the region where the line separates the poles.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{bernoulli, factorial, BernoulliConvention, GammaLinear};
use crate::hp::{digits_for_bits, fmt_real, serialize_real, HpComplex, HpReal, PrecisionContext};
use crate::quad::{log10_add, LineLayout};
use crate::series::{PluginSeries, SeriesSpec};
use crate::special::{gamma_parts, ln_gamma, mangoldt_m, zeta, zeta_jet};
use crate::zeros::{zero_sum_tail_bound_with, ZeroSumPolicy, ZeroTable};

/// Default Gauss–Legendre order per panel.
pub const DEFAULT_QUAD_ORDER: usize = 64;

/// Parameters of one continuation evaluation.
#[derive(Clone, Debug)]
pub struct EvalParams {
    /// The contour sits at `Re z = N - eta`; `N >= 2`.
    pub n: u32,
    /// Offset `0 < eta < 1` of the contour from the integer `N`.
    pub eta: HpReal,
    /// Half-length of the truncated contour; chosen automatically when `None`.
    pub t_max: Option<f64>,
    pub zero_policy: ZeroSumPolicy,
    pub ctx: PrecisionContext,
    pub zeros: Arc<ZeroTable>,
    pub quad_order: usize,
}

impl EvalParams {
    /// Defaults: `N = 4`, `eta = 1/7`, automatic `T`, every zero of `zeros`.
    pub fn new(ctx: PrecisionContext, zeros: Arc<ZeroTable>) -> Result<Self> {
        let tol = ctx.target_eps();
        let zero_policy = ZeroSumPolicy::new(zeros.count(), tol, &zeros)?;
        let eta = ctx.ratio(1, 7);
        Ok(EvalParams { n: 4, eta, t_max: None, zero_policy, ctx, zeros, quad_order: DEFAULT_QUAD_ORDER })
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn with_max_zeros(mut self, max_zeros: usize) -> Result<Self> {
        self.zero_policy = ZeroSumPolicy::new(max_zeros, self.zero_policy.tail_tolerance.clone(), &self.zeros)?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::pre(format!("N must be >= 2, got {}", self.n)));
        }
        if !(self.eta > 0 && self.eta < 1) {
            return Err(Error::pre("eta must lie strictly between 0 and 1"));
        }
        if self.zero_policy.max_zeros > self.zeros.count() {
            return Err(Error::pre("zero policy asks for more zeros than the table holds"));
        }
        if self.quad_order < 8 || self.quad_order % 2 != 0 {
            return Err(Error::pre("quadrature order must be even and >= 8"));
        }
        Ok(())
    }
}

/// Smallest `N` for which the contour `Re z = N - eta` keeps the poles of
/// `Gamma(s2 + z)` and `zeta(s1 + s2 + z)` to its left.
pub fn required_n(s1: &HpComplex, s2: &HpComplex, eta: &HpReal) -> u32 {
    let e = eta.to_f64();
    let r2 = s2.re.to_f64();
    let rs = r2 + s1.re.to_f64();
    // N - eta > -Re s2  and  N - eta > 1 - Re(s1 + s2)
    let need = (e - r2).max(1.0 + e - rs);
    let mut n = need.floor() as i64 + 1;
    if n < 2 {
        n = 2;
    }
    n as u32
}

/// One labelled contribution to the continuation formula.
#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub label: &'static str,
    pub value: HpComplex,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSummary {
    pub n: u32,
    pub eta: String,
    pub t_max: f64,
    pub quad_order: usize,
    pub quad_nodes: usize,
    pub zeros_used: usize,
    pub zeros_skipped: usize,
    pub target_digits: u32,
    pub working_bits: u32,
}

/// Value of the continuation at one point with its error budget.
#[derive(Clone, Debug, Serialize)]
pub struct EvalResult {
    pub series: String,
    pub s1: HpComplex,
    pub s2: HpComplex,
    pub value: HpComplex,
    pub terms: Vec<Term>,
    /// Quadrature error + contour truncation + omitted zeros (absolute).
    #[serde(serialize_with = "serialize_real")]
    pub error_estimate: HpReal,
    #[serde(serialize_with = "serialize_real")]
    pub quadrature_error: HpReal,
    #[serde(serialize_with = "serialize_real")]
    pub zero_sum_error: HpReal,
    pub params: ParamSummary,
    pub warnings: Vec<String>,
}

impl EvalResult {
    pub fn term(&self, label: &str) -> Option<&HpComplex> {
        self.terms.iter().find(|t| t.label == label).map(|t| &t.value)
    }
}

// ---------------------------------------------------------------------------
// Singular sets

/// A singular set `(s1, s2)` was found to lie on (within a tolerance).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularHit {
    /// Family, e.g. `"s2 = -l"` or `"s1 + s2 = 1 + rho"`.
    pub family: &'static str,
    /// The integer parameter `l` / `k` of the family, if any.
    pub index: Option<i64>,
    /// 1-based index of the zero, negative for the conjugate zero.
    pub zero: Option<i64>,
    /// Distance from the set (f64 approximation).
    pub distance: f64,
}

impl fmt::Display for SingularHit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        let mut extra = Vec::new();
        if let Some(l) = self.index {
            let name = if self.family.contains('k') { "k" } else { "l" };
            extra.push(format!("{name} = {l}"));
        }
        if let Some(z) = self.zero {
            if z < 0 {
                extra.push(format!("rho = conj(rho_{})", -z));
            } else {
                extra.push(format!("rho = rho_{z}"));
            }
        }
        if !extra.is_empty() {
            write!(f, " ({})", extra.join(", "))?;
        }
        Ok(())
    }
}

/// `x` against `offset - l` for integer `l` in `[lmin, inf)`.
fn integer_family(
    x: &HpComplex,
    offset: &HpReal,
    lmin: i64,
    tol: &HpReal,
    family: &'static str,
    out: &mut Vec<SingularHit>,
) {
    let bits = x.prec();
    let l_real = Float::with_val(bits, offset - &x.re);
    let l = l_real.to_f64().round();
    if !l.is_finite() || (l as i64) < lmin {
        return;
    }
    let target = Float::with_val(bits, offset - l);
    let d = HpComplex::new(Float::with_val(bits, &x.re - &target), x.im.clone()).abs();
    if d <= *tol {
        out.push(SingularHit { family, index: Some(l as i64), zero: None, distance: d.to_f64() });
    }
}

/// `x` against `rho - l` (`l >= 0`, both `rho` and its conjugate).
fn zero_family(x: &HpComplex, zeros: &ZeroTable, tol: &HpReal, family: &'static str, with_l: bool, out: &mut Vec<SingularHit>) {
    let bits = x.prec();
    let half = Float::with_val(bits, 0.5);
    let l = if with_l { (0.5 - x.re.to_f64()).round() } else { 0.0 };
    if !l.is_finite() || l < 0.0 {
        return;
    }
    let dre = Float::with_val(bits, &x.re + l) - &half;
    let t = x.im.to_f64().abs();
    let sign = if x.im < 0 { -1 } else { 1 };
    let pos = zeros.gammas.partition_point(|g| g.to_f64() < t);
    for i in pos.saturating_sub(1)..(pos + 1).min(zeros.count()) {
        let g = &zeros.gammas[i];
        let dim = Float::with_val(bits, x.im.clone().abs() - g);
        let d = HpComplex::new(dre.clone(), dim).abs();
        if d <= *tol {
            out.push(SingularHit {
                family,
                index: if with_l { Some(l as i64) } else { None },
                zero: Some(sign * (i as i64 + 1)),
                distance: d.to_f64(),
            });
        }
    }
}

/// All singular sets of the continuation containing `(s1, s2)` up to `tol`.
///
/// For `Lambda`: `s2 = 1`, `s2 = -l (l >= 2)`, `s1 + s2 = 2 - l (l >= 0)`,
/// `s2 = -l + rho`, `s1 + s2 = 1 + rho`. For `mu` and plug-ins:
/// `s1 + s2 = 1 - k (k >= 0)`, `s2 = -k (k >= 2)`, `s2 = -l + rho`,
/// `s1 + s2 = 1 + rho`, and for a pole `delta != 1` of `Phi(s; alpha)` also
/// `s2 = -l + delta`, `s1 + s2 = 1 + delta`.
pub fn classify_singularity(
    s1: &HpComplex,
    s2: &HpComplex,
    series: &SeriesSpec,
    tol: &HpReal,
    zeros: &ZeroTable,
) -> Vec<SingularHit> {
    let bits = s2.prec().max(s1.prec());
    let s1 = s1.with_prec(bits);
    let s2 = s2.with_prec(bits);
    let sum = &s1 + &s2;
    let sum_minus_one = sum.add_i64(-1);
    let zero = Float::new(bits);
    let one = Float::with_val(bits, 1);
    let two = Float::with_val(bits, 2);
    let mut out = Vec::new();
    match series {
        SeriesSpec::Lambda => {
            let d = (&s2 - &HpComplex::one(bits)).abs();
            if d <= *tol {
                out.push(SingularHit { family: "s2 = 1", index: None, zero: None, distance: d.to_f64() });
            }
            integer_family(&s2, &zero, 2, tol, "s2 = -l", &mut out);
            integer_family(&sum, &two, 0, tol, "s1 + s2 = 2 - l", &mut out);
        }
        SeriesSpec::Mu | SeriesSpec::Plugin(_) => {
            integer_family(&sum, &one, 0, tol, "s1 + s2 = 1 - k", &mut out);
            integer_family(&s2, &zero, 2, tol, "s2 = -k", &mut out);
        }
    }
    zero_family(&s2, zeros, tol, "s2 = -l + rho", true, &mut out);
    zero_family(&sum_minus_one, zeros, tol, "s1 + s2 = 1 + rho", false, &mut out);
    if let Some(delta) = series.effective_delta() {
        let d = Float::with_val(bits, &delta);
        integer_family(&s2, &d, 0, tol, "s2 = -l + delta", &mut out);
        let dd = HpComplex::new(Float::with_val(bits, &sum_minus_one.re - &d), sum_minus_one.im.clone()).abs();
        if dd <= *tol {
            out.push(SingularHit { family: "s1 + s2 = 1 + delta", index: None, zero: None, distance: dd.to_f64() });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Caches of s-independent quantities

static MEMO: Lazy<Mutex<HashMap<String, HpComplex>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn memo<F: FnOnce() -> Result<HpComplex>>(key: String, f: F) -> Result<HpComplex> {
    if let Some(v) = MEMO.lock().expect("memo poisoned").get(&key) {
        return Ok(v.clone());
    }
    let v = f()?;
    MEMO.lock().expect("memo poisoned").insert(key, v.clone());
    Ok(v)
}

fn zero_key(tag: &str, gamma: &HpReal, bits: u32) -> String {
    format!("{tag}|{bits}|{}", gamma.to_string_radix(16, None))
}

type NodeFactors = Arc<Vec<(HpComplex, HpComplex)>>;

static NODE_CACHE: Lazy<Mutex<HashMap<String, NodeFactors>>> = Lazy::new(|| Mutex::new(HashMap::new()));
const NODE_CACHE_CAP: usize = 24;

// ---------------------------------------------------------------------------
// Series-specific ingredients

/// The coefficient side of the Mellin–Barnes integrand, `Phi(w; alpha~)`.
enum Weights<'a> {
    Lambda,
    /// `Phi(w; alpha~) = Phi(w; alpha) / zeta(w)`; `None` is Moebius (`Phi(w; alpha) = 1`).
    Tilde(Option<&'a PluginSeries>),
}

impl Weights<'_> {
    fn tag(&self) -> String {
        match self {
            Weights::Lambda => "lambda".into(),
            Weights::Tilde(None) => "mu".into(),
            Weights::Tilde(Some(p)) => format!("plugin:{}", p.name),
        }
    }

    fn cacheable(&self) -> bool {
        !matches!(self, Weights::Tilde(Some(_)))
    }

    /// `Phi(w; alpha)` for the tilde case.
    fn phi(&self, w: &HpComplex) -> Result<HpComplex> {
        match self {
            Weights::Tilde(Some(p)) => (p.phi)(w),
            _ => Ok(HpComplex::one(w.prec())),
        }
    }

    fn phi_neg_k(&self, k: u32, ctx: &PrecisionContext) -> Result<HpComplex> {
        match self {
            Weights::Tilde(Some(p)) => (p.phi_at_neg_k)(k, ctx),
            _ => Ok(HpComplex::one(ctx.bits)),
        }
    }

    /// `Phi(w; alpha~)` on the contour (`w = -z`).
    fn tilde(&self, w: &HpComplex) -> Result<HpComplex> {
        match self {
            Weights::Lambda => mangoldt_m(w),
            Weights::Tilde(_) => {
                let phi = self.phi(w)?;
                Ok(&phi / &zeta(w)?)
            }
        }
    }
}

/// `zeta'(-k)` and `zeta''(-k)` for even `k`, memoised.
fn trivial_zero_derivs(k: u32, ctx: &PrecisionContext) -> Result<(HpReal, HpReal)> {
    let key = format!("zd|{}|{k}", ctx.bits);
    let v = memo(key, || {
        let (d1, d2) = crate::special::laurent::zeta_derivs_at_trivial_zero(k, ctx)?;
        Ok(HpComplex::new(d1, d2))
    })?;
    Ok((v.re, v.im))
}

/// `binom(-s2, k) = prod_{j<k} (-s2 - j) / k!`.
fn binom_neg(s2: &HpComplex, k: u32) -> HpComplex {
    let bits = s2.prec();
    let mut p = HpComplex::one(bits);
    for j in 0..k {
        p = &p * &(-&s2.add_i64(j as i64));
    }
    p.scale(&(Float::with_val(bits, 1) / Float::with_val(bits, &factorial(k))))
}

/// `Gamma'(s2 + k) / Gamma(s2) = psi(s2 + k) (s2)_k`.
fn gamma_prime_ratio(s2: &HpComplex, k: u32) -> Result<HpComplex> {
    let bits = s2.prec();
    let mut poch = HpComplex::one(bits);
    for j in 0..k {
        poch = &poch * &s2.add_i64(j as i64);
    }
    let psi = gamma_parts(&s2.add_i64(k as i64), true, false)?.digamma.expect("requested");
    Ok(&psi * &poch)
}

/// Crude `log10` upper bound for `|zeta(w)|`, used only to skip negligible zero terms.
fn zeta_log10_bound(w: Complex64) -> f64 {
    let s = w.re;
    let t = w.im.abs();
    if s >= 1.5 {
        return (1.0 + 1.0 / (s - 1.0)).log10();
    }
    let growth = (0.5 - s).max(0.0) + 0.5;
    growth * (t / std::f64::consts::TAU + 3.0).log10() + (3.0 + 1.0 / (s - 1.0).abs().max(0.05)).log10()
}

// ---------------------------------------------------------------------------
// Evaluation

/// Continuation of `Phi_2(s1, s2; 1, Lambda)`.
pub fn eval_phi2_lambda(s1: &HpComplex, s2: &HpComplex, p: &EvalParams) -> Result<EvalResult> {
    eval_phi2(s1, s2, &SeriesSpec::Lambda, p)
}

/// Continuation of `Phi_2(s1, s2; 1, mu)`.
pub fn eval_phi2_mu(s1: &HpComplex, s2: &HpComplex, p: &EvalParams) -> Result<EvalResult> {
    eval_phi2(s1, s2, &SeriesSpec::Mu, p)
}

/// Continuation for any supported series.
pub fn eval_phi2(s1: &HpComplex, s2: &HpComplex, series: &SeriesSpec, p: &EvalParams) -> Result<EvalResult> {
    p.validate()?;
    let ctx = &p.ctx;
    let bits = ctx.bits;
    let s1 = s1.with_prec(bits);
    let s2 = s2.with_prec(bits);
    if s2.im.is_zero() && s2.re <= 0 && s2.re.is_integer() {
        return Err(Error::pre("s2 is a non-positive integer; use the singular-expansion machinery"));
    }
    // Exact hits only: points a tiny distance away are legitimate inputs.
    let exact_tol = ctx.ten_pow_neg(ctx.target_decimal as i32 + 5);
    let hits = classify_singularity(&s1, &s2, series, &exact_tol, &p.zeros);
    if !hits.is_empty() {
        return Err(Error::Singular(hits.iter().map(|h| h.to_string()).collect()));
    }
    let required = required_n(&s1, &s2, &p.eta);
    if p.n < required {
        return Err(Error::ContourTooLow { n: p.n, required });
    }
    if let SeriesSpec::Plugin(pl) = series {
        if let Some(d) = &pl.delta {
            if *d <= 0 {
                return Err(Error::pre("plug-in pole delta must be positive"));
            }
        }
    }
    let weights = match series {
        SeriesSpec::Lambda => Weights::Lambda,
        SeriesSpec::Mu => Weights::Tilde(None),
        SeriesSpec::Plugin(pl) => Weights::Tilde(Some(pl.as_ref())),
    };

    let sum = &s1 + &s2;
    let ln_gamma_s2 = ln_gamma(&s2)?;
    let mut terms = explicit_terms(&s1, &s2, &sum, series, &weights, p)?;
    let mut warnings = p.zeros.warnings.clone();

    let zs = zero_sum(&s2, &sum, &ln_gamma_s2, &weights, p)?;
    terms.push(Term { label: "zero_sum", value: zs.value });

    let contour = contour_integral(&s2, &sum, &ln_gamma_s2, &weights, p)?;
    if let Some(w) = &contour.warning {
        warnings.push(w.clone());
    }
    terms.push(Term { label: "contour_integral", value: contour.value });

    let mut value = HpComplex::zero(bits);
    for t in &terms {
        value = &value + &t.value;
    }
    // Rounding floor: the largest term times the working epsilon.
    let biggest = terms.iter().map(|t| t.value.log10_abs()).fold(f64::NEG_INFINITY, f64::max);
    let rounding = biggest - bits as f64 * std::f64::consts::LOG10_2 + 2.0;
    let quad_log = log10_add(contour.quad_err, contour.tail_err);
    let total_log = log10_add(log10_add(quad_log, zs.err), rounding);
    let to_real = |l: f64| -> HpReal {
        if l.is_finite() {
            Float::with_val(bits, l * std::f64::consts::LN_10).exp()
        } else {
            Float::new(bits)
        }
    };

    Ok(EvalResult {
        series: series.name().to_string(),
        s1,
        s2,
        value,
        terms,
        error_estimate: to_real(total_log),
        quadrature_error: to_real(quad_log),
        zero_sum_error: to_real(zs.err),
        params: ParamSummary {
            n: p.n,
            eta: fmt_real(&p.eta, 20),
            t_max: contour.t_max,
            quad_order: p.quad_order,
            quad_nodes: contour.nodes,
            zeros_used: zs.used,
            zeros_skipped: zs.skipped,
            target_digits: ctx.target_decimal,
            working_bits: bits,
        },
        warnings,
    })
}

fn explicit_terms(
    s1: &HpComplex,
    s2: &HpComplex,
    sum: &HpComplex,
    series: &SeriesSpec,
    weights: &Weights,
    p: &EvalParams,
) -> Result<Vec<Term>> {
    let _ = s1;
    let ctx = &p.ctx;
    let bits = ctx.bits;
    let c = ctx.consts();
    let mut terms = Vec::new();
    let mut odd = HpComplex::zero(bits);
    let mut even = HpComplex::zero(bits);
    match weights {
        Weights::Lambda => {
            // zeta(s1+s2-1)/(s2-1) - log(2 pi) zeta(s1+s2)
            let boundary = &zeta(&sum.add_i64(-1))? / &s2.add_i64(-1);
            terms.push(Term { label: "pole_term", value: boundary });
            let z0 = zeta(sum)?.scale(&c.ln_2pi);
            terms.push(Term { label: "k0_term", value: -&z0 });
            for k in 1..p.n {
                let x = sum.add_i64(k as i64);
                let binom = binom_neg(s2, k);
                if k % 2 == 1 {
                    let m = memo(format!("m|{bits}|{k}"), || mangoldt_m(&HpComplex::from_real(ctx.int(-(k as i64)))))?;
                    odd = &odd + &(&(&binom * &m) * &zeta(&x)?);
                } else {
                    let jet = zeta_jet(&x, 1)?;
                    let (z, zp) = (jet.derivative(0), jet.derivative(1));
                    let (d1, d2) = trivial_zero_derivs(k, ctx)?;
                    let a = -(Float::with_val(bits, &d2 / &d1)) / 2u32;
                    let b = GammaLinear::gamma_laurent_constant(k).eval(ctx);
                    let kf = Float::with_val(bits, &factorial(k));
                    let coef = Float::with_val(bits, &kf * &b) - &a;
                    let inner = &z.scale(&coef) - &zp;
                    let gp = gamma_prime_ratio(s2, k)?;
                    let g_term = (&gp * &z).scale(&(Float::with_val(bits, 1) / &kf));
                    even = &even - &(&(&binom * &inner) - &g_term);
                }
            }
        }
        Weights::Tilde(plugin) => {
            if let (Some(pl), Some(delta)) = (plugin, series.effective_delta()) {
                // Gamma(s2 - delta) Gamma(delta) / Gamma(s2) Res_delta(Phi/zeta) zeta(s1+s2-delta)
                let d = HpComplex::from_real(ctx.rational(&delta));
                let lg = &(&ln_gamma(&(s2 - &d))? + &ln_gamma(&d)?) - &ln_gamma(s2)?;
                let res = (pl.residue_at_delta)(ctx)?;
                let v = &(&lg.exp() * &res) * &zeta(&(sum - &d))?;
                terms.push(Term { label: "pole_term", value: v });
            }
            // Phi(0)/zeta(0) zeta(s1+s2) = -2 Phi(0) zeta(s1+s2)
            let phi0 = weights.phi_neg_k(0, ctx)?;
            let k0 = (&phi0 * &zeta(sum)?).scale_i64(-2);
            terms.push(Term { label: "k0_term", value: k0 });
            for k in 1..p.n {
                let x = sum.add_i64(k as i64);
                let binom = binom_neg(s2, k);
                let phik = weights.phi_neg_k(k, ctx)?;
                if k % 2 == 1 {
                    // -binom (k+1) Phi(-k) / B_{k+1} zeta(s1+s2+k)
                    let bk = ctx.rational(&bernoulli(k as usize + 1, BernoulliConvention::MinusHalf));
                    let w = Float::with_val(bits, (k + 1) as u32) / bk;
                    odd = &odd - &(&(&binom * &phik) * &zeta(&x)?).scale(&w);
                } else {
                    let jet = zeta_jet(&x, 1)?;
                    let (z, zp) = (jet.derivative(0), jet.derivative(1));
                    let (d1, d2) = trivial_zero_derivs(k, ctx)?;
                    let kf = Float::with_val(bits, &factorial(k));
                    // D_k(alpha) = Phi(-k; alpha) / zeta'(-k)
                    let dk = phik.scale(&(Float::with_val(bits, 1) / &d1));
                    let ck = match plugin {
                        Some(pl) => (pl.c_k)(k, ctx)?,
                        None => {
                            let v = -(Float::with_val(bits, &d2 / &d1) / &d1) / 2u32;
                            HpComplex::from_real(v)
                        }
                    };
                    let b = GammaLinear::gamma_laurent_constant(k).eval(ctx);
                    // binom { D_k (k! b_k zeta - zeta') + c_k zeta } - Gamma'/Gamma D_k / k! zeta
                    let left = &(&z.scale(&Float::with_val(bits, &kf * &b)) - &zp) * &dk;
                    let inner = &left + &(&ck * &z);
                    let gp = gamma_prime_ratio(s2, k)?;
                    let g_term = (&(&gp * &dk) * &z).scale(&(Float::with_val(bits, 1) / &kf));
                    even = &even + &(&(&binom * &inner) - &g_term);
                }
            }
        }
    }
    terms.push(Term { label: "odd_k_sum", value: odd });
    terms.push(Term { label: "even_k_sum", value: even });
    Ok(terms)
}

struct ZeroSumOut {
    value: HpComplex,
    err: f64,
    used: usize,
    skipped: usize,
}

fn zero_sum(s2: &HpComplex, sum: &HpComplex, ln_gamma_s2: &HpComplex, weights: &Weights, p: &EvalParams) -> Result<ZeroSumOut> {
    let ctx = &p.ctx;
    let bits = ctx.bits;
    let half = Float::with_val(bits, 0.5);
    let skip_below = -(ctx.target_decimal as f64 + ctx.guard_digits as f64 + 5.0);
    let both_real = s2.is_real() && sum.is_real();
    let mut acc = HpComplex::zero(bits);
    let mut err = f64::NEG_INFINITY;
    let (mut used, mut skipped) = (0usize, 0usize);
    for gamma in p.zeros.gammas.iter().take(p.zero_policy.max_zeros) {
        let rho = HpComplex::new(half.clone(), Float::with_val(bits, gamma));
        let lg_rho = memo(zero_key("lgrho", gamma, bits), || ln_gamma(&rho))?;
        let conjugates: &[bool] = if both_real { &[false] } else { &[false, true] };
        for &conj in conjugates {
            let (r, lgr) = if conj { (rho.conj(), lg_rho.conj()) } else { (rho.clone(), lg_rho.clone()) };
            let lg = &(&ln_gamma(&(s2 - &r))? + &lgr) - ln_gamma_s2;
            let w_arg = (sum - &r).to_c64();
            let mut est = lg.re.to_f64() / std::f64::consts::LN_10 + zeta_log10_bound(w_arg);
            if both_real {
                est += 2f64.log10();
            }
            let weight = match weights {
                Weights::Lambda => None,
                Weights::Tilde(_) => {
                    if est + 3.0 < skip_below {
                        None
                    } else {
                        let zp = memo(zero_key("zprho", gamma, bits), || Ok(zeta_jet(&rho, 1)?.derivative(1)))?;
                        let zp = if conj { zp.conj() } else { zp };
                        let phi = weights.phi(&r)?;
                        let w = &phi / &zp;
                        est += w.log10_abs();
                        Some(w)
                    }
                }
            };
            if est < skip_below {
                err = log10_add(err, est);
                skipped += 1;
                continue;
            }
            let mut term = &lg.exp() * &zeta(&(sum - &r))?;
            term = match (&weights, weight) {
                (Weights::Lambda, _) => -&term,
                (_, Some(w)) => &term * &w,
                (_, None) => unreachable!("weight computed for retained terms"),
            };
            if both_real {
                term = HpComplex::from_real(Float::with_val(bits, &term.re * 2u32));
            }
            acc = &acc + &term;
            used += 1;
        }
    }
    // Omitted zeros beyond the policy cut-off.
    if let Some(last) = p.zeros.gammas.get(p.zero_policy.max_zeros.max(1) - 1) {
        let mut growth = s2.re.to_f64().abs() + 2.0 + (1.0 - sum.re.to_f64()).max(0.0);
        if matches!(weights, Weights::Tilde(_)) {
            growth += 1.0;
        }
        let bound = zero_sum_tail_bound_with(s2, last, growth)?;
        // 1/Gamma(s2) is not part of the bound's decay model.
        let scale = -ln_gamma_s2.re.to_f64() / std::f64::consts::LN_10;
        err = log10_add(err, crate::hp::log10_abs(&bound) + scale.max(0.0));
    }
    Ok(ZeroSumOut { value: acc, err, used, skipped })
}

struct ContourOut {
    value: HpComplex,
    quad_err: f64,
    tail_err: f64,
    t_max: f64,
    nodes: usize,
    warning: Option<String>,
}

/// Singularities of the integrand mapped to the `t`-plane of `z = c + i t`.
fn contour_singularities(s2: &HpComplex, sum: &HpComplex, c: f64, n: u32, weights: &Weights, zeros: &ZeroTable) -> Vec<Complex64> {
    let to_t = |z: Complex64| Complex64::new(z.im, c - z.re);
    let mut out = Vec::new();
    // Gamma(-z) poles and trivial zeros of zeta(-z) near the line.
    for j in (n as i64 - 3)..=(n as i64 + 3) {
        out.push(to_t(Complex64::new(j as f64, 0.0)));
    }
    let s2f = s2.to_c64();
    for l in 0..4 {
        out.push(to_t(-s2f - l as f64));
    }
    out.push(to_t(Complex64::new(1.0, 0.0) - sum.to_c64()));
    match weights {
        Weights::Lambda => out.push(to_t(Complex64::new(-1.0, 0.0))),
        Weights::Tilde(Some(p)) => {
            if let Some(d) = &p.delta {
                out.push(to_t(Complex64::new(-d.to_f64(), 0.0)));
            }
        }
        Weights::Tilde(None) => {}
    }
    for g in zeros.gammas.iter().take(3) {
        let g = g.to_f64();
        out.push(to_t(Complex64::new(-0.5, -g)));
        out.push(to_t(Complex64::new(-0.5, g)));
    }
    out
}

fn contour_integral(
    s2: &HpComplex,
    sum: &HpComplex,
    ln_gamma_s2: &HpComplex,
    weights: &Weights,
    p: &EvalParams,
) -> Result<ContourOut> {
    let ctx = &p.ctx;
    let bits = ctx.bits;
    let c = Float::with_val(bits, Float::with_val(bits, p.n) - &p.eta);
    let cf = c.to_f64();
    let sings = contour_singularities(s2, sum, cf, p.n, weights, &p.zeros);
    let digits = ctx.target_decimal as f64;
    let im_scale = sum.im.to_f64().abs().max(s2.im.to_f64().abs());
    let mut t_max = p.t_max.unwrap_or(digits * std::f64::consts::LN_10 / std::f64::consts::PI + im_scale + 10.0);
    t_max = t_max.ceil();

    let integrand = |z: &HpComplex, lg_neg: &HpComplex, tilde: &HpComplex| -> Result<HpComplex> {
        let lg = &(&ln_gamma(&(s2 + z))? + lg_neg) - ln_gamma_s2;
        Ok(&(&lg.exp() * tilde) * &zeta(&(sum + z))?)
    };
    let node_factor = |z: &HpComplex| -> Result<(HpComplex, HpComplex)> {
        let w = -z;
        Ok((ln_gamma(&w)?, weights.tilde(&w)?))
    };

    let mut warning = None;
    for attempt in 0..6 {
        let layout = LineLayout::new(&c, t_max, &sings, p.quad_order, bits)?;
        let key = format!("{}|{}", weights.tag(), layout.key());
        let cached = if weights.cacheable() { NODE_CACHE.lock().expect("node cache poisoned").get(&key).cloned() } else { None };
        let factors: NodeFactors = match cached {
            Some(f) => f,
            None => {
                let f = Arc::new(layout.nodes.iter().map(|n| node_factor(&n.z)).collect::<Result<Vec<_>>>()?);
                if weights.cacheable() {
                    let mut cache = NODE_CACHE.lock().expect("node cache poisoned");
                    if cache.len() >= NODE_CACHE_CAP {
                        cache.clear();
                    }
                    cache.insert(key, f.clone());
                }
                f
            }
        };
        let values = layout
            .nodes
            .iter()
            .zip(factors.iter())
            .map(|(n, (lg, t))| integrand(&n.z, lg, t))
            .collect::<Result<Vec<_>>>()?;
        let (value, quad_err) = layout.combine(&values);

        // Truncation: the integrand decays at least like e^{-pi |t| / 2} beyond T.
        let mut tail = f64::NEG_INFINITY;
        for sign in [-1.0, 1.0] {
            let z = HpComplex::new(c.clone(), Float::with_val(bits, sign * t_max));
            let (lg, t) = node_factor(&z)?;
            let v = integrand(&z, &lg, &t)?;
            tail = log10_add(tail, v.log10_abs() - (std::f64::consts::FRAC_PI_2 * std::f64::consts::TAU).log10());
        }
        let allowed = value.log10_abs().max(0.0) - digits - 2.0;
        if tail <= allowed || p.t_max.is_some() {
            if tail > allowed {
                warning = Some(format!("contour truncation error 1e{tail:.1} exceeds the target at T = {t_max}"));
            }
            return Ok(ContourOut { value, quad_err, tail_err: tail, t_max, nodes: layout.nodes.len(), warning });
        }
        if attempt == 5 {
            return Err(Error::Quadrature(format!("integrand not negligible at T = {t_max} (1e{tail:.1})")));
        }
        t_max += 10.0;
    }
    unreachable!("loop returns")
}

// ---------------------------------------------------------------------------
// Mellin–Barnes self-test

/// `(1 + lambda)^{-s}` against
/// `(1/2 pi i) int_{(c)} Gamma(s+z) Gamma(-z) / Gamma(s) lambda^z dz`,
/// valid for `-Re s < c < 0` and `|arg lambda| < pi`.
/// Returns `(contour value, closed form, log10 quadrature error)`.
pub fn mellin_barnes_selftest(
    s: &HpComplex,
    lambda: &HpComplex,
    c: &HpReal,
    ctx: &PrecisionContext,
) -> Result<(HpComplex, HpComplex, f64)> {
    let bits = ctx.bits;
    let s = s.with_prec(bits);
    let lambda = lambda.with_prec(bits);
    let cf = c.to_f64();
    if !(cf < 0.0 && cf > -s.re.to_f64()) {
        return Err(Error::pre("need -Re s < c < 0"));
    }
    if lambda.is_zero() || (lambda.im.is_zero() && lambda.re < 0) {
        return Err(Error::pre("need lambda != 0 with |arg lambda| < pi"));
    }
    let closed = (&lambda.add_i64(1).ln() * &(-&s)).exp();
    let ln_lambda = lambda.ln();
    let lg_s = ln_gamma(&s)?;
    let arg = lambda.arg().to_f64().abs();
    let decay = std::f64::consts::PI - arg;
    let t_max = ((ctx.target_decimal as f64 + 10.0) * std::f64::consts::LN_10 / decay + s.im.to_f64().abs() + 10.0).ceil();
    let to_t = |z: Complex64| Complex64::new(z.im, cf - z.re);
    let sf = s.to_c64();
    let mut sings = Vec::new();
    for j in 0..3 {
        sings.push(to_t(Complex64::new(j as f64, 0.0)));
        sings.push(to_t(-sf - j as f64));
    }
    let cc = Float::with_val(bits, c);
    let (v, err) = crate::quad::integrate_line(&cc, t_max, &sings, DEFAULT_QUAD_ORDER, |z| {
        let lg = &(&(&ln_gamma(&(&s + z))? + &ln_gamma(&(-z))?) - &lg_s) + &(&ln_lambda * z);
        Ok(lg.exp())
    })?;
    Ok((v, closed, err))
}

/// Working digits implied by an evaluation's precision, for display.
pub fn display_digits(r: &EvalResult) -> u32 {
    digits_for_bits(r.params.working_bits).min(r.params.target_digits)
}
