//! Behaviour at the non-positive integer points `(-m, -n)`: closed-form
//! reverse values and residues, and numerical singular expansions
//! `c2/e^2 + c1/e + c0` of `Phi_2(-m, -n + e)` fitted over a geometric ladder.

use rug::{Float, Rational};
use serde::Serialize;

use crate::continuation::{classify_singularity, eval_phi2, required_n, EvalParams};
use crate::error::{Error, Result};
use crate::exact::{bernoulli, binomial, factorial, rational_string, residue_r, zeta_int, BernoulliConvention, GammaLinear};
use crate::hp::{serialize_real, HpComplex, HpReal, PrecisionContext};
use crate::series::SeriesSpec;
use crate::special::{c_kn, mangoldt_m, zeta_d};

/// Convention for `B_1` in the closed-form reverse value, fixed by comparing
/// the closed form at `(0, 0)` with the fitted limit of the continuation.
pub const REVERSE_VALUE_B1: BernoulliConvention = BernoulliConvention::PlusHalf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ReverseStatus {
    Convergent,
    Divergent,
}

/// A residue known exactly or only numerically.
#[derive(Clone, Debug, PartialEq)]
pub enum ResidueValue {
    Exact(Rational),
    Numeric(HpComplex),
}

impl Serialize for ResidueValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ResidueValue::Exact(r) => s.serialize_str(&rational_string(r)),
            ResidueValue::Numeric(v) => v.serialize(s),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReverseValue {
    pub status: ReverseStatus,
    pub value: Option<HpComplex>,
    /// Coefficient of `1/e` when divergent.
    pub residue: Option<ResidueValue>,
    /// Coefficient of `1/e^2` when nonzero.
    pub double_pole: Option<HpComplex>,
    pub b1_convention: &'static str,
}

fn convention_name(c: BernoulliConvention) -> &'static str {
    match c {
        BernoulliConvention::MinusHalf => "B1=-1/2",
        BernoulliConvention::PlusHalf => "B1=+1/2",
    }
}

fn parity_error(m: i64, n: i64, want: &str) -> Error {
    Error::Parity(format!("m + n must be {want}, got m = {m}, n = {n}"))
}

/// Reverse value `lim_{s2 -> -n} lim_{s1 -> -m} Phi_2(s1, s2; 1, Lambda)` for
/// `m + n` even, by the closed form, under the frozen `B_1` convention.
pub fn reverse_value_closed_lambda(m: u32, n: u32, ctx: &PrecisionContext) -> Result<ReverseValue> {
    reverse_value_closed_lambda_with(m, n, REVERSE_VALUE_B1, ctx)
}

/// As [`reverse_value_closed_lambda`] with an explicit `B_1` convention.
///
/// The excluded case `m = 0, n >= 2` is divergent: the even `k = n` term of
/// the continuation contributes `zeta(0)/e`, and the result is a DIVERGENT
/// marker carrying that residue.
pub fn reverse_value_closed_lambda_with(
    m: u32,
    n: u32,
    conv: BernoulliConvention,
    ctx: &PrecisionContext,
) -> Result<ReverseValue> {
    if (m + n) % 2 != 0 {
        return Err(parity_error(m as i64, n as i64, "even"));
    }
    let b1 = convention_name(conv);
    if m == 0 && n >= 2 {
        return Ok(ReverseValue {
            status: ReverseStatus::Divergent,
            value: None,
            residue: Some(ResidueValue::Exact(excluded_case_residue())),
            double_pole: None,
            b1_convention: b1,
        });
    }
    let bits = ctx.bits;
    let bern = |j: u32| ctx.rational(&bernoulli(j as usize, conv));
    let s = m + n;
    let mut v = Float::with_val(bits, bern(s + 2) / ((n + 1) * (s + 2)));
    v += Float::with_val(bits, &ctx.consts().ln_2pi * bern(s + 1)) / (s + 1);
    for k in (1..=n).step_by(2) {
        // binom(n,k) (k+1)/B_{k+1} zeta'(-k) B_{s-k+1}/(s-k+1)
        let zp = zeta_d(&HpComplex::from_real(ctx.int(-(k as i64))), 1)?.re;
        let w = Float::with_val(bits, &binomial(n, k)) * (k + 1) / bern(k + 1);
        let t = w * zp * bern(s - k + 1) / (s - k + 1);
        v -= t;
    }
    for k in (2..=n).step_by(2) {
        let bb = bern(s - k + 1);
        if bb.is_zero() {
            continue;
        }
        let (d1, d2) = crate::special::laurent::zeta_derivs_at_trivial_zero(k, ctx)?;
        let a = -(Float::with_val(bits, &d2 / &d1)) / 2u32;
        let b = GammaLinear::gamma_laurent_constant(k).eval(ctx);
        let coef = Float::with_val(bits, &factorial(k)) * b - a;
        v += Float::with_val(bits, &binomial(n, k)) * bb / (s - k + 1) * coef;
    }
    let mm = mangoldt_m(&HpComplex::from_real(ctx.int(-(s as i64) - 1)))?.re;
    let w = Rational::from((factorial(m) * factorial(n), factorial(s + 1)));
    let last = Float::with_val(bits, ctx.rational(&w) * mm);
    if m % 2 == 0 {
        v -= last;
    } else {
        v += last;
    }
    Ok(ReverseValue {
        status: ReverseStatus::Convergent,
        value: Some(HpComplex::from_real(v)),
        residue: None,
        double_pole: None,
        b1_convention: b1,
    })
}

/// `1/e` coefficient of `Phi_2(0, -n + e; 1, Lambda)`, `n >= 2` even: the
/// `k = n` even term `+(1/k!) Gamma'(s2+k)/Gamma(s2) zeta(s1+s2+k)` gives
/// `-zeta(0) = 1/2`.
pub fn excluded_case_residue() -> Rational {
    Rational::from((1, 2))
}

/// The `1/e` coefficient of `Phi_2(-m, -n + e; 1, Lambda)` for `m, n >= 0`,
/// `m + n` odd, as carried by the continuation: `-R(-m, -n)`.
///
/// The printed expansion states `+R(-m, -n)`; expanding the continuation
/// term by term gives the opposite sign (see the decisions ledger).
pub fn lambda_pole_coefficient(m: u32, n: u32) -> Result<Rational> {
    Ok(-residue_r(m as i64, n as i64)?)
}

/// Residue of `Phi_2(-m, -n + e; 1, mu)` at `e = 0` for `m + n` odd:
/// `(-1)^n D_{2l} m! n!/(m+n+1)! + sum_{k even <= n} (-1)^k binom(n,k) D_k zeta(k-m-n)`
/// with `D_k = 1/zeta'(-k)`, `2l = m + n + 1`.
pub fn residue_closed_mu(m: u32, n: u32, ctx: &PrecisionContext) -> Result<HpComplex> {
    if (m + n) % 2 != 1 {
        return Err(parity_error(m as i64, n as i64, "odd"));
    }
    let bits = ctx.bits;
    let d = |k: u32| -> Result<HpReal> {
        let (d1, _) = crate::special::laurent::zeta_derivs_at_trivial_zero(k, ctx)?;
        Ok(Float::with_val(bits, 1) / d1)
    };
    let two_l = m + n + 1;
    let w = Rational::from((factorial(m) * factorial(n), factorial(two_l)));
    let mut v = d(two_l)? * ctx.rational(&w);
    if n % 2 == 1 {
        v = -v;
    }
    for k in (2..=n).step_by(2) {
        let z = zeta_int(k as i64 - m as i64 - n as i64)?;
        let c = Rational::from(&z * &Rational::from(binomial(n, k)));
        v += d(k)? * ctx.rational(&c);
    }
    Ok(HpComplex::from_real(v))
}

// ---------------------------------------------------------------------------
// Singular expansions

#[derive(Clone, Debug, Serialize)]
pub struct LadderPoint {
    #[serde(serialize_with = "serialize_real")]
    pub eps: HpReal,
    pub value: HpComplex,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularExpansion {
    pub series: String,
    pub m: i64,
    pub n: u32,
    pub c2: HpComplex,
    pub c1: HpComplex,
    pub c0: HpComplex,
    /// Root-sum-square of the model residuals over the ladder.
    #[serde(serialize_with = "serialize_real")]
    pub fit_residual: HpReal,
    /// Contour abscissa actually used (raised automatically when needed).
    pub contour_n: u32,
    pub ladder: Vec<LadderPoint>,
    pub warnings: Vec<String>,
}

/// Default ladder `e_j = start * 2^-j`, `j = 0..len`.
pub fn geometric_ladder(start: &HpReal, len: usize) -> Vec<HpReal> {
    (0..len).map(|j| Float::with_val(start.prec(), start >> j as u32)).collect()
}

/// Default ladder: `10^-10 * 2^-j`, `j = 0..8`.
pub fn default_ladder(ctx: &PrecisionContext) -> Vec<HpReal> {
    geometric_ladder(&ctx.ten_pow_neg(10), 8)
}

/// Solve the 3x3 system `a x = b` by Gaussian elimination with pivoting.
fn solve3(mut a: [[Float; 3]; 3], mut b: [Float; 3]) -> Result<[Float; 3]> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].clone().abs().partial_cmp(&a[j][col].clone().abs()).expect("finite"))
            .expect("non-empty");
        if a[piv][col].is_zero() {
            return Err(Error::pre("singular least-squares system (ladder too short or degenerate)"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = Float::with_val(a[row][col].prec(), &a[row][col] / &a[col][col]);
            for k in col..3 {
                let t = Float::with_val(f.prec(), &f * &a[col][k]);
                a[row][k] -= t;
            }
            let t = Float::with_val(f.prec(), &f * &b[col]);
            b[row] -= t;
        }
    }
    let bits = b[0].prec();
    let mut x = [Float::new(bits), Float::new(bits), Float::new(bits)];
    for row in (0..3).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..3 {
            acc -= Float::with_val(bits, &a[row][k] * &x[k]);
        }
        x[row] = acc / &a[row][row];
    }
    Ok(x)
}

/// Least-squares fit of `c2/e^2 + c1/e + c0` to `(e_j, v_j)`; returns the
/// coefficients and the residual norm.
pub fn fit_laurent3(eps: &[HpReal], values: &[HpComplex]) -> Result<(HpComplex, HpComplex, HpComplex, HpReal)> {
    if eps.len() < 4 || eps.len() != values.len() {
        return Err(Error::pre("the fit needs at least 4 ladder points"));
    }
    let bits = values[0].prec();
    // Scaled abscissa x = e_0 / e keeps the normal equations well scaled.
    let e0 = eps.iter().fold(Float::new(bits), |acc, e| if *e > acc { Float::with_val(bits, e) } else { acc });
    let xs: Vec<Float> = eps.iter().map(|e| Float::with_val(bits, &e0 / e)).collect();
    let basis = |x: &Float| [Float::with_val(bits, x * x), x.clone(), Float::with_val(bits, 1)];
    let zero = || Float::new(bits);
    let solve_part = |ys: Vec<&Float>| -> Result<[Float; 3]> {
        let mut a = [[zero(), zero(), zero()], [zero(), zero(), zero()], [zero(), zero(), zero()]];
        let mut b = [Float::new(bits), Float::new(bits), Float::new(bits)];
        for (x, y) in xs.iter().zip(ys) {
            let f = basis(x);
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] += Float::with_val(bits, &f[i] * &f[j]);
                }
                b[i] += Float::with_val(bits, &f[i] * y);
            }
        }
        solve3(a, b)
    };
    let re = solve_part(values.iter().map(|v| &v.re).collect())?;
    let im = solve_part(values.iter().map(|v| &v.im).collect())?;
    let e0sq = Float::with_val(bits, &e0 * &e0);
    let c2 = HpComplex::new(Float::with_val(bits, &re[0] * &e0sq), Float::with_val(bits, &im[0] * &e0sq));
    let c1 = HpComplex::new(Float::with_val(bits, &re[1] * &e0), Float::with_val(bits, &im[1] * &e0));
    let c0 = HpComplex::new(re[2].clone(), im[2].clone());
    let mut rss = Float::new(bits);
    for (x, v) in xs.iter().zip(values) {
        let f = basis(x);
        let model = |c: &[Float; 3]| Float::with_val(bits, &c[0] * &f[0]) + Float::with_val(bits, &c[1] * &f[1]) + &c[2];
        let dr = Float::with_val(bits, &v.re - model(&re));
        let di = Float::with_val(bits, &v.im - model(&im));
        rss += Float::with_val(bits, &dr * &dr) + Float::with_val(bits, &di * &di);
    }
    Ok((c2, c1, c0, rss.sqrt()))
}

/// Evaluate `Phi_2(-m, -n + e)` over `ladder` (with `s1 = -m` fixed first)
/// and fit `c2/e^2 + c1/e + c0`.
///
/// The contour abscissa is raised to the smallest `N` valid at every ladder
/// point when `p.n` is too small.
pub fn fit_singular_expansion(
    m: i64,
    n: u32,
    series: &SeriesSpec,
    ladder: &[HpReal],
    p: &EvalParams,
) -> Result<SingularExpansion> {
    if ladder.len() < 4 {
        return Err(Error::pre("the ladder needs at least 4 points"));
    }
    if ladder.iter().any(|e| *e <= 0) {
        return Err(Error::pre("ladder values must be positive"));
    }
    let ctx = &p.ctx;
    let bits = ctx.bits;
    let s1 = HpComplex::from_real(ctx.int(-m));
    let mut params = p.clone();
    let mut warnings = Vec::new();
    let mut points = Vec::with_capacity(ladder.len());
    for e in ladder {
        let eps = Float::with_val(bits, e);
        let s2 = HpComplex::from_real(Float::with_val(bits, &eps - n));
        let need = required_n(&s1, &s2, &params.eta);
        if params.n < need {
            params.n = need;
        }
        // Every other singular set must stay far compared with e.
        let tol = Float::with_val(bits, &eps / 100u32);
        let hits = classify_singularity(&s1, &s2, series, &tol, &params.zeros);
        if !hits.is_empty() {
            return Err(Error::Singular(hits.iter().map(|h| format!("ladder point e = {}: {h}", eps.to_f64())).collect()));
        }
        let r = eval_phi2(&s1, &s2, series, &params)?;
        for w in r.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        points.push(LadderPoint { eps, value: r.value });
    }
    let eps: Vec<HpReal> = points.iter().map(|p| p.eps.clone()).collect();
    let vals: Vec<HpComplex> = points.iter().map(|p| p.value.clone()).collect();
    let (c2, c1, c0, fit_residual) = fit_laurent3(&eps, &vals)?;
    let scale = vals.iter().map(|v| v.log10_abs()).fold(0.0f64, f64::max);
    if crate::hp::log10_abs(&fit_residual) > scale - 0.5 * digits(ctx) {
        warnings.push("ill-conditioned fit: residual large relative to the ladder values".into());
    }
    Ok(SingularExpansion {
        series: series.name().to_string(),
        m,
        n,
        c2,
        c1,
        c0,
        fit_residual,
        contour_n: params.n,
        ladder: points,
        warnings,
    })
}

fn digits(ctx: &PrecisionContext) -> f64 {
    ctx.target_decimal as f64
}

/// Comparison of the assembled `1/e` coefficient at `m <= -1` with a fit.
#[derive(Clone, Debug, Serialize)]
pub struct C1Comparison {
    pub m: i64,
    pub n: u32,
    /// The bracket as printed, with the `k = 2l` pole term left out of the zeta sum.
    pub closed_form: HpComplex,
    pub fitted: HpComplex,
    pub c2_fitted: HpComplex,
    /// `|fitted + closed_form|`: the continuation carries the bracket with the opposite sign.
    #[serde(serialize_with = "serialize_real")]
    pub difference: HpReal,
    pub ckn_agreement_digits: f64,
}

/// The bracket
/// `binom(n,2l){(-a_2l + (2l)! b_2l) - sum_{j<2l} 1/(n-j)} + sum_{k even != 2l} binom(n,k) zeta(k-m-n)
///  + binom(n,2l) gamma - C(2l,n)/(2l)!`
/// for `m <= -1`, `m + n = 2l - 1`, `n >= 2l`.
pub fn c1_closed_form_lambda(m: i64, n: u32, ctx: &PrecisionContext) -> Result<(HpReal, f64)> {
    if m > -1 {
        return Err(Error::pre(format!("the closed-form c1 needs m <= -1, got {m}")));
    }
    let s = m + n as i64;
    if s.rem_euclid(2) != 1 || s < 1 {
        return Err(parity_error(m, n as i64, "odd and positive"));
    }
    let two_l = (s + 1) as u32;
    if n < two_l {
        return Err(Error::pre("the closed-form c1 needs n >= 2l"));
    }
    let bits = ctx.bits;
    let (d1, d2) = crate::special::laurent::zeta_derivs_at_trivial_zero(two_l, ctx)?;
    let a = -(Float::with_val(bits, &d2 / &d1)) / 2u32;
    let b = GammaLinear::gamma_laurent_constant(two_l).eval(ctx);
    let mut harmonic = Rational::new();
    for j in 0..two_l {
        harmonic += Rational::from((1, n - j));
    }
    let binom = Float::with_val(bits, &binomial(n, two_l));
    let inner = Float::with_val(bits, &factorial(two_l)) * b - a - ctx.rational(&harmonic);
    let mut v = Float::with_val(bits, &binom * &inner);
    for k in (2..=n).step_by(2) {
        if k == two_l {
            continue;
        }
        let arg = k as i64 - s;
        let z = if arg <= 0 {
            ctx.rational(&zeta_int(arg)?)
        } else {
            crate::special::zeta(&HpComplex::from_real(ctx.int(arg)))?.re
        };
        v += Float::with_val(bits, &binomial(n, k)) * z;
    }
    v += Float::with_val(bits, &binom * &ctx.euler());
    let ckn = c_kn(two_l, n, ctx)?;
    v -= ckn.value / Float::with_val(bits, &factorial(two_l));
    Ok((v, ckn.agreement_digits))
}

/// Fit at `(m, n)` with `m <= -1` and compare `c1` against the assembled bracket.
pub fn check_c1_closed_form_lambda(m: i64, n: u32, ladder: &[HpReal], p: &EvalParams) -> Result<C1Comparison> {
    let (closed, agreement) = c1_closed_form_lambda(m, n, &p.ctx)?;
    let fit = fit_singular_expansion(m, n, &SeriesSpec::Lambda, ladder, p)?;
    let closed = HpComplex::from_real(closed);
    let difference = (&fit.c1 + &closed).abs();
    Ok(C1Comparison {
        m,
        n,
        closed_form: closed,
        fitted: fit.c1,
        c2_fitted: fit.c2,
        difference,
        ckn_agreement_digits: agreement,
    })
}
