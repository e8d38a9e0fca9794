//! Exact rational arithmetic: Bernoulli numbers, zeta at non-positive
//! integers, the residue function `R(-m,-n)` and its reciprocity identities.
//!
//! Nothing here rounds. Rationals are GMP rationals, always in lowest terms
//! with a positive denominator.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::RwLock;

use once_cell::sync::Lazy;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hp::{HpReal, PrecisionContext};

/// Which sign `B_1` carries. Every other `B_n` is convention independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BernoulliConvention {
    /// `B_1 = -1/2`, generating function `t/(e^t - 1)`. Canonical.
    MinusHalf,
    /// `B_1 = +1/2`, generating function `t e^t/(e^t - 1)`.
    PlusHalf,
}

impl Default for BernoulliConvention {
    fn default() -> Self {
        BernoulliConvention::MinusHalf
    }
}

// B_n under the MinusHalf convention, index = n.
static BERNOULLI: Lazy<RwLock<Vec<Rational>>> = Lazy::new(|| RwLock::new(vec![Rational::from(1)]));

fn extend_bernoulli(upto: usize) {
    if BERNOULLI.read().expect("bernoulli cache poisoned").len() > upto {
        return;
    }
    let mut table = BERNOULLI.write().expect("bernoulli cache poisoned");
    while table.len() <= upto {
        let n = table.len();
        // sum_{j=0}^{n} C(n+1, j) B_j = 0, solved for B_n.
        if n >= 3 && n % 2 == 1 {
            table.push(Rational::new());
            continue;
        }
        let mut binom = Integer::from(1); // C(n+1, 0)
        let mut acc = Rational::new();
        for (j, b) in table.iter().enumerate() {
            if b.cmp0().is_ne() {
                acc += Rational::from(b * &binom);
            }
            binom *= (n + 1 - j) as u64;
            binom /= (j + 1) as u64;
        }
        let bn = -acc / Rational::from(n as u64 + 1);
        table.push(bn);
    }
}

/// `B_n` under the chosen convention. Memoized, safe to call concurrently.
pub fn bernoulli(n: usize, conv: BernoulliConvention) -> Rational {
    if n == 1 {
        return match conv {
            BernoulliConvention::MinusHalf => Rational::from((-1, 2)),
            BernoulliConvention::PlusHalf => Rational::from((1, 2)),
        };
    }
    extend_bernoulli(n);
    BERNOULLI.read().expect("bernoulli cache poisoned")[n].clone()
}

/// `B_0..=B_upto` under the canonical `B_1 = -1/2` convention.
pub fn bernoulli_table(upto: usize) -> Vec<Rational> {
    extend_bernoulli(upto);
    BERNOULLI.read().expect("bernoulli cache poisoned")[..=upto].to_vec()
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}

/// `zeta(j)` for an integer `j <= 0`.
pub fn zeta_int(j: i64) -> Result<Rational> {
    if j >= 1 {
        return Err(Error::pre(format!("zeta_int needs j <= 0, got {j}")));
    }
    if j == 0 {
        return Ok(Rational::from((-1, 2)));
    }
    let r = (1 - j) as usize; // zeta(1 - r), r >= 2
    if r % 2 == 1 {
        return Ok(Rational::new());
    }
    // zeta(1-r) = (-1)^(r-1) B_r / r = -B_r / r for even r.
    Ok(-bernoulli(r, BernoulliConvention::MinusHalf) / Rational::from(r as u64))
}

fn sign(k: u32) -> i32 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn check_residue_args(m: i64, n: i64) -> Result<(u32, u32)> {
    if m < 0 || n < 0 {
        return Err(Error::pre(format!("R(-m,-n) needs m, n >= 0, got m={m}, n={n}")));
    }
    if (m + n) % 2 == 0 {
        return Err(Error::Parity(format!("R(-m,-n) needs m+n odd, got m={m}, n={n}")));
    }
    Ok((m as u32, n as u32))
}

/// `(-1)^n m! n! / (m+n+1)!`
fn beta_term(m: u32, n: u32) -> Rational {
    let num = factorial(m) * factorial(n);
    let den = factorial(m + n + 1);
    Rational::from((num, den)) * sign(n)
}

/// `R(-m,-n)` assembled from zeta values at non-positive integers.
pub fn residue_r_zeta_form(m: i64, n: i64) -> Result<Rational> {
    let (m, n) = check_residue_args(m, n)?;
    let mut r = beta_term(m, n);
    for k in (2..=n).step_by(2) {
        let z = zeta_int(k as i64 - m as i64 - n as i64)?;
        r += z * binomial(n, k);
    }
    Ok(r)
}

/// `R(-m,-n)` assembled directly from Bernoulli numbers.
pub fn residue_r_bernoulli_form(m: i64, n: i64) -> Result<Rational> {
    let (m, n) = check_residue_args(m, n)?;
    let mut r = beta_term(m, n);
    for j in 1..=n / 2 {
        let idx = m + n + 1 - 2 * j;
        let b = bernoulli(idx as usize, BernoulliConvention::MinusHalf);
        r -= b * binomial(n, 2 * j) / Rational::from(idx);
    }
    Ok(r)
}

/// The residue `R(-m,-n)` for `m, n >= 0`, `m + n` odd.
///
/// Both algebraic forms are evaluated; they must agree exactly.
pub fn residue_r(m: i64, n: i64) -> Result<Rational> {
    let a = residue_r_zeta_form(m, n)?;
    let b = residue_r_bernoulli_form(m, n)?;
    assert_eq!(a, b, "the two forms of R(-{m},-{n}) disagree");
    Ok(a)
}

/// Saalschuetz reciprocity terms `(lhs_term1, lhs_term2, rhs)`.
pub fn saalschutz_check(p: u32, q: u32) -> (Rational, Rational, Rational) {
    saalschutz_check_with(p, q, BernoulliConvention::MinusHalf)
}

pub fn saalschutz_check_with(p: u32, q: u32, conv: BernoulliConvention) -> (Rational, Rational, Rational) {
    let half = |outer: u32, inner: u32| -> Rational {
        let mut acc = Rational::new();
        for l in 0..=inner {
            let idx = outer + 1 + l;
            let b = bernoulli(idx as usize, conv);
            if b.cmp0().is_eq() {
                continue;
            }
            acc += b * binomial(inner, l) / Rational::from(idx);
        }
        acc * -sign(outer)
    };
    let lhs1 = half(p, q);
    let lhs2 = half(q, p);
    let rhs = Rational::from((factorial(p) * factorial(q), factorial(p + q + 1)));
    (lhs1, lhs2, rhs)
}

/// Reciprocity `(-1)^n R(-m,-n) + (-1)^m R(-n,-m)` against `m! n!/(m+n+1)!`.
/// Returns `(lhs, rhs, lhs - rhs)`.
pub fn reciprocity_check(m: i64, n: i64) -> Result<(Rational, Rational, Rational)> {
    if m < 1 || n < 1 {
        return Err(Error::pre(format!("reciprocity needs m, n >= 1, got m={m}, n={n}")));
    }
    if (m + n) % 2 == 0 {
        return Err(Error::Parity(format!("reciprocity needs m+n odd, got m={m}, n={n}")));
    }
    let lhs = residue_r(m, n)? * sign(n as u32) + residue_r(n, m)? * sign(m as u32);
    let (mu, nu) = (m as u32, n as u32);
    let rhs = Rational::from((factorial(mu) * factorial(nu), factorial(mu + nu + 1)));
    let diff = Rational::from(&lhs - &rhs);
    Ok((lhs, rhs, diff))
}

/// Serialized form: `"p/q"` in lowest terms, `"p"` for integers.
pub fn rational_string(r: &Rational) -> String {
    r.to_string()
}

/// `const_part + gamma_coeff * gamma` with `gamma` the Euler constant, exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaLinear {
    pub const_part: Rational,
    pub gamma_coeff: Rational,
}

impl GammaLinear {
    pub fn new(const_part: Rational, gamma_coeff: Rational) -> Self {
        GammaLinear { const_part, gamma_coeff }
    }

    pub fn zero() -> Self {
        GammaLinear::new(Rational::new(), Rational::new())
    }

    /// Constant term `b_l` of the Laurent expansion of `Gamma(s)` at `s = -l`:
    /// `(-1)^l / l! * (H_l - gamma)`.
    pub fn gamma_laurent_constant(l: u32) -> Self {
        let mut harmonic = Rational::new();
        for j in 1..=l {
            harmonic += Rational::from((1, j));
        }
        let w = Rational::from((Integer::from(sign(l)), factorial(l)));
        GammaLinear::new(Rational::from(&harmonic * &w), -w)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        GammaLinear::new(Rational::from(&self.const_part * k), Rational::from(&self.gamma_coeff * k))
    }

    pub fn eval(&self, ctx: &PrecisionContext) -> HpReal {
        let c = ctx.rational(&self.const_part);
        let g = ctx.rational(&self.gamma_coeff) * ctx.euler();
        c + g
    }
}

impl Add for &GammaLinear {
    type Output = GammaLinear;
    fn add(self, o: &GammaLinear) -> GammaLinear {
        GammaLinear::new(
            Rational::from(&self.const_part + &o.const_part),
            Rational::from(&self.gamma_coeff + &o.gamma_coeff),
        )
    }
}

impl Sub for &GammaLinear {
    type Output = GammaLinear;
    fn sub(self, o: &GammaLinear) -> GammaLinear {
        GammaLinear::new(
            Rational::from(&self.const_part - &o.const_part),
            Rational::from(&self.gamma_coeff - &o.gamma_coeff),
        )
    }
}

impl Mul<&Rational> for &GammaLinear {
    type Output = GammaLinear;
    fn mul(self, k: &Rational) -> GammaLinear {
        self.scale(k)
    }
}

impl Neg for &GammaLinear {
    type Output = GammaLinear;
    fn neg(self) -> GammaLinear {
        GammaLinear::new(Rational::from(-&self.const_part), Rational::from(-&self.gamma_coeff))
    }
}
