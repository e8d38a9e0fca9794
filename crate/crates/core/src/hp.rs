//! Arbitrary-precision real and complex carriers.
//!
//! Every analytic evaluation runs at the bit precision of a [`PrecisionContext`].
//! Reals are MPFR floats ([`HpReal`]); [`HpComplex`] is a pair of them with the
//! elementary functions the continuation needs.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type HpReal = Float;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision shared by all operations of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub bits: u32,
    pub target_decimal: u32,
    pub guard_digits: u32,
}

impl PrecisionContext {
    pub const DEFAULT_GUARD: u32 = 10;

    pub fn new(target_decimal: u32) -> Self {
        Self::with_guard(target_decimal, Self::DEFAULT_GUARD)
    }

    pub fn with_guard(target_decimal: u32, guard_digits: u32) -> Self {
        let bits = ((target_decimal + guard_digits) as f64 * LOG2_10).ceil() as u32;
        PrecisionContext { bits, target_decimal, guard_digits }
    }

    /// A context carrying `extra` more bits than this one, same target.
    pub fn widened(&self, extra_bits: u32) -> Self {
        PrecisionContext { bits: self.bits + extra_bits, ..*self }
    }

    pub fn zero(&self) -> HpReal {
        Float::new(self.bits)
    }

    pub fn real(&self, x: f64) -> HpReal {
        Float::with_val(self.bits, x)
    }

    pub fn int(&self, x: i64) -> HpReal {
        Float::with_val(self.bits, x)
    }

    pub fn ratio(&self, p: i64, q: i64) -> HpReal {
        Float::with_val(self.bits, p) / q
    }

    pub fn rational(&self, r: &rug::Rational) -> HpReal {
        Float::with_val(self.bits, r)
    }

    pub fn complex(&self, re: f64, im: f64) -> HpComplex {
        HpComplex::from_f64(self.bits, re, im)
    }

    /// Decimal literal parsed at working precision (never through `f64`).
    pub fn parse(&self, s: &str) -> Result<HpReal> {
        let s = s.trim();
        let parsed = Float::parse(s).map_err(|e| Error::pre(format!("bad decimal literal {s:?}: {e}")))?;
        Ok(Float::with_val(self.bits, parsed))
    }

    /// `10^(-digits)` at working precision.
    pub fn ten_pow_neg(&self, digits: i32) -> HpReal {
        let ten = Float::with_val(self.bits, 10);
        let mut out = Float::with_val(self.bits, 1);
        out /= ten.pow(digits);
        out
    }

    /// Tolerance `10^(-target_decimal)`.
    pub fn target_eps(&self) -> HpReal {
        self.ten_pow_neg(self.target_decimal as i32)
    }

    pub fn consts(&self) -> Arc<Constants> {
        constants(self.bits)
    }

    pub fn pi(&self) -> HpReal {
        self.consts().pi.clone()
    }

    pub fn euler(&self) -> HpReal {
        self.consts().euler.clone()
    }
}

/// Constants cached per bit precision. Computed, never embedded as literals.
#[derive(Debug)]
pub struct Constants {
    pub bits: u32,
    pub pi: HpReal,
    pub euler: HpReal,
    pub ln2: HpReal,
    pub ln_pi: HpReal,
    pub ln_2pi: HpReal,
    pub two_pi: HpReal,
    pub half_pi: HpReal,
}

static CONSTANTS: Lazy<Mutex<HashMap<u32, Arc<Constants>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub fn constants(bits: u32) -> Arc<Constants> {
    let mut map = CONSTANTS.lock().expect("constants cache poisoned");
    map.entry(bits)
        .or_insert_with(|| {
            let pi = Float::with_val(bits, Constant::Pi);
            let euler = Float::with_val(bits, Constant::Euler);
            let ln2 = Float::with_val(bits, Constant::Log2);
            let ln_pi = Float::with_val(bits, pi.ln_ref());
            let two_pi = Float::with_val(bits, &pi * 2u32);
            let ln_2pi = Float::with_val(bits, &ln_pi + &ln2);
            let half_pi = Float::with_val(bits, &pi / 2u32);
            Arc::new(Constants { bits, pi, euler, ln2, ln_pi, ln_2pi, two_pi, half_pi })
        })
        .clone()
}

/// Decimal rendering used in every machine-readable payload.
pub fn fmt_real(x: &HpReal, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(1) as usize))
}

/// Rough base-10 magnitude, `-inf` for zero.
pub fn log10_abs(x: &HpReal) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    (m.abs()).log10() + e as f64 * std::f64::consts::LOG10_2
}

#[derive(Clone, PartialEq)]
pub struct HpComplex {
    pub re: HpReal,
    pub im: HpReal,
}

impl fmt::Debug for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", fmt_real(&self.re, 20), fmt_real(&self.im, 20))
    }
}

impl HpComplex {
    pub fn zero(bits: u32) -> Self {
        HpComplex { re: Float::new(bits), im: Float::new(bits) }
    }

    pub fn one(bits: u32) -> Self {
        HpComplex { re: Float::with_val(bits, 1), im: Float::new(bits) }
    }

    pub fn from_f64(bits: u32, re: f64, im: f64) -> Self {
        HpComplex { re: Float::with_val(bits, re), im: Float::with_val(bits, im) }
    }

    pub fn from_real(re: HpReal) -> Self {
        let im = Float::new(re.prec());
        HpComplex { re, im }
    }

    pub fn new(re: HpReal, im: HpReal) -> Self {
        HpComplex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, bits: u32) -> Self {
        HpComplex { re: Float::with_val(bits, &self.re), im: Float::with_val(bits, &self.im) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        HpComplex { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> HpReal {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> HpReal {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> HpReal {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, k: &HpReal) -> Self {
        let p = self.prec();
        HpComplex { re: Float::with_val(p, &self.re * k), im: Float::with_val(p, &self.im * k) }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        let p = self.prec();
        HpComplex { re: Float::with_val(p, &self.re * k), im: Float::with_val(p, &self.im * k) }
    }

    pub fn div_i64(&self, k: i64) -> Self {
        let p = self.prec();
        HpComplex { re: Float::with_val(p, &self.re / k), im: Float::with_val(p, &self.im / k) }
    }

    pub fn add_real(&self, x: &HpReal) -> Self {
        HpComplex { re: Float::with_val(self.prec(), &self.re + x), im: self.im.clone() }
    }

    pub fn add_i64(&self, k: i64) -> Self {
        HpComplex { re: Float::with_val(self.prec(), &self.re + k), im: self.im.clone() }
    }

    /// Multiply by `i`.
    pub fn mul_i(&self) -> Self {
        HpComplex { re: Float::with_val(self.prec(), -&self.im), im: self.re.clone() }
    }

    pub fn square(&self) -> Self {
        let p = self.prec();
        let re = Float::with_val(p, self.re.square_ref()) - Float::with_val(p, self.im.square_ref());
        let mut im = Float::with_val(p, &self.re * &self.im);
        im *= 2u32;
        HpComplex { re, im }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let p = self.prec();
        HpComplex { re: Float::with_val(p, &self.re / &n), im: Float::with_val(p, -&self.im) / &n }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        HpComplex { re: Float::with_val(p, &m * &c), im: m * s }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec();
        let r = self.abs();
        HpComplex { re: Float::with_val(p, r.ln_ref()), im: self.arg() }
    }

    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return HpComplex::zero(p);
        }
        let half = self.ln().scale(&Float::with_val(p, 0.5));
        half.exp()
    }

    /// `self^w` on the principal branch.
    pub fn powc(&self, w: &HpComplex) -> Self {
        (&self.ln() * w).exp()
    }

    /// `(sin z, cos z)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let p = self.prec();
        let (s, c) = self.re.clone().sin_cos(Float::new(p));
        let (sh, ch) = self.im.clone().sinh_cosh(Float::new(p));
        let sin = HpComplex { re: Float::with_val(p, &s * &ch), im: Float::with_val(p, &c * &sh) };
        let cos = HpComplex { re: Float::with_val(p, &c * &ch), im: -(s * sh) };
        (sin, cos)
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Rough base-10 magnitude of `|z|`.
    pub fn log10_abs(&self) -> f64 {
        let a = log10_abs(&self.re);
        let b = log10_abs(&self.im);
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if hi == f64::NEG_INFINITY {
            return hi;
        }
        hi + 0.5 * (1.0 + 10f64.powf(2.0 * (lo - hi))).log10()
    }

    pub fn display(&self, digits: u32) -> (String, String) {
        (fmt_real(&self.re, digits), fmt_real(&self.im, digits))
    }
}

impl<'a> Add<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn add(self, o: &'a HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl<'a> Sub<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn sub(self, o: &'a HpComplex) -> HpComplex {
        let p = self.prec();
        HpComplex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl<'a> Mul<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn mul(self, o: &'a HpComplex) -> HpComplex {
        let p = self.prec();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        HpComplex { re: ac - bd, im: ad + bc }
    }
}

impl<'a> Div<&'a HpComplex> for &'a HpComplex {
    type Output = HpComplex;
    fn div(self, o: &'a HpComplex) -> HpComplex {
        let p = self.prec();
        let n = o.norm_sqr();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        let ad = Float::with_val(p, &self.re * &o.im);
        HpComplex { re: (ac + bd) / &n, im: (bc - ad) / &n }
    }
}

impl Neg for &HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        let p = self.prec();
        HpComplex { re: Float::with_val(p, -&self.re), im: Float::with_val(p, -&self.im) }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<HpComplex> for HpComplex {
            type Output = HpComplex;
            fn $m(self, o: HpComplex) -> HpComplex {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a HpComplex> for HpComplex {
            type Output = HpComplex;
            fn $m(self, o: &'a HpComplex) -> HpComplex {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        -&self
    }
}

/// Kahan-Babuska (Neumaier) accumulator for complex `f64` sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: Complex64,
    comp: Complex64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier_step(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier_step(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier_step(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_cover_target_plus_guard() {
        let ctx = PrecisionContext::new(80);
        assert!(ctx.bits as f64 >= 90.0 * LOG2_10);
        assert_eq!(ctx.guard_digits, PrecisionContext::DEFAULT_GUARD);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let ctx = PrecisionContext::new(60);
        let z = ctx.complex(0.3, -2.5);
        let back = z.ln().exp();
        let err = (&back - &z).abs();
        assert!(log10_abs(&err) < -60.0);
    }

    #[test]
    fn sin_cos_pythagoras() {
        let ctx = PrecisionContext::new(50);
        let z = ctx.complex(1.7, 0.9);
        let (s, c) = z.sin_cos();
        let one = &s.square() + &c.square();
        let err = (&one - &HpComplex::one(ctx.bits)).abs();
        assert!(log10_abs(&err) < -50.0);
    }

    #[test]
    fn parse_is_exact_to_precision() {
        let ctx = PrecisionContext::new(40);
        let x = ctx.parse("0.1").unwrap();
        let y = ctx.real(0.1);
        assert_ne!(x, y);
        assert!(ctx.parse("abc").is_err());
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut acc = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.add(Complex64::new(x, 0.0));
        }
        assert_eq!(acc.value().re, 2.0);
    }
}

/// Decimal digits that `bits` of binary precision represent faithfully.
pub fn digits_for_bits(bits: u32) -> u32 {
    ((bits as f64) * std::f64::consts::LOG10_2).floor() as u32
}

/// Serde helper: a real as a decimal string at its own precision.
pub fn serialize_real<S: serde::Serializer>(x: &HpReal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_real(x, digits_for_bits(x.prec())))
}

impl Serialize for HpComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let d = digits_for_bits(self.prec());
        let mut st = s.serialize_struct("complex", 2)?;
        st.serialize_field("re", &fmt_real(&self.re, d))?;
        st.serialize_field("im", &fmt_real(&self.im, d))?;
        st.end()
    }
}
