//! Laurent-expansion constants of the continuation formulas.
//!
//! * `a_k = -zeta''(-k) / (2 zeta'(-k))`: constant term of `M(-z)` at `z = k`.
//! * `b_l = (-1)^l / l! (H_l - gamma)`: constant term of `Gamma(-z)` at `z = l`.
//! * `c_k = -zeta''(-k) / (2 zeta'(-k)^2)`: constant term of `1/zeta(-z)` at `z = k`.
//! * `D_k = 1 / zeta'(-k)`: its residue, with the closed form
//!   `(-1)^(k/2) 2 (2 pi)^k / (k! zeta(k+1))` as an independent cross-check.
//! * `C(k, n)`: constant term of `Gamma'(-n+k+e) / Gamma(-n+e)` as `e -> 0`,
//!   obtained by polynomial extrapolation over a geometric ladder in `e`.

use std::collections::BTreeMap;

use rug::Float;

use super::gamma::gamma_parts;
use super::zeta::zeta_jet;
use crate::error::{Error, Result};
use crate::exact::{factorial, GammaLinear};
use crate::hp::{HpComplex, HpReal, PrecisionContext};

#[derive(Clone, Debug)]
pub struct LaurentConstants {
    pub a: BTreeMap<u32, HpReal>,
    pub b: BTreeMap<u32, (GammaLinear, HpReal)>,
    pub c: BTreeMap<u32, HpReal>,
    pub d: BTreeMap<u32, HpReal>,
    pub d_closed: BTreeMap<u32, HpReal>,
    /// `zeta'(-k)` for the even `k` above.
    pub zeta_prime: BTreeMap<u32, HpReal>,
    pub ckn: BTreeMap<(u32, u32), CknEstimate>,
}

/// Extrapolated `C(k, n)` with the agreement between two ladder refinements.
#[derive(Clone, Debug)]
pub struct CknEstimate {
    pub value: HpReal,
    /// Number of decimal digits on which the coarse and refined ladders agree.
    pub agreement_digits: f64,
}

/// `(zeta'(-k), zeta''(-k))` for even `k >= 2`, both real.
pub(crate) fn zeta_derivs_at_trivial_zero(k: u32, ctx: &PrecisionContext) -> Result<(HpReal, HpReal)> {
    let s = HpComplex::from_real(ctx.int(-(k as i64)));
    let j = zeta_jet(&s, 2)?;
    let d1 = j.derivative(1).re;
    let d2 = j.derivative(2).re;
    Ok((d1, d2))
}

/// `a_k` for even `k >= 2`.
pub fn a_k(k: u32, ctx: &PrecisionContext) -> Result<HpReal> {
    let (d1, d2) = zeta_derivs_at_trivial_zero(k, ctx)?;
    Ok(-(d2 / d1) / 2u32)
}

/// `b_l` as an exact linear form in Euler's constant, plus its numeric value.
pub fn b_l(l: u32, ctx: &PrecisionContext) -> (GammaLinear, HpReal) {
    let g = GammaLinear::gamma_laurent_constant(l);
    let v = g.eval(ctx);
    (g, v)
}

/// `D_k = 1/zeta'(-k)` through the closed form, for even `k >= 2`.
pub fn d_k_closed(k: u32, ctx: &PrecisionContext) -> Result<HpReal> {
    let bits = ctx.bits;
    let two_pi = ctx.consts().two_pi.clone();
    let z = zeta_jet(&HpComplex::from_real(ctx.int(k as i64 + 1)), 0)?.c[0].re.clone();
    let num = Float::with_val(bits, rug::ops::Pow::pow(two_pi, k)) * 2u32;
    let den = Float::with_val(bits, &factorial(k)) * z;
    let v = num / den;
    Ok(if (k / 2) % 2 == 1 { -v } else { v })
}

/// Builds `a_k, c_k, D_k` for even `2 <= k <= kmax`, `b_l` for `l <= kmax`
/// and `C(k, n)` for every even `k <= min(n, kmax)` and `n` in `n_list`.
pub fn laurent_constants(ctx: &PrecisionContext, kmax: u32, n_list: &[u32]) -> Result<LaurentConstants> {
    if kmax < 2 || kmax % 2 != 0 {
        return Err(Error::pre(format!("kmax must be even and >= 2, got {kmax}")));
    }
    let mut out = LaurentConstants {
        a: BTreeMap::new(),
        b: BTreeMap::new(),
        c: BTreeMap::new(),
        d: BTreeMap::new(),
        d_closed: BTreeMap::new(),
        zeta_prime: BTreeMap::new(),
        ckn: BTreeMap::new(),
    };
    for l in 0..=kmax {
        out.b.insert(l, b_l(l, ctx));
    }
    for k in (2..=kmax).step_by(2) {
        let (d1, d2) = zeta_derivs_at_trivial_zero(k, ctx)?;
        let a = -Float::with_val(ctx.bits, &d2 / &d1) / 2u32;
        let c = Float::with_val(ctx.bits, &a / &d1);
        let d = Float::with_val(ctx.bits, 1) / &d1;
        out.a.insert(k, a);
        out.c.insert(k, c);
        out.d.insert(k, d);
        out.d_closed.insert(k, d_k_closed(k, ctx)?);
        out.zeta_prime.insert(k, d1);
    }
    for &n in n_list {
        for k in (0..=n.min(kmax)).step_by(2) {
            out.ckn.insert((k, n), c_kn(k, n, ctx)?);
        }
    }
    Ok(out)
}

/// `g(e) = Gamma'(-n+k+e)/Gamma(-n+e) - (-1)^(k-1) n! / ((n-k)! e)`.
fn ckn_regular_part(k: u32, n: u32, eps: &Float, pole: &Float) -> Result<Float> {
    let bits = eps.prec();
    let x = HpComplex::from_real(Float::with_val(bits, eps + (k as i64 - n as i64)));
    let y = HpComplex::from_real(Float::with_val(bits, eps - n as i64));
    let px = gamma_parts(&x, true, false)?;
    let py = gamma_parts(&y, false, false)?;
    let ratio = (&px.ln_gamma - &py.ln_gamma).exp();
    let v = &ratio * px.digamma.as_ref().expect("requested");
    Ok(v.re - Float::with_val(bits, pole / eps))
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`.
fn extrapolate_to_zero(x: &[Float], y: &[Float]) -> Float {
    let mut p: Vec<Float> = y.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let num = Float::with_val(p[i].prec(), &x[i] * &p[i + 1]) - Float::with_val(p[i].prec(), &x[i + m] * &p[i]);
            let den = Float::with_val(p[i].prec(), &x[i] - &x[i + m]);
            p[i] = num / den;
        }
    }
    p.swap_remove(0)
}

/// `C(k, n)` for even `k` with `0 <= k <= n`.
pub fn c_kn(k: u32, n: u32, ctx: &PrecisionContext) -> Result<CknEstimate> {
    if k > n {
        return Err(Error::pre(format!("C(k, n) needs k <= n, got k = {k}, n = {n}")));
    }
    let bits = ctx.bits + 128;
    let pole = {
        let f = Float::with_val(bits, &factorial(n)) / Float::with_val(bits, &factorial(n - k));
        if k % 2 == 0 {
            -f
        } else {
            f
        }
    };
    let points = 28usize;
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for j in 0..points {
        let mut e = Float::with_val(bits, 1);
        e >>= 3 + j as u32;
        ys.push(ckn_regular_part(k, n, &e, &pole)?);
        xs.push(e);
    }
    let full = extrapolate_to_zero(&xs, &ys);
    // The refined ladder drops the coarsest points.
    let refined = extrapolate_to_zero(&xs[4..], &ys[4..]);
    let diff = Float::with_val(bits, &full - &refined);
    let scale = crate::hp::log10_abs(&full).max(0.0);
    let agreement = (scale - crate::hp::log10_abs(&diff)).min(bits as f64 * std::f64::consts::LOG10_2);
    Ok(CknEstimate { value: Float::with_val(ctx.bits, &full), agreement_digits: agreement })
}
