//! Riemann zeta with up to two derivatives, and `M(s) = -zeta'(s)/zeta(s)`.
//!
//! Right of the critical line (and in a small disc around the origin) the
//! Euler–Maclaurin formula is summed directly, carrying a Taylor jet in `s`.
//! Left of it the functional equation `zeta(s) = chi(s) zeta(1 - s)` is applied
//! as a product of jets, which stays well defined at the trivial zeros.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rug::Float;

use super::gamma::gamma_parts;
use super::{bernoulli_even, Jet};
use crate::error::{Error, Result};
use crate::hp::{constants, HpComplex};

/// Extra bits carried inside one zeta evaluation.
const GUARD_BITS: u32 = 24;

/// Chooses the Euler–Maclaurin summation length `n` and correction order `m`
/// from the precision and the size of `s`, minimising a simple cost model.
#[derive(Clone, Debug)]
pub struct EmPolicy {
    /// Upper bound on the direct summation length.
    pub max_terms: usize,
    /// Upper bound on the number of Bernoulli corrections.
    pub max_order: usize,
    /// Relative cost of one `exp` (done once per prime) against a multiply.
    pub exp_cost: f64,
    /// Relative cost of one correction term.
    pub correction_cost: f64,
}

impl Default for EmPolicy {
    fn default() -> Self {
        EmPolicy { max_terms: 20_000, max_order: 600, exp_cost: 25.0, correction_cost: 8.0 }
    }
}

impl EmPolicy {
    /// Natural log of the size of the `k`-th correction term, `k >= 1`.
    fn log_term(s: Complex64, n: f64, k: usize) -> f64 {
        let mut acc = std::f64::consts::LN_2 - 2.0 * k as f64 * std::f64::consts::TAU.ln();
        for j in 0..(2 * k - 1) {
            // Clamped so a vanishing factor at s = 0 does not hide the derivatives.
            acc += (s + j as f64).norm().max(0.5).ln();
        }
        acc - (s.re + 2.0 * k as f64 - 1.0) * n.ln()
    }

    /// Returns `(n, m)` such that the first omitted correction is below `2^-bits`.
    pub fn choose(&self, s: Complex64, bits: u32) -> (usize, usize) {
        let target = -(bits as f64) * std::f64::consts::LN_2;
        let mut best: Option<(f64, usize, usize)> = None;
        let mut n = 4usize.max((s.norm() / std::f64::consts::TAU).ceil() as usize + 2);
        while n <= self.max_terms {
            let nf = n as f64;
            let base_cost = nf + self.exp_cost * nf / nf.ln().max(1.0);
            if best.map_or(false, |b| base_cost > b.0) {
                break;
            }
            // Terms shrink while |s + 2k| < 2 pi n; walk k until under target.
            let mut k = 1usize;
            let mut prev = f64::INFINITY;
            let mut found = None;
            let mut lt = Self::log_term(s, nf, 1);
            while k <= self.max_order {
                if lt < target {
                    found = Some(k);
                    break;
                }
                if lt > prev {
                    break;
                }
                prev = lt;
                // log T_{k+1} - log T_k
                let a = (s + (2 * k - 1) as f64).norm().max(1e-300).ln();
                let b = (s + (2 * k) as f64).norm().max(1e-300).ln();
                lt += a + b - 2.0 * std::f64::consts::TAU.ln() - 2.0 * nf.ln();
                k += 1;
            }
            if let Some(m) = found {
                let cost = base_cost + self.correction_cost * m as f64;
                if best.map_or(true, |b| cost < b.0) {
                    best = Some((cost, n, m));
                }
            }
            n = (n + n / 8).max(n + 1);
        }
        match best {
            Some((_, n, m)) => (n, m),
            None => (self.max_terms, self.max_order),
        }
    }
}

struct LogTable {
    ln: Vec<Float>,
    spf: Vec<u32>,
}

static LOG_TABLES: Lazy<Mutex<HashMap<u32, Arc<LogTable>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `ln n` for `n < len` and the smallest-prime-factor table, per precision.
fn log_table(bits: u32, len: usize) -> Arc<LogTable> {
    let mut map = LOG_TABLES.lock().expect("log table cache poisoned");
    if let Some(t) = map.get(&bits) {
        if t.ln.len() >= len {
            return t.clone();
        }
    }
    let size = len.next_power_of_two().max(256);
    let mut spf = vec![0u32; size];
    for i in 2..size {
        if spf[i] == 0 {
            let mut j = i;
            while j < size {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let mut ln: Vec<Float> = Vec::with_capacity(size);
    ln.push(Float::new(bits));
    ln.push(Float::new(bits));
    for i in 2..size {
        let p = spf[i] as usize;
        if p == i {
            ln.push(Float::with_val(bits, i).ln());
        } else {
            let v = Float::with_val(bits, &ln[p] + &ln[i / p]);
            ln.push(v);
        }
    }
    let t = Arc::new(LogTable { ln, spf });
    map.insert(bits, t.clone());
    t
}

static EM_COEFFS: Lazy<Mutex<HashMap<u32, Arc<Vec<Float>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `B_2k / (2k)!` for `k = 0..=kmax` at `bits`.
fn em_coeffs(bits: u32, kmax: usize) -> Arc<Vec<Float>> {
    let mut map = EM_COEFFS.lock().expect("coefficient cache poisoned");
    if let Some(t) = map.get(&bits) {
        if t.len() > kmax {
            return t.clone();
        }
    }
    let k_new = (kmax + 1).next_power_of_two().max(64);
    let bern = bernoulli_even(bits, k_new);
    let mut fact = Float::with_val(bits, 1);
    let mut out = Vec::with_capacity(k_new + 1);
    for k in 0..=k_new {
        if k > 0 {
            fact *= (2 * k - 1) as u32;
            fact *= (2 * k) as u32;
        }
        out.push(Float::with_val(bits, &bern[k] / &fact));
    }
    let t = Arc::new(out);
    map.insert(bits, t.clone());
    t
}

/// Multiply a jet in place by the linear factor `a + delta`.
fn mul_linear(c: &mut [HpComplex], a: &HpComplex) {
    for j in (0..c.len()).rev() {
        let mut v = &c[j] * a;
        if j > 0 {
            v = &v + &c[j - 1];
        }
        c[j] = v;
    }
}

fn mul_linear_real(c: &mut [HpComplex], a: &HpComplex, scale: &Float) {
    mul_linear(c, a);
    for v in c.iter_mut() {
        *v = v.scale(scale);
    }
}

/// Euler–Maclaurin jet of order `ord` at `s` (any `s != 1`).
fn em_jet(s: &HpComplex, ord: usize, policy: &EmPolicy) -> Jet {
    let out_bits = s.prec();
    let bits = out_bits + GUARD_BITS;
    let s = s.with_prec(bits);
    let (n, m) = policy.choose(s.to_c64(), bits);
    let table = log_table(bits, n + 1);
    let coeffs = em_coeffs(bits, m + 1);

    // Direct part: sum_{j < n} j^-s with derivatives (-ln j)^d / d!.
    let neg_s = -&s;
    let mut pw: Vec<HpComplex> = Vec::with_capacity(n);
    pw.push(HpComplex::zero(bits));
    pw.push(HpComplex::one(bits));
    let mut acc: Vec<HpComplex> = vec![HpComplex::zero(bits); ord + 1];
    acc[0] = HpComplex::one(bits);
    for j in 2..n {
        let p = table.spf[j] as usize;
        let v = if p == j { neg_s.scale(&table.ln[j]).exp() } else { &pw[p] * &pw[j / p] };
        acc[0] = &acc[0] + &v;
        if ord >= 1 {
            let l = &table.ln[j];
            let t1 = v.scale(l);
            acc[1] = &acc[1] - &t1;
            if ord >= 2 {
                let half_l = Float::with_val(bits, l * 0.5f64);
                acc[2] = &acc[2] + &t1.scale(&half_l);
            }
        }
        pw.push(v);
    }

    // Tail bracket: n/(s-1) + 1/2 + sum_k beta_k (s)_{2k-1} n^{1-2k}.
    let nf = Float::with_val(bits, n);
    let inv_n = Float::with_val(bits, 1) / &nf;
    let inv_n2 = Float::with_val(bits, &inv_n * &inv_n);
    let u = s.add_i64(-1);
    let ur = u.recip();
    let mut bracket: Vec<HpComplex> = vec![HpComplex::zero(bits); ord + 1];
    {
        // n / (s - 1) expanded: n (1/u - d/u^2 + d^2/u^3)
        let mut p = ur.scale(&nf);
        for (j, b) in bracket.iter_mut().enumerate() {
            *b = if j % 2 == 0 { p.clone() } else { -&p };
            p = &p * &ur;
        }
        bracket[0] = bracket[0].add_real(&Float::with_val(bits, 0.5));
    }
    let mut uk: Vec<HpComplex> = vec![HpComplex::zero(bits); ord + 1];
    uk[0] = s.scale(&inv_n);
    if ord >= 1 {
        uk[1] = HpComplex::from_real(inv_n.clone());
    }
    let mut tol = Float::with_val(bits, 1);
    tol >>= bits;
    for k in 1..=m {
        let beta = &coeffs[k];
        for j in 0..=ord {
            bracket[j] = &bracket[j] + &uk[j].scale(beta);
        }
        if k == m {
            break;
        }
        let small = uk.iter().all(|u| {
            let last = u.scale(beta);
            last.re.clone().abs() < tol && last.im.clone().abs() < tol
        });
        if small && k > 2 {
            break;
        }
        mul_linear(&mut uk, &s.add_i64(2 * k as i64 - 1));
        mul_linear_real(&mut uk, &s.add_i64(2 * k as i64), &inv_n2);
    }

    // n^-s jet.
    let ln_n = Float::with_val(bits, nf.ln_ref());
    let base = neg_s.scale(&ln_n).exp();
    let mut npow = vec![base.clone(); ord + 1];
    if ord >= 1 {
        npow[1] = -&base.scale(&ln_n);
    }
    if ord >= 2 {
        let q = Float::with_val(bits, &ln_n * &ln_n) / 2u32;
        npow[2] = base.scale(&q);
    }
    let tail = Jet { c: npow }.mul(&Jet { c: bracket });
    let total = Jet { c: acc }.add(&tail);
    Jet { c: total.c.into_iter().map(|v| v.with_prec(out_bits)).collect() }
}

/// Jet of `chi(s) = (2 pi)^s / pi * sin(pi s / 2) * Gamma(1 - s)` at `s`.
fn chi_jet(s: &HpComplex, ord: usize) -> Result<Jet> {
    let bits = s.prec();
    let c = constants(bits);
    let w = &HpComplex::one(bits) - s;
    let parts = gamma_parts(&w, ord >= 1, ord >= 2)?;
    // log of (2 pi)^s Gamma(1 - s)
    let l0 = &s.scale(&c.ln_2pi) + &parts.ln_gamma;
    let e0 = l0.exp();
    let mut e = vec![e0.clone()];
    if ord >= 1 {
        let l1 = &HpComplex::from_real(c.ln_2pi.clone()) - parts.digamma.as_ref().expect("requested");
        e.push(&e0 * &l1);
        if ord >= 2 {
            let l2 = parts.trigamma.as_ref().expect("requested").scale(&Float::with_val(bits, 0.5));
            let q = &l2 + &l1.square().scale(&Float::with_val(bits, 0.5));
            e.push(&e0 * &q);
        }
    }
    let a = s.scale(&c.half_pi);
    let (sin_a, cos_a) = a.sin_cos();
    let inv_pi = Float::with_val(bits, 1) / &c.pi;
    let mut sn = vec![sin_a.scale(&inv_pi)];
    if ord >= 1 {
        sn.push(cos_a.scale(&Float::with_val(bits, 0.5)));
        if ord >= 2 {
            let q = Float::with_val(bits, &c.pi / -8i32);
            sn.push(sin_a.scale(&q));
        }
    }
    Ok(Jet { c: e }.mul(&Jet { c: sn }))
}

fn uses_reflection(s: &HpComplex) -> bool {
    let z = s.to_c64();
    z.re < 0.5 && z.norm() >= 0.5
}

fn check_not_one(s: &HpComplex, function: &'static str) -> Result<()> {
    if s.im.is_zero() && s.re == 1 {
        return Err(Error::Pole { function, at: "1".into() });
    }
    Ok(())
}

/// Taylor jet `[zeta(s), zeta'(s), zeta''(s)/2]` truncated at `order <= 2`.
pub fn zeta_jet(s: &HpComplex, order: usize) -> Result<Jet> {
    if order > 2 {
        return Err(Error::pre("zeta derivatives are available up to order 2"));
    }
    check_not_one(s, "zeta")?;
    let policy = EmPolicy::default();
    if !uses_reflection(s) {
        return Ok(em_jet(s, order, &policy));
    }
    let bits = s.prec() + GUARD_BITS;
    let sw = s.with_prec(bits);
    let w = &HpComplex::one(bits) - &sw;
    let reflected = em_jet(&w, order, &policy).reflect();
    let jet = chi_jet(&sw, order)?.mul(&reflected);
    Ok(Jet { c: jet.c.into_iter().map(|v| v.with_prec(s.prec())).collect() })
}

/// `d`-th derivative of zeta at `s`, `d` in `{0, 1, 2}`.
pub fn zeta_d(s: &HpComplex, d: usize) -> Result<HpComplex> {
    Ok(zeta_jet(s, d)?.derivative(d))
}

pub fn zeta(s: &HpComplex) -> Result<HpComplex> {
    zeta_d(s, 0)
}

/// Magnitude (base 10) below which `zeta` is treated as vanishing.
fn zero_threshold(bits: u32) -> f64 {
    let digits = bits as f64 * std::f64::consts::LOG10_2 - 10.0;
    -(digits.max(10.0)) / 2.0
}

/// `M(s) = -zeta'(s)/zeta(s)`. Left of the critical line the reflected form
/// `M(s) = -log 2 pi - (pi/2) cot(pi s/2) + psi(1 - s) - M(1 - s)` is used.
pub fn mangoldt_m(s: &HpComplex) -> Result<HpComplex> {
    check_not_one(s, "M")?;
    let bits = s.prec();
    let thr = zero_threshold(bits);
    let pole = |at: &HpComplex| Error::Pole { function: "M", at: format!("{:?}", at.to_c64()) };
    if !uses_reflection(s) {
        let j = zeta_jet(s, 1)?;
        if j.c[0].log10_abs() < thr {
            return Err(pole(s));
        }
        return Ok(-&(&j.c[1] / &j.c[0]));
    }
    let wbits = bits + GUARD_BITS;
    let sw = s.with_prec(wbits);
    let c = constants(wbits);
    let w = &HpComplex::one(wbits) - &sw;
    let j = em_jet(&w, 1, &EmPolicy::default());
    if j.c[0].log10_abs() < thr {
        return Err(pole(s));
    }
    let m_w = -&(&j.c[1] / &j.c[0]);
    let (sin_a, cos_a) = sw.scale(&c.half_pi).sin_cos();
    if sin_a.log10_abs() < thr {
        return Err(pole(s));
    }
    let cot = &cos_a / &sin_a;
    let psi = gamma_parts(&w, true, false)?.digamma.expect("requested");
    let mut out = &psi - &m_w;
    out = &out - &cot.scale(&c.half_pi);
    out = out.add_real(&Float::with_val(wbits, -&c.ln_2pi));
    Ok(out.with_prec(bits))
}

/// `M(s)` evaluated through the Euler–Maclaurin jet only, for overlap checks.
#[doc(hidden)]
pub fn mangoldt_m_direct(s: &HpComplex) -> Result<HpComplex> {
    check_not_one(s, "M")?;
    let j = em_jet(s, 1, &EmPolicy::default());
    Ok(-&(&j.c[1] / &j.c[0]))
}

/// Zeta jet through Euler–Maclaurin regardless of the half-plane.
#[doc(hidden)]
pub fn zeta_jet_direct(s: &HpComplex, order: usize) -> Result<Jet> {
    check_not_one(s, "zeta")?;
    Ok(em_jet(s, order.min(2), &EmPolicy::default()))
}

/// Zeta jet through the functional equation regardless of the half-plane.
#[doc(hidden)]
pub fn zeta_jet_reflected(s: &HpComplex, order: usize) -> Result<Jet> {
    check_not_one(s, "zeta")?;
    let w = &HpComplex::one(s.prec()) - s;
    check_not_one(&w, "zeta")?;
    let reflected = em_jet(&w, order.min(2), &EmPolicy::default()).reflect();
    Ok(chi_jet(s, order.min(2))?.mul(&reflected))
}
