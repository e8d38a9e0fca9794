//! Piecewise Gauss–Legendre quadrature along vertical lines `Re z = c`.
//!
//! Panels are sized from the nearest singularities of the integrand: a rule
//! of order `n` on a panel converges like `rho^(-2n)`, where `rho` is the
//! Bernstein-ellipse parameter of the nearest singularity. Each panel is also
//! integrated with order `n/2`; the difference gives the error estimate.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rug::Float;

use crate::error::{Error, Result};
use crate::hp::{constants, HpComplex, HpReal};

/// Nodes and weights of the order-`n` Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<HpReal>,
    pub weights: Vec<HpReal>,
}

static RULES: Lazy<Mutex<HashMap<(usize, u32), Arc<GaussLegendre>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Float) -> (Float, Float) {
    let bits = x.prec();
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let a = Float::with_val(bits, x * &p1) * (2 * k - 1) as u32;
        let b = Float::with_val(bits, &p0 * (k - 1) as u32);
        let p2 = (a - b) / k as u32;
        p0 = p1;
        p1 = p2;
    }
    // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
    let num = (Float::with_val(bits, x * &p1) - &p0) * n as u32;
    let den = Float::with_val(bits, x * x) - 1u32;
    (p1, num / den)
}

pub fn gauss_legendre(n: usize, bits: u32) -> Arc<GaussLegendre> {
    if let Some(r) = RULES.lock().expect("rule cache poisoned").get(&(n, bits)) {
        return r.clone();
    }
    let work = bits + 32;
    let mut tol = Float::with_val(work, 1);
    tol >>= bits + 8;
    let mut nodes = vec![Float::new(bits); n];
    let mut weights = vec![Float::new(bits); n];
    for i in 0..(n + 1) / 2 {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(work, guess);
        let mut dp = Float::new(work);
        for _ in 0..200 {
            let (p, d) = legendre(n, &x);
            let dx = Float::with_val(work, &p / &d);
            x -= &dx;
            dp = d;
            if dx.abs() < tol {
                let (_, d) = legendre(n, &x);
                dp = d;
                break;
            }
        }
        // w = 2 / ((1 - x^2) P_n'(x)^2)
        let one_minus = Float::with_val(work, 1) - Float::with_val(work, &x * &x);
        let w = Float::with_val(work, 2) / (one_minus * Float::with_val(work, &dp * &dp));
        nodes[i] = Float::with_val(bits, &x);
        weights[i] = Float::with_val(bits, &w);
        nodes[n - 1 - i] = Float::with_val(bits, -&x);
        weights[n - 1 - i] = Float::with_val(bits, &w);
    }
    let rule = Arc::new(GaussLegendre { nodes, weights });
    RULES.lock().expect("rule cache poisoned").insert((n, bits), rule.clone());
    rule
}

/// One quadrature node on the line: `z = c + i t` with its panel and weight.
#[derive(Clone, Debug)]
pub struct LineNode {
    pub z: HpComplex,
    pub weight: HpReal,
    pub panel: usize,
    /// `true` for the order-`n` rule, `false` for the order-`n/2` check rule.
    pub primary: bool,
}

/// A fixed panel layout on `Re z = c`, `|Im z| <= t_max`.
#[derive(Clone, Debug)]
pub struct LineLayout {
    pub c: HpReal,
    pub t_max: f64,
    pub order: usize,
    /// Panel endpoints in `t`, dyadic so they are exact in every precision.
    pub panels: Vec<(f64, f64)>,
    pub nodes: Vec<LineNode>,
}

/// Bernstein parameter of `t0` relative to the panel `[a, b]`.
fn bernstein_rho(a: f64, b: f64, t0: Complex64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let u = (t0 - mid) / half;
    let r = (u * u - 1.0).sqrt();
    (u + r).norm().max((u - r).norm())
}

fn dyadic(x: f64) -> f64 {
    (x * 1024.0).round() / 1024.0
}

/// Longest panel length accepted regardless of singularities: keeps the
/// `e^{-pi |t|}`-type decay and mild oscillation resolved by the rule.
pub const MAX_PANEL: f64 = 12.0;

/// Halvings of the panel cap tried by [`integrate_line`] before giving up.
const MAX_REFINEMENTS: u32 = 8;

impl LineLayout {
    /// `sings` are singularities of the integrand in the `t`-plane
    /// (`z0 = c + i t0`, i.e. `t0 = Im z0 + i (c - Re z0)`).
    pub fn new(c: &HpReal, t_max: f64, sings: &[Complex64], order: usize, bits: u32) -> Result<Self> {
        Self::with_max_panel(c, t_max, sings, order, bits, MAX_PANEL)
    }

    /// As [`LineLayout::new`] with panels no longer than `max_panel`.
    pub fn with_max_panel(c: &HpReal, t_max: f64, sings: &[Complex64], order: usize, bits: u32, max_panel: f64) -> Result<Self> {
        if !(max_panel > 0.0) {
            return Err(Error::pre("panel cap must be positive"));
        }
        if order < 8 || order % 2 != 0 {
            return Err(Error::pre("quadrature order must be even and >= 8"));
        }
        if sings.iter().any(|s| s.im.abs() < 1e-12) {
            return Err(Error::pre("integrand singular on the integration line"));
        }
        let need = ((bits as f64 + 16.0) * std::f64::consts::LN_2 / (2.0 * order as f64)).exp();
        let mut panels = Vec::new();
        let mut a = dyadic(-t_max);
        let end = dyadic(t_max);
        while a < end {
            let ok = |len: f64| sings.iter().all(|&s| bernstein_rho(a, a + len, s) >= need);
            let mut len = max_panel.min(end - a);
            while !ok(len) && len > 1e-6 {
                len *= 0.5;
            }
            if len <= 1e-6 {
                return Err(Error::Quadrature("singularity too close to the contour".into()));
            }
            // Stretch back towards the cap in small steps when possible.
            let mut best = len;
            let mut trial = len * 1.25;
            while trial <= max_panel.min(end - a) && ok(trial) {
                best = trial;
                trial *= 1.25;
            }
            let mut b = dyadic(a + best);
            if b <= a {
                b = a + 1.0 / 1024.0;
            }
            if end - b < 1e-3 {
                b = end;
            }
            panels.push((a, b));
            a = b;
        }
        let full = gauss_legendre(order, bits);
        let half_rule = gauss_legendre(order / 2, bits);
        let mut nodes = Vec::with_capacity(panels.len() * order * 3 / 2);
        for (p, &(a, b)) in panels.iter().enumerate() {
            let mid = Float::with_val(bits, 0.5 * (a + b));
            let half = Float::with_val(bits, 0.5 * (b - a));
            for (rule, primary) in [(&full, true), (&half_rule, false)] {
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = Float::with_val(bits, x * &half) + &mid;
                    nodes.push(LineNode {
                        z: HpComplex::new(Float::with_val(bits, c), t),
                        weight: Float::with_val(bits, w * &half),
                        panel: p,
                        primary,
                    });
                }
            }
        }
        Ok(LineLayout { c: Float::with_val(bits, c), t_max, order, panels, nodes })
    }

    /// A key identifying the layout for caching node-wise values.
    pub fn key(&self) -> String {
        format!("{}|{}|{}|{:?}", self.c.to_string_radix(16, None), self.t_max, self.order, self.panels)
    }

    /// Combine node values into `(1 / 2 pi i) int f(z) dz` over the line
    /// segment and a per-panel error estimate (absolute, as `log10`).
    pub fn combine(&self, values: &[HpComplex]) -> (HpComplex, f64) {
        assert_eq!(values.len(), self.nodes.len());
        let bits = self.c.prec();
        let mut full = vec![HpComplex::zero(bits); self.panels.len()];
        let mut half = vec![HpComplex::zero(bits); self.panels.len()];
        for (node, v) in self.nodes.iter().zip(values) {
            let term = v.scale(&node.weight);
            let slot = if node.primary { &mut full[node.panel] } else { &mut half[node.panel] };
            *slot = &*slot + &term;
        }
        let mut total = HpComplex::zero(bits);
        let mut err = f64::NEG_INFINITY;
        for (f, h) in full.iter().zip(&half) {
            total = &total + f;
            // Spectral convergence: the order-n error is about the square of the
            // relative order-n/2 error, floored at the working precision.
            let d = (f - h).log10_abs();
            let s = f.log10_abs();
            let rel_half = if d.is_finite() && s.is_finite() { (d - s).min(0.0) } else { f64::NEG_INFINITY };
            let floor = s - bits as f64 * std::f64::consts::LOG10_2 + 1.0;
            let est = if s.is_finite() { (2.0 * rel_half + s).max(floor) } else { f64::NEG_INFINITY };
            err = log10_add(err, est);
        }
        // dt -> dz / i and the 1/(2 pi i) prefactor give 1/(2 pi).
        let c = constants(bits);
        let value = total.scale(&(Float::with_val(bits, 1) / &c.two_pi));
        (value, err - std::f64::consts::TAU.log10())
    }
}

/// `log10(10^a + 10^b)`; `-inf` is the empty sum.
pub(crate) fn log10_add(a: f64, b: f64) -> f64 {
    if !b.is_finite() {
        return a;
    }
    if !a.is_finite() {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + 10f64.powf(lo - hi)).log10()
}

/// `(1 / 2 pi i) int_{(c)} f(z) dz` truncated to `|Im z| <= t_max`.
///
/// The panel cap is halved until the error estimate reaches the working
/// precision less ten guard digits, so integrands varying on scales much
/// shorter than [`MAX_PANEL`] are resolved too. The best attempt is returned
/// with its estimate if the target is never met.
pub fn integrate_line<F>(c: &HpReal, t_max: f64, sings: &[Complex64], order: usize, mut f: F) -> Result<(HpComplex, f64)>
where
    F: FnMut(&HpComplex) -> Result<HpComplex>,
{
    let bits = c.prec();
    let digits = bits as f64 * std::f64::consts::LOG10_2 - 10.0;
    let mut cap = MAX_PANEL;
    let mut best: Option<(HpComplex, f64)> = None;
    for _ in 0..=MAX_REFINEMENTS {
        let layout = LineLayout::with_max_panel(c, t_max, sings, order, bits, cap)?;
        let values = layout.nodes.iter().map(|n| f(&n.z)).collect::<Result<Vec<_>>>()?;
        let (v, err) = layout.combine(&values);
        let scale = v.log10_abs().max(0.0);
        let done = err <= scale - digits;
        if best.as_ref().map_or(true, |(_, e)| err < *e) {
            best = Some((v, err));
        }
        if done {
            break;
        }
        cap *= 0.5;
    }
    Ok(best.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::PrecisionContext;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let bits = 300;
        let r = gauss_legendre(16, bits);
        let mut s = Float::new(bits);
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            let x2 = Float::with_val(bits, x * x);
            s += Float::with_val(bits, x2.clone() * &x2 * &x2) * w;
        }
        // int_{-1}^{1} x^6 = 2/7
        let e = Float::with_val(bits, 2) / 7u32;
        let d = Float::with_val(bits, &s - &e);
        assert!(crate::hp::log10_abs(&d) < -85.0);
        let wsum: Float = r.weights.iter().fold(Float::new(bits), |acc, w| acc + w);
        assert!(crate::hp::log10_abs(&Float::with_val(bits, wsum - 2u32)) < -85.0);
    }

    #[test]
    fn gaussian_line_integral() {
        // (1/2 pi i) int_{(0)} e^{z^2} dz = (1/2 pi) int e^{-t^2} dt = 1/(2 sqrt(pi))
        let ctx = PrecisionContext::new(60);
        let c = ctx.zero();
        let (v, err) = integrate_line(&c, 20.0, &[], 64, |z| Ok(z.square().exp())).unwrap();
        let expect = Float::with_val(ctx.bits, 1) / (ctx.pi().sqrt() * 2u32);
        let d = (&v - &HpComplex::from_real(expect)).log10_abs();
        assert!(d < -60.0, "{d} {err}");
        assert!(err < -50.0);
    }

    #[test]
    fn panels_shrink_near_singularity() {
        let ctx = PrecisionContext::new(40);
        let sing = [Complex64::new(0.0, 0.05)];
        let l = LineLayout::new(&ctx.zero(), 10.0, &sing, 32, ctx.bits).unwrap();
        let near = l.panels.iter().find(|(a, b)| *a <= 0.0 && *b >= 0.0).unwrap();
        let far = l.panels.first().unwrap();
        assert!(near.1 - near.0 < far.1 - far.0);
        assert!(LineLayout::new(&ctx.zero(), 10.0, &[Complex64::new(1.0, 0.0)], 32, ctx.bits).is_err());
    }
}
