//! Complex log-Gamma, digamma and trigamma by upward recurrence into the
//! Stirling region followed by the asymptotic series.

use num_complex::Complex64;
use rug::Float;

use super::bernoulli_even;
use crate::error::{Error, Result};
use crate::hp::HpComplex;

/// `ln Gamma(z)` and optionally `psi(z)`, `psi'(z)` from one recurrence pass.
#[derive(Clone, Debug)]
pub struct GammaParts {
    pub ln_gamma: HpComplex,
    pub digamma: Option<HpComplex>,
    pub trigamma: Option<HpComplex>,
}

fn check_pole(z: &HpComplex, function: &'static str) -> Result<()> {
    if z.im.is_zero() && z.re <= 0 && z.re.is_integer() {
        return Err(Error::Pole { function, at: z.re.to_string_radix(10, Some(12)) });
    }
    Ok(())
}

/// Radius beyond which the Stirling series reaches `bits` of accuracy quickly.
fn stirling_radius(bits: u32) -> f64 {
    (bits as f64 * std::f64::consts::LN_2 / std::f64::consts::PI).max(12.0)
}

fn shift_count(z: Complex64, radius: f64) -> u32 {
    if z.re >= 0.0 && z.norm() >= radius {
        return 0;
    }
    let need_re = (radius * radius - z.im * z.im).max(0.0).sqrt().max(1.0);
    (need_re - z.re).max(0.0).ceil() as u32
}

/// Evaluate `ln Gamma`, and on request `psi` / `psi'`, at `z`.
///
/// The logarithm is continuous along the recurrence, matching the principal
/// log-Gamma branch away from the negative real axis.
pub fn gamma_parts(z: &HpComplex, want_digamma: bool, want_trigamma: bool) -> Result<GammaParts> {
    check_pole(z, "gamma")?;
    let bits = z.prec();
    let radius = stirling_radius(bits);
    let zf = z.to_c64();
    let shift = shift_count(zf, radius);

    let mut prod = HpComplex::one(bits);
    let mut recip_sum = HpComplex::zero(bits);
    let mut recip_sq_sum = HpComplex::zero(bits);
    let mut arg_total = 0.0f64;
    for j in 0..shift {
        let t = z.add_i64(j as i64);
        prod = &prod * &t;
        arg_total += (zf.im).atan2(zf.re + j as f64);
        if want_digamma || want_trigamma {
            let r = t.recip();
            if want_trigamma {
                recip_sq_sum = &recip_sq_sum + &r.square();
            }
            recip_sum = &recip_sum + &r;
        }
    }
    let w = z.add_i64(shift as i64);

    let ln_w = w.ln();
    let w_inv = w.recip();
    let w_inv2 = w_inv.square();
    let consts = crate::hp::constants(bits);
    let mut tol = Float::with_val(bits, 1);
    tol >>= bits + 8;

    // Stirling: (w - 1/2) ln w - w + ln(2 pi)/2 + sum B_2k / (2k (2k-1) w^(2k-1))
    let half = Float::with_val(bits, 0.5);
    let mut lg = &(&w.add_real(&Float::with_val(bits, -&half)) * &ln_w) - &w;
    lg = lg.add_real(&Float::with_val(bits, &consts.ln_2pi * &half));

    let mut psi = if want_digamma { Some(&ln_w - &w_inv.scale(&half)) } else { None };
    let mut psi1 = if want_trigamma { Some(&w_inv + &w_inv2.scale(&half)) } else { None };

    let kmax = (2.0 * radius + 40.0) as usize;
    let bern = bernoulli_even(bits, kmax);
    let mut wpow = w_inv.clone(); // w^(1-2k), starts at k = 1
    for k in 1..kmax {
        let b = &bern[k];
        let two_k = 2 * k as i64;
        let term = wpow.scale(b).div_i64(two_k * (two_k - 1));
        let small = term_is_small(&term, &tol);
        lg = &lg + &term;
        // psi: - B_2k / (2k w^2k) ; psi': + B_2k / w^(2k+1)
        let wpow_next = &wpow * &w_inv; // w^(-2k)
        if let Some(p) = psi.as_mut() {
            *p = &*p - &wpow_next.scale(b).div_i64(two_k);
        }
        if let Some(p) = psi1.as_mut() {
            *p = &*p + &(&wpow_next * &w_inv).scale(b);
        }
        wpow = &wpow * &w_inv2;
        if small && k > 2 {
            break;
        }
    }

    if shift > 0 {
        let mut ln_prod = prod.ln();
        let principal = ln_prod.im.to_f64();
        let two_pi = std::f64::consts::TAU;
        let turns = ((arg_total - principal) / two_pi).round();
        if turns != 0.0 {
            ln_prod.im += Float::with_val(bits, &consts.two_pi * turns);
        }
        lg = &lg - &ln_prod;
        if let Some(p) = psi.as_mut() {
            *p = &*p - &recip_sum;
        }
        if let Some(p) = psi1.as_mut() {
            *p = &*p + &recip_sq_sum;
        }
    }
    Ok(GammaParts { ln_gamma: lg, digamma: psi, trigamma: psi1 })
}

fn term_is_small(term: &HpComplex, tol: &Float) -> bool {
    let a = term.re.clone().abs();
    let b = term.im.clone().abs();
    a < *tol && b < *tol
}

pub fn ln_gamma(z: &HpComplex) -> Result<HpComplex> {
    Ok(gamma_parts(z, false, false)?.ln_gamma)
}

pub fn gamma(z: &HpComplex) -> Result<HpComplex> {
    Ok(ln_gamma(z)?.exp())
}

pub fn digamma(z: &HpComplex) -> Result<HpComplex> {
    check_pole(z, "digamma")?;
    Ok(gamma_parts(z, true, false)?.digamma.expect("requested"))
}

pub fn trigamma(z: &HpComplex) -> Result<HpComplex> {
    check_pole(z, "trigamma")?;
    Ok(gamma_parts(z, false, true)?.trigamma.expect("requested"))
}

/// `Gamma(a) / Gamma(b)` through log-Gamma differences.
pub fn gamma_ratio(a: &HpComplex, b: &HpComplex) -> Result<HpComplex> {
    Ok((&ln_gamma(a)? - &ln_gamma(b)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::{log10_abs, PrecisionContext};

    fn close(a: &HpComplex, b: &HpComplex, digits: f64) -> bool {
        let d = (a - b).log10_abs();
        let s = b.log10_abs().max(0.0);
        d - s < -digits
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        let ctx = PrecisionContext::new(80);
        let g = gamma(&ctx.complex(0.5, 0.0)).unwrap();
        let sqrt_pi = HpComplex::from_real(ctx.pi().sqrt());
        assert!(close(&g, &sqrt_pi, 80.0));
    }

    #[test]
    fn gamma_integers() {
        let ctx = PrecisionContext::new(60);
        let g = gamma(&ctx.complex(11.0, 0.0)).unwrap();
        assert!(close(&g, &ctx.complex(3628800.0, 0.0), 60.0));
        let g = gamma(&ctx.complex(-2.5, 0.0)).unwrap();
        // Gamma(-5/2) = -8 sqrt(pi) / 15
        let expect = HpComplex::from_real(ctx.pi().sqrt() * -8i32 / 15u32);
        assert!(close(&g, &expect, 60.0));
    }

    #[test]
    fn digamma_one_is_minus_euler() {
        let ctx = PrecisionContext::new(80);
        let p = digamma(&ctx.complex(1.0, 0.0)).unwrap();
        let expect = HpComplex::from_real(-ctx.euler());
        assert!(close(&p, &expect, 80.0));
    }

    #[test]
    fn trigamma_one_is_zeta_two() {
        let ctx = PrecisionContext::new(60);
        let p = trigamma(&ctx.complex(1.0, 0.0)).unwrap();
        let pi = ctx.pi();
        let expect = HpComplex::from_real(Float::with_val(ctx.bits, &pi * &pi) / 6u32);
        assert!(close(&p, &expect, 60.0));
    }

    #[test]
    fn poles_rejected() {
        let ctx = PrecisionContext::new(30);
        assert!(matches!(gamma(&ctx.complex(-3.0, 0.0)), Err(Error::Pole { .. })));
        assert!(matches!(digamma(&ctx.complex(0.0, 0.0)), Err(Error::Pole { .. })));
        assert!(gamma(&ctx.complex(-3.0, 1e-30)).is_ok());
    }

    #[test]
    fn recurrence_on_grid() {
        // |Gamma(s+1) - s Gamma(s)| / |Gamma(s+1)| < 10^(2 - target) on 100 points, |s| <= 20.
        let ctx = PrecisionContext::new(50);
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let r = 20.0 * next().sqrt();
            let th = std::f64::consts::TAU * next();
            let s = ctx.complex(r * th.cos(), r * th.sin());
            let g1 = gamma(&s.add_i64(1)).unwrap();
            let g0 = gamma(&s).unwrap();
            let diff = &g1 - &(&s * &g0);
            let rel = diff.log10_abs() - g1.log10_abs();
            assert!(rel < 2.0 - 50.0, "s = {s:?}: rel err 1e{rel}");
        }
    }

    #[test]
    fn reflection_identity_complex() {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let ctx = PrecisionContext::new(60);
        let z = ctx.complex(0.3, 7.25);
        let lhs = &gamma(&z).unwrap() * &gamma(&(&HpComplex::one(ctx.bits) - &z)).unwrap();
        let pz = z.scale(&ctx.pi());
        let rhs = &HpComplex::from_real(ctx.pi()) / &pz.sin();
        assert!(close(&lhs, &rhs, 58.0));
        assert!(log10_abs(&ctx.pi()) < 1.0);
    }

    #[test]
    fn ln_gamma_branch_is_continuous() {
        let ctx = PrecisionContext::new(30);
        // Principal lnGamma(-3.5 + 1e-3 i) has imaginary part near -4 pi.
        let lg = ln_gamma(&ctx.complex(-3.5, 1e-3)).unwrap();
        let im = lg.im.to_f64();
        assert!((im + 4.0 * std::f64::consts::PI).abs() < 0.1, "{im}");
    }
}
