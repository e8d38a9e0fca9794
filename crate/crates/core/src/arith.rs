//! Sieved von Mangoldt and Moebius functions, Dirichlet convolution with the
//! Moebius function, and the brute-force double-sum oracle for `Phi_2`.

use std::num::NonZeroU32;
use std::ops::{AddAssign, SubAssign};

use num_complex::Complex64;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hp::{HpComplex, HpReal, NeumaierSum};
use crate::series::SeriesSpec;

/// Largest sieve built unless the caller raises the cap (about 5 bytes per entry).
pub const DEFAULT_SIEVE_CAP: usize = 50_000_000;

/// `Lambda(n)`, stored symbolically: `Some(p)` when `n` is a power of the prime `p`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LambdaValue {
    pub prime: Option<NonZeroU32>,
}

impl LambdaValue {
    pub fn is_prime_power(&self) -> bool {
        self.prime.is_some()
    }

    /// `log p` at `bits` of precision, or zero.
    pub fn eval(&self, bits: u32) -> HpReal {
        match self.prime {
            Some(p) => Float::with_val(bits, p.get()).ln(),
            None => Float::new(bits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.prime.map_or(0.0, |p| (p.get() as f64).ln())
    }
}

#[derive(Clone, Debug)]
pub struct SieveTable {
    pub limit: usize,
    /// Index `n` for `0 <= n <= limit`; entry 0 is unused.
    pub lambda_values: Vec<LambdaValue>,
    pub moebius_values: Vec<i8>,
}

impl SieveTable {
    pub fn lambda(&self, n: usize) -> LambdaValue {
        self.lambda_values[n]
    }

    pub fn moebius(&self, n: usize) -> i8 {
        self.moebius_values[n]
    }
}

/// Linear sieve for `Lambda` and `mu` on `1..=limit`.
pub fn build_sieve(limit: usize) -> Result<SieveTable> {
    build_sieve_with_cap(limit, DEFAULT_SIEVE_CAP)
}

pub fn build_sieve_with_cap(limit: usize, cap: usize) -> Result<SieveTable> {
    if limit < 2 {
        return Err(Error::pre(format!("sieve limit must be >= 2, got {limit}")));
    }
    if limit > cap {
        return Err(Error::ResourceLimit(format!("sieve limit {limit} exceeds the configured cap {cap}")));
    }
    let mut lambda_values = vec![LambdaValue::default(); limit + 1];
    let mut moebius_values = vec![0i8; limit + 1];
    // Smallest prime factor of n, and n with all copies of it removed.
    let mut spf = vec![0u32; limit + 1];
    let mut rest = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::new();
    moebius_values[1] = 1;
    for n in 2..=limit {
        if spf[n] == 0 {
            spf[n] = n as u32;
            rest[n] = 1;
            primes.push(n as u32);
            moebius_values[n] = -1;
        }
        let p = spf[n] as usize;
        if rest[n] == 1 {
            lambda_values[n] = LambdaValue { prime: NonZeroU32::new(p as u32) };
        }
        for &q in &primes {
            let q = q as usize;
            if q > p || n * q > limit {
                break;
            }
            let m = n * q;
            spf[m] = q as u32;
            if q == p {
                rest[m] = rest[n];
                moebius_values[m] = 0;
            } else {
                rest[m] = n as u32;
                moebius_values[m] = -moebius_values[n];
            }
        }
    }
    Ok(SieveTable { limit, lambda_values, moebius_values })
}

fn moebius_upto(n: usize) -> Vec<i8> {
    if n < 2 {
        return vec![0, 1][..=n.min(1)].to_vec();
    }
    build_sieve_with_cap(n, usize::MAX).expect("limit >= 2").moebius_values
}

/// `alpha~(n) = sum_{d | n} alpha(n/d) mu(d)`; `alpha[i]` holds `alpha(i + 1)`.
pub fn convolve_inverse<T>(alpha: &[T]) -> Vec<T>
where
    T: Clone + Default + AddAssign + SubAssign,
{
    let n = alpha.len();
    let mu = moebius_upto(n);
    let mut out = vec![T::default(); n];
    for d in 1..=n {
        match mu[d] {
            0 => {}
            sign => {
                let mut k = 1;
                while d * k <= n {
                    if sign > 0 {
                        out[d * k - 1] += alpha[k - 1].clone();
                    } else {
                        out[d * k - 1] -= alpha[k - 1].clone();
                    }
                    k += 1;
                }
            }
        }
    }
    out
}

/// `beta(n) = sum_{d | n} alpha~(d)`, the inverse of [`convolve_inverse`].
pub fn convolve_ones<T>(alpha_tilde: &[T]) -> Vec<T>
where
    T: Clone + Default + AddAssign,
{
    let n = alpha_tilde.len();
    let mut out = vec![T::default(); n];
    for d in 1..=n {
        let mut k = d;
        while k <= n {
            out[k - 1] += alpha_tilde[d - 1].clone();
            k += d;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct TailBound {
    #[serde(serialize_with = "crate::hp::serialize_real")]
    pub value: HpReal,
    pub is_rigorous: bool,
}

/// Safety factor applied to the integral-comparison tail estimate.
const TAIL_SAFETY: f64 = 2.0;

/// Estimate of the omitted part `m1 + m2 > x` for real parts `(sigma1, sigma2)`:
/// `int_x^inf u^-sigma2 S(u) du` with `S(u) = sum_{m1 < u} m1^-sigma1`.
fn tail_estimate(sigma1: f64, sigma2: f64, x: f64) -> f64 {
    let lx = x.ln();
    let est = if (sigma1 - 1.0).abs() < 1e-9 {
        // S(u) <= 1 + ln u
        x.powf(1.0 - sigma2) * ((1.0 + lx) / (sigma2 - 1.0) + 1.0 / (sigma2 - 1.0).powi(2))
    } else if sigma1 > 1.0 {
        // S(u) <= 1 + 1/(sigma1 - 1); with u^(1 - sigma1) correction ignored.
        let s = 1.0 + 1.0 / (sigma1 - 1.0);
        s * x.powf(1.0 - sigma2) / (sigma2 - 1.0)
    } else {
        // S(u) <= u^(1 - sigma1) / (1 - sigma1) + 1
        let a = x.powf(2.0 - sigma1 - sigma2) / ((1.0 - sigma1) * (sigma1 + sigma2 - 2.0));
        a + x.powf(1.0 - sigma2) / (sigma2 - 1.0)
    };
    TAIL_SAFETY * est
}

fn alpha_values(series: &SeriesSpec, cutoff: usize) -> Result<Vec<f64>> {
    match series {
        SeriesSpec::Lambda => {
            let sieve = build_sieve(cutoff)?;
            Ok(sieve.lambda_values.iter().map(|v| v.to_f64()).collect())
        }
        SeriesSpec::Mu => {
            let sieve = build_sieve(cutoff)?;
            Ok(sieve.moebius_values.iter().map(|&m| m as f64).collect())
        }
        SeriesSpec::Plugin(p) => match &p.alpha_tilde {
            Some(f) => Ok(std::iter::once(0.0).chain((1..=cutoff as u64).map(|n| f(n))).collect()),
            None => Err(Error::pre(format!("series {} provides no coefficients for the direct sum", p.name))),
        },
    }
}

/// Truncated double sum over `m1 + m2 <= cutoff`, accumulated in blocks of
/// constant `m1 + m2`, plus a non-rigorous integral-comparison tail estimate.
pub fn direct_phi2(s1: &HpComplex, s2: &HpComplex, series: &SeriesSpec, cutoff: usize) -> Result<(HpComplex, TailBound)> {
    if cutoff < 1000 {
        return Err(Error::pre(format!("cutoff must be >= 1000, got {cutoff}")));
    }
    let a = s1.to_c64();
    let b = s2.to_c64();
    let (re2, re12) = series.convergence_bounds();
    if !(b.re > re2 && a.re + b.re > re12) {
        return Err(Error::Region { s1: format!("{a}"), s2: format!("{b}") });
    }
    let alpha = alpha_values(series, cutoff)?;
    let support: Vec<(usize, f64)> = (1..cutoff).filter(|&m| alpha[m] != 0.0).map(|m| (m, alpha[m])).collect();

    let pow_table = |s: Complex64| -> Vec<Complex64> {
        let mut t = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        for (n, v) in t.iter_mut().enumerate().skip(1) {
            *v = (-s * (n as f64).ln()).exp();
        }
        t
    };
    let pa = pow_table(a);
    let pb = pow_table(b);

    let mut total = NeumaierSum::default();
    for u in 2..=cutoff {
        let mut inner = NeumaierSum::default();
        for &(m2, w) in &support {
            if m2 >= u {
                break;
            }
            inner.add(pa[u - m2] * w);
        }
        total.add(inner.value() * pb[u]);
    }
    let value = total.value();
    let tail = tail_estimate(a.re, b.re, cutoff as f64);
    let bits = s1.prec();
    let out = HpComplex::from_f64(bits, value.re, value.im);
    // f64 accumulation contributes a small relative error as well.
    let rounding = value.norm() * 1e-13;
    Ok((out, TailBound { value: Float::with_val(bits, tail + rounding), is_rigorous: false }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::PrecisionContext;

    fn trial_lambda(n: usize) -> Option<u32> {
        if n < 2 {
            return None;
        }
        let mut p = 2;
        while p * p <= n && n % p != 0 {
            p += 1;
        }
        let p = if n % p == 0 { p } else { n };
        let mut r = n;
        while r % p == 0 {
            r /= p;
        }
        (r == 1).then_some(p as u32)
    }

    fn trial_moebius(n: usize) -> i8 {
        let mut r = n;
        let mut k = 0;
        let mut p = 2;
        while p * p <= r {
            if r % p == 0 {
                r /= p;
                if r % p == 0 {
                    return 0;
                }
                k += 1;
            }
            p += 1;
        }
        if r > 1 {
            k += 1;
        }
        if k % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn sieve_examples() {
        let s = build_sieve(100).unwrap();
        assert_eq!(s.lambda(8).prime.map(|p| p.get()), Some(2));
        assert!(!s.lambda(6).is_prime_power());
        assert_eq!((s.moebius(6), s.moebius(12), s.moebius(30)), (1, 0, -1));
        assert_eq!(s.moebius(1), 1);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let s = build_sieve(10_000).unwrap();
        for n in 1..=10_000 {
            assert_eq!(s.lambda(n).prime.map(|p| p.get()), trial_lambda(n), "Lambda({n})");
            assert_eq!(s.moebius(n), trial_moebius(n), "mu({n})");
        }
    }

    #[test]
    fn moebius_summatory() {
        let s = build_sieve(10_000).unwrap();
        let total: i64 = (1..=10_000).map(|n| s.moebius(n) as i64 * (10_000 / n) as i64).sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn sieve_limits() {
        assert!(matches!(build_sieve(1), Err(Error::Precondition(_))));
        assert!(matches!(build_sieve_with_cap(1000, 999), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn convolution_identities() {
        let ones = vec![1i64; 30];
        let t = convolve_inverse(&ones);
        assert_eq!(t[0], 1);
        assert!(t[1..].iter().all(|&v| v == 0));

        let ident: Vec<i64> = (1..=30).collect();
        let phi = convolve_inverse(&ident);
        for n in 1..=30i64 {
            let brute = (1..=n).filter(|&k| num_gcd(k, n) == 1).count() as i64;
            assert_eq!(phi[n as usize - 1], brute, "phi({n})");
        }
    }

    fn num_gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }

    #[test]
    fn convolution_of_lambda_at_twelve() {
        let s = build_sieve(12).unwrap();
        let lam: Vec<f64> = (1..=12).map(|n| s.lambda(n).to_f64()).collect();
        let t = convolve_inverse(&lam);
        let mut direct = 0.0;
        for d in 1..=12usize {
            if 12 % d == 0 {
                direct += s.lambda(12 / d).to_f64() * s.moebius(d) as f64;
            }
        }
        assert!((t[11] - direct).abs() < 1e-15);
    }

    #[test]
    fn convolution_round_trip() {
        let vals: Vec<i64> = (1..=1000).map(|n: i64| (n * n * 7 + 3) % 101 - 50).collect();
        assert_eq!(convolve_ones(&convolve_inverse(&vals)), vals);
    }

    #[test]
    fn direct_region_and_cutoff_checks() {
        let ctx = PrecisionContext::new(30);
        let r = direct_phi2(&ctx.complex(0.5, 0.0), &ctx.complex(1.2, 0.0), &SeriesSpec::Lambda, 2000);
        assert!(matches!(r, Err(Error::Region { .. })));
        let r = direct_phi2(&ctx.complex(3.0, 0.0), &ctx.complex(3.0, 0.0), &SeriesSpec::Lambda, 10);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn direct_lambda_partial_sums_increase() {
        let ctx = PrecisionContext::new(30);
        let s = ctx.complex(3.0, 0.0);
        let (a, _) = direct_phi2(&s, &s, &SeriesSpec::Lambda, 1000).unwrap();
        let (b, _) = direct_phi2(&s, &s, &SeriesSpec::Lambda, 4000).unwrap();
        assert!(b.re >= a.re);
    }

    #[test]
    fn tail_shrinks_with_cutoff() {
        assert!(tail_estimate(3.0, 3.0, 1e5) < tail_estimate(3.0, 3.0, 1e4));
        assert!(tail_estimate(0.5, 2.5, 1e5) < tail_estimate(0.5, 2.5, 1e4));
    }
}
