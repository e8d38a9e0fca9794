//! Arbitrary-precision special functions: complex Gamma and its logarithmic
//! derivatives, zeta with its first two derivatives, `M(s) = -zeta'(s)/zeta(s)`,
//! and the Laurent constants of the continuation formulas.

mod gamma;
pub(crate) mod laurent;
mod zeta;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rug::Float;

use crate::exact::bernoulli_table;
use crate::hp::HpComplex;

pub use gamma::{digamma, gamma, gamma_parts, gamma_ratio, ln_gamma, trigamma, GammaParts};
pub use laurent::{a_k, b_l, c_kn, d_k_closed, laurent_constants, CknEstimate, LaurentConstants};
pub use zeta::{mangoldt_m, mangoldt_m_direct, zeta, zeta_d, zeta_jet, zeta_jet_direct, zeta_jet_reflected, EmPolicy};

/// Truncated Taylor expansion `c0 + c1 (s - s0) + c2 (s - s0)^2 + ...`.
#[derive(Clone, Debug)]
pub struct Jet {
    pub c: Vec<HpComplex>,
}

impl Jet {
    pub fn constant(v: HpComplex, order: usize) -> Self {
        let bits = v.prec();
        let mut c = vec![v];
        c.resize(order + 1, HpComplex::zero(bits));
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// `d`-th derivative at the expansion point.
    pub fn derivative(&self, d: usize) -> HpComplex {
        let f: i64 = (1..=d as i64).product();
        self.c[d].scale_i64(f)
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len().min(o.c.len());
        let bits = self.c[0].prec();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = HpComplex::zero(bits);
            for i in 0..=k {
                acc = &acc + &(&self.c[i] * &o.c[k - i]);
            }
            out.push(acc);
        }
        Jet { c: out }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, k: &HpComplex) -> Jet {
        Jet { c: self.c.iter().map(|a| a * k).collect() }
    }

    pub fn scale_real(&self, k: &Float) -> Jet {
        Jet { c: self.c.iter().map(|a| a.scale(k)).collect() }
    }

    /// Re-expand `f(w)` known around `w0 = 1 - s0` as a function of `s`.
    pub fn reflect(&self) -> Jet {
        Jet {
            c: self.c.iter().enumerate().map(|(j, a)| if j % 2 == 1 { -a } else { a.clone() }).collect(),
        }
    }
}

// B_{2k} as floats, index k, per precision.
static BERNOULLI_EVEN: Lazy<Mutex<HashMap<u32, Arc<Vec<Float>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `B_0, B_2, ..., B_{2 kmax}` rounded to `bits`.
pub(crate) fn bernoulli_even(bits: u32, kmax: usize) -> Arc<Vec<Float>> {
    let mut map = BERNOULLI_EVEN.lock().expect("bernoulli float cache poisoned");
    if let Some(t) = map.get(&bits) {
        if t.len() > kmax {
            return t.clone();
        }
    }
    let k_new = (kmax + 1).next_power_of_two().max(64);
    let exact = bernoulli_table(2 * k_new);
    let t: Vec<Float> = (0..=k_new).map(|k| Float::with_val(bits, &exact[2 * k])).collect();
    let t = Arc::new(t);
    map.insert(bits, t.clone());
    t
}
