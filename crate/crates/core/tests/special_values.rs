//! Special-function values checked against independently computed references
//! (mpmath 1.3.0 at 60+ digits, frozen here as decimal literals) and against
//! closed forms.

use ddzeta::special::{c_kn, laurent_constants, ln_gamma, mangoldt_m, zeta, zeta_d};
use ddzeta::{HpComplex, PrecisionContext};
use rug::Float;

fn lit(ctx: &PrecisionContext, re: &str, im: &str) -> HpComplex {
    HpComplex::new(ctx.parse(re).unwrap(), ctx.parse(im).unwrap())
}

fn digits_agree(a: &HpComplex, b: &HpComplex) -> f64 {
    b.log10_abs().max(0.0) - (a - b).log10_abs()
}

#[test]
fn zeta_on_critical_line() {
    let ctx = PrecisionContext::new(60);
    let z = zeta(&ctx.complex(0.5, 14.0)).unwrap();
    let expect = lit(
        &ctx,
        "0.0222411426099935892462131992039686263867862431949236324759365",
        "-0.103258123266450057902363095552573834507549030464100714717429",
    );
    assert!(digits_agree(&z, &expect) > 58.0);
}

#[test]
fn zeta_second_derivative_at_minus_two() {
    let ctx = PrecisionContext::new(60);
    let z = zeta_d(&ctx.complex(-2.0, 0.0), 2).unwrap();
    let expect = lit(&ctx, "-0.0657635161874251955899482662091909096890945831630381209229745", "0");
    assert!(digits_agree(&z, &expect) > 58.0);
}

#[test]
fn zeta_prime_at_minus_one() {
    let ctx = PrecisionContext::new(60);
    let z = zeta_d(&ctx.complex(-1.0, 0.0), 1).unwrap();
    let expect = lit(&ctx, "-0.165421143700450929213919660242780642764036380335201783666522", "0");
    assert!(digits_agree(&z, &expect) > 58.0);
}

#[test]
fn mangoldt_m_left_half_plane() {
    let ctx = PrecisionContext::new(60);
    let m = mangoldt_m(&ctx.complex(-1.0, 0.0)).unwrap();
    let expect = lit(&ctx, "-1.98505372440541115056703592291336771316843656402242140399827", "0");
    assert!(digits_agree(&m, &expect) > 58.0);
    let m = mangoldt_m(&ctx.complex(-3.5, 2.0)).unwrap();
    let expect = lit(
        &ctx,
        "-0.343001072759935202082619011640581839767263110913383633666443",
        "1.07232198941735943588180917456704661204607629564262185781189",
    );
    assert!(digits_agree(&m, &expect) > 58.0);
}

#[test]
fn ln_gamma_principal_branch() {
    let ctx = PrecisionContext::new(60);
    let lg = ln_gamma(&lit(&ctx, "-3.5", "0.001")).unwrap();
    let expect = lit(
        &ctx,
        "-1.3090114954245749320839694318730848691669971349854016975965",
        "-12.564981743422553954914730453144607733529116876120877636254",
    );
    assert!(digits_agree(&lg, &expect) > 58.0);
}

#[test]
fn ckn_two_four_closed_form() {
    // Gamma'(-2+e)/Gamma(-4+e) = -12/e + 25 - 12 gamma + O(e)
    let ctx = PrecisionContext::new(80);
    let c = c_kn(2, 4, &ctx).unwrap();
    let expect = Float::with_val(ctx.bits, 25) - ctx.euler() * 12u32;
    let diff = Float::with_val(ctx.bits, &c.value - &expect);
    assert!(ddzeta::hp::log10_abs(&diff) < -60.0);
    assert!(c.agreement_digits >= 30.0);
}

#[test]
fn laurent_table_d_two() {
    let ctx = PrecisionContext::new(80);
    let lc = laurent_constants(&ctx, 4, &[4]).unwrap();
    let z3 = zeta(&ctx.complex(3.0, 0.0)).unwrap().re;
    let pi = ctx.pi();
    let expect = -(Float::with_val(ctx.bits, &pi * &pi) * 4u32) / z3;
    let diff = Float::with_val(ctx.bits, &lc.d[&2] - &expect);
    assert!(ddzeta::hp::log10_abs(&diff) < -75.0);
    assert!(lc.ckn.contains_key(&(2, 4)) && lc.ckn.contains_key(&(4, 4)));
}
