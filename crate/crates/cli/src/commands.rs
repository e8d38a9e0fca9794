//! The subcommands. Each returns an [`Outcome`] (output plus exit code) or a
//! [`Failure`] carrying the library error and optional structured detail.

use std::path::PathBuf;

use ddzeta::arith::direct_phi2;
use ddzeta::continuation::{classify_singularity, display_digits, eval_phi2};
use ddzeta::exact::{rational_string, reciprocity_check, residue_r, saalschutz_check};
use ddzeta::hp::fmt_real;
use ddzeta::limits::{fit_singular_expansion, geometric_ladder, residue_closed_mu};
use ddzeta::zeros::{load_zeros, validate_zeros};
use ddzeta::{Error, HpComplex, PrecisionContext, SeriesSpec};
use rug::Rational;
use serde_json::json;

use crate::config::RunConfig;
use crate::report::{to_json, Case, Output};

pub const MAX_SUITE: u32 = 100;

pub struct Outcome {
    pub output: Output,
    pub code: u8,
}

impl Outcome {
    fn ok(output: Output) -> Self {
        Outcome { output, code: 0 }
    }
}

pub struct Failure {
    pub error: Error,
    pub detail: Option<serde_json::Value>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, detail: None }
    }
}

type CmdResult = Result<Outcome, Failure>;

fn pre(msg: impl Into<String>) -> Failure {
    Error::Precondition(msg.into()).into()
}

/// `"RE"` or `"RE,IM"`, parsed as decimals at working precision.
pub fn parse_complex(s: &str, ctx: &PrecisionContext) -> Result<HpComplex, Error> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Error::Precondition(format!("malformed complex literal {s:?}: expected \"RE\" or \"RE,IM\""));
    if parts.is_empty() || parts.len() > 2 || parts.iter().any(|p| p.trim().is_empty()) {
        return Err(bad());
    }
    let re = ctx.parse(parts[0]).map_err(|_| bad())?;
    let im = match parts.get(1) {
        Some(p) => ctx.parse(p).map_err(|_| bad())?,
        None => ctx.zero(),
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(HpComplex::new(re, im))
}

pub fn parse_series(s: &str) -> Result<SeriesSpec, Error> {
    match s.trim().to_ascii_lowercase().as_str() {
        "lambda" => Ok(SeriesSpec::Lambda),
        "mu" => Ok(SeriesSpec::Mu),
        other => Err(Error::Precondition(format!("unknown series {other:?} (expected lambda or mu)"))),
    }
}

fn complex_text(z: &HpComplex, digits: u32) -> String {
    if z.im.is_zero() {
        fmt_real(&z.re, digits)
    } else if z.im.is_sign_negative() {
        format!("{} - {} i", fmt_real(&z.re, digits), fmt_real(&z.im.clone().abs(), digits))
    } else {
        format!("{} + {} i", fmt_real(&z.re, digits), fmt_real(&z.im, digits))
    }
}

fn complex_csv(z: &HpComplex, digits: u32) -> String {
    format!("{};{}", fmt_real(&z.re, digits), fmt_real(&z.im, digits))
}

// ---------------------------------------------------------------------------

pub fn residue(cfg: &RunConfig, m: i64, n: i64, series: &str) -> CmdResult {
    let series = parse_series(series)?;
    if m < 0 || n < 0 {
        return Err(pre(format!("m and n must be non-negative, got m = {m}, n = {n}")));
    }
    if (m + n) % 2 == 0 {
        return Err(Error::Parity(format!("m + n must be odd, got m = {m}, n = {n}")).into());
    }
    let value = match series {
        SeriesSpec::Lambda => rational_string(&residue_r(m, n)?),
        _ => {
            let ctx = cfg.context();
            let v = residue_closed_mu(m as u32, n as u32, &ctx)?;
            fmt_real(&v.re, cfg.precision)
        }
    };
    let inputs = format!("m={m};n={n};series={}", series.name());
    Ok(Outcome::ok(Output {
        json: json!({ "series": series.name(), "m": m, "n": n, "residue": value }),
        rows: vec![Case::new("residue", inputs, "", value.clone(), true)],
        text: value,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Saalschuetz identity for 0 <= p, q <= M.
    Saalschutz,
    /// Residue reciprocity for 1 <= m, n <= M, m + n odd.
    Reciprocity,
    /// R(-1, 0) = 1/2 and R(-1, -2N) = 0 for 1 <= N <= M.
    Thm41,
    /// R(-2N, -1) = -1/((2N+1)(2N+2)) for 1 <= N <= M.
    Cor44,
    /// R(0, -n) = -1/2 for odd n = 2N - 1, 1 <= N <= M.
    Prop45,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Saalschutz => "saalschutz",
            Suite::Reciprocity => "reciprocity",
            Suite::Thm41 => "thm41",
            Suite::Cor44 => "cor44",
            Suite::Prop45 => "prop45",
            Suite::All => "all",
        }
    }
}

fn residue_case(id: &str, m: i64, n: i64, expected: Rational) -> Result<Case, Error> {
    let actual = residue_r(m, n)?;
    Ok(Case::new(id, format!("m={m};n={n}"), rational_string(&expected), rational_string(&actual), actual == expected))
}

fn suite_cases(suite: Suite, max: u32) -> Result<Vec<Case>, Error> {
    let mut out = Vec::new();
    if max == 0 {
        return Ok(out);
    }
    let big = max as i64;
    match suite {
        Suite::Saalschutz => {
            for p in 0..=max {
                for q in 0..=max {
                    let (a, b, rhs) = saalschutz_check(p, q);
                    let lhs = Rational::from(&a + &b);
                    out.push(Case::new("saalschutz", format!("p={p};q={q}"), rational_string(&rhs), rational_string(&lhs), lhs == rhs));
                }
            }
        }
        Suite::Reciprocity => {
            for m in 1..=big {
                for n in 1..=big {
                    if (m + n) % 2 == 0 {
                        continue;
                    }
                    let (lhs, rhs, diff) = reciprocity_check(m, n)?;
                    out.push(Case::new("reciprocity", format!("m={m};n={n}"), rational_string(&rhs), rational_string(&lhs), diff == 0));
                }
            }
        }
        Suite::Thm41 => {
            out.push(residue_case("thm41", 1, 0, Rational::from((1, 2)))?);
            for k in 1..=big {
                out.push(residue_case("thm41", 1, 2 * k, Rational::new())?);
            }
        }
        Suite::Cor44 => {
            for k in 1..=big {
                out.push(residue_case("cor44", 2 * k, 1, Rational::from((-1, (2 * k + 1) * (2 * k + 2))))?);
            }
        }
        Suite::Prop45 => {
            for k in 1..=big {
                out.push(residue_case("prop45", 0, 2 * k - 1, Rational::from((-1, 2)))?);
            }
        }
        Suite::All => {
            for s in [Suite::Saalschutz, Suite::Reciprocity, Suite::Thm41, Suite::Cor44, Suite::Prop45] {
                out.extend(suite_cases(s, max)?);
            }
        }
    }
    Ok(out)
}

pub fn verify(suite: Suite, max: u32) -> CmdResult {
    if max > MAX_SUITE {
        return Err(pre(format!("--max must be <= {MAX_SUITE}, got {max}")));
    }
    let cases = suite_cases(suite, max)?;
    let failures = cases.iter().filter(|c| c.status != "ok").count();
    let first = cases.iter().find(|c| c.status != "ok");
    let mut text = format!("suite {} (max {max}): {} cases, {failures} failures", suite.name(), cases.len());
    if let Some(c) = first {
        text.push_str(&format!("\nfirst counterexample: {} {}: expected {}, got {}", c.case_id, c.inputs, c.expected, c.actual));
    }
    let json = json!({
        "suite": suite.name(),
        "max": max,
        "cases": cases.len(),
        "failures": failures,
        "passed": failures == 0,
        "first_counterexample": first.map(to_json),
    });
    Ok(Outcome { code: if failures == 0 { 0 } else { 1 }, output: Output { json, rows: cases, text } })
}

pub fn eval(cfg: &RunConfig, s1: &str, s2: &str, series: &str) -> CmdResult {
    let series = parse_series(series)?;
    let ctx = cfg.context();
    let a = parse_complex(s1, &ctx)?;
    let b = parse_complex(s2, &ctx)?;
    let p = cfg.eval_params()?;
    let r = match eval_phi2(&a, &b, &series, &p) {
        Ok(r) => r,
        Err(error @ Error::Singular(_)) => {
            let tol = ctx.ten_pow_neg(ctx.target_decimal as i32 + 5);
            let hits = classify_singularity(&a, &b, &series, &tol, &p.zeros);
            return Err(Failure { error, detail: Some(json!({ "series": series.name(), "s1": to_json(&a), "s2": to_json(&b), "matched_sets": to_json(&hits) })) });
        }
        Err(e) => return Err(e.into()),
    };
    let d = display_digits(&r);
    let inputs = format!("s1={s1};s2={s2};series={}", series.name());
    let mut rows = vec![Case::new("value", inputs.clone(), "", complex_csv(&r.value, d), true)];
    let mut text = format!(
        "{}(s1 = {s1}, s2 = {s2}) = {}\nerror estimate: {}\n",
        series.name(),
        complex_text(&r.value, d),
        fmt_real(&r.error_estimate, 6)
    );
    for t in &r.terms {
        rows.push(Case::new(t.label, inputs.clone(), "", complex_csv(&t.value, d), true));
        text.push_str(&format!("  {:<17} {}\n", t.label, complex_text(&t.value, d)));
    }
    for w in &r.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    Ok(Outcome::ok(Output { json: to_json(&r), rows, text }))
}

pub fn oracle(cfg: &RunConfig, s1: &str, s2: &str, series: &str, cutoff: usize) -> CmdResult {
    let series = parse_series(series)?;
    let ctx = cfg.context();
    let a = parse_complex(s1, &ctx)?;
    let b = parse_complex(s2, &ctx)?;
    let (v, tail) = direct_phi2(&a, &b, &series, cutoff)?;
    let inputs = format!("s1={s1};s2={s2};series={};cutoff={cutoff}", series.name());
    // The partial sum is accumulated in double precision.
    let digits = 17;
    Ok(Outcome::ok(Output {
        json: json!({
            "series": series.name(),
            "s1": to_json(&a),
            "s2": to_json(&b),
            "cutoff": cutoff,
            "partial_sum": { "re": fmt_real(&v.re, digits), "im": fmt_real(&v.im, digits) },
            "tail_bound": to_json(&tail),
        }),
        rows: vec![Case::new("oracle", inputs, "", complex_csv(&v, digits), true)],
        text: format!(
            "direct sum over m1 + m2 <= {cutoff}: {}\ntail estimate: {} ({})",
            complex_text(&v, digits),
            fmt_real(&tail.value, 6),
            if tail.is_rigorous { "rigorous" } else { "heuristic" }
        ),
    }))
}

pub fn fit(cfg: &RunConfig, m: i64, n: u32, series: &str, ladder_start: &str, ladder_len: usize) -> CmdResult {
    let series = parse_series(series)?;
    let p = cfg.eval_params()?;
    let start = p.ctx.parse(ladder_start)?;
    let ladder = geometric_ladder(&start, ladder_len);
    let f = fit_singular_expansion(m, n, &series, &ladder, &p)?;
    let d = 20;
    let inputs = format!("m={m};n={n};series={}", series.name());
    let mut text = format!(
        "{}(-m, -n + e) at m = {m}, n = {n} ~ c2/e^2 + c1/e + c0\n  c2 = {}\n  c1 = {}\n  c0 = {}\n  fit residual {} (N = {})\n",
        series.name(),
        complex_text(&f.c2, d),
        complex_text(&f.c1, d),
        complex_text(&f.c0, d),
        fmt_real(&f.fit_residual, 3),
        f.contour_n
    );
    for w in &f.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    let rows = vec![
        Case::new("c2", inputs.clone(), "", complex_csv(&f.c2, d), true),
        Case::new("c1", inputs.clone(), "", complex_csv(&f.c1, d), true),
        Case::new("c0", inputs, "", complex_csv(&f.c0, d), true),
    ];
    Ok(Outcome::ok(Output { json: to_json(&f), rows, text }))
}

pub fn zeros(cfg: &RunConfig, import: Option<PathBuf>, validate: Option<usize>) -> CmdResult {
    let ctx = cfg.context();
    match (import, validate) {
        (Some(path), None) => {
            let t = load_zeros(&path, &ctx)?;
            let first = t.gammas.first().map(|g| fmt_real(g, 30)).unwrap_or_default();
            let last = t.last_gamma().map(|g| fmt_real(g, 30)).unwrap_or_default();
            let mut text = format!("{}: {} zeros, source digits {}, first {first}, last {last}", path.display(), t.count(), t.source_digits);
            for w in &t.warnings {
                text.push_str(&format!("\nwarning: {w}"));
            }
            Ok(Outcome::ok(Output {
                json: json!({
                    "path": path.display().to_string(),
                    "count": t.count(),
                    "source_digits": t.source_digits,
                    "first": first,
                    "last": last,
                    "warnings": t.warnings,
                }),
                rows: vec![Case::new("import", path.display().to_string(), "", t.count().to_string(), true)],
                text,
            }))
        }
        (None, Some(k)) => {
            let t = cfg.zeros(&ctx)?;
            let r = validate_zeros(&t, k, &ctx)?;
            let rows = r
                .residuals_log10
                .iter()
                .enumerate()
                .map(|(i, x)| Case::new(format!("zero{}", i + 1), fmt_real(&t.gammas[i], 30), format!("<{}", r.threshold_log10), format!("{x:.1}"), *x < r.threshold_log10))
                .collect();
            let text = format!(
                "validated {} zeros: max log10 |zeta(1/2 + i gamma)| = {:.1} (threshold {})",
                r.checked, r.max_residual_log10, r.threshold_log10
            );
            Ok(Outcome::ok(Output { json: to_json(&r), rows, text }))
        }
        _ => Err(pre("zeros needs exactly one of --import PATH or --validate K")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let ctx = PrecisionContext::new(30);
        let z = parse_complex("-0.5,14.1347", &ctx).unwrap();
        assert_eq!(z.re.to_f64(), -0.5);
        assert!((z.im.to_f64() - 14.1347).abs() < 1e-12);
        assert!(parse_complex("3", &ctx).unwrap().im.is_zero());
        for bad in ["", "1,", ",1", "1,2,3", "abc", "1,x", "inf"] {
            assert!(parse_complex(bad, &ctx).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn verify_suites_pass_and_count() {
        assert_eq!(suite_cases(Suite::Reciprocity, 3).unwrap().len(), 4);
        assert!(suite_cases(Suite::All, 0).unwrap().is_empty());
        let all = suite_cases(Suite::All, 10).unwrap();
        assert!(all.iter().all(|c| c.status == "ok"));
    }
}
