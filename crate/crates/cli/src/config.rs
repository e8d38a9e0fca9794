//! Run configuration: defaults, an optional `key = value` file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use ddzeta::continuation::EvalParams;
use ddzeta::zeros::{bundled_zeros, load_zeros, ZeroTable};
use ddzeta::{Error, HpReal, PrecisionContext, Result};
use rug::{Float, Rational};

pub const DEFAULT_CONFIG: &str = "ddzeta.conf";
pub const ZEROS_ENV: &str = "DDZETA_ZEROS";
pub const MIN_PRECISION: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Precondition(format!("unknown output format {other:?}"))),
        }
    }
}

/// Values as given on the command line; `None` means "not given".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub zeros_file: Option<PathBuf>,
    pub n: Option<u32>,
    pub eta: Option<String>,
    pub t: Option<String>,
    pub max_zeros: Option<usize>,
    pub output: Option<OutputFormat>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub precision: u32,
    pub zeros_file: Option<PathBuf>,
    pub n: u32,
    pub eta: String,
    /// `None` selects the contour length automatically.
    pub t: Option<f64>,
    pub max_zeros: Option<usize>,
    pub output: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { precision: 80, zeros_file: None, n: 4, eta: "1/7".into(), t: None, max_zeros: None, output: OutputFormat::Json }
    }
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_t(s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(Some(t)),
        _ => Err(Error::Precondition(format!("T must be \"auto\" or a positive decimal, got {s:?}"))),
    }
}

impl RunConfig {
    /// Defaults, then the config file (explicit path, else `./ddzeta.conf` if
    /// present), then the flags.
    pub fn resolve(config_path: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        match config_path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Precondition(format!("cannot read config file {}: {e}", p.display())))?;
                cfg.apply_file(&text)?;
            }
            None => {
                if let Ok(text) = std::fs::read_to_string(DEFAULT_CONFIG) {
                    cfg.apply_file(&text)?;
                }
            }
        }
        cfg.apply_flags(flags)?;
        if cfg.precision < MIN_PRECISION {
            return Err(Error::Precondition(format!("precision must be >= {MIN_PRECISION}, got {}", cfg.precision)));
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| bad(i + 1, "expected `key = value`"))?;
            let value = value.trim();
            let num = |what: &str| bad(i + 1, format!("{what} must be an integer, got {value:?}"));
            match key.trim().to_ascii_lowercase().as_str() {
                "precision" | "precision_decimal" => self.precision = value.parse().map_err(|_| num("precision"))?,
                "zeros_file" => self.zeros_file = Some(PathBuf::from(value)),
                "n" => self.n = value.parse().map_err(|_| num("N"))?,
                "eta" => self.eta = value.to_string(),
                "t" => self.t = parse_t(value)?,
                "max_zeros" => self.max_zeros = Some(value.parse().map_err(|_| num("max_zeros"))?),
                "output" => self.output = value.parse()?,
                other => return Err(bad(i + 1, format!("unknown key {other:?}"))),
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, f: &Overrides) -> Result<()> {
        if let Some(p) = f.precision {
            self.precision = p;
        }
        if let Some(z) = &f.zeros_file {
            self.zeros_file = Some(z.clone());
        }
        if let Some(n) = f.n {
            self.n = n;
        }
        if let Some(e) = &f.eta {
            self.eta = e.clone();
        }
        if let Some(t) = &f.t {
            self.t = parse_t(t)?;
        }
        if let Some(m) = f.max_zeros {
            self.max_zeros = Some(m);
        }
        if let Some(o) = f.output {
            self.output = o;
        }
        Ok(())
    }

    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::new(self.precision)
    }

    /// `eta` as a fraction `p/q` or a decimal, at working precision.
    pub fn eta(&self, ctx: &PrecisionContext) -> Result<HpReal> {
        if self.eta.contains('/') {
            let r = Rational::from_str(self.eta.trim())
                .map_err(|e| Error::Precondition(format!("bad fraction for eta {:?}: {e}", self.eta)))?;
            Ok(Float::with_val(ctx.bits, &r))
        } else {
            ctx.parse(&self.eta)
        }
    }

    /// The zero table: flag or config path, else `$DDZETA_ZEROS`, else the bundled table.
    pub fn zeros(&self, ctx: &PrecisionContext) -> Result<ZeroTable> {
        let path = self.zeros_file.clone().or_else(|| std::env::var_os(ZEROS_ENV).map(PathBuf::from));
        match path {
            Some(p) => load_zeros(&p, ctx),
            None => Ok(bundled_zeros(ctx)),
        }
    }

    pub fn eval_params(&self) -> Result<EvalParams> {
        let ctx = self.context();
        let zeros = Arc::new(self.zeros(&ctx)?);
        let count = zeros.count();
        let mut p = EvalParams::new(ctx.clone(), zeros)?;
        p.n = self.n;
        p.eta = self.eta(&ctx)?;
        p.t_max = self.t;
        // Without an explicit limit, use up to 100 zeros of whatever table was loaded.
        let max = self.max_zeros.unwrap_or(count.min(100));
        p.with_max_zeros(max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("# comment\nprecision = 40\nN = 6\neta = 0.25\nT = auto\noutput = text\n").unwrap();
        assert_eq!((cfg.precision, cfg.n, cfg.eta.as_str(), cfg.t, cfg.output), (40, 6, "0.25", None, OutputFormat::Text));
        cfg.apply_flags(&Overrides { n: Some(8), t: Some("30".into()), ..Default::default() }).unwrap();
        assert_eq!((cfg.n, cfg.t), (8, Some(30.0)));
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.apply_file("precision 40"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(cfg.apply_file("\ncolour = red"), Err(Error::Parse { line: 2, .. })));
        assert!(cfg.apply_file("T = -1").is_err());
    }

    #[test]
    fn eta_accepts_fractions() {
        let cfg = RunConfig::default();
        let ctx = PrecisionContext::new(30);
        let e = cfg.eta(&ctx).unwrap();
        assert!((e.to_f64() - 1.0 / 7.0).abs() < 1e-15);
    }
}
