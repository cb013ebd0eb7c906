//! Settings from a `key = value` file merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ruij_core::{Complex64, ComplexTuple, ModelParams, Periods, QuadratureSpec};

/// Malformed input or flags; maps to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

macro_rules! usage {
    ($($t:tt)*) => { anyhow::Error::new(crate::config::UsageError(format!($($t)*))) };
}
pub(crate) use usage;

pub const KEYS: &[&str] = &[
    "omega1", "omega2", "g", "rel_tol", "abs_tol", "max_subdivisions", "qmc_samples", "epsilon", "n", "z", "x", "lambda",
    "seed", "filter", "output", "format",
];

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` (exponents allowed in both parts).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let z = parse_complex_raw(s)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(usage!("'{s}' is not a finite number"));
    }
    Ok(z)
}

fn parse_complex_raw(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || usage!("cannot parse complex number '{s}'");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not the leading one and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coef = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(body[..k].parse::<f64>().map_err(|_| bad())?, coef(&body[k..])?)),
        None => Ok(Complex64::new(0.0, coef(body)?)),
    }
}

pub fn parse_tuple(s: &str) -> Result<ComplexTuple> {
    let v = s.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    Ok(ComplexTuple::new(v))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Flat string settings; later layers override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn parse_file_text(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(usage!("config line {}: expected key = value, got '{raw}'", no + 1));
            };
            let k = k.trim().replace('-', "_");
            if !KEYS.contains(&k.as_str()) {
                return Err(usage!("config line {}: unknown key '{k}'", no + 1));
            }
            map.insert(k, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse_file_text(&text).map_err(|e| usage!("{}: {e}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.0.insert(key.to_string(), v.to_string());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| usage!("invalid value for {key}: '{v}'")))
            .transpose()
    }

    pub fn complex(&self, key: &str) -> Result<Option<Complex64>> {
        self.get(key).map(parse_complex).transpose()
    }

    pub fn require_complex(&self, key: &str) -> Result<Complex64> {
        self.complex(key)?.ok_or_else(|| usage!("missing --{}", key.replace('_', "-")))
    }

    pub fn tuple(&self, key: &str) -> Result<Option<ComplexTuple>> {
        self.get(key).map(parse_tuple).transpose()
    }

    pub fn require_tuple(&self, key: &str) -> Result<ComplexTuple> {
        self.tuple(key)?.ok_or_else(|| usage!("missing --{key}"))
    }

    pub fn periods(&self) -> Result<Periods> {
        let o1 = self.complex("omega1")?.unwrap_or(Complex64::new(1.0, 0.0));
        let o2 = self.complex("omega2")?.unwrap_or(Complex64::new(std::f64::consts::SQRT_2, 0.0));
        Ok(Periods::new(o1, o2)?)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let g = self.complex("g")?.unwrap_or(Complex64::new(0.6, 0.0));
        Ok(ModelParams::new(self.periods()?, g)?)
    }

    pub fn spec(&self) -> Result<QuadratureSpec> {
        let mut s = QuadratureSpec::default();
        if let Some(v) = self.parsed("rel_tol")? {
            s.rel_tol = v;
        }
        if let Some(v) = self.parsed("abs_tol")? {
            s.abs_tol = v;
        }
        if let Some(v) = self.parsed("max_subdivisions")? {
            s.max_subdivisions = v;
        }
        if let Some(v) = self.parsed("qmc_samples")? {
            s.qmc_samples = v;
        }
        s.validate().map_err(|e| usage!("{e}"))?;
        Ok(s)
    }

    pub fn epsilon(&self) -> Result<Option<f64>> {
        self.parsed("epsilon")
    }

    pub fn n(&self) -> Result<Option<usize>> {
        self.parsed("n")
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.parsed("seed")?.unwrap_or(0))
    }

    pub fn filter(&self) -> Option<Vec<String>> {
        self.get("filter")
            .map(|f| f.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
    }

    pub fn output(&self) -> Option<&Path> {
        self.get("output").map(Path::new)
    }

    pub fn format(&self) -> Result<Format> {
        match self.get("format") {
            None => Ok(Format::Json),
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => bail!(UsageError(format!("unknown format '{other}' (json or csv)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = |re, im| Complex64::new(re, im);
        for (s, v) in [
            ("0.5", c(0.5, 0.0)),
            ("0.5+0i", c(0.5, 0.0)),
            ("1-2i", c(1.0, -2.0)),
            ("-1.5e-3+2.5e2i", c(-1.5e-3, 250.0)),
            ("1e-3-1e-2i", c(1e-3, -1e-2)),
            ("i", c(0.0, 1.0)),
            ("-i", c(0.0, -1.0)),
            ("3i", c(0.0, 3.0)),
            ("2 + i", c(2.0, 1.0)),
        ] {
            assert_eq!(parse_complex(s).unwrap(), v, "{s}");
        }
        for s in ["", "abc", "1+", "1+2", "i1", "1e400", "nan", "inf+0i"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn formatted_complex_parses_back() {
        for z in [Complex64::new(0.25, -1e-9), Complex64::new(-3.0, 0.5)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn file_parsing_and_override() {
        let mut s = Settings::parse_file_text("# model\nomega1 = 0.3  # short period\nomega2=1\ng = 0.4\n\nseed = 3\n").unwrap();
        assert_eq!(s.seed().unwrap(), 3);
        s.set("seed", Some(9));
        assert_eq!(s.seed().unwrap(), 9);
        s.set("g", None::<String>);
        assert_eq!(s.params().unwrap().g, Complex64::new(0.4, 0.0));
    }

    #[test]
    fn bad_files_are_usage_errors() {
        for text in ["omega1 0.3", "colour = red"] {
            let e = Settings::parse_file_text(text).unwrap_err();
            assert!(e.downcast_ref::<UsageError>().is_some());
        }
    }
}
