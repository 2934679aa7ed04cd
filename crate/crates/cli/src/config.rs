//! `key = value` run files and flag value parsing.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::CliError;

/// Values read from a `--config` file, keyed by long flag name.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.is_file() {
            return Err(CliError::usage(format!("config file not found: {}", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(CliError::usage(format!("config line {}: empty key or value", i + 1)));
            }
            values.insert(k.to_string(), v.to_string());
        }
        Ok(Self { values })
    }

    /// Fails on any key the current subcommand does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::usage(format!("unknown config key `{k}` (accepted: {})", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    /// Flag value if given, else the config entry parsed with `parse`.
    pub fn resolve<T>(
        &self,
        key: &str,
        flag: Option<T>,
        parse: fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| parse(v).map_err(|e| CliError::usage(format!("config key `{key}`: {e}"))))
            .transpose()
    }
}

/// An angle flag: the value in radians plus the text it was given as.
#[derive(Clone, Debug, PartialEq)]
pub struct Angle {
    pub rad: f64,
    pub text: String,
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Angle {
    pub fn rad(x: f64) -> Self {
        Self { rad: x, text: stirap_forge::io::fmt_sig(x) }
    }
}

/// Radians, or multiples of pi such as `pi/6`, `-pi/4`, `2pi/3`, `3*pi`.
pub fn parse_angle(s: &str) -> Result<Angle, String> {
    let text = s.trim();
    let lower = text.to_lowercase().replace('π', "pi");
    let compact: String = lower.chars().filter(|c| !c.is_whitespace()).collect();
    let rad = if compact.contains("pi") {
        let (num, den) = match compact.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (compact.as_str(), None),
        };
        let coeff = num.strip_suffix("pi").ok_or_else(|| format!("cannot parse angle `{text}`"))?;
        let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
        let k = match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| format!("cannot parse angle `{text}`"))?,
        };
        let d = match den {
            Some(d) => d.parse::<f64>().map_err(|_| format!("cannot parse angle `{text}`"))?,
            None => 1.0,
        };
        if d == 0.0 {
            return Err(format!("zero denominator in angle `{text}`"));
        }
        k * PI / d
    } else {
        compact.parse::<f64>().map_err(|_| format!("cannot parse angle `{text}`"))?
    };
    if !rad.is_finite() {
        return Err(format!("angle `{text}` is not finite"));
    }
    Ok(Angle { rad, text: text.to_string() })
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got `{s}`")),
    }
}

pub fn parse_count(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

pub fn parse_string(s: &str) -> Result<String, String> {
    Ok(s.trim().to_string())
}
