use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::RclConfig;
use crate::error::{Error, Result};
use crate::graph::format_real;

use super::Method;

/// Everything a `train` or `sweep` invocation needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// `seed` is overwritten per run.
    pub rcl: RclConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Rcl],
            seeds: (0..5).collect(),
            rcl: RclConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = || Error::param(format!("bad value {value:?} for {key}"));
        let c = &mut self.rcl;
        match key.trim() {
            "method" | "methods" => self.methods = parse_methods(value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "beta" => c.beta = value.parse().map_err(|_| bad())?,
            "gamma" => c.gamma = value.parse().map_err(|_| bad())?,
            "pace" => c.pace = value.parse().map_err(|_| bad())?,
            "epochs" => c.epochs = value.parse().map_err(|_| bad())?,
            "lr" => c.lr = value.parse().map_err(|_| bad())?,
            "hidden" => c.hidden = value.parse().map_err(|_| bad())?,
            "epsilon_conv" => c.epsilon_conv = value.parse().map_err(|_| bad())?,
            "init_frac" => c.init_frac = value.parse().map_err(|_| bad())?,
            "recon_in_wstep" => c.recon_in_wstep = parse_bool(value).ok_or_else(bad)?,
            "smoothing" => c.smoothing = parse_bool(value).ok_or_else(bad)?,
            "loss_decay" => c.loss_decay = value.parse().map_err(|_| bad())?,
            "learn_mask" => c.learn_mask = parse_bool(value).ok_or_else(bad)?,
            other => return Err(Error::param(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Parses a flat `key=value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("config line {}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut cfg = Self::default();
        cfg.apply_file(&text)?;
        Ok(cfg)
    }

    /// Every setting, one `key=value` per line, in a fixed order.
    pub fn to_kv(&self) -> String {
        let c = &self.rcl;
        let methods: Vec<String> = self.methods.iter().map(|m| m.to_string()).collect();
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "methods={}", methods.join(","));
        let _ = writeln!(out, "seeds={}", seeds.join(","));
        let _ = writeln!(out, "beta={}", format_real(c.beta));
        let _ = writeln!(out, "gamma={}", format_real(c.gamma));
        let _ = writeln!(out, "pace={}", c.pace);
        let _ = writeln!(out, "epochs={}", c.epochs);
        let _ = writeln!(out, "lr={}", format_real(c.lr));
        let _ = writeln!(out, "hidden={}", c.hidden);
        let _ = writeln!(out, "epsilon_conv={}", format_real(c.epsilon_conv));
        let _ = writeln!(out, "init_frac={}", format_real(c.init_frac));
        let _ = writeln!(out, "recon_in_wstep={}", c.recon_in_wstep);
        let _ = writeln!(out, "smoothing={}", c.smoothing);
        let _ = writeln!(out, "loss_decay={}", format_real(c.loss_decay));
        let _ = writeln!(out, "learn_mask={}", c.learn_mask);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::param("no methods requested"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("no seeds requested"));
        }
        self.rcl.validate()
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            out.extend(Method::ALL);
        } else {
            out.push(part.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::param("empty method list"));
    }
    Ok(out)
}

/// Comma-separated seeds; `a-b` expands to the inclusive range.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = |p: &str| Error::param(format!("bad seed {p:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if b < a {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if out.is_empty() {
        return Err(Error::param("empty seed list"));
    }
    Ok(out)
}

/// Comma-separated reals; `start:stop:step` expands inclusively.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    let bad = |p: &str| Error::param(format!("bad number list {p:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [x] => out.push(x.parse::<f64>().map_err(|_| bad(part))?),
            [a, b, step] => {
                let a: f64 = a.parse().map_err(|_| bad(part))?;
                let b: f64 = b.parse().map_err(|_| bad(part))?;
                let step: f64 = step.parse().map_err(|_| bad(part))?;
                if !(step > 0.0) || b < a {
                    return Err(bad(part));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                // Round to kill accumulated binary noise (0.1 * 3 etc).
                out.extend((0..=n).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9));
            }
            _ => return Err(bad(part)),
        }
    }
    if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
        return Err(bad(s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("methods", "rcl,vanilla").unwrap();
        cfg.set("gamma", "0.5").unwrap();
        cfg.set("smoothing", "false").unwrap();
        let mut back = ExperimentConfig::default();
        back.apply_file(&cfg.to_kv()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn file_comments_and_errors() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file("# header\n\nbeta = 2 # inline\n").unwrap();
        assert_eq!(cfg.rcl.beta, 2.0);
        assert!(cfg.apply_file("beta 2").is_err());
        assert!(cfg.apply_file("colour=red").is_err());
        assert!(cfg.apply_file("pace=fast").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_seeds("0-2,7").unwrap(), vec![0, 1, 2, 7]);
        assert!(parse_seeds("3-1").is_err());
        assert_eq!(parse_reals("0.1:1.0:0.1").unwrap().len(), 10);
        assert_eq!(parse_reals("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_methods("all").unwrap().len(), 6);
        assert!(parse_methods("gat").is_err());
    }
}
