//! Run configuration: every tunable with its default, a `key=value` file
//! format, and validation before any computation.

use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{path}:{line}: expected key=value")]
    Syntax { path: String, line: usize },
    #[error("cannot read config file {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: Option<f64>,
    pub mu: f64,
    pub mu_lo: Option<f64>,
    pub mu_hi: Option<f64>,
    pub mu_tol: f64,
    pub mu_list: Vec<f64>,
    pub eps: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub scale: String,
    pub y_max: f64,
    pub blowup_f: f64,
    pub undershoot_margin: f64,
    pub slope_cap: f64,
    pub zero_resolution: f64,
    pub microscope: bool,
    pub window: f64,
    pub resolution: f64,
    pub s_transient: f64,
    pub s_observe: f64,
    pub escape_level: f64,
    pub nh_lo: f64,
    pub nh_hi: f64,
    pub nh_tol: f64,
    pub rule: String,
    pub seed: String,
    pub d: f64,
    pub d_grid: Option<Vec<f64>>,
    pub delta: f64,
    pub s0: f64,
    pub s0_count: usize,
    pub log_lo: f64,
    pub log_hi: f64,
    pub resample: usize,
    pub sweep_task: String,
    pub sweep_param: String,
    pub sweep_values: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: None,
            mu: 0.0,
            mu_lo: None,
            mu_hi: None,
            mu_tol: 1e-12,
            mu_list: vec![-2.0, -10.0, -100.0, -1000.0],
            eps: 1e-11,
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 20_000_000,
            scale: "similarity".into(),
            y_max: 6.0,
            blowup_f: 1e3,
            undershoot_margin: 1e-9,
            slope_cap: 1e3,
            zero_resolution: 1e-10,
            microscope: false,
            window: 0.05,
            resolution: 1e-7,
            s_transient: 200.0,
            s_observe: 400.0,
            escape_level: 1e6,
            nh_lo: 1.7,
            nh_hi: 1.8,
            nh_tol: 5e-3,
            rule: "characteristic".into(),
            seed: "three".into(),
            d: 0.0,
            d_grid: None,
            delta: 1e-3,
            s0: 0.0,
            s0_count: 32,
            log_lo: 1e-4,
            log_hi: 1e-2,
            resample: 0,
            sweep_task: "findmu".into(),
            sweep_param: "n".into(),
            sweep_values: None,
        }
    }
}

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: reason.to_string(),
    }
}

fn float(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.trim().parse().map_err(|e| bad(key, v, e))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, v, "must be finite"))
    }
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let out: Result<Vec<f64>, _> = v.split(',').filter(|s| !s.trim().is_empty()).map(|s| float(key, s)).collect();
    let out = out?;
    if out.is_empty() {
        return Err(bad(key, v, "empty list"));
    }
    Ok(out)
}

fn choice(key: &str, v: &str, allowed: &[&str]) -> Result<String, ConfigError> {
    let v = v.trim();
    if allowed.contains(&v) {
        Ok(v.to_string())
    } else {
        Err(bad(key, v, format!("expected one of {}", allowed.join(", "))))
    }
}

pub const SWEEP_TASKS: [&str; 5] = ["findmu", "shoot", "osc", "cubic", "backshoot"];
pub const SWEEP_PARAMS: [&str; 4] = ["n", "mu", "d", "eps"];

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let usize_of = |v: &str| v.trim().parse::<usize>().map_err(|e| bad(key, v, e));
        match key {
            "n" => self.n = Some(float(key, v)?),
            "mu" => self.mu = float(key, v)?,
            "mu_lo" => self.mu_lo = Some(float(key, v)?),
            "mu_hi" => self.mu_hi = Some(float(key, v)?),
            "mu_tol" => self.mu_tol = float(key, v)?,
            "mu_list" => self.mu_list = list(key, v)?,
            "eps" => self.eps = float(key, v)?,
            "rtol" => self.rtol = float(key, v)?,
            "atol" => self.atol = float(key, v)?,
            "max_steps" => self.max_steps = usize_of(v)?,
            "scale" => self.scale = choice(key, v, &["similarity", "unit"])?,
            "y_max" => self.y_max = float(key, v)?,
            "blowup_f" => self.blowup_f = float(key, v)?,
            "undershoot_margin" => self.undershoot_margin = float(key, v)?,
            "slope_cap" => self.slope_cap = float(key, v)?,
            "zero_resolution" => self.zero_resolution = float(key, v)?,
            "microscope" => self.microscope = v.trim().parse().map_err(|e| bad(key, v, e))?,
            "window" => self.window = float(key, v)?,
            "resolution" => self.resolution = float(key, v)?,
            "s_transient" => self.s_transient = float(key, v)?,
            "s_observe" => self.s_observe = float(key, v)?,
            "escape_level" => self.escape_level = float(key, v)?,
            "nh_lo" => self.nh_lo = float(key, v)?,
            "nh_hi" => self.nh_hi = float(key, v)?,
            "nh_tol" => self.nh_tol = float(key, v)?,
            "rule" => self.rule = choice(key, v, &["characteristic", "linearized"])?,
            "seed" => self.seed = choice(key, v, &["two", "three"])?,
            "d" => self.d = float(key, v)?,
            "d_grid" => self.d_grid = Some(list(key, v)?),
            "delta" => self.delta = float(key, v)?,
            "s0" => self.s0 = float(key, v)?,
            "s0_count" => self.s0_count = usize_of(v)?,
            "log_lo" => self.log_lo = float(key, v)?,
            "log_hi" => self.log_hi = float(key, v)?,
            "resample" => self.resample = usize_of(v)?,
            "sweep_task" => self.sweep_task = choice(key, v, &SWEEP_TASKS)?,
            "sweep_param" => self.sweep_param = choice(key, v, &SWEEP_PARAMS)?,
            "sweep_values" => self.sweep_values = Some(list(key, v)?),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Range checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, key: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    key: key.into(),
                    reason: reason.into(),
                })
            }
        };
        if let Some(n) = self.n {
            check(n > 0.0, "n", "must be positive")?;
        }
        for (k, v) in [
            ("eps", self.eps),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("mu_tol", self.mu_tol),
            ("y_max", self.y_max),
            ("blowup_f", self.blowup_f),
            ("undershoot_margin", self.undershoot_margin),
            ("slope_cap", self.slope_cap),
            ("zero_resolution", self.zero_resolution),
            ("window", self.window),
            ("resolution", self.resolution),
            ("s_observe", self.s_observe),
            ("escape_level", self.escape_level),
            ("nh_tol", self.nh_tol),
            ("delta", self.delta),
            ("log_lo", self.log_lo),
        ] {
            check(v > 0.0, k, "must be positive")?;
        }
        check(self.s_transient >= 0.0, "s_transient", "must be non-negative")?;
        check(self.max_steps > 0, "max_steps", "must be positive")?;
        check(self.nh_lo < self.nh_hi, "nh_lo", "must be below nh_hi")?;
        check(self.log_lo < self.log_hi, "log_lo", "must be below log_hi")?;
        check(self.s0_count > 0, "s0_count", "must be positive")?;
        if let (Some(lo), Some(hi)) = (self.mu_lo, self.mu_hi) {
            check(lo < hi, "mu_lo", "must be below mu_hi")?;
        }
        Ok(())
    }

    pub fn require_n(&self) -> Result<f64, ConfigError> {
        self.n.ok_or(ConfigError::Invalid {
            key: "n".into(),
            reason: "required (pass --n)".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nn = 1.8\n\nrtol=1e-10  # inline\nd_grid=-1,0,1\n", "t").unwrap();
        assert_eq!(c.n, Some(1.8));
        assert_eq!(c.rtol, 1e-10);
        assert_eq!(c.d_grid, Some(vec![-1.0, 0.0, 1.0]));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = RunConfig::default();
        assert_eq!(c.apply_text("nn=2", "t"), Err(ConfigError::UnknownKey("nn".into())));
        assert!(matches!(c.apply_text("n 2", "t"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.set("eps", "abc"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(c.set("rule", "other"), Err(ConfigError::BadValue { .. })));
        c.set("eps", "-1").unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Invalid { .. })));
    }
}
