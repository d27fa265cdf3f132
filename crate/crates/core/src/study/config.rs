//! Study configuration.
//!
//! The config file is a flat list of `key = value` lines. Blank lines and
//! everything after `#` are ignored. Recognised keys:
//!
//! | key | value |
//! |-----|-------|
//! | `case` | `paper` or `sine` |
//! | `p` | comma-separated degrees, e.g. `1,2,3,4` |
//! | `levels` | comma-separated elements per side, each twice the previous |
//! | `sigma`, `lambda`, `zeta`, `nu`, `theta` | reals |
//! | `out` | output directory |
//! | `seed` | unsigned integer |
//! | `solver` | `direct` or `gmres` |
//! | `tol` | relative residual tolerance |
//! | `samples` | random polynomials per level for the inequality probes |
//!
//! Command-line flags use the same keys and override the file; the
//! `FLUXDG_OUT` environment variable overrides `out` from the file.

use std::path::{Path, PathBuf};

use crate::forms::FormParams;
use crate::refelem::MAX_DEGREE;
use crate::system::SolverStrategy;
use crate::{DgError, Result};

pub const OUT_DIR_ENV: &str = "FLUXDG_OUT";

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub case: String,
    pub p_values: Vec<usize>,
    pub levels: Vec<usize>,
    pub sigma: f64,
    pub lambda: f64,
    pub zeta: f64,
    pub nu: f64,
    pub theta: f64,
    pub solver: SolverStrategy,
    pub tol: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            case: "paper".into(),
            p_values: vec![1, 2, 3, 4],
            levels: vec![4, 8, 16, 32],
            sigma: 1.0,
            lambda: 1.0,
            zeta: 2.0,
            nu: 1.0,
            theta: 2.0,
            solver: SolverStrategy::Direct,
            tol: 1e-12,
            out: PathBuf::from("out"),
            seed: 20_111,
            samples: 200,
        }
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| DgError::Config(format!("{key}: '{s}' is not a non-negative integer")))
        })
        .collect()
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| DgError::Config(format!("{key}: '{value}' is not a number")))
}

impl StudyConfig {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "case" => self.case = v.to_string(),
            "p" => self.p_values = parse_list(key, v)?,
            "levels" => self.levels = parse_list(key, v)?,
            "sigma" => self.sigma = parse_real(key, v)?,
            "lambda" => self.lambda = parse_real(key, v)?,
            "zeta" => self.zeta = parse_real(key, v)?,
            "nu" => self.nu = parse_real(key, v)?,
            "theta" => self.theta = parse_real(key, v)?,
            "solver" => self.solver = v.parse()?,
            "tol" => self.tol = parse_real(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "seed" => {
                self.seed = v.parse().map_err(|_| {
                    DgError::Config(format!("seed: '{v}' is not an unsigned integer"))
                })?
            }
            "samples" => {
                self.samples = v.parse().map_err(|_| {
                    DgError::Config(format!("samples: '{v}' is not an unsigned integer"))
                })?
            }
            other => return Err(DgError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_str(text)?;
        Ok(cfg)
    }

    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                DgError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            self.set(key.trim(), value)
                .map_err(|e| DgError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DgError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn params(&self, p: usize) -> FormParams {
        FormParams {
            sigma: self.sigma,
            lambda: self.lambda,
            zeta: self.zeta,
            nu: self.nu,
            theta: self.theta,
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::system::case_by_name(&self.case)?;
        if self.p_values.is_empty() {
            return Err(DgError::Config("at least one p value is required".into()));
        }
        for &p in &self.p_values {
            if !(1..=MAX_DEGREE).contains(&p) {
                return Err(DgError::Config(format!("p = {p} outside 1..={MAX_DEGREE}")));
            }
        }
        if self.levels.is_empty() || self.levels[0] == 0 {
            return Err(DgError::Config(
                "levels must be non-empty and positive".into(),
            ));
        }
        for w in self.levels.windows(2) {
            if w[1] != 2 * w[0] {
                return Err(DgError::Config(format!(
                    "levels must double: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        self.params(self.p_values[0])
            .validate()
            .map_err(|e| DgError::Config(e.to_string()))?;
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(DgError::Config(format!(
                "tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        Ok(())
    }

    /// Create the output directory and check it accepts files.
    pub fn prepare_output(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| DgError::Config(format!("cannot create {}: {e}", self.out.display())))?;
        let probe = self.out.join(".fluxdg-write-test");
        std::fs::write(&probe, b"")
            .and_then(|_| std::fs::remove_file(&probe))
            .map_err(|e| DgError::Config(format!("{} is not writable: {e}", self.out.display())))
    }
}
