//! Run configuration: a TOML file with dotted sections (`params.alpha`),
//! `--set key=value` overrides, then the dedicated flags.

use std::path::{Path, PathBuf};

use lrfield::experiments::{Functional, ScalingExperimentConfig};
use lrfield::limit::{DiagonalTreatment, LimitSampleGrid, ScalingParams, ValidityMode};
use lrfield::windows::Window;
use lrfield::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MEMORY_ENV: &str = "LRF_MEMORY_BUDGET_MB";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub validity_mode: ValidityMode,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_budget_mb: Option<u64>,
    pub params: ParamsSection,
    pub synth: SynthSection,
    pub scaling: ScalingSection,
    pub limit: LimitSection,
    pub integrability: IntegrabilitySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            validity_mode: ValidityMode::Window,
            out: PathBuf::from("out"),
            threads: None,
            memory_budget_mb: None,
            params: ParamsSection::default(),
            synth: SynthSection::default(),
            scaling: ScalingSection::default(),
            limit: LimitSection::default(),
            integrability: IntegrabilitySection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    pub n: usize,
    pub kappa: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `interval`, `ball` or `box`.
    pub window: String,
    /// Interval `[-b, a]`; ignored by the other windows.
    pub a: f64,
    pub b: f64,
    pub g0: f64,
    pub h1: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            n: 1,
            kappa: 1,
            alpha: 0.4,
            beta: 0.0,
            window: "interval".into(),
            a: 1.0,
            b: 1.0,
            g0: 1.0,
            h1: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    /// Lattice shape; defaults to 1024 sites for n = 1 and 128 per axis otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<usize>>,
    pub spacing: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            shape: None,
            spacing: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    /// Defaults to 64..1024 for n = 1 and 32..128 otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub t_grid: Vec<f64>,
    pub replicates: usize,
    pub spacing: f64,
    pub filter_sigma: f64,
    pub filtered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_fraction: Option<f64>,
    /// `pure_hermite`, or `general` with `coeffs` (powers of x, constant first).
    pub functional: String,
    pub coeffs: Vec<f64>,
    /// Also draw limit samples per `t` and report KS distances at the largest radius.
    pub compare_limit: bool,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            radii: None,
            t_grid: vec![0.25, 0.5, 0.75, 1.0],
            replicates: 100,
            spacing: 1.0,
            filter_sigma: 1.0,
            filtered: true,
            guard_fraction: None,
            functional: "pure_hermite".into(),
            coeffs: Vec::new(),
            compare_limit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitSection {
    pub t_grid: Vec<f64>,
    pub count: usize,
    pub truncation_radius: f64,
    pub bins: usize,
    pub diagonal: DiagonalTreatment,
    /// Add a Gaussian carrying the variance beyond the truncation radius.
    pub gaussian_tail: bool,
    pub mc_samples: usize,
    pub mc_rel_tol: f64,
}

impl Default for LimitSection {
    fn default() -> Self {
        Self {
            t_grid: vec![1.0],
            count: 10_000,
            truncation_radius: 40.0,
            bins: 64,
            diagonal: DiagonalTreatment::Excluded,
            gaussian_tail: false,
            mc_samples: 1 << 22,
            mc_rel_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrabilitySection {
    /// Entries like `interval`, `ball:2`, `box:2`.
    pub windows: Vec<String>,
    pub exponents: Vec<f64>,
}

impl Default for IntegrabilitySection {
    fn default() -> Self {
        Self {
            windows: vec!["interval".into(), "ball:2".into(), "box:2".into()],
            exponents: vec![-0.1, 0.5, 1.0, 1.5, 1.9, 2.4, 2.5, 3.0, 3.2, 3.5],
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub validity_mode: Option<ValidityMode>,
    pub sets: Vec<String>,
}

impl RunConfig {
    /// Reads `path` (if any), applies `--set` pairs, the flags and the memory
    /// budget from the environment.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for pair in &overrides.sets {
            apply_set(&mut table, pair)?;
        }
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(o) = &overrides.out {
            cfg.out = o.clone();
        }
        if overrides.threads.is_some() {
            cfg.threads = overrides.threads;
        }
        if let Some(m) = overrides.validity_mode {
            cfg.validity_mode = m;
        }
        if let Ok(v) = std::env::var(MEMORY_ENV) {
            let mb = v
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{MEMORY_ENV} = '{v}' is not a whole number of megabytes")))?;
            cfg.memory_budget_mb = Some(mb);
        }
        cfg.resolve_defaults();
        Ok(cfg)
    }

    /// Fills dimension-dependent defaults so the written config is complete.
    fn resolve_defaults(&mut self) {
        let n = self.params.n;
        if self.synth.shape.is_none() {
            self.synth.shape = Some(if n == 1 { vec![1024] } else { vec![128; n] });
        }
        if self.scaling.radii.is_none() {
            self.scaling.radii = Some(if n == 1 {
                vec![64.0, 128.0, 256.0, 512.0, 1024.0]
            } else {
                vec![32.0, 64.0, 128.0]
            });
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn window(&self) -> Result<Window> {
        let p = &self.params;
        match p.window.as_str() {
            "interval" => {
                if p.n != 1 {
                    return Err(Error::Config(format!("the interval window needs n = 1, got n = {}", p.n)));
                }
                Window::interval(p.a, p.b)
            }
            "ball" => Window::ball(p.n),
            "box" => Window::cube(p.n),
            other => Err(Error::Config(format!("unknown window '{other}' (interval|ball|box)"))),
        }
    }

    pub fn scaling_params(&self) -> Result<ScalingParams> {
        let p = &self.params;
        let mut sp = ScalingParams::new(p.n, p.kappa, p.alpha, p.beta, self.window()?)?;
        sp.g0 = p.g0;
        sp.h1 = p.h1;
        sp.check_domain()?;
        Ok(sp)
    }

    pub fn experiment(&self) -> Result<ScalingExperimentConfig> {
        let s = &self.scaling;
        let params = self.scaling_params()?;
        let mut cfg = ScalingExperimentConfig::new(
            params,
            s.radii.clone().unwrap_or_default(),
            s.t_grid.clone(),
            s.replicates,
            self.seed,
        );
        cfg.functional = match s.functional.as_str() {
            "pure_hermite" => Functional::PureHermite,
            "general" => {
                if s.coeffs.is_empty() {
                    return Err(Error::Config("scaling.coeffs is empty for a general functional".into()));
                }
                Functional::General {
                    coeffs: s.coeffs.clone(),
                    expected_rank: params.kappa,
                }
            }
            other => return Err(Error::Config(format!("unknown functional '{other}' (pure_hermite|general)"))),
        };
        cfg.spacing = s.spacing;
        cfg.filter_sigma = s.filter_sigma;
        cfg.filtered = s.filtered;
        cfg.guard_fraction = s.guard_fraction;
        cfg.validity_mode = self.validity_mode;
        cfg.memory_budget_mb = self.memory_budget_mb;
        Ok(cfg)
    }

    pub fn limit_grid(&self) -> Result<LimitSampleGrid> {
        Ok(LimitSampleGrid::new(self.limit.truncation_radius, self.limit.bins)?.with_diagonal(self.limit.diagonal))
    }
}

/// Parses one `window` entry of the integrability section.
pub fn parse_window(spec: &str) -> Result<Window> {
    let (kind, dim) = match spec.split_once(':') {
        Some((k, d)) => {
            let n = d
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad dimension in window '{spec}'")))?;
            (k.trim(), Some(n))
        }
        None => (spec.trim(), None),
    };
    match (kind, dim) {
        ("interval", None | Some(1)) => Window::interval(1.0, 1.0),
        ("ball", Some(n)) => Window::ball(n),
        ("box", Some(n)) => Window::cube(n),
        _ => Err(Error::Config(format!(
            "window '{spec}' not understood (interval, ball:N or box:N)"
        ))),
    }
}

/// `a.b.c=value`, where the value is read as TOML and falls back to a bare string.
fn apply_set(table: &mut toml::Table, pair: &str) -> Result<()> {
    let (key, raw) = pair
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{pair}'")))?;
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().unwrap();
    let mut cur = table;
    for part in path {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{part}' in '{key}' is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_and_sections_agree() {
        let a: RunConfig = toml::from_str("params.alpha = 0.3\nscaling.replicates = 50\n").unwrap();
        let b: RunConfig = toml::from_str("[params]\nalpha = 0.3\n[scaling]\nreplicates = 50\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.params.alpha, 0.3);
        assert_eq!(a.params.kappa, 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("params.alpah = 0.3\n").unwrap_err();
        assert!(err.to_string().contains("alpah"), "{err}");
        assert!(toml::from_str::<RunConfig>("colour = 1\n").is_err());
    }

    #[test]
    fn set_overrides() {
        let mut t = toml::Table::new();
        apply_set(&mut t, "params.alpha=0.25").unwrap();
        apply_set(&mut t, "scaling.radii=[8, 16, 32]").unwrap();
        apply_set(&mut t, "params.window=ball").unwrap();
        let cfg: RunConfig = toml::Value::Table(t).try_into().unwrap();
        assert_eq!(cfg.params.alpha, 0.25);
        assert_eq!(cfg.scaling.radii, Some(vec![8.0, 16.0, 32.0]));
        assert_eq!(cfg.params.window, "ball");
        assert!(apply_set(&mut toml::Table::new(), "novalue").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.resolve_defaults();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn window_entries() {
        assert_eq!(parse_window("ball:2").unwrap(), Window::ball(2).unwrap());
        assert_eq!(parse_window("interval").unwrap(), Window::interval(1.0, 1.0).unwrap());
        assert!(parse_window("ball").is_err());
        assert!(parse_window("disc:2").is_err());
    }
}
