use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::points::strip_comment;
use crate::error::{Error, Result};

/// Sensor, vehicle and planning parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Camera aperture angle, radians.
    pub alpha: f64,
    /// Maximum useful sensor range, m.
    pub r_max: f64,
    /// Offset from the structure surface, m.
    pub omega: f64,
    /// Adjacency threshold for loop detection; roughly the vehicle size, m.
    pub d_min: f64,
    /// Minimum inter-agent and structure clearance, m.
    pub d_s: f64,
    pub n_agents: usize,
    /// Cruise speed, m/s.
    pub v_d: f64,
    /// Controller sampling time, s.
    pub t_s: f64,
    /// Mesh densification pitch, m. Defaults to `d_min / 2`.
    pub sample_pitch: f64,
    pub seed: u64,
}

const KEYS: [&str; 10] = [
    "alpha_deg",
    "r_max",
    "omega",
    "d_min",
    "d_s",
    "n_agents",
    "v_d",
    "t_s",
    "sample_pitch",
    "seed",
];

impl PlannerConfig {
    /// Spacing between slicing planes: `(omega / 2) * tan(alpha)`.
    pub fn delta_lambda(&self) -> f64 {
        0.5 * self.omega * self.alpha.tan()
    }

    /// Trajectory step length `t_s * v_d`.
    pub fn step(&self) -> f64 {
        self.t_s * self.v_d
    }

    /// Component merge radius used before building the adjacency graph.
    pub fn merge_pitch(&self) -> f64 {
        self.d_min / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be > 0, got {v}")))
            }
        }
        if !(self.alpha > 0.0 && self.alpha < std::f64::consts::PI) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 180) degrees, got {}",
                self.alpha.to_degrees()
            )));
        }
        positive("omega", self.omega)?;
        positive("r_max", self.r_max)?;
        if self.omega >= self.r_max {
            return Err(Error::Config(format!(
                "omega must be < r_max (omega = {}, r_max = {})",
                self.omega, self.r_max
            )));
        }
        positive("d_min", self.d_min)?;
        positive("d_s", self.d_s)?;
        positive("v_d", self.v_d)?;
        positive("t_s", self.t_s)?;
        positive("sample_pitch", self.sample_pitch)?;
        if self.n_agents == 0 {
            return Err(Error::Config("n_agents must be >= 1".into()));
        }
        let dl = self.delta_lambda();
        if !(dl.is_finite() && dl > 0.0) {
            return Err(Error::Config(format!("delta_lambda = {dl} is not finite and positive")));
        }
        Ok(())
    }

    /// Renders the config in the same `key = value` format `parse_config` reads.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PlannerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Print the short decimal when it reads back to the same angle.
        let deg = self.alpha.to_degrees();
        let short = (deg * 1e9).round() / 1e9;
        let deg = if short.to_radians() == self.alpha { short } else { deg };
        writeln!(f, "alpha_deg = {deg}")?;
        writeln!(f, "r_max = {}", self.r_max)?;
        writeln!(f, "omega = {}", self.omega)?;
        writeln!(f, "d_min = {}", self.d_min)?;
        writeln!(f, "d_s = {}", self.d_s)?;
        writeln!(f, "n_agents = {}", self.n_agents)?;
        writeln!(f, "v_d = {}", self.v_d)?;
        writeln!(f, "t_s = {}", self.t_s)?;
        writeln!(f, "sample_pitch = {}", self.sample_pitch)?;
        writeln!(f, "seed = {}", self.seed)
    }
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            alpha: 60f64.to_radians(),
            r_max: 4.0,
            omega: 1.0,
            d_min: 0.3,
            d_s: 0.5,
            n_agents: 2,
            v_d: 0.5,
            t_s: 1.0,
            sample_pitch: 0.15,
            seed: 7,
        }
    }
}

pub fn load_config(path: &Path) -> Result<PlannerConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// Parses `key = value` lines. `sample_pitch` and `seed` are optional
/// (defaults `d_min / 2` and 0); every other key is required.
pub fn parse_config(text: &str, path: &Path) -> Result<PlannerConfig> {
    let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::parse(path, idx + 1, "expected 'key = value'"));
        };
        let k = k.trim();
        let Some(&key) = KEYS.iter().find(|&&known| known == k) else {
            return Err(Error::parse(path, idx + 1, format!("unknown key {k:?}")));
        };
        if values.insert(key, (idx + 1, v.trim())).is_some() {
            return Err(Error::parse(path, idx + 1, format!("duplicate key {key:?}")));
        }
    }

    let float = |key: &str| -> Result<Option<f64>> {
        match values.get(key) {
            None => Ok(None),
            Some(&(line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::parse(path, line, format!("{key}: invalid number {v:?}"))),
        }
    };
    let required = |key: &str| -> Result<f64> { float(key)?.ok_or_else(|| Error::Config(format!("missing key {key:?}"))) };
    let integer = |key: &str| -> Result<Option<u64>> {
        match values.get(key) {
            None => Ok(None),
            Some(&(line, v)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Error::parse(path, line, format!("{key}: invalid integer {v:?}"))),
        }
    };

    let d_min = required("d_min")?;
    let cfg = PlannerConfig {
        alpha: required("alpha_deg")?.to_radians(),
        r_max: required("r_max")?,
        omega: required("omega")?,
        d_min,
        d_s: required("d_s")?,
        n_agents: integer("n_agents")?.ok_or_else(|| Error::Config("missing key \"n_agents\"".into()))? as usize,
        v_d: required("v_d")?,
        t_s: required("t_s")?,
        sample_pitch: float("sample_pitch")?.unwrap_or(d_min / 2.0),
        seed: integer("seed")?.unwrap_or(0),
    };
    cfg.validate()?;
    Ok(cfg)
}
