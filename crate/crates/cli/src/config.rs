//! Run configuration: TOML with dotted keys (`params.a = 2`) for hand-written
//! files, JSON for generated ones. Unknown keys are rejected.

use std::path::Path;

use holling_bt::equilibria::HC_TOL;
use holling_bt::hopf::BRANCH_SAMPLES;
use holling_bt::model::{BtParams, ModelParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("missing config key `{0}`")]
    Missing(&'static str),
    #[error("config key `{key}` = {value} is outside {range}")]
    Range {
        key: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// Model parameters; `h` and `delta` are unknowns for the BT commands and
/// may be left out there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub eta: f64,
    pub m: f64,
}

impl ParamsSection {
    pub fn model(&self) -> Result<ModelParams, ConfigError> {
        Ok(ModelParams {
            a: self.a,
            b: self.b,
            c: self.c,
            h: self.h.ok_or(ConfigError::Missing("params.h"))?,
            delta: self.delta.ok_or(ConfigError::Missing("params.delta"))?,
            eta: self.eta,
            m: self.m,
        })
    }

    pub fn bt(&self) -> BtParams {
        BtParams {
            a: self.a,
            b: self.b,
            c: self.c,
            eta: self.eta,
            m: self.m,
        }
    }
}

impl From<ModelParams> for ParamsSection {
    fn from(p: ModelParams) -> Self {
        ParamsSection {
            a: p.a,
            b: p.b,
            c: p.c,
            h: Some(p.h),
            delta: Some(p.delta),
            eta: p.eta,
            m: p.m,
        }
    }
}

/// `delta` interval and branch for the Hopf scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfSection {
    pub delta_lo: f64,
    pub delta_hi: f64,
    /// Index of the interior equilibrium (sorted by `x`) to follow.
    pub branch: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    BRANCH_SAMPLES
}

/// `lambda` box for the bifurcation curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesSection {
    pub lambda1_min: f64,
    pub lambda1_max: f64,
    pub lambda2_min: f64,
    pub lambda2_max: f64,
    /// Number of `lambda1` samples.
    pub n: usize,
    /// Which Bogdanov-Takens point (sorted by `x`) to unfold.
    #[serde(default)]
    pub point: usize,
}

/// Initial conditions and horizon for `simulate`. `random` extra seeds are
/// drawn uniformly from the box with the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub t_end: f64,
    #[serde(default)]
    pub seeds: Vec<[f64; 2]>,
    #[serde(default)]
    pub random: usize,
    #[serde(default = "default_box")]
    pub random_box: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<CycleSection>,
}

fn default_box() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}

/// Limit-cycle probe around an interior equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSection {
    /// Index of the interior equilibrium (sorted by `x`).
    pub center: usize,
    pub radius: f64,
    pub t_max: f64,
}

/// `(h, c)` grid; nodes sit strictly inside the box at
/// `lo + (i + 1) (hi - lo) / (n + 1)`, so equal boxes and counts put nodes
/// exactly on the diagonal `h = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub h_min: f64,
    pub h_max: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub nh: usize,
    pub nc: usize,
}

impl SweepSection {
    pub fn h_nodes(&self) -> Vec<f64> {
        nodes(self.h_min, self.h_max, self.nh)
    }

    pub fn c_nodes(&self) -> Vec<f64> {
        nodes(self.c_min, self.c_max, self.nc)
    }
}

fn nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (i + 1) as f64 * (hi - lo) / (n + 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    /// Integration tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Relative tolerance for `h = c`.
    #[serde(default = "default_region_tol")]
    pub region_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurvesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_region_tol() -> f64 {
    HC_TOL
}

impl RunConfig {
    pub fn new(params: ParamsSection) -> Self {
        RunConfig {
            params,
            tol: default_tol(),
            region_tol: default_region_tol(),
            seed: 0,
            hopf: None,
            curves: None,
            simulate: None,
            sweep: None,
        }
    }

    /// Parse by extension: `.json` as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Ranges the analysis routines accept.
    pub fn validate(&self) -> Result<(), ConfigError> {
        range("tol", self.tol, 1e-12, 1e-3, "[1e-12, 1e-3]")?;
        range("region_tol", self.region_tol, 0.0, 1e-3, "[0, 1e-3]")?;
        if let Some(h) = &self.hopf {
            if !(h.delta_hi > h.delta_lo && h.delta_lo > 0.0) {
                return Err(ConfigError::Range {
                    key: "hopf.delta_hi",
                    value: h.delta_hi,
                    range: "(hopf.delta_lo, inf)",
                });
            }
            if h.samples < 2 {
                return Err(ConfigError::Range {
                    key: "hopf.samples",
                    value: h.samples as f64,
                    range: "[2, inf)",
                });
            }
        }
        if let Some(c) = &self.curves {
            if !(c.lambda1_max >= c.lambda1_min) {
                return Err(ConfigError::Range {
                    key: "curves.lambda1_max",
                    value: c.lambda1_max,
                    range: "[curves.lambda1_min, inf)",
                });
            }
            if !(c.lambda2_max > c.lambda2_min) {
                return Err(ConfigError::Range {
                    key: "curves.lambda2_max",
                    value: c.lambda2_max,
                    range: "(curves.lambda2_min, inf)",
                });
            }
        }
        if let Some(s) = &self.simulate {
            range("simulate.t_end", s.t_end, 0.0, f64::MAX, "[0, inf)")?;
            if let Some(c) = &s.cycle {
                range(
                    "simulate.cycle.radius",
                    c.radius,
                    f64::MIN_POSITIVE,
                    f64::MAX,
                    "(0, inf)",
                )?;
            }
        }
        if let Some(s) = &self.sweep {
            if !(s.h_max > s.h_min && s.c_max > s.c_min) {
                return Err(ConfigError::Range {
                    key: "sweep.h_max",
                    value: s.h_max,
                    range: "a non-empty (h, c) box",
                });
            }
        }
        Ok(())
    }
}

fn range(
    key: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    text: &'static str,
) -> Result<(), ConfigError> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(ConfigError::Range {
            key,
            value,
            range: text,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "
params.a = 2
params.b = -2.82
params.c = 0.05
params.eta = 0.1
params.m = 0.8
curves.lambda1_min = 0.0
curves.lambda1_max = 0.03
curves.lambda2_min = -0.03
curves.lambda2_max = 0.0
curves.n = 4
";

    #[test]
    fn dotted_keys() {
        let c = RunConfig::from_toml(TEXT).unwrap();
        assert_eq!(c.params.b, -2.82);
        assert_eq!(c.params.h, None);
        assert_eq!(c.curves.unwrap().n, 4);
        assert_eq!(c.tol, 1e-9);
        assert!(matches!(
            c.params.model(),
            Err(ConfigError::Missing("params.h"))
        ));
    }

    #[test]
    fn round_trips_bit_identically() {
        let mut c = RunConfig::from_toml(TEXT).unwrap();
        c.params.h = Some(0.1715598183 + 0.02);
        c.params.delta = Some(0.1 + 0.2);
        c.simulate = Some(SimulateSection {
            t_end: 1.0 / 3.0,
            seeds: vec![[0.1, 0.7]],
            random: 2,
            random_box: default_box(),
            cycle: Some(CycleSection {
                center: 1,
                radius: 1e-3,
                t_max: 2e5,
            }),
        });
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_key_rejected() {
        let e = RunConfig::from_toml(&format!("{TEXT}params.q = 1\n")).unwrap_err();
        assert!(e.to_string().contains("q"), "{e}");
    }

    #[test]
    fn diagonal_nodes_coincide() {
        let s = SweepSection {
            h_min: 0.0,
            h_max: 1.0,
            c_min: 0.0,
            c_max: 1.0,
            nh: 9,
            nc: 9,
        };
        assert_eq!(s.h_nodes(), s.c_nodes());
        assert!(s.h_nodes().iter().all(|v| *v > 0.0 && *v < 1.0));
    }
}
