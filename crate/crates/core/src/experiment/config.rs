use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_lattice, Lattice, Model, ModelConfig};
use crate::partition::{build_partitioning, PartitionKind};
use crate::perturbed::NoiseConfig;
use crate::simulator::AllocationMode;

/// Above this many qubits a run needs the `--large` acknowledgment.
pub const DESK_MAX_QUBITS: usize = 16;
/// Hard ceiling for scans.
pub const SCAN_MAX_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(default = "yes")]
    pub periodic: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// Grid for one model parameter: explicit `values`, or `points` between `start` and `stop`
/// (geometrically spaced with `log`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub parameter: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub log: bool,
}

impl ScanConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let grid = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(k)) => {
                if k == 0 {
                    return Err(Error::Config("scan needs at least one point".into()));
                }
                if self.log && !(a > 0.0 && b > 0.0) {
                    return Err(Error::Config("log-spaced scans need positive end points".into()));
                }
                (0..k)
                    .map(|i| {
                        let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                        if self.log {
                            (a.ln() + t * (b.ln() - a.ln())).exp()
                        } else {
                            a + t * (b - a)
                        }
                    })
                    .collect()
            }
            _ => {
                return Err(Error::Config(
                    "scan takes either `values` or all of `start`, `stop`, `points`".into(),
                ))
            }
        };
        if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("scan grid must be nonempty and finite".into()));
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub shots: u64,
    pub trials: usize,
    #[serde(default = "optimal")]
    pub allocation: AllocationMode,
}

fn optimal() -> AllocationMode {
    AllocationMode::Optimal
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub lattice: LatticeConfig,
    #[serde(default = "default_kinds")]
    pub partitionings: Vec<String>,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_kinds() -> Vec<String> {
    vec!["pauli".into(), "geo1d:1".into()]
}

/// A configuration that passed every check that does not need a ground state.
#[derive(Clone, Debug)]
pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub lattice: Lattice,
    /// Always starts with the Pauli baseline, which every other kind is compared against.
    pub kinds: Vec<PartitionKind>,
    pub parameter: Option<String>,
    pub grid: Vec<f64>,
}

impl ValidatedConfig {
    pub fn n_qubits(&self) -> usize {
        self.lattice.n_sites()
    }

    /// Model at grid point `i`.
    pub fn model_at(&self, i: usize) -> Result<Model> {
        let mut m = self.config.model;
        if let Some(p) = &self.parameter {
            m.set(p, self.grid[i])?;
        }
        m.build(&self.lattice)
    }

    /// Deterministic per-point seed.
    pub fn point_seed(&self, i: usize) -> u64 {
        self.config.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Memory for two statevectors plus a Krylov workspace of comparable size, in bytes.
pub fn memory_estimate(n_qubits: usize) -> f64 {
    let vec = 16.0 * (1u64 << n_qubits) as f64;
    2.0 * vec + 2.0 * vec
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    /// Checks the lattice, scan, partitioning preconditions at every grid point, noise and
    /// simulation settings. Every failure is a [`Error::Config`].
    pub fn validate(&self, large: bool) -> Result<ValidatedConfig> {
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let l = &self.lattice;
        let lattice = build_lattice(l.nx, l.ny, l.layers, l.periodic).map_err(cfg)?;
        let n = lattice.n_sites();
        if n > SCAN_MAX_QUBITS {
            return Err(Error::Config(format!("{n} qubits exceeds the scan limit of {SCAN_MAX_QUBITS}")));
        }
        if n > DESK_MAX_QUBITS && !large {
            return Err(Error::Config(format!(
                "{n} qubits needs --large (about {:.2} GB for statevectors and solver workspace)",
                memory_estimate(n) / 1e9
            )));
        }
        let (parameter, grid) = match &self.scan {
            Some(s) => {
                if self.model.get(&s.parameter).is_none() {
                    let known: Vec<&str> = self.model.parameters().iter().map(|(k, _)| *k).collect();
                    return Err(Error::Config(format!(
                        "model {} has no parameter {:?}; expected one of {known:?}",
                        self.model.tag().name(),
                        s.parameter
                    )));
                }
                (Some(s.parameter.clone()), s.grid()?)
            }
            None => (None, vec![f64::NAN]),
        };
        let mut kinds = vec![PartitionKind::PauliBaseline];
        for k in &self.partitionings {
            let kind: PartitionKind = k.parse().map_err(cfg)?;
            if !kinds.contains(&kind) {
                kinds.push(kind);
            }
        }
        if let Some(noise) = &self.noise {
            noise.validate().map_err(cfg)?;
        }
        if let Some(sim) = &self.simulate {
            if sim.trials < 2 {
                return Err(Error::Config("simulation needs at least 2 trials".into()));
            }
        }
        let v = ValidatedConfig {
            config: self.clone(),
            lattice,
            kinds,
            parameter,
            grid,
        };
        for i in 0..v.grid.len() {
            let model = v.model_at(i).map_err(cfg)?;
            for &kind in &v.kinds {
                let p = build_partitioning(&model, kind).map_err(|e| {
                    Error::Config(format!("{kind} at grid point {i}: {e}"))
                })?;
                if let Some(sim) = &self.simulate {
                    if sim.shots < p.len() as u64 {
                        return Err(Error::Config(format!(
                            "{} shots cannot cover the {} parts of {kind}",
                            sim.shots,
                            p.len()
                        )));
                    }
                }
            }
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "model": {"model": "tfim", "j": 1.0, "h": 1.0},
            "lattice": {"nx": 4, "ny": 3},
            "partitionings": ["pauli", "geo1d:2"],
            "scan": {"parameter": "j", "start": 0.5, "stop": 2.0, "points": 4},
            "output": "out"
        })
    }

    fn parse(v: serde_json::Value) -> Result<ValidatedConfig> {
        let c: ExperimentConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        c.validate(false)
    }

    #[test]
    fn accepts_base() {
        let v = parse(base()).unwrap();
        assert_eq!(v.grid, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(v.kinds.len(), 2);
        assert_eq!(v.model_at(1).unwrap().config.get("j"), Some(1.0));
    }

    #[test]
    fn log_grid() {
        let s = ScanConfig {
            parameter: "j".into(),
            values: None,
            start: Some(0.01),
            stop: Some(100.0),
            points: Some(5),
            log: true,
        };
        let g = s.grid().unwrap();
        for (a, b) in g.iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn rejects_unknown_parameter() {
        let mut v = base();
        v["scan"]["parameter"] = "kappa".into();
        let e = parse(v).unwrap_err().to_string();
        assert!(e.contains("kappa"), "{e}");
    }

    #[test]
    fn rejects_divisibility() {
        let mut v = base();
        v["partitionings"] = serde_json::json!(["geo1d:3"]);
        let e = parse(v).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn rejects_range_and_layers() {
        let mut v = base();
        v["model"] = serde_json::json!({"model": "bnnni", "j": 1.0, "kappa": 0.3, "h": 1.0});
        v["partitionings"] = serde_json::json!(["geo1d:2"]);
        assert!(parse(v).is_err());
        let mut v = base();
        v["model"] = serde_json::json!({"model": "hubbard", "t": 1.0, "u": 1.0, "mu": 0.0});
        v["scan"] = serde_json::Value::Null;
        assert!(parse(v).unwrap_err().to_string().contains("two-layer"));
    }

    #[test]
    fn large_gate() {
        let mut v = base();
        v["lattice"] = serde_json::json!({"nx": 6, "ny": 4});
        let e = parse(v.clone()).unwrap_err().to_string();
        assert!(e.contains("--large") && e.contains("GB"), "{e}");
        let c: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(c.validate(true).is_ok());
    }

    #[test]
    fn rejects_unknown_fields() {
        let mut v = base();
        v["bogus"] = 1.into();
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }
}
