use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::partition_cost;
use crate::partition::{build_partitioning, export_partitioning, PartitionKind};
use crate::simulator::{compare_predictions, simulate_estimator};
use crate::spectral::ground_state;

use super::config::ValidatedConfig;

#[derive(Clone, Debug, Serialize)]
pub struct SimulationRow {
    pub point: usize,
    pub value: Option<f64>,
    pub partition: String,
    pub shots: u64,
    pub allocation: String,
    pub trials: usize,
    pub exact_energy: f64,
    pub mean_estimate: f64,
    pub empirical_stderr: f64,
    pub predicted_stderr: f64,
    pub z: Option<f64>,
}

/// Writes `hamiltonian.txt` for the first grid point and one `partitions/<label>/` directory
/// per requested partitioning.
pub fn export_hamiltonian(v: &ValidatedConfig) -> Result<Vec<PathBuf>> {
    let out = &v.config.output;
    std::fs::create_dir_all(out)?;
    let model = v.model_at(0)?;
    let h = out.join("hamiltonian.txt");
    std::fs::write(&h, model.hamiltonian.to_text())?;
    let mut written = vec![h];
    for &k in &v.kinds {
        let p = build_partitioning(&model, k)?;
        let dir = out.join("partitions").join(k.label());
        export_partitioning(&p, &dir)?;
        written.push(dir);
    }
    Ok(written)
}

/// Runs the shot simulator on the ground state at every grid point and writes
/// `simulation.csv`.
pub fn run_simulate(v: &ValidatedConfig) -> Result<Vec<SimulationRow>> {
    let sim = v
        .config
        .simulate
        .as_ref()
        .ok_or_else(|| Error::Config("the simulate command needs a `simulate` section".into()))?;
    let mut rows = Vec::new();
    for i in 0..v.grid.len() {
        let model = v.model_at(i)?;
        let sol = ground_state(&model.hamiltonian, 2)?;
        let psi = sol.ground();
        for &k in &v.kinds {
            if k == PartitionKind::EigenbasisWhole {
                continue;
            }
            let p = build_partitioning(&model, k)?;
            let run = simulate_estimator(&p, psi, sim.shots, sim.allocation.clone(), v.point_seed(i), sim.trials)?;
            let cost = crate::simulator::allocation_variance(&run);
            let z = match sim.allocation {
                crate::simulator::AllocationMode::Optimal => {
                    compare_predictions(&run, partition_cost(&p, psi)?, sim.shots).ok().map(|z| z.z)
                }
                crate::simulator::AllocationMode::Uniform => None,
            };
            rows.push(SimulationRow {
                point: i,
                value: v.parameter.as_ref().map(|_| v.grid[i]),
                partition: k.label(),
                shots: sim.shots,
                allocation: sim.allocation.label().into(),
                trials: sim.trials,
                exact_energy: run.exact,
                mean_estimate: run.mean_estimate,
                empirical_stderr: run.empirical_stderr,
                predicted_stderr: cost.sqrt(),
                z,
            });
        }
    }
    let out = &v.config.output;
    std::fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("simulation.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}
