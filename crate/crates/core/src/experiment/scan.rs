use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Model;
use crate::metrics::{eigenstate_improvement, partition_cost, Hypotheses, ImprovementReport};
use crate::partition::{build_partitioning, PartitionKind, Partitioning};
use crate::perturbed::{
    corollary3_bounds, ensemble_complexity, frobenius_criterion, monte_carlo_variances, noise_stats,
    operator_noise_stats, regime_classify, NoiseConfig, Regime,
};
use crate::simulator::{compare_predictions, simulate_estimator};
use crate::spectral::{expectation, ground_state, EigenSolution};

use super::config::{SimulateConfig, ValidatedConfig};

/// One CSV row: a grid point seen through one partitioning.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ScanRow {
    pub point: usize,
    pub parameter: String,
    pub value: Option<f64>,
    pub model: String,
    pub nx: usize,
    pub ny: usize,
    pub layers: usize,
    pub n_qubits: usize,
    pub status: String,
    pub message: String,
    pub energy: Option<f64>,
    pub gap: Option<f64>,
    pub degenerate: Option<bool>,
    pub number_expectation: Option<f64>,
    pub partition: String,
    pub n_parts: Option<usize>,
    pub cost: Option<f64>,
    pub pauli_cost: Option<f64>,
    pub g: Option<f64>,
    pub bound: Option<f64>,
    pub bound_appendix: Option<f64>,
    pub cor_cut: Option<f64>,
    pub hypotheses: Option<String>,
    pub diverging: Option<bool>,
    pub frobenius_g: Option<f64>,
    pub epsilon: Option<f64>,
    pub g_bar: Option<f64>,
    pub g_bar_lower: Option<f64>,
    pub g_bar_upper: Option<f64>,
    pub regime: Option<String>,
    pub mc_g_bar: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub sim_shots: Option<u64>,
    pub sim_trials: Option<usize>,
    pub sim_allocation: Option<String>,
    pub sim_mean_estimate: Option<f64>,
    pub sim_empirical_stderr: Option<f64>,
    pub sim_predicted_stderr: Option<f64>,
    pub sim_z: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointTiming {
    pub point: usize,
    pub seed: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanManifest {
    pub version: &'static str,
    pub command: String,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    pub seed: u64,
    pub threads: usize,
    pub config: super::config::ExperimentConfig,
    pub files: Vec<String>,
    pub points: Vec<PointTiming>,
}

#[derive(Clone, Debug)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    pub files: Vec<PathBuf>,
    pub manifest: ScanManifest,
}

fn hypotheses_name(h: Hypotheses) -> String {
    match h {
        Hypotheses::Met => "met",
        Hypotheses::Degenerate => "degenerate",
        Hypotheses::NotTranslationInvariant => "not_translation_invariant",
        Hypotheses::NotApplicable => "not_applicable",
    }
    .into()
}

fn regime_name(r: Regime) -> String {
    match r {
        Regime::I => "I",
        Regime::II => "II",
        Regime::III => "III",
    }
    .into()
}

fn base_row(v: &ValidatedConfig, i: usize, model: Option<&Model>, label: &str) -> ScanRow {
    let l = &v.config.lattice;
    ScanRow {
        point: i,
        parameter: v.parameter.clone().unwrap_or_default(),
        value: v.parameter.as_ref().map(|_| v.grid[i]),
        model: model.map_or_else(|| v.config.model.describe(), |m| m.config.describe()),
        nx: l.nx,
        ny: l.ny,
        layers: l.layers,
        n_qubits: v.n_qubits(),
        status: "ok".into(),
        partition: label.into(),
        ..Default::default()
    }
}

fn noise_columns(
    row: &mut ScanRow,
    noise: &NoiseConfig,
    model: &Model,
    pauli: &Partitioning,
    p: &Partitioning,
    sol: &EigenSolution,
    seed: u64,
) -> Result<()> {
    let psi = sol.ground();
    let d = (1u64 << model.n_qubits()) as f64;
    let eps = noise.epsilon;
    let sp = noise_stats(pauli, psi)?;
    let sb = noise_stats(p, psi)?;
    let h = operator_noise_stats(&model.hamiltonian, psi, "h")?;
    row.epsilon = Some(eps);
    row.g_bar = Some(ensemble_complexity(&sp, &sb, eps, d, noise.truncate)?.g);
    if p.kind().is_geometric() && p.len() == 2 && pauli.len() == 2 && eps > 0.0 && eps < 1.0 {
        if let Ok(b) = corollary3_bounds(&sp, &sb, &h, eps) {
            row.g_bar_lower = Some(b.lower);
            row.g_bar_upper = Some(b.upper);
        }
    }
    if let Ok(r) = regime_classify(eps, &sb[0], &h) {
        row.regime = Some(regime_name(r.regime));
    }
    if noise.samples >= 2 {
        let ops: Vec<_> = pauli.parts().iter().chain(p.parts()).cloned().collect();
        let cfg = NoiseConfig { seed, ..noise.clone() };
        let run = monte_carlo_variances(&ops, psi, &cfg)?;
        let num: Vec<usize> = (0..pauli.len()).collect();
        let den: Vec<usize> = (pauli.len()..ops.len()).collect();
        let est = run.complexity(&num, &den)?;
        row.mc_g_bar = Some(est.mean);
        row.mc_stderr = Some(est.stderr);
    }
    Ok(())
}

fn simulation_columns(row: &mut ScanRow, sim: &SimulateConfig, p: &Partitioning, sol: &EigenSolution, seed: u64) -> Result<()> {
    let psi = sol.ground();
    let run = simulate_estimator(p, psi, sim.shots, sim.allocation.clone(), seed, sim.trials)?;
    row.sim_shots = Some(sim.shots);
    row.sim_trials = Some(sim.trials);
    row.sim_allocation = Some(sim.allocation.label().into());
    row.sim_mean_estimate = Some(run.mean_estimate);
    row.sim_empirical_stderr = Some(run.empirical_stderr);
    if let Ok(z) = compare_predictions(&run, partition_cost(p, psi)?, sim.shots) {
        row.sim_predicted_stderr = Some(z.predicted_variance.sqrt());
        row.sim_z = Some(z.z);
    }
    Ok(())
}

fn partition_row(
    v: &ValidatedConfig,
    i: usize,
    model: &Model,
    sol: &EigenSolution,
    pauli: &Partitioning,
    kind: PartitionKind,
    number: Option<f64>,
) -> ScanRow {
    let mut row = base_row(v, i, Some(model), &kind.label());
    row.energy = Some(sol.ground_energy());
    row.gap = sol.gap;
    row.degenerate = Some(sol.degenerate);
    row.number_expectation = number;
    let seed = v.point_seed(i);
    let result = (|| -> Result<()> {
        let p = if kind == PartitionKind::PauliBaseline {
            pauli.clone()
        } else {
            build_partitioning(model, kind)?
        };
        row.n_parts = Some(p.len());
        let report: ImprovementReport = eigenstate_improvement(model, pauli, &p, sol)?;
        row.cost = Some(report.cost_denominator);
        row.pauli_cost = Some(report.cost_numerator);
        row.g = Some(report.g);
        row.bound = report.bound;
        row.bound_appendix = report.bound_appendix;
        row.cor_cut = report.cor_cut;
        row.hypotheses = Some(hypotheses_name(report.hypotheses));
        row.diverging = Some(report.diverging);
        row.frobenius_g = frobenius_criterion(pauli, &p).ok();
        if let Some(noise) = &v.config.noise {
            noise_columns(&mut row, noise, model, pauli, &p, sol, seed)?;
        }
        if let Some(sim) = &v.config.simulate {
            simulation_columns(&mut row, sim, &p, sol, seed)?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.status = match e {
            Error::Undefined(_) => "undefined",
            Error::Solver(_) => "solver_failed",
            _ => "error",
        }
        .into();
        row.message = e.to_string();
    }
    row
}

/// Rows for one grid point, in partitioning order.
pub fn scan_point(v: &ValidatedConfig, i: usize) -> Vec<ScanRow> {
    let fail = |status: &str, msg: String, model: Option<&Model>| -> Vec<ScanRow> {
        v.kinds
            .iter()
            .map(|k| {
                let mut r = base_row(v, i, model, &k.label());
                r.status = status.into();
                r.message = msg.clone();
                r
            })
            .collect()
    };
    let model = match v.model_at(i) {
        Ok(m) => m,
        Err(e) => return fail("error", e.to_string(), None),
    };
    let sol = match ground_state(&model.hamiltonian, 2) {
        Ok(s) => s,
        Err(e) => return fail("solver_failed", e.to_string(), Some(&model)),
    };
    let pauli = match build_partitioning(&model, PartitionKind::PauliBaseline) {
        Ok(p) => p,
        Err(e) => return fail("error", e.to_string(), Some(&model)),
    };
    let number = model
        .number_operator()
        .ok()
        .flatten()
        .and_then(|n| expectation(&n, sol.ground()).ok());
    v.kinds
        .iter()
        .map(|&k| partition_row(v, i, &model, &sol, &pauli, k, number))
        .collect()
}

pub fn write_rows(path: &Path, rows: &[&ScanRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(csv_header())?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_header() -> Vec<String> {
    let v = serde_json::to_value(ScanRow::default()).expect("row serializes");
    v.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default()
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Evaluates every grid point in parallel and writes `<label>.csv` per partitioning,
/// `combined.csv` and `manifest.json` into the configured output directory.
pub fn run_scan(v: &ValidatedConfig) -> Result<ScanOutput> {
    let started = Instant::now();
    let started_unix = unix_now();
    let per_point: Vec<(Vec<ScanRow>, f64)> = (0..v.grid.len())
        .into_par_iter()
        .map(|i| {
            let t = Instant::now();
            let rows = scan_point(v, i);
            (rows, t.elapsed().as_secs_f64())
        })
        .collect();
    let out = &v.config.output;
    std::fs::create_dir_all(out)?;
    let rows: Vec<ScanRow> = per_point.iter().flat_map(|(r, _)| r.clone()).collect();
    let mut files = Vec::new();
    for k in &v.kinds {
        let label = k.label();
        let path = out.join(format!("{label}.csv"));
        write_rows(&path, &rows.iter().filter(|r| r.partition == label).collect::<Vec<_>>())?;
        files.push(path);
    }
    let combined = out.join("combined.csv");
    write_rows(&combined, &rows.iter().collect::<Vec<_>>())?;
    files.push(combined);
    let manifest = ScanManifest {
        version: env!("CARGO_PKG_VERSION"),
        command: "scan".into(),
        started_unix,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        seed: v.config.seed,
        threads: rayon::current_num_threads(),
        config: v.config.clone(),
        files: files
            .iter()
            .map(|f| f.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
        points: per_point
            .iter()
            .enumerate()
            .map(|(i, (_, s))| PointTiming {
                point: i,
                seed: v.point_seed(i),
                seconds: *s,
            })
            .collect(),
    };
    let mpath = out.join("manifest.json");
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)?)?;
    files.push(mpath);
    Ok(ScanOutput { rows, files, manifest })
}

#[cfg(test)]
mod tests {
    use super::super::config::ExperimentConfig;
    use super::*;

    fn config(dir: &Path) -> ValidatedConfig {
        let v = serde_json::json!({
            "model": {"model": "tfim", "j": 1.0, "h": 1.0},
            "lattice": {"nx": 3, "ny": 2},
            "partitionings": ["pauli", "geo1d:1"],
            "scan": {"parameter": "j", "values": [0.5, 1.0, 2.0]},
            "noise": {"epsilon": 0.1, "samples": 50},
            "simulate": {"shots": 200, "trials": 30},
            "output": dir,
            "seed": 3
        });
        serde_json::from_value::<ExperimentConfig>(v).unwrap().validate(false).unwrap()
    }

    #[test]
    fn scan_writes_deterministic_files() {
        let dir = tempfile::tempdir().unwrap();
        let v = config(dir.path());
        let out = run_scan(&v).unwrap();
        assert_eq!(out.rows.len(), 6);
        assert!(out.rows.iter().all(|r| r.status == "ok"), "{:?}", out.rows);
        let first = std::fs::read_to_string(dir.path().join("geo1d_l1.csv")).unwrap();
        let combined = std::fs::read_to_string(dir.path().join("combined.csv")).unwrap();
        assert_eq!(combined.lines().count(), 7);
        run_scan(&v).unwrap();
        assert_eq!(first, std::fs::read_to_string(dir.path().join("geo1d_l1.csv")).unwrap());
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["points"].as_array().unwrap().len(), 3);
        let pauli_rows: Vec<_> = out.rows.iter().filter(|r| r.partition == "pauli").collect();
        assert!(pauli_rows.iter().all(|r| (r.g.unwrap() - 1.0).abs() < 1e-12));
    }
}
