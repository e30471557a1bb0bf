//! Configuration-driven runs behind the command line: parameter scans, shot simulation,
//! Hamiltonian export and the verification suite.

mod config;
mod scan;
mod simulate;
pub mod verify;

pub use config::{
    load_config, memory_estimate, ExperimentConfig, LatticeConfig, ScanConfig, SimulateConfig, ValidatedConfig,
    DESK_MAX_QUBITS, SCAN_MAX_QUBITS,
};
pub use scan::{run_scan, scan_point, PointTiming, ScanManifest, ScanOutput, ScanRow};
pub use simulate::{export_hamiltonian, run_simulate, SimulationRow};
pub use verify::{run_verify, CheckResult, VerifyOptions, VerifyReport, VerifySize};
