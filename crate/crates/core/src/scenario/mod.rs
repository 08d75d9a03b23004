//! Declarative scenarios, the pump–probe protocols, sweeps and tabular
//! output used by the command-line tool.

pub mod config;
pub mod output;
pub mod protocols;
pub mod sweeps;
pub mod units;

pub use config::{full_circle, Axis, Pulse, ScenarioConfig, SpeciesChoice};
pub use output::{Cell, Table};
pub use protocols::{run_protocol_a, run_protocol_b, RunResult, ScanFit};
pub use sweeps::{
    beta_grid, beta_sweep, default_phase_rows, fringe_sweep, phase_table, protocol_b_config, resonance_grid,
    resonance_scan, visibility_deficit, Accumulation, PhaseRow, ResonanceScan,
};
