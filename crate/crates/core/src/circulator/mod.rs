//! Reference switched-capacitor circulators and their analyses: BFSK clock
//! sets, netlist builders, S-parameter sweeps, figures of merit, port spectra
//! and rotating-mode decomposition.

mod build;
mod config;
mod metrics;
mod modes;
mod sweep;

pub use build::{build_circulator, PORT_LABELS};
pub use config::{
    make_bfsk_clocks, CirculatorConfig, Modulation, Rotation, Topology, DEFAULT_RON_COFF,
    DEFAULT_R_ON,
};
pub use metrics::{
    center_dip, extract_metrics, find_dip, linear_fit_deviation, loss_db, point_metrics,
    unwrap_phase, DipPoint, MetricsRecord, IX_THRESHOLD_DB,
};
pub use modes::{
    cyclic_violation, eigen_decompose, fundamental_admittance, mode_splitting, port_currents,
    rotating_modes, EigenDecomposition, ModeSplitting, RotatingModes,
};
pub use sweep::{
    lands_on_dc, linspace, port_spectrum, probe_grid, solve_at, sweep_frequencies, sweep_sparams,
    PortSpectrum, SParamSet, SpectrumLine, SweepSettings, DC_NUDGE,
};
