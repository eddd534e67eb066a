//! Simulation and analysis library for the graph-embedded hazard model (GEHM):
//! a coupled system of nonlinear p-Laplacian diffusion on a weighted graph and a
//! scalar Ornstein-Uhlenbeck drift process feeding the node-level reaction term.
//!
//! The crate is organized along the model's pipeline:
//!
//! * [`graph`] — weighted graph storage, random generators (Barabási–Albert,
//!   Erdős–Rényi, Watts–Strogatz), weight normalization, edge-list file I/O;
//! * [`operators`] — discrete gradient/divergence, the graph p-Laplacian,
//!   reaction terms, and state-dependent noise amplitudes;
//! * [`spectral`] — the dual-exponent nonlinear eigenpair iteration, spectral
//!   radius (graph amplification factor Γ), and the regime index
//!   R = C_F − λ_p + Γ;
//! * [`dynamics`] — explicit Euler / Euler–Maruyama time stepping, trajectory
//!   recording, blow-up detection, and the closed-form blow-up time;
//! * [`diagnostics`] — p-Dirichlet energy, energy-dissipation residuals, regime
//!   classification, node event extraction, and survival estimators;
//! * [`experiment`] — config files, seeded replicate ensembles, regime scans,
//!   parameter sweeps, topology comparisons, and deterministic output writing.
//!
//! All randomness is derived from a single master seed through labeled
//! substreams (see [`rng`]), so every result in this crate is reproducible
//! bit-for-bit, independent of thread count.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod operators;
pub mod rng;
pub mod spectral;

pub use diagnostics::{
    amplification_functional, classify_regime, dissipation_residual, energy_p,
    estimate_survival, extract_event_times, grad_norm_p, CrossingDirection, DissipationReport,
    DissipationSample, EventRow, EventStatus, EventTable, Regime, RegimeEvidence, RegimeReport,
    SurvivalCurve, SurvivalEstimator,
};
pub use dynamics::{
    detect_blowup, ou_stationary_variance, predicted_blowup_time, simulate, step, BlowupFit,
    InitialCondition, NoiseCoupling, NoiseStreams, OuParams, RunStatus, SimulationConfig,
    Snapshot, SystemState, Trajectory,
};
pub use error::GehmError;
pub use experiment::{
    monte_carlo_regimes, parameter_sweep, run_experiment, topology_comparison,
    write_outputs, write_topology_table, EnsembleSummary, ExperimentConfig, ExperimentResult,
    GraphConfig, OutputConfig, RegimeScan, RegimeScanRow, ReplicateOutcome, SpectralConfig,
    SweepAxis, SweepCell, SweepConfig, SweepResult, TopologyRow,
};
pub use graph::{
    generate, load_graph, read_graph, save_graph, validate_spec, write_graph, GraphModel,
    GraphModelSpec, Normalization, WeightedGraph,
};
pub use operators::{
    accretive_p_laplacian, discrete_gradient, divergence, noise_coefficients, p_laplacian,
    reaction_term, EdgeField, NoiseSpec, ReactionSpec, ScalarMap,
};
pub use spectral::{
    nonlinear_eigenpair, rayleigh_quotient_p, regime_index, spectral_radius, EigenpairEstimate,
    GammaBasis, RadiusEstimate, SpectralEstimate,
};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, GehmError>;
