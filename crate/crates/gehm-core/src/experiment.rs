//! Declarative experiment configs, seeded replicate ensembles, regime scans,
//! parameter sweeps, topology comparisons, and deterministic file output.
//!
//! An experiment is described by one versioned TOML file (`config_version = 1`)
//! holding the graph spec, the simulation parameters, the spectral-solver
//! settings, and the output options. One master seed (`sim.seed`) drives
//! everything: replicate k simulates with seed `master + k`, and the graph,
//! noise, and iteration starting points each consume their own labeled
//! substream, so reruns are byte-identical regardless of worker count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    extract_event_times, CrossingDirection, Regime, RegimeEvidence, RegimeReport,
};
use crate::dynamics::{
    detect_blowup, simulate, RunStatus, SimulationConfig, Trajectory,
};
use crate::error::GehmError;
use crate::graph::{
    generate, validate_spec, GraphModel, GraphModelSpec, Normalization, WeightedGraph,
};
use crate::operators::ReactionSpec;
use crate::spectral::{
    nonlinear_eigenpair, regime_index, spectral_radius, GammaBasis, RadiusEstimate,
    SpectralEstimate,
};

type Result<T> = std::result::Result<T, GehmError>;

/// Reference spectral values (λ_p, Γ) shipped with the library for the three
/// topology families at n = 2000 and matched mean degree. Orientation only —
/// not a fitting target, and not reproducible from any single gamma basis.
const REFERENCE_SPECTRA: [(&str, f64, f64); 3] = [
    ("barabasi_albert", 0.41, 1.87),
    ("erdos_renyi", 0.73, 0.64),
    ("watts_strogatz", 0.68, 0.91),
];

fn default_normalization() -> Normalization {
    Normalization::Row
}

/// Graph section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub model: GraphModel,
    pub n: usize,
    /// Generation seed; defaults to the master seed (`sim.seed`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
}

/// Spectral-solver section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    /// Exponent for the nonlinear eigenvalue; defaults to `sim.p`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Basis the regime index's Γ is taken from (both are always computed).
    pub gamma_basis: GammaBasis,
    /// Half-width of the critical band for regime classification.
    pub delta_band: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            p: None,
            tol: 1e-10,
            max_iter: 10_000,
            gamma_basis: GammaBasis::NormalizedW,
            delta_band: 0.05,
        }
    }
}

/// Output section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub write_trajectories: bool,
    pub write_snapshots: bool,
    /// Node-level event definition used for survival summaries.
    pub event_threshold: f64,
    pub event_direction: CrossingDirection,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("gehm-out"),
            write_trajectories: true,
            write_snapshots: true,
            event_threshold: 1.0,
            event_direction: CrossingDirection::Above,
        }
    }
}

/// One sweep axis: a dotted path into the config tree plus its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// e.g. `"sim.reaction.linear.c_f"` or `"sim.noise.additive.sigma"`.
    pub path: String,
    pub grid: Vec<f64>,
}

/// Optional sweep section: one or two axes over numeric config fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param_x: SweepAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_y: Option<SweepAxis>,
}

fn default_replicates() -> usize {
    100
}

/// Fully resolved experiment description (TOML, `config_version = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub config_version: u32,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub graph: GraphConfig,
    #[serde(default)]
    pub sim: SimulationConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    /// Parse a TOML string. Unknown keys are rejected at parse time.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| {
            let line = e
                .span()
                .map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            GehmError::Parse {
                line,
                message: e.message().to_string(),
            }
        })
    }

    /// Read and parse a config file.
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let src = fs::read_to_string(path)?;
        Self::from_toml_str(&src)
    }

    /// The master seed every replicate and substream derives from.
    pub fn master_seed(&self) -> u64 {
        self.sim.seed
    }

    /// Graph spec with the seed default resolved.
    pub fn resolved_graph_spec(&self) -> GraphModelSpec {
        GraphModelSpec {
            model: self.graph.model,
            n: self.graph.n,
            seed: self.graph.seed.unwrap_or(self.sim.seed),
        }
    }

    /// Exponent the spectral solver runs at.
    pub fn spectral_p(&self) -> f64 {
        self.spectral.p.unwrap_or(self.sim.p)
    }

    /// Validate the whole config, reporting every problem at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.config_version != 1 {
            issues.push(format!(
                "unsupported config_version {} (this library reads version 1)",
                self.config_version
            ));
        }
        if self.replicates == 0 {
            issues.push("replicates must be at least 1".into());
        }
        if let Err(e) = validate_spec(&self.resolved_graph_spec()) {
            issues.push(e.to_string());
        }
        issues.extend(crate::dynamics::config_issues(&self.sim, 0.0));
        if let Some(p) = self.spectral.p {
            if !p.is_finite() || p <= 1.0 {
                issues.push(format!("spectral.p must exceed 1, got {p}"));
            }
        }
        if !self.spectral.tol.is_finite() || self.spectral.tol <= 0.0 {
            issues.push(format!(
                "spectral.tol must be positive, got {}",
                self.spectral.tol
            ));
        }
        if self.spectral.max_iter == 0 {
            issues.push("spectral.max_iter must be at least 1".into());
        }
        if !self.spectral.delta_band.is_finite() || self.spectral.delta_band < 0.0 {
            issues.push(format!(
                "spectral.delta_band must be nonnegative, got {}",
                self.spectral.delta_band
            ));
        }
        if self.outputs.dir.as_os_str().is_empty() {
            issues.push("outputs.dir must not be empty".into());
        }
        if !self.outputs.event_threshold.is_finite() {
            issues.push(format!(
                "outputs.event_threshold must be finite, got {}",
                self.outputs.event_threshold
            ));
        }
        if let Some(sweep) = &self.sweep {
            let mut axes = vec![("param_x", &sweep.param_x)];
            if let Some(y) = &sweep.param_y {
                axes.push(("param_y", y));
            }
            for (name, axis) in axes {
                if axis.grid.is_empty() {
                    issues.push(format!("sweep.{name}.grid must not be empty"));
                    continue;
                }
                if axis.grid.iter().any(|v| !v.is_finite()) {
                    issues.push(format!("sweep.{name}.grid must contain only finite values"));
                    continue;
                }
                if let Err(e) = apply_path(self, &axis.path, axis.grid[0]) {
                    issues.push(format!("sweep.{name}: {e}"));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(GehmError::Config { issues })
        }
    }
}

/// Set one numeric field addressed by a dotted path, returning the modified
/// config. Paths touching any `seed` field are rejected: seeds vary only by
/// replicate.
fn apply_path(cfg: &ExperimentConfig, path: &str, value: f64) -> Result<ExperimentConfig> {
    let segments: Vec<&str> = path.split('.').collect();
    if path.is_empty() || segments.iter().any(|s| s.is_empty()) {
        return Err(GehmError::Validation(format!(
            "sweep path '{path}' is malformed"
        )));
    }
    if segments.iter().any(|s| *s == "seed") {
        return Err(GehmError::Validation(format!(
            "sweep path '{path}' touches a seed field; seeds vary only by replicate"
        )));
    }
    let mut tree = toml::Value::try_from(cfg)
        .map_err(|e| GehmError::Validation(format!("config could not be serialized: {e}")))?;
    {
        let mut node = &mut tree;
        for seg in &segments[..segments.len() - 1] {
            node = node
                .as_table_mut()
                .and_then(|t| t.get_mut(*seg))
                .ok_or_else(|| {
                    GehmError::Validation(format!(
                        "sweep path '{path}' does not resolve: no table entry '{seg}'"
                    ))
                })?;
        }
        let leaf_key = segments[segments.len() - 1];
        let leaf = node
            .as_table_mut()
            .and_then(|t| t.get_mut(leaf_key))
            .ok_or_else(|| {
                GehmError::Validation(format!(
                    "sweep path '{path}' does not resolve: no field '{leaf_key}'"
                ))
            })?;
        match leaf {
            toml::Value::Float(f) => *f = value,
            toml::Value::Integer(i) => {
                if value.is_finite() && value.fract() == 0.0 && value.abs() <= i64::MAX as f64 {
                    *i = value as i64;
                } else {
                    return Err(GehmError::Validation(format!(
                        "sweep path '{path}' targets an integer field; grid value {value} is not an integer"
                    )));
                }
            }
            _ => {
                return Err(GehmError::Validation(format!(
                    "sweep path '{path}' does not point at a numeric field"
                )))
            }
        }
    }
    tree.try_into()
        .map_err(|e| GehmError::Validation(format!("swept config is invalid: {e}")))
}

/// Per-replicate record as written to `status.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    /// 1-based replicate index.
    pub replicate: usize,
    /// Simulation seed (`master + replicate`).
    pub seed: u64,
    pub status: RunStatus,
    pub rows: usize,
    pub final_t: f64,
    pub final_l2_norm_sq: f64,
    pub final_energy_p: f64,
    /// Fitted exponential rate of ‖u‖₂², when the fit had enough data.
    pub fitted_rate: Option<f64>,
    pub t_star: Option<f64>,
    /// Restricted mean event time over nodes (censored at the final
    /// snapshot); requires snapshots.
    pub mean_event_time: Option<f64>,
}

/// Ensemble statistics over all replicates, on matched time grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub replicates: usize,
    /// Longest recorded time grid; per-time statistics at index j average the
    /// replicates still recording at that time (`n_alive[j]` of them).
    pub times: Vec<f64>,
    pub n_alive: Vec<usize>,
    pub mean_l2_norm_sq: Vec<f64>,
    pub var_l2_norm_sq: Vec<f64>,
    pub mean_energy_p: Vec<f64>,
    pub var_energy_p: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub var_x: Vec<f64>,
    pub blowup_fraction: f64,
    /// Mean numerical divergence time among exploded replicates.
    pub mean_t_star: Option<f64>,
    /// Mean of per-replicate restricted mean event times.
    pub mean_event_time: Option<f64>,
    /// Pooled drift statistics over t ≥ horizon/10 (the stationary tail).
    pub x_tail_mean: Option<f64>,
    pub x_tail_var: Option<f64>,
    pub lambda_p: f64,
    pub gamma_raw_adjacency: f64,
    pub gamma_normalized_w: f64,
    pub regime: RegimeReport,
}

/// Everything `run_experiment` produced, files aside.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub graph: WeightedGraph,
    /// Eigenpair plus the Γ the config's basis selects.
    pub spectral: SpectralEstimate,
    pub gamma_raw: RadiusEstimate,
    pub gamma_normalized: RadiusEstimate,
    pub trajectories: Vec<Trajectory>,
    pub outcomes: Vec<ReplicateOutcome>,
    pub summary: EnsembleSummary,
}

/// One C_F grid point of a regime scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeScanRow {
    pub c_f: f64,
    pub r: f64,
    pub regime: Regime,
    pub blowup_fraction: f64,
    pub mean_fitted_rate: Option<f64>,
    pub mean_t_star: Option<f64>,
}

/// Regime classifications across a C_F grid at fixed graph and spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeScan {
    pub lambda_p: f64,
    pub gamma: f64,
    pub gamma_basis: GammaBasis,
    pub delta_band: f64,
    pub replicates: usize,
    pub rows: Vec<RegimeScanRow>,
}

impl RegimeScan {
    /// Tidy CSV, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# gehm regime scan v1")?;
        writeln!(
            out,
            "# lambda_p = {} , gamma = {} (basis = {}), delta_band = {}, replicates per point = {}",
            self.lambda_p,
            self.gamma,
            self.gamma_basis.label(),
            self.delta_band,
            self.replicates
        )?;
        writeln!(out, "# r = c_f - lambda_p + gamma")?;
        writeln!(
            out,
            "c_f,r,regime,blowup_fraction,mean_fitted_rate,mean_t_star"
        )?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.c_f,
                row.r,
                row.regime.label(),
                row.blowup_fraction,
                fmt_opt(row.mean_fitted_rate),
                fmt_opt(row.mean_t_star)
            )?;
        }
        Ok(())
    }
}

/// Statistics for one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub x: f64,
    pub y: Option<f64>,
    pub replicates: usize,
    pub blowup_fraction: f64,
    /// Restricted mean event time (expected-survival proxy), when snapshots
    /// were recorded.
    pub mean_event_time: Option<f64>,
    pub final_mean_l2_norm_sq: f64,
}

/// Full sweep output (long-format CSV via [`SweepResult::write_csv`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub x_path: String,
    pub y_path: Option<String>,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Long-format CSV: one row per cell per statistic, cells x-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# gehm parameter sweep v1")?;
        writeln!(out, "# param_x = {}", self.x_path)?;
        writeln!(
            out,
            "# param_y = {}",
            self.y_path.as_deref().unwrap_or("(none)")
        )?;
        writeln!(
            out,
            "# mean_event_time is the restricted mean over nodes (censored at the final snapshot)"
        )?;
        writeln!(out, "x,y,statistic,value")?;
        for cell in &self.cells {
            let y = fmt_opt(cell.y);
            writeln!(out, "{},{},blowup_fraction,{}", cell.x, y, cell.blowup_fraction)?;
            writeln!(
                out,
                "{},{},mean_event_time,{}",
                cell.x,
                y,
                fmt_opt(cell.mean_event_time)
            )?;
            writeln!(
                out,
                "{},{},final_mean_l2_norm_sq,{}",
                cell.x, y, cell.final_mean_l2_norm_sq
            )?;
        }
        Ok(())
    }
}

/// Spectral summary of one topology family over several generation seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyRow {
    pub label: String,
    pub n: usize,
    pub p: f64,
    pub normalization: Normalization,
    pub seeds: usize,
    /// Seeds on which any spectral iteration failed to converge; those runs
    /// are excluded from the means.
    pub nonconverged: usize,
    pub lambda_mean: f64,
    pub lambda_sd: f64,
    pub gamma_raw_mean: f64,
    pub gamma_raw_sd: f64,
    pub gamma_norm_mean: f64,
    pub gamma_norm_sd: f64,
    pub reference_lambda: Option<f64>,
    pub reference_gamma: Option<f64>,
}

/// CSV table for a topology comparison, both gamma bases side by side.
pub fn write_topology_table<W: Write>(rows: &[TopologyRow], mut out: W) -> Result<()> {
    writeln!(out, "# gehm topology comparison v1")?;
    writeln!(
        out,
        "# lambda: nonlinear eigenvalue on the normalized weights; gamma_raw: spectral radius of the 0/1 adjacency; gamma_norm: spectral radius of the stored weights"
    )?;
    writeln!(
        out,
        "# sd over generation seeds (population); nonconverged seeds excluded from means"
    )?;
    writeln!(
        out,
        "# reference_*: library reference values for these families (orientation only, basis unspecified)"
    )?;
    writeln!(
        out,
        "model,n,p,normalization,seeds,nonconverged,lambda_mean,lambda_sd,gamma_raw_mean,gamma_raw_sd,gamma_norm_mean,gamma_norm_sd,reference_lambda,reference_gamma"
    )?;
    for row in rows {
        let norm = row.normalization.label();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.label,
            row.n,
            row.p,
            norm,
            row.seeds,
            row.nonconverged,
            row.lambda_mean,
            row.lambda_sd,
            row.gamma_raw_mean,
            row.gamma_raw_sd,
            row.gamma_norm_mean,
            row.gamma_norm_sd,
            fmt_opt(row.reference_lambda),
            fmt_opt(row.reference_gamma)
        )?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn mean_of(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// C_F entering the regime index: the linear coefficient, or for the
/// modulated form a sup|φ| stand-in over the drift's stationary ±4 sd band.
fn effective_c_f(sim: &SimulationConfig) -> (f64, bool) {
    match &sim.reaction {
        ReactionSpec::Linear { c_f, .. } => (*c_f, false),
        ReactionSpec::Modulated { phi, .. } => {
            let var = if sim.ou.kappa > 0.0 {
                sim.ou.xi * sim.ou.xi / (2.0 * sim.ou.kappa)
            } else {
                0.0
            };
            let sd = var.sqrt();
            let sup = phi.sup_abs_on(sim.ou.mu - 4.0 * sd, sim.ou.mu + 4.0 * sd, 401);
            (sup, true)
        }
    }
}

/// Run all replicates in parallel. Replicate k simulates with seed
/// `master + k`; outcomes come back in replicate order regardless of the
/// worker count.
fn run_replicates(
    graph: &WeightedGraph,
    sim: &SimulationConfig,
    replicates: usize,
    outputs: &OutputConfig,
) -> Result<(Vec<Trajectory>, Vec<ReplicateOutcome>)> {
    let pairs: Vec<(Trajectory, ReplicateOutcome)> = (1..=replicates)
        .into_par_iter()
        .map(|k| {
            let mut cfg_k = sim.clone();
            cfg_k.seed = sim.seed.wrapping_add(k as u64);
            let traj = simulate(graph, &cfg_k)?;
            let fit = detect_blowup(&traj).ok();
            let mean_event_time = if traj.snapshots.is_empty() {
                None
            } else {
                extract_event_times(&traj, outputs.event_threshold, outputs.event_direction)
                    .ok()
                    .and_then(|table| {
                        let times: Vec<f64> = table.rows().iter().map(|r| r.time).collect();
                        mean_of(&times)
                    })
            };
            let outcome = ReplicateOutcome {
                replicate: k,
                seed: cfg_k.seed,
                status: traj.status,
                rows: traj.len(),
                final_t: *traj.times.last().expect("trajectory has rows"),
                final_l2_norm_sq: *traj.l2_norm_sq.last().expect("trajectory has rows"),
                final_energy_p: *traj.energy_p.last().expect("trajectory has rows"),
                fitted_rate: fit.as_ref().map(|f| f.growth_rate),
                t_star: fit.as_ref().and_then(|f| f.t_star),
                mean_event_time,
            };
            Ok((traj, outcome))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs.into_iter().unzip())
}

fn blowup_stats(outcomes: &[ReplicateOutcome]) -> (f64, Option<f64>) {
    let t_stars: Vec<f64> = outcomes.iter().filter_map(|o| o.t_star).collect();
    let fraction = outcomes
        .iter()
        .filter(|o| matches!(o.status, RunStatus::Blowup { .. }))
        .count() as f64
        / outcomes.len().max(1) as f64;
    (fraction, mean_of(&t_stars))
}

fn summarize(
    cfg: &ExperimentConfig,
    spectral: &SpectralEstimate,
    gamma_raw: &RadiusEstimate,
    gamma_normalized: &RadiusEstimate,
    trajectories: &[Trajectory],
    outcomes: &[ReplicateOutcome],
) -> EnsembleSummary {
    let times: Vec<f64> = trajectories
        .iter()
        .max_by_key(|t| t.len())
        .map(|t| t.times.clone())
        .unwrap_or_default();

    let steps = times.len();
    let mut n_alive = Vec::with_capacity(steps);
    let mut mean_l2 = Vec::with_capacity(steps);
    let mut var_l2 = Vec::with_capacity(steps);
    let mut mean_e = Vec::with_capacity(steps);
    let mut var_e = Vec::with_capacity(steps);
    let mut mean_x = Vec::with_capacity(steps);
    let mut var_x = Vec::with_capacity(steps);
    let mut scratch = Vec::with_capacity(trajectories.len());
    for j in 0..steps {
        let alive: Vec<&Trajectory> = trajectories.iter().filter(|t| t.len() > j).collect();
        n_alive.push(alive.len());
        for (series, means, vars) in [
            (0, &mut mean_l2, &mut var_l2),
            (1, &mut mean_e, &mut var_e),
            (2, &mut mean_x, &mut var_x),
        ] {
            scratch.clear();
            for t in &alive {
                scratch.push(match series {
                    0 => t.l2_norm_sq[j],
                    1 => t.energy_p[j],
                    _ => t.x_path[j],
                });
            }
            let (m, v) = mean_var(&scratch);
            means.push(m);
            vars.push(v);
        }
    }

    let (blowup_fraction, mean_t_star) = blowup_stats(outcomes);
    let event_means: Vec<f64> = outcomes.iter().filter_map(|o| o.mean_event_time).collect();
    let mean_event_time = mean_of(&event_means);

    let tail_start = cfg.sim.horizon / 10.0;
    let mut tail: Vec<f64> = Vec::new();
    for traj in trajectories {
        for (t, x) in traj.times.iter().zip(&traj.x_path) {
            if *t >= tail_start {
                tail.push(*x);
            }
        }
    }
    let (x_tail_mean, x_tail_var) = if tail.is_empty() {
        (None, None)
    } else {
        let (m, v) = mean_var(&tail);
        (Some(m), Some(v))
    };

    let rates: Vec<f64> = outcomes.iter().filter_map(|o| o.fitted_rate).collect();
    // declare the ensemble explosive only when at least half the replicates
    // actually crossed the threshold
    let ensemble_t_star = if blowup_fraction >= 0.5 { mean_t_star } else { None };
    let evidence = if rates.is_empty() && ensemble_t_star.is_none() {
        None
    } else {
        Some(RegimeEvidence {
            fitted_rate: mean_of(&rates).unwrap_or(0.0),
            t_star: ensemble_t_star,
        })
    };
    let (c_f, standin) = effective_c_f(&cfg.sim);
    let mut regime = RegimeReport::new(
        c_f,
        spectral.lambda_p,
        spectral.gamma,
        spectral.gamma_basis,
        cfg.spectral.delta_band,
        evidence,
    );
    regime.c_f_is_standin = standin;

    EnsembleSummary {
        replicates: outcomes.len(),
        times,
        n_alive,
        mean_l2_norm_sq: mean_l2,
        var_l2_norm_sq: var_l2,
        mean_energy_p: mean_e,
        var_energy_p: var_e,
        mean_x,
        var_x,
        blowup_fraction,
        mean_t_star,
        mean_event_time,
        x_tail_mean,
        x_tail_var,
        lambda_p: spectral.lambda_p,
        gamma_raw_adjacency: gamma_raw.rho,
        gamma_normalized_w: gamma_normalized.rho,
        regime,
    }
}

/// Eigenpair plus the spectral radius under both bases; the config's
/// `gamma_basis` selects which radius the returned estimate carries as Γ.
pub fn compute_spectra(
    graph: &WeightedGraph,
    cfg: &ExperimentConfig,
) -> Result<(SpectralEstimate, RadiusEstimate, RadiusEstimate)> {
    let sp = &cfg.spectral;
    let seed = cfg.master_seed();
    let eigen = nonlinear_eigenpair(graph, cfg.spectral_p(), sp.tol, sp.max_iter, seed)?;
    let raw = spectral_radius(graph, GammaBasis::RawAdjacency, sp.tol, sp.max_iter, seed)?;
    let norm = spectral_radius(graph, GammaBasis::NormalizedW, sp.tol, sp.max_iter, seed)?;
    let primary = match sp.gamma_basis {
        GammaBasis::RawAdjacency => raw.clone(),
        GammaBasis::NormalizedW => norm.clone(),
    };
    Ok((SpectralEstimate::from_parts(eigen, primary), raw, norm))
}

/// Run the full experiment: generate the graph, estimate the spectra, run all
/// replicates, aggregate, and write every output file under `outputs.dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    // fail on unwritable output before any simulation work
    fs::create_dir_all(&cfg.outputs.dir)?;

    let graph = generate(&cfg.resolved_graph_spec())?.normalize_weights(cfg.graph.normalization);
    let (spectral, gamma_raw, gamma_normalized) = compute_spectra(&graph, cfg)?;
    let (trajectories, outcomes) =
        run_replicates(&graph, &cfg.sim, cfg.replicates, &cfg.outputs)?;
    let summary = summarize(
        cfg,
        &spectral,
        &gamma_raw,
        &gamma_normalized,
        &trajectories,
        &outcomes,
    );
    let result = ExperimentResult {
        config: cfg.clone(),
        graph,
        spectral,
        gamma_raw,
        gamma_normalized,
        trajectories,
        outcomes,
        summary,
    };
    write_outputs(&result, &cfg.outputs.dir)?;
    Ok(result)
}

/// Classify the regime across a C_F grid on one graph: per grid point the
/// reaction is set to the linear form with that coefficient and the full
/// replicate ensemble is rerun. The spectra are computed once. A grid that
/// never leaves one side of the critical band logs a warning.
pub fn monte_carlo_regimes(cfg: &ExperimentConfig, c_f_grid: &[f64]) -> Result<RegimeScan> {
    cfg.validate()?;
    if c_f_grid.is_empty() {
        return Err(GehmError::Input("the C_F grid must not be empty".into()));
    }
    if c_f_grid.iter().any(|v| !v.is_finite()) {
        return Err(GehmError::Input(
            "the C_F grid must contain only finite values".into(),
        ));
    }

    let graph = generate(&cfg.resolved_graph_spec())?.normalize_weights(cfg.graph.normalization);
    let (spectral, _, _) = compute_spectra(&graph, cfg)?;
    let (lambda_p, gamma) = (spectral.lambda_p, spectral.gamma);
    let delta = cfg.spectral.delta_band;

    let eta = match cfg.sim.reaction {
        ReactionSpec::Linear { eta, .. } => eta,
        ReactionSpec::Modulated { .. } => 0.0,
    };

    let mut rows = Vec::with_capacity(c_f_grid.len());
    for &c_f in c_f_grid {
        let mut sim = cfg.sim.clone();
        sim.reaction = ReactionSpec::Linear { c_f, eta };
        let (_, outcomes) = run_replicates(&graph, &sim, cfg.replicates, &cfg.outputs)?;
        let (blowup_fraction, mean_t_star) = blowup_stats(&outcomes);
        let rates: Vec<f64> = outcomes.iter().filter_map(|o| o.fitted_rate).collect();
        let r = regime_index(c_f, lambda_p, gamma);
        let ensemble_t_star = if blowup_fraction >= 0.5 { mean_t_star } else { None };
        let evidence = if rates.is_empty() && ensemble_t_star.is_none() {
            None
        } else {
            Some(RegimeEvidence {
                fitted_rate: mean_of(&rates).unwrap_or(0.0),
                t_star: ensemble_t_star,
            })
        };
        let regime = crate::diagnostics::classify_regime(r, delta, evidence.as_ref());
        rows.push(RegimeScanRow {
            c_f,
            r,
            regime,
            blowup_fraction,
            mean_fitted_rate: mean_of(&rates),
            mean_t_star,
        });
    }

    if rows.iter().all(|row| row.r < -delta) {
        log::warn!("the C_F grid lies entirely below the critical band; the scan cannot span regimes");
    } else if rows.iter().all(|row| row.r > delta) {
        log::warn!("the C_F grid lies entirely above the critical band; the scan cannot span regimes");
    }

    Ok(RegimeScan {
        lambda_p,
        gamma,
        gamma_basis: cfg.spectral.gamma_basis,
        delta_band: delta,
        replicates: cfg.replicates,
        rows,
    })
}

/// Run the declared sweep: every (param_x, param_y) cell reruns the full
/// replicate ensemble with those values substituted into the config. Cells
/// execute concurrently; output order is x-major regardless of scheduling.
pub fn parameter_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| {
        GehmError::Validation("the config declares no sweep section".into())
    })?;

    let xs = &sweep.param_x.grid;
    let ys: Vec<Option<f64>> = match &sweep.param_y {
        Some(axis) => axis.grid.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut points = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        for &y in &ys {
            points.push((x, y));
        }
    }

    let cells: Vec<SweepCell> = points
        .par_iter()
        .map(|&(x, y)| {
            let mut cell_cfg = apply_path(cfg, &sweep.param_x.path, x)?;
            if let (Some(yv), Some(axis)) = (y, &sweep.param_y) {
                cell_cfg = apply_path(&cell_cfg, &axis.path, yv)?;
            }
            cell_cfg.validate()?;
            let graph = generate(&cell_cfg.resolved_graph_spec())?
                .normalize_weights(cell_cfg.graph.normalization);
            let (_, outcomes) = run_replicates(
                &graph,
                &cell_cfg.sim,
                cell_cfg.replicates,
                &cell_cfg.outputs,
            )?;
            let (blowup_fraction, _) = blowup_stats(&outcomes);
            let event_means: Vec<f64> =
                outcomes.iter().filter_map(|o| o.mean_event_time).collect();
            let finals: Vec<f64> = outcomes.iter().map(|o| o.final_l2_norm_sq).collect();
            Ok(SweepCell {
                x,
                y,
                replicates: outcomes.len(),
                blowup_fraction,
                mean_event_time: mean_of(&event_means),
                final_mean_l2_norm_sq: mean_of(&finals).unwrap_or(0.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        x_path: sweep.param_x.path.clone(),
        y_path: sweep.param_y.as_ref().map(|a| a.path.clone()),
        cells,
    })
}

/// Spectral summary per topology family: mean ± sd of λ_p and both Γ bases
/// over `seeds` independently generated graphs per spec (generation seed
/// `spec.seed + s`). Non-convergent runs are counted and excluded from means.
pub fn topology_comparison(
    specs: &[GraphModelSpec],
    p: f64,
    seeds: usize,
    normalization: Normalization,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<TopologyRow>> {
    if specs.is_empty() {
        return Err(GehmError::Input(
            "topology comparison needs at least one graph spec".into(),
        ));
    }
    if seeds == 0 {
        return Err(GehmError::Parameter("seeds must be at least 1".into()));
    }

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        validate_spec(spec)?;
        let per_seed: Vec<(Option<f64>, Option<f64>, Option<f64>)> = (0..seeds as u64)
            .into_par_iter()
            .map(|s| {
                let spec_s = GraphModelSpec {
                    seed: spec.seed.wrapping_add(s),
                    ..*spec
                };
                let graph = generate(&spec_s)?.normalize_weights(normalization);
                let eigen = nonlinear_eigenpair(&graph, p, tol, max_iter, spec_s.seed)?;
                let raw =
                    spectral_radius(&graph, GammaBasis::RawAdjacency, tol, max_iter, spec_s.seed)?;
                let norm =
                    spectral_radius(&graph, GammaBasis::NormalizedW, tol, max_iter, spec_s.seed)?;
                Ok((
                    eigen.converged.then_some(eigen.lambda_p),
                    raw.converged.then_some(raw.rho),
                    norm.converged.then_some(norm.rho),
                ))
            })
            .collect::<Result<Vec<_>>>()?;

        let nonconverged = per_seed
            .iter()
            .filter(|(l, r, n)| l.is_none() || r.is_none() || n.is_none())
            .count();
        let lambdas: Vec<f64> = per_seed.iter().filter_map(|(l, _, _)| *l).collect();
        let raws: Vec<f64> = per_seed.iter().filter_map(|(_, r, _)| *r).collect();
        let norms: Vec<f64> = per_seed.iter().filter_map(|(_, _, n)| *n).collect();
        let stats = |vals: &[f64]| -> (f64, f64) {
            if vals.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                let (m, v) = mean_var(vals);
                (m, v.sqrt())
            }
        };
        let (lambda_mean, lambda_sd) = stats(&lambdas);
        let (gamma_raw_mean, gamma_raw_sd) = stats(&raws);
        let (gamma_norm_mean, gamma_norm_sd) = stats(&norms);
        let reference = REFERENCE_SPECTRA
            .iter()
            .find(|(label, _, _)| *label == spec.model.label());
        rows.push(TopologyRow {
            label: spec.model.label().to_string(),
            n: spec.n,
            p,
            normalization,
            seeds,
            nonconverged,
            lambda_mean,
            lambda_sd,
            gamma_raw_mean,
            gamma_raw_sd,
            gamma_norm_mean,
            gamma_norm_sd,
            reference_lambda: reference.map(|(_, l, _)| *l),
            reference_gamma: reference.map(|(_, _, g)| *g),
        });
    }
    Ok(rows)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| GehmError::Input(format!("serialization failed: {e}")))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn write_trajectory_csv(path: &Path, traj: &Trajectory, p: f64) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# gehm trajectory v1")?;
    writeln!(
        out,
        "# l2_norm_sq = sum_i u_i^2; energy_p = (1/(2p)) * sum over directed edges of w_ij*|u_i-u_j|^p (p = {p}); x = scalar drift state"
    )?;
    let status = match traj.status {
        RunStatus::Completed => "completed".to_string(),
        RunStatus::Blowup { t_star } => format!("blowup t_star={t_star}"),
        RunStatus::NonFinite { t } => format!("non_finite t={t}"),
    };
    writeln!(out, "# status: {status}")?;
    writeln!(out, "t,l2_norm_sq,energy_p,x")?;
    for j in 0..traj.len() {
        writeln!(
            out,
            "{},{},{},{}",
            traj.times[j], traj.l2_norm_sq[j], traj.energy_p[j], traj.x_path[j]
        )?;
    }
    Ok(())
}

fn write_snapshot_csv(path: &Path, snap: &crate::dynamics::Snapshot) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# gehm snapshot v1")?;
    writeln!(out, "# step = {}, t = {}", snap.step, snap.t)?;
    writeln!(out, "node,u")?;
    for (i, v) in snap.u.iter().enumerate() {
        writeln!(out, "{i},{v}")?;
    }
    Ok(())
}

/// Write every output file for a finished experiment under `dir`:
/// `manifest.json` (resolved config + library version + creation time),
/// `spectral.json` (eigenpair and both gamma bases), `regime.json`,
/// `summary.json`, and one `replicate_XXX/` directory per replicate with
/// `status.json`, `trajectory.csv`, and `snapshots/snap_XXXXXXX.csv` files.
/// Every byte except the manifest's `created_unix` is a pure function of the
/// config.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = serde_json::json!({
        "format": "gehm-manifest v1",
        "library_version": env!("CARGO_PKG_VERSION"),
        "created_unix": created,
        "config": result.config,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;

    let spectral = serde_json::json!({
        "primary": result.spectral,
        "gamma_raw_adjacency": result.gamma_raw,
        "gamma_normalized_w": result.gamma_normalized,
    });
    write_json(&dir.join("spectral.json"), &spectral)?;
    write_json(&dir.join("regime.json"), &result.summary.regime)?;
    write_json(&dir.join("summary.json"), &result.summary)?;

    for (traj, outcome) in result.trajectories.iter().zip(&result.outcomes) {
        let rep_dir = dir.join(format!("replicate_{:03}", outcome.replicate));
        fs::create_dir_all(&rep_dir)?;
        write_json(&rep_dir.join("status.json"), outcome)?;
        if result.config.outputs.write_trajectories {
            write_trajectory_csv(&rep_dir.join("trajectory.csv"), traj, result.config.sim.p)?;
        }
        if result.config.outputs.write_snapshots && !traj.snapshots.is_empty() {
            let snap_dir = rep_dir.join("snapshots");
            fs::create_dir_all(&snap_dir)?;
            for snap in &traj.snapshots {
                write_snapshot_csv(
                    &snap_dir.join(format!("snap_{:07}.csv", snap.step)),
                    snap,
                )?;
            }
        }
    }
    Ok(())
}
