//! Time integration of the coupled node-state / drift-state system.
//!
//! The node field follows the explicit Euler update
//! `u ← u + Δt·Δ_p u + Δt·F(u, X) + σ(u, X)·√Δt·ε`, and the scalar
//! modulation state follows the Euler–Maruyama OU update
//! `X ← X + κ(μ − X)Δt + ξ·√Δt·ε′`. Node noise and OU noise come from two
//! labeled RNG substreams of the run seed, so a run is a pure function of
//! `(graph, config)`: toggling snapshots, diagnostics, or thread counts never
//! changes the dynamics. When a noise amplitude is structurally zero the
//! corresponding draws are skipped entirely.
//!
//! Runs end in one of three states: `Completed` at the horizon, `Blowup`
//! when ‖u‖₂ first reaches the configured threshold (the recorded time is the
//! numerical divergence time T*), or `NonFinite` if the state leaves f64
//! range (the poisoned state is not recorded).

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::GehmError;
use crate::graph::WeightedGraph;
use crate::operators::{noise_coefficients, p_laplacian, reaction_term, NoiseSpec, ReactionSpec};
use crate::rng::substream;

type Result<T> = std::result::Result<T, GehmError>;

/// Ornstein–Uhlenbeck parameters for the scalar modulation state X_t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuParams {
    pub kappa: f64,
    pub mu: f64,
    pub xi: f64,
    pub x0: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        OuParams {
            kappa: 0.3,
            mu: 0.0,
            xi: 0.1,
            x0: 0.0,
        }
    }
}

/// Initial node field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// Standard normal draws renormalized to ‖u‖₂ = 1.
    GaussianUnitL2,
    /// Every node starts at the given value.
    Constant(f64),
    /// Explicit per-node values.
    Custom(Vec<f64>),
}

/// Whether the per-node noise term uses independent normals or one shared
/// scalar normal broadcast to all nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseCoupling {
    IndependentPerNode,
    SharedScalar,
}

/// Full specification of one integration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub p: f64,
    pub eps: f64,
    pub dt: f64,
    pub horizon: f64,
    pub reaction: ReactionSpec,
    pub noise: NoiseSpec,
    pub ou: OuParams,
    pub seed: u64,
    pub init: InitialCondition,
    pub blowup_threshold: f64,
    /// Full-state snapshot every this many steps; 0 disables snapshots. When
    /// enabled, the final recorded step is always snapshotted.
    pub snapshot_stride: usize,
    pub noise_coupling: NoiseCoupling,
    /// Run even when the explicit-Euler stability estimate exceeds 1.
    pub force_unstable: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            p: 3.0,
            eps: 1e-8,
            dt: 1e-3,
            horizon: 1.0,
            reaction: ReactionSpec::Linear { c_f: 0.0, eta: 0.0 },
            noise: NoiseSpec::Additive { sigma: 0.02 },
            ou: OuParams::default(),
            seed: 123_456,
            init: InitialCondition::GaussianUnitL2,
            blowup_threshold: 1e6,
            snapshot_stride: 0,
            noise_coupling: NoiseCoupling::IndependentPerNode,
            force_unstable: false,
        }
    }
}

/// Instantaneous integration state.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub u: Vec<f64>,
    pub x: f64,
    pub t: f64,
}

/// The two labeled noise substreams of a run seed.
#[derive(Debug, Clone)]
pub struct NoiseStreams {
    node: ChaCha8Rng,
    ou: ChaCha8Rng,
}

impl NoiseStreams {
    pub fn new(seed: u64) -> Self {
        NoiseStreams {
            node: substream(seed, "node-noise", 0),
            ou: substream(seed, "ou-noise", 0),
        }
    }
}

/// Full node field recorded mid-run.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub u: Vec<f64>,
}

/// Terminal status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// ‖u‖₂ reached the threshold; `t_star` is the first crossing time.
    Blowup { t_star: f64 },
    /// The state left f64 range at time `t`; the last recorded row precedes it.
    NonFinite { t: f64 },
}

/// Per-step diagnostics plus optional snapshots for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub l2_norm_sq: Vec<f64>,
    pub energy_p: Vec<f64>,
    pub x_path: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub status: RunStatus,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Result of the growth-rate fit on ln ‖u‖₂².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    /// Threshold-crossing time, present only when the run ended in blow-up.
    pub t_star: Option<f64>,
    /// Least-squares slope of ln ‖u‖₂² against t over the fit window: the
    /// final magnitude decade before a blow-up, otherwise the second half of
    /// the recorded run.
    pub growth_rate: f64,
    /// Number of samples the slope was fitted on.
    pub fit_points: usize,
}

fn l2_norm_sq(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum()
}

/// Stationary variance ξ²/(2κ) of the OU modulation state.
pub fn ou_stationary_variance(kappa: f64, xi: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(GehmError::Parameter(format!(
            "OU stationary variance requires kappa > 0, got {kappa}"
        )));
    }
    if !xi.is_finite() || xi < 0.0 {
        return Err(GehmError::Parameter(format!(
            "OU stationary variance requires xi >= 0, got {xi}"
        )));
    }
    Ok(xi * xi / (2.0 * kappa))
}

/// Closed-form divergence time T* = E0^{1−p/2} / (α·(p/2 − 1)) of the energy
/// ODE Ė = α·E^{p/2}. Defined only for p > 2.
pub fn predicted_blowup_time(e0: f64, alpha_blow: f64, p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 2.0 {
        return Err(GehmError::Parameter(format!(
            "finite-time divergence requires p > 2, got {p}"
        )));
    }
    if !e0.is_finite() || e0 <= 0.0 {
        return Err(GehmError::Parameter(format!(
            "initial energy must be positive, got {e0}"
        )));
    }
    if !alpha_blow.is_finite() || alpha_blow <= 0.0 {
        return Err(GehmError::Parameter(format!(
            "growth coefficient must be positive, got {alpha_blow}"
        )));
    }
    Ok(e0.powf(1.0 - p / 2.0) / (alpha_blow * (p / 2.0 - 1.0)))
}

fn build_initial(n: usize, cfg: &SimulationConfig) -> Result<Vec<f64>> {
    match &cfg.init {
        InitialCondition::GaussianUnitL2 => {
            let mut rng = substream(cfg.seed, "init", 0);
            let mut u: Vec<f64> = (0..n)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let norm = l2_norm_sq(&u).sqrt();
            if norm > 0.0 {
                for v in &mut u {
                    *v /= norm;
                }
            }
            Ok(u)
        }
        InitialCondition::Constant(c) => {
            if !c.is_finite() {
                return Err(GehmError::Input(format!(
                    "constant initial value must be finite, got {c}"
                )));
            }
            Ok(vec![*c; n])
        }
        InitialCondition::Custom(values) => {
            if values.len() != n {
                return Err(GehmError::Input(format!(
                    "custom initial condition has {} values but the graph has {n} nodes",
                    values.len()
                )));
            }
            if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
                return Err(GehmError::Input(format!(
                    "custom initial condition entry {bad} is not finite"
                )));
            }
            Ok(values.clone())
        }
    }
}

fn validate_config(cfg: &SimulationConfig, initial_l2: f64) -> Result<()> {
    let issues = config_issues(cfg, initial_l2);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(GehmError::Config { issues })
    }
}

/// All problems with a simulation config, for callers that merge them into a
/// larger validation report. `initial_l2` is the squared norm the blow-up
/// threshold must exceed (pass 0.0 when the initial field is not yet known).
pub(crate) fn config_issues(cfg: &SimulationConfig, initial_l2: f64) -> Vec<String> {
    let mut issues = Vec::new();
    if !cfg.p.is_finite() || cfg.p <= 1.0 {
        issues.push(format!("p must exceed 1, got {}", cfg.p));
    }
    if !cfg.eps.is_finite() || cfg.eps < 0.0 {
        issues.push(format!("eps must be nonnegative, got {}", cfg.eps));
    }
    if !cfg.dt.is_finite() || cfg.dt <= 0.0 {
        issues.push(format!("dt must be positive, got {}", cfg.dt));
    }
    if !cfg.horizon.is_finite() || cfg.horizon < cfg.dt {
        issues.push(format!(
            "horizon must be at least dt, got horizon = {}, dt = {}",
            cfg.horizon, cfg.dt
        ));
    }
    if !cfg.ou.kappa.is_finite() || cfg.ou.kappa <= 0.0 {
        issues.push(format!("ou.kappa must be positive, got {}", cfg.ou.kappa));
    }
    if !cfg.ou.xi.is_finite() || cfg.ou.xi < 0.0 {
        issues.push(format!("ou.xi must be nonnegative, got {}", cfg.ou.xi));
    }
    if !cfg.ou.mu.is_finite() {
        issues.push(format!("ou.mu must be finite, got {}", cfg.ou.mu));
    }
    if !cfg.ou.x0.is_finite() {
        issues.push(format!("ou.x0 must be finite, got {}", cfg.ou.x0));
    }
    if !cfg.blowup_threshold.is_finite() || cfg.blowup_threshold <= initial_l2 {
        issues.push(format!(
            "blowup_threshold must exceed the initial L2 norm {initial_l2}, got {}",
            cfg.blowup_threshold
        ));
    }
    if let Err(e) = cfg.reaction.validate() {
        issues.push(e.to_string());
    }
    if let Err(e) = cfg.noise.validate() {
        issues.push(e.to_string());
    }
    issues
}

/// Explicit-Euler stability estimate from the initial field: the effective
/// diffusion rate is bounded by max_i Σ_j w_ij·(g + eps)^{p−2} with g the
/// largest initial gradient magnitude.
fn stability_number(graph: &WeightedGraph, u0: &[f64], cfg: &SimulationConfig) -> f64 {
    let factor = if cfg.p == 2.0 {
        1.0
    } else {
        let g_max = graph
            .directed_edges()
            .map(|(i, j, _)| (u0[j] - u0[i]).abs())
            .fold(0.0, f64::max);
        let base = g_max + cfg.eps;
        if base == 0.0 {
            0.0
        } else {
            base.powf(cfg.p - 2.0)
        }
    };
    let wdeg_max = (0..graph.n())
        .map(|i| graph.weighted_degree(i))
        .fold(0.0, f64::max);
    cfg.dt * wdeg_max * factor
}

/// One explicit Euler / Euler–Maruyama step. `state.t` advances by `dt`;
/// [`simulate`] overwrites it with `k·dt` to avoid accumulation drift.
pub fn step(
    state: &SystemState,
    graph: &WeightedGraph,
    cfg: &SimulationConfig,
    streams: &mut NoiseStreams,
) -> Result<SystemState> {
    let dt = cfg.dt;
    let diffusion = p_laplacian(graph, &state.u, cfg.p, cfg.eps)?;
    let forcing = reaction_term(&state.u, state.x, &cfg.reaction)?;

    let mut u_next: Vec<f64> = state
        .u
        .iter()
        .zip(diffusion.iter().zip(&forcing))
        .map(|(&ui, (&d, &f))| ui + dt * d + dt * f)
        .collect();

    if !cfg.noise.is_structurally_zero() {
        let sigma = noise_coefficients(graph, &state.u, state.x, &cfg.noise)?;
        let sqrt_dt = dt.sqrt();
        match cfg.noise_coupling {
            NoiseCoupling::IndependentPerNode => {
                for (un, s) in u_next.iter_mut().zip(&sigma) {
                    let eps_i: f64 = StandardNormal.sample(&mut streams.node);
                    *un += s * sqrt_dt * eps_i;
                }
            }
            NoiseCoupling::SharedScalar => {
                let eps_shared: f64 = StandardNormal.sample(&mut streams.node);
                for (un, s) in u_next.iter_mut().zip(&sigma) {
                    *un += s * sqrt_dt * eps_shared;
                }
            }
        }
    }

    let mut x_next = state.x + cfg.ou.kappa * (cfg.ou.mu - state.x) * dt;
    if cfg.ou.xi > 0.0 {
        let eps_ou: f64 = StandardNormal.sample(&mut streams.ou);
        x_next += cfg.ou.xi * dt.sqrt() * eps_ou;
    }

    Ok(SystemState {
        u: u_next,
        x: x_next,
        t: state.t + dt,
    })
}

/// Integrate from t = 0 to the horizon (or until blow-up / loss of
/// finiteness), recording ‖u‖₂², E_p(u) and X every step.
///
/// The run is deterministic in `(graph, cfg)`. Validation failures surface as
/// a configuration error listing every violated constraint; an initial field
/// that exceeds the explicit-Euler stability estimate is refused unless
/// `force_unstable` is set.
pub fn simulate(graph: &WeightedGraph, cfg: &SimulationConfig) -> Result<Trajectory> {
    let n = graph.n();
    let u0 = build_initial(n, cfg)?;
    let initial_l2 = l2_norm_sq(&u0).sqrt();
    validate_config(cfg, initial_l2)?;

    let s = stability_number(graph, &u0, cfg);
    if s > 1.0 {
        if cfg.force_unstable {
            log::warn!(
                "explicit-Euler stability estimate {s:.3} exceeds 1; continuing because force_unstable is set"
            );
        } else {
            return Err(GehmError::Validation(format!(
                "explicit-Euler stability estimate {s:.3} exceeds 1 (dt too large for this graph/p); \
                 reduce dt or set force_unstable"
            )));
        }
    } else if s > 0.5 {
        log::warn!("explicit-Euler stability estimate {s:.3} exceeds 0.5; results may be inaccurate");
    }

    let nsteps = ((cfg.horizon / cfg.dt).round() as usize).max(1);
    let threshold_sq = cfg.blowup_threshold * cfg.blowup_threshold;
    let mut streams = NoiseStreams::new(cfg.seed);

    let mut state = SystemState {
        u: u0,
        x: cfg.ou.x0,
        t: 0.0,
    };

    let mut times = Vec::with_capacity(nsteps + 1);
    let mut l2 = Vec::with_capacity(nsteps + 1);
    let mut energy = Vec::with_capacity(nsteps + 1);
    let mut x_path = Vec::with_capacity(nsteps + 1);
    let mut snapshots = Vec::new();

    let record = |state: &SystemState,
                  times: &mut Vec<f64>,
                  l2: &mut Vec<f64>,
                  energy: &mut Vec<f64>,
                  x_path: &mut Vec<f64>|
     -> Result<f64> {
        let norm_sq = l2_norm_sq(&state.u);
        times.push(state.t);
        l2.push(norm_sq);
        energy.push(crate::diagnostics::energy_p(graph, &state.u, cfg.p)?);
        x_path.push(state.x);
        Ok(norm_sq)
    };

    record(&state, &mut times, &mut l2, &mut energy, &mut x_path)?;
    if cfg.snapshot_stride > 0 {
        snapshots.push(Snapshot {
            step: 0,
            t: 0.0,
            u: state.u.clone(),
        });
    }

    let mut status = RunStatus::Completed;
    for k in 1..=nsteps {
        state = step(&state, graph, cfg, &mut streams)?;
        state.t = k as f64 * cfg.dt;

        let finite = state.x.is_finite() && state.u.iter().all(|v| v.is_finite());
        if !finite {
            status = RunStatus::NonFinite { t: state.t };
            break;
        }

        let norm_sq = record(&state, &mut times, &mut l2, &mut energy, &mut x_path)?;
        let crossing = norm_sq >= threshold_sq;
        let last = k == nsteps || crossing;
        if cfg.snapshot_stride > 0 && (k % cfg.snapshot_stride == 0 || last) {
            snapshots.push(Snapshot {
                step: k,
                t: state.t,
                u: state.u.clone(),
            });
        }
        if crossing {
            status = RunStatus::Blowup { t_star: state.t };
            break;
        }
    }

    Ok(Trajectory {
        times,
        l2_norm_sq: l2,
        energy_p: energy,
        x_path,
        snapshots,
        status,
    })
}

fn log_slope(times: &[f64], values: &[f64]) -> Option<f64> {
    // least-squares slope of ln(values) against times, ignoring
    // non-positive values
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_t = points.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in &points {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Characterize the terminal growth of a recorded run.
///
/// For a blow-up the crossing time is returned together with the exponential
/// rate of ‖u‖₂² fitted over the final magnitude decade (at least the last
/// five samples); otherwise `t_star` is absent and the rate is fitted over
/// the second half of the run for regime confirmation. Trajectories shorter
/// than 10 samples (or with too few positive norms to fit) are rejected as
/// insufficient data.
pub fn detect_blowup(traj: &Trajectory) -> Result<BlowupFit> {
    if traj.len() < 10 {
        return Err(GehmError::InsufficientData(format!(
            "growth-rate fit needs at least 10 samples, trajectory has {}",
            traj.len()
        )));
    }

    let (window_start, t_star) = match traj.status {
        RunStatus::Blowup { t_star } => {
            let max = traj
                .l2_norm_sq
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let cutoff = max / 10.0;
            let first_in_decade = traj
                .l2_norm_sq
                .iter()
                .position(|&v| v >= cutoff)
                .unwrap_or(0);
            // never fit on fewer than the last five samples
            (first_in_decade.min(traj.len() - 5), Some(t_star))
        }
        _ => {
            let t_end = *traj.times.last().expect("nonempty by length check");
            let half = traj
                .times
                .iter()
                .position(|&t| t >= t_end / 2.0)
                .unwrap_or(0);
            (half.min(traj.len() - 2), None)
        }
    };

    let times = &traj.times[window_start..];
    let values = &traj.l2_norm_sq[window_start..];
    let fit_points = values.iter().filter(|&&v| v > 0.0).count();
    match log_slope(times, values) {
        Some(rate) => Ok(BlowupFit {
            t_star,
            growth_rate: rate,
            fit_points,
        }),
        None => Err(GehmError::InsufficientData(
            "growth-rate fit window has fewer than 2 positive samples".into(),
        )),
    }
}
