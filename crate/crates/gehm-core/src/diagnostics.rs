//! Post-processing of trajectories: energy functionals, regime
//! classification, amplification functionals, dissipation-inequality
//! residuals, and survival/hazard estimation from threshold-crossing events.
//!
//! Conventions fixed here and stated in every output file header:
//! * Energy: E_p(u) = (1/p)·Σ_{unordered pairs} w̄_ij·|u_i − u_j|^p with the
//!   symmetrized weight w̄_ij = (w_ij + w_ji)/2 — equivalently
//!   (1/2p)·Σ_{directed} w_ij·|u_i − u_j|^p.
//! * Gradient norms: ‖∇u‖_p^p sums over *directed* edges (each unordered
//!   pair twice) with per-edge weight w_ij, matching the divergence-form
//!   operator algebra. Hence ‖∇u‖_p^p = 2p·E_p(u).
//! * Survival: the at-risk count at time t_k is n minus the number of
//!   *events* strictly before t_k; censored subjects stay at risk through
//!   the horizon. This differs from the textbook Kaplan–Meier risk set
//!   (which also removes the censored) and is the convention this library
//!   is specified against; with no censoring the two coincide and equal the
//!   empirical survival function.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::GehmError;
use crate::graph::WeightedGraph;
use crate::operators::ReactionSpec;
use crate::spectral::{regime_index, GammaBasis};

type Result<T> = std::result::Result<T, GehmError>;

fn check_vector(graph: &WeightedGraph, u: &[f64]) -> Result<()> {
    if u.len() != graph.n() {
        return Err(GehmError::Input(format!(
            "node vector has length {} but the graph has {} nodes",
            u.len(),
            graph.n()
        )));
    }
    Ok(())
}

/// ‖∇u‖_p^p = Σ_{directed edges} w_ij·|u_i − u_j|^p (the p-th power of the
/// weighted gradient p-norm; see module docs for the directed convention).
pub fn grad_norm_p(graph: &WeightedGraph, u: &[f64], p: f64) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(GehmError::Parameter(format!(
            "gradient norm requires p >= 1, got {p}"
        )));
    }
    check_vector(graph, u)?;
    let mut total = 0.0;
    if p == 2.0 {
        for (i, j, w) in graph.directed_edges() {
            let d = u[i] - u[j];
            total += w * d * d;
        }
    } else {
        for (i, j, w) in graph.directed_edges() {
            let d = (u[i] - u[j]).abs();
            if d > 0.0 {
                total += w * d.powf(p);
            }
        }
    }
    Ok(total)
}

/// Energy functional E_p(u) (see module docs for the edge convention).
pub fn energy_p(graph: &WeightedGraph, u: &[f64], p: f64) -> Result<f64> {
    Ok(grad_norm_p(graph, u, p)? / (2.0 * p))
}

/// Structural regime of the diffusion–reaction balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Dissipative,
    Critical,
    Amplifying,
    Explosive,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Dissipative => "dissipative",
            Regime::Critical => "critical",
            Regime::Amplifying => "amplifying",
            Regime::Explosive => "explosive",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Trajectory-derived evidence fed into the classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeEvidence {
    /// Fitted exponential rate of ‖u‖₂² (see `detect_blowup`).
    pub fitted_rate: f64,
    /// Numerical divergence time, present when a threshold crossing occurred.
    pub t_star: Option<f64>,
}

/// Classification of the regime index R against the band ±delta_band.
///
/// Observed blow-up (a `t_star` in the evidence) overrides the band: the
/// regime is explosive no matter where R sits. Otherwise R < −δ is
/// dissipative, |R| ≤ δ critical, R > δ amplifying. The classification
/// depends on (R, δ) only through sign and band membership, so any common
/// rescaling of (C_F, λ_p, Γ) preserving those preserves the regime.
pub fn classify_regime(r: f64, delta_band: f64, evidence: Option<&RegimeEvidence>) -> Regime {
    if evidence.map_or(false, |e| e.t_star.is_some()) {
        return Regime::Explosive;
    }
    if r < -delta_band {
        Regime::Dissipative
    } else if r <= delta_band {
        Regime::Critical
    } else {
        Regime::Amplifying
    }
}

/// Complete regime determination for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub r: f64,
    pub regime: Regime,
    pub delta_band: f64,
    pub lambda_p: f64,
    pub gamma: f64,
    pub gamma_basis: GammaBasis,
    pub c_f: f64,
    /// True when c_f is the sup|φ| stand-in used for modulated reactions
    /// rather than a literal linear coefficient.
    #[serde(default)]
    pub c_f_is_standin: bool,
    pub evidence: Option<RegimeEvidence>,
}

impl RegimeReport {
    pub fn new(
        c_f: f64,
        lambda_p: f64,
        gamma: f64,
        gamma_basis: GammaBasis,
        delta_band: f64,
        evidence: Option<RegimeEvidence>,
    ) -> Self {
        let r = regime_index(c_f, lambda_p, gamma);
        let regime = classify_regime(r, delta_band, evidence.as_ref());
        RegimeReport {
            r,
            regime,
            delta_band,
            lambda_p,
            gamma,
            gamma_basis,
            c_f,
            c_f_is_standin: false,
            evidence,
        }
    }
}

/// One finite-difference sample of the dissipation inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationSample {
    /// Left endpoint of the finite-difference interval.
    pub t: f64,
    /// Forward difference of E_p between consecutive snapshots.
    pub de_dt: f64,
    /// −λ_p·‖∇u‖_p^p + C_F·‖u‖₂² evaluated at the left snapshot.
    pub bound: f64,
    /// de_dt − bound: the empirical stand-in for the unspecified
    /// interaction term of the dissipation inequality.
    pub residual: f64,
}

/// Dissipation-inequality residuals over a run's snapshot grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    pub samples: Vec<DissipationSample>,
    pub max_abs_residual: f64,
}

/// Check the energy-dissipation inequality on the snapshot grid: for each
/// consecutive snapshot pair, compare the finite-difference dE_p/dt against
/// −λ_p·‖∇u‖_p^p + C_F·‖u‖₂² at the left snapshot and report the residual.
/// Needs at least two snapshots.
pub fn dissipation_residual(
    graph: &WeightedGraph,
    traj: &Trajectory,
    p: f64,
    lambda_p: f64,
    c_f: f64,
) -> Result<DissipationReport> {
    if traj.snapshots.len() < 2 {
        return Err(GehmError::InsufficientData(format!(
            "dissipation residual needs at least 2 snapshots, run recorded {}",
            traj.snapshots.len()
        )));
    }
    let mut samples = Vec::with_capacity(traj.snapshots.len() - 1);
    let mut max_abs: f64 = 0.0;
    for pair in traj.snapshots.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let gap = b.t - a.t;
        if gap <= 0.0 {
            return Err(GehmError::Input(format!(
                "snapshots are not strictly increasing in time at t = {}",
                a.t
            )));
        }
        let e_a = energy_p(graph, &a.u, p)?;
        let e_b = energy_p(graph, &b.u, p)?;
        let de_dt = (e_b - e_a) / gap;
        let grad = grad_norm_p(graph, &a.u, p)?;
        let l2: f64 = a.u.iter().map(|v| v * v).sum();
        let bound = -lambda_p * grad + c_f * l2;
        let residual = de_dt - bound;
        max_abs = max_abs.max(residual.abs());
        samples.push(DissipationSample {
            t: a.t,
            de_dt,
            bound,
            residual,
        });
    }
    Ok(DissipationReport {
        samples,
        max_abs_residual: max_abs,
    })
}

/// Single-sample amplification functional for the linear reaction form:
/// C_F·‖∇u‖₂² + Γ·(second moment of X). Pass x² for a pathwise sample or a
/// known stationary second moment; averaging over replicates approximates the
/// expectation. The modulated reaction form has no operational ∇F_u here and
/// is rejected.
pub fn amplification_functional(
    graph: &WeightedGraph,
    u: &[f64],
    reaction: &ReactionSpec,
    gamma: f64,
    x_second_moment: f64,
) -> Result<f64> {
    let c_f = match reaction {
        ReactionSpec::Linear { c_f, .. } => *c_f,
        ReactionSpec::Modulated { .. } => {
            return Err(GehmError::UnsupportedForm(
                "the amplification functional is defined for the linear reaction form only"
                    .into(),
            ))
        }
    };
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(GehmError::Parameter(format!(
            "gamma must be nonnegative, got {gamma}"
        )));
    }
    if !x_second_moment.is_finite() || x_second_moment < 0.0 {
        return Err(GehmError::Parameter(format!(
            "second moment must be nonnegative, got {x_second_moment}"
        )));
    }
    Ok(c_f * grad_norm_p(graph, u, 2.0)? + gamma * x_second_moment)
}

/// Terminal state of one subject in the event table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventStatus {
    Event,
    Censored,
}

/// One subject's observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub node: usize,
    pub time: f64,
    pub status: EventStatus,
}

/// Per-node time-to-event observations; each node appears at most once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTable {
    rows: Vec<EventRow>,
}

impl EventTable {
    pub fn new(rows: Vec<EventRow>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for row in &rows {
            if !row.time.is_finite() || row.time < 0.0 {
                return Err(GehmError::Validation(format!(
                    "event time for node {} must be nonnegative, got {}",
                    row.node, row.time
                )));
            }
            if !seen.insert(row.node) {
                return Err(GehmError::Validation(format!(
                    "node {} appears more than once in the event table",
                    row.node
                )));
            }
        }
        Ok(EventTable { rows })
    }

    pub fn rows(&self) -> &[EventRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == EventStatus::Event)
            .count()
    }
}

/// Which side of the threshold counts as the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDirection {
    /// Event when u_i ≥ threshold.
    Above,
    /// Event when u_i ≤ threshold.
    Below,
}

/// Build an event table from a run's snapshots: a node's event time is the
/// first snapshot time at which its value crosses the threshold in the given
/// direction; nodes that never cross are censored at the final snapshot time.
pub fn extract_event_times(
    traj: &Trajectory,
    threshold: f64,
    direction: CrossingDirection,
) -> Result<EventTable> {
    if traj.snapshots.is_empty() {
        return Err(GehmError::InsufficientData(
            "event extraction needs snapshots; run with snapshot_stride > 0".into(),
        ));
    }
    if !threshold.is_finite() {
        return Err(GehmError::Parameter(format!(
            "event threshold must be finite, got {threshold}"
        )));
    }
    let n = traj.snapshots[0].u.len();
    let crossed = |v: f64| match direction {
        CrossingDirection::Above => v >= threshold,
        CrossingDirection::Below => v <= threshold,
    };
    let horizon = traj.snapshots.last().expect("nonempty").t;
    let mut rows = Vec::with_capacity(n);
    for node in 0..n {
        let hit = traj
            .snapshots
            .iter()
            .find(|snap| crossed(snap.u[node]))
            .map(|snap| snap.t);
        rows.push(match hit {
            Some(t) => EventRow {
                node,
                time: t,
                status: EventStatus::Event,
            },
            None => EventRow {
                node,
                time: horizon,
                status: EventStatus::Censored,
            },
        });
    }
    EventTable::new(rows)
}

/// Survival estimator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalEstimator {
    KaplanMeier,
    NelsonAalen,
}

/// Survival/hazard curve over the distinct observed times.
///
/// `survival` is the product-limit estimate under `kaplan_meier` and
/// exp(−H) under `nelson_aalen`; `cumulative_hazard` is always the
/// Nelson–Aalen sum Σ d_k/n_k (finite even when survival reaches zero).
/// `baseline_hazard` is the discrete rate d_k/(n_k·gap_k) with gap_k the
/// spacing to the previous row (zero-gap rows report 0). The at-risk
/// convention is described in the module docs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub estimator: SurvivalEstimator,
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub cumulative_hazard: Vec<f64>,
    pub baseline_hazard: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
}

/// Estimate the survival curve from an event table (see [`SurvivalCurve`]
/// for the exact conventions). Rows are emitted at every distinct observed
/// time, censoring-only times included (they keep the curve flat). An
/// all-censored table yields S ≡ 1.
pub fn estimate_survival(
    events: &EventTable,
    estimator: SurvivalEstimator,
) -> Result<SurvivalCurve> {
    if events.is_empty() {
        return Err(GehmError::Input(
            "cannot estimate survival from an empty event table".into(),
        ));
    }
    let n_total = events.len();

    // group rows by observation time (ties grouped)
    let mut sorted: Vec<&EventRow> = events.rows().iter().collect();
    sorted.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));

    let mut times = Vec::new();
    let mut survival = Vec::new();
    let mut cumulative_hazard = Vec::new();
    let mut baseline_hazard = Vec::new();
    let mut at_risk = Vec::new();
    let mut d_counts = Vec::new();

    let mut s = 1.0;
    let mut h = 0.0;
    let mut events_before = 0usize;
    let mut prev_time = 0.0;

    let mut idx = 0;
    while idx < sorted.len() {
        let t_k = sorted[idx].time;
        let mut d_k = 0usize;
        while idx < sorted.len() && sorted[idx].time == t_k {
            if sorted[idx].status == EventStatus::Event {
                d_k += 1;
            }
            idx += 1;
        }
        // censored subjects remain at risk: only prior events reduce n_k
        let n_k = n_total - events_before;
        let frac = d_k as f64 / n_k as f64;
        s *= 1.0 - frac;
        h += frac;
        let gap = t_k - prev_time;
        let hazard = if gap > 0.0 {
            d_k as f64 / (n_k as f64 * gap)
        } else {
            0.0
        };

        times.push(t_k);
        survival.push(match estimator {
            SurvivalEstimator::KaplanMeier => s,
            SurvivalEstimator::NelsonAalen => (-h).exp(),
        });
        cumulative_hazard.push(h);
        baseline_hazard.push(hazard);
        at_risk.push(n_k);
        d_counts.push(d_k);

        events_before += d_k;
        prev_time = t_k;
    }

    Ok(SurvivalCurve {
        estimator,
        times,
        survival,
        cumulative_hazard,
        baseline_hazard,
        at_risk,
        events: d_counts,
    })
}
