//! Spectral estimators: the nonlinear principal eigenvalue λ_p, the
//! topological amplification Γ(G) = ρ(W), Rayleigh-type quotients, and the
//! scalar regime index assembled from them.
//!
//! λ_p is estimated by the dual-exponent iteration
//! v ← |L_p v|^{p′−2} L_p v / ‖·‖_p (with 1/p + 1/p′ = 1) on the positive
//! operator L_p = −Δ_p, extracting λ_p = ⟨L_p v, v⟩ at the unit-p-norm
//! iterate. Γ(G) comes from power iteration, either on the raw 0/1 adjacency
//! (`raw_adjacency`) or on the stored weight matrix (`normalized_w`): row
//! normalization forces ρ(W) = 1 on connected graphs, so the basis is always
//! recorded alongside the number.
//!
//! Non-convergence is reported, not thrown: both iterations return their last
//! iterate with `converged = false` when the sweep budget runs out.

use serde::{Deserialize, Serialize};

use crate::error::GehmError;
use crate::graph::WeightedGraph;
use crate::operators::accretive_p_laplacian;
use crate::rng::substream;

use rand::Rng;

type Result<T> = std::result::Result<T, GehmError>;

/// How many consecutive sweeps must satisfy the relative-change criterion.
const STABLE_SWEEPS: usize = 3;
/// Restart budget when the operator annihilates the iterate.
const MAX_RESTARTS: usize = 3;

/// Which matrix the spectral radius Γ(G) is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaBasis {
    /// 0/1 adjacency on the graph structure, ignoring stored weights.
    RawAdjacency,
    /// The stored (possibly normalized) weight matrix.
    NormalizedW,
}

impl GammaBasis {
    pub fn label(&self) -> &'static str {
        match self {
            GammaBasis::RawAdjacency => "raw_adjacency",
            GammaBasis::NormalizedW => "normalized_w",
        }
    }
}

/// Result of the nonlinear eigenvalue iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenpairEstimate {
    pub lambda_p: f64,
    /// Unit-p-norm iterate at the reported eigenvalue.
    pub eigenvector: Vec<f64>,
    /// Operator applications performed.
    pub iterations: usize,
    /// ‖L_p v − λ_p·|v|^{p−2} v‖₂ at the reported iterate. Diagnostic only:
    /// convergence is judged on the eigenvalue sequence, not on this number.
    pub residual: f64,
    pub converged: bool,
}

/// Result of the power iteration for ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub rho: f64,
    pub basis: GammaBasis,
    pub iterations: usize,
    pub converged: bool,
}

/// Combined spectral summary as written to report files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub lambda_p: f64,
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub gamma: f64,
    pub gamma_basis: GammaBasis,
    pub gamma_iterations: usize,
    pub gamma_converged: bool,
}

impl SpectralEstimate {
    pub fn from_parts(eigen: EigenpairEstimate, radius: RadiusEstimate) -> Self {
        SpectralEstimate {
            lambda_p: eigen.lambda_p,
            eigenvector: eigen.eigenvector,
            iterations: eigen.iterations,
            residual: eigen.residual,
            converged: eigen.converged,
            gamma: radius.rho,
            gamma_basis: radius.basis,
            gamma_iterations: radius.iterations,
            gamma_converged: radius.converged,
        }
    }
}

fn check_iteration_params(tol: f64, max_iter: usize) -> Result<()> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(GehmError::Parameter(format!(
            "iteration tolerance must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(GehmError::Parameter("max_iter must be at least 1".into()));
    }
    Ok(())
}

/// Positive random start vector, bounded away from zero.
fn positive_start(n: usize, seed: u64, restart: u64) -> Vec<f64> {
    let mut rng = substream(seed, "spectral-init", restart);
    (0..n).map(|_| 0.1 + 0.9 * rng.gen::<f64>()).collect()
}

fn p_norm(v: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        v.iter()
            .map(|x| x.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

fn normalize_p(v: &mut [f64], p: f64) {
    let norm = p_norm(v, p);
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Estimate the principal nonlinear eigenvalue of L_p = −Δ_p by the
/// dual-exponent iteration (see module docs).
///
/// Convergence requires the relative change of the eigenvalue estimate to
/// stay below `tol` for three consecutive sweeps. Exhausting `max_iter`
/// returns the last iterate with `converged = false` rather than an error;
/// an iterate annihilated by the operator is re-randomized at most three
/// times. An edgeless graph has λ_p = 0 exactly and returns immediately.
pub fn nonlinear_eigenpair(
    graph: &WeightedGraph,
    p: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigenpairEstimate> {
    if !p.is_finite() || p <= 1.0 {
        return Err(GehmError::Parameter(format!(
            "the dual exponent p' = p/(p-1) requires p > 1, got {p}"
        )));
    }
    check_iteration_params(tol, max_iter)?;
    let n = graph.n();
    if graph.directed_edge_count() == 0 {
        // L_p v = 0 for every v: the uniform unit-p-norm vector is an exact
        // eigenvector with eigenvalue zero.
        let v = vec![(n as f64).powf(-1.0 / p); n];
        return Ok(EigenpairEstimate {
            lambda_p: 0.0,
            eigenvector: v,
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }

    let p_dual = p / (p - 1.0);
    let mut restarts = 0usize;
    let mut v = positive_start(n, seed, 0);
    normalize_p(&mut v, p);

    let mut lambda_prev: Option<f64> = None;
    let mut stable = 0usize;
    let mut iterations = 0usize;
    let mut last = EigenpairEstimate {
        lambda_p: 0.0,
        eigenvector: v.clone(),
        iterations: 0,
        residual: 0.0,
        converged: false,
    };

    while iterations < max_iter {
        iterations += 1;
        let y = accretive_p_laplacian(graph, &v, p, 0.0)?;
        let y_norm_sq: f64 = y.iter().map(|x| x * x).sum();
        if y_norm_sq == 0.0 {
            // v sits in the kernel; re-randomize and try again.
            if restarts >= MAX_RESTARTS {
                last.iterations = iterations;
                last.eigenvector = v;
                return Ok(last);
            }
            restarts += 1;
            v = positive_start(n, seed, restarts as u64);
            normalize_p(&mut v, p);
            lambda_prev = None;
            stable = 0;
            continue;
        }

        // v has unit p-norm, so the generalized Rayleigh quotient is ⟨y, v⟩.
        let lambda: f64 = y.iter().zip(&v).map(|(a, b)| a * b).sum();
        let residual_sq: f64 = y
            .iter()
            .zip(&v)
            .map(|(yi, vi)| {
                let target = lambda * vi.abs().powf(p - 2.0) * vi;
                (yi - target) * (yi - target)
            })
            .sum();
        last = EigenpairEstimate {
            lambda_p: lambda,
            eigenvector: v.clone(),
            iterations,
            residual: residual_sq.sqrt(),
            converged: false,
        };

        if let Some(prev) = lambda_prev {
            let rel = (lambda - prev).abs() / lambda.abs().max(f64::MIN_POSITIVE);
            if rel < tol {
                stable += 1;
                if stable >= STABLE_SWEEPS {
                    last.converged = true;
                    return Ok(last);
                }
            } else {
                stable = 0;
            }
        }
        lambda_prev = Some(lambda);

        // Dual-exponent update: z_i = |y_i|^{p'−2} y_i, renormalized.
        let mut z: Vec<f64> = y
            .iter()
            .map(|&yi| {
                if yi == 0.0 {
                    0.0
                } else {
                    yi.abs().powf(p_dual - 2.0) * yi
                }
            })
            .collect();
        normalize_p(&mut z, p);
        v = z;
    }

    Ok(last)
}

/// Estimate ρ of the selected matrix by power iteration with the norm-ratio
/// eigenvalue estimate λ_k = ‖W v_k‖₂ (robust to the ±ρ pair of bipartite
/// structures). Same stability criterion as the nonlinear iteration; running
/// out of sweeps returns `converged = false` with the last estimate.
pub fn spectral_radius(
    graph: &WeightedGraph,
    basis: GammaBasis,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<RadiusEstimate> {
    check_iteration_params(tol, max_iter)?;
    if graph.n() == 0 {
        return Err(GehmError::Input("graph has no nodes".into()));
    }
    if graph.directed_edge_count() == 0 {
        return Ok(RadiusEstimate {
            rho: 0.0,
            basis,
            iterations: 0,
            converged: true,
        });
    }

    let n = graph.n();
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for (j, w) in graph.neighbors(i) {
                let coeff = match basis {
                    GammaBasis::RawAdjacency => 1.0,
                    GammaBasis::NormalizedW => w,
                };
                acc += coeff * v[j];
            }
            out[i] = acc;
        }
        out
    };

    let mut rng = substream(seed, "power-init", 0);
    let mut v: Vec<f64> = (0..n).map(|_| 0.1 + 0.9 * rng.gen::<f64>()).collect();
    normalize_p(&mut v, 2.0);

    let mut rho = 0.0;
    let mut prev: Option<f64> = None;
    let mut stable = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let y = apply(&v);
        let norm = p_norm(&y, 2.0);
        if norm == 0.0 {
            // positive vector annihilated: only possible when every row that
            // v touches is zero; report ρ = 0 for this component.
            rho = 0.0;
            converged = true;
            break;
        }
        rho = norm;
        if let Some(prev_rho) = prev {
            let rel = (rho - prev_rho).abs() / rho.max(f64::MIN_POSITIVE);
            if rel < tol {
                stable += 1;
                if stable >= STABLE_SWEEPS {
                    converged = true;
                    break;
                }
            } else {
                stable = 0;
            }
        }
        prev = Some(rho);
        v = y;
        for x in v.iter_mut() {
            *x /= norm;
        }
    }

    Ok(RadiusEstimate {
        rho,
        basis,
        iterations,
        converged,
    })
}

/// Rayleigh-type quotient ⟨Δ_p u, u⟩ / ‖u‖₂² (diffusive Δ_p, eps = 0).
/// Nonpositive on symmetric weights.
pub fn rayleigh_quotient_p(graph: &WeightedGraph, u: &[f64], p: f64) -> Result<f64> {
    let norm_sq: f64 = u.iter().map(|x| x * x).sum();
    if norm_sq == 0.0 {
        return Err(GehmError::Validation(
            "Rayleigh quotient is undefined for the zero vector".into(),
        ));
    }
    let lap = crate::operators::p_laplacian(graph, u, p, 0.0)?;
    let inner: f64 = lap.iter().zip(u).map(|(a, b)| a * b).sum();
    Ok(inner / norm_sq)
}

/// Scalar regime index R = C_F − λ_p + Γ(G).
pub fn regime_index(c_f: f64, lambda_p: f64, gamma: f64) -> f64 {
    c_f - lambda_p + gamma
}
