//! Discrete differential operators and force terms.
//!
//! The p-Laplacian here is the *diffusive* orientation,
//!
//! ```text
//! (Δ_p u)_i = Σ_j w_ij (|u_j − u_i| + eps)^{p−2} (u_j − u_i),
//! ```
//!
//! so the explicit update `u ← u + Δt·Δ_p u` smooths. The positive
//! (accretive) operator `L_p = −Δ_p` satisfies ⟨L_p u − L_p v, u − v⟩ ≥ 0 on
//! symmetric weights and is exposed as [`accretive_p_laplacian`] for theory
//! checks. The regularization `eps` touches only the magnitude factor, so a
//! zero gradient contributes exactly zero for every p (including p < 2).
//!
//! The discrete gradient uses the complementary sign, (∇u)_ij = u_i − u_j,
//! which makes `divergence(grad u)` equal to `L_2 u = −Δ_2 u`.

use serde::{Deserialize, Serialize};

use crate::error::GehmError;
use crate::graph::WeightedGraph;

type Result<T> = std::result::Result<T, GehmError>;

/// One value per directed edge, aligned with
/// [`WeightedGraph::directed_edges`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    values: Vec<f64>,
}

impl EdgeField {
    /// Wrap raw per-edge values; length must match the graph's directed edge
    /// count and all entries must be finite.
    pub fn new(graph: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.directed_edge_count() {
            return Err(GehmError::Input(format!(
                "edge field has {} values but the graph has {} directed edges",
                values.len(),
                graph.directed_edge_count()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(GehmError::Input(format!(
                "edge field entry {bad} is not finite"
            )));
        }
        Ok(EdgeField { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Named scalar maps usable as reaction modulators. The registry is closed so
/// configs stay declarative: a map is referenced by name plus parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMap {
    /// x ↦ x
    Identity,
    /// x ↦ c
    Constant(f64),
    /// x ↦ exp(a·x)
    ExpScaled(f64),
    /// x ↦ tanh(a·x)
    TanhScaled(f64),
}

impl ScalarMap {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ScalarMap::Identity => x,
            ScalarMap::Constant(c) => c,
            ScalarMap::ExpScaled(a) => (a * x).exp(),
            ScalarMap::TanhScaled(a) => (a * x).tanh(),
        }
    }

    /// Largest |value| over a uniform grid on [lo, hi]; used as a Lipschitz
    /// stand-in when a closed-form bound is unavailable.
    pub fn sup_abs_on(&self, lo: f64, hi: f64, points: usize) -> f64 {
        let points = points.max(2);
        (0..points)
            .map(|k| {
                let x = lo + (hi - lo) * (k as f64) / ((points - 1) as f64);
                self.eval(x).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let param = match *self {
            ScalarMap::Identity => return Ok(()),
            ScalarMap::Constant(c) => c,
            ScalarMap::ExpScaled(a) => a,
            ScalarMap::TanhScaled(a) => a,
        };
        if param.is_finite() {
            Ok(())
        } else {
            Err(GehmError::Parameter(format!(
                "scalar map parameter must be finite, got {param}"
            )))
        }
    }
}

/// Reaction forcing F(u, x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionSpec {
    /// F_i = c_f·u_i + eta·x
    Linear { c_f: f64, eta: f64 },
    /// F_i = phi(x)·u_i + psi(x)
    Modulated { phi: ScalarMap, psi: ScalarMap },
}

impl ReactionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ReactionSpec::Linear { c_f, eta } => {
                for (name, v) in [("c_f", *c_f), ("eta", *eta)] {
                    if !v.is_finite() {
                        return Err(GehmError::Parameter(format!(
                            "reaction parameter {name} must be finite, got {v}"
                        )));
                    }
                }
                Ok(())
            }
            ReactionSpec::Modulated { phi, psi } => {
                phi.validate()?;
                psi.validate()
            }
        }
    }
}

/// Noise amplitude field σ(u, x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Constant amplitude σ on every node.
    Additive { sigma: f64 },
    /// σ_i = sigma0·(1 + deg(i)^eta_deg)·(1 + |u_i|^alpha)·(1 + |x|^beta)
    Multiplicative {
        sigma0: f64,
        eta_deg: f64,
        alpha: f64,
        beta: f64,
    },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Additive { sigma } => {
                if !sigma.is_finite() || *sigma < 0.0 {
                    return Err(GehmError::Parameter(format!(
                        "additive noise requires sigma >= 0, got {sigma}"
                    )));
                }
                Ok(())
            }
            NoiseSpec::Multiplicative {
                sigma0,
                eta_deg,
                alpha,
                beta,
            } => {
                if !sigma0.is_finite() || *sigma0 < 0.0 {
                    return Err(GehmError::Parameter(format!(
                        "multiplicative noise requires sigma0 >= 0, got {sigma0}"
                    )));
                }
                for (name, v) in [("eta_deg", *eta_deg), ("alpha", *alpha), ("beta", *beta)] {
                    if !v.is_finite() {
                        return Err(GehmError::Parameter(format!(
                            "noise exponent {name} must be finite, got {v}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// True when the amplitude is structurally zero for every state, so a
    /// simulation can skip the Gaussian draws entirely.
    pub fn is_structurally_zero(&self) -> bool {
        match self {
            NoiseSpec::Additive { sigma } => *sigma == 0.0,
            NoiseSpec::Multiplicative { sigma0, .. } => *sigma0 == 0.0,
        }
    }
}

fn check_node_vector(graph: &WeightedGraph, u: &[f64], what: &str) -> Result<()> {
    if u.len() != graph.n() {
        return Err(GehmError::Input(format!(
            "{what} has length {} but the graph has {} nodes",
            u.len(),
            graph.n()
        )));
    }
    if let Some(bad) = u.iter().position(|v| !v.is_finite()) {
        return Err(GehmError::Input(format!(
            "{what} entry {bad} is not finite"
        )));
    }
    Ok(())
}

/// Discrete gradient: (∇u)_ij = u_i − u_j on every directed edge.
pub fn discrete_gradient(graph: &WeightedGraph, u: &[f64]) -> Result<EdgeField> {
    check_node_vector(graph, u, "node vector")?;
    let values = graph
        .directed_edges()
        .map(|(i, j, _)| u[i] - u[j])
        .collect();
    Ok(EdgeField { values })
}

/// Weighted divergence: (div g)_i = Σ_j w_ij g_ij.
pub fn divergence(graph: &WeightedGraph, g: &EdgeField) -> Result<Vec<f64>> {
    if g.len() != graph.directed_edge_count() {
        return Err(GehmError::Input(format!(
            "edge field has {} values but the graph has {} directed edges",
            g.len(),
            graph.directed_edge_count()
        )));
    }
    let mut out = vec![0.0; graph.n()];
    let mut offset = 0;
    for i in 0..graph.n() {
        let mut acc = 0.0;
        for (_, w) in graph.neighbors(i) {
            acc += w * g.values[offset];
            offset += 1;
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Graph p-Laplacian in the diffusive orientation (see module docs).
///
/// Requires p ≥ 1 and eps ≥ 0. At p = 2 the magnitude factor is identically
/// one, so the operator reduces to Σ_j w_ij (u_j − u_i) for any eps.
pub fn p_laplacian(graph: &WeightedGraph, u: &[f64], p: f64, eps: f64) -> Result<Vec<f64>> {
    if !p.is_finite() || p < 1.0 {
        return Err(GehmError::Parameter(format!(
            "p-Laplacian requires p >= 1, got {p}"
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(GehmError::Parameter(format!(
            "p-Laplacian requires eps >= 0, got {eps}"
        )));
    }
    check_node_vector(graph, u, "node vector")?;

    let n = graph.n();
    let mut out = vec![0.0; n];
    if p == 2.0 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, w) in graph.neighbors(i) {
                acc += w * (u[j] - u[i]);
            }
            out[i] = acc;
        }
    } else {
        let q = p - 2.0;
        for i in 0..n {
            let mut acc = 0.0;
            for (j, w) in graph.neighbors(i) {
                let d = u[j] - u[i];
                // d == 0 contributes exactly zero; skipping also avoids
                // 0^{negative} for p < 2 at eps = 0.
                if d != 0.0 {
                    acc += w * (d.abs() + eps).powf(q) * d;
                }
            }
            out[i] = acc;
        }
    }
    Ok(out)
}

/// The positive operator L_p = −Δ_p (monotone/accretive on symmetric weights).
pub fn accretive_p_laplacian(
    graph: &WeightedGraph,
    u: &[f64],
    p: f64,
    eps: f64,
) -> Result<Vec<f64>> {
    let mut out = p_laplacian(graph, u, p, eps)?;
    for v in &mut out {
        *v = -*v;
    }
    Ok(out)
}

/// Reaction forcing per node (see [`ReactionSpec`] for the two forms).
pub fn reaction_term(u: &[f64], x: f64, spec: &ReactionSpec) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(GehmError::Input(format!(
            "modulation state x must be finite, got {x}"
        )));
    }
    spec.validate()?;
    let (gain, offset) = match spec {
        ReactionSpec::Linear { c_f, eta } => (*c_f, eta * x),
        ReactionSpec::Modulated { phi, psi } => (phi.eval(x), psi.eval(x)),
    };
    Ok(u.iter().map(|&ui| gain * ui + offset).collect())
}

/// Noise amplitude per node (see [`NoiseSpec`] for the two forms).
pub fn noise_coefficients(
    graph: &WeightedGraph,
    u: &[f64],
    x: f64,
    spec: &NoiseSpec,
) -> Result<Vec<f64>> {
    check_node_vector(graph, u, "node vector")?;
    if !x.is_finite() {
        return Err(GehmError::Input(format!(
            "modulation state x must be finite, got {x}"
        )));
    }
    spec.validate()?;
    match spec {
        NoiseSpec::Additive { sigma } => Ok(vec![*sigma; graph.n()]),
        NoiseSpec::Multiplicative {
            sigma0,
            eta_deg,
            alpha,
            beta,
        } => {
            let x_factor = 1.0 + x.abs().powf(*beta);
            Ok((0..graph.n())
                .map(|i| {
                    let deg_factor = 1.0 + (graph.degree(i) as f64).powf(*eta_deg);
                    let u_factor = 1.0 + u[i].abs().powf(*alpha);
                    sigma0 * deg_factor * u_factor * x_factor
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphModel, GraphModelSpec, Normalization};
    use crate::rng::substream;
    use rand::Rng;

    fn two_node() -> WeightedGraph {
        WeightedGraph::from_undirected_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn random_graph(seed: u64, n: usize) -> WeightedGraph {
        generate(&GraphModelSpec {
            model: GraphModel::ErdosRenyi { prob: 0.4 },
            n,
            seed,
        })
        .unwrap()
    }

    fn random_vec(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = substream(seed, "init", 0);
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = random_graph(1, 12);
        let u = vec![3.25; 12];
        let field = discrete_gradient(&g, &u).unwrap();
        assert!(field.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_two_node_signs() {
        let g = two_node();
        let field = discrete_gradient(&g, &[1.0, 0.0]).unwrap();
        assert_eq!(field.values(), &[1.0, -1.0]);
    }

    #[test]
    fn gradient_is_antisymmetric() {
        for seed in 0..20 {
            let g = random_graph(seed, 15);
            let u = random_vec(seed, 15);
            let field = discrete_gradient(&g, &u).unwrap();
            let pos: std::collections::HashMap<(usize, usize), f64> = g
                .directed_edges()
                .map(|(i, j, _)| (i, j))
                .zip(field.values().iter().copied())
                .collect();
            for (&(i, j), &v) in &pos {
                assert_eq!(v, -pos[&(j, i)]);
            }
        }
    }

    #[test]
    fn divergence_zero_field() {
        let g = random_graph(2, 9);
        let zero = EdgeField::new(&g, vec![0.0; g.directed_edge_count()]).unwrap();
        assert!(divergence(&g, &zero).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_two_node() {
        let g = two_node();
        let field = EdgeField::new(&g, vec![1.0, -1.0]).unwrap();
        assert_eq!(divergence(&g, &field).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn div_grad_equals_accretive_laplacian_at_p2() {
        for seed in 0..20 {
            let g = random_graph(seed + 40, 14).normalize_weights(Normalization::Row);
            let u = random_vec(seed, 14);
            let composed = divergence(&g, &discrete_gradient(&g, &u).unwrap()).unwrap();
            let direct = accretive_p_laplacian(&g, &u, 2.0, 0.0).unwrap();
            for (a, b) in composed.iter().zip(&direct) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn laplacian_kernel_is_exact() {
        let g = random_graph(7, 11);
        for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
            for eps in [0.0, 1e-8] {
                let out = p_laplacian(&g, &vec![std::f64::consts::PI; 11], p, eps).unwrap();
                assert!(out.iter().all(|&v| v == 0.0), "p = {p}, eps = {eps}");
            }
        }
    }

    #[test]
    fn laplacian_two_node_p3() {
        let g = two_node();
        let out = p_laplacian(&g, &[1.0, 0.0], 3.0, 0.0).unwrap();
        assert_eq!(out, vec![-1.0, 1.0]);
    }

    #[test]
    fn laplacian_p2_matches_dense_matrix() {
        for seed in 0..10 {
            let g = random_graph(seed + 100, 17);
            let u = random_vec(seed + 100, 17);
            // dense oracle: (−L u)_i with L = D − W
            let mut expected = vec![0.0; 17];
            for i in 0..17 {
                let mut row = 0.0;
                for j in 0..17 {
                    let w = g.weight(i, j).unwrap_or(0.0);
                    row += w * u[j];
                }
                expected[i] = row - g.weighted_degree(i) * u[i];
            }
            let out = p_laplacian(&g, &u, 2.0, 0.0).unwrap();
            for (a, b) in out.iter().zip(&expected) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn tied_values_contribute_exact_zero() {
        let g = two_node();
        for p in [1.5, 3.0] {
            let out = p_laplacian(&g, &[0.7, 0.7], p, 1e-8).unwrap();
            assert_eq!(out, vec![0.0, 0.0], "p = {p}");
        }
        // p < 2 at eps = 0 must not produce NaN from the tied pair
        let out = p_laplacian(&g, &[0.7, 0.7], 1.5, 0.0).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn mass_conservation_on_symmetric_weights() {
        for seed in 0..10 {
            let g = random_graph(seed + 300, 20).normalize_weights(Normalization::Symmetric);
            let u = random_vec(seed + 300, 20);
            for p in [2.0, 3.0, 4.0] {
                let out = p_laplacian(&g, &u, p, 1e-8).unwrap();
                let total: f64 = out.iter().sum();
                assert!(total.abs() <= 1e-10, "p = {p}, total = {total}");
            }
        }
    }

    #[test]
    fn monotonicity_spot_check() {
        for seed in 0..30 {
            let g = random_graph(seed + 500, 12);
            let u = random_vec(seed, 12);
            let v = random_vec(seed + 999, 12);
            for p in [2.0, 3.0, 4.0] {
                let du = p_laplacian(&g, &u, p, 0.0).unwrap();
                let dv = p_laplacian(&g, &v, p, 0.0).unwrap();
                let inner: f64 = (0..12).map(|i| (du[i] - dv[i]) * (u[i] - v[i])).sum();
                assert!(inner <= 1e-10, "p = {p}, inner = {inner}");
            }
        }
    }

    #[test]
    fn p2_is_linear() {
        let g = random_graph(31, 13);
        let u = random_vec(31, 13);
        let v = random_vec(32, 13);
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let du = p_laplacian(&g, &u, 2.0, 0.0).unwrap();
        let dv = p_laplacian(&g, &v, 2.0, 0.0).unwrap();
        let dsum = p_laplacian(&g, &sum, 2.0, 0.0).unwrap();
        for i in 0..13 {
            assert!((dsum[i] - (2.0 * du[i] - 0.5 * dv[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn accretive_is_negation() {
        let g = random_graph(8, 10);
        let u = random_vec(8, 10);
        let lap = p_laplacian(&g, &u, 3.0, 1e-8).unwrap();
        let acc = accretive_p_laplacian(&g, &u, 3.0, 1e-8).unwrap();
        for (a, b) in lap.iter().zip(&acc) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn reaction_linear_values() {
        let spec = ReactionSpec::Linear { c_f: 0.5, eta: 1.0 };
        let out = reaction_term(&[2.0, -2.0], 0.1, &spec).unwrap();
        assert!((out[0] - 1.1).abs() <= 1e-15);
        assert!((out[1] + 0.9).abs() <= 1e-15);

        let zero = ReactionSpec::Linear { c_f: 0.0, eta: 0.0 };
        let out = reaction_term(&[5.0, -3.0, 0.2], 7.0, &zero).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn modulated_constant_maps_reproduce_linear() {
        let x = 0.37;
        let linear = ReactionSpec::Linear { c_f: 0.5, eta: 2.0 };
        let modulated = ReactionSpec::Modulated {
            phi: ScalarMap::Constant(0.5),
            psi: ScalarMap::Constant(2.0 * x),
        };
        for seed in 0..100 {
            let u = random_vec(seed + 1000, 8);
            let a = reaction_term(&u, x, &linear).unwrap();
            let b = reaction_term(&u, x, &modulated).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn scalar_map_registry() {
        assert_eq!(ScalarMap::Identity.eval(0.8), 0.8);
        assert_eq!(ScalarMap::Constant(2.5).eval(-1.0), 2.5);
        assert!((ScalarMap::ExpScaled(2.0).eval(0.5) - 1.0f64.exp()).abs() <= 1e-15);
        assert!((ScalarMap::TanhScaled(0.5).eval(2.0) - 1.0f64.tanh()).abs() <= 1e-15);
        assert!((ScalarMap::TanhScaled(3.0).sup_abs_on(-2.0, 2.0, 401) - (6.0f64).tanh()).abs() <= 1e-12);
        assert!(ScalarMap::Constant(f64::NAN).validate().is_err());
    }

    #[test]
    fn noise_additive_constant() {
        let g = random_graph(3, 6);
        let out = noise_coefficients(&g, &[0.0; 6], 1.3, &NoiseSpec::Additive { sigma: 0.02 })
            .unwrap();
        assert_eq!(out, vec![0.02; 6]);
    }

    #[test]
    fn noise_multiplicative_zero_exponents() {
        let g = random_graph(4, 8);
        let spec = NoiseSpec::Multiplicative {
            sigma0: 1.0,
            eta_deg: 0.0,
            alpha: 0.0,
            beta: 0.0,
        };
        let out = noise_coefficients(&g, &random_vec(4, 8), -2.7, &spec).unwrap();
        assert_eq!(out, vec![8.0; 8]);
    }

    #[test]
    fn noise_multiplicative_monotone_in_state() {
        let g = random_graph(5, 10);
        let spec = NoiseSpec::Multiplicative {
            sigma0: 0.3,
            eta_deg: 0.5,
            alpha: 1.5,
            beta: 1.0,
        };
        let mut rng = substream(77, "init", 1);
        for _ in 0..50 {
            let u: Vec<f64> = (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let scaled: Vec<f64> = u.iter().map(|v| v * 1.7).collect();
            let small = noise_coefficients(&g, &u, 0.4, &spec).unwrap();
            let large = noise_coefficients(&g, &scaled, 0.4, &spec).unwrap();
            for i in 0..10 {
                assert!(large[i] >= small[i]);
            }
        }
    }

    #[test]
    fn operator_error_paths() {
        let g = two_node();
        assert!(matches!(
            p_laplacian(&g, &[1.0, 0.0], 0.5, 0.0),
            Err(GehmError::Parameter(_))
        ));
        assert!(matches!(
            p_laplacian(&g, &[1.0, f64::NAN], 2.0, 0.0),
            Err(GehmError::Input(_))
        ));
        assert!(matches!(
            p_laplacian(&g, &[1.0], 2.0, 0.0),
            Err(GehmError::Input(_))
        ));
        assert!(matches!(
            discrete_gradient(&g, &[1.0, 2.0, 3.0]),
            Err(GehmError::Input(_))
        ));
        assert!(matches!(
            EdgeField::new(&g, vec![1.0]),
            Err(GehmError::Input(_))
        ));
        assert!(matches!(
            noise_coefficients(&g, &[0.0, 0.0], 0.0, &NoiseSpec::Additive { sigma: -1.0 }),
            Err(GehmError::Parameter(_))
        ));
        let bad_mult = NoiseSpec::Multiplicative {
            sigma0: -0.1,
            eta_deg: 0.0,
            alpha: 0.0,
            beta: 0.0,
        };
        assert!(bad_mult.validate().is_err());
    }

    #[test]
    fn structurally_zero_noise_detection() {
        assert!(NoiseSpec::Additive { sigma: 0.0 }.is_structurally_zero());
        assert!(!NoiseSpec::Additive { sigma: 0.1 }.is_structurally_zero());
        assert!(NoiseSpec::Multiplicative {
            sigma0: 0.0,
            eta_deg: 1.0,
            alpha: 1.0,
            beta: 1.0
        }
        .is_structurally_zero());
    }
}
