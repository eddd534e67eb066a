//! Weighted graphs: storage, random generators, weight normalization, file I/O.
//!
//! Graphs are structurally undirected — the directed edge (i, j) exists iff
//! (j, i) does — but each direction carries its own weight, because row
//! normalization divides by per-node degree and therefore breaks value
//! symmetry. Storage is CSR with neighbor lists sorted by target id, so edge
//! iteration order (and every file written from it) is canonical.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::GehmError;
use crate::rng::substream;

type Result<T> = std::result::Result<T, GehmError>;

/// Random-graph families. Generated edges carry unit weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    /// Preferential attachment from a complete seed core on `m` nodes; every
    /// later node attaches `m` edges (duplicate target draws are redrawn).
    BarabasiAlbert { m: usize },
    /// Independent edge inclusion with probability `prob`.
    ErdosRenyi { prob: f64 },
    /// Ring lattice with `k` neighbors per node (`k` even), each ring edge
    /// rewired with probability `beta`.
    WattsStrogatz { k: usize, beta: f64 },
}

impl GraphModel {
    /// Stable identifier used in configs and reports.
    pub fn label(&self) -> &'static str {
        match self {
            GraphModel::BarabasiAlbert { .. } => "barabasi_albert",
            GraphModel::ErdosRenyi { .. } => "erdos_renyi",
            GraphModel::WattsStrogatz { .. } => "watts_strogatz",
        }
    }
}

/// Everything needed to generate a graph deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphModelSpec {
    pub model: GraphModel,
    pub n: usize,
    pub seed: u64,
}

/// Weight normalization schemes.
///
/// `Row` divides each outgoing weight by the node's weighted degree (rows of
/// the weight matrix then sum to 1; value symmetry is lost; nodes with zero
/// weighted degree keep their zero row). `Symmetric` divides w_ij by
/// sqrt(s_i * s_j) with s the weighted degrees, which preserves value
/// symmetry exactly. For unit weights both reduce to the familiar 1/deg and
/// 1/sqrt(deg_i * deg_j) forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    Row,
    Symmetric,
}

impl Normalization {
    /// Stable identifier used in configs and reports.
    pub fn label(&self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::Row => "row",
            Normalization::Symmetric => "symmetric",
        }
    }
}

/// CSR-stored weighted graph. See the module docs for the symmetry contract.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    w: Vec<f64>,
}

impl WeightedGraph {
    /// Build from one entry per unordered pair; the weight is applied to both
    /// directions. Validates ids, self-loops, and duplicates.
    pub fn from_undirected_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut directed = Vec::with_capacity(edges.len() * 2);
        for &(i, j, w) in edges {
            directed.push((i, j, w));
            directed.push((j, i, w));
        }
        Self::from_directed_edges(n, &directed)
    }

    /// Build from one entry per directed edge. Validates ids, self-loops,
    /// duplicates, non-negative finite weights, and structural symmetry.
    pub fn from_directed_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = edges.to_vec();
        for &(i, j, w) in &sorted {
            if i >= n || j >= n {
                return Err(GehmError::Validation(format!(
                    "edge ({i}, {j}) references a node id outside 0..{n}"
                )));
            }
            if i == j {
                return Err(GehmError::Validation(format!("self-loop at node {i}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(GehmError::Validation(format!(
                    "edge ({i}, {j}) has invalid weight {w}"
                )));
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GehmError::Validation(format!(
                    "duplicate edge ({}, {})",
                    pair[0].0, pair[0].1
                )));
            }
        }
        // Structural symmetry: every (i, j) must have a (j, i) partner.
        for &(i, j, _) in &sorted {
            if sorted
                .binary_search_by(|probe| (probe.0, probe.1).cmp(&(j, i)))
                .is_err()
            {
                return Err(GehmError::Validation(format!(
                    "edge ({i}, {j}) has no reverse edge ({j}, {i})"
                )));
            }
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _, _) in &sorted {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col = sorted.iter().map(|e| e.1).collect();
        let w = sorted.iter().map(|e| e.2).collect();
        Ok(WeightedGraph { n, row_ptr, col, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed_edge_count(&self) -> usize {
        self.col.len()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.col.len() / 2
    }

    /// Structural degree: number of neighbors of `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Structural degrees for all nodes; unaffected by weight normalization.
    pub fn degree_vector(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    /// Weighted degree: sum of outgoing weights of `i`.
    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.w[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum()
    }

    /// Outgoing neighbors of `i` as (target, weight), sorted by target.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col[lo..hi].iter().copied().zip(self.w[lo..hi].iter().copied())
    }

    /// All directed edges (i, j, w) in canonical (CSR) order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).map(move |(j, w)| (i, j, w)))
    }

    /// Weight of directed edge (i, j), if present.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col[lo..hi]
            .binary_search(&j)
            .ok()
            .map(|off| self.w[lo + off])
    }

    /// Whether w_ij == w_ji within `tol` for every edge.
    pub fn is_value_symmetric(&self, tol: f64) -> bool {
        self.directed_edges()
            .all(|(i, j, w)| matches!(self.weight(j, i), Some(rev) if (rev - w).abs() <= tol))
    }

    /// Return a copy with renormalized weights (structure unchanged).
    pub fn normalize_weights(&self, scheme: Normalization) -> WeightedGraph {
        match scheme {
            Normalization::None => self.clone(),
            Normalization::Row => {
                let mut out = self.clone();
                for i in 0..self.n {
                    let s = self.weighted_degree(i);
                    if s > 0.0 {
                        for off in self.row_ptr[i]..self.row_ptr[i + 1] {
                            out.w[off] = self.w[off] / s;
                        }
                    }
                }
                out
            }
            Normalization::Symmetric => {
                let s: Vec<f64> = (0..self.n).map(|i| self.weighted_degree(i)).collect();
                let mut out = self.clone();
                for i in 0..self.n {
                    for off in self.row_ptr[i]..self.row_ptr[i + 1] {
                        let j = self.col[off];
                        let denom = s[i] * s[j];
                        out.w[off] = if denom > 0.0 {
                            self.w[off] / denom.sqrt()
                        } else {
                            0.0
                        };
                    }
                }
                out
            }
        }
    }
}

/// Check a spec's parameters without generating anything.
pub fn validate_spec(spec: &GraphModelSpec) -> Result<()> {
    if spec.n == 0 {
        return Err(GehmError::Parameter("graph must have at least one node".into()));
    }
    match spec.model {
        GraphModel::BarabasiAlbert { m } => {
            if m == 0 || m >= spec.n {
                return Err(GehmError::Parameter(format!(
                    "barabasi_albert requires 1 <= m < n (m = {m}, n = {})",
                    spec.n
                )));
            }
        }
        GraphModel::ErdosRenyi { prob } => {
            if !(0.0..=1.0).contains(&prob) {
                return Err(GehmError::Parameter(format!(
                    "erdos_renyi requires prob in [0, 1] (prob = {prob})"
                )));
            }
        }
        GraphModel::WattsStrogatz { k, beta } => {
            if k % 2 != 0 || k >= spec.n {
                return Err(GehmError::Parameter(format!(
                    "watts_strogatz requires even k < n (k = {k}, n = {})",
                    spec.n
                )));
            }
            if !(0.0..=1.0).contains(&beta) {
                return Err(GehmError::Parameter(format!(
                    "watts_strogatz requires beta in [0, 1] (beta = {beta})"
                )));
            }
        }
    }
    Ok(())
}

/// Generate a graph from its spec. Deterministic in (spec, seed): the
/// generator consumes only the `graph-gen` substream of the spec's seed.
pub fn generate(spec: &GraphModelSpec) -> Result<WeightedGraph> {
    validate_spec(spec)?;
    let mut rng = substream(spec.seed, "graph-gen", 0);
    let edges = match spec.model {
        GraphModel::BarabasiAlbert { m } => generate_ba(spec.n, m, &mut rng),
        GraphModel::ErdosRenyi { prob } => generate_er(spec.n, prob, &mut rng),
        GraphModel::WattsStrogatz { k, beta } => generate_ws(spec.n, k, beta, &mut rng),
    };
    let unit: Vec<(usize, usize, f64)> = edges.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    WeightedGraph::from_undirected_edges(spec.n, &unit)
}

fn generate_ba(n: usize, m: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(m * (m - 1) / 2 + (n - m) * m);
    // Complete seed core on nodes 0..m.
    for i in 0..m {
        for j in (i + 1)..m {
            edges.push((i, j));
        }
    }
    // One entry per edge endpoint: sampling from this list is sampling
    // proportionally to degree.
    let mut pool: Vec<usize> = Vec::with_capacity(2 * edges.len() + 2 * m * (n - m));
    for &(i, j) in &edges {
        pool.push(i);
        pool.push(j);
    }
    for v in m..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = if pool.is_empty() {
                // m = 1 core has no edges yet: fall back to uniform attachment.
                rng.gen_range(0..v)
            } else {
                pool[rng.gen_range(0..pool.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            pool.push(t);
            pool.push(v);
        }
    }
    edges
}

fn generate_er(n: usize, prob: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    edges
}

fn generate_ws(n: usize, k: usize, beta: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    // Ring slots in offset-major order; each slot owns one edge throughout.
    let mut slots: Vec<(usize, usize)> = Vec::with_capacity(n * k / 2);
    for off in 1..=(k / 2) {
        for i in 0..n {
            slots.push((i, (i + off) % n));
        }
    }
    let mut present: std::collections::HashSet<(usize, usize)> =
        slots.iter().map(|&(a, b)| key(a, b)).collect();
    for idx in 0..slots.len() {
        if rng.gen::<f64>() >= beta {
            continue;
        }
        let (src, old) = slots[idx];
        present.remove(&key(src, old));
        let mut replaced = false;
        for _ in 0..n {
            let t = rng.gen_range(0..n);
            if t != src && !present.contains(&key(src, t)) {
                present.insert(key(src, t));
                slots[idx] = (src, t);
                replaced = true;
                break;
            }
        }
        if !replaced {
            // Node already adjacent to everything it can be; keep the edge.
            present.insert(key(src, old));
        }
    }
    slots
}

/// Write the edge-list format: header `gehm-graph v1 n=<n>`, then one line
/// `i j w` per directed edge with 17 significant digits (exact round-trip).
pub fn write_graph<W: Write>(graph: &WeightedGraph, mut out: W) -> Result<()> {
    writeln!(out, "gehm-graph v1 n={}", graph.n())?;
    for (i, j, w) in graph.directed_edges() {
        writeln!(out, "{i} {j} {w:.16e}")?;
    }
    Ok(())
}

/// Read the format produced by [`write_graph`]. Parse errors carry 1-based
/// line numbers; structural problems surface as validation errors.
pub fn read_graph<R: BufRead>(input: R) -> Result<WeightedGraph> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(GehmError::Parse {
                line: 1,
                message: "empty file; expected header `gehm-graph v1 n=<n>`".into(),
            })
        }
    };
    let n: usize = header
        .strip_prefix("gehm-graph v1 n=")
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| GehmError::Parse {
            line: 1,
            message: format!("bad header {header:?}; expected `gehm-graph v1 n=<n>`"),
        })?;

    let mut edges = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>, what: &str| -> Result<String> {
            tok.map(str::to_owned).ok_or_else(|| GehmError::Parse {
                line: line_no,
                message: format!("missing {what}; expected `i j w`"),
            })
        };
        let i: usize = parse(parts.next(), "source id")?
            .parse()
            .map_err(|e| GehmError::Parse {
                line: line_no,
                message: format!("bad source id: {e}"),
            })?;
        let j: usize = parse(parts.next(), "target id")?
            .parse()
            .map_err(|e| GehmError::Parse {
                line: line_no,
                message: format!("bad target id: {e}"),
            })?;
        let w: f64 = parse(parts.next(), "weight")?
            .parse()
            .map_err(|e| GehmError::Parse {
                line: line_no,
                message: format!("bad weight: {e}"),
            })?;
        if parts.next().is_some() {
            return Err(GehmError::Parse {
                line: line_no,
                message: "trailing tokens; expected exactly `i j w`".into(),
            });
        }
        edges.push((i, j, w));
    }
    WeightedGraph::from_directed_edges(n, &edges)
}

pub fn save_graph<P: AsRef<Path>>(graph: &WeightedGraph, path: P) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_graph(graph, std::io::BufWriter::new(file))
}

pub fn load_graph<P: AsRef<Path>>(path: P) -> Result<WeightedGraph> {
    let file = std::fs::File::open(path)?;
    read_graph(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(model: GraphModel, n: usize, seed: u64) -> GraphModelSpec {
        GraphModelSpec { model, n, seed }
    }

    #[test]
    fn ba_is_deterministic_per_seed() {
        let a = generate(&spec(GraphModel::BarabasiAlbert { m: 3 }, 100, 9)).unwrap();
        let b = generate(&spec(GraphModel::BarabasiAlbert { m: 3 }, 100, 9)).unwrap();
        let c = generate(&spec(GraphModel::BarabasiAlbert { m: 3 }, 100, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ba_edge_count_and_seed_core() {
        let g = generate(&spec(GraphModel::BarabasiAlbert { m: 3 }, 200, 1)).unwrap();
        // complete core C(3,2) = 3, plus 3 edges per later node
        assert_eq!(g.undirected_edge_count(), 3 + 197 * 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(g.weight(i, j), Some(1.0));
                }
            }
        }
        // every attached node has degree >= m
        assert!((3..200).all(|v| g.degree(v) >= 3));
    }

    #[test]
    fn ba_m1_single_seed_node() {
        let g = generate(&spec(GraphModel::BarabasiAlbert { m: 1 }, 50, 4)).unwrap();
        // tree: n-1 edges, connected by construction
        assert_eq!(g.undirected_edge_count(), 49);
        assert!((0..50).all(|v| g.degree(v) >= 1));
    }

    #[test]
    fn er_prob_extremes() {
        let empty = generate(&spec(GraphModel::ErdosRenyi { prob: 0.0 }, 5, 2)).unwrap();
        assert_eq!(empty.directed_edge_count(), 0);
        let full = generate(&spec(GraphModel::ErdosRenyi { prob: 1.0 }, 6, 2)).unwrap();
        assert_eq!(full.undirected_edge_count(), 15);
    }

    #[test]
    fn er_handshake() {
        let g = generate(&spec(GraphModel::ErdosRenyi { prob: 0.3 }, 40, 11)).unwrap();
        let deg_sum: usize = g.degree_vector().iter().sum();
        assert_eq!(deg_sum, g.directed_edge_count());
        assert_eq!(g.directed_edge_count() % 2, 0);
    }

    #[test]
    fn ws_beta_zero_is_ring() {
        let g = generate(&spec(GraphModel::WattsStrogatz { k: 2, beta: 0.0 }, 6, 3)).unwrap();
        assert_eq!(g.undirected_edge_count(), 6);
        for i in 0..6 {
            assert_eq!(g.degree(i), 2);
            assert_eq!(g.weight(i, (i + 1) % 6), Some(1.0));
        }
    }

    #[test]
    fn ws_rewiring_preserves_edge_count() {
        let g = generate(&spec(GraphModel::WattsStrogatz { k: 6, beta: 0.7 }, 60, 8)).unwrap();
        assert_eq!(g.undirected_edge_count(), 60 * 3);
        // every node keeps at least its k/2 source stubs
        assert!((0..60).all(|v| g.degree(v) >= 3));
    }

    #[test]
    fn generator_parameter_errors() {
        assert!(generate(&spec(GraphModel::BarabasiAlbert { m: 0 }, 5, 0)).is_err());
        assert!(generate(&spec(GraphModel::BarabasiAlbert { m: 5 }, 5, 0)).is_err());
        assert!(generate(&spec(GraphModel::ErdosRenyi { prob: 1.5 }, 5, 0)).is_err());
        assert!(generate(&spec(GraphModel::WattsStrogatz { k: 3, beta: 0.1 }, 10, 0)).is_err());
        assert!(generate(&spec(GraphModel::WattsStrogatz { k: 10, beta: 0.1 }, 10, 0)).is_err());
        assert!(generate(&spec(GraphModel::WattsStrogatz { k: 4, beta: -0.1 }, 10, 0)).is_err());
    }

    fn star4() -> WeightedGraph {
        // center 0 with leaves 1..=3
        WeightedGraph::from_undirected_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap()
    }

    #[test]
    fn row_normalization_star() {
        let g = star4().normalize_weights(Normalization::Row);
        for leaf in 1..4 {
            assert_eq!(g.weight(0, leaf), Some(1.0 / 3.0));
            assert_eq!(g.weight(leaf, 0), Some(1.0));
        }
        for i in 0..4 {
            assert!((g.weighted_degree(i) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_normalization_star() {
        let g = star4().normalize_weights(Normalization::Symmetric);
        let expected = 1.0 / 3.0f64.sqrt();
        for leaf in 1..4 {
            assert_eq!(g.weight(0, leaf), g.weight(leaf, 0));
            assert!((g.weight(0, leaf).unwrap() - expected).abs() < 1e-15);
        }
        assert!(g.is_value_symmetric(0.0));
    }

    #[test]
    fn row_normalization_breaks_value_symmetry() {
        let path = WeightedGraph::from_undirected_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let g = path.normalize_weights(Normalization::Row);
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(g.weight(1, 0), Some(0.5));
        assert!(!g.is_value_symmetric(1e-12));
        // structural degrees untouched
        assert_eq!(g.degree_vector(), vec![1, 2, 1]);
    }

    #[test]
    fn isolated_node_keeps_zero_row() {
        let g = WeightedGraph::from_undirected_edges(3, &[(0, 1, 1.0)]).unwrap();
        let norm = g.normalize_weights(Normalization::Row);
        assert_eq!(norm.degree(2), 0);
        assert_eq!(norm.weighted_degree(2), 0.0);
    }

    #[test]
    fn io_round_trip_is_exact() {
        let g = generate(&spec(GraphModel::BarabasiAlbert { m: 2 }, 30, 5))
            .unwrap()
            .normalize_weights(Normalization::Row);
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let back = read_graph(buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn io_isolated_nodes_round_trip() {
        let g = WeightedGraph::from_undirected_edges(4, &[]).unwrap();
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "gehm-graph v1 n=4\n");
        let back = read_graph(buf.as_slice()).unwrap();
        assert_eq!(back.n(), 4);
        assert_eq!(back.directed_edge_count(), 0);
    }

    #[test]
    fn io_weight_has_17_significant_digits() {
        let g = WeightedGraph::from_undirected_edges(2, &[(0, 1, 1.0 / 3.0)]).unwrap();
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("3.3333333333333331e-1"), "got: {text}");
    }

    #[test]
    fn io_rejects_bad_input() {
        let bad_header = read_graph("not-a-graph\n".as_bytes());
        assert!(matches!(bad_header, Err(GehmError::Parse { line: 1, .. })));

        let bad_line = read_graph("gehm-graph v1 n=2\n0 1 oops\n".as_bytes());
        match bad_line {
            Err(GehmError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let out_of_range = read_graph("gehm-graph v1 n=2\n0 5 1.0\n5 0 1.0\n".as_bytes());
        assert!(matches!(out_of_range, Err(GehmError::Validation(_))));

        let asymmetric = read_graph("gehm-graph v1 n=3\n0 1 1.0\n".as_bytes());
        assert!(matches!(asymmetric, Err(GehmError::Validation(_))));

        let self_loop = WeightedGraph::from_undirected_edges(3, &[(1, 1, 1.0)]);
        assert!(matches!(self_loop, Err(GehmError::Validation(_))));

        let duplicate = WeightedGraph::from_undirected_edges(3, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(duplicate, Err(GehmError::Validation(_))));
    }

    #[test]
    fn neighbor_lists_sorted() {
        let g = generate(&spec(GraphModel::ErdosRenyi { prob: 0.4 }, 25, 17)).unwrap();
        for i in 0..25 {
            let nbrs: Vec<usize> = g.neighbors(i).map(|(j, _)| j).collect();
            let mut sorted = nbrs.clone();
            sorted.sort_unstable();
            assert_eq!(nbrs, sorted);
        }
    }
}
