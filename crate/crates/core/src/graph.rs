//! Weighted agent networks: builders, validators and switching schedules.
//!
//! Edge convention: `weights[[i, j]]` is the weight of the link carrying
//! information from node `j` into node `i`. Node `i` therefore aggregates
//! over row `i`, which is the form used by the consensus sums in the
//! dynamics.

use std::borrow::Cow;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default tolerance for the weight-balance check.
pub const BALANCE_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid network size {n}: {reason}")]
    InvalidSize { n: usize, reason: &'static str },
    #[error("link probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("link weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("weight matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("negative or non-finite weight {value} at ({row}, {col})")]
    BadEntry { row: usize, col: usize, value: f64 },
    #[error("self-loop with weight {value} at node {node}")]
    SelfLoop { node: usize, value: f64 },
    #[error("network is not weight-balanced (max |row sum - col sum| = {0:e})")]
    NotBalanced(f64),
    #[error("network is not strongly connected")]
    NotStronglyConnected,
    #[error("diameter is undefined for a network that is not strongly connected")]
    NoDiameter,
    #[error("dwell time must be positive, got {0}")]
    InvalidDwell(f64),
    #[error("topology list is empty")]
    EmptySchedule,
    #[error("topology list mixes node counts {0} and {1}")]
    MixedSizes(usize, usize),
    #[error("malformed network file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Weighted adjacency of the agent graph at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr", into = "NetworkRepr")]
pub struct Network {
    weights: Array2<f64>,
    directed: bool,
    label: String,
    // in_links[i] = [(j, w_ij)] for every positive weight
    in_links: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkRepr {
    n: usize,
    directed: bool,
    #[serde(default)]
    label: String,
    weights: Vec<Vec<f64>>,
}

impl TryFrom<NetworkRepr> for Network {
    type Error = GraphError;

    fn try_from(repr: NetworkRepr) -> Result<Self> {
        if repr.weights.len() != repr.n {
            return Err(GraphError::Parse(format!(
                "declared n = {} but {} weight rows",
                repr.n,
                repr.weights.len()
            )));
        }
        let mut weights = Array2::zeros((repr.n, repr.n));
        for (i, row) in repr.weights.iter().enumerate() {
            if row.len() != repr.n {
                return Err(GraphError::NotSquare {
                    rows: repr.n,
                    cols: row.len(),
                });
            }
            for (j, &w) in row.iter().enumerate() {
                weights[[i, j]] = w;
            }
        }
        Network::from_weights(weights, repr.directed, repr.label)
    }
}

impl From<Network> for NetworkRepr {
    fn from(net: Network) -> Self {
        NetworkRepr {
            n: net.n(),
            directed: net.directed,
            label: net.label,
            weights: net.weights.outer_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

impl Network {
    /// Wraps a weight matrix after structural checks (square, non-negative,
    /// zero diagonal). Balance and connectivity are checked by
    /// [`Network::validate`].
    pub fn from_weights(
        weights: Array2<f64>,
        directed: bool,
        label: impl Into<String>,
    ) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(GraphError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(GraphError::InvalidSize {
                n: 0,
                reason: "a network needs at least one node",
            });
        }
        let mut in_links = vec![Vec::new(); rows];
        for ((i, j), &w) in weights.indexed_iter() {
            if !w.is_finite() || w < 0.0 {
                return Err(GraphError::BadEntry {
                    row: i,
                    col: j,
                    value: w,
                });
            }
            if i == j && w != 0.0 {
                return Err(GraphError::SelfLoop { node: i, value: w });
            }
            if w > 0.0 {
                in_links[i].push((j, w));
            }
        }
        Ok(Network {
            weights,
            directed,
            label: label.into(),
            in_links,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Positive-weight links entering node `i`, as `(source, weight)`.
    pub fn in_links(&self, i: usize) -> &[(usize, f64)] {
        &self.in_links[i]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.weights.outer_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.weights
            .columns()
            .into_iter()
            .map(|c| c.sum())
            .collect()
    }

    /// Largest |row sum − column sum| over all nodes.
    pub fn max_imbalance(&self) -> f64 {
        self.row_sums()
            .iter()
            .zip(self.col_sums())
            .map(|(r, c)| (r - c).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_weight_balanced(&self, tol: f64) -> bool {
        self.max_imbalance() <= tol
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n();
        let forward = self.hops_from(0, Direction::Out);
        if forward.iter().any(Option::is_none) {
            return false;
        }
        let backward = self.hops_from(0, Direction::In);
        n > 0 && backward.iter().all(Option::is_some)
    }

    /// Checks weight balance within `tol` and strong connectivity.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let imbalance = self.max_imbalance();
        if imbalance > tol {
            return Err(GraphError::NotBalanced(imbalance));
        }
        if !self.is_strongly_connected() {
            return Err(GraphError::NotStronglyConnected);
        }
        Ok(())
    }

    pub fn laplacian(&self) -> LaplacianView {
        let n = self.n();
        let mut matrix = self.weights.clone();
        for i in 0..n {
            let mut off = 0.0;
            for j in 0..n {
                if j != i {
                    off += self.weights[[i, j]];
                }
            }
            matrix[[i, i]] = -off;
        }
        LaplacianView { matrix }
    }

    /// Longest shortest directed path, in unweighted hops.
    pub fn diameter(&self) -> Result<usize> {
        let mut diameter = 0;
        for source in 0..self.n() {
            for hops in self.hops_from(source, Direction::Out) {
                diameter = diameter.max(hops.ok_or(GraphError::NoDiameter)?);
            }
        }
        Ok(diameter)
    }

    // BFS hop counts from `source`, following links forward (source → i) or
    // backward.
    fn hops_from(&self, source: usize, dir: Direction) -> Vec<Option<usize>> {
        let n = self.n();
        let mut dist = vec![None; n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for v in 0..n {
                let w = match dir {
                    Direction::Out => self.weights[[v, u]],
                    Direction::In => self.weights[[u, v]],
                };
                if w > 0.0 && dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Plain-text matrix format: a header line `n directed` (directed as
    /// `1`/`0`) followed by `n` rows of `n` space-separated weights.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), u8::from(self.directed));
        for row in self.weights.outer_iter() {
            let line: Vec<String> = row.iter().map(|w| w.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse("missing header line".into()))?;
        let mut fields = header.split_whitespace();
        let n: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Parse(format!("bad node count in header {header:?}")))?;
        let directed = match fields.next() {
            Some("1" | "true" | "directed") => true,
            Some("0" | "false" | "undirected") => false,
            other => {
                return Err(GraphError::Parse(format!(
                    "bad directed flag {other:?} in header"
                )))
            }
        };
        let mut weights = Array2::zeros((n, n));
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Parse(format!("expected {n} rows, found {i}")))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GraphError::Parse(format!("row {i}: {e}")))?;
            if row.len() != n {
                return Err(GraphError::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, w) in row.into_iter().enumerate() {
                weights[[i, j]] = w;
            }
        }
        if lines.next().is_some() {
            return Err(GraphError::Parse("trailing rows after the matrix".into()));
        }
        Network::from_weights(weights, directed, "file")
    }

    pub fn read_text_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut net = Self::from_text(&text)?;
        net.label = path.display().to_string();
        Ok(net)
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Out,
    In,
}

/// Laplacian `W̄` of a network: off-diagonal `w_ij`, diagonal `−Σ_j w_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianView {
    matrix: Array2<f64>,
}

impl LaplacianView {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(GraphError::InvalidWeight(w))
    }
}

/// Ring on `n` nodes. Directed rings feed node `i` from node `i − 1`;
/// undirected rings link both neighbours.
pub fn build_cycle(n: usize, w: f64, undirected: bool) -> Result<Network> {
    if n < 2 {
        return Err(GraphError::InvalidSize {
            n,
            reason: "a cycle needs at least two nodes",
        });
    }
    check_weight(w)?;
    let mut weights = Array2::zeros((n, n));
    for i in 0..n {
        weights[[i, (i + n - 1) % n]] = w;
        if undirected {
            weights[[i, (i + 1) % n]] = w;
        }
    }
    let kind = if undirected { "undirected" } else { "directed" };
    Network::from_weights(weights, !undirected, format!("cycle(n={n}, w={w}, {kind})"))
}

/// Circulant digraph on `n = 2^k` nodes where node `i` sends to
/// `i + 2^0, …, i + 2^(k−1)` (mod `n`).
pub fn build_exponential(n: usize, w: f64) -> Result<Network> {
    if n < 2 || !n.is_power_of_two() {
        return Err(GraphError::InvalidSize {
            n,
            reason: "exponential graphs need a power-of-two node count",
        });
    }
    check_weight(w)?;
    let mut weights = Array2::zeros((n, n));
    let mut offset = 1;
    while offset < n {
        for i in 0..n {
            weights[[(i + offset) % n, i]] += w;
        }
        offset *= 2;
    }
    Network::from_weights(weights, true, format!("exponential(n={n}, w={w})"))
}

/// Number of random Hamiltonian cycles superposed for link probability `p`.
pub fn er_cycle_count(n: usize, p: f64) -> usize {
    ((p * (n as f64 - 1.0)).round() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Random weight-balanced, strongly connected digraph with link density
/// close to `p`.
///
/// The graph is a superposition of `round(p (n − 1))` uniformly random
/// directed Hamiltonian cycles. Each cycle carries one weight drawn
/// uniformly from `(0, 1]`, and coinciding links add their weights. Every
/// cycle contributes equal in- and out-weight at each node, and any single
/// cycle already spans the graph, so the result is balanced and strongly
/// connected by construction. `p = 1` yields the complete digraph with
/// unit weights.
pub fn build_er_balanced(n: usize, p: f64, seed: u64) -> Result<Network> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::InvalidProbability(p));
    }
    if n < 2 {
        return Err(GraphError::InvalidSize {
            n,
            reason: "a random digraph needs at least two nodes",
        });
    }
    let label = format!("er(n={n}, p={p}, seed={seed})");
    if p >= 1.0 {
        let mut weights = Array2::ones((n, n));
        weights.diag_mut().fill(0.0);
        return Network::from_weights(weights, true, label);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Array2::zeros((n, n));
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..er_cycle_count(n, p) {
        order.shuffle(&mut rng);
        let w = 1.0 - rng.random::<f64>();
        for k in 0..n {
            let from = order[k];
            let to = order[(k + 1) % n];
            weights[[to, from]] += w;
        }
    }
    Network::from_weights(weights, true, label)
}

/// Family of topologies a schedule draws from.
#[derive(Debug, Clone)]
pub enum Topology {
    Fixed(Network),
    /// A fresh [`build_er_balanced`] draw for every dwell window.
    RandomEr {
        n: usize,
        p: f64,
    },
    /// Cycles through the list, one entry per dwell window.
    List(Vec<Network>),
}

/// Time-to-topology map: the active network is constant over windows of
/// length `dwell`.
#[derive(Debug, Clone)]
pub struct SwitchingSchedule {
    dwell: f64,
    topology: Topology,
    seed: u64,
}

impl SwitchingSchedule {
    pub fn fixed(net: Network) -> Self {
        SwitchingSchedule {
            dwell: f64::INFINITY,
            topology: Topology::Fixed(net),
            seed: 0,
        }
    }

    pub fn new(dwell: f64, topology: Topology, seed: u64) -> Result<Self> {
        if !(dwell > 0.0) {
            return Err(GraphError::InvalidDwell(dwell));
        }
        match &topology {
            Topology::Fixed(_) => {}
            Topology::RandomEr { n, p } => {
                // surface parameter errors at construction time
                build_er_balanced(*n, *p, seed)?;
            }
            Topology::List(nets) => {
                let first = nets.first().ok_or(GraphError::EmptySchedule)?;
                for net in nets {
                    if net.n() != first.n() {
                        return Err(GraphError::MixedSizes(first.n(), net.n()));
                    }
                }
            }
        }
        Ok(SwitchingSchedule {
            dwell,
            topology,
            seed,
        })
    }

    pub fn dwell(&self) -> f64 {
        self.dwell
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn n(&self) -> usize {
        match &self.topology {
            Topology::Fixed(net) => net.n(),
            Topology::RandomEr { n, .. } => *n,
            Topology::List(nets) => nets[0].n(),
        }
    }

    pub fn window(&self, t: f64) -> u64 {
        if self.dwell.is_infinite() || t <= 0.0 {
            0
        } else {
            (t / self.dwell).floor() as u64
        }
    }

    pub fn network_for_window(&self, window: u64) -> Cow<'_, Network> {
        match &self.topology {
            Topology::Fixed(net) => Cow::Borrowed(net),
            Topology::List(nets) => Cow::Borrowed(&nets[(window % nets.len() as u64) as usize]),
            Topology::RandomEr { n, p } => {
                let seed = splitmix64(self.seed ^ splitmix64(window));
                // parameters were validated in `new`
                Cow::Owned(build_er_balanced(*n, *p, seed).expect("validated ER parameters"))
            }
        }
    }

    /// The network active at time `t`.
    pub fn at(&self, t: f64) -> Cow<'_, Network> {
        self.network_for_window(self.window(t))
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn undirected_ring_is_balanced_with_unit_degree() {
        let net = build_cycle(6, 0.5, true).unwrap();
        for (r, c) in net.row_sums().iter().zip(net.col_sums()) {
            assert_eq!(*r, 1.0);
            assert_eq!(c, 1.0);
        }
        assert!(!net.directed());
    }

    #[test]
    fn smallest_directed_ring() {
        let net = build_cycle(2, 1.0, false).unwrap();
        assert_eq!(net.weights(), &array![[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn cycle_rejects_single_node() {
        assert!(matches!(
            build_cycle(1, 1.0, false),
            Err(GraphError::InvalidSize { n: 1, .. })
        ));
        assert!(matches!(
            build_cycle(4, 0.0, false),
            Err(GraphError::InvalidWeight(_))
        ));
    }

    #[test]
    fn exponential_offsets_and_degrees() {
        let net = build_exponential(8, 1.0).unwrap();
        for i in 0..8 {
            let outs: Vec<usize> = (0..8).filter(|&v| net.weights()[[v, i]] > 0.0).collect();
            let mut expected: Vec<usize> = [1, 2, 4].iter().map(|o| (i + o) % 8).collect();
            expected.sort();
            assert_eq!(outs, expected);
            assert_eq!(net.in_links(i).len(), 3);
        }
        assert!(net.is_weight_balanced(BALANCE_TOL));
        assert!(net.is_strongly_connected());
    }

    #[test]
    fn exponential_two_nodes_matches_ring() {
        assert_eq!(
            build_exponential(2, 1.0).unwrap().weights(),
            build_cycle(2, 1.0, false).unwrap().weights()
        );
    }

    #[test]
    fn exponential_rejects_non_power_of_two() {
        assert!(matches!(
            build_exponential(10, 1.0),
            Err(GraphError::InvalidSize { n: 10, .. })
        ));
    }

    #[test]
    fn er_full_probability_is_complete() {
        let net = build_er_balanced(5, 1.0, 9).unwrap();
        for ((i, j), &w) in net.weights().indexed_iter() {
            assert_eq!(w, if i == j { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn er_is_deterministic_per_seed() {
        let a = build_er_balanced(10, 0.4, 7).unwrap();
        let b = build_er_balanced(10, 0.4, 7).unwrap();
        assert_eq!(a.weights(), b.weights());
        let c = build_er_balanced(10, 0.4, 8).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn er_passes_validators() {
        let net = build_er_balanced(15, 0.4, 3).unwrap();
        net.validate(BALANCE_TOL).unwrap();
    }

    #[test]
    fn er_rejects_bad_probability() {
        assert!(matches!(
            build_er_balanced(5, 0.0, 1),
            Err(GraphError::InvalidProbability(_))
        ));
        assert!(matches!(
            build_er_balanced(5, 1.5, 1),
            Err(GraphError::InvalidProbability(_))
        ));
    }

    #[test]
    fn balance_check_examples() {
        let sym = Network::from_weights(
            array![[0.0, 2.0, 0.5], [2.0, 0.0, 1.0], [0.5, 1.0, 0.0]],
            false,
            "sym",
        )
        .unwrap();
        assert!(sym.is_weight_balanced(BALANCE_TOL));
        assert!(build_cycle(3, 0.7, false)
            .unwrap()
            .is_weight_balanced(BALANCE_TOL));
        // rows (1, 2, 1) vs columns (1, 1, 2)
        let skew = Network::from_weights(
            array![[0.0, 1.0, 0.0], [0.0, 0.0, 2.0], [1.0, 0.0, 0.0]],
            true,
            "skew",
        )
        .unwrap();
        assert!(!skew.is_weight_balanced(BALANCE_TOL));
        assert!(matches!(
            skew.validate(BALANCE_TOL),
            Err(GraphError::NotBalanced(_))
        ));
    }

    #[test]
    fn disjoint_rings_are_not_strongly_connected() {
        let mut w = Array2::zeros((6, 6));
        for base in [0, 3] {
            for k in 0..3 {
                w[[base + (k + 1) % 3, base + k]] = 1.0;
            }
        }
        let net = Network::from_weights(w, true, "two rings").unwrap();
        assert!(net.is_weight_balanced(BALANCE_TOL));
        assert!(!net.is_strongly_connected());
        assert!(matches!(net.diameter(), Err(GraphError::NoDiameter)));
        assert!(build_cycle(5, 1.0, false).unwrap().is_strongly_connected());
    }

    #[test]
    fn structural_checks() {
        assert!(matches!(
            Network::from_weights(Array2::zeros((2, 3)), true, ""),
            Err(GraphError::NotSquare { rows: 2, cols: 3 })
        ));
        assert!(matches!(
            Network::from_weights(array![[0.0, -1.0], [1.0, 0.0]], true, ""),
            Err(GraphError::BadEntry { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            Network::from_weights(array![[1.0, 1.0], [1.0, 0.0]], true, ""),
            Err(GraphError::SelfLoop { node: 0, .. })
        ));
    }

    #[test]
    fn laplacian_of_two_ring() {
        let l = build_cycle(2, 1.0, false).unwrap().laplacian();
        assert_eq!(l.matrix(), &array![[-1.0, 1.0], [1.0, -1.0]]);
    }

    #[test]
    fn laplacian_rows_vanish_and_columns_vanish_when_balanced() {
        for net in [
            build_cycle(7, 0.3, false).unwrap(),
            build_exponential(16, 0.9).unwrap(),
            build_er_balanced(12, 0.3, 5).unwrap(),
        ] {
            let l = net.laplacian();
            let m = l.matrix();
            for i in 0..net.n() {
                let off: f64 = (0..net.n()).filter(|&j| j != i).map(|j| m[[i, j]]).sum();
                assert_eq!(off + m[[i, i]], 0.0);
                let col: f64 = m.column(i).sum();
                assert!(col.abs() <= 1e-12, "column {i} sums to {col}");
            }
        }
    }

    #[test]
    fn diameters() {
        assert_eq!(build_cycle(6, 1.0, false).unwrap().diameter().unwrap(), 5);
        assert_eq!(build_cycle(6, 1.0, true).unwrap().diameter().unwrap(), 3);
    }

    #[test]
    fn schedule_windows() {
        let sched =
            SwitchingSchedule::new(0.0015, Topology::RandomEr { n: 15, p: 0.4 }, 1).unwrap();
        assert_eq!(sched.window(0.0020), 1);
        assert_eq!(sched.window(0.0), 0);
        let w0 = sched.network_for_window(0).into_owned();
        let w1 = sched.network_for_window(1).into_owned();
        assert_ne!(w0.weights(), w1.weights());
        // pure in (schedule, t)
        assert_eq!(sched.at(0.0020).weights(), sched.at(0.0020).weights());
        assert_eq!(sched.at(0.0020).weights(), w1.weights());
    }

    #[test]
    fn fixed_schedule_never_switches() {
        let net = build_cycle(4, 1.0, true).unwrap();
        let sched = SwitchingSchedule::fixed(net.clone());
        for t in [0.0, 1.0, 1e6] {
            assert_eq!(sched.at(t).as_ref(), &net);
        }
    }

    #[test]
    fn list_schedule_cycles() {
        let a = build_cycle(4, 1.0, true).unwrap();
        let b = build_cycle(4, 1.0, false).unwrap();
        let sched =
            SwitchingSchedule::new(1.0, Topology::List(vec![a.clone(), b.clone()]), 0).unwrap();
        assert_eq!(sched.at(0.5).as_ref(), &a);
        assert_eq!(sched.at(1.5).as_ref(), &b);
        assert_eq!(sched.at(2.5).as_ref(), &a);
        assert!(matches!(
            SwitchingSchedule::new(1.0, Topology::List(vec![]), 0),
            Err(GraphError::EmptySchedule)
        ));
    }

    #[test]
    fn text_format_round_trip() {
        let net = build_er_balanced(6, 0.5, 2).unwrap();
        let back = Network::from_text(&net.to_text()).unwrap();
        assert_eq!(back.weights(), net.weights());
        assert!(back.directed());
        assert!(matches!(
            Network::from_text("2 1\n0 1\n"),
            Err(GraphError::Parse(_))
        ));
        assert!(matches!(
            Network::from_text("2 maybe\n0 1\n1 0\n"),
            Err(GraphError::Parse(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let net = build_exponential(4, 0.25).unwrap();
        let json = serde_json::to_string(&net).unwrap();
        let back: Network = serde_json::from_str(&json).unwrap();
        assert_eq!(back, net);
        let bad = r#"{"n": 2, "directed": true, "weights": [[0, -1], [1, 0]]}"#;
        assert!(serde_json::from_str::<Network>(bad).is_err());
    }
}
