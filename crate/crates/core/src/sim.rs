//! SI outbreak simulation: exact path sums on trees and first-passage times
//! on small general graphs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use thiserror::Error;

use crate::delay::{DelayError, DelayModel, EdgeDelays};
use crate::parallel::{map_trials, Execution};
use crate::tree::{NodeId, Tree, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error("observer set is empty")]
    EmptyObservers,
    #[error("observers cover every node")]
    ObserversCoverAllNodes,
    #[error("observer {0} listed twice")]
    DuplicateObserver(NodeId),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no infection time for observer {0}")]
    MissingObserver(NodeId),
    #[error("infection time {time} of node {node} is not a nonnegative number")]
    BadTime { node: NodeId, time: f64 },
}

/// Infection times of every node for one outbreak.
#[derive(Debug, Clone, PartialEq)]
pub struct FullInfection {
    pub source: NodeId,
    pub times: Vec<f64>,
}

/// Infection times of the observers only, keyed by node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observation {
    times: BTreeMap<NodeId, f64>,
}

impl Observation {
    pub fn new(times: BTreeMap<NodeId, f64>) -> Result<Self, SimError> {
        if times.is_empty() {
            return Err(SimError::EmptyObservers);
        }
        if let Some((&node, &time)) = times.iter().find(|(_, t)| !(t.is_finite() && **t >= 0.0)) {
            return Err(SimError::BadTime { node, time });
        }
        Ok(Observation { times })
    }

    pub fn times(&self) -> &BTreeMap<NodeId, f64> {
        &self.times
    }

    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.times.get(&node).copied()
    }

    /// Times of `observers`, in that order.
    pub fn vector(&self, observers: &[NodeId]) -> Result<Vec<f64>, SimError> {
        observers
            .iter()
            .map(|&o| self.get(o).ok_or(SimError::MissingObserver(o)))
            .collect()
    }

    /// True when two observers share an infection time exactly.
    pub fn has_tie(&self) -> bool {
        let mut ts: Vec<f64> = self.times.values().copied().collect();
        ts.sort_by(f64::total_cmp);
        ts.windows(2).any(|w| w[0] == w[1])
    }

    /// Same observation in time units `c` times smaller.
    pub fn rescaled(&self, c: f64) -> Self {
        Observation {
            times: self.times.iter().map(|(&k, &v)| (k, v * c)).collect(),
        }
    }
}

/// Sorted, validated observer set: nonempty and a proper subset of the nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverSet {
    nodes: Vec<NodeId>,
    is_observer: Vec<bool>,
}

impl ObserverSet {
    pub fn new(tree: &Tree, nodes: &[NodeId]) -> Result<Self, SimError> {
        if nodes.is_empty() {
            return Err(SimError::EmptyObservers);
        }
        let mut is_observer = vec![false; tree.n()];
        for &o in nodes {
            tree.check_node(o)?;
            if is_observer[o] {
                return Err(SimError::DuplicateObserver(o));
            }
            is_observer[o] = true;
        }
        if nodes.len() == tree.n() {
            return Err(SimError::ObserversCoverAllNodes);
        }
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        Ok(ObserverSet { nodes, is_observer })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.is_observer.get(v).copied().unwrap_or(false)
    }

    /// Position of `o` in [`nodes`](Self::nodes).
    pub fn index_of(&self, o: NodeId) -> Option<usize> {
        self.nodes.binary_search(&o).ok()
    }

    /// Nodes that are not observers, ascending.
    pub fn non_observers(&self) -> Vec<NodeId> {
        (0..self.is_observer.len())
            .filter(|&v| !self.is_observer[v])
            .collect()
    }
}

/// Draws one delay per edge, in edge order.
pub fn sample_delays<R: Rng + ?Sized>(delays: &EdgeDelays, rng: &mut R) -> Vec<f64> {
    delays.models().iter().map(|m| m.sample(rng)).collect()
}

/// Infection times when the sampled delay of edge `e` is `edge_delays[e]`.
pub fn infection_times(
    tree: &Tree,
    edge_delays: &[f64],
    source: NodeId,
) -> Result<FullInfection, SimError> {
    tree.check_node(source)?;
    let rooted = tree.rooted_at(source);
    let mut times = vec![0.0; tree.n()];
    for &v in &rooted.order[1..] {
        let (p, e) = rooted.parent[v].expect("non-root has a parent");
        times[v] = times[p] + edge_delays[e];
    }
    Ok(FullInfection { source, times })
}

/// One SI outbreak on a tree: every edge delay is drawn once and infection
/// times are path sums from `source`.
pub fn simulate_tree<R: Rng + ?Sized>(
    tree: &Tree,
    delays: &EdgeDelays,
    source: NodeId,
    rng: &mut R,
) -> Result<FullInfection, SimError> {
    delays.check_len(tree.n_edges())?;
    tree.check_node(source)?;
    let sampled = sample_delays(delays, rng);
    infection_times(tree, &sampled, source)
}

/// Restriction of `full` to `observers`.
pub fn observe(full: &FullInfection, observers: &[NodeId]) -> Result<Observation, SimError> {
    if observers.is_empty() {
        return Err(SimError::EmptyObservers);
    }
    let mut times = BTreeMap::new();
    for &o in observers {
        let &t = full.times.get(o).ok_or(TreeError::NodeOutOfRange {
            node: o,
            n: full.times.len(),
        })?;
        times.insert(o, t);
    }
    if times.len() == full.times.len() {
        return Err(SimError::ObserversCoverAllNodes);
    }
    Observation::new(times)
}

/// Simulates until the observers' times are pairwise distinct (ties have
/// probability zero under continuous delays; resampling keeps the law).
pub fn simulate_observation<R: Rng + ?Sized>(
    tree: &Tree,
    delays: &EdgeDelays,
    source: NodeId,
    observers: &ObserverSet,
    rng: &mut R,
) -> Result<(FullInfection, Observation), SimError> {
    loop {
        let full = simulate_tree(tree, delays, source, rng)?;
        let obs = observe(&full, observers.nodes())?;
        if !obs.has_tie() {
            return Ok((full, obs));
        }
    }
}

/// Small undirected graph, possibly with cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, SimError> {
        let mut adjacency = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(TreeError::NodeOutOfRange { node: x, n }.into());
                }
            }
            if u == v {
                return Err(TreeError::SelfLoop(u).into());
            }
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        Ok(Graph {
            n,
            edges: edges.to_vec(),
            adjacency,
        })
    }

    pub fn from_tree(tree: &Tree) -> Self {
        Graph::new(tree.n(), tree.edges()).expect("trees are valid graphs")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }
}

/// Infecting neighbor of every node except the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionTree {
    pub source: NodeId,
    pub parent: Vec<Option<NodeId>>,
}

#[derive(PartialEq)]
struct Pending(f64, NodeId);

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-passage times from `source` given one sampled delay per edge.
pub fn first_passage(
    graph: &Graph,
    edge_delays: &[f64],
    source: NodeId,
) -> Result<(FullInfection, TransmissionTree), SimError> {
    if source >= graph.n {
        return Err(TreeError::NodeOutOfRange {
            node: source,
            n: graph.n,
        }
        .into());
    }
    let mut times = vec![f64::INFINITY; graph.n];
    let mut parent = vec![None; graph.n];
    let mut done = vec![false; graph.n];
    let mut heap = BinaryHeap::from([Pending(0.0, source)]);
    times[source] = 0.0;
    while let Some(Pending(t, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(w, e) in &graph.adjacency[u] {
            let candidate = t + edge_delays[e];
            if !done[w] && candidate < times[w] {
                times[w] = candidate;
                parent[w] = Some(u);
                heap.push(Pending(candidate, w));
            }
        }
    }
    if done.iter().any(|d| !d) {
        return Err(SimError::Disconnected);
    }
    Ok((
        FullInfection { source, times },
        TransmissionTree { source, parent },
    ))
}

/// SI outbreak on a general graph: each edge delay is drawn once and every
/// node is infected at its first-passage time.
pub fn simulate_graph_first_passage<R: Rng + ?Sized>(
    graph: &Graph,
    delays: &EdgeDelays,
    source: NodeId,
    rng: &mut R,
) -> Result<(FullInfection, TransmissionTree), SimError> {
    delays.check_len(graph.edges.len())?;
    let sampled = sample_delays(delays, rng);
    first_passage(graph, &sampled, source)
}

/// Spanning trees of the triangle `s = 0, v = 1, o = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleTree {
    /// `s → o → v`
    ViaObserver,
    /// `s → v → o`
    ViaOther,
    /// `s → o` and `s → v`
    Direct,
}

impl TriangleTree {
    pub const ALL: [TriangleTree; 3] = [
        TriangleTree::ViaObserver,
        TriangleTree::ViaOther,
        TriangleTree::Direct,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Triangle with edges `{s,o}`, `{s,v}`, `{v,o}` (rates λ1, λ2, λ3 in that
/// order) on nodes `s = 0, v = 1, o = 2`.
pub fn triangle_graph() -> Graph {
    Graph::new(3, &[(0, 2), (0, 1), (1, 2)]).expect("valid triangle")
}

pub const TRIANGLE_SOURCE: NodeId = 0;
pub const TRIANGLE_OTHER: NodeId = 1;
pub const TRIANGLE_OBSERVER: NodeId = 2;

pub fn classify_triangle(tt: &TransmissionTree) -> TriangleTree {
    match (tt.parent[TRIANGLE_OTHER], tt.parent[TRIANGLE_OBSERVER]) {
        (Some(TRIANGLE_OBSERVER), Some(TRIANGLE_SOURCE)) => TriangleTree::ViaObserver,
        (Some(TRIANGLE_SOURCE), Some(TRIANGLE_OTHER)) => TriangleTree::ViaOther,
        (Some(TRIANGLE_SOURCE), Some(TRIANGLE_SOURCE)) => TriangleTree::Direct,
        other => unreachable!("not a spanning tree rooted at s: {other:?}"),
    }
}

/// Closed-form law of the transmission tree on the triangle.
pub fn triangle_tree_probabilities(rates: [f64; 3]) -> [f64; 3] {
    let [l1, l2, l3] = rates;
    [
        l1 * l3 / ((l1 + l2) * (l2 + l3)),
        l2 * l3 / ((l1 + l2) * (l1 + l3)),
        l1 * l2 * (l1 + l2 + 2.0 * l3) / ((l1 + l2) * (l2 + l3) * (l3 + l1)),
    ]
}

/// Closed-form `E[τ_o | tree]` for each spanning tree.
pub fn triangle_conditional_means(rates: [f64; 3]) -> [f64; 3] {
    let [l1, l2, l3] = rates;
    let first = 1.0 / (l1 + l2);
    let second = 1.0 / (l1 + l3);
    let p_second = (l2 + l3) / (l1 + l2 + 2.0 * l3);
    [first, first + second, first + p_second * second]
}

/// Monte-Carlo census of the triangle: observer infection times grouped by
/// the realized transmission tree.
#[derive(Debug, Clone)]
pub struct TriangleCensus {
    pub rates: [f64; 3],
    pub trials: usize,
    pub times_by_tree: [Vec<f64>; 3],
}

impl TriangleCensus {
    pub fn probabilities(&self) -> [f64; 3] {
        self.times_by_tree
            .clone()
            .map(|v| v.len() as f64 / self.trials as f64)
    }

    /// Binomial standard errors of [`probabilities`](Self::probabilities).
    pub fn probability_std_errors(&self) -> [f64; 3] {
        self.probabilities()
            .map(|p| (p * (1.0 - p) / self.trials as f64).sqrt())
    }

    pub fn conditional_means(&self) -> [f64; 3] {
        self.times_by_tree.clone().map(|v| crate::stats::mean(&v))
    }

    pub fn conditional_std_errors(&self) -> [f64; 3] {
        self.times_by_tree
            .clone()
            .map(|v| crate::stats::std_error(&v))
    }
}

pub fn triangle_census(
    rates: [f64; 3],
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<TriangleCensus, SimError> {
    let models = rates
        .iter()
        .map(|&r| DelayModel::exponential(r))
        .collect::<Result<Vec<_>, _>>()?;
    let delays = EdgeDelays::new(models);
    let graph = triangle_graph();
    let outcomes = map_trials(exec, seed, trials, |_, rng| {
        let (full, tt) =
            simulate_graph_first_passage(&graph, &delays, TRIANGLE_SOURCE, rng).expect("connected");
        (classify_triangle(&tt), full.times[TRIANGLE_OBSERVER])
    });
    let mut times_by_tree: [Vec<f64>; 3] = Default::default();
    for (tree, t) in outcomes {
        times_by_tree[tree.index()].push(t);
    }
    Ok(TriangleCensus {
        rates,
        trials,
        times_by_tree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{three_observer_tree, ThreeObserverTree as F};
    use crate::parallel::trial_rng;

    #[test]
    fn two_node_tree() {
        let t = Tree::new(2, &[(0, 1)]).unwrap();
        let d = EdgeDelays::iid(DelayModel::exponential(1.0).unwrap(), 1);
        let mut rng = trial_rng(1, 0);
        let full = simulate_tree(&t, &d, 0, &mut rng).unwrap();
        assert_eq!(full.times[0], 0.0);
        assert!(full.times[1] > 0.0);
    }

    #[test]
    fn times_are_additive() {
        let t = Tree::path_graph(3).unwrap();
        let full = infection_times(&t, &[0.4, 1.1], 0).unwrap();
        assert_eq!(full.times, vec![0.0, 0.4, 0.4 + 1.1]);
        let rev = infection_times(&t, &[0.4, 1.1], 2).unwrap();
        assert_eq!(rev.times, vec![1.5, 1.1, 0.0]);
        assert!(infection_times(&t, &[0.4, 1.1], 3).is_err());
    }

    #[test]
    fn observer_time_mean_by_linearity() {
        let f = three_observer_tree();
        let d = EdgeDelays::iid(DelayModel::exponential(1.0).unwrap(), 5);
        let runs = 100_000;
        let total: f64 = map_trials(Execution::Parallel, 17, runs, |_, rng| {
            simulate_tree(&f.tree, &d, F::U, rng).unwrap().times[3]
        })
        .iter()
        .sum();
        assert!((total / runs as f64 - 2.0).abs() < 0.02);
    }

    #[test]
    fn observe_restricts_and_validates() {
        let full = FullInfection {
            source: 0,
            times: vec![0.0, 1.0, 2.0],
        };
        let obs = observe(&full, &[2]).unwrap();
        assert_eq!(obs.times().iter().collect::<Vec<_>>(), vec![(&2, &2.0)]);
        assert_eq!(observe(&full, &[]), Err(SimError::EmptyObservers));
        assert_eq!(
            observe(&full, &[0, 1, 2]),
            Err(SimError::ObserversCoverAllNodes)
        );
    }

    #[test]
    fn observer_set_validation() {
        let t = Tree::path_graph(3).unwrap();
        assert_eq!(ObserverSet::new(&t, &[]), Err(SimError::EmptyObservers));
        assert_eq!(
            ObserverSet::new(&t, &[0, 1, 2]),
            Err(SimError::ObserversCoverAllNodes)
        );
        assert_eq!(
            ObserverSet::new(&t, &[1, 1]),
            Err(SimError::DuplicateObserver(1))
        );
        let set = ObserverSet::new(&t, &[2, 0]).unwrap();
        assert_eq!(set.nodes(), &[0, 2]);
        assert_eq!(set.non_observers(), vec![1]);
    }

    #[test]
    fn triangle_hand_traces() {
        let g = triangle_graph();
        // Delays in edge order ({s,o}, {s,v}, {v,o}).
        let (full, tt) = first_passage(&g, &[3.0, 1.0, 1.0], TRIANGLE_SOURCE).unwrap();
        assert_eq!(full.times[TRIANGLE_OBSERVER], 2.0);
        assert_eq!(classify_triangle(&tt), TriangleTree::ViaOther);
        let (full, tt) = first_passage(&g, &[1.0, 2.0, 5.0], TRIANGLE_SOURCE).unwrap();
        assert_eq!(full.times[TRIANGLE_OBSERVER], 1.0);
        assert_eq!(classify_triangle(&tt), TriangleTree::Direct);
        let (_, tt) = first_passage(&g, &[1.0, 5.0, 2.0], TRIANGLE_SOURCE).unwrap();
        assert_eq!(classify_triangle(&tt), TriangleTree::ViaObserver);
    }

    #[test]
    fn first_passage_on_tree_matches_path_sums() {
        let f = three_observer_tree();
        let g = Graph::from_tree(&f.tree);
        let d = EdgeDelays::iid(DelayModel::uniform(0.0, 2.0).unwrap(), 5);
        for seed in 0..50 {
            let mut a = trial_rng(seed, 0);
            let mut b = trial_rng(seed, 0);
            let tree_run = simulate_tree(&f.tree, &d, F::V, &mut a).unwrap();
            let (graph_run, tt) = simulate_graph_first_passage(&g, &d, F::V, &mut b).unwrap();
            assert_eq!(tree_run, graph_run);
            let rooted = f.tree.rooted_at(F::V);
            for v in 0..6 {
                assert_eq!(tt.parent[v], rooted.parent[v].map(|(p, _)| p));
            }
        }
    }

    #[test]
    fn disconnected_graph() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        assert_eq!(
            first_passage(&g, &[1.0], 0).unwrap_err(),
            SimError::Disconnected
        );
    }

    #[test]
    fn closed_forms_at_equal_rates() {
        let p = triangle_tree_probabilities([1.0, 1.0, 1.0]);
        assert_eq!(p, [0.25, 0.25, 0.5]);
        assert_eq!(
            triangle_conditional_means([1.0, 1.0, 1.0]),
            [0.5, 1.0, 0.75]
        );
        let q = triangle_tree_probabilities([1.0, 2.0, 3.0]);
        assert!((q[0] - 0.2).abs() < 1e-15);
        for rates in [[1.0, 2.0, 3.0], [5.0, 1.0, 1.0], [0.3, 7.0, 2.0]] {
            let s: f64 = triangle_tree_probabilities(rates).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn census_probabilities_sum_to_one() {
        let c = triangle_census([1.0, 2.0, 3.0], 2000, 3, Execution::Sequential).unwrap();
        let s: f64 = c.probabilities().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
