//! Undirected labeled trees with path, leaf and diameter queries, plus
//! uniform random generation through Prüfer sequences.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use thiserror::Error;

/// Dense node index, `0 <= id < n`.
pub type NodeId = usize;

/// Index into [`Tree::edges`].
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree needs at least {min} nodes, got {n}")]
    NTooSmall { n: usize, min: usize },
    #[error("node {node} out of range for a tree with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("edge {{{0}, {1}}} listed twice")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge {{{0}, {1}}} closes a cycle")]
    CycleDetected(NodeId, NodeId),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("Prüfer entry {entry} out of range for {n} nodes")]
    BadPruferEntry { entry: usize, n: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An immutable, validated tree.
///
/// Edges keep the order in which they were supplied; each is stored once as
/// `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    /// Per node, `(neighbor, edge id)` sorted by neighbor.
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
}

/// BFS tree of a [`Tree`] hung from `root`.
#[derive(Debug, Clone)]
pub struct Rooted {
    pub root: NodeId,
    /// `parent[root]` is `None`.
    pub parent: Vec<Option<(NodeId, EdgeId)>>,
    pub depth: Vec<usize>,
    /// Nodes in BFS order starting with the root.
    pub order: Vec<NodeId>,
}

impl Rooted {
    /// Edges from `v` up to the root, in that order.
    pub fn edges_to_root(&self, mut v: NodeId) -> Vec<EdgeId> {
        let mut out = Vec::with_capacity(self.depth[v]);
        while let Some((p, e)) = self.parent[v] {
            out.push(e);
            v = p;
        }
        out
    }
}

fn check_node(node: usize, n: usize) -> Result<(), TreeError> {
    if node < n {
        Ok(())
    } else {
        Err(TreeError::NodeOutOfRange { node, n })
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Tree {
    /// Validates `edges` as a spanning tree on `n` nodes.
    pub fn new(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::NTooSmall { n, min: 1 });
        }
        let mut canonical = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            check_node(u, n)?;
            check_node(v, n)?;
            if u == v {
                return Err(TreeError::SelfLoop(u));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        let mut sorted = canonical.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(TreeError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut uf: Vec<usize> = (0..n).collect();
        for &(u, v) in &canonical {
            let (ru, rv) = (find(&mut uf, u), find(&mut uf, v));
            if ru == rv {
                return Err(TreeError::CycleDetected(u, v));
            }
            uf[ru] = rv;
        }
        if canonical.len() != n - 1 {
            return Err(TreeError::Disconnected);
        }
        for (id, &(u, v)) in canonical.iter().enumerate() {
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Tree {
            n,
            edges: canonical,
            adjacency,
        })
    }

    /// The path graph `0 - 1 - ... - (n-1)`; edge `i` joins `i` and `i + 1`.
    pub fn path_graph(n: usize) -> Result<Self, TreeError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Tree::new(n, &edges)
    }

    /// Star with center 0 and leaves `1..n`.
    pub fn star(n: usize) -> Result<Self, TreeError> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Tree::new(n, &edges)
    }

    /// Parses the whitespace-separated edge-list format: one `u v` pair per
    /// line, 0-based ids, `#` comments. Extra columns are ignored here.
    pub fn from_edge_list(text: &str) -> Result<Self, TreeError> {
        let mut edges = Vec::new();
        let mut max_id = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let mut next_id = || -> Result<usize, TreeError> {
                let tok = cols.next().ok_or_else(|| TreeError::Parse {
                    line: lineno + 1,
                    msg: "expected two node ids".into(),
                })?;
                tok.parse().map_err(|_| TreeError::Parse {
                    line: lineno + 1,
                    msg: format!("bad node id `{tok}`"),
                })
            };
            let u = next_id()?;
            let v = next_id()?;
            max_id = max_id.max(u).max(v);
            edges.push((u, v));
        }
        Tree::new(max_id + 1, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e]
    }

    /// `(neighbor, edge)` pairs sorted by neighbor id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    /// Edge joining `u` and `v`, if they are adjacent.
    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let list = self.adjacency.get(u)?;
        list.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), TreeError> {
        check_node(v, self.n)
    }

    pub fn rooted_at(&self, root: NodeId) -> Rooted {
        let mut parent = vec![None; self.n];
        let mut depth = vec![0; self.n];
        let mut seen = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(w, e) in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((u, e));
                    depth[w] = depth[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        Rooted {
            root,
            parent,
            depth,
            order,
        }
    }

    /// Edges of the unique path from `u` to `v`, ordered from `u`.
    pub fn path(&self, u: NodeId, v: NodeId) -> Result<Vec<EdgeId>, TreeError> {
        self.check_node(u)?;
        self.check_node(v)?;
        // Hanging the tree from `v` makes the walk from `u` come out in order.
        Ok(self.rooted_at(v).edges_to_root(u))
    }

    /// Number of edges between `u` and `v`.
    pub fn distance(&self, u: NodeId, v: NodeId) -> Result<usize, TreeError> {
        self.check_node(u)?;
        self.check_node(v)?;
        Ok(self.rooted_at(u).depth[v])
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.n).filter(|&v| self.degree(v) == 1).collect()
    }

    /// Longest shortest path, in edges (double BFS).
    pub fn diameter(&self) -> usize {
        let first = self.rooted_at(0);
        let far = *first.order.last().expect("nonempty");
        let second = self.rooted_at(far);
        second.depth[*second.order.last().expect("nonempty")]
    }

    /// Prüfer code of this tree (length `n - 2`).
    pub fn to_prufer(&self) -> Vec<NodeId> {
        if self.n <= 2 {
            return Vec::new();
        }
        let mut degree: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        let mut removed = vec![false; self.n];
        let mut leaves: BinaryHeap<Reverse<NodeId>> = (0..self.n)
            .filter(|&v| degree[v] == 1)
            .map(Reverse)
            .collect();
        let mut code = Vec::with_capacity(self.n - 2);
        while code.len() < self.n - 2 {
            let Reverse(leaf) = leaves.pop().expect("a tree always has a leaf");
            removed[leaf] = true;
            let &(next, _) = self.adjacency[leaf]
                .iter()
                .find(|&&(w, _)| !removed[w])
                .expect("leaf has one live neighbor");
            code.push(next);
            degree[next] -= 1;
            if degree[next] == 1 {
                leaves.push(Reverse(next));
            }
        }
        code
    }

    /// Decodes a Prüfer sequence over `{0..n-1}` of length `n - 2`.
    pub fn from_prufer(code: &[NodeId]) -> Result<Self, TreeError> {
        let n = code.len() + 2;
        if let Some(&entry) = code.iter().find(|&&x| x >= n) {
            return Err(TreeError::BadPruferEntry { entry, n });
        }
        let mut degree = vec![1usize; n];
        for &x in code {
            degree[x] += 1;
        }
        let mut leaves: BinaryHeap<Reverse<NodeId>> =
            (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
        let mut edges = Vec::with_capacity(n - 1);
        for &x in code {
            let Reverse(leaf) = leaves.pop().expect("leaf available");
            edges.push((leaf, x));
            degree[x] -= 1;
            if degree[x] == 1 {
                leaves.push(Reverse(x));
            }
        }
        let Reverse(a) = leaves.pop().expect("two leaves remain");
        let Reverse(b) = leaves.pop().expect("two leaves remain");
        edges.push((a, b));
        Tree::new(n, &edges)
    }
}

/// Uniformly random labeled tree on `n` nodes.
pub fn random_tree_prufer<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Tree, TreeError> {
    if n < 2 {
        return Err(TreeError::NTooSmall { n, min: 2 });
    }
    let code: Vec<NodeId> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    Tree::from_prufer(&code)
}
