//! Labeled network files, observation files and the bundled synthetic
//! river network.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use treelocate_core::prelude::*;

use crate::error::CliError;

/// Seed of the bundled synthetic river network.
pub const RIVER_SEED: u64 = 246;
/// Node count of the bundled synthetic river network.
pub const RIVER_NODES: usize = 246;
/// Shipped copy of [`synthetic_river`], kept in sync by a test.
pub const BUNDLED_RIVER: &str = include_str!("../../../data/river_synthetic.txt");

/// Bidirectional map between node labels and dense ids, in order of first
/// appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelTable {
    labels: Vec<String>,
    ids: BTreeMap<String, NodeId>,
}

impl LabelTable {
    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<NodeId> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Tree with labeled nodes and optional per-edge PosNormal parameters.
#[derive(Debug, Clone)]
pub struct Network {
    pub labels: LabelTable,
    pub tree: Tree,
    /// `(μ, σ)` per edge, in file order.
    pub params: Vec<Option<(f64, f64)>>,
}

impl Network {
    /// Parses lines `u v [mu sigma]`; blank lines and lines starting with
    /// `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut labels = LabelTable::default();
        let mut edges = Vec::new();
        let mut params = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |why: &str| CliError::Data(format!("network line {}: {why}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let p = match fields.len() {
                2 => None,
                4 => {
                    let num = |s: &str| {
                        s.parse::<f64>()
                            .map_err(|_| bad(&format!("`{s}` is not a number")))
                    };
                    let (mu, sigma) = (num(fields[2])?, num(fields[3])?);
                    DelayModel::pos_normal(mu, sigma).map_err(|e| bad(&e.to_string()))?;
                    Some((mu, sigma))
                }
                k => {
                    return Err(bad(&format!(
                        "expected `u v` or `u v mu sigma`, got {k} fields"
                    )))
                }
            };
            if fields[0] == fields[1] {
                return Err(bad("self-loop"));
            }
            edges.push((labels.intern(fields[0]), labels.intern(fields[1])));
            params.push(p);
        }
        if edges.is_empty() {
            return Err(CliError::Data("network file has no edges".into()));
        }
        let tree = Tree::new(labels.len(), &edges).map_err(CliError::data)?;
        Ok(Network {
            labels,
            tree,
            params,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Per-edge laws: `override_all` for every edge when given, otherwise
    /// PosNormal with the parameters from the file.
    pub fn delays(&self, override_all: Option<DelayModel>) -> Result<EdgeDelays, CliError> {
        if let Some(model) = override_all {
            return Ok(EdgeDelays::iid(model, self.tree.n_edges()));
        }
        // Tree edge ids follow file order.
        let models = self
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (mu, sigma) = p.ok_or_else(|| {
                    CliError::Data(format!(
                        "edge {} has no delay parameters and no delay law was configured",
                        i + 1
                    ))
                })?;
                DelayModel::pos_normal(mu, sigma).map_err(CliError::data)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EdgeDelays::new(models))
    }

    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        for (e, &(u, v)) in self.tree.edges().iter().enumerate() {
            let (a, b) = (self.labels.label(u), self.labels.label(v));
            match self.params[e] {
                Some((mu, sigma)) => {
                    let _ = writeln!(out, "{a} {b} {mu} {sigma}");
                }
                None => {
                    let _ = writeln!(out, "{a} {b}");
                }
            }
        }
        out
    }
}

/// Synthetic river-like tree: node `r000` is the outlet, each later node
/// joins a uniformly chosen earlier node that still has fewer than three
/// neighbours (two for the outlet). Edge means are uniform on `[0.5, 2]`
/// with `σ = μ/4`.
pub fn synthetic_river(n: usize, seed: u64) -> Network {
    let mut rng = trial_rng(seed, 0);
    let mut labels = LabelTable::default();
    for v in 0..n {
        labels.intern(&format!("r{v:03}"));
    }
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut params = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let open: Vec<NodeId> = (0..v)
            .filter(|&u| degree[u] < if u == 0 { 2 } else { 3 })
            .collect();
        let parent = open[rng.random_range(0..open.len())];
        degree[parent] += 1;
        degree[v] += 1;
        edges.push((parent, v));
        // Three decimals keep the file short and exactly reproducible.
        let mu = (rng.random_range(0.5..2.0f64) * 1000.0).round() / 1000.0;
        params.push(Some((mu, mu / 4.0)));
    }
    let tree = Tree::new(n, &edges).expect("growth process yields a tree");
    Network {
        labels,
        tree,
        params,
    }
}

/// Header written above the bundled river network.
pub const RIVER_HEADER: &str = "Synthetic river-like network (not field data).\n\
    246 nodes; r000 is the outlet. Columns: u v mu sigma of a PosNormal delay.\n\
    Regenerate with `treelocate river --write-network <path>`.";

/// Parses a JSON map from observer label to infection time.
pub fn parse_observations(
    text: &str,
    labels: &LabelTable,
    tree: &Tree,
) -> Result<(ObserverSet, Observation), CliError> {
    let raw: BTreeMap<String, f64> =
        serde_json::from_str(text).map_err(|e| CliError::Data(format!("observation file: {e}")))?;
    let mut times = BTreeMap::new();
    for (label, t) in raw {
        let id = labels
            .id(&label)
            .ok_or_else(|| CliError::Data(format!("unknown observer label `{label}`")))?;
        times.insert(id, t);
    }
    let nodes: Vec<NodeId> = times.keys().copied().collect();
    let observers = ObserverSet::new(tree, &nodes).map_err(CliError::data)?;
    let obs = Observation::new(times).map_err(CliError::data)?;
    Ok((observers, obs))
}

pub fn load_observations(
    path: &Path,
    labels: &LabelTable,
    tree: &Tree,
) -> Result<(ObserverSet, Observation), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_observations(&text, labels, tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# a comment\n\
        a b 1 0.25\n\
        \n\
        b c 2 0.5\n\
        b d 1.5 0.1\n";

    #[test]
    fn parses_labels_and_parameters() {
        let net = Network::parse(SMALL).unwrap();
        assert_eq!(net.labels.len(), 4);
        assert_eq!(net.labels.id("c"), Some(2));
        assert_eq!(net.labels.label(3), "d");
        assert_eq!(net.tree.n_edges(), 3);
        let delays = net.delays(None).unwrap();
        let e = net.tree.edge_between(1, 2).unwrap();
        assert_eq!(*delays.get(e), DelayModel::pos_normal(2.0, 0.5).unwrap());
        let iid = net
            .delays(Some(DelayModel::exponential(1.0).unwrap()))
            .unwrap();
        assert_eq!(iid.len(), 3);
    }

    #[test]
    fn malformed_files_are_data_errors() {
        for text in [
            "",
            "# only a comment\n",
            "a b 1\n",
            "a b x 1\n",
            "a b 1 -1\n",
            "a a 1 1\n",
            "a b\nb c\nc a\n",
            "a b\nc d\n",
        ] {
            let err = Network::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 3, "{text:?}");
        }
    }

    #[test]
    fn missing_parameters_need_a_configured_law() {
        let net = Network::parse("a b\nb c 1 1\n").unwrap();
        assert_eq!(net.delays(None).unwrap_err().exit_code(), 3);
        assert!(net
            .delays(Some(DelayModel::exponential(2.0).unwrap()))
            .is_ok());
    }

    #[test]
    fn text_round_trip() {
        let net = Network::parse(SMALL).unwrap();
        let again = Network::parse(&net.to_text("header\nlines")).unwrap();
        assert_eq!(again.labels, net.labels);
        assert_eq!(again.tree, net.tree);
        assert_eq!(again.params, net.params);
    }

    #[test]
    fn observations_resolve_labels() {
        let net = Network::parse(SMALL).unwrap();
        let (observers, obs) =
            parse_observations(r#"{"a": 1.5, "d": 0.5}"#, &net.labels, &net.tree).unwrap();
        assert_eq!(observers.nodes(), &[0, 3]);
        assert_eq!(obs.get(3), Some(0.5));
        for bad in [
            r#"{"zzz": 1.0}"#,
            r#"{"a": -1.0}"#,
            r#"{}"#,
            r#"["a"]"#,
            r#"{"a": 1, "b": 1, "c": 1, "d": 1}"#,
        ] {
            let err = parse_observations(bad, &net.labels, &net.tree).unwrap_err();
            assert_eq!(err.exit_code(), 3, "{bad}");
        }
    }

    #[test]
    fn synthetic_river_shape() {
        let net = synthetic_river(RIVER_NODES, RIVER_SEED);
        assert_eq!(net.tree.n(), 246);
        assert!(net.tree.degree(0) <= 2);
        assert!((0..246).all(|v| net.tree.degree(v) <= 3));
        for p in &net.params {
            let (mu, sigma) = p.unwrap();
            assert!((0.5..=2.0).contains(&mu));
            assert_eq!(sigma, mu / 4.0);
        }
    }

    #[test]
    fn bundled_river_matches_generator() {
        let generated = synthetic_river(RIVER_NODES, RIVER_SEED).to_text(RIVER_HEADER);
        assert_eq!(BUNDLED_RIVER, generated);
        let parsed = Network::parse(BUNDLED_RIVER).unwrap();
        assert_eq!(parsed.labels.label(0), "r000");
        assert_eq!(parsed.tree.n(), RIVER_NODES);
    }
}
