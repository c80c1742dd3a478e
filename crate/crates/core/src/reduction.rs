//! Equivalence classes of non-observers, feasibility given observed times,
//! star arrangements and the sufficient observer subset.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::sim::{Observation, ObserverSet, SimError};
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("observers {0} and {1} share the minimum infection time")]
    TiedMinimum(NodeId, NodeId),
    #[error("classes do not form a star arrangement")]
    NotAStar,
    #[error("no classes given")]
    NoClasses,
}

/// Connected component of the non-observer nodes, with the observers
/// adjacent to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClass {
    /// Ascending.
    pub members: Vec<NodeId>,
    /// Ascending.
    pub boundary: Vec<NodeId>,
}

impl EquivalenceClass {
    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn touches(&self, o: NodeId) -> bool {
        self.boundary.binary_search(&o).is_ok()
    }
}

/// Classes of `V ∖ O`, ordered by their smallest member.
pub fn equivalence_classes(tree: &Tree, observers: &ObserverSet) -> Vec<EquivalenceClass> {
    let mut class_of = vec![usize::MAX; tree.n()];
    let mut classes = Vec::new();
    for start in 0..tree.n() {
        if observers.contains(start) || class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = Vec::new();
        let mut boundary = BTreeSet::new();
        let mut stack = vec![start];
        class_of[start] = id;
        while let Some(u) = stack.pop() {
            members.push(u);
            for &(w, _) in tree.neighbors(u) {
                if observers.contains(w) {
                    boundary.insert(w);
                } else if class_of[w] == usize::MAX {
                    class_of[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        classes.push(EquivalenceClass {
            members,
            boundary: boundary.into_iter().collect(),
        });
    }
    classes
}

/// Observer with the smallest infection time; exact ties are an error.
pub fn first_observer(
    observers: &ObserverSet,
    obs: &Observation,
) -> Result<NodeId, ReductionError> {
    let times = obs.vector(observers.nodes())?;
    let mut best = 0;
    for i in 1..times.len() {
        if times[i] < times[best] {
            best = i;
        }
    }
    let nodes = observers.nodes();
    if let Some(j) = (0..times.len()).find(|&j| j != best && times[j] == times[best]) {
        let (a, b) = (nodes[best].min(nodes[j]), nodes[best].max(nodes[j]));
        return Err(ReductionError::TiedMinimum(a, b));
    }
    Ok(nodes[best])
}

/// Classes whose boundary contains the earliest-infected observer.
pub fn feasible_classes(
    tree: &Tree,
    observers: &ObserverSet,
    obs: &Observation,
) -> Result<Vec<EquivalenceClass>, ReductionError> {
    let first = first_observer(observers, obs)?;
    Ok(equivalence_classes(tree, observers)
        .into_iter()
        .filter(|c| c.touches(first))
        .collect())
}

/// Feasibility straight from the definition: for every `o ∈ ∂r`, in the
/// subtree hanging from `o` that avoids `r`, observer times never decrease
/// from ancestor to descendant. Quadratic; intended for cross-checks.
pub fn is_feasible_by_definition(
    tree: &Tree,
    observers: &ObserverSet,
    class: &EquivalenceClass,
    obs: &Observation,
) -> Result<bool, ReductionError> {
    for &o in &class.boundary {
        let t_o = obs.get(o).ok_or(SimError::MissingObserver(o))?;
        // (node, parent, time of the nearest observer ancestor-or-self)
        let mut stack = vec![(o, usize::MAX, t_o)];
        while let Some((u, parent, bound)) = stack.pop() {
            for &(w, _) in tree.neighbors(u) {
                if w == parent || class.contains(w) {
                    continue;
                }
                let mut next = bound;
                if observers.contains(w) {
                    let t = obs.get(w).ok_or(SimError::MissingObserver(w))?;
                    if t < bound {
                        return Ok(false);
                    }
                    next = t;
                }
                stack.push((w, u, next));
            }
        }
    }
    Ok(true)
}

/// Family of classes whose boundaries share an observer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarArrangement {
    pub classes: Vec<EquivalenceClass>,
    /// The shared observer when there are at least two classes.
    pub center: Option<NodeId>,
}

pub fn star_arrangement_of(
    classes: &[EquivalenceClass],
) -> Result<StarArrangement, ReductionError> {
    let (head, rest) = classes.split_first().ok_or(ReductionError::NoClasses)?;
    let common: Vec<NodeId> = head
        .boundary
        .iter()
        .copied()
        .filter(|&o| rest.iter().all(|c| c.touches(o)))
        .collect();
    if common.is_empty() || (!rest.is_empty() && common.len() != 1) {
        return Err(ReductionError::NotAStar);
    }
    let center = if rest.is_empty() {
        None
    } else {
        Some(common[0])
    };
    Ok(StarArrangement {
        classes: classes.to_vec(),
        center,
    })
}

/// Outcome of reducing an observation to its feasible region.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub first_observer: NodeId,
    pub arrangement: StarArrangement,
    /// Union of the feasible classes, ascending.
    pub candidates: Vec<NodeId>,
    /// Union of the feasible boundaries, ascending.
    pub sufficient: Vec<NodeId>,
}

impl Reduction {
    /// True when the sufficient set includes an observer that separates two
    /// feasible classes.
    pub fn has_center(&self) -> bool {
        self.arrangement.center.is_some()
    }
}

pub fn reduce(
    tree: &Tree,
    observers: &ObserverSet,
    obs: &Observation,
) -> Result<Reduction, ReductionError> {
    let first_observer = first_observer(observers, obs)?;
    let feasible: Vec<EquivalenceClass> = equivalence_classes(tree, observers)
        .into_iter()
        .filter(|c| c.touches(first_observer))
        .collect();
    let arrangement = star_arrangement_of(&feasible)?;
    let candidates: BTreeSet<NodeId> = feasible
        .iter()
        .flat_map(|c| c.members.iter().copied())
        .collect();
    let sufficient: BTreeSet<NodeId> = feasible
        .iter()
        .flat_map(|c| c.boundary.iter().copied())
        .collect();
    Ok(Reduction {
        first_observer,
        arrangement,
        candidates: candidates.into_iter().collect(),
        sufficient: sufficient.into_iter().collect(),
    })
}

/// `∂R` for `R` the union of feasible classes.
pub fn sufficient_observers(
    tree: &Tree,
    observers: &ObserverSet,
    obs: &Observation,
) -> Result<Vec<NodeId>, ReductionError> {
    Ok(reduce(tree, observers, obs)?.sufficient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{four_class_tree, two_sided_star};
    use std::collections::BTreeMap;

    fn observation(pairs: &[(NodeId, f64)]) -> Observation {
        Observation::new(pairs.iter().copied().collect::<BTreeMap<_, _>>()).unwrap()
    }

    /// Times for observers `1..=9` with `first` earliest.
    fn four_class_times(first: NodeId) -> Observation {
        let pairs: Vec<(NodeId, f64)> = (1..=9)
            .map(|o| (o, if o == first { 0.5 } else { 1.0 + o as f64 }))
            .collect();
        observation(&pairs)
    }

    #[test]
    fn four_classes_and_boundaries() {
        let f = four_class_tree();
        let set = ObserverSet::new(&f.tree, &f.observers).unwrap();
        let classes = equivalence_classes(&f.tree, &set);
        let got: Vec<(Vec<NodeId>, Vec<NodeId>)> = classes
            .iter()
            .map(|c| (c.members.clone(), c.boundary.clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                (vec![0, 10, 11, 12, 13, 14], vec![7, 8, 9]),
                (vec![15, 16], vec![2, 3, 4, 5]),
                (vec![17, 18, 19], vec![2]),
                (vec![20, 21, 22, 23], vec![1, 2]),
            ]
        );
    }

    #[test]
    fn trivial_class_structures() {
        let t = Tree::path_graph(3).unwrap();
        let set = ObserverSet::new(&t, &[0, 2]).unwrap();
        let classes = equivalence_classes(&t, &set);
        assert_eq!(
            classes,
            vec![EquivalenceClass {
                members: vec![1],
                boundary: vec![0, 2]
            }]
        );

        let star = Tree::star(5).unwrap();
        let set = ObserverSet::new(&star, &[1, 2, 3, 4]).unwrap();
        assert_eq!(equivalence_classes(&star, &set)[0].members, vec![0]);
    }

    #[test]
    fn observer_two_first() {
        let f = four_class_tree();
        let set = ObserverSet::new(&f.tree, &f.observers).unwrap();
        let obs = four_class_times(2);
        let feasible = feasible_classes(&f.tree, &set, &obs).unwrap();
        assert_eq!(feasible.len(), 3);
        let r = reduce(&f.tree, &set, &obs).unwrap();
        assert_eq!(r.arrangement.center, Some(2));
        assert_eq!(r.sufficient, vec![1, 2, 3, 4, 5]);
        assert_eq!(r.candidates, vec![15, 16, 17, 18, 19, 20, 21, 22, 23]);
    }

    #[test]
    fn observer_three_first() {
        let f = four_class_tree();
        let set = ObserverSet::new(&f.tree, &f.observers).unwrap();
        let r = reduce(&f.tree, &set, &four_class_times(3)).unwrap();
        assert_eq!(r.arrangement.classes.len(), 1);
        assert_eq!(r.arrangement.classes[0].members, vec![15, 16]);
        assert_eq!(r.arrangement.center, None);
        assert_eq!(r.sufficient, vec![2, 3, 4, 5]);
    }

    #[test]
    fn single_class_is_always_feasible() {
        let t = Tree::path_graph(3).unwrap();
        let set = ObserverSet::new(&t, &[0, 2]).unwrap();
        for obs in [
            observation(&[(0, 1.0), (2, 2.0)]),
            observation(&[(0, 3.0), (2, 2.0)]),
        ] {
            let r = reduce(&t, &set, &obs).unwrap();
            assert_eq!(r.candidates, vec![1]);
            assert_eq!(r.sufficient, vec![0, 2]);
        }
    }

    #[test]
    fn two_sided_star_center() {
        let f = two_sided_star(3);
        let set = ObserverSet::new(&f.tree, &f.observers).unwrap();
        let obs = observation(&[(0, 0.1), (1, 1.0), (2, 2.0), (3, 3.0), (f.far, 4.0)]);
        let r = reduce(&f.tree, &set, &obs).unwrap();
        assert_eq!(r.arrangement.center, Some(0));
        assert_eq!(r.candidates, vec![f.left, f.right]);
    }

    #[test]
    fn tied_minimum_is_an_error() {
        let t = Tree::path_graph(3).unwrap();
        let set = ObserverSet::new(&t, &[0, 2]).unwrap();
        let obs = observation(&[(0, 1.0), (2, 1.0)]);
        assert_eq!(
            reduce(&t, &set, &obs),
            Err(ReductionError::TiedMinimum(0, 2))
        );
    }

    #[test]
    fn not_a_star() {
        let a = EquivalenceClass {
            members: vec![0],
            boundary: vec![1, 2],
        };
        let b = EquivalenceClass {
            members: vec![3],
            boundary: vec![4],
        };
        assert_eq!(
            star_arrangement_of(&[a.clone(), b]),
            Err(ReductionError::NotAStar)
        );
        assert_eq!(star_arrangement_of(&[]), Err(ReductionError::NoClasses));
        assert_eq!(star_arrangement_of(&[a]).unwrap().center, None);
    }

    #[test]
    fn definition_matches_characterization_on_fixture() {
        let f = four_class_tree();
        let set = ObserverSet::new(&f.tree, &f.observers).unwrap();
        let classes = equivalence_classes(&f.tree, &set);
        // Times generated by a source in each class, with unit edge delays
        // plus a per-edge jitter so that all observer times differ.
        for source in [0, 15, 18, 22] {
            let rooted = f.tree.rooted_at(source);
            let mut times = [0.0; 24];
            for &v in &rooted.order[1..] {
                let (p, e) = rooted.parent[v].unwrap();
                times[v] = times[p] + 1.0 + e as f64 * 1e-3;
            }
            let obs = observation(&(1..=9).map(|o| (o, times[o])).collect::<Vec<_>>());
            let first = first_observer(&set, &obs).unwrap();
            for c in &classes {
                assert_eq!(
                    is_feasible_by_definition(&f.tree, &set, c, &obs).unwrap(),
                    c.touches(first)
                );
            }
        }
    }
}
