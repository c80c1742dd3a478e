//! Source localization for SI infections on trees.
//!
//! The crate simulates outbreaks with independent random edge delays, reduces
//! the observer set to the part that carries information about the source,
//! and estimates the source by fitting analytic Laplace transforms of the
//! observer infection times in sup-norm.
//!
//! ```
//! use treelocate_core::prelude::*;
//!
//! let tree = Tree::path_graph(5).unwrap();
//! let observers = ObserverSet::new(&tree, &[0, 4]).unwrap();
//! let delays = EdgeDelays::iid(DelayModel::exponential(1.0).unwrap(), tree.n_edges());
//! let mut rng = trial_rng(7, 0);
//! let (_, obs) = simulate_observation(&tree, &delays, 2, &observers, &mut rng).unwrap();
//! let report = hat_estimate(&tree, &observers, &delays, &obs, &EstimateOptions::default()).unwrap();
//! assert!([1, 2, 3].contains(&report.selected));
//! ```

pub mod delay;
pub mod estimate;
pub mod fixtures;
pub mod laplace;
pub mod parallel;
pub mod reduction;
pub mod sim;
pub mod stats;
pub mod tree;

pub mod prelude {
    pub use crate::delay::{DelayError, DelayModel, EdgeDelays, RateList};
    pub use crate::estimate::{
        check_estimate, edge_distance_error, hat_estimate, hat_estimate_samples, EstimateError,
        EstimateOptions, EstimateReport, Estimator, GridSpec,
    };
    pub use crate::laplace::{
        candidate_laplace, check_statistic, conditional_factor_exponential,
        conditional_laplace_exponential, empirical_laplace, hajek_combine, CandidateTransform,
        CheckTransform, LaplaceArgument, LaplaceError, PathIncidence,
    };
    pub use crate::parallel::{map_indexed, map_trials, map_trials_from, trial_rng, Execution};
    pub use crate::reduction::{
        equivalence_classes, feasible_classes, reduce, star_arrangement_of, sufficient_observers,
        EquivalenceClass, Reduction, ReductionError, StarArrangement,
    };
    pub use crate::sim::{
        observe, simulate_graph_first_passage, simulate_observation, simulate_tree,
        triangle_census, FullInfection, Graph, Observation, ObserverSet, SimError,
        TransmissionTree, TriangleTree,
    };
    pub use crate::tree::{random_tree_prufer, EdgeId, NodeId, Tree, TreeError};
}
