//! Small hand-built networks that exercise specific structural cases.

use crate::tree::{EdgeId, NodeId, Tree};

/// Six-node tree with leaf observers `1, 2, 3` and interior nodes `u, v, w`:
///
/// ```text
///   1 --a-- u --b-- v --c-- w
///           |       |
///           e       d
///           |       |
///           2       3
/// ```
pub struct ThreeObserverTree {
    pub tree: Tree,
    pub observers: Vec<NodeId>,
}

impl ThreeObserverTree {
    pub const U: NodeId = 0;
    pub const V: NodeId = 4;
    pub const W: NodeId = 5;
    pub const A: EdgeId = 0;
    pub const B: EdgeId = 1;
    pub const C: EdgeId = 2;
    pub const D: EdgeId = 3;
    pub const E: EdgeId = 4;
}

pub fn three_observer_tree() -> ThreeObserverTree {
    use ThreeObserverTree as T;
    let tree = Tree::new(
        6,
        &[(1, T::U), (T::U, T::V), (T::V, T::W), (T::V, 3), (T::U, 2)],
    )
    .expect("valid fixture");
    ThreeObserverTree {
        tree,
        observers: vec![1, 2, 3],
    }
}

/// 24-node tree whose nine observers (ids `1..=9`) split the remaining
/// nodes into four classes:
///
/// * `{0, 10, 11, 12, 13, 14}` with boundary `{7, 8, 9}`
/// * `{15, 16}` with boundary `{2, 3, 4, 5}`
/// * `{17, 18, 19}` with boundary `{2}`
/// * `{20, 21, 22, 23}` with boundary `{1, 2}`
///
/// Observer 6 touches no class.
pub struct FourClassTree {
    pub tree: Tree,
    pub observers: Vec<NodeId>,
}

pub fn four_class_tree() -> FourClassTree {
    let edges = [
        (8, 10),
        (0, 10),
        (10, 12),
        (3, 16),
        (1, 21),
        (9, 11),
        (11, 12),
        (12, 7),
        (7, 6),
        (6, 5),
        (5, 15),
        (15, 16),
        (16, 2),
        (2, 20),
        (20, 21),
        (21, 22),
        (13, 11),
        (14, 12),
        (4, 15),
        (17, 2),
        (23, 21),
        (18, 17),
        (19, 17),
    ];
    FourClassTree {
        tree: Tree::new(24, &edges).expect("valid fixture"),
        observers: (1..=9).collect(),
    }
}

/// Two non-observers `left` and `right` separated by observer `0`; `left`
/// carries one more leaf observer and `right` carries `fan` leaf observers.
///
/// ```text
///   far -- left -- 0 -- right -- {1..fan}
/// ```
pub struct TwoSidedStar {
    pub tree: Tree,
    pub observers: Vec<NodeId>,
    pub left: NodeId,
    pub right: NodeId,
    /// The observer hanging off `left`.
    pub far: NodeId,
}

pub fn two_sided_star(fan: usize) -> TwoSidedStar {
    let far = fan + 1;
    let left = fan + 2;
    let right = fan + 3;
    let mut edges = vec![(far, left), (left, 0), (0, right)];
    edges.extend((1..=fan).map(|i| (right, i)));
    TwoSidedStar {
        tree: Tree::new(fan + 4, &edges).expect("valid fixture"),
        observers: (0..=far).collect(),
        left,
        right,
        far,
    }
}
