//! Dynamic forests: Euler-tour treaps with aggregates and link-cut trees.

mod euler;
mod linkcut;

pub use euler::{Augment, EulerForest, NodeKind, TreeId};
pub use linkcut::TopWeightForest;

use crate::edge::Edge;

/// One change to a maintained spanning forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForestEvent {
    Add(Edge),
    Remove(Edge),
}

/// Spanning-forest changes caused by one update, in order.
pub type ForestDelta = Vec<ForestEvent>;
