//! Brute-force connectivity referees.

use std::collections::VecDeque;

use crate::edge::{Edge, VertexId};
use crate::streaming::Dsu;

/// Component labels (minimum member id) by union-find.
pub fn union_find_labels<'a>(vertices: u32, edges: impl IntoIterator<Item = &'a Edge>) -> Vec<VertexId> {
    let n = vertices as usize;
    let mut dsu = Dsu::new(n);
    for e in edges {
        dsu.union(e.u(), e.v());
    }
    let mut min_of = vec![u32::MAX; n];
    for x in 0..vertices {
        let r = dsu.find(x) as usize;
        min_of[r] = min_of[r].min(x);
    }
    (0..vertices).map(|x| min_of[dsu.find(x) as usize]).collect()
}

/// Component labels by breadth-first search from each unlabeled vertex.
pub fn bfs_labels<'a>(vertices: u32, edges: impl IntoIterator<Item = &'a Edge>) -> Vec<VertexId> {
    let n = vertices as usize;
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.u() as usize].push(e.v());
        adj[e.v() as usize].push(e.u());
    }
    let mut label = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..vertices {
        if label[s as usize] != u32::MAX {
            continue;
        }
        label[s as usize] = s;
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x as usize] {
                if label[y as usize] == u32::MAX {
                    label[y as usize] = s;
                    queue.push_back(y);
                }
            }
        }
    }
    label
}
