//! Seeded synthetic streams.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::edge::{decode_edge, pair_universe, CoordinateId, Edge, VertexId};
use crate::error::{Error, Result};

use super::stream::{Op, Stream};

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParams(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_v(v: u32) -> Result<()> {
    if v < 2 {
        return Err(Error::BadParams(format!("need at least 2 vertices, got {v}")));
    }
    Ok(())
}

/// Edges of G(n, p) over vertex ids `offset..offset+n`, by geometric skipping.
fn gnp_edges(n: u32, p: f64, offset: VertexId, rng: &mut ChaCha8Rng, out: &mut Vec<Edge>) {
    if p <= 0.0 || n < 2 {
        return;
    }
    let total = pair_universe(n);
    let log_q = (1.0 - p).ln();
    let mut idx: u64 = 0;
    loop {
        if p < 1.0 {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let skip = (u.ln() / log_q).floor();
            if skip >= (total - idx) as f64 {
                return;
            }
            idx += skip as u64;
        }
        if idx >= total {
            return;
        }
        let e = decode_edge(CoordinateId(idx), n).expect("index in range");
        out.push(Edge::new(e.u() + offset, e.v() + offset).unwrap());
        idx += 1;
    }
}

/// Insert-only stream of a shuffled G(V, p).
pub fn gnp(vertices: u32, p: f64, seed: u64) -> Result<Stream> {
    check_v(vertices)?;
    check_p(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    gnp_edges(vertices, p, 0, &mut rng, &mut edges);
    edges.shuffle(&mut rng);
    Ok(inserts(vertices, &edges))
}

/// Sparse G(V, p_out) periphery united with a dense G(k, p_in) core on
/// vertices `0..k`, shuffled.
pub fn planted_core(vertices: u32, p_out: f64, core: u32, p_in: f64, seed: u64) -> Result<Stream> {
    check_v(vertices)?;
    check_p(p_out)?;
    check_p(p_in)?;
    if core > vertices {
        return Err(Error::BadParams(format!("core size {core} exceeds {vertices} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    gnp_edges(vertices, p_out, 0, &mut rng, &mut edges);
    gnp_edges(core, p_in, 0, &mut rng, &mut edges);
    edges.sort_unstable();
    edges.dedup();
    edges.shuffle(&mut rng);
    Ok(inserts(vertices, &edges))
}

pub fn inserts(vertices: u32, edges: &[Edge]) -> Stream {
    Stream { vertices, ops: edges.iter().map(|&e| Op::Insert(e)).collect() }
}

/// Inserts every edge, then deletes them all in the same order.
pub fn insert_then_delete(vertices: u32, edges: &[Edge]) -> Stream {
    let mut s = inserts(vertices, edges);
    s.ops.extend(edges.iter().map(|&e| Op::Delete(e)));
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnParams {
    pub vertices: u32,
    /// Edge count the stream hovers around.
    pub target_edges: usize,
    pub updates: usize,
    /// A window of `core` vertices receives a `core_frac` share of insertions.
    pub core: u32,
    pub core_frac: f64,
    /// The stream is split into this many equal phases; phase `k` places the
    /// core window at `k·core` (mod V).
    pub core_phases: u32,
    /// Chance of a connectivity query after each update.
    pub query_rate: f64,
    pub seed: u64,
}

/// Random interleaved inserts, deletes and queries. Deletion probability is
/// `|E| / (2·target)`, so the edge count settles near the target.
pub fn churn(p: &ChurnParams) -> Result<Stream> {
    check_v(p.vertices)?;
    check_p(p.core_frac)?;
    check_p(p.query_rate)?;
    if p.core > p.vertices || (p.core_frac > 0.0 && p.core < 2) {
        return Err(Error::BadParams(format!("bad core size {}", p.core)));
    }
    let cap = pair_universe(p.vertices) as usize;
    if p.target_edges * 2 > cap {
        return Err(Error::BadParams("target edge count too close to the complete graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut present: Vec<Edge> = Vec::new();
    let mut index: FxHashMap<Edge, usize> = FxHashMap::default();
    let mut s = Stream::new(p.vertices);
    let target = p.target_edges.max(1) as f64;
    let phase_len = p.updates.div_ceil(p.core_phases.max(1) as usize).max(1);
    for step in 0..p.updates {
        let base = ((step / phase_len) as u64 * p.core as u64 % p.vertices as u64) as u32;
        let p_del = (present.len() as f64 / (2.0 * target)).min(1.0);
        if !present.is_empty() && rng.gen_bool(p_del) {
            let k = rng.gen_range(0..present.len());
            let e = present.swap_remove(k);
            index.remove(&e);
            if k < present.len() {
                index.insert(present[k], k);
            }
            s.ops.push(Op::Delete(e));
        } else {
            let in_core = p.core_frac > 0.0 && rng.gen_bool(p.core_frac);
            let mut n = if in_core { p.core } else { p.vertices };
            let mut shift = if in_core { base } else { 0 };
            let mut tries = 0;
            let e = loop {
                // A saturated core falls back to the whole vertex range.
                tries += 1;
                if tries > 64 {
                    n = p.vertices;
                    shift = 0;
                }
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let (a, b) = ((a + shift) % p.vertices, (b + shift) % p.vertices);
                if let Ok(e) = Edge::new(a, b) {
                    if !index.contains_key(&e) {
                        break e;
                    }
                }
            };
            index.insert(e, present.len());
            present.push(e);
            s.ops.push(Op::Insert(e));
        }
        if rng.gen_bool(p.query_rate) {
            s.ops.push(Op::Query(rng.gen_range(0..p.vertices), rng.gen_range(0..p.vertices)));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_at_p_one() {
        let s = gnp(4, 1.0, 0).unwrap();
        let mut got: Vec<Edge> = s.ops.iter().map(|op| if let Op::Insert(e) = op { *e } else { panic!() }).collect();
        got.sort_unstable();
        assert_eq!(got.len(), 6);
        assert_eq!(got[0], Edge::new(0, 1).unwrap());
        assert!(gnp(10, 0.0, 0).unwrap().ops.is_empty());
    }

    #[test]
    fn parameter_checks() {
        assert!(gnp(10, 1.5, 0).is_err());
        assert!(planted_core(10, 0.1, 11, 0.5, 0).is_err());
        assert!(gnp(1, 0.5, 0).is_err());
    }

    #[test]
    fn gnp_edge_count_near_mean() {
        let s = gnp(400, 0.05, 7).unwrap();
        let mean = 0.05 * pair_universe(400) as f64;
        let sd = (mean * 0.95).sqrt();
        assert!((s.ops.len() as f64 - mean).abs() < 4.0 * sd, "{}", s.ops.len());
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(planted_core(100, 0.04, 20, 0.5, 3).unwrap(), planted_core(100, 0.04, 20, 0.5, 3).unwrap());
        assert_ne!(gnp(100, 0.1, 3).unwrap(), gnp(100, 0.1, 4).unwrap());
    }

    #[test]
    fn insert_then_delete_shape() {
        let edges = [Edge::new(0, 1).unwrap(), Edge::new(1, 2).unwrap()];
        let s = insert_then_delete(3, &edges);
        assert_eq!(s.to_text(), "V 3\ni 0 1\ni 1 2\nd 0 1\nd 1 2\n");
    }

    #[test]
    fn generated_streams_are_well_formed() {
        for seed in 0..100 {
            gnp(30, 0.2, seed).unwrap().validate().unwrap();
            planted_core(30, 0.05, 10, 0.8, seed).unwrap().validate().unwrap();
            let c = ChurnParams {
                vertices: 30,
                target_edges: 40,
                updates: 300,
                core: 8,
                core_frac: 0.3,
                core_phases: 3,
                query_rate: 0.1,
                seed,
            };
            churn(&c).unwrap().validate().unwrap();
        }
    }
}
