//! Two-tier invertible Bloom lookup table over vertex ids.

use std::collections::BTreeSet;

use crate::edge::VertexId;
use crate::error::{Error, Result};
use crate::hash::{derive_seed, hash64};
use crate::sketch::{ceil_log2, BucketState, Checksum, SketchBucket};

/// Tier-1 hash locations per element.
pub const IBLT_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IbltConfig {
    pub recovery_size: u32,
    pub vertices: u32,
    pub seed: u64,
}

impl IbltConfig {
    pub fn tier1_len(&self) -> usize {
        (((self.recovery_size as u64 * 13).div_ceil(10)) as usize).max(IBLT_K)
    }

    pub fn tier2_len(&self) -> usize {
        let log_v = ceil_log2(self.vertices as u64) as usize;
        let fifth = (self.recovery_size as u64).div_ceil(5) as usize;
        log_v.max(fifth).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NeighborIblt {
    config: IbltConfig,
    checksum: Checksum,
    tier1: Vec<SketchBucket>,
    tier2: Vec<SketchBucket>,
}

impl NeighborIblt {
    pub fn new(config: IbltConfig) -> Self {
        let width = (32 - config.vertices.leading_zeros()).max(32);
        NeighborIblt {
            config,
            checksum: Checksum::new(derive_seed(config.seed, u64::MAX), width),
            tier1: vec![SketchBucket::EMPTY; config.tier1_len()],
            tier2: vec![SketchBucket::EMPTY; config.tier2_len()],
        }
    }

    pub fn config(&self) -> &IbltConfig {
        &self.config
    }

    pub fn tier1(&self) -> &[SketchBucket] {
        &self.tier1
    }

    pub fn tier2(&self) -> &[SketchBucket] {
        &self.tier2
    }

    pub fn cell_count(&self) -> usize {
        self.tier1.len() + self.tier2.len()
    }

    pub fn is_zero(&self) -> bool {
        self.tier1.iter().chain(&self.tier2).all(SketchBucket::is_empty)
    }

    /// The `k` distinct tier-1 cells and the tier-2 cell of `x`.
    pub fn locations(&self, x: VertexId) -> ([usize; IBLT_K], usize) {
        let m1 = self.tier1.len() as u64;
        let mut out = [usize::MAX; IBLT_K];
        let mut filled = 0;
        let mut attempt = 0u64;
        while filled < IBLT_K {
            let c = (hash64(derive_seed(self.config.seed, attempt), x as u64) % m1) as usize;
            attempt += 1;
            if !out[..filled].contains(&c) {
                out[filled] = c;
                filled += 1;
            }
        }
        let t2 = (hash64(derive_seed(self.config.seed, u64::MAX - 1), x as u64) % self.tier2.len() as u64) as usize;
        (out, t2)
    }

    pub fn toggle(&mut self, x: VertexId) {
        debug_assert!(x < self.config.vertices);
        let (cells, t2) = self.locations(x);
        for c in cells {
            self.tier1[c].toggle(x as u64, &self.checksum);
        }
        self.tier2[t2].toggle(x as u64, &self.checksum);
    }

    pub fn insert(&mut self, x: VertexId) {
        self.toggle(x);
    }

    pub fn delete(&mut self, x: VertexId) {
        self.toggle(x);
    }

    /// Cell-wise XOR with a table of identical configuration.
    pub fn xor_with(&mut self, other: &NeighborIblt) -> Result<()> {
        if self.config != other.config {
            return Err(Error::ConfigMismatch);
        }
        for (a, b) in self.tier1.iter_mut().zip(&other.tier1) {
            a.xor_assign(b);
        }
        for (a, b) in self.tier2.iter_mut().zip(&other.tier2) {
            a.xor_assign(b);
        }
        Ok(())
    }

    /// Peels a scratch copy. The table itself is never modified.
    pub fn recover(&self) -> Result<BTreeSet<VertexId>> {
        let mut scratch = self.clone();
        let mut found = BTreeSet::new();
        let mut start = 0;
        loop {
            if let Some((idx, x)) = scratch.peelable_tier1(start) {
                let (cells, _) = scratch.locations(x);
                scratch.toggle(x);
                toggle_member(&mut found, x);
                start = cells.iter().copied().chain([idx]).min().unwrap_or(0);
                continue;
            }
            if let Some(x) = scratch.peelable_tier2() {
                scratch.toggle(x);
                toggle_member(&mut found, x);
                start = 0;
                continue;
            }
            break;
        }
        if scratch.is_zero() {
            Ok(found)
        } else {
            Err(Error::RecoveryFailed)
        }
    }

    fn good_element(&self, b: &SketchBucket) -> Option<VertexId> {
        match b.state(&self.checksum) {
            BucketState::Good(j) if j.0 < self.config.vertices as u64 => Some(j.0 as VertexId),
            _ => None,
        }
    }

    fn peelable_tier1(&self, start: usize) -> Option<(usize, VertexId)> {
        (start..self.tier1.len()).find_map(|i| {
            let x = self.good_element(&self.tier1[i])?;
            // A checksum collision can name an element that does not hash here.
            self.locations(x).0.contains(&i).then_some((i, x))
        })
    }

    fn peelable_tier2(&self) -> Option<VertexId> {
        (0..self.tier2.len()).find_map(|i| {
            let x = self.good_element(&self.tier2[i])?;
            (self.locations(x).1 == i).then_some(x)
        })
    }

    /// `[r][V][seed][m1][m2]` header then `(alpha, gamma)` pairs for each tier, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.cell_count());
        out.extend_from_slice(&self.config.recovery_size.to_le_bytes());
        out.extend_from_slice(&self.config.vertices.to_le_bytes());
        out.extend_from_slice(&self.config.seed.to_le_bytes());
        out.extend_from_slice(&(self.tier1.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.tier2.len() as u32).to_le_bytes());
        for b in self.tier1.iter().chain(&self.tier2) {
            out.extend_from_slice(&b.alpha.to_le_bytes());
            out.extend_from_slice(&b.gamma.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let short = || Error::Decode("unexpected end of input".into());
        let u32_at = |p: usize| bytes.get(p..p + 4).map(|s| u32::from_le_bytes(s.try_into().unwrap())).ok_or_else(short);
        let u64_at = |p: usize| bytes.get(p..p + 8).map(|s| u64::from_le_bytes(s.try_into().unwrap())).ok_or_else(short);
        let config = IbltConfig { recovery_size: u32_at(0)?, vertices: u32_at(4)?, seed: u64_at(8)? };
        let mut t = NeighborIblt::new(config);
        if u32_at(16)? as usize != t.tier1.len() || u32_at(20)? as usize != t.tier2.len() {
            return Err(Error::Decode("tier sizes disagree with configuration".into()));
        }
        if bytes.len() != 24 + 16 * t.cell_count() {
            return Err(Error::Decode(format!("expected {} bytes, got {}", 24 + 16 * t.cell_count(), bytes.len())));
        }
        for (k, b) in t.tier1.iter_mut().chain(t.tier2.iter_mut()).enumerate() {
            let p = 24 + 16 * k;
            *b = SketchBucket { alpha: u64_at(p)?, gamma: u64_at(p + 8)? };
        }
        Ok(t)
    }
}

fn toggle_member(set: &mut BTreeSet<VertexId>, x: VertexId) {
    if !set.remove(&x) {
        set.insert(x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(r: u32, vertices: u32, seed: u64) -> NeighborIblt {
        NeighborIblt::new(IbltConfig { recovery_size: r, vertices, seed })
    }

    #[test]
    fn sizes() {
        let c = IbltConfig { recovery_size: 40, vertices: 1 << 13, seed: 0 };
        assert_eq!(c.tier1_len(), 52);
        assert_eq!(c.tier2_len(), 13);
        let c = IbltConfig { recovery_size: 100, vertices: 16, seed: 0 };
        assert_eq!(c.tier1_len(), 130);
        assert_eq!(c.tier2_len(), 20);
        let c = IbltConfig { recovery_size: 0, vertices: 1, seed: 0 };
        assert_eq!(c.tier1_len(), 3);
        assert_eq!(c.tier2_len(), 1);
    }

    #[test]
    fn insert_delete_cancels() {
        let mut t = table(10, 100, 1);
        t.insert(42);
        assert!(!t.is_zero());
        t.delete(42);
        assert!(t.is_zero());
    }

    #[test]
    fn single_insert_k_plus_one_good_cells() {
        let mut t = table(10, 100, 2);
        t.insert(17);
        let ck = t.checksum;
        let good = t.tier1.iter().chain(&t.tier2).filter(|b| b.state(&ck) == BucketState::Good(crate::CoordinateId(17))).count();
        assert_eq!(good, IBLT_K + 1);
    }

    #[test]
    fn recover_small() {
        let t = table(10, 100, 3);
        assert_eq!(t.recover().unwrap(), BTreeSet::new());
        let mut t = table(10, 100, 3);
        t.insert(0);
        assert_eq!(t.recover().unwrap(), BTreeSet::from([0]));
    }

    #[test]
    fn recover_at_capacity_mostly_succeeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // Default demotion size for V = 2^13: r = 25 * 13 / 2.
        let (r, vertices) = (162u32, 1u32 << 13);
        let mut ok = 0;
        for s in 0..500u64 {
            let mut t = table(r, vertices, s);
            let set: BTreeSet<u32> = sample(&mut rng, vertices as usize, r as usize).into_iter().map(|x| x as u32).collect();
            for &x in &set {
                t.insert(x);
            }
            let before = t.to_bytes();
            match t.recover() {
                Ok(found) => {
                    assert_eq!(found, set);
                    ok += 1;
                }
                Err(e) => assert_eq!(e, Error::RecoveryFailed),
            }
            assert_eq!(t.to_bytes(), before);
        }
        assert!(ok >= 490, "{ok}/500");
    }

    #[test]
    fn overloaded_table_fails_cleanly() {
        let mut t = table(4, 1000, 5);
        for x in 0..200 {
            t.insert(x);
        }
        let before = t.to_bytes();
        assert_eq!(t.recover(), Err(Error::RecoveryFailed));
        assert_eq!(t.to_bytes(), before);
    }

    #[test]
    fn linearity_and_bytes() {
        let mut a = table(20, 500, 6);
        let mut b = table(20, 500, 6);
        let mut direct = table(20, 500, 6);
        for x in [1, 2, 3, 4] {
            a.insert(x);
            direct.toggle(x);
        }
        for x in [3, 4, 5] {
            b.insert(x);
            direct.toggle(x);
        }
        a.xor_with(&b).unwrap();
        assert_eq!(a, direct);
        assert_eq!(a.recover().unwrap(), BTreeSet::from([1, 2, 5]));
        assert_eq!(NeighborIblt::from_bytes(&a.to_bytes()).unwrap(), a);
        assert_eq!(a.xor_with(&table(20, 500, 7)), Err(Error::ConfigMismatch));
    }
}
