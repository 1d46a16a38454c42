use crate::edge::CoordinateId;
use crate::error::{Error, Result};
use crate::hash::derive_seed;

use super::column::{BalloonColumn, Reader, Sample, SketchSeed};

/// `L` independently seeded columns over one universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SketchMatrix {
    columns: Vec<BalloonColumn>,
}

/// Seeds for `count` columns derived from `master`, pairwise distinct.
pub fn column_seeds(master: u64, count: usize) -> Vec<SketchSeed> {
    let mut seeds: Vec<SketchSeed> = Vec::with_capacity(count);
    let mut index = 0u64;
    while seeds.len() < count {
        let s = SketchSeed { column_seed: derive_seed(master, 2 * index), checksum_seed: derive_seed(master, 2 * index + 1) };
        index += 1;
        if seeds.iter().all(|t| t.column_seed != s.column_seed) {
            seeds.push(s);
        }
    }
    seeds
}

impl SketchMatrix {
    pub fn new(master_seed: u64, columns: usize, universe: u64) -> Self {
        let columns = column_seeds(master_seed, columns).into_iter().map(|s| BalloonColumn::new(s, universe)).collect();
        SketchMatrix { columns }
    }

    pub fn columns(&self) -> &[BalloonColumn] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &BalloonColumn {
        &self.columns[k]
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn universe(&self) -> u64 {
        self.columns.first().map_or(0, BalloonColumn::universe)
    }

    /// Total stored buckets across all columns.
    pub fn bucket_count(&self) -> usize {
        self.columns.iter().map(BalloonColumn::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(BalloonColumn::is_empty)
    }

    /// Toggles `j` in every column. Returns buckets touched.
    pub fn update(&mut self, j: CoordinateId) -> usize {
        self.columns.iter_mut().map(|c| c.update(j)).sum()
    }

    pub fn merge(&mut self, other: &SketchMatrix) -> Result<()> {
        if self.columns.len() != other.columns.len() {
            return Err(Error::SeedMismatch);
        }
        if self.columns.iter().zip(&other.columns).any(|(a, b)| a.params() != b.params()) {
            return Err(Error::SeedMismatch);
        }
        for (a, b) in self.columns.iter_mut().zip(&other.columns) {
            a.merge(b)?;
        }
        Ok(())
    }

    pub fn sample_all(&self) -> Vec<Sample> {
        self.columns.iter().map(BalloonColumn::sample).collect()
    }

    /// `[u32 L]` followed by each column's encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.columns.len() as u32).to_le_bytes());
        for c in &self.columns {
            c.write_bytes(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let count = r.u32()? as usize;
        let mut pos = r.pos;
        let mut columns = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let (c, used) = BalloonColumn::read_bytes(&bytes[pos..])?;
            pos += used;
            columns.push(c);
        }
        if pos != bytes.len() {
            return Err(Error::Decode(format!("{} trailing bytes", bytes.len() - pos)));
        }
        if columns.windows(2).any(|w| w[0].universe() != w[1].universe()) {
            return Err(Error::Decode("columns disagree on universe".into()));
        }
        Ok(SketchMatrix { columns })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::hash64;

    #[test]
    fn seeds_distinct() {
        let seeds = column_seeds(42, 256);
        for (i, a) in seeds.iter().enumerate() {
            for b in &seeds[i + 1..] {
                assert_ne!(a.column_seed, b.column_seed);
            }
        }
    }

    #[test]
    fn single_column_matches_column_update() {
        let mut m = SketchMatrix::new(3, 1, 1000);
        let mut c = m.column(0).clone();
        for j in [4u64, 17, 4, 999, 0] {
            m.update(CoordinateId(j));
            c.update(CoordinateId(j));
        }
        assert_eq!(m.column(0), &c);
    }

    #[test]
    fn update_twice_clears() {
        let mut m = SketchMatrix::new(3, 16, 1 << 20);
        m.update(CoordinateId(12345));
        assert!(!m.is_zero());
        m.update(CoordinateId(12345));
        assert!(m.is_zero());
        assert!(m.sample_all().iter().all(|s| *s == Sample::EmptyVec));
    }

    #[test]
    fn singleton_every_column_good() {
        let mut m = SketchMatrix::new(5, 24, 1 << 20);
        m.update(CoordinateId(7));
        assert!(m.sample_all().iter().all(|s| *s == Sample::Good(CoordinateId(7))));
    }

    #[test]
    fn merge_rejects_other_master() {
        let mut a = SketchMatrix::new(1, 4, 100);
        let b = SketchMatrix::new(2, 4, 100);
        assert_eq!(a.merge(&b), Err(Error::SeedMismatch));
    }

    #[test]
    fn bytes_round_trip_and_determinism() {
        let build = || {
            let mut m = SketchMatrix::new(9, 8, 1 << 18);
            for k in 0..500 {
                m.update(CoordinateId(hash64(0, k) % (1 << 18)));
            }
            m
        };
        let m = build();
        assert_eq!(m.to_bytes(), build().to_bytes());
        assert_eq!(SketchMatrix::from_bytes(&m.to_bytes()).unwrap(), m);
    }
}
