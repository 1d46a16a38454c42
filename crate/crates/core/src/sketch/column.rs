use crate::edge::CoordinateId;
use crate::error::{Error, Result};
use crate::hash::hash64;

use super::bucket::{BucketState, Checksum, SketchBucket};

/// Headroom added to `⌈log2 n⌉` when computing the depth cap.
pub const RHO_HEADROOM: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SketchSeed {
    pub column_seed: u64,
    pub checksum_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    EmptyVec,
    Good(CoordinateId),
    Fail,
}

impl Sample {
    pub fn good(self) -> Option<CoordinateId> {
        match self {
            Sample::Good(j) => Some(j),
            _ => None,
        }
    }
}

pub(crate) fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Trailing zeros of `h` restricted to `rho` bits, capped at `rho - 1`.
#[inline]
pub fn depth_from_hash(h: u64, rho: u32) -> u32 {
    let masked = if rho >= 64 { h } else { h & ((1u64 << rho) - 1) };
    masked.trailing_zeros().min(rho - 1)
}

/// Geometric depth of coordinate `j` under `seed`.
#[inline]
pub fn random_depth(seed: SketchSeed, j: CoordinateId, rho: u32) -> u32 {
    depth_from_hash(hash64(seed.column_seed, j.0), rho)
}

/// Everything about a column except its buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ColumnParams {
    seed: SketchSeed,
    universe: u64,
    rho: u32,
    checksum: Checksum,
}

impl ColumnParams {
    pub fn new(seed: SketchSeed, universe: u64) -> Self {
        let rho = (ceil_log2(universe) + RHO_HEADROOM).min(64);
        let width = (64 - universe.leading_zeros()).max(32);
        ColumnParams { seed, universe, rho, checksum: Checksum::new(seed.checksum_seed, width) }
    }

    pub fn seed(&self) -> SketchSeed {
        self.seed
    }
    pub fn universe(&self) -> u64 {
        self.universe
    }
    pub fn rho(&self) -> u32 {
        self.rho
    }
    pub fn checksum(&self) -> &Checksum {
        &self.checksum
    }

    #[inline]
    pub fn depth(&self, j: u64) -> u32 {
        depth_from_hash(hash64(self.seed.column_seed, j), self.rho)
    }

    /// Applies the column update to a raw bucket vector, returning buckets touched
    /// (written, copied on reallocation, or scanned while shrinking).
    pub fn update_buckets(&self, buckets: &mut Vec<SketchBucket>, j: u64) -> usize {
        let i = self.depth(j) as usize;
        let mut touched = 0;
        if i >= buckets.len() {
            touched += buckets.len();
            resize_exact(buckets, i + 1);
        }
        buckets[0].toggle(j, &self.checksum);
        touched += 1;
        if i > 0 {
            buckets[i].toggle(j, &self.checksum);
            touched += 1;
        }
        if i + 1 == buckets.len() && buckets[i].is_empty() {
            let keep = buckets.iter().rposition(|b| !b.is_empty()).map_or(0, |d| d + 1);
            touched += i + 1 + keep;
            resize_exact(buckets, keep);
        }
        touched
    }

    pub fn sample_buckets(&self, buckets: &[SketchBucket]) -> Sample {
        if buckets.is_empty() {
            return Sample::EmptyVec;
        }
        for b in buckets.iter().rev() {
            if let BucketState::Good(j) = b.state(&self.checksum) {
                return Sample::Good(j);
            }
        }
        // A non-trimmed aggregate may consist only of empty buckets.
        if buckets.iter().all(SketchBucket::is_empty) {
            Sample::EmptyVec
        } else {
            Sample::Fail
        }
    }
}

/// XOR `src` into `dst` bucket-wise and trim trailing empties.
pub fn xor_buckets(dst: &mut Vec<SketchBucket>, src: &[SketchBucket]) {
    if src.len() > dst.len() {
        resize_exact(dst, src.len());
    }
    for (d, s) in dst.iter_mut().zip(src) {
        d.xor_assign(s);
    }
    trim_buckets(dst);
}

pub fn trim_buckets(buckets: &mut Vec<SketchBucket>) {
    let keep = buckets.iter().rposition(|b| !b.is_empty()).map_or(0, |d| d + 1);
    if keep != buckets.len() {
        resize_exact(buckets, keep);
    }
}

fn resize_exact(buckets: &mut Vec<SketchBucket>, len: usize) {
    if len > buckets.len() {
        buckets.reserve_exact(len - buckets.len());
        buckets.resize(len, SketchBucket::EMPTY);
    } else {
        buckets.truncate(len);
        buckets.shrink_to_fit();
    }
}

/// A single BalloonSketch column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BalloonColumn {
    params: ColumnParams,
    buckets: Vec<SketchBucket>,
}

impl BalloonColumn {
    pub fn new(seed: SketchSeed, universe: u64) -> Self {
        BalloonColumn { params: ColumnParams::new(seed, universe), buckets: Vec::new() }
    }

    pub fn from_params(params: ColumnParams) -> Self {
        BalloonColumn { params, buckets: Vec::new() }
    }

    pub fn params(&self) -> &ColumnParams {
        &self.params
    }
    pub fn seed(&self) -> SketchSeed {
        self.params.seed
    }
    pub fn universe(&self) -> u64 {
        self.params.universe
    }
    pub fn rho(&self) -> u32 {
        self.params.rho
    }
    pub fn buckets(&self) -> &[SketchBucket] {
        &self.buckets
    }
    pub fn len(&self) -> usize {
        self.buckets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Toggles `j`. Returns buckets touched.
    pub fn update(&mut self, j: CoordinateId) -> usize {
        debug_assert!(j.0 < self.params.universe);
        self.params.update_buckets(&mut self.buckets, j.0)
    }

    pub fn merge(&mut self, other: &BalloonColumn) -> Result<()> {
        if self.params != other.params {
            return Err(Error::SeedMismatch);
        }
        xor_buckets(&mut self.buckets, &other.buckets);
        Ok(())
    }

    pub fn sample(&self) -> Sample {
        self.params.sample_buckets(&self.buckets)
    }

    /// `[u32 len][len x (alpha, gamma)][column_seed][checksum_seed][universe]`, little-endian.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.buckets.len() as u32).to_le_bytes());
        for b in &self.buckets {
            out.extend_from_slice(&b.alpha.to_le_bytes());
            out.extend_from_slice(&b.gamma.to_le_bytes());
        }
        out.extend_from_slice(&self.params.seed.column_seed.to_le_bytes());
        out.extend_from_slice(&self.params.seed.checksum_seed.to_le_bytes());
        out.extend_from_slice(&self.params.universe.to_le_bytes());
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 16 * self.buckets.len() + 24);
        self.write_bytes(&mut out);
        out
    }

    /// Parses one column from the front of `bytes`, returning it and the bytes consumed.
    pub fn read_bytes(bytes: &[u8]) -> Result<(Self, usize)> {
        let mut r = Reader { bytes, pos: 0 };
        let len = r.u32()? as usize;
        if bytes.len().saturating_sub(4) / 16 < len {
            return Err(Error::Decode(format!("truncated bucket array of length {len}")));
        }
        let mut buckets = Vec::with_capacity(len);
        for _ in 0..len {
            let alpha = r.u64()?;
            let gamma = r.u64()?;
            buckets.push(SketchBucket { alpha, gamma });
        }
        let seed = SketchSeed { column_seed: r.u64()?, checksum_seed: r.u64()? };
        let universe = r.u64()?;
        let params = ColumnParams::new(seed, universe);
        if len > params.rho as usize {
            return Err(Error::Decode(format!("length {len} exceeds depth cap {}", params.rho)));
        }
        if buckets.last().is_some_and(SketchBucket::is_empty) {
            return Err(Error::Decode("deepest bucket is empty".into()));
        }
        Ok((BalloonColumn { params, buckets }, r.pos))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (col, used) = Self::read_bytes(bytes)?;
        if used != bytes.len() {
            return Err(Error::Decode(format!("{} trailing bytes", bytes.len() - used)));
        }
        Ok(col)
    }
}

pub(crate) struct Reader<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self.bytes.get(self.pos..end).ok_or_else(|| Error::Decode("unexpected end of input".into()))?;
        self.pos = end;
        Ok(slice.try_into().unwrap())
    }
    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seed(k: u64) -> SketchSeed {
        SketchSeed { column_seed: hash64(1, k), checksum_seed: hash64(2, k) }
    }

    fn find_coordinate(s: SketchSeed, universe: u64, depth: u32) -> u64 {
        let p = ColumnParams::new(s, universe);
        (0..universe).find(|&j| p.depth(j) == depth).unwrap()
    }

    #[test]
    fn depth_examples() {
        assert_eq!(depth_from_hash(12, 8), 2);
        assert_eq!(depth_from_hash(7, 8), 0);
        assert_eq!(depth_from_hash(0, 8), 7);
        assert_eq!(depth_from_hash(1 << 9, 8), 7);
        assert_eq!(depth_from_hash(0, 64), 63);
    }

    #[test]
    fn rho_and_width() {
        let p = ColumnParams::new(seed(0), 1 << 20);
        assert_eq!(p.rho(), 28);
        assert_eq!(p.checksum().width(), 32);
        let p = ColumnParams::new(seed(0), (1 << 40) + 1);
        assert_eq!(p.rho(), 49);
        assert_eq!(p.checksum().width(), 41);
        assert_eq!(ColumnParams::new(seed(0), u64::MAX).rho(), 64);
    }

    #[test]
    fn update_depth_zero() {
        let s = seed(3);
        let j = find_coordinate(s, 1000, 0);
        let mut c = BalloonColumn::new(s, 1000);
        c.update(CoordinateId(j));
        assert_eq!(c.len(), 1);
        assert_eq!(c.buckets()[0].state(c.params().checksum()), BucketState::Good(CoordinateId(j)));
    }

    #[test]
    fn update_depth_three() {
        let s = seed(4);
        let j = find_coordinate(s, 1000, 3);
        let mut c = BalloonColumn::new(s, 1000);
        c.update(CoordinateId(j));
        assert_eq!(c.len(), 4);
        let ck = *c.params().checksum();
        assert_eq!(c.buckets()[0].state(&ck), BucketState::Good(CoordinateId(j)));
        assert_eq!(c.buckets()[1].state(&ck), BucketState::Empty);
        assert_eq!(c.buckets()[2].state(&ck), BucketState::Empty);
        assert_eq!(c.buckets()[3].state(&ck), BucketState::Good(CoordinateId(j)));
        c.update(CoordinateId(j));
        assert_eq!(c.len(), 0);
        assert_eq!(c.buckets().len(), 0);
    }

    #[test]
    fn sample_cases() {
        let mut c = BalloonColumn::new(seed(5), 100);
        assert_eq!(c.sample(), Sample::EmptyVec);
        c.update(CoordinateId(5));
        assert_eq!(c.sample(), Sample::Good(CoordinateId(5)));
    }

    #[test]
    fn merge_examples() {
        let s = seed(6);
        let build = |xs: &[u64]| {
            let mut c = BalloonColumn::new(s, 64);
            for &x in xs {
                c.update(CoordinateId(x));
            }
            c
        };
        let mut a = build(&[1, 2]);
        a.merge(&build(&[2, 3])).unwrap();
        assert_eq!(a, build(&[1, 3]));
        let mut x = build(&[4, 9, 17]);
        x.merge(&x.clone()).unwrap();
        assert!(x.is_empty());
        let mut y = build(&[1]);
        assert_eq!(y.merge(&BalloonColumn::new(seed(7), 64)), Err(Error::SeedMismatch));
    }

    #[test]
    fn merge_matches_direct_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1u64 << 16;
        for t in 0..100 {
            let s = seed(100 + t);
            let xs: Vec<u64> = (0..rng.gen_range(0..200)).map(|_| rng.gen_range(0..n)).collect();
            let ys: Vec<u64> = (0..rng.gen_range(0..200)).map(|_| rng.gen_range(0..n)).collect();
            let mut a = BalloonColumn::new(s, n);
            let mut b = BalloonColumn::new(s, n);
            let mut direct = BalloonColumn::new(s, n);
            for &x in &xs {
                a.update(CoordinateId(x));
                direct.update(CoordinateId(x));
            }
            for &y in &ys {
                b.update(CoordinateId(y));
                direct.update(CoordinateId(y));
            }
            a.merge(&b).unwrap();
            assert_eq!(a.to_bytes(), direct.to_bytes());
        }
    }

    #[test]
    fn serialization_round_trip() {
        let mut c = BalloonColumn::new(seed(8), 5000);
        for j in (0..5000).step_by(7) {
            c.update(CoordinateId(j));
        }
        let bytes = c.to_bytes();
        assert_eq!(bytes.len(), 4 + 16 * c.len() + 24);
        assert_eq!(BalloonColumn::from_bytes(&bytes).unwrap(), c);
        assert!(BalloonColumn::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn golden_bytes() {
        let s = SketchSeed { column_seed: 1, checksum_seed: 2 };
        let mut c = BalloonColumn::new(s, 6);
        let j = (0..6).find(|&j| c.params().depth(j) == 0).unwrap();
        c.update(CoordinateId(j));
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..4], &[1, 0, 0, 0]);
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), j);
        assert_eq!(&bytes[20..28], &1u64.to_le_bytes());
        assert_eq!(&bytes[28..36], &2u64.to_le_bytes());
        assert_eq!(&bytes[36..44], &6u64.to_le_bytes());
    }

    #[test]
    fn depth_law() {
        // Pr[depth >= i] = 2^-i; 10^6 draws, 3 sigma.
        let p = ColumnParams::new(seed(9), 1 << 40);
        let trials = 1_000_000u64;
        let mut at_least = [0u64; 11];
        for j in 0..trials {
            let d = p.depth(j * 1_000_003) as usize;
            for slot in at_least.iter_mut().take(d.min(10) + 1) {
                *slot += 1;
            }
        }
        for (i, &count) in at_least.iter().enumerate() {
            let q = 0.5f64.powi(i as i32);
            let sigma = (trials as f64 * q * (1.0 - q)).sqrt();
            let dev = (count as f64 - trials as f64 * q).abs();
            assert!(dev <= 3.0 * sigma + 1e-9, "depth >= {i}: {count}");
        }
    }

    /// Per-column success rate and a uniformity chi-square over a fixed
    /// 32-element support. The chi-square is printed, not asserted.
    #[test]
    fn sample_success_rate_and_uniformity() {
        const TRIALS: u64 = 20_000;
        let support: Vec<u64> = (0..32).map(|i| i * 977 + 5).collect();
        let mut hits = [0u64; 32];
        let mut good = 0;
        for t in 0..TRIALS {
            let mut c = BalloonColumn::new(seed(10_000 + t), 1 << 20);
            for &j in &support {
                c.update(CoordinateId(j));
            }
            if let Sample::Good(j) = c.sample() {
                good += 1;
                hits[support.iter().position(|&x| x == j.0).unwrap()] += 1;
            }
        }
        let p = good as f64 / TRIALS as f64;
        let expect = good as f64 / 32.0;
        let chi2: f64 = hits.iter().map(|&h| (h as f64 - expect).powi(2) / expect).sum();
        println!("success rate {p:.4}, chi-square {chi2:.1} on 31 degrees of freedom");
        assert!(p >= 0.75, "success rate {p}");
    }
}
