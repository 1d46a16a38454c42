use crate::edge::CoordinateId;
use crate::hash::hash64;

/// One `(alpha, gamma)` XOR accumulator pair over F2.
///
/// `alpha` is the XOR of member coordinate ids, `gamma` the XOR of their
/// checksums. A bucket holding exactly one coordinate `j` reads `(j, γ(j))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SketchBucket {
    pub alpha: u64,
    pub gamma: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketState {
    Empty,
    Good(CoordinateId),
    Bad,
}

/// The checksum hash `γ`, truncated to the checksum width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Checksum {
    seed: u64,
    mask: u64,
}

impl Checksum {
    pub fn new(seed: u64, width: u32) -> Self {
        let mask = if width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
        Checksum { seed, mask }
    }

    #[inline]
    pub fn of(&self, j: u64) -> u64 {
        hash64(self.seed, j) & self.mask
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn width(&self) -> u32 {
        64 - self.mask.leading_zeros()
    }
}

impl SketchBucket {
    pub const EMPTY: SketchBucket = SketchBucket { alpha: 0, gamma: 0 };

    #[inline]
    pub fn toggle(&mut self, j: u64, checksum: &Checksum) {
        self.alpha ^= j;
        self.gamma ^= checksum.of(j);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &SketchBucket) {
        self.alpha ^= other.alpha;
        self.gamma ^= other.gamma;
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.alpha == 0 && self.gamma == 0
    }

    #[inline]
    pub fn state(&self, checksum: &Checksum) -> BucketState {
        if self.is_empty() {
            BucketState::Empty
        } else if self.gamma == checksum.of(self.alpha) {
            BucketState::Good(CoordinateId(self.alpha))
        } else {
            BucketState::Bad
        }
    }
}

/// Functional form of [`SketchBucket::toggle`].
pub fn bucket_toggle(b: SketchBucket, j: CoordinateId, checksum: &Checksum) -> SketchBucket {
    let mut out = b;
    out.toggle(j.0, checksum);
    out
}

pub fn bucket_state(b: &SketchBucket, checksum: &Checksum) -> BucketState {
    b.state(checksum)
}
