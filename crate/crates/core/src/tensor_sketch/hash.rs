//! Seeded edge hashing.
//!
//! Each sketch row gets its own 64-bit seed derived from the sketch seed and
//! the row index. An edge `(u, v)` is folded into that seed through two rounds
//! of the SplitMix64 finalizer, and the resulting word is mapped onto
//! `[0, w)` with a multiply-high reduction (no modulo bias for small `w`).

use super::NodeId;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for one row. Rows use independent derived seeds.
#[inline]
pub fn row_seed(seed: u64, row: usize) -> u64 {
    mix64(seed.wrapping_add(GOLDEN.wrapping_mul(row as u64 + 1)))
}

#[inline]
fn reduce(h: u64, w: usize) -> usize {
    ((h as u128 * w as u128) >> 64) as usize
}

#[inline]
fn hash_with_row_seed(row_seed: u64, u: NodeId, v: NodeId, w: usize) -> usize {
    let h = mix64(row_seed ^ u.wrapping_mul(GOLDEN));
    let h = mix64(h ^ v.rotate_left(29) ^ 0x2545_f491_4f6c_dd1d);
    reduce(h, w)
}

/// Column of edge `(u, v)` in `row`, for a sketch of width `w`.
pub fn hash_edge(seed: u64, row: usize, u: NodeId, v: NodeId, w: usize) -> usize {
    debug_assert!(w >= 1);
    hash_with_row_seed(row_seed(seed, row), u, v, w)
}

/// The `d` row hashes of a sketch, with row seeds computed once.
#[derive(Debug, Clone)]
pub struct EdgeHasher {
    row_seeds: Vec<u64>,
    width: usize,
}

impl EdgeHasher {
    pub fn new(seed: u64, rows: usize, width: usize) -> Self {
        EdgeHasher {
            row_seeds: (0..rows).map(|r| row_seed(seed, r)).collect(),
            width,
        }
    }

    #[inline]
    pub fn column(&self, row: usize, u: NodeId, v: NodeId) -> usize {
        hash_with_row_seed(self.row_seeds[row], u, v, self.width)
    }

    /// Writes the column for every row into `out` (cleared first).
    #[inline]
    pub fn columns_into(&self, u: NodeId, v: NodeId, out: &mut Vec<usize>) {
        out.clear();
        out.extend(
            self.row_seeds
                .iter()
                .map(|&s| hash_with_row_seed(s, u, v, self.width)),
        );
    }

    pub fn rows(&self) -> usize {
        self.row_seeds.len()
    }
}
