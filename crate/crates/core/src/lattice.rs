//! Multi-indices on ℤᵈ and Følner boxes.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A point of the integer lattice ℤᵈ.
///
/// Ordering is lexicographic, which gives deterministic iteration order for
/// every sparse container keyed by multi-indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(SmallVec<[i64; 4]>);

/// The three lattice norms used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeNorm {
    L1,
    L2,
    Max,
}

impl MultiIndex {
    pub fn new(entries: impl Into<Vec<i64>>) -> Self {
        let entries: Vec<i64> = entries.into();
        assert!(!entries.is_empty(), "multi-index must have dimension >= 1");
        MultiIndex(SmallVec::from_vec(entries))
    }

    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "multi-index must have dimension >= 1");
        MultiIndex(SmallVec::from_elem(0, d))
    }

    /// The unit vector e_j, with `j` counted from 1.
    pub fn unit(d: usize, j: usize) -> Self {
        assert!((1..=d).contains(&j), "unit vector index out of range");
        let mut m = Self::zero(d);
        m.0[j - 1] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() == d {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim(),
            })
        }
    }

    /// Exact ℓ₁ norm.
    pub fn l1(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    /// Exact ℓ∞ norm.
    pub fn linf(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Exact squared Euclidean norm.
    pub fn l2_squared(&self) -> i64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn l2(&self) -> f64 {
        (self.l2_squared() as f64).sqrt()
    }

    pub fn norm(&self, p: LatticeNorm) -> f64 {
        match p {
            LatticeNorm::L1 => self.l1() as f64,
            LatticeNorm::L2 => self.l2(),
            LatticeNorm::Max => self.linf() as f64,
        }
    }

    /// Euclidean inner product with a real vector.
    pub fn dot(&self, s: &[f64]) -> f64 {
        self.0.iter().zip(s).map(|(&m, &x)| m as f64 * x).sum()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i64]> for MultiIndex {
    fn from(v: &[i64]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}

impl<const D: usize> From<[i64; D]> for MultiIndex {
    fn from(v: [i64; D]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), rhs.dim());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;
    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), rhs.dim());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(deserializer)?;
        if v.is_empty() {
            return Err(serde::de::Error::custom("empty multi-index"));
        }
        Ok(MultiIndex::new(v))
    }
}

/// The box Z_N = {-N,…,N}ᵈ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FolnerBox {
    pub radius: u32,
    pub dim: usize,
}

impl FolnerBox {
    pub fn new(radius: u32, dim: usize) -> Self {
        assert!(dim >= 1);
        FolnerBox { radius, dim }
    }

    pub fn side(&self) -> u64 {
        2 * self.radius as u64 + 1
    }

    /// |Z_N| = (2N+1)ᵈ.
    pub fn cardinality(&self) -> u64 {
        self.side().pow(self.dim as u32)
    }

    pub fn contains(&self, m: &MultiIndex) -> bool {
        m.dim() == self.dim && m.linf() <= self.radius as i64
    }

    /// Position of `m` in the row-major enumeration of the box (first
    /// coordinate slowest).
    pub fn position(&self, m: &MultiIndex) -> Option<usize> {
        if !self.contains(m) {
            return None;
        }
        let side = self.side() as i64;
        let n = self.radius as i64;
        let mut pos = 0i64;
        for &v in m.entries() {
            pos = pos * side + (v + n);
        }
        Some(pos as usize)
    }

    /// Inverse of [`FolnerBox::position`].
    pub fn index_at(&self, mut pos: usize) -> MultiIndex {
        let side = self.side() as usize;
        let n = self.radius as i64;
        let mut entries = vec![0i64; self.dim];
        for slot in entries.iter_mut().rev() {
            *slot = (pos % side) as i64 - n;
            pos /= side;
        }
        MultiIndex::new(entries)
    }

    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.cardinality() as usize).map(move |p| self.index_at(p))
    }

    /// |Z_N ∩ (Z_N + k)| / |Z_N| as an exact rational.
    pub fn overlap(&self, k: &MultiIndex) -> Result<Ratio<u64>> {
        k.check_dim(self.dim)?;
        let side = self.side();
        let num = k
            .entries()
            .iter()
            .map(|&v| side.saturating_sub(v.unsigned_abs()))
            .product::<u64>();
        Ok(Ratio::new(num, self.cardinality()))
    }
}

/// Følner overlap ∏_j max(0, 2N+1-|k_j|)/(2N+1), exactly.
pub fn folner_overlap(n: u32, k: &MultiIndex) -> Ratio<u64> {
    FolnerBox::new(n, k.dim())
        .overlap(k)
        .expect("box dimension taken from k")
}

/// [`folner_overlap`] rounded to `f64`.
pub fn folner_overlap_f64(n: u32, k: &MultiIndex) -> f64 {
    let r = folner_overlap(n, k);
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let z = MultiIndex::zero(3);
        for p in [LatticeNorm::L1, LatticeNorm::L2, LatticeNorm::Max] {
            assert_eq!(z.norm(p), 0.0);
        }
        let m = MultiIndex::from([3, -4]);
        assert_eq!(m.norm(LatticeNorm::L2), 5.0);
        assert_eq!(m.norm(LatticeNorm::L1), 7.0);
        assert_eq!(m.norm(LatticeNorm::Max), 4.0);
    }

    /// Brute-force count of Z_N ∩ (Z_N + k).
    fn overlap_by_enumeration(n: u32, k: &MultiIndex) -> Ratio<u64> {
        let b = FolnerBox::new(n, k.dim());
        let hits = b.iter().filter(|m| b.contains(&(m - k))).count() as u64;
        Ratio::new(hits, b.cardinality())
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(folner_overlap(1, &MultiIndex::from([1])), Ratio::new(2, 3));
        assert_eq!(folner_overlap(1, &MultiIndex::from([1, 1])), Ratio::new(4, 9));
        for n in 0..4 {
            assert_eq!(folner_overlap(n, &MultiIndex::zero(2)), Ratio::from_integer(1));
        }
    }

    #[test]
    fn overlap_matches_enumeration() {
        for n in 0..4u32 {
            for k1 in -9..=9 {
                for k2 in -4..=4 {
                    let k = MultiIndex::from([k1, k2]);
                    assert_eq!(folner_overlap(n, &k), overlap_by_enumeration(n, &k), "N={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn overlap_dimension_mismatch() {
        let b = FolnerBox::new(2, 3);
        assert!(matches!(
            b.overlap(&MultiIndex::from([1, 2])),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn position_round_trip() {
        let b = FolnerBox::new(2, 3);
        for (p, m) in b.iter().enumerate() {
            assert_eq!(b.position(&m), Some(p));
        }
        assert_eq!(b.position(&MultiIndex::from([3, 0, 0])), None);
    }

    #[test]
    fn json_is_a_plain_array() {
        let m = MultiIndex::from([1, -2, 3]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[1,-2,3]");
        let back: MultiIndex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MultiIndex>("[]").is_err());
    }
}
