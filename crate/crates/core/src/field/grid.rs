use serde::{Deserialize, Serialize};

use crate::error::{domain, param, Result};

/// An axis-aligned box `{lo_j <= tau_j <= hi_j}` in `Z^d`.
///
/// Points are stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl GridBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() {
            return param("box dimension must be positive");
        }
        if lo.len() != hi.len() {
            return param(format!(
                "box corners have different dimensions ({} vs {})",
                lo.len(),
                hi.len()
            ));
        }
        if let Some(j) = (0..lo.len()).find(|&j| lo[j] > hi[j]) {
            return param(format!("empty box along axis {j}: lo {} > hi {}", lo[j], hi[j]));
        }
        Ok(GridBox { lo, hi })
    }

    /// The cube `{lo <= tau_j <= hi}` in dimension `d`.
    pub fn cube(d: usize, lo: i64, hi: i64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    /// The centered cube `{|tau| <= order}`.
    pub fn centered(d: usize, order: usize) -> Self {
        let r = order as i64;
        GridBox { lo: vec![-r; d], hi: vec![r; d] }
    }

    /// The cube `{|tau - center| <= radius}`.
    pub fn around(center: &[i64], radius: usize) -> Self {
        let r = radius as i64;
        GridBox {
            lo: center.iter().map(|c| c - r).collect(),
            hi: center.iter().map(|c| c + r).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim()).map(|j| self.side(j)).collect()
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|j| self.side(j)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major strides (in storage slots) of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            s[j] = s[j + 1] * self.side(j + 1);
        }
        s
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn contains_box(&self, other: &GridBox) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|j| self.lo[j] <= other.lo[j] && other.hi[j] <= self.hi[j])
    }

    /// Storage slot of `p`, or `None` when `p` is outside the box.
    pub fn offset(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut idx = 0usize;
        for j in 0..self.dim() {
            idx = idx * self.side(j) + (p[j] - self.lo[j]) as usize;
        }
        Some(idx)
    }

    /// Inverse of [`GridBox::offset`].
    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut p = vec![0i64; d];
        for j in (0..d).rev() {
            let n = self.side(j);
            p[j] = self.lo[j] + (idx % n) as i64;
            idx /= n;
        }
        p
    }

    pub fn points(&self) -> Points<'_> {
        Points { bbox: self, next: Some(self.lo.clone()) }
    }

    pub fn translate(&self, v: &[i64]) -> GridBox {
        assert_eq!(v.len(), self.dim(), "translation vector dimension mismatch");
        GridBox {
            lo: self.lo.iter().zip(v).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(v).map(|(a, b)| a + b).collect(),
        }
    }

    /// Grow (or shrink, for negative `by`) every side by `by` on both ends.
    pub fn expand(&self, by: i64) -> Result<GridBox> {
        GridBox::new(
            self.lo.iter().map(|l| l - by).collect(),
            self.hi.iter().map(|h| h + by).collect(),
        )
    }

    /// Minkowski sum `{a + b}`.
    pub fn minkowski(&self, other: &GridBox) -> GridBox {
        assert_eq!(self.dim(), other.dim());
        GridBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a + b).collect(),
        }
    }

    /// Cartesian product box in dimension `d' + d''`.
    pub fn product(&self, other: &GridBox) -> GridBox {
        GridBox {
            lo: self.lo.iter().chain(&other.lo).copied().collect(),
            hi: self.hi.iter().chain(&other.hi).copied().collect(),
        }
    }

    /// Box of points `t - tau` for `t` in `self` and `tau` in `reach`.
    pub fn reach_of(&self, reach: &GridBox) -> GridBox {
        GridBox {
            lo: self.lo.iter().zip(&reach.hi).map(|(a, b)| a - b).collect(),
            hi: self.hi.iter().zip(&reach.lo).map(|(a, b)| a - b).collect(),
        }
    }

    pub(crate) fn require_contains(&self, other: &GridBox, what: &str) -> Result<()> {
        if self.contains_box(other) {
            Ok(())
        } else {
            domain(format!("{what}: {other} is not covered by {self}"))
        }
    }
}

impl std::fmt::Display for GridBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> =
            self.lo.iter().zip(&self.hi).map(|(l, h)| format!("{l}..={h}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Row-major iterator over the points of a box.
pub struct Points<'a> {
    bbox: &'a GridBox,
    next: Option<Vec<i64>>,
}

impl Iterator for Points<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let cur = self.next.take()?;
        let mut nxt = cur.clone();
        let mut j = self.bbox.dim();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            if nxt[j] < self.bbox.hi[j] {
                nxt[j] += 1;
                self.next = Some(nxt);
                break;
            }
            nxt[j] = self.bbox.lo[j];
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_a_bijection() {
        let b = GridBox::new(vec![-1, 2], vec![1, 5]).unwrap();
        assert_eq!(b.len(), 12);
        for (i, p) in b.points().enumerate() {
            assert_eq!(b.offset(&p), Some(i));
            assert_eq!(b.point(i), p);
        }
        assert_eq!(b.points().count(), 12);
        assert_eq!(b.offset(&[2, 2]), None);
    }

    #[test]
    fn rejects_inverted_corners() {
        assert!(GridBox::new(vec![0, 3], vec![1, 2]).is_err());
        assert!(GridBox::new(vec![], vec![]).is_err());
    }

    #[test]
    fn reach_box() {
        let eval = GridBox::new(vec![0], vec![3]).unwrap();
        let taps = GridBox::new(vec![-1], vec![2]).unwrap();
        let r = eval.reach_of(&taps);
        assert_eq!(r.lo(), &[-2]);
        assert_eq!(r.hi(), &[4]);
    }
}
