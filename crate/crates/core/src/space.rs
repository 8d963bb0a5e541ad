//! Integer points and finite axis-aligned windows of `Z^n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `Z^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Point(coords.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[i64; N]> for Point {
    fn from(v: [i64; N]) -> Self {
        Point(v.to_vec())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct WindowBounds {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

/// Inclusive box `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]` in `Z^n`.
///
/// Points are enumerated row-major with the last axis varying fastest, so
/// the point index of `x` is `sum_i (x_i - lo_i) * stride_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WindowBounds", into = "WindowBounds")]
pub struct HypercubeWindow {
    lo: Vec<i64>,
    hi: Vec<i64>,
    strides: Vec<usize>,
    len: usize,
}

impl TryFrom<WindowBounds> for HypercubeWindow {
    type Error = Error;
    fn try_from(b: WindowBounds) -> Result<Self> {
        HypercubeWindow::new(b.lo, b.hi)
    }
}

impl From<HypercubeWindow> for WindowBounds {
    fn from(w: HypercubeWindow) -> Self {
        WindowBounds { lo: w.lo, hi: w.hi }
    }
}

/// Largest window we are willing to index; labels are stored as `u32`.
pub const MAX_WINDOW_POINTS: usize = u32::MAX as usize;

impl HypercubeWindow {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidWindow("dimension must be at least 1".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        let n = lo.len();
        let mut strides = vec![0usize; n];
        let mut len: usize = 1;
        for axis in (0..n).rev() {
            if lo[axis] > hi[axis] {
                return Err(Error::InvalidWindow(format!(
                    "axis {axis}: lo {} exceeds hi {}",
                    lo[axis], hi[axis]
                )));
            }
            let side = hi[axis]
                .checked_sub(lo[axis])
                .and_then(|d| d.checked_add(1))
                .and_then(|d| usize::try_from(d).ok())
                .ok_or_else(|| Error::Overflow("window side length".into()))?;
            strides[axis] = len;
            len = len
                .checked_mul(side)
                .filter(|&l| l <= MAX_WINDOW_POINTS)
                .ok_or_else(|| Error::Overflow("window point count".into()))?;
        }
        Ok(HypercubeWindow { lo, hi, strides, len })
    }

    /// `[lo, hi]^n`.
    pub fn cube(n: usize, lo: i64, hi: i64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    /// `[-b, b]^n`.
    pub fn centered(n: usize, b: i64) -> Result<Self> {
        Self::cube(n, -b, b)
    }

    /// The window `[0, size - 1]` used to model a finite enumerated set.
    pub fn finite_set(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidWindow("finite set must be non-empty".into()));
        }
        let hi = i64::try_from(size - 1).map_err(|_| Error::Overflow("set size".into()))?;
        Self::new(vec![0], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
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

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&c, (&l, &h))| l <= c && c <= h)
    }

    /// Constant-time point to index map; `None` outside the window.
    #[inline]
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.lo.len() {
            return None;
        }
        let mut idx = 0usize;
        for axis in 0..x.len() {
            let c = x[axis];
            if c < self.lo[axis] || c > self.hi[axis] {
                return None;
            }
            idx += (c - self.lo[axis]) as usize * self.strides[axis];
        }
        Some(idx)
    }

    /// Writes the coordinates of point `idx` into `out`.
    #[inline]
    pub fn point_into(&self, mut idx: usize, out: &mut [i64]) {
        debug_assert!(idx < self.len);
        for axis in 0..self.lo.len() {
            let q = idx / self.strides[axis];
            idx -= q * self.strides[axis];
            out[axis] = self.lo[axis] + q as i64;
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let mut out = vec![0; self.dim()];
        self.point_into(idx, &mut out);
        Point(out)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len).map(move |i| self.point(i))
    }

    /// Grows every side by `k * step[axis]`.
    pub fn expand_by(&self, k: usize, step: &[i64]) -> Result<Self> {
        if step.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: step.len() });
        }
        let k = i64::try_from(k).map_err(|_| Error::Overflow("expansion factor".into()))?;
        let grow = |axis: usize| {
            step[axis]
                .checked_mul(k)
                .ok_or_else(|| Error::Overflow("expansion".into()))
        };
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let g = grow(axis)?;
            lo.push(self.lo[axis].checked_sub(g).ok_or_else(|| Error::Overflow("expansion".into()))?);
            hi.push(self.hi[axis].checked_add(g).ok_or_else(|| Error::Overflow("expansion".into()))?);
        }
        Self::new(lo, hi)
    }

    /// `Y_{+k}`: every side grown by `k`.
    pub fn expand(&self, k: usize) -> Result<Self> {
        self.expand_by(k, &vec![1; self.dim()])
    }

    pub fn is_subwindow_of(&self, other: &HypercubeWindow) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|a| other.lo[a] <= self.lo[a] && self.hi[a] <= other.hi[a])
    }

    /// True for windows of the form `[-b, b]^n`.
    pub fn is_centered_cube(&self) -> bool {
        let b = self.hi[0];
        self.lo.iter().all(|&l| l == -b) && self.hi.iter().all(|&h| h == b)
    }

    /// Index of every point of `sub` inside `self`, in `sub`'s enumeration order.
    pub fn embed(&self, sub: &HypercubeWindow) -> Result<Vec<usize>> {
        if !sub.is_subwindow_of(self) {
            return Err(Error::InvalidWindow("sub-window is not contained in the window".into()));
        }
        let mut buf = vec![0; self.dim()];
        Ok((0..sub.len())
            .map(|i| {
                sub.point_into(i, &mut buf);
                self.index_of(&buf).expect("contained")
            })
            .collect())
    }

    /// Point indices ordered the way a 2-D grid is read off a page: the last
    /// axis descending (top row first), the remaining axes ascending.
    pub fn display_order(&self) -> Vec<usize> {
        let n = self.dim();
        let mut idx: Vec<usize> = (0..self.len).collect();
        idx.sort_by_key(|&i| {
            let p = self.point(i);
            let mut key = Vec::with_capacity(n);
            key.push(-p.0[n - 1]);
            key.extend_from_slice(&p.0[..n - 1]);
            key
        });
        idx
    }
}

impl fmt::Display for HypercubeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for axis in 0..self.dim() {
            if axis > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{},{}]", self.lo[axis], self.hi[axis])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let w = HypercubeWindow::new(vec![-1, 2, 0], vec![1, 4, 3]).unwrap();
        assert_eq!(w.len(), 3 * 3 * 4);
        for i in 0..w.len() {
            let p = w.point(i);
            assert_eq!(w.index_of(&p.0), Some(i));
        }
        assert_eq!(w.index_of(&[2, 2, 0]), None);
        assert_eq!(w.index_of(&[0, 2]), None);
    }

    #[test]
    fn row_major_last_axis_fastest() {
        let w = HypercubeWindow::centered(2, 1).unwrap();
        assert_eq!(w.point(0), Point::from([-1, -1]));
        assert_eq!(w.point(1), Point::from([-1, 0]));
        assert_eq!(w.point(3), Point::from([0, -1]));
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(HypercubeWindow::new(vec![1], vec![0]).is_err());
        assert!(HypercubeWindow::new(vec![], vec![]).is_err());
        assert!(HypercubeWindow::new(vec![0, 0], vec![1]).is_err());
        assert!(HypercubeWindow::new(vec![i64::MIN], vec![i64::MAX]).is_err());
    }

    #[test]
    fn expansion_and_embedding() {
        let y = HypercubeWindow::centered(2, 1).unwrap();
        let y2 = y.expand(1).unwrap();
        assert_eq!(y2, HypercubeWindow::centered(2, 2).unwrap());
        assert!(y.is_subwindow_of(&y2));
        let emb = y2.embed(&y).unwrap();
        assert_eq!(emb.len(), 9);
        assert_eq!(y2.point(emb[0]), Point::from([-1, -1]));
        assert!(y2.embed(&HypercubeWindow::centered(2, 3).unwrap()).is_err());
    }

    #[test]
    fn display_order_starts_top_left() {
        let y = HypercubeWindow::centered(2, 1).unwrap();
        let order = y.display_order();
        assert_eq!(y.point(order[0]), Point::from([-1, 1]));
        assert_eq!(y.point(order[1]), Point::from([0, 1]));
        assert_eq!(y.point(order[8]), Point::from([1, -1]));
    }

    #[test]
    fn json_validates_bounds() {
        let w: HypercubeWindow = serde_json::from_str(r#"{"lo":[-1,0],"hi":[1,2]}"#).unwrap();
        assert_eq!(w.len(), 9);
        assert!(serde_json::from_str::<HypercubeWindow>(r#"{"lo":[3],"hi":[1]}"#).is_err());
        assert_eq!(serde_json::to_string(&w).unwrap(), r#"{"lo":[-1,0],"hi":[1,2]}"#);
    }
}
