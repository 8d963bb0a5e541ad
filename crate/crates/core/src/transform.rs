//! Invertible maps of `Z^n` (affine integer pairs) and of finite sets
//! (bijection tables).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::space::Point;

/// Classification of a transform, derived from its data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    /// `A = I`; includes the identity.
    Translation,
    /// `u = 0`, `A` diagonal with entries in {-1, 1}.
    Negation,
    /// `u = 0`, `A` a permutation matrix.
    Permutation,
    /// `u = 0`, `A` in `O_n(Z)` but neither of the above.
    Rotation,
    /// Anything else, including isometries with a nonzero offset.
    General,
    /// Bijection of a finite set.
    Table,
}

/// `x -> A x + u` with `A` unimodular.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineTransform {
    matrix: IntMatrix,
    offset: Vec<i64>,
    translation_only: bool,
}

impl AffineTransform {
    pub fn new(matrix: IntMatrix, offset: Vec<i64>) -> Result<Self> {
        if matrix.dim() != offset.len() {
            return Err(Error::DimensionMismatch { expected: matrix.dim(), got: offset.len() });
        }
        let det = matrix.det();
        if det != 1 && det != -1 {
            return Err(Error::NotUnimodular(det));
        }
        let translation_only = matrix.is_identity();
        Ok(AffineTransform { matrix, offset, translation_only })
    }

    pub fn identity(n: usize) -> Self {
        Self::translation(vec![0; n])
    }

    /// `t'_u`.
    pub fn translation(u: Vec<i64>) -> Self {
        AffineTransform { matrix: IntMatrix::identity(u.len()), offset: u, translation_only: true }
    }

    /// `r'_A`: pure linear part.
    pub fn linear(matrix: IntMatrix) -> Result<Self> {
        let n = matrix.dim();
        Self::new(matrix, vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    pub fn kind(&self) -> TransformKind {
        if self.translation_only {
            return TransformKind::Translation;
        }
        if self.offset.iter().any(|&c| c != 0) {
            return TransformKind::General;
        }
        if self.matrix.is_signed_diagonal() {
            TransformKind::Negation
        } else if self.matrix.is_permutation() {
            TransformKind::Permutation
        } else if self.matrix.is_orthogonal() {
            TransformKind::Rotation
        } else {
            TransformKind::General
        }
    }

    pub fn is_isometry(&self) -> bool {
        self.matrix.is_orthogonal()
    }

    #[inline]
    pub fn apply_into(&self, x: &[i64], out: &mut [i64]) {
        if self.translation_only {
            for ((o, &a), &b) in out.iter_mut().zip(x).zip(&self.offset) {
                *o = a + b;
            }
        } else {
            self.matrix.mul_vec_into(x, out);
            for (o, &b) in out.iter_mut().zip(&self.offset) {
                *o += b;
            }
        }
    }

    /// `(u, A)(u', A') = (u + A u', A A')`.
    pub fn compose(&self, inner: &AffineTransform) -> Result<Self> {
        if self.dim() != inner.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: inner.dim() });
        }
        let mut offset = self.matrix.mul_vec(&inner.offset);
        for (o, &u) in offset.iter_mut().zip(&self.offset) {
            *o += u;
        }
        Self::new(self.matrix.mul(&inner.matrix), offset)
    }

    /// `(u, A)^{-1} = (-A^{-1} u, A^{-1})`.
    pub fn invert(&self) -> Self {
        let inv = self.matrix.inverse().expect("unimodular by construction");
        let offset = inv.mul_vec(&self.offset).into_iter().map(|c| -c).collect();
        let translation_only = self.translation_only;
        AffineTransform { matrix: inv, offset, translation_only }
    }
}

impl fmt::Debug for AffineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Affine(A={:?}, u={:?})", self.matrix, self.offset)
    }
}

/// A bijection of `{0, ..., size-1}` stored with its inverse.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TableTransform {
    forward: Vec<u32>,
    backward: Vec<u32>,
}

impl TableTransform {
    pub fn new(forward: Vec<u32>) -> Result<Self> {
        let size = forward.len();
        if size == 0 {
            return Err(Error::InvalidTable("empty domain".into()));
        }
        let mut backward = vec![u32::MAX; size];
        for (i, &j) in forward.iter().enumerate() {
            let j = j as usize;
            if j >= size {
                return Err(Error::InvalidTable(format!("image {j} outside domain of size {size}")));
            }
            if backward[j] != u32::MAX {
                return Err(Error::InvalidTable(format!("{j} has two preimages")));
            }
            backward[j] = i as u32;
        }
        Ok(TableTransform { forward, backward })
    }

    pub fn identity(size: usize) -> Self {
        let forward: Vec<u32> = (0..size as u32).collect();
        TableTransform { backward: forward.clone(), forward }
    }

    /// Builds a permutation from disjoint cycles over 0-based elements.
    pub fn from_cycles(size: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut forward: Vec<u32> = (0..size as u32).collect();
        let mut touched = vec![false; size];
        for cycle in cycles {
            for (pos, &a) in cycle.iter().enumerate() {
                if a >= size || std::mem::replace(&mut touched[a], true) {
                    return Err(Error::InvalidTable(format!("bad cycle {cycle:?}")));
                }
                forward[a] = cycle[(pos + 1) % cycle.len()] as u32;
            }
        }
        Self::new(forward)
    }

    /// The transposition `f_{a,b}`.
    pub fn transposition(size: usize, a: usize, b: usize) -> Result<Self> {
        Self::from_cycles(size, &[&[a, b]])
    }

    pub fn size(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self) -> &[u32] {
        &self.forward
    }

    pub fn backward(&self) -> &[u32] {
        &self.backward
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.forward[i] as usize
    }

    pub fn compose(&self, inner: &TableTransform) -> Result<Self> {
        if self.size() != inner.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), got: inner.size() });
        }
        Self::new(inner.forward.iter().map(|&i| self.forward[i as usize]).collect())
    }

    pub fn invert(&self) -> Self {
        TableTransform { forward: self.backward.clone(), backward: self.forward.clone() }
    }
}

impl fmt::Debug for TableTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Table({:?})", self.forward)
    }
}

/// Transform families never mix within one generator set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Affine,
    Table,
}

/// An invertible map on `Z^n` or on a finite set.
///
/// Table transforms act on the one-dimensional points `(i)` with
/// `0 <= i < size`, so a finite set is modelled by the window `[0, size-1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Transform {
    Affine(AffineTransform),
    Table(TableTransform),
}

impl Transform {
    pub fn translation(u: impl Into<Vec<i64>>) -> Self {
        Transform::Affine(AffineTransform::translation(u.into()))
    }

    pub fn linear(rows: &[Vec<i64>]) -> Result<Self> {
        Ok(Transform::Affine(AffineTransform::linear(IntMatrix::from_rows(rows)?)?))
    }

    pub fn affine(rows: &[Vec<i64>], u: impl Into<Vec<i64>>) -> Result<Self> {
        Ok(Transform::Affine(AffineTransform::new(IntMatrix::from_rows(rows)?, u.into())?))
    }

    pub fn table(forward: Vec<u32>) -> Result<Self> {
        Ok(Transform::Table(TableTransform::new(forward)?))
    }

    pub fn family(&self) -> Family {
        match self {
            Transform::Affine(_) => Family::Affine,
            Transform::Table(_) => Family::Table,
        }
    }

    /// Point dimension the transform acts on (1 for tables).
    pub fn dim(&self) -> usize {
        match self {
            Transform::Affine(a) => a.dim(),
            Transform::Table(_) => 1,
        }
    }

    pub fn kind(&self) -> TransformKind {
        match self {
            Transform::Affine(a) => a.kind(),
            Transform::Table(_) => TransformKind::Table,
        }
    }

    /// The identity of the same family and dimension.
    pub fn identity_like(&self) -> Transform {
        match self {
            Transform::Affine(a) => Transform::Affine(AffineTransform::identity(a.dim())),
            Transform::Table(t) => Transform::Table(TableTransform::identity(t.size())),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Transform::Affine(a) => a.translation_only && a.offset.iter().all(|&c| c == 0),
            Transform::Table(t) => t.forward.iter().enumerate().all(|(i, &j)| i as u32 == j),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        let mut out = vec![0; x.dim()];
        match self {
            Transform::Affine(a) => a.apply_into(&x.0, &mut out),
            Transform::Table(t) => {
                let i = usize::try_from(x.0[0])
                    .ok()
                    .filter(|&i| i < t.size())
                    .ok_or_else(|| Error::OutOfDomain(x.0.clone()))?;
                out[0] = t.image(i) as i64;
            }
        }
        Ok(Point(out))
    }

    /// Unchecked application for hot loops; tables leave out-of-domain points fixed.
    #[inline]
    pub fn apply_into(&self, x: &[i64], out: &mut [i64]) {
        match self {
            Transform::Affine(a) => a.apply_into(x, out),
            Transform::Table(t) => {
                out[0] = match usize::try_from(x[0]) {
                    Ok(i) if i < t.size() => t.image(i) as i64,
                    _ => x[0],
                };
            }
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Transform) -> Result<Transform> {
        match (self, inner) {
            (Transform::Affine(a), Transform::Affine(b)) => Ok(Transform::Affine(a.compose(b)?)),
            (Transform::Table(a), Transform::Table(b)) => Ok(Transform::Table(a.compose(b)?)),
            _ => Err(Error::FamilyMismatch),
        }
    }

    pub fn invert(&self) -> Transform {
        match self {
            Transform::Affine(a) => Transform::Affine(a.invert()),
            Transform::Table(t) => Transform::Table(t.invert()),
        }
    }

    /// `g ∘ self ∘ g^{-1}`.
    pub fn conjugate_by(&self, g: &Transform) -> Result<Transform> {
        g.compose(self)?.compose(&g.invert())
    }
}

impl From<AffineTransform> for Transform {
    fn from(a: AffineTransform) -> Self {
        Transform::Affine(a)
    }
}

impl From<TableTransform> for Transform {
    fn from(t: TableTransform) -> Self {
        Transform::Table(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap2() -> Transform {
        Transform::linear(&[vec![0, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = Transform::translation(vec![0, 0]);
        assert_eq!(id.apply(&Point::from([3, -2])).unwrap(), Point::from([3, -2]));
        let t11 = Transform::translation(vec![1, 1]);
        assert_eq!(t11.apply(&Point::from([0, 0])).unwrap(), Point::from([1, 1]));
        assert_eq!(swap2().apply(&Point::from([1, 0])).unwrap(), Point::from([0, 1]));
        assert!(matches!(
            t11.apply(&Point::from([1, 2, 3])),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn compose_examples() {
        let a = Transform::translation(vec![1, 0]);
        let b = Transform::translation(vec![0, 1]);
        assert_eq!(a.compose(&b).unwrap(), Transform::translation(vec![1, 1]));
        assert!(swap2().compose(&swap2()).unwrap().is_identity());
        let c = Transform::translation(vec![1, 1]).compose(&swap2()).unwrap();
        assert_eq!(c, Transform::affine(&[vec![0, 1], vec![1, 0]], vec![1, 1]).unwrap());
        assert_eq!(c.kind(), TransformKind::General);
        let t = Transform::table(vec![1, 0]).unwrap();
        assert!(matches!(a.compose(&t), Err(Error::FamilyMismatch)));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(Transform::translation(vec![2, 1]).invert(), Transform::translation(vec![-2, -1]));
        assert!(Transform::translation(vec![0, 0]).invert().is_identity());
        let f = Transform::affine(&[vec![0, 1], vec![1, 0]], vec![1, 1]).unwrap();
        let inv = f.invert();
        assert_eq!(inv, Transform::affine(&[vec![0, 1], vec![1, 0]], vec![-1, -1]).unwrap());
        assert!(inv.compose(&f).unwrap().is_identity());
    }

    #[test]
    fn kinds() {
        assert_eq!(Transform::translation(vec![1]).kind(), TransformKind::Translation);
        assert_eq!(swap2().kind(), TransformKind::Permutation);
        assert_eq!(
            Transform::linear(&[vec![-1, 0], vec![0, 1]]).unwrap().kind(),
            TransformKind::Negation
        );
        assert_eq!(
            Transform::linear(&[vec![0, -1], vec![1, 0]]).unwrap().kind(),
            TransformKind::Rotation
        );
        assert_eq!(
            Transform::linear(&[vec![1, 1], vec![0, 1]]).unwrap().kind(),
            TransformKind::General
        );
        assert!(Transform::linear(&[vec![2, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn tables() {
        let c = TableTransform::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap();
        assert_eq!(c.forward(), &[1, 2, 3, 0]);
        assert_eq!(c.compose(&c.invert()).unwrap(), TableTransform::identity(4));
        assert!(TableTransform::new(vec![0, 0]).is_err());
        assert!(TableTransform::new(vec![0, 5]).is_err());
        let t = Transform::Table(c);
        assert_eq!(t.apply(&Point::from([3])).unwrap(), Point::from([0]));
        assert!(matches!(t.apply(&Point::from([4])), Err(Error::OutOfDomain(_))));
    }
}
