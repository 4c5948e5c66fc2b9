use std::collections::HashMap;

use crate::dist::{Dist, Rational};
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::{distance, MetricSpace, SpaceFlags, SpaceKind};

/// A finite metric space given by an explicit distance matrix.
#[derive(Debug, Clone)]
pub struct MatrixSpace {
    tag: String,
    points: Vec<PointRef>,
    index: HashMap<PointRef, usize>,
    matrix: Vec<Dist>,
    measure: Option<Vec<Rational>>,
    flags: SpaceFlags,
}

impl MatrixSpace {
    /// Builds a space on `points` from a row-major `n × n` matrix.
    ///
    /// Checks symmetry, a zero diagonal and positive off-diagonal entries;
    /// the triangle inequality is left to [`crate::spaces::find_triangle_violation`].
    pub fn new(points: Vec<PointRef>, matrix: Vec<Dist>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptyWindow);
        }
        if matrix.len() != n * n {
            return Err(Error::LengthMismatch(matrix.len(), n * n));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| points[i]);
        let sorted: Vec<PointRef> = order.iter().map(|&i| points[i]).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("duplicate point".into()));
        }
        let mut m = vec![Dist::ZERO; n * n];
        for (ni, &oi) in order.iter().enumerate() {
            for (nj, &oj) in order.iter().enumerate() {
                m[ni * n + nj] = matrix[oi * n + oj];
            }
        }
        for i in 0..n {
            if !m[i * n + i].is_zero() {
                return Err(Error::InvalidParams(format!("nonzero diagonal at {}", sorted[i])));
            }
            for j in 0..n {
                if m[i * n + j] != m[j * n + i] {
                    return Err(Error::InvalidParams(format!("asymmetric entry at ({}, {})", sorted[i], sorted[j])));
                }
                if i != j && !m[i * n + j].is_positive() {
                    return Err(Error::InvalidParams(format!(
                        "nonpositive distance between distinct points {} and {}",
                        sorted[i], sorted[j]
                    )));
                }
            }
        }
        let index = sorted.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        Ok(MatrixSpace {
            tag: "finite-matrix".into(),
            points: sorted,
            index,
            matrix: m,
            measure: None,
            flags: SpaceFlags { finite: true, bounded_components: true, ..SpaceFlags::default() },
        })
    }

    /// Points `0..n` with the given matrix.
    pub fn from_rows(rows: Vec<Vec<Dist>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParams("distance matrix is not square".into()));
        }
        let points = (0..n as i64).map(PointRef::Int).collect();
        Self::new(points, rows.into_iter().flatten().collect())
    }

    /// The subspace of `space` on `points` with the induced metric.
    pub fn induced(space: &dyn MetricSpace, points: &[PointRef]) -> Result<Self> {
        let n = points.len();
        let mut matrix = vec![Dist::ZERO; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(space, points[i], points[j])?;
                matrix[i * n + j] = d;
                matrix[j * n + i] = d;
            }
        }
        let mut out = Self::new(points.to_vec(), matrix)?;
        out.tag = format!("{}-subspace", space.tag());
        if space.has_measure() {
            let m = out.points.iter().map(|&p| space.measure(p).ok_or(Error::UnknownPoint(p))).collect::<Result<Vec<_>>>()?;
            out.measure = Some(m);
        }
        Ok(out)
    }

    pub fn with_measure(mut self, measure: Vec<Rational>) -> Result<Self> {
        if measure.len() != self.points.len() {
            return Err(Error::LengthMismatch(measure.len(), self.points.len()));
        }
        if measure.iter().any(|m| *m.numer() <= 0) {
            return Err(Error::InvalidParams("measure must be positive".into()));
        }
        self.measure = Some(measure);
        Ok(self)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Marks the space ultrametric after verifying the strong triangle inequality on all triples.
    pub fn certify_ultrametric(mut self) -> Result<Self> {
        if crate::spaces::find_triangle_violation(&self, &self.points.clone(), true)?.is_none() {
            self.flags.ultrametric = true;
        }
        Ok(self)
    }

    pub fn points(&self) -> &[PointRef] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> Dist {
        self.matrix.iter().fold(Dist::ZERO, |acc, d| acc.max(*d))
    }

    fn idx(&self, p: PointRef) -> Result<usize> {
        self.index.get(&p).copied().ok_or(Error::UnknownPoint(p))
    }
}

impl MetricSpace for MatrixSpace {
    fn tag(&self) -> &str {
        &self.tag
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::FiniteMatrix
    }

    fn flags(&self) -> &SpaceFlags {
        &self.flags
    }

    fn basepoint(&self) -> PointRef {
        self.points[0]
    }

    fn check_point(&self, p: PointRef) -> Result<()> {
        self.idx(p).map(|_| ())
    }

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist> {
        let n = self.points.len();
        Ok(self.matrix[self.idx(a)? * n + self.idx(b)?])
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let n = self.points.len();
        let i = self.idx(x)?;
        Ok((0..n)
            .filter(|&j| j != i && self.matrix[i * n + j] <= *delta)
            .map(|j| self.points[j])
            .collect())
    }

    fn measure(&self, p: PointRef) -> Option<Rational> {
        let i = self.index.get(&p)?;
        self.measure.as_ref().map(|m| m[*i])
    }

    fn has_measure(&self) -> bool {
        self.measure.is_some()
    }

    fn window(&self, _depth: Option<u64>) -> Result<Vec<PointRef>> {
        Ok(self.points.clone())
    }

    fn growth_basepoints(&self, _l_max: u64) -> Vec<PointRef> {
        self.points.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: i64) -> MatrixSpace {
        let rows = (0..n).map(|i| (0..n).map(|j| Dist::int((i - j).abs())).collect()).collect();
        MatrixSpace::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_bad_matrices() {
        let asym = vec![vec![Dist::int(0), Dist::int(1)], vec![Dist::int(2), Dist::int(0)]];
        assert!(MatrixSpace::from_rows(asym).is_err());
        let zero = vec![vec![Dist::int(0), Dist::int(0)], vec![Dist::int(0), Dist::int(0)]];
        assert!(MatrixSpace::from_rows(zero).is_err());
    }

    #[test]
    fn neighbors_and_distance() {
        let s = line(5);
        assert_eq!(s.distance(PointRef::Int(0), PointRef::Int(4)).unwrap(), Dist::int(4));
        let nb = crate::spaces::delta_neighbors(&s, PointRef::Int(2), &Dist::int(1)).unwrap();
        assert_eq!(nb, vec![PointRef::Int(1), PointRef::Int(3)]);
        assert!(s.check_point(PointRef::Int(9)).is_err());
    }

    #[test]
    fn ultrametric_certificate() {
        // two clusters at distance 3, inner distance 1
        let d = |i: usize, j: usize| {
            if i == j {
                Dist::int(0)
            } else if i / 2 == j / 2 {
                Dist::int(1)
            } else {
                Dist::int(3)
            }
        };
        let rows = (0..4).map(|i| (0..4).map(|j| d(i, j)).collect()).collect();
        let s = MatrixSpace::from_rows(rows).unwrap().certify_ultrametric().unwrap();
        assert!(s.flags().ultrametric);
        assert!(!line(3).certify_ultrametric().unwrap().flags().ultrametric);
    }
}
