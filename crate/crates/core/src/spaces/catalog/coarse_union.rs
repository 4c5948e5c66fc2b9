use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::spaces::finite::MatrixSpace;
use crate::spaces::{MetricSpace, SpaceFlags, SpaceKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseUnionParams {
    /// Distance matrices of the pieces `X_1, X_2, …`.
    pub pieces: Vec<Vec<Vec<Dist>>>,
}

/// Disjoint union of finite pieces `X_1, X_2, …` with
/// `d(x, y) = max(n, m, diam X_n, diam X_m)` for `x ∈ X_n`, `y ∈ X_m`, `n ≠ m`.
///
/// Point `i` of piece `n` is `Pair(n, i)`.
#[derive(Debug, Clone)]
pub struct CoarseUnion {
    pieces: Vec<MatrixSpace>,
    diameters: Vec<Dist>,
    flags: SpaceFlags,
}

impl CoarseUnion {
    pub fn new(params: CoarseUnionParams) -> Result<Self> {
        if params.pieces.is_empty() {
            return Err(Error::InvalidParams("coarse_union: no pieces".into()));
        }
        let pieces = params.pieces.into_iter().map(MatrixSpace::from_rows).collect::<Result<Vec<_>>>()?;
        Self::from_pieces(pieces)
    }

    pub fn from_pieces(pieces: Vec<MatrixSpace>) -> Result<Self> {
        for p in &pieces {
            if !p.diameter().is_finite() {
                return Err(Error::InvalidParams("coarse_union: pieces must be bounded".into()));
            }
            if p.points().iter().any(|q| q.as_int().is_none_or(|v| v < 0)) {
                return Err(Error::InvalidParams("coarse_union: piece points must be 0, 1, 2, …".into()));
            }
        }
        let diameters = pieces.iter().map(|p| p.diameter()).collect();
        Ok(CoarseUnion {
            pieces,
            diameters,
            flags: SpaceFlags { finite: true, bounded_components: true, ..SpaceFlags::default() },
        })
    }

    fn locate(&self, p: PointRef) -> Result<(usize, PointRef)> {
        match p {
            PointRef::Pair(n, i) if n >= 1 && (n as usize) <= self.pieces.len() => {
                let q = PointRef::Int(i as i64);
                self.pieces[n as usize - 1].check_point(q)?;
                Ok((n as usize, q))
            }
            _ => Err(Error::UnknownPoint(p)),
        }
    }
}

impl MetricSpace for CoarseUnion {
    fn tag(&self) -> &str {
        "coarse_union"
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Generated
    }

    fn flags(&self) -> &SpaceFlags {
        &self.flags
    }

    fn basepoint(&self) -> PointRef {
        PointRef::Pair(1, 0)
    }

    fn check_point(&self, p: PointRef) -> Result<()> {
        self.locate(p).map(|_| ())
    }

    fn distance(&self, a: PointRef, b: PointRef) -> Result<Dist> {
        let (n, qa) = self.locate(a)?;
        let (m, qb) = self.locate(b)?;
        if n == m {
            return self.pieces[n - 1].distance(qa, qb);
        }
        Ok(Dist::int(n.max(m) as i64).max(self.diameters[n - 1]).max(self.diameters[m - 1]))
    }

    fn neighbors_within(&self, x: PointRef, delta: &Dist) -> Result<Vec<PointRef>> {
        let mut out = Vec::new();
        for y in self.window(None)? {
            if y != x && self.distance(x, y)? <= *delta {
                out.push(y);
            }
        }
        Ok(out)
    }

    fn window(&self, _depth: Option<u64>) -> Result<Vec<PointRef>> {
        let mut out = Vec::new();
        for (n, p) in self.pieces.iter().enumerate() {
            out.extend(p.points().iter().map(|q| PointRef::Pair(n as i64 + 1, q.as_int().unwrap_or(0) as u64)));
        }
        Ok(out)
    }

    fn growth_basepoints(&self, _l_max: u64) -> Vec<PointRef> {
        self.window(None).unwrap_or_default()
    }
}
