use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dist::{rational_to_f64, Dist, Rational};
use crate::error::{Error, Result};
use crate::paths::{delta_component, Successors};
use crate::point::PointRef;
use crate::spaces::MetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthMeasure {
    /// `V_δ`: cardinalities.
    Counting,
    /// `vol_δ`: the space's atomic measure.
    Measure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupMode {
    /// Vertex-transitive space: the value at one point is the supremum.
    TransitiveExact,
    /// Supremum over the base points examined; a lower bound.
    WindowLowerBound,
}

/// `l ↦ sup_{x0} μ(B_δ(x0, l))` for `l = 0..=l_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub delta: Dist,
    pub basepoint: PointRef,
    pub window: String,
    pub measure: GrowthMeasure,
    #[serde(with = "rational_vec")]
    pub values: Vec<Rational>,
    pub sup_mode: SupMode,
    /// Base points whose balls were measured.
    pub centers: usize,
}

impl GrowthSeries {
    /// `ln` of each value.
    pub fn ln_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| rational_to_f64(v).ln()).collect()
    }

    /// Least-squares slope of `ln value` against `l` over the top half of the window.
    pub fn slope(&self) -> Option<f64> {
        fit_slope(&self.ln_values())
    }
}

mod rational_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::dist::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

/// Least-squares slope of `y[l]` against `l` over `l ≥ ⌈l_max / 2⌉`.
/// Needs at least two points in that range.
pub fn fit_slope(y: &[f64]) -> Option<f64> {
    if y.len() < 3 {
        return None;
    }
    let l_max = y.len() - 1;
    let lo = l_max.div_ceil(2);
    let pts: Vec<(f64, f64)> = (lo..=l_max).map(|l| (l as f64, y[l])).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

const FINITE_CENTER_LIMIT: usize = 512;

/// Growth of step balls around `x` (or, when not vertex-transitive, the
/// largest over the space's candidate base points in the δ-component of `x`).
///
/// Stops early, with fewer than `l_max + 1` values, once a ball would exceed
/// `point_cap` points or leave the budget window; fails only if not even
/// `l = 1` fits.
pub fn growth_series(
    space: &dyn MetricSpace,
    x: PointRef,
    delta: &Dist,
    l_max: usize,
    measure: GrowthMeasure,
    point_cap: usize,
) -> Result<GrowthSeries> {
    space.check_point(x)?;
    if measure == GrowthMeasure::Measure && !space.has_measure() {
        return Err(Error::InvalidParams(format!("space `{}` carries no measure", space.tag())));
    }
    let flags = space.flags();
    let (centers, sup_mode) = if flags.vertex_transitive {
        (vec![x], SupMode::TransitiveExact)
    } else if flags.finite {
        let (comp, _) = delta_component(space, x, delta, usize::MAX)?;
        let mut c = vec![x];
        c.extend(comp.into_iter().filter(|&p| p != x).take(FINITE_CENTER_LIMIT));
        (c, SupMode::WindowLowerBound)
    } else {
        let connected = flags.connected_from.is_some_and(|c| c <= *delta);
        let mut c = vec![x];
        if connected {
            c.extend(space.growth_basepoints(l_max as u64).into_iter().filter(|&p| p != x));
        }
        (c, SupMode::WindowLowerBound)
    };
    // running maximum over the centers that reached each radius
    let mut values: Vec<Rational> = Vec::new();
    for &c in &centers {
        let series = match ball_series(space, c, delta, l_max, measure, point_cap) {
            Ok(s) => s,
            Err(Error::Budget(_)) if c != x => continue,
            Err(e) => return Err(e),
        };
        for (l, v) in series.into_iter().enumerate() {
            match values.get_mut(l) {
                Some(cur) if v > *cur => *cur = v,
                Some(_) => {}
                None => values.push(v),
            }
        }
    }
    for l in 1..values.len() {
        if values[l] < values[l - 1] {
            values[l] = values[l - 1];
        }
    }
    if values.len() < 2 && l_max >= 1 {
        return Err(Error::Budget(format!("step ball of radius 1 exceeds {point_cap} points")));
    }
    Ok(GrowthSeries {
        delta: *delta,
        basepoint: x,
        window: format!("l <= {}, {} base point(s), at most {point_cap} points per ball", values.len() - 1, centers.len()),
        measure,
        values,
        sup_mode,
        centers: centers.len(),
    })
}

/// `μ(B_δ(c, l))` for `l = 0, 1, …` until `l_max` or the point cap.
fn ball_series(
    space: &dyn MetricSpace,
    c: PointRef,
    delta: &Dist,
    l_max: usize,
    measure: GrowthMeasure,
    point_cap: usize,
) -> Result<Vec<Rational>> {
    let succ = Successors::new(space, *delta)?;
    let weight = |p: PointRef| -> Result<Rational> {
        match measure {
            GrowthMeasure::Counting => Ok(Rational::from_integer(1)),
            GrowthMeasure::Measure => space.measure(p).ok_or(Error::UnknownPoint(p)),
        }
    };
    let mut seen = BTreeSet::from([c]);
    let mut frontier = vec![c];
    let mut acc = weight(c)?;
    let mut out = vec![acc];
    for _ in 0..l_max {
        let mut next = Vec::new();
        for &y in &frontier {
            let nb = match succ.get(y) {
                Ok(nb) => nb,
                Err(Error::Budget(_)) => return Ok(out),
                Err(e) => return Err(e),
            };
            for &z in nb.iter() {
                if seen.insert(z) {
                    next.push(z);
                }
            }
        }
        if seen.len() > point_cap {
            break;
        }
        for &z in &next {
            acc = num_traits::CheckedAdd::checked_add(&acc, &weight(z)?).ok_or(Error::Overflow)?;
        }
        out.push(acc);
        frontier = next;
    }
    Ok(out)
}
