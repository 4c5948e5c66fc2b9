use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{Dist, Rational};
use crate::entropy::Caps;
use crate::error::{Error, Result};
use crate::extremal::greedy_net;
use crate::paths::{enumerate_orbits, orbit_distance_points};
use crate::point::PointRef;
use crate::spaces::{ball, distance, MetricSpace};

/// Outcome of checking the checkpoint coding map `e` on all δ-paths of length `n`.
///
/// `e` sends a path to the net points nearest to its positions `0, q, 2q, …, n`,
/// where the net is a maximal `r`-separated set with `r = R/4` and
/// `q = ⌊r/δ⌋`. If `e(t) = e(t′)` forces `t` and `t′` closer than `R`, then
/// no R-separated set has more members than `e` has values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingReport {
    pub delta: Dist,
    pub radius: Dist,
    pub r: Dist,
    pub q: usize,
    pub n: usize,
    pub net_size: usize,
    pub paths: usize,
    /// Number of distinct codes, an upper bound on `s(n, R, δ, x0)`.
    pub image_size: usize,
    /// `(2Q + Q²)^{n/q}` with `Q = 2q(δ + r) + 1`, as a natural log.
    pub ln_code_bound: f64,
    /// Largest orbit distance seen between two paths with the same code (upper bound).
    pub max_same_code_distance: Dist,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub violation: Option<(Vec<PointRef>, Vec<PointRef>)>,
}

fn quarter(radius: &Dist) -> Dist {
    match radius {
        Dist::Exact(q) => Dist::Exact(q / Rational::from_integer(4)),
        other => Dist::real(other.to_f64() / 4.0),
    }
}

/// Checks that paths sharing a code stay within orbit distance `< R`.
pub fn coding_map_check(
    space: &dyn MetricSpace,
    x0: PointRef,
    n: usize,
    delta: &Dist,
    radius: &Dist,
    caps: &Caps,
) -> Result<CodingReport> {
    let r = quarter(radius);
    let q = match (&r, delta) {
        (Dist::Exact(a), Dist::Exact(b)) => usize::try_from((a / b).floor().to_integer()).map_err(|_| Error::Overflow)?,
        (a, b) => (a.to_f64() / b.to_f64()).floor() as usize,
    };
    if q == 0 {
        return Err(Error::Precondition(format!("need R ≥ 4δ, got R = {radius}, δ = {delta}")));
    }
    if n % q != 0 {
        return Err(Error::Precondition(format!("n = {n} is not a multiple of q = {q}")));
    }
    let orbits = enumerate_orbits(space, x0, n, delta, caps.orbit_cap, caps.exec)?;
    let reach = delta.mul_int(n as u64)?.checked_add(&r)?;
    let mut window = ball(space, x0, &reach)?;
    if window.len() > caps.point_cap {
        return Err(Error::Budget(format!("coding window has {} points, cap {}", window.len(), caps.point_cap)));
    }
    window.retain(|&p| p != x0);
    window.insert(0, x0);
    let net = greedy_net(space, &window, &r)?;

    let mut cell: BTreeMap<PointRef, usize> = BTreeMap::new();
    let mut code_of = |x: PointRef| -> Result<usize> {
        if let Some(&c) = cell.get(&x) {
            return Ok(c);
        }
        let mut best = (Dist::Infinite, 0);
        for (i, &a) in net.iter().enumerate() {
            let d = distance(space, x, a)?;
            if d < best.0 {
                best = (d, i);
            }
        }
        cell.insert(x, best.1);
        Ok(best.1)
    };
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (idx, path) in orbits.iter().enumerate() {
        let code = (0..=n / q).map(|j| code_of(path[j * q])).collect::<Result<Vec<_>>>()?;
        groups.entry(code).or_default().push(idx);
    }

    let mut spread = Dist::ZERO;
    let mut violation = None;
    for members in groups.values() {
        // per-position diameters bound every pairwise orbit distance in the group
        let mut diam = Dist::ZERO;
        for pos in 0..=n {
            let mut pts: Vec<PointRef> = members.iter().map(|&m| orbits.path(m)[pos]).collect();
            pts.sort_unstable();
            pts.dedup();
            for (i, &a) in pts.iter().enumerate() {
                for &b in &pts[i + 1..] {
                    diam = diam.max(distance(space, a, b)?);
                }
            }
        }
        if diam >= *radius {
            diam = Dist::ZERO;
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    let d = orbit_distance_points(space, orbits.path(a), orbits.path(b))?;
                    if d >= *radius && violation.is_none() {
                        violation = Some((orbits.path(a).to_vec(), orbits.path(b).to_vec()));
                    }
                    diam = diam.max(d);
                }
            }
        }
        spread = spread.max(diam);
    }
    let big_q = 2.0 * q as f64 * (delta.to_f64() + r.to_f64()) + 1.0;
    Ok(CodingReport {
        delta: *delta,
        radius: *radius,
        r,
        q,
        n,
        net_size: net.len(),
        paths: orbits.len(),
        image_size: groups.len(),
        ln_code_bound: (n / q) as f64 * (2.0 * big_q + big_q * big_q).ln(),
        max_same_code_distance: spread,
        holds: violation.is_none(),
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::catalog::{IntegerLine, PrimeCycle};

    #[test]
    fn prime_cycle_codes() {
        let s = PrimeCycle::with_window(200).unwrap();
        for n in [2, 4] {
            let rep = coding_map_check(&s, PointRef::Int(0), n, &Dist::int(2), &Dist::int(17), &Caps::default()).unwrap();
            assert_eq!(rep.q, 2);
            assert!(rep.holds);
            assert!(rep.max_same_code_distance < Dist::int(17));
            assert!(rep.image_size <= rep.paths);
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        let s = IntegerLine::with_window(100).unwrap();
        assert!(coding_map_check(&s, PointRef::Int(0), 3, &Dist::int(2), &Dist::int(17), &Caps::default()).is_err());
        assert!(coding_map_check(&s, PointRef::Int(0), 2, &Dist::int(2), &Dist::int(7), &Caps::default()).is_err());
    }
}
