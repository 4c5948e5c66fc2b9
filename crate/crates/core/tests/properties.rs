use proptest::prelude::*;

use coarse_entropy::dist::{format_rational, parse_rational};
use coarse_entropy::entropy::{growth_series, separated_count, dense_count, Caps, GrowthMeasure};
use coarse_entropy::extremal::{check_dense, check_separated, greedy_net, max_separated, min_dense, Certificate, MatrixItems, MetricItems};
use coarse_entropy::paths::{count_orbits, enumerate_orbits, orbit_distance_points, validate_path};
use coarse_entropy::spaces::catalog::IntegerLine;
use coarse_entropy::spaces::{distance, MatrixSpace};
use coarse_entropy::{Dist, Exec, PointRef, Rational};

/// Shortest-path closure of a random weighted complete graph.
fn metric(n: usize, weights: &[i64]) -> Vec<i64> {
    let mut m = vec![0i64; n * n];
    let mut w = weights.iter().cycle();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = *w.next().unwrap();
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = m[i * n + j].min(m[i * n + k] + m[k * n + j]);
            }
        }
    }
    m
}

fn items(n: usize, m: &[i64]) -> MatrixItems {
    MatrixItems::new(n, m.iter().map(|&v| Dist::int(v)).collect()).unwrap()
}

fn instance() -> impl Strategy<Value = (usize, Vec<i64>, i64)> {
    (1usize..=12, prop::collection::vec(1i64..=10, 1..=66), 1i64..=8)
}

fn brute_force(items: &MatrixItems, r: &Dist) -> (usize, usize) {
    let n = items.len();
    let (mut best_sep, mut best_dense) = (0, n);
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if check_separated(items, &set, r).unwrap() {
            best_sep = best_sep.max(set.len());
        }
        if check_dense(items, &set, r).unwrap() {
            best_dense = best_dense.min(set.len());
        }
    }
    (best_sep, best_dense)
}

fn walk(start: i64, steps: &[i64]) -> Vec<PointRef> {
    let mut x = start;
    let mut out = vec![PointRef::Int(x)];
    for s in steps {
        x += s;
        out.push(PointRef::Int(x));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_solvers_match_brute_force((n, w, r) in instance()) {
        let it = items(n, &metric(n, &w));
        let r = Dist::int(r);
        let sep = max_separated(&it, &r, 64, Exec::Sequential).unwrap();
        let cov = min_dense(&it, &r, 64, Exec::Sequential).unwrap();
        prop_assert_eq!(sep.certificate, Certificate::Exact);
        prop_assert_eq!(cov.certificate, Certificate::Exact);
        prop_assert!(check_separated(&it, &sep.selected, &r).unwrap());
        prop_assert!(check_dense(&it, &cov.selected, &r).unwrap());
        prop_assert_eq!((sep.size(), cov.size()), brute_force(&it, &r));
    }

    #[test]
    fn fallbacks_are_feasible_bounds((n, w, r) in instance()) {
        let it = items(n, &metric(n, &w));
        let r = Dist::int(r);
        let exact_sep = max_separated(&it, &r, 64, Exec::Sequential).unwrap();
        let exact_cov = min_dense(&it, &r, 64, Exec::Sequential).unwrap();
        let sep = max_separated(&it, &r, 0, Exec::Sequential).unwrap();
        let cov = min_dense(&it, &r, 0, Exec::Sequential).unwrap();
        prop_assert!(check_separated(&it, &sep.selected, &r).unwrap());
        prop_assert!(check_dense(&it, &cov.selected, &r).unwrap());
        prop_assert!(sep.size() <= exact_sep.size());
        prop_assert!(cov.size() >= exact_cov.size());
    }

    #[test]
    fn exec_modes_agree((n, w, r) in instance()) {
        let it = items(n, &metric(n, &w));
        let r = Dist::int(r);
        let a = max_separated(&it, &r, 64, Exec::Sequential).unwrap();
        let b = max_separated(&it, &r, 64, Exec::Parallel).unwrap();
        prop_assert_eq!(a.selected, b.selected);
        let a = min_dense(&it, &r, 64, Exec::Sequential).unwrap();
        let b = min_dense(&it, &r, 64, Exec::Parallel).unwrap();
        prop_assert_eq!(a.selected, b.selected);
    }

    #[test]
    fn greedy_net_is_separated_and_dense(points in prop::collection::btree_set(-60i64..60, 1..40), s in 1i64..10) {
        let line = IntegerLine::with_window(100).unwrap();
        let window: Vec<PointRef> = points.iter().map(|&p| PointRef::Int(p)).collect();
        let s = Dist::int(s);
        let net = greedy_net(&line, &window, &s).unwrap();
        prop_assert_eq!(net[0], window[0]);
        for (i, &a) in net.iter().enumerate() {
            for &b in &net[i + 1..] {
                prop_assert!(distance(&line, a, b).unwrap() >= s);
            }
        }
        for &p in &window {
            prop_assert!(net.iter().any(|&z| distance(&line, p, z).unwrap() < s));
        }
    }

    #[test]
    fn rationals_round_trip(p in -10_000i128..10_000, q in 1i128..10_000) {
        let x = Rational::new(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
        let d: Dist = format_rational(&x).parse().unwrap();
        prop_assert_eq!(d, Dist::Exact(x));
    }

    #[test]
    fn line_orbit_counts(n in 0usize..6, delta in 1i64..3) {
        let line = IntegerLine::with_window(100).unwrap();
        let d = Dist::int(delta);
        let count = count_orbits(&line, PointRef::Int(0), n, &d, 1 << 40).unwrap();
        prop_assert_eq!(count, (2 * delta as u128 + 1).pow(n as u32));
        let set = enumerate_orbits(&line, PointRef::Int(0), n, &d, 100_000, Exec::Sequential).unwrap();
        prop_assert_eq!(set.len() as u128, count);
        for path in set.iter() {
            prop_assert!(validate_path(&line, path, &d).unwrap());
        }
        let par = enumerate_orbits(&line, PointRef::Int(0), n, &d, 100_000, Exec::Parallel).unwrap();
        prop_assert_eq!(par, set);
    }

    #[test]
    fn orbit_distance_is_a_metric(
        a in prop::collection::vec(-2i64..=2, 5),
        b in prop::collection::vec(-2i64..=2, 5),
        c in prop::collection::vec(-2i64..=2, 5),
    ) {
        let line = IntegerLine::with_window(100).unwrap();
        let (u, v, w) = (walk(0, &a), walk(0, &b), walk(0, &c));
        let uv = orbit_distance_points(&line, &u, &v).unwrap();
        prop_assert_eq!(uv, orbit_distance_points(&line, &v, &u).unwrap());
        prop_assert_eq!(uv.is_zero(), u == v);
        let uw = orbit_distance_points(&line, &u, &w).unwrap();
        let wv = orbit_distance_points(&line, &w, &v).unwrap();
        prop_assert!(uv <= uw.checked_add(&wv).unwrap());
    }

    #[test]
    fn counts_sandwich_on_the_line(n in 1usize..5, r in 2i64..6) {
        let line = IntegerLine::with_window(100).unwrap();
        let caps = Caps { packing_exact: 90, covering_exact: 90, ..Caps::default() };
        let (d, r) = (Dist::int(1), Dist::int(r));
        let r2 = r.mul_int(2).unwrap();
        let s = separated_count(&line, PointRef::Int(0), n, &d, &r, &caps).unwrap();
        let s2 = separated_count(&line, PointRef::Int(0), n, &d, &r2, &caps).unwrap();
        let c = dense_count(&line, PointRef::Int(0), n, &d, &r, &caps).unwrap();
        if s.certificate == Certificate::Exact && c.certificate == Certificate::Exact {
            prop_assert!(c.count <= s.count);
        }
        if s2.certificate == Certificate::Exact {
            prop_assert!(s2.count <= c.count);
        }
    }

    #[test]
    fn growth_is_monotone(points in prop::collection::btree_set(0i64..30, 2..15), delta in 1i64..4) {
        let line = IntegerLine::with_window(100).unwrap();
        let pts: Vec<PointRef> = points.iter().map(|&p| PointRef::Int(p)).collect();
        let space = MatrixSpace::induced(&line, &pts).unwrap();
        let g = growth_series(&space, pts[0], &Dist::int(delta), 12, GrowthMeasure::Counting, 1000).unwrap();
        prop_assert_eq!(g.values[0], Rational::from_integer(1));
        prop_assert!(g.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
