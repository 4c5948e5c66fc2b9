//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coarse_entropy::entropy::{
    classify, coding_map_check, dense_count, growth_series, obstruct, pingpong_witness, separated_count,
    transfer_orbits, tree_line_arms, Caps, ClassifyConfig, Direction, FiniteMap, GrowthMeasure, Rule, Verdict,
};
use coarse_entropy::extremal::{max_separated, min_dense, Certificate, MatrixItems};
use coarse_entropy::geometry::quasi_geodesic_check;
use coarse_entropy::paths::{orbit_distance_points, validate_path, DeltaPath, OrbitSet};
use coarse_entropy::spaces::catalog::{
    make_example, BranchTree, BranchTreeParams, IntegerLine, LogLine, PrimeCycle, RegularTree, TreeLine,
    TreeLineParams, UltrametricProduct,
};
use coarse_entropy::spaces::finite::MatrixSpace;
use coarse_entropy::spaces::{ball, MeasuredSpaceHandle, MetricSpace};
use coarse_entropy::{Dist, Exec, PointRef, Rational};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

const RATE_TOLERANCE: f64 = 1e-9;
const SLOPE_TOLERANCE: f64 = 0.05;
const ZERO_SLOPE: f64 = 0.05;

fn ultrametric_counts_are_one() -> Check {
    let s = ok(UltrametricProduct::with_window(24))?;
    let caps = Caps::default();
    let mut checked = 0;
    for delta in [1i64, 2, 4] {
        let d = Dist::int(delta);
        let radii = [ok(Dist::ratio(2 * delta as i128 + 1, 2))?, Dist::int(delta + 1), Dist::int(2 * delta), Dist::int(4 * delta)];
        for r in radii {
            for n in 0..=6 {
                let p = ok(separated_count(&s, s.basepoint(), n, &d, &r, &caps))?;
                ensure!(p.count == 1 && p.certificate == Certificate::Exact, "δ = {d}, R = {r}, n = {n}: count {}", p.count);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (δ, R, n) triples, all counts exactly 1"))
}

fn ultrametric_ball_sizes() -> Check {
    let s = ok(UltrametricProduct::with_window(16))?;
    for n in 0..=12u32 {
        let b = ok(ball(&s, s.basepoint(), &Dist::int(n as i64)))?;
        ensure!(b.len() == 1 << n, "|B(0, {n})| = {}", b.len());
    }
    Ok("|B(0, n)| = 2^n for n ≤ 12".into())
}

fn line_dense_bound() -> Check {
    let s = ok(IntegerLine::with_window(100))?;
    let caps = Caps::default();
    let mut out = Vec::new();
    for n in [3usize, 6, 9, 12] {
        let p = ok(dense_count(&s, PointRef::Int(0), n, &Dist::int(1), &Dist::int(4), &caps))?;
        let bound = 7u64.pow(n as u32 / 3 + 1);
        ensure!(p.count <= bound, "n = {n}: r = {} > {bound}", p.count);
        out.push(format!("n={n}: {} ({:?})", p.count, p.certificate));
    }
    Ok(out.join(", "))
}

fn tree_line_witness() -> Check {
    let s = ok(TreeLine::new(TreeLineParams { window: 1 << 17, base: 4, schedule: None }))?;
    let (base, arms) = ok(tree_line_arms(&s, 4, 4))?;
    let x8 = s.root(8).ok_or("x_8 outside window")?;
    let mut out = Vec::new();
    for p in 1..=3usize {
        let fam = ok(pingpong_witness(&s, PointRef::Int(0), &base, &arms, p, &Dist::int(4)))?;
        let size = fam.size().ok_or("family size overflows")?;
        ensure!(size == 16u64.pow(p as u32), "p = {p}: {size} members");
        ensure!(ok(fam.verify_separated(&s, size, Exec::default()))?, "p = {p}: family is not 4-separated");
        let len = (x8 as f64 / 4.0).ceil() + 2.0 * p as f64 * (8.0f64 / 4.0).ceil();
        let expected = p as f64 * 4.0 * std::f64::consts::LN_2 / len;
        ensure!(
            (fam.rate_bound() - expected).abs() <= RATE_TOLERANCE,
            "p = {p}: rate {} vs {expected}",
            fam.rate_bound()
        );
        out.push(format!("p={p}: {size} members, rate {:.3e}", fam.rate_bound()));
    }
    Ok(out.join(", "))
}

fn prime_cycle_coding() -> Check {
    let s = ok(PrimeCycle::with_window(1000))?;
    let caps = Caps::default();
    let mut out = Vec::new();
    for n in [2usize, 4, 6] {
        let rep = ok(coding_map_check(&s, PointRef::Int(0), n, &Dist::int(2), &Dist::int(17), &caps))?;
        ensure!(rep.holds, "n = {n}: equal codes at orbit distance ≥ R: {:?}", rep.violation);
        out.push(format!("n={n}: {} paths, {} codes", rep.paths, rep.image_size));
    }
    Ok(out.join(", "))
}

fn branch_tree_measure() -> Check {
    let max_depth = 11;
    let tree = ok(BranchTree::new(BranchTreeParams { max_depth, measured: true }))?;
    let tree = Arc::new(tree);
    let m = ok(MeasuredSpaceHandle::new(tree.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut vertices = Vec::new();
    for depth in 0..=8u32 {
        vertices.push(PointRef::Pair(depth as i64, 0));
        let size = BranchTree::level_size(depth) as u64;
        vertices.push(PointRef::Pair(depth as i64, size - 1));
        vertices.push(PointRef::Pair(depth as i64, rng.gen_range(0..size)));
    }
    let two = Rational::from_integer(2);
    let mut balls = 0;
    for &v in &vertices {
        let PointRef::Pair(depth, _) = v else { unreachable!() };
        let mu = ok(m.measure(v))?;
        let kids = ok(tree.children(v))?;
        ensure!(ok(m.measure_of(&kids))? == mu * two, "children of {v}");
        // subtree to relative depth l
        let mut level = vec![v];
        let mut total = mu;
        for l in 1..=(max_depth as i64 - depth).min(3) {
            level = level.iter().map(|&u| tree.children(u)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?.concat();
            total += ok(m.measure_of(&level))?;
            let want = mu * Rational::from_integer((1i128 << (l + 1)) - 1);
            ensure!(total == want, "T_{v}({l}) has measure {total}, want {want}");
        }
        for l in 0..=(max_depth as i64 - depth).min(3) {
            let b = ok(ball(tree.as_ref(), v, &Dist::int(l)))?;
            let mb = ok(m.measure_of(&b))?;
            ensure!(mb <= Rational::from_integer(1i128 << (l + 2)), "μ(B({v}, {l})) = {mb}");
            balls += 1;
        }
    }
    Ok(format!("{} vertices, {balls} balls", vertices.len()))
}

fn random_path(rng: &mut ChaCha8Rng, start: i64, n: usize, delta: i64) -> Vec<PointRef> {
    let mut x = start;
    let mut out = vec![PointRef::Int(x)];
    for _ in 0..n {
        x += rng.gen_range(-delta..=delta);
        out.push(PointRef::Int(x));
    }
    out
}

fn transfer_preserves_distance() -> Check {
    let s = ok(IntegerLine::with_window(400))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let delta = rng.gen_range(1..=3i64);
        let n = rng.gen_range(1..=8usize);
        let d = Dist::int(delta);
        // isometries of the line: translations and reflections
        let shift = rng.gen_range(-20..=20i64);
        let flip = rng.gen_bool(0.5);
        let apply = move |p: PointRef| {
            let x = p.as_int().unwrap();
            PointRef::Int(if flip { shift - x } else { x + shift })
        };
        let domain: Vec<PointRef> = (-150..=150).map(PointRef::Int).collect();
        let f = FiniteMap::from_fn(&domain, apply);
        let x0 = rng.gen_range(-3..=3i64);
        let paths = [random_path(&mut rng, x0, n, delta), random_path(&mut rng, x0, n, delta)]
            .into_iter()
            .map(|p| DeltaPath::new(&s, p, d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let set = ok(OrbitSet::from_paths(PointRef::Int(x0), n, d, &paths, false))?;
        let out = ok(transfer_orbits(&s, Direction::Forward, &f, &set))?;
        let before = ok(orbit_distance_points(&s, set.path(0), set.path(1)))?;
        let after = ok(orbit_distance_points(&s, out.path(0), out.path(1)))?;
        ensure!(before == after, "trial {trial}: orbit distance {before} became {after}");
        for path in out.iter() {
            for w in path.windows(2) {
                let step = ok(coarse_entropy::spaces::distance(&s, ok(f.apply(w[0]))?, w[1]))?;
                ensure!(step <= d, "trial {trial}: output is not a {d}-pseudoorbit of f");
            }
        }
        let back = ok(transfer_orbits(&s, Direction::Backward, &f, &out))?;
        for path in back.iter() {
            ensure!(ok(validate_path(&s, path, &d))?, "trial {trial}: backward output is not a {d}-path");
        }
    }
    Ok("100 pairs, orbit distance preserved, outputs valid".into())
}

fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> MatrixItems {
    // shortest paths in a random weighted complete graph
    let mut m = vec![0i64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.gen_range(1..=12);
            m[i * n + j] = w;
            m[j * n + i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = m[i * n + j].min(m[i * n + k] + m[k * n + j]);
            }
        }
    }
    MatrixItems::new(n, m.into_iter().map(Dist::int).collect()).unwrap()
}

fn sandwich() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..200 {
        let n = rng.gen_range(1..=20usize);
        let items = random_metric(&mut rng, n);
        let r = Dist::int(rng.gen_range(1..=8));
        let r2 = ok(r.mul_int(2))?;
        let s2 = ok(max_separated(&items, &r2, 64, Exec::Sequential))?;
        let s1 = ok(max_separated(&items, &r, 64, Exec::Sequential))?;
        let c = ok(min_dense(&items, &r, 64, Exec::Sequential))?;
        ensure!(
            [s1.certificate, s2.certificate, c.certificate].iter().all(|&c| c == Certificate::Exact),
            "trial {trial}: solver fell back to a bound"
        );
        ensure!(
            s2.size() <= c.size() && c.size() <= s1.size(),
            "trial {trial}: s(2R) = {}, r(R) = {}, s(R) = {}",
            s2.size(),
            c.size(),
            s1.size()
        );
    }
    Ok("200 instances, s(2R) ≤ r(R) ≤ s(R)".into())
}

fn subspace_monotone() -> Check {
    let line = ok(IntegerLine::with_window(100))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let caps = Caps { packing_exact: 128, ..Caps::default() };
    for trial in 0..50 {
        let mut y: Vec<PointRef> = (0..rng.gen_range(2..=9)).map(|_| PointRef::Int(rng.gen_range(1..=16))).collect();
        y.push(PointRef::Int(0));
        y.sort_unstable();
        y.dedup();
        let x: Vec<PointRef> = y.iter().copied().filter(|&p| p == PointRef::Int(0) || rng.gen_bool(0.6)).collect();
        let delta = Dist::int(rng.gen_range(1..=3));
        let r = Dist::int(rng.gen_range(1..=4));
        let n = rng.gen_range(1..=3usize);
        let sx = ok(MatrixSpace::induced(&line, &x))?;
        let sy = ok(MatrixSpace::induced(&line, &y))?;
        let cx = ok(separated_count(&sx, PointRef::Int(0), n, &delta, &r, &caps))?;
        let cy = ok(separated_count(&sy, PointRef::Int(0), n, &delta, &r, &caps))?;
        ensure!(
            cx.certificate == Certificate::Exact && cy.certificate == Certificate::Exact,
            "trial {trial}: inexact count"
        );
        ensure!(cx.count <= cy.count, "trial {trial}: s_X = {} > s_Y = {}", cx.count, cy.count);
    }
    Ok("50 pairs X ⊆ Y".into())
}

fn quasi_geodesic() -> Check {
    let line = ok(IntegerLine::with_window(1 << 15))?;
    let rep = ok(quasi_geodesic_check(&line, &Dist::int(1), &line.sample_pairs(), 1 << 16, Exec::default()))?;
    ensure!(rep.pass, "integer line fails at δ = 1");
    let log = ok(LogLine::with_window(1 << 21))?;
    let far = [(PointRef::Int(0), PointRef::Int(1 << 20))];
    for delta in 1..=8 {
        let rep = ok(quasi_geodesic_check(&log, &Dist::int(delta), &far, 1 << 16, Exec::default()))?;
        ensure!(!rep.pass, "log line passes at δ = {delta}");
    }
    Ok("integer line passes at δ = 1, log line fails for δ = 1..8".into())
}

fn classifier() -> Check {
    let cfg = ClassifyConfig::default();
    let mut out = Vec::new();

    let u = ok(make_example("ultrametric_product", &serde_json::Value::Null))?;
    let rep = ok(classify(u.as_ref(), &cfg))?;
    ensure!(rep.verdict == Verdict::Zero && rep.certified, "ultrametric_product: {:?}", rep.verdict);
    out.push("ultrametric zero");

    let b = ok(BranchTree::new(BranchTreeParams { max_depth: 10, measured: false }))?;
    let rep = ok(classify(&b, &cfg))?;
    ensure!(
        rep.verdict == Verdict::Infinite && rep.rule == Some(Rule::NotCoarselyBoundedGeometry),
        "branch_tree: {:?} by {:?}",
        rep.verdict,
        rep.rule
    );
    let w = rep.evidence.witness.as_ref().ok_or_else(|| format!("branch_tree: no witness attached: {:?}", rep.evidence.skipped))?;
    ensure!(w.separation_verified, "branch_tree: witness not verified");
    out.push("branch tree infinite with witness");

    let t = ok(RegularTree::with_degree(3, 16))?;
    let g = ok(growth_series(&t, t.basepoint(), &Dist::int(1), 14, GrowthMeasure::Counting, 200_000))?;
    let slope = g.slope().ok_or("regular tree: no slope")?;
    ensure!((slope - std::f64::consts::LN_2).abs() <= SLOPE_TOLERANCE, "regular tree slope {slope}");
    let rep = ok(classify(&t, &cfg))?;
    ensure!(rep.verdict == Verdict::Infinite, "regular tree: {:?}", rep.verdict);
    out.push("3-regular tree infinite");

    let l = ok(IntegerLine::with_window(1000))?;
    let rep = ok(classify(&l, &cfg))?;
    let slope = rep.evidence.slope.ok_or("integer line: no slope")?;
    ensure!(rep.verdict == Verdict::Zero && slope < ZERO_SLOPE, "integer line: {:?}, slope {slope}", rep.verdict);
    out.push("integer line zero");

    let tl = ok(make_example("tree_line", &serde_json::Value::Null))?;
    let pc = ok(make_example("prime_cycle", &serde_json::Value::Null))?;
    let o = obstruct(&ok(classify(tl.as_ref(), &cfg))?, &ok(classify(pc.as_ref(), &cfg))?);
    ensure!(o.obstruction, "tree_line -> prime_cycle: {}", o.statement);
    out.push("tree_line -> prime_cycle obstructed");
    Ok(out.join(", "))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "ultrametric separated counts", budget: Duration::from_secs(10), run: ultrametric_counts_are_one },
        Criterion { id: 2, name: "ultrametric ball sizes", budget: Duration::from_secs(5), run: ultrametric_ball_sizes },
        Criterion { id: 3, name: "integer line dense bound", budget: Duration::from_secs(60), run: line_dense_bound },
        Criterion { id: 4, name: "tree-line ping-pong witness", budget: Duration::from_secs(30), run: tree_line_witness },
        Criterion { id: 5, name: "prime-cycle coding map", budget: Duration::from_secs(120), run: prime_cycle_coding },
        Criterion { id: 6, name: "branch-tree measure", budget: Duration::from_secs(5), run: branch_tree_measure },
        Criterion { id: 7, name: "transfer map isometry", budget: Duration::from_secs(10), run: transfer_preserves_distance },
        Criterion { id: 8, name: "separated/dense sandwich", budget: Duration::from_secs(60), run: sandwich },
        Criterion { id: 9, name: "subspace monotonicity", budget: Duration::from_secs(60), run: subspace_monotone },
        Criterion { id: 10, name: "quasi-geodesic checks", budget: Duration::from_secs(5), run: quasi_geodesic },
        Criterion { id: 11, name: "classification and obstruction", budget: Duration::from_secs(120), run: classifier },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > c.budget => Err(format!("{d}; took {elapsed:.1?}, budget {:?}", c.budget)),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS [{:>2}] {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {} ({elapsed:.2?}): {why}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
