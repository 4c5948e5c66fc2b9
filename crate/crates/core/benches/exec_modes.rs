use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use coarse_entropy::entropy::{separated_count, Caps};
use coarse_entropy::extremal::{min_dense, OrbitItems};
use coarse_entropy::geometry::bounded_geometry_evidence;
use coarse_entropy::paths::enumerate_orbits;
use coarse_entropy::spaces::catalog::{BranchTree, BranchTreeParams, IntegerLine};
use coarse_entropy::{Dist, Exec, PointRef};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn orbit_enumeration(c: &mut Criterion) {
    let line = IntegerLine::with_window(1000).unwrap();
    let mut g = c.benchmark_group("enumerate_orbits");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 9), &exec, |b, &exec| {
            b.iter(|| enumerate_orbits(&line, PointRef::Int(0), black_box(9), &Dist::int(1), 1_000_000, exec).unwrap())
        });
    }
    g.finish();
}

fn orbit_distances(c: &mut Criterion) {
    let line = IntegerLine::with_window(1000).unwrap();
    let orbits = enumerate_orbits(&line, PointRef::Int(0), 6, &Dist::int(1), 1_000_000, Exec::Sequential).unwrap();
    let mut g = c.benchmark_group("greedy_cover");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, orbits.len()), &exec, |b, &exec| {
            b.iter(|| {
                let items = OrbitItems::new(&line, &orbits, exec).unwrap();
                min_dense(&items, &Dist::int(3), 0, exec).unwrap()
            })
        });
    }
    g.finish();
}

fn separated_counts(c: &mut Criterion) {
    let line = IntegerLine::with_window(1000).unwrap();
    let mut g = c.benchmark_group("separated_count");
    g.sample_size(10);
    for (name, exec) in MODES {
        let caps = Caps { exec, ..Caps::default() };
        g.bench_with_input(BenchmarkId::new(name, 5), &caps, |b, caps| {
            b.iter(|| separated_count(&line, PointRef::Int(0), 5, &Dist::int(1), &Dist::int(2), caps).unwrap())
        });
    }
    g.finish();
}

fn bounded_geometry(c: &mut Criterion) {
    let tree = BranchTree::new(BranchTreeParams::default()).unwrap();
    let depths: Vec<u64> = (1..=8).collect();
    let mut g = c.benchmark_group("bounded_geometry_evidence");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 8), &exec, |b, &exec| {
            b.iter(|| bounded_geometry_evidence(&tree, &Dist::int(2), &Dist::int(2), &depths, 200, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, orbit_enumeration, orbit_distances, separated_counts, bounded_geometry);
criterion_main!(benches);
