//! Parallel vs sequential grid evaluation.
//!
//! `cargo bench` runs with the rayon-backed map (default features);
//! `cargo bench --no-default-features` measures the sequential fallback
//! alone.  With the `parallel` feature on, both paths are benched side by
//! side for a direct comparison on the same build.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use deformed_kepler::calculus::nijenhuis_torsion;
use deformed_kepler::grid::{map_slice_seq, GridSpec};
use deformed_kepler::recursion::action_recursion_tensor;
use deformed_kepler::verify::{chart_defaults, run_scan, ScanKind, VerifyOptions};
use deformed_kepler::{Chart, DiffEngine, Point};

fn torsion_points(n_per_axis: usize) -> Vec<Point> {
    let grid = GridSpec::parse(&format!(
        "J1=0.1:1.0:{n_per_axis},J2=0.12:1.02:{n_per_axis}"
    ))
    .unwrap();
    grid.embed(Chart::Action, &chart_defaults(Chart::Action))
        .unwrap()
        .into_iter()
        .map(|c| Point::new(Chart::Action, c).unwrap())
        .collect()
}

fn bench_torsion_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("torsion_grid");
    // finite differences make each point expensive enough to be worth
    // fanning out
    let eng = DiffEngine::finite_difference();
    let tensor = action_recursion_tensor();
    for n in [8usize, 16] {
        let points = torsion_points(n);
        group.bench_with_input(BenchmarkId::new("sequential", n * n), &points, |b, pts| {
            b.iter(|| {
                let res = map_slice_seq(pts, |x| {
                    nijenhuis_torsion(&tensor, x, &eng).unwrap().max_abs()
                });
                black_box(res)
            })
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n * n), &points, |b, pts| {
            b.iter(|| {
                let res = deformed_kepler::grid::map_slice_par(pts, |x| {
                    nijenhuis_torsion(&tensor, x, &eng).unwrap().max_abs()
                });
                black_box(res)
            })
        });
    }
    group.finish();
}

fn bench_qbh_scan(c: &mut Criterion) {
    // end-to-end scan through the dispatched map (parallel when the
    // feature is on)
    let opts = VerifyOptions::default();
    let grid = GridSpec::parse("J1=0.1:1.0:12,J2=0.12:1.02:12").unwrap();
    c.bench_function("qbh_scan_dispatched", |b| {
        b.iter(|| {
            let res = run_scan(ScanKind::Qbh, Chart::Action, &grid, &opts).unwrap();
            black_box(res.rows.len())
        })
    });
}

criterion_group!(benches, bench_torsion_grid, bench_qbh_scan);
criterion_main!(benches);
