use criterion::{black_box, criterion_group, criterion_main, Criterion};
use tropceresa::ceresa::{analyze, AnalysisOptions};
use tropceresa::exterior::{induced_action, FilteredAction};
use tropceresa::fixtures::{builtin_graph, builtin_table, builtin_with_lengths};
use tropceresa::lattice::smith_invariants;
use tropceresa::matrix::IntMatrix;
use tropceresa::symplectic::delta_from_q;

fn k4_full(c: &mut Criterion) {
    let curve = builtin_graph("k4").unwrap();
    let table = builtin_table("k4").unwrap();
    let opts = AnalysisOptions::default();
    c.bench_function("k4 report with groups", |b| b.iter(|| analyze(black_box(&curve), &table, &opts).unwrap()));
}

fn tl3_verdict(c: &mut Criterion) {
    let curve = builtin_with_lengths("tl3", &[3, 1, 4, 1, 5, 9, 2, 6, 5]).unwrap();
    let table = builtin_table("tl3").unwrap();
    let opts = AnalysisOptions { groups: false, zharkov: false, ..Default::default() };
    c.bench_function("tl3 verdict", |b| b.iter(|| analyze(black_box(&curve), &table, &opts).unwrap()));
}

fn snf(c: &mut Criterion) {
    let q = IntMatrix::from_i64(&[vec![7, -2, 1, 0], vec![-2, 9, -3, 1], vec![1, -3, 8, -2], vec![0, 1, -2, 6]]);
    let d3 = induced_action(&delta_from_q(&q), 3).unwrap();
    let nilp = d3.sub(&IntMatrix::identity(d3.nrows()));
    c.bench_function("smith form of (d - I) on wedge^3, g = 4", |b| b.iter(|| smith_invariants(black_box(&nilp))));
    c.bench_function("Bbar for g = 4", |b| {
        b.iter(|| FilteredAction::new(black_box(&delta_from_q(&q))).unwrap().bbar_group().unwrap())
    });
}

criterion_group!(benches, k4_full, tl3_verdict, snf);
criterion_main!(benches);
