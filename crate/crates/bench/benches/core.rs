use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use robotaxi_core::algorithms::{tree_dp_solve, uckm_solve, vrrp_place};
use robotaxi_core::eval::{mc_cost, tree_exact_cost};
use robotaxi_core::instances::{gen_random_distribution, gen_random_euclidean, gen_random_tree};
use robotaxi_core::matching::matching_distance;
use robotaxi_core::{InstanceBundle, Placement};

fn matching(c: &mut Criterion) {
    let mut g = c.benchmark_group("matching");
    for n in [10, 40, 100] {
        let m = gen_random_euclidean(n, 1).unwrap();
        let k = 2 * n;
        let a = Placement::from_points(n, (0..k).map(|i| (i * 7) % n)).unwrap();
        let b = Placement::from_points(n, (0..k).map(|i| (i * i + 3) % n)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| matching_distance(black_box(&m), &a, &b).unwrap())
        });
    }
    g.finish();
}

fn tree_dp(c: &mut Criterion) {
    let mut g = c.benchmark_group("tree_dp");
    g.sample_size(10);
    for (n, k) in [(50, 10), (100, 20), (200, 40)] {
        let t = gen_random_tree(n, 2).unwrap();
        g.bench_function(format!("n{n}_k{k}"), |bch| {
            bch.iter(|| tree_dp_solve(black_box(&t), k).unwrap())
        });
        let s = Placement::all_at(t.len(), 0, k);
        g.bench_function(format!("exact_n{n}_k{k}"), |bch| {
            bch.iter(|| tree_exact_cost(black_box(&t), &s, k).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let n = 40;
    let b = InstanceBundle::new(
        gen_random_euclidean(n, 3).unwrap(),
        gen_random_distribution(n, 3, 0.3).unwrap(),
        50,
        None,
        None,
    )
    .unwrap();
    let s = vrrp_place(&b.demand, b.k, 3);
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    g.bench_function("n40_k50_m1000", |bch| {
        bch.iter(|| mc_cost(black_box(&b), &s, 1000, 5).unwrap())
    });
    g.finish();
}

fn uckm(c: &mut Criterion) {
    let n = 8;
    let m = gen_random_euclidean(n, 4).unwrap();
    let d = gen_random_distribution(n, 4, 1.0).unwrap();
    let mut g = c.benchmark_group("uckm");
    g.sample_size(10);
    g.bench_function("n8_k6", |bch| {
        bch.iter(|| uckm_solve(black_box(&m), &d, 6, 0.0, Some(Duration::from_secs(5))).unwrap())
    });
    g.finish();
}

criterion_group!(benches, matching, tree_dp, monte_carlo, uckm);
criterion_main!(benches);
