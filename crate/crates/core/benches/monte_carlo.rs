use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use halfpic::cones::{min_isotropic_with, ConeId};
use halfpic::exec::{substream, Execution};
use halfpic::flow::{invariance_probe_with, FlowParams, ProbeOptions};
use halfpic::group_actions::{average_with, Factor};
use halfpic::lambda2::Sign;
use halfpic::sampling::random_unit_bianchi;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        v.push(("parallel", Execution::Parallel));
    }
    v
}

fn averaging(c: &mut Criterion) {
    let r = random_unit_bianchi(&mut substream(1, 0));
    let mut g = c.benchmark_group("average_left_1e5");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| average_with(exec, &r, Factor::Left, 100_000, 7).unwrap())
        });
    }
    g.finish();
}

fn isotropic(c: &mut Criterion) {
    let r = random_unit_bianchi(&mut substream(2, 0));
    let mut g = c.benchmark_group("min_isotropic_1e5");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| min_isotropic_with(exec, &r, Sign::Plus, 100_000, 3, true).unwrap())
        });
    }
    g.finish();
}

fn probe(c: &mut Criterion) {
    let p = FlowParams::default();
    let opts = ProbeOptions::default();
    let mut g = c.benchmark_group("invariance_probe_ic_100");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| invariance_probe_with(exec, ConeId::IC, 100, 5, &p, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, averaging, isotropic, probe);
criterion_main!(benches);
