//! Sequential versus rayon execution of the data-parallel loops. Both modes
//! produce identical results; only wall time differs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use secbc::channels::{binary_example_model, SideInfoMode};
use secbc::codec::CodeParams;
use secbc::regions::{
    evaluate_candidates, region_scan_with, sample_candidates, secrecy_capacity_with, AuxiliaryJoint,
    SearchConfig, Theorem, Variant,
};
use secbc::simharness::{run_trials, SimConfig};
use secbc::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn search(c: &mut Criterion) {
    let m = binary_example_model(0.1, 0.2).unwrap();
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SearchConfig { exec, ..SearchConfig::default() };
        g.bench_with_input(BenchmarkId::new("secrecy_capacity_cf_4000", name), &cfg, |b, cfg| {
            b.iter(|| secrecy_capacity_with(&m, Variant::Cf, black_box(4000), 1, cfg).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("region_scan_t1_4000", name), &cfg, |b, cfg| {
            b.iter(|| region_scan_with(&m, Theorem::T1, black_box(4000), 1, cfg).unwrap())
        });
    }
    g.finish();
}

fn bounds(c: &mut Criterion) {
    let m = binary_example_model(0.1, 0.2).unwrap();
    let dims = Theorem::T7.remark_caps(2, 2);
    let cands = sample_candidates(&m, Theorem::T7, dims, 2000, 3).unwrap();
    let mut g = c.benchmark_group("evaluate_candidates_t7_2000");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| evaluate_candidates(&m, Theorem::T7, black_box(&cands), exec).unwrap()));
    }
    g.finish();
}

fn trials(c: &mut Criterion) {
    let m = binary_example_model(0.1, 0.2).unwrap();
    let aux = AuxiliaryJoint::binary_example_optimum();
    let cfg = SimConfig {
        scheme: SideInfoMode::CAUSAL_FEEDBACK,
        params: CodeParams { n_block: 16, r0: 0.0, r1: 0.42, gamma: 0.0, gamma1: 0.0, eps_typ: 0.06, seed: 1 },
        trials: 500,
        blocks: 4,
        seed: 2,
        enumeration_cap: 0,
    };
    let mut g = c.benchmark_group("run_trials_cf_n16_500");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| run_trials(&m, &aux, black_box(&cfg), exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, search, bounds, trials);
criterion_main!(benches);
