use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wdrd::census::{run_census, CensusConfig};
use wdrd::families::{enumerate_instances, FamilySpec};
use wdrd::par::map_slice;
use wdrd::scheme::{check_lemma1_with, check_wdrd_with, compute_relations, intersection_tensor};
use wdrd::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn census(c: &mut Criterion) {
    let mut group = c.benchmark_group("census_order_14");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut config = CensusConfig::new(14);
        config.exec = exec;
        group.bench_function(name, |b| b.iter(|| run_census(&config).unwrap()));
    }
    group.finish();
}

fn family_sweep(c: &mut Criterion) {
    let specs = enumerate_instances(60);
    let mut group = c.benchmark_group("family_sweep_60");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                map_slice(exec, &specs, |s| {
                    let d = s.construct().unwrap().digraph;
                    let t = d.distance_table_with(Execution::Sequential).unwrap();
                    let rel = compute_relations(&d, &t);
                    check_wdrd_with(&rel, Execution::Sequential).is_wdrd
                })
            })
        });
    }
    group.finish();
}

fn single_instance(c: &mut Criterion) {
    let spec = FamilySpec::viii(20, 5);
    let d = spec.construct().unwrap().digraph;
    let table = d.distance_table().unwrap();
    let rel = compute_relations(&d, &table);
    let p = intersection_tensor(&rel).unwrap();
    let mut group = c.benchmark_group("viii_q20_n5");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("distance_table", name), &exec, |b, &e| {
            b.iter(|| d.distance_table_with(e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("wdrd_check", name), &exec, |b, &e| {
            b.iter(|| check_wdrd_with(&rel, e))
        });
        group.bench_with_input(BenchmarkId::new("identities", name), &exec, |b, &e| {
            b.iter(|| check_lemma1_with(&p, e))
        });
    }
    group.finish();
}

criterion_group!(benches, census, family_sweep, single_instance);
criterion_main!(benches);
