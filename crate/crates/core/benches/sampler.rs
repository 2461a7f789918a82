use std::hint::black_box;

use cctm::exec::Execution;
use cctm::model::{init_state, Hyperparameters, Variant};
use cctm::sampler;
use cctm::synthetic::{planted, zipf, PlantedConfig, ZipfConfig};
use cctm::termhood::{estimate_posteriors_with, partition_vocabulary};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gibbs_sweep(c: &mut Criterion) {
    let corpus = planted(&PlantedConfig {
        documents: 300,
        ..PlantedConfig::default()
    })
    .unwrap()
    .corpus;
    let partition = partition_vocabulary(&corpus, None).unwrap();
    let hyper = Hyperparameters::new(10).with_seed(1);
    let mut group = c.benchmark_group("gibbs_sweep");
    for variant in [Variant::Entropy, Variant::CcLda] {
        let part = (variant == Variant::Entropy).then_some(&partition);
        let mut state = init_state(&corpus, &hyper, variant, part).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        group.bench_function(variant.name(), |b| {
            b.iter(|| sampler::sweep(&mut state, &corpus, &mut rng).unwrap())
        });
    }
    group.finish();
}

fn posteriors(c: &mut Criterion) {
    let corpus = zipf(&ZipfConfig {
        documents: 2_000,
        ..ZipfConfig::default()
    })
    .unwrap();
    let mut group = c.benchmark_group("estimate_posteriors");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| black_box(estimate_posteriors_with(&corpus, exec)))
        });
    }
    group.finish();
}

criterion_group!(benches, gibbs_sweep, posteriors);
criterion_main!(benches);
