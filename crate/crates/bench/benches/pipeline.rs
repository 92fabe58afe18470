use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gusheh::corpus::fixtures::tune_from_pairs;
use gusheh::grammar::induce;
use gusheh::metrics::edit_distance;
use gusheh::mutation::{mutate, pipeline::generate_variation};
use gusheh::representation::SetupConfig;

fn random_sequence(len: usize, alphabet: u8, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(0..alphabet)).collect()
}

fn random_tune(len: usize, seed: u64) -> gusheh::Tune {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pitches = [53, 55, 56, 58, 60];
    let durations = [1u8, 2, 4, 8];
    let pairs: Vec<(i32, u8)> = (0..len)
        .map(|_| {
            (
                pitches[rng.gen_range(0..pitches.len())],
                durations[rng.gen_range(0..durations.len())],
            )
        })
        .collect();
    tune_from_pairs("bench", &pairs)
}

fn bench_induce(c: &mut Criterion) {
    let mut group = c.benchmark_group("induce");
    for len in [64usize, 256, 1024] {
        let seq = random_sequence(len, 5, len as u64);
        group.bench_function(format!("len_{len}"), |b| {
            b.iter(|| induce(&seq).unwrap());
        });
    }
    group.finish();
}

fn bench_mutation(c: &mut Criterion) {
    let seq = random_sequence(256, 5, 7);
    let grammar = induce(&seq).unwrap();
    c.bench_function("mutate_one_step", |b| {
        let mut seed = 0u64;
        b.iter_batched(
            || {
                seed += 1;
                seed
            },
            |s| mutate(&grammar, None, s, 1).unwrap(),
            BatchSize::SmallInput,
        );
    });
}

fn bench_variation(c: &mut Criterion) {
    let tune = random_tune(128, 3);
    let cfg = SetupConfig::named("setup_4").unwrap();
    c.bench_function("generate_variation_n20", |b| {
        b.iter(|| generate_variation(&tune, &cfg, 20, 11).unwrap());
    });
}

fn bench_edit_distance(c: &mut Criterion) {
    let a = random_sequence(400, 5, 1);
    let b_seq = random_sequence(400, 5, 2);
    c.bench_function("edit_distance_400", |b| {
        b.iter(|| edit_distance(&a, &b_seq));
    });
}

criterion_group!(
    benches,
    bench_induce,
    bench_mutation,
    bench_variation,
    bench_edit_distance
);
criterion_main!(benches);
