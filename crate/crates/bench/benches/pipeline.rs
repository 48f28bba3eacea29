//! Pipeline stage benchmarks at simulation scale.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use blockroute::blocks::place_blocks;
use blockroute::graphs::generate_regular;
use blockroute::quotient::build_quotient;
use blockroute::routing::{
    decompose_hop_into_matchings, plan_block_hop, sample_hop_target, schedule_greedy, valiant_route,
};
use blockroute::spectral::{spectral_ratio, SpectralOptions};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_generate(c: &mut Criterion) {
    c.bench_function("generate_regular_n2000_d100", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            black_box(generate_regular(2000, 100, seed).unwrap())
        })
    });
}

fn bench_host_spectral(c: &mut Criterion) {
    let g = generate_regular(2000, 100, 7).unwrap();
    let opts = SpectralOptions {
        tol: 1e-6,
        ..Default::default()
    };
    let mut group = c.benchmark_group("spectral");
    group.sample_size(20);
    group.bench_function("host_beta_n2000_d100", |b| {
        b.iter(|| black_box(spectral_ratio(&g, 100.0, &opts).unwrap()))
    });
    group.finish();
}

fn bench_placement_and_quotient(c: &mut Criterion) {
    let g = generate_regular(2000, 100, 7).unwrap();
    c.bench_function("place_blocks_n2000_32x9", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            black_box(place_blocks(&g, 32, 3, 1, seed).unwrap())
        })
    });
    let cfg = place_blocks(&g, 32, 3, 1, 1).unwrap();
    c.bench_function("build_quotient_n2000_32x9", |b| {
        b.iter(|| black_box(build_quotient(&g, &cfg).unwrap()))
    });
}

fn bench_routing(c: &mut Criterion) {
    let g = generate_regular(2000, 100, 7).unwrap();
    let cfg = place_blocks(&g, 32, 3, 1, 1).unwrap();
    let q = build_quotient(&g, &cfg).unwrap();
    c.bench_function("valiant_route_and_schedule_n32", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pi: Vec<u32> = (0..32).collect();
            pi.shuffle(&mut rng);
            let out = valiant_route(&q, &pi, seed).unwrap();
            black_box(schedule_greedy(out).unwrap())
        })
    });
}

fn bench_hop_decomposition(c: &mut Criterion) {
    let g = generate_regular(2000, 100, 7).unwrap();
    let cfg = place_blocks(&g, 32, 3, 1, 1).unwrap();
    let target = sample_hop_target(&g, &cfg, 0, 3).expect("target exists at this occupancy");
    c.bench_function("hop_plan_and_decompose_s9", |b| {
        b.iter(|| {
            let plan = plan_block_hop(&g, &cfg, 0, &target).unwrap();
            black_box(decompose_hop_into_matchings(plan))
        })
    });
}

criterion_group!(
    benches,
    bench_generate,
    bench_host_spectral,
    bench_placement_and_quotient,
    bench_routing,
    bench_hop_decomposition
);
criterion_main!(benches);
