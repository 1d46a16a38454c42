use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use hybridcc_bench::churn_workload;
use hybridcc_core::harness::{self, Mode, RunConfig};
use hybridcc_core::sketch::{BalloonColumn, SketchSeed};
use hybridcc_core::{CoordinateId, Edge, Hybrid, HybridConfig, IbltConfig, NeighborIblt};

fn column_update(c: &mut Criterion) {
    let seed = SketchSeed { column_seed: 7, checksum_seed: 9 };
    let mut col = BalloonColumn::new(seed, 1 << 32);
    let mut j = 0u64;
    c.bench_function("column_update", |b| {
        b.iter(|| {
            j = (j + 0x9e37_79b9) & 0xffff_ffff;
            black_box(col.update(CoordinateId(j)))
        })
    });
}

fn iblt_recover(c: &mut Criterion) {
    let mut g = c.benchmark_group("iblt_recover");
    for r in [40u32, 162] {
        let mut t = NeighborIblt::new(IbltConfig { recovery_size: r, vertices: 1 << 13, seed: 3 });
        for x in 0..r {
            t.insert(x * 37 % (1 << 13));
        }
        g.bench_with_input(BenchmarkId::from_parameter(r), &t, |b, t| b.iter(|| black_box(t.recover().is_ok())));
    }
    g.finish();
}

fn hybrid_clique(c: &mut Criterion) {
    let edges: Vec<Edge> = (0..64u32).flat_map(|a| (a + 1..64).map(move |b| Edge::new(a, b).unwrap())).collect();
    c.bench_function("hybrid_clique_64", |b| {
        b.iter_batched(
            || Hybrid::new(HybridConfig::new(1024, 2, 2, 1)),
            |mut h| {
                for &e in &edges {
                    h.insert_edge(e).unwrap();
                }
                h
            },
            BatchSize::SmallInput,
        )
    });
}

fn replay(c: &mut Criterion) {
    let stream = churn_workload(1000, 8000, 20_000, 11);
    let cfg = RunConfig { delta_mult: 4, checkpoint_every: 0, timing: false, ..RunConfig::default() };
    let mut g = c.benchmark_group("replay_churn");
    g.sample_size(10);
    for mode in Mode::ALL {
        g.bench_function(mode.name(), |b| b.iter(|| harness::run(mode, &stream, &cfg).unwrap().answers.len()));
    }
    g.finish();
}

criterion_group!(benches, column_update, iblt_recover, hybrid_clique, replay);
criterion_main!(benches);
