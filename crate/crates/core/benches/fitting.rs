use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cogh_core::store::synthesize_log;
use cogh_core::estimation::fit;
use cogh_core::{nll_sweep, Corpus, ExecMode, GeneratorSpec, ModelKind, OptimizerConfig};

fn multi_start(c: &mut Criterion) {
    let corpus = Corpus::builtin();
    let game = corpus.game("paper-15").unwrap();
    let gen = GeneratorSpec::parse("poisson:1.2", 5).unwrap();
    let log = synthesize_log(game, &gen, &gen, 600, 1).unwrap();

    let mut group = c.benchmark_group("multi_start_fit");
    for kind in [ModelKind::PoissonCh, ModelKind::LevelK] {
        for exec in [ExecMode::Sequential, ExecMode::Parallel] {
            let cfg = OptimizerConfig { exec, ..OptimizerConfig::with_seed(1) };
            group.bench_with_input(BenchmarkId::new(kind.to_string(), format!("{exec:?}")), &cfg, |b, cfg| {
                b.iter(|| fit(kind, &log, game, 4, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn k_sweep(c: &mut Criterion) {
    let corpus = Corpus::builtin();
    let game = corpus.game("paper-13").unwrap();
    let gen = GeneratorSpec::parse("level-k:0.1,0.2,0.4,0.3;0.05,0.05,0.05", 4).unwrap();
    let log = synthesize_log(game, &gen, &gen, 600, 2).unwrap();

    let mut group = c.benchmark_group("level_k_sweep");
    group.sample_size(10);
    for exec in [ExecMode::Sequential, ExecMode::Parallel] {
        let cfg = OptimizerConfig { exec, ..OptimizerConfig::with_seed(2) };
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| nll_sweep(ModelKind::LevelK, &log, game, &[3, 4, 5], &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, multi_start, k_sweep);
criterion_main!(benches);
