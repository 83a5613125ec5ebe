use cogh_core::estimation::nll_at;
use cogh_core::store::synthesize_log;
use cogh_core::{fit_poisson, nll_sweep, Corpus, ExecMode, FittedParams, GeneratorSpec, ModelKind, OptimizerConfig, PoissonParams};

fn spec(s: &str) -> GeneratorSpec {
    GeneratorSpec::parse(s, 4).unwrap()
}

#[test]
fn sequential_and_parallel_fits_agree() {
    let corpus = Corpus::builtin();
    let g = corpus.game("paper-15").unwrap();
    let log = synthesize_log(g, &spec("poisson:1.5"), &spec("poisson:0.8"), 300, 3).unwrap();
    for kind in [ModelKind::LevelK, ModelKind::PoissonCh] {
        let seq = OptimizerConfig { exec: ExecMode::Sequential, ..OptimizerConfig::with_seed(11) };
        let par = OptimizerConfig { exec: ExecMode::Parallel, ..OptimizerConfig::with_seed(11) };
        let a = cogh_core::estimation::fit(kind, &log, g, 4, &seq).unwrap();
        let b = cogh_core::estimation::fit(kind, &log, g, 4, &par).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn poisson_fit_beats_generating_parameters() {
    let corpus = Corpus::builtin();
    let g = corpus.game("paper-13").unwrap();
    for seed in 1..=3 {
        let log = synthesize_log(g, &spec("poisson:1.2"), &spec("poisson:0.7"), 600, seed).unwrap();
        let cfg = OptimizerConfig::with_seed(seed);
        let fit = fit_poisson(&log, g, 4, &cfg).unwrap();
        let truth = FittedParams::Poisson { row: PoissonParams::new(4, 1.2).unwrap(), col: PoissonParams::new(4, 0.7).unwrap() };
        assert!(fit.nll <= nll_at(&log, g, &truth, &cfg).unwrap() + 1e-3);
        assert!((fit.row_nll + fit.col_nll - fit.nll).abs() < 1e-9);
    }
}

#[test]
fn level_k_sweep_never_gets_worse() {
    let corpus = Corpus::builtin();
    let g = corpus.game("paper-15").unwrap();
    let gen = spec("level-k:0.1,0.2,0.4,0.3;0.05,0.05,0.05");
    let log = synthesize_log(g, &gen, &gen, 400, 9).unwrap();
    let sweep = nll_sweep(ModelKind::LevelK, &log, g, &[1, 2, 3, 4, 5], &OptimizerConfig::with_seed(9)).unwrap();
    let nll: Vec<f64> = sweep.values().map(|f| f.nll).collect();
    assert!(nll.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{nll:?}");
    assert_eq!(sweep[&3].restarts_run, 11);
    assert!(nll_sweep(ModelKind::LevelK, &log, g, &[4, 3], &OptimizerConfig::default()).is_err());
}

#[test]
fn fits_are_reproducible() {
    let corpus = Corpus::builtin();
    let g = corpus.game("paper-08").unwrap();
    let log = synthesize_log(g, &spec("fixed:0.7,0.3"), &spec("poisson:2"), 200, 5).unwrap();
    let cfg = OptimizerConfig::with_seed(42);
    assert_eq!(fit_poisson(&log, g, 4, &cfg).unwrap(), fit_poisson(&log, g, 4, &cfg).unwrap());
}
