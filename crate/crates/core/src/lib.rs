//! Cognitive-hierarchy evaluation of strategic play in two-player
//! normal-form games.
//!
//! * [`game`]: payoff matrices, strategies, best responses, 2x2 equilibria
//! * [`models`]: Level-K and Poisson-CH level strategies
//! * [`estimation`]: multi-start maximum-likelihood fitting
//! * [`metrics`]: level moments, robustness, likelihood ratios, KL, utilities
//! * [`store`]: corpus and log formats, synthetic data

pub mod error;
pub mod estimation;
pub mod game;
pub mod metrics;
pub mod models;
pub mod optim;
pub mod parallel;
pub mod store;

pub use error::{Error, Result};
pub use estimation::{fit_level_k, fit_poisson, nll_sweep, FitResult, FittedParams, ModelKind, OptimizerConfig};
pub use game::{Game, PlayerRole, Strategy};
pub use models::{BeliefWeights, LevelKParams, LevelProfile, PoissonParams};
pub use parallel::ExecMode;
pub use store::{ActionLog, ActionRecord, Corpus, GeneratorSpec, Mechanism};
