use std::collections::BTreeMap;

use cogh_core::estimation::{fit_pooled, nll_sweep_pooled};
use cogh_core::metrics::{level_stats, likelihood_improvement_ratio};
use cogh_core::{ActionLog, BeliefWeights, Corpus, Game, OptimizerConfig};

use crate::args::{Cli, FitArgs, LogInput, SelectKArgs};
use crate::common::{group_logs, load_corpus, read_all_logs, write_json, AgentSummary, FitRecord, PairKey};
use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

pub const SUMMARY_COLUMNS: [&str; 10] =
    ["pair", "game", "mechanism", "model_kind", "k_hat", "nll", "agent", "agent_model", "mean_level", "dist_variance"];
pub const K_SELECTION_COLUMNS: [&str; 6] = ["model_kind", "model", "transition", "nll_from", "nll_to", "ratio"];

fn optimizer(cli: &Cli, input: &LogInput) -> Result<OptimizerConfig> {
    let cfg = OptimizerConfig { restarts: cli.restarts, beliefs: input.beliefs.into(), ..OptimizerConfig::with_seed(cli.seed) };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

struct Groups<'a> {
    corpus: &'a Corpus,
    groups: BTreeMap<PairKey, Vec<&'a ActionLog>>,
}

impl<'a> Groups<'a> {
    fn iter(&self) -> impl Iterator<Item = Result<(&PairKey, &'a Game, Vec<(&'a ActionLog, &'a Game)>)>> + '_ {
        self.groups.iter().map(|(key, logs)| {
            let game = self.corpus.game(&key.game)?;
            Ok((key, game, logs.iter().map(|l| (*l, game)).collect()))
        })
    }
}

fn mean_utility(logs: &[(&ActionLog, &Game)]) -> (f64, f64) {
    let mut total = (0.0, 0.0);
    let mut n = 0usize;
    for (log, _) in logs {
        for r in &log.records {
            total.0 += r.row_payoff;
            total.1 += r.col_payoff;
            n += 1;
        }
    }
    (total.0 / n as f64, total.1 / n as f64)
}

pub fn run(cli: &Cli, args: &FitArgs) -> Result<()> {
    if cli.k_hat == 0 {
        return Err(CliError::Usage("--k-hat must be at least 1".into()));
    }
    let cfg = optimizer(cli, &args.input)?;
    let corpus = load_corpus(cli)?;
    let logs = read_all_logs(&args.input.logs, &corpus)?;
    let groups = Groups { corpus: &corpus, groups: group_logs(&logs) };
    let beliefs: BeliefWeights = args.input.beliefs.into();
    let mut summary = Table::new(SUMMARY_COLUMNS);

    for item in groups.iter() {
        let (key, game, data) = item?;
        let (row_u, col_u) = mean_utility(&data);
        for kind in args.input.model.kinds() {
            let fit = fit_pooled(kind, &data, cli.k_hat, &cfg)?;
            let (rp, cp) = fit.profiles(game, beliefs)?;
            let record = FitRecord {
                key: key.clone(),
                logs: data.len(),
                rounds: data.iter().map(|(l, _)| l.records.len()).sum(),
                beliefs,
                row: AgentSummary { model: key.row_model.clone(), levels: level_stats(&rp.level_weights)?, average_utility: row_u },
                col: AgentSummary { model: key.col_model.clone(), levels: level_stats(&cp.level_weights)?, average_utility: col_u },
                fit,
            };
            write_json(&cli.out_dir.join("fits").join(record.file_name()), &record)?;
            for (agent, s) in [("row", &record.row), ("column", &record.col)] {
                summary.push(vec![
                    key.pair().into(),
                    key.game.clone().into(),
                    key.mechanism.as_str().into(),
                    kind.as_str().into(),
                    record.fit.k_hat.into(),
                    record.fit.nll.into(),
                    agent.into(),
                    s.model.clone().into(),
                    s.levels.mean_level.into(),
                    s.levels.dist_variance.into(),
                ]);
            }
        }
    }
    summary.write(&cli.out_dir.join("reports"), "fit_summary", cli.format)?;
    print!("{}", summary.render(cli.format)?);
    Ok(())
}

pub fn select_k(cli: &Cli, args: &SelectKArgs) -> Result<()> {
    let k_hats = &args.k_hats;
    if k_hats.len() < 2 {
        return Err(CliError::Usage("select-k needs at least two --k-hats values".into()));
    }
    if k_hats[0] == 0 || k_hats.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage(format!("--k-hats must be positive and strictly ascending, got {k_hats:?}")));
    }
    let cfg = optimizer(cli, &args.input)?;
    let corpus = load_corpus(cli)?;
    let logs = read_all_logs(&args.input.logs, &corpus)?;
    let groups = Groups { corpus: &corpus, groups: group_logs(&logs) };
    let mut table = Table::new(K_SELECTION_COLUMNS);

    for kind in args.input.model.kinds() {
        // per-agent NLL summed over every log the model plays in
        let mut per_model: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
        for item in groups.iter() {
            let (key, _, data) = item?;
            for (k, fit) in nll_sweep_pooled(kind, &data, k_hats, &cfg)? {
                *per_model.entry(key.row_model.clone()).or_default().entry(k).or_default() += fit.row_nll;
                *per_model.entry(key.col_model.clone()).or_default().entry(k).or_default() += fit.col_nll;
            }
        }
        for (model, nll) in &per_model {
            for w in k_hats.windows(2) {
                let (from, to) = (nll[&w[0]], nll[&w[1]]);
                let ratio = match likelihood_improvement_ratio(from, to) {
                    Ok(r) => Cell::Num(r),
                    Err(_) => {
                        log::warn!("{model}: NLL at k_hat={} is zero, ratio undefined", w[0]);
                        Cell::Empty
                    }
                };
                table.push(vec![
                    kind.as_str().into(),
                    model.clone().into(),
                    format!("{}->{}", w[0], w[1]).into(),
                    from.into(),
                    to.into(),
                    ratio,
                ]);
            }
        }
    }
    table.write(&cli.out_dir.join("reports"), "k_selection", cli.format)?;
    print!("{}", table.render(cli.format)?);
    Ok(())
}
