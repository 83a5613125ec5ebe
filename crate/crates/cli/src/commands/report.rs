use std::collections::{BTreeMap, BTreeSet};

use cogh_core::metrics::{kl_divergence, robustness, utility_variance, LevelStats};
use cogh_core::{Mechanism, ModelKind};

use crate::args::{Cli, ReportArgs};
use crate::common::{group_logs, load_corpus, read_all_logs, read_fit_records, FitRecord, PairKey};
use crate::error::Result;
use crate::table::{Cell, Table};

pub const LEVEL_COLUMNS: [&str; 6] = ["model_kind", "model", "mean_level", "dist_variance", "cross_variance", "fits"];
pub const ROBUSTNESS_COLUMNS: [&str; 8] =
    ["model_kind", "mechanism", "game", "model", "role", "opponents", "cross_mean", "cross_variance"];
pub const KL_COLUMNS: [&str; 7] = ["model_kind", "mechanism", "game", "model", "role", "opponent", "kl"];
pub const UTILITY_VARIANCE_COLUMNS: [&str; 6] = ["mechanism", "game", "model", "role", "opponents", "utility_variance"];

const KL_FLOOR: f64 = 1e-9;

/// One agent's view of a fitted pairing.
struct Seat<'r> {
    record: &'r FitRecord,
    role: &'static str,
    model: &'r str,
    opponent: &'r str,
    levels: LevelStats,
}

fn seats(records: &[FitRecord]) -> Vec<Seat<'_>> {
    records
        .iter()
        .flat_map(|r| {
            [
                Seat { record: r, role: "row", model: &r.row.model, opponent: &r.col.model, levels: r.row.levels },
                Seat { record: r, role: "column", model: &r.col.model, opponent: &r.row.model, levels: r.col.levels },
            ]
        })
        .collect()
}

fn population_variance(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
}

/// Average payoffs of one pairing, weighted by rounds.
struct UtilityObs {
    key: PairKey,
    rounds: usize,
    row: f64,
    col: f64,
}

pub fn run(cli: &Cli, args: &ReportArgs) -> Result<()> {
    let corpus = load_corpus(cli)?;
    let fits_dir = args.fits.clone().unwrap_or_else(|| cli.out_dir.join("fits"));
    let records = read_fit_records(&fits_dir)?;
    let reports = cli.out_dir.join("reports");
    let all_seats = seats(&records);
    let mechanisms: BTreeSet<Mechanism> = records.iter().map(|r| r.key.mechanism).collect();

    // (a) level moments per model, one table per mechanism
    for mech in &mechanisms {
        let mut by_model: BTreeMap<(ModelKind, &str), Vec<LevelStats>> = BTreeMap::new();
        for s in all_seats.iter().filter(|s| s.record.key.mechanism == *mech) {
            by_model.entry((s.record.fit.model_kind, s.model)).or_default().push(s.levels);
        }
        let mut t = Table::new(LEVEL_COLUMNS);
        for ((kind, model), stats) in &by_model {
            let means: Vec<f64> = stats.iter().map(|s| s.mean_level).collect();
            let n = stats.len() as f64;
            t.push(vec![
                kind.as_str().into(),
                (*model).into(),
                (means.iter().sum::<f64>() / n).into(),
                (stats.iter().map(|s| s.dist_variance).sum::<f64>() / n).into(),
                population_variance(&means).into(),
                stats.len().into(),
            ]);
        }
        t.write(&reports, &format!("levels_{mech}"), cli.format)?;
    }

    // (b) cross-opponent robustness per model, game and seat
    let mut groups: BTreeMap<(ModelKind, Mechanism, &str, &str, &str), BTreeMap<String, LevelStats>> = BTreeMap::new();
    for s in &all_seats {
        let k = &s.record.key;
        groups
            .entry((s.record.fit.model_kind, k.mechanism, k.game.as_str(), s.model, s.role))
            .or_default()
            .insert(s.opponent.to_string(), s.levels);
    }
    let mut t = Table::new(ROBUSTNESS_COLUMNS);
    for ((kind, mech, game, model, role), fits) in &groups {
        let r = robustness(model, fits)?;
        t.push(vec![
            kind.as_str().into(),
            mech.as_str().into(),
            (*game).into(),
            (*model).into(),
            (*role).into(),
            fits.len().into(),
            r.cross_mean.into(),
            r.cross_variance.into(),
        ]);
    }
    t.write(&reports, "robustness", cli.format)?;

    // (d) divergence between levels 3 and 4
    let mut t = Table::new(KL_COLUMNS);
    let mut skipped = 0;
    for r in &records {
        if r.fit.k_hat < 5 {
            skipped += 1;
            continue;
        }
        let game = corpus.game(&r.key.game)?;
        let (rp, cp) = r.fit.profiles(game, r.beliefs)?;
        for (role, model, opp, p) in [("row", &r.row.model, &r.col.model, &rp), ("column", &r.col.model, &r.row.model, &cp)] {
            let kl = kl_divergence(&p.level_strategies[3], &p.level_strategies[4], KL_FLOOR)?;
            t.push(vec![
                r.fit.model_kind.as_str().into(),
                r.key.mechanism.as_str().into(),
                r.key.game.clone().into(),
                model.clone().into(),
                role.into(),
                opp.clone().into(),
                kl.into(),
            ]);
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} fits have k_hat below 5 and no KL row");
    }
    t.write(&reports, "kl", cli.format)?;

    // (c) utilities
    let observations: Vec<UtilityObs> = if args.logs.is_empty() {
        let mut seen = BTreeSet::new();
        records
            .iter()
            .filter(|r| seen.insert(r.key.clone()))
            .map(|r| UtilityObs { key: r.key.clone(), rounds: r.rounds, row: r.row.average_utility, col: r.col.average_utility })
            .collect()
    } else {
        let logs = read_all_logs(&args.logs, &corpus)?;
        group_logs(&logs)
            .into_iter()
            .map(|(key, logs)| {
                let records: Vec<_> = logs.iter().flat_map(|l| &l.records).collect();
                let n = records.len() as f64;
                UtilityObs {
                    key,
                    rounds: records.len(),
                    row: records.iter().map(|r| r.row_payoff).sum::<f64>() / n,
                    col: records.iter().map(|r| r.col_payoff).sum::<f64>() / n,
                }
            })
            .collect()
    };
    utility_tables(cli, &observations)
}

fn utility_tables(cli: &Cli, obs: &[UtilityObs]) -> Result<()> {
    let reports = cli.out_dir.join("reports");
    // (mechanism, model, opponent) -> (weighted sum, rounds)
    let mut matrix: BTreeMap<(Mechanism, &str, &str), (f64, usize)> = BTreeMap::new();
    // (mechanism, game, model, role) -> opponent -> average
    let mut spread: BTreeMap<(Mechanism, &str, &str, &str), BTreeMap<String, f64>> = BTreeMap::new();
    for o in obs {
        let k = &o.key;
        for (model, opp, u, role) in
            [(&k.row_model, &k.col_model, o.row, "row"), (&k.col_model, &k.row_model, o.col, "column")]
        {
            let cell = matrix.entry((k.mechanism, model, opp)).or_default();
            cell.0 += u * o.rounds as f64;
            cell.1 += o.rounds;
            spread.entry((k.mechanism, &k.game, model, role)).or_default().insert(opp.clone(), u);
        }
    }
    let mechanisms: BTreeSet<Mechanism> = obs.iter().map(|o| o.key.mechanism).collect();
    for mech in mechanisms {
        let models: BTreeSet<&str> =
            obs.iter().filter(|o| o.key.mechanism == mech).flat_map(|o| [o.key.row_model.as_str(), o.key.col_model.as_str()]).collect();
        let mut t = Table::new(std::iter::once("model").chain(models.iter().copied()));
        for m in &models {
            let mut row: Vec<Cell> = vec![(*m).into()];
            for opp in &models {
                row.push(matrix.get(&(mech, m, opp)).map(|(s, n)| s / *n as f64).into());
            }
            t.push(row);
        }
        t.write(&reports, &format!("utility_{mech}"), cli.format)?;
    }
    let mut t = Table::new(UTILITY_VARIANCE_COLUMNS);
    for ((mech, game, model, role), per_opp) in &spread {
        t.push(vec![
            mech.as_str().into(),
            (*game).into(),
            (*model).into(),
            (*role).into(),
            per_opp.len().into(),
            utility_variance(per_opp)?.into(),
        ]);
    }
    t.write(&reports, "utility_variance", cli.format)?;
    Ok(())
}
