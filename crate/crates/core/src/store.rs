//! On-disk formats: the game corpus (JSON) and behavioral action logs
//! (JSON lines), plus seeded synthetic log generation.
//!
//! A log file holds one or more logs. Each log is a header line followed by
//! exactly `rounds` record lines:
//!
//! ```text
//! {"schema_version":1,"game_id":"paper-01","row_model":"a","col_model":"b","mechanism":"baseline","rounds":2}
//! {"round":1,"row_action":0,"col_action":1,"row_payoff":5.0,"col_payoff":0.0}
//! {"round":2,"row_action":0,"col_action":0,"row_payoff":3.0,"col_payoff":3.0}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{expected_payoff, Game, PlayerRole, Strategy, DEFAULT_BR_TOL};
use crate::models::{level_k_profiles, poisson_profiles, BeliefWeights, LevelKParams, PoissonParams};

pub const SCHEMA_VERSION: u32 = 1;

/// Number of rounds per collected match.
pub const DEFAULT_ROUNDS: usize = 30;

const BUILTIN_CORPUS: &str = include_str!("../data/corpus.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Baseline,
    Chat,
    MemoryFull,
    MemoryPartial,
    ChatMemory,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] =
        [Mechanism::Baseline, Mechanism::Chat, Mechanism::MemoryFull, Mechanism::MemoryPartial, Mechanism::ChatMemory];

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Baseline => "baseline",
            Mechanism::Chat => "chat",
            Mechanism::MemoryFull => "memory-full",
            Mechanism::MemoryPartial => "memory-partial",
            Mechanism::ChatMemory => "chat-memory",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mechanism::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::DataValidation(format!("unknown mechanism {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRecord {
    pub round: usize,
    pub row_action: usize,
    pub col_action: usize,
    pub row_payoff: f64,
    pub col_payoff: f64,
}

impl ActionRecord {
    pub fn from_game(game: &Game, round: usize, row_action: usize, col_action: usize) -> Self {
        let (row_payoff, col_payoff) = game.cell(row_action, col_action);
        ActionRecord { round, row_action, col_action, row_payoff, col_payoff }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionLog {
    pub game_id: String,
    pub row_model: String,
    pub col_model: String,
    pub mechanism: Mechanism,
    pub records: Vec<ActionRecord>,
}

impl ActionLog {
    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    /// Checks index ranges, round numbering and payoff consistency against `game`.
    pub fn validate_against(&self, game: &Game) -> Result<()> {
        if self.game_id != game.id() {
            return Err(Error::DataValidation(format!("log for {} validated against {}", self.game_id, game.id())));
        }
        if self.records.is_empty() {
            return Err(Error::DataValidation(format!("log for {} has no rounds", self.game_id)));
        }
        let (n, m) = game.shape();
        for (i, r) in self.records.iter().enumerate() {
            let ctx = |msg: String| Error::DataValidation(format!("game {} round {}: {msg}", self.game_id, r.round));
            if r.round != i + 1 {
                return Err(ctx(format!("expected round {}", i + 1)));
            }
            if r.row_action >= n || r.col_action >= m {
                return Err(ctx(format!("action pair ({}, {}) outside {n}x{m}", r.row_action, r.col_action)));
            }
            let (rp, cp) = game.cell(r.row_action, r.col_action);
            if r.row_payoff != rp || r.col_payoff != cp {
                return Err(ctx(format!(
                    "payoffs ({}, {}) do not match matrix cell ({rp}, {cp})",
                    r.row_payoff, r.col_payoff
                )));
            }
        }
        Ok(())
    }

    /// Per-action counts `(row_counts, col_counts)`.
    pub fn action_counts(&self, n: usize, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; m];
        for r in &self.records {
            if r.row_action >= n || r.col_action >= m {
                return Err(Error::DataValidation(format!(
                    "game {} round {}: action pair ({}, {}) outside {n}x{m}",
                    self.game_id, r.round, r.row_action, r.col_action
                )));
            }
            rows[r.row_action] += 1.0;
            cols[r.col_action] += 1.0;
        }
        Ok((rows, cols))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkedCheck {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub row_utility: f64,
    pub col_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameRecord {
    id: String,
    row_actions: Vec<String>,
    col_actions: Vec<String>,
    row_payoff: Vec<Vec<f64>>,
    col_payoff: Vec<Vec<f64>>,
    symmetric: bool,
    #[serde(default)]
    provenance: String,
    #[serde(default)]
    worked_checks: Vec<WorkedCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    schema_version: u32,
    convention: String,
    games: Vec<GameRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub game: Game,
    pub provenance: String,
    pub worked_checks: Vec<WorkedCheck>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub convention: String,
    entries: BTreeMap<String, CorpusEntry>,
}

impl Corpus {
    pub fn builtin() -> Self {
        Corpus::from_json_str(BUILTIN_CORPUS).expect("bundled corpus is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Corpus::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: CorpusFile =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::DataValidation(format!("unsupported corpus schema_version {}", file.schema_version)));
        }
        let mut entries = BTreeMap::new();
        for rec in file.games {
            let id = rec.id.clone();
            let game = Game::new(rec.id, rec.row_actions, rec.col_actions, rec.row_payoff, rec.col_payoff)
                .map_err(|e| Error::DataValidation(format!("game {id}: {e}")))?;
            if game.is_symmetric() != rec.symmetric {
                return Err(Error::DataValidation(format!(
                    "game {id}: declared symmetric={} but matrices give {}",
                    rec.symmetric,
                    game.is_symmetric()
                )));
            }
            for check in &rec.worked_checks {
                verify_worked_check(&game, check).map_err(|e| Error::DataValidation(format!("game {id}: {e}")))?;
            }
            let entry = CorpusEntry { game, provenance: rec.provenance, worked_checks: rec.worked_checks };
            if entries.insert(id.clone(), entry).is_some() {
                return Err(Error::DataValidation(format!("duplicate game id {id}")));
            }
        }
        Ok(Corpus { convention: file.convention, entries })
    }

    pub fn to_json_string(&self) -> String {
        let file = CorpusFile {
            schema_version: SCHEMA_VERSION,
            convention: self.convention.clone(),
            games: self
                .entries
                .values()
                .map(|e| GameRecord {
                    id: e.game.id().to_string(),
                    row_actions: e.game.row_actions().to_vec(),
                    col_actions: e.game.col_actions().to_vec(),
                    row_payoff: e.game.row_payoff().to_vec(),
                    col_payoff: e.game.col_payoff().to_vec(),
                    symmetric: e.game.is_symmetric(),
                    provenance: e.provenance.clone(),
                    worked_checks: e.worked_checks.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("corpus serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Game> {
        self.entries.get(id).map(|e| &e.game)
    }

    pub fn game(&self, id: &str) -> Result<&Game> {
        self.get(id).ok_or_else(|| Error::NotFound(format!("game {id:?} is not in the corpus")))
    }

    pub fn entry(&self, id: &str) -> Option<&CorpusEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn games(&self) -> impl Iterator<Item = &Game> {
        self.entries.values().map(|e| &e.game)
    }

    /// The fifteen collection games, `paper-01` through `paper-15`.
    pub fn collection_games(&self) -> impl Iterator<Item = &Game> {
        self.games().filter(|g| g.id().starts_with("paper-"))
    }
}

fn verify_worked_check(game: &Game, check: &WorkedCheck) -> Result<()> {
    let row = Strategy::new(check.row_strategy.clone())?;
    let col = Strategy::new(check.col_strategy.clone())?;
    let ru = expected_payoff(game, PlayerRole::Row, &row, &col)?;
    let cu = expected_payoff(game, PlayerRole::Column, &col, &row)?;
    if (ru - check.row_utility).abs() > 1e-9 || (cu - check.col_utility).abs() > 1e-9 {
        return Err(Error::DataValidation(format!(
            "worked check failed: utilities ({ru}, {cu}) vs expected ({}, {})",
            check.row_utility, check.col_utility
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogHeader {
    schema_version: u32,
    game_id: String,
    row_model: String,
    col_model: String,
    mechanism: String,
    rounds: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LogLine {
    Header(LogHeader),
    Record(ActionRecord),
}

/// Serializes logs to the JSON-lines format.
pub fn write_logs<W: Write>(mut out: W, logs: &[ActionLog]) -> Result<()> {
    for log in logs {
        let header = LogHeader {
            schema_version: SCHEMA_VERSION,
            game_id: log.game_id.clone(),
            row_model: log.row_model.clone(),
            col_model: log.col_model.clone(),
            mechanism: log.mechanism.as_str().to_string(),
            rounds: log.records.len(),
        };
        serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for r in &log.records {
            serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn save_logs(path: &Path, logs: &[ActionLog]) -> Result<()> {
    let mut buf = Vec::new();
    write_logs(&mut buf, logs)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Parses JSON-lines logs and validates each one against `corpus`.
pub fn read_logs<R: BufRead>(input: R, corpus: &Corpus) -> Result<Vec<ActionLog>> {
    let mut logs = Vec::new();
    let mut current: Option<(LogHeader, ActionLog)> = None;

    let finish = |slot: Option<(LogHeader, ActionLog)>, logs: &mut Vec<ActionLog>, line: usize| -> Result<()> {
        if let Some((header, log)) = slot {
            if log.records.len() != header.rounds {
                return Err(Error::Parse {
                    line,
                    message: format!("log for {} declares {} rounds but has {}", header.game_id, header.rounds, log.records.len()),
                });
            }
            let game = corpus.get(&log.game_id).ok_or_else(|| {
                Error::DataValidation(format!("log references unknown game {:?}", log.game_id))
            })?;
            log.validate_against(game)?;
            logs.push(log);
        }
        Ok(())
    };

    let mut line_no = 0;
    for line in input.lines() {
        line_no += 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LogLine =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        match parsed {
            LogLine::Header(h) => {
                finish(current.take(), &mut logs, line_no)?;
                if h.schema_version != SCHEMA_VERSION {
                    return Err(Error::Parse { line: line_no, message: format!("unsupported schema_version {}", h.schema_version) });
                }
                let mechanism: Mechanism = h.mechanism.parse()?;
                let log = ActionLog {
                    game_id: h.game_id.clone(),
                    row_model: h.row_model.clone(),
                    col_model: h.col_model.clone(),
                    mechanism,
                    records: Vec::with_capacity(h.rounds),
                };
                current = Some((h, log));
            }
            LogLine::Record(r) => match current.as_mut() {
                Some((_, log)) => log.records.push(r),
                None => return Err(Error::Parse { line: line_no, message: "record before any header".into() }),
            },
        }
    }
    finish(current.take(), &mut logs, line_no)?;
    Ok(logs)
}

pub fn load_logs(path: &Path, corpus: &Corpus) -> Result<Vec<ActionLog>> {
    let file = std::fs::File::open(path)?;
    read_logs(BufReader::new(file), corpus)
}

/// How one synthetic player picks actions.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Uniform,
    Fixed(Vec<f64>),
    LevelK(LevelKParams),
    Poisson(PoissonParams),
}

impl GeneratorSpec {
    /// Parses `uniform`, `fixed:p1,p2,..`, `poisson:lambda` (with
    /// `default_k_hat` levels) or `level-k:a0,a1,..;e1,e2,..`.
    pub fn parse(s: &str, default_k_hat: usize) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = |t: &str| -> Result<Vec<f64>> {
            t.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse::<f64>().map_err(|_| invalid(format!("bad number {x:?} in generator {s:?}"))))
                .collect()
        };
        match kind {
            "uniform" if args.is_empty() => Ok(GeneratorSpec::Uniform),
            "fixed" => {
                let probs = nums(args)?;
                Strategy::new(probs.clone())?;
                Ok(GeneratorSpec::Fixed(probs))
            }
            "poisson" => {
                let v = nums(args)?;
                if v.len() != 1 {
                    return Err(invalid(format!("poisson generator takes one rate: {s:?}")));
                }
                Ok(GeneratorSpec::Poisson(PoissonParams::new(default_k_hat, v[0])?))
            }
            "level-k" => {
                let (alpha, eps) = args.split_once(';').unwrap_or((args, ""));
                Ok(GeneratorSpec::LevelK(LevelKParams::new(nums(eps)?, nums(alpha)?)?))
            }
            _ => Err(invalid(format!("unknown generator {s:?}; expected uniform, fixed:, poisson: or level-k:"))),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            GeneratorSpec::Uniform => write!(f, "uniform"),
            GeneratorSpec::Fixed(p) => write!(f, "fixed:{}", join(p)),
            GeneratorSpec::Poisson(p) => write!(f, "poisson:{}", p.lambda),
            GeneratorSpec::LevelK(p) => write!(f, "level-k:{};{}", join(&p.alpha), join(&p.eps)),
        }
    }
}

/// Aggregate strategies `(row, col)` implied by two generators on `game`.
///
/// Two hierarchy generators of the same kind are solved jointly. A hierarchy
/// generator facing any other opponent models that opponent with its own
/// parameters.
pub fn generator_strategies(game: &Game, row: &GeneratorSpec, col: &GeneratorSpec) -> Result<(Strategy, Strategy)> {
    use GeneratorSpec::*;
    let (n, m) = game.shape();
    let joint = match (row, col) {
        (LevelK(a), LevelK(b)) => {
            let (r, c) = level_k_profiles(game, a, b, DEFAULT_BR_TOL)?;
            Some((r.aggregate, c.aggregate))
        }
        (Poisson(a), Poisson(b)) => {
            let (r, c) = poisson_profiles(game, a, b, DEFAULT_BR_TOL, BeliefWeights::Own)?;
            Some((r.aggregate, c.aggregate))
        }
        _ => None,
    };
    if let Some(j) = joint {
        return Ok(j);
    }
    let single = |g: &GeneratorSpec, role: PlayerRole, len: usize| -> Result<Strategy> {
        match g {
            Uniform => Ok(Strategy::uniform(len)),
            Fixed(p) => {
                if p.len() != len {
                    return Err(invalid(format!("fixed generator has {} entries, player has {len} actions", p.len())));
                }
                Strategy::new(p.clone())
            }
            LevelK(p) => {
                let (r, c) = level_k_profiles(game, p, p, DEFAULT_BR_TOL)?;
                Ok(if role == PlayerRole::Row { r.aggregate } else { c.aggregate })
            }
            Poisson(p) => {
                let (r, c) = poisson_profiles(game, p, p, DEFAULT_BR_TOL, BeliefWeights::Own)?;
                Ok(if role == PlayerRole::Row { r.aggregate } else { c.aggregate })
            }
        }
    };
    Ok((single(row, PlayerRole::Row, n)?, single(col, PlayerRole::Column, m)?))
}

/// Uniform draw in `[0, 1)` from the top 53 bits of one 64-bit output.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw from `probs`.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap at the top; take the last action with mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// The seeded generator used for all synthetic data: ChaCha8 seeded with
/// `seed_from_u64(seed)`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples `rounds` independent joint actions, row first then column each round.
pub fn synthesize_log(game: &Game, row: &GeneratorSpec, col: &GeneratorSpec, rounds: usize, seed: u64) -> Result<ActionLog> {
    if rounds == 0 {
        return Err(invalid("synthetic log needs at least one round"));
    }
    let (rs, cs) = generator_strategies(game, row, col)?;
    let mut rng = seeded_rng(seed);
    let records = (1..=rounds)
        .map(|t| {
            let a = sample_index(rs.probs(), unit_f64(&mut rng));
            let b = sample_index(cs.probs(), unit_f64(&mut rng));
            ActionRecord::from_game(game, t, a, b)
        })
        .collect();
    Ok(ActionLog {
        game_id: game.id().to_string(),
        row_model: row.to_string(),
        col_model: col.to_string(),
        mechanism: Mechanism::Baseline,
        records,
    })
}
