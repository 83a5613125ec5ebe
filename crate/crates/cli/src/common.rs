use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cogh_core::metrics::LevelStats;
use cogh_core::{ActionLog, BeliefWeights, Corpus, FitResult, Mechanism};
use serde::{Deserialize, Serialize};

use crate::args::Cli;
use crate::error::{CliError, Result};

pub fn load_corpus(cli: &Cli) -> Result<Corpus> {
    match &cli.corpus {
        Some(p) => Ok(Corpus::load(p)?),
        None => Ok(Corpus::builtin()),
    }
}

/// File-name-safe form of a model or generator name.
pub fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Expands directories to their `*.jsonl` files, sorted.
pub fn log_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            out.extend(found);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(CliError::NotFound(format!("{}: no such file or directory", p.display())));
        }
    }
    if out.is_empty() {
        return Err(CliError::NotFound("no log files found".into()));
    }
    Ok(out)
}

/// Reads every file, reporting all failures before giving up.
pub fn read_all_logs(paths: &[PathBuf], corpus: &Corpus) -> Result<Vec<ActionLog>> {
    let files = log_files(paths)?;
    let mut logs = Vec::new();
    let mut failures = Vec::new();
    for f in &files {
        match cogh_core::store::load_logs(f, corpus) {
            Ok(l) => logs.extend(l),
            Err(e) => failures.push((f.clone(), e)),
        }
    }
    if failures.is_empty() {
        return Ok(logs);
    }
    for (f, e) in &failures {
        eprintln!("{}: {e}", f.display());
    }
    let not_found = failures.iter().all(|(_, e)| matches!(e, cogh_core::Error::NotFound(_)));
    let msg = format!("{} of {} log files failed validation", failures.len(), files.len());
    Err(if not_found { CliError::NotFound(msg) } else { CliError::Data(msg) })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairKey {
    pub game: String,
    pub row_model: String,
    pub col_model: String,
    pub mechanism: Mechanism,
}

impl PairKey {
    pub fn of(log: &ActionLog) -> Self {
        PairKey {
            game: log.game_id.clone(),
            row_model: log.row_model.clone(),
            col_model: log.col_model.clone(),
            mechanism: log.mechanism,
        }
    }

    pub fn pair(&self) -> String {
        format!("{}-vs-{}", self.row_model, self.col_model)
    }

    pub fn file_stem(&self) -> String {
        format!("{}_{}-vs-{}-{}", sanitize(&self.game), sanitize(&self.row_model), sanitize(&self.col_model), self.mechanism)
    }
}

/// Logs sharing game, models and mechanism are pooled into one fit.
pub fn group_logs(logs: &[ActionLog]) -> BTreeMap<PairKey, Vec<&ActionLog>> {
    let mut groups: BTreeMap<PairKey, Vec<&ActionLog>> = BTreeMap::new();
    for log in logs {
        groups.entry(PairKey::of(log)).or_default().push(log);
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub model: String,
    pub levels: LevelStats,
    /// Average realized payoff over the pooled logs.
    pub average_utility: f64,
}

/// One fit file under `fits/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    #[serde(flatten)]
    pub key: PairKey,
    pub logs: usize,
    pub rounds: usize,
    pub beliefs: BeliefWeights,
    pub row: AgentSummary,
    pub col: AgentSummary,
    pub fit: FitResult,
}

impl FitRecord {
    pub fn file_name(&self) -> String {
        format!("{}_{}.json", self.key.file_stem(), self.fit.model_kind)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_fit_records(dir: &Path) -> Result<Vec<FitRecord>> {
    if !dir.is_dir() {
        return Err(CliError::NotFound(format!("{}: fit directory not found", dir.display())));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|f| f.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::NotFound(format!("{}: no fit records", dir.display())));
    }
    files
        .iter()
        .map(|f| {
            let text = std::fs::read_to_string(f)?;
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", f.display())))
        })
        .collect()
}
