//! Collection campaigns: many matches, bounded parallelism, fault isolation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use cogh_core::store::save_logs;
use cogh_core::{ActionLog, Corpus, Mechanism};
use serde::{Deserialize, Serialize};

use crate::endpoint::{sanitize, EndpointRegistry};
use crate::error::{HarnessError, Result};
use crate::play::{run_match, MechanismConfig};
use crate::prompt::PromptBundle;

pub const PAIR_ENUMERATION: &str = "unordered-distinct";
pub const CONTEXT_POLICY: &str = "fresh-context-per-round";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSpec {
    pub game: String,
    pub row_model: String,
    pub col_model: String,
    pub mechanism: Mechanism,
}

impl MatchSpec {
    pub fn swapped(&self) -> MatchSpec {
        MatchSpec { row_model: self.col_model.clone(), col_model: self.row_model.clone(), ..self.clone() }
    }

    pub fn log_file_name(&self) -> String {
        format!(
            "{}_{}-vs-{}_{}.jsonl",
            sanitize(&self.game),
            sanitize(&self.row_model),
            sanitize(&self.col_model),
            self.mechanism
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignManifest {
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Sampling temperature passed to live endpoints; recorded either way.
    #[serde(default)]
    pub temperature: Option<f64>,
    pub matches: Vec<MatchSpec>,
}

fn default_rounds() -> usize {
    cogh_core::store::DEFAULT_ROUNDS
}

impl CampaignManifest {
    /// Every unordered pair of distinct models on every game; a single
    /// model plays itself.
    pub fn all_pairs(games: &[String], models: &[String], mechanism: Mechanism, rounds: usize, seed: u64) -> Self {
        let mut pairs = Vec::new();
        if models.len() == 1 {
            pairs.push((models[0].clone(), models[0].clone()));
        }
        for (i, a) in models.iter().enumerate() {
            for b in &models[i + 1..] {
                pairs.push((a.clone(), b.clone()));
            }
        }
        let matches = games
            .iter()
            .flat_map(|g| {
                pairs.iter().map(move |(a, b)| MatchSpec {
                    game: g.clone(),
                    row_model: a.clone(),
                    col_model: b.clone(),
                    mechanism,
                })
            })
            .collect();
        CampaignManifest { rounds, seed, temperature: None, matches }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Matches to run: asymmetric games gain the role-swapped match for
    /// distinct models, and exact duplicates are dropped. Order is the
    /// manifest order with each swap right after its original.
    pub fn expand(&self, corpus: &Corpus) -> Result<Vec<MatchSpec>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for spec in &self.matches {
            let game = corpus.game(&spec.game)?;
            let mut push = |s: MatchSpec| {
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            };
            push(spec.clone());
            if !game.is_symmetric() && spec.row_model != spec.col_model {
                push(spec.swapped());
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    #[serde(flatten)]
    pub spec: MatchSpec,
    pub seed: u64,
    pub status: MatchStatus,
    pub rounds_completed: usize,
    pub log_file: Option<String>,
    pub error: Option<String>,
}

/// Contents of `campaign.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub rounds: usize,
    pub seed: u64,
    pub temperature: Option<f64>,
    pub pair_enumeration: String,
    pub context_policy: String,
    pub role_swap: String,
    pub mechanisms: Vec<MechanismConfig>,
    /// Rounds preceded by a chat session, per chat mechanism.
    pub chat_schedule: BTreeMap<Mechanism, Vec<usize>>,
    pub completed: usize,
    pub failed: usize,
    pub matches: Vec<MatchOutcome>,
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub out_dir: PathBuf,
    pub max_parallel: usize,
    /// Per-kind overrides; kinds not listed use `MechanismConfig::new`.
    pub mechanisms: Vec<MechanismConfig>,
}

impl HarnessConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        HarnessConfig { out_dir: out_dir.into(), max_parallel: 4, mechanisms: Vec::new() }
    }

    fn mechanism(&self, kind: Mechanism) -> MechanismConfig {
        self.mechanisms.iter().find(|m| m.kind == kind).cloned().unwrap_or_else(|| MechanismConfig::new(kind))
    }
}

#[derive(Debug)]
pub struct CampaignResult {
    pub logs: Vec<ActionLog>,
    pub report: CampaignReport,
}

/// Runs every expanded match, writing each completed log as soon as it
/// finishes and `campaign.json` at the end. Match failures are recorded,
/// not propagated; unknown games or models fail before anything runs.
pub fn run_campaign(
    manifest: &CampaignManifest,
    corpus: &Corpus,
    endpoints: &EndpointRegistry,
    cfg: &HarnessConfig,
) -> Result<CampaignResult> {
    if manifest.rounds == 0 {
        return Err(HarnessError::InvalidArgument("campaign rounds must be at least 1".into()));
    }
    if cfg.max_parallel == 0 {
        return Err(HarnessError::InvalidArgument("max_parallel must be at least 1".into()));
    }
    let specs = manifest.expand(corpus)?;
    for s in &specs {
        for model in [&s.row_model, &s.col_model] {
            if !endpoints.contains_key(model) {
                return Err(HarnessError::Config(format!("no endpoint configured for model {model:?}")));
            }
        }
    }
    let kinds: BTreeSet<Mechanism> = specs.iter().map(|s| s.mechanism).collect();
    let mechanisms: Vec<MechanismConfig> = kinds.iter().map(|&k| cfg.mechanism(k)).collect();
    for m in &mechanisms {
        m.validate()?;
    }
    let log_dir = cfg.out_dir.join("logs");
    std::fs::create_dir_all(&log_dir)?;

    let slots: Vec<Mutex<Option<(MatchOutcome, Option<ActionLog>)>>> = specs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.max_parallel.min(specs.len()).max(1);

    let run_one = |index: usize| -> (MatchOutcome, Option<ActionLog>) {
        let spec = &specs[index];
        let seed = manifest.seed.wrapping_add(index as u64);
        let outcome = |status, rounds_completed, log_file, error| MatchOutcome {
            spec: spec.clone(),
            seed,
            status,
            rounds_completed,
            log_file,
            error,
        };
        let game = corpus.game(&spec.game).expect("validated during expansion");
        let mech = cfg.mechanism(spec.mechanism);
        let prompts = PromptBundle::for_mechanism(spec.mechanism);
        let row = endpoints[&spec.row_model].as_ref();
        let col = endpoints[&spec.col_model].as_ref();
        match run_match(game, row, col, &mech, &prompts, manifest.rounds, seed) {
            Ok(log) => {
                let name = spec.log_file_name();
                match save_logs(&log_dir.join(&name), std::slice::from_ref(&log)) {
                    Ok(()) => (outcome(MatchStatus::Completed, log.records.len(), Some(format!("logs/{name}")), None), Some(log)),
                    Err(e) => (outcome(MatchStatus::Failed, log.records.len(), None, Some(e.to_string())), None),
                }
            }
            Err(HarnessError::MatchAborted { reason, partial }) => {
                log::warn!("match {} failed: {reason}", spec.log_file_name());
                (outcome(MatchStatus::Failed, partial.records.len(), None, Some(reason)), None)
            }
            Err(e) => (outcome(MatchStatus::Failed, 0, None, Some(e.to_string())), None),
        }
    };

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= specs.len() {
                    break;
                }
                let result = run_one(i);
                *slots[i].lock().unwrap_or_else(|p| p.into_inner()) = Some(result);
            });
        }
    });

    let mut logs = Vec::new();
    let mut matches = Vec::with_capacity(specs.len());
    for slot in slots {
        let (outcome, log) = slot.into_inner().unwrap_or_else(|p| p.into_inner()).expect("every match ran");
        matches.push(outcome);
        logs.extend(log);
    }
    let completed = matches.iter().filter(|m| m.status == MatchStatus::Completed).count();
    let chat_schedule = mechanisms
        .iter()
        .filter(|m| m.uses_chat())
        .map(|m| (m.kind, m.chat_schedule(manifest.rounds)))
        .collect();
    let report = CampaignReport {
        rounds: manifest.rounds,
        seed: manifest.seed,
        temperature: manifest.temperature,
        pair_enumeration: PAIR_ENUMERATION.into(),
        context_policy: CONTEXT_POLICY.into(),
        role_swap: "asymmetric games, distinct models".into(),
        mechanisms,
        chat_schedule,
        completed,
        failed: matches.len() - completed,
        matches,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(std::io::Error::from)?;
    json.push('\n');
    std::fs::write(cfg.out_dir.join("campaign.json"), json)?;
    Ok(CampaignResult { logs, report })
}
