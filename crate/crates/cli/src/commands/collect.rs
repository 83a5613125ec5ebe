use std::sync::Arc;

use cogh_harness::endpoint::EndpointsFile;
use cogh_harness::{
    run_campaign, CampaignManifest, ChatEndpoint, EndpointRegistry, HarnessConfig, HttpEndpoint, MockFixture,
};

use crate::args::{Cli, CollectArgs};
use crate::common::load_corpus;
use crate::error::{CliError, Result};

pub fn run(cli: &Cli, args: &CollectArgs) -> Result<()> {
    let corpus = load_corpus(cli)?;
    let mut registry: EndpointRegistry = EndpointRegistry::new();
    let default_models: Vec<String> = match (&args.mock, &args.endpoints) {
        (Some(path), None) => {
            let fixture = MockFixture::load(path)?;
            let models = if args.models.is_empty() { vec!["mock-a".into(), "mock-b".into()] } else { args.models.clone() };
            for m in &models {
                registry.insert(m.clone(), Arc::new(fixture.endpoint(m)) as Arc<dyn ChatEndpoint>);
            }
            models
        }
        (None, Some(path)) => {
            let file = EndpointsFile::load(path)?;
            let archive = cli.out_dir.join("archive");
            for mut cfg in file.endpoints {
                if args.temperature.is_some() {
                    cfg.temperature = args.temperature;
                }
                let name = cfg.model_name.clone();
                // fails here, before any request, when the key variable is unset
                let mut ep = HttpEndpoint::new(cfg)?;
                if args.archive {
                    ep = ep.with_archive(&archive)?;
                }
                registry.insert(name, Arc::new(ep));
            }
            registry.keys().cloned().collect()
        }
        _ => return Err(CliError::Usage("collect needs exactly one of --mock or --endpoints".into())),
    };

    let mut manifest = match &args.manifest {
        Some(p) => CampaignManifest::load(p)?,
        None => {
            let games: Vec<String> = if args.games == "all" {
                let collection: Vec<String> = corpus.collection_games().map(|g| g.id().to_string()).collect();
                if collection.is_empty() {
                    corpus.games().map(|g| g.id().to_string()).collect()
                } else {
                    collection
                }
            } else {
                args.games.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            };
            let models = if args.models.is_empty() { default_models } else { args.models.clone() };
            CampaignManifest::all_pairs(&games, &models, args.mechanism, args.rounds, cli.seed)
        }
    };
    if args.temperature.is_some() {
        manifest.temperature = args.temperature;
    }
    if manifest.matches.is_empty() {
        return Err(CliError::Usage("the campaign has no matches".into()));
    }

    let mut cfg = HarnessConfig::new(&cli.out_dir);
    cfg.max_parallel = args.max_parallel;
    let result = run_campaign(&manifest, &corpus, &registry, &cfg)?;
    let report = &result.report;
    let pairs: usize = result.logs.iter().map(|l| l.records.len()).sum();
    println!(
        "{} matches completed, {} failed, {pairs} action pairs; outcomes in {}",
        report.completed,
        report.failed,
        cli.out_dir.join("campaign.json").display()
    );
    for m in report.matches.iter().filter(|m| m.error.is_some()) {
        eprintln!("failed {}: {}", m.spec.log_file_name(), m.error.as_deref().unwrap_or(""));
    }
    Ok(())
}
