use cogh_core::store::{save_logs, synthesize_log};
use cogh_core::GeneratorSpec;

use crate::args::{Cli, SimulateArgs};
use crate::common::{load_corpus, sanitize};
use crate::error::{CliError, Result};

pub fn run(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let corpus = load_corpus(cli)?;
    let game = corpus.game(&args.game)?;
    if args.rounds == 0 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    let row = GeneratorSpec::parse(&args.row, cli.k_hat)?;
    let col = GeneratorSpec::parse(&args.col, cli.k_hat)?;
    let mut log = synthesize_log(game, &row, &col, args.rounds, cli.seed)?;
    log.mechanism = args.mechanism;
    let path = match &args.output {
        Some(p) => p.clone(),
        None => cli.out_dir.join("logs").join(format!(
            "{}_{}-vs-{}_{}_seed{}.jsonl",
            sanitize(game.id()),
            sanitize(&log.row_model),
            sanitize(&log.col_model),
            log.mechanism,
            cli.seed
        )),
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    save_logs(&path, std::slice::from_ref(&log))?;
    println!("{}", path.display());
    Ok(())
}
