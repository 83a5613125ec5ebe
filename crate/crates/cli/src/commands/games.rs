use cogh_core::{Game, PlayerRole};

use crate::args::{Cli, GamesAction};
use crate::common::load_corpus;
use crate::error::Result;
use crate::table::{Format, Table};

pub fn run(cli: &Cli, action: &GamesAction) -> Result<()> {
    let corpus = load_corpus(cli)?;
    match action {
        GamesAction::List => {
            let mut t = Table::new(["id", "size", "symmetric"]);
            for g in corpus.games() {
                let (n, m) = g.shape();
                t.push(vec![g.id().into(), format!("{n}x{m}").into(), g.is_symmetric().to_string().into()]);
            }
            print!("{}", t.render(cli.format)?);
        }
        GamesAction::Show { id } => {
            let entry = corpus.entry(id).ok_or_else(|| cogh_core::Error::NotFound(format!("game {id:?}")))?;
            match cli.format {
                Format::Json => {
                    let v = serde_json::json!({
                        "id": entry.game.id(),
                        "row_actions": entry.game.row_actions(),
                        "col_actions": entry.game.col_actions(),
                        "row_payoff": entry.game.row_payoff(),
                        "col_payoff": entry.game.col_payoff(),
                        "symmetric": entry.game.is_symmetric(),
                        "provenance": entry.provenance,
                    });
                    println!("{}", serde_json::to_string_pretty(&v).expect("json value"));
                }
                Format::Csv => print!("{}", render_game(&entry.game, &entry.provenance)),
            }
        }
    }
    Ok(())
}

fn grid(header: &[String], rows: &[String], cell: impl Fn(usize, usize) -> String) -> String {
    let cells: Vec<Vec<String>> = (0..rows.len()).map(|i| (0..header.len()).map(|j| cell(i, j)).collect()).collect();
    let width = cells.iter().flatten().chain(header).map(String::len).max().unwrap_or(1);
    let label = rows.iter().map(String::len).max().unwrap_or(1);
    let mut out = format!("{:label$}", "");
    for h in header {
        out.push_str(&format!("  {h:>width$}"));
    }
    out.push('\n');
    for (r, row) in rows.iter().zip(&cells) {
        out.push_str(&format!("{r:label$}"));
        for c in row {
            out.push_str(&format!("  {c:>width$}"));
        }
        out.push('\n');
    }
    out
}

pub fn render_game(g: &Game, provenance: &str) -> String {
    let (n, m) = g.shape();
    let kind = if g.is_symmetric() { "symmetric" } else { "asymmetric" };
    let mut out = format!("{} ({n}x{m}, {kind})\n", g.id());
    if !provenance.is_empty() {
        out.push_str(&format!("source: {provenance}\n"));
    }
    out.push_str("\nBimatrix, cell = (row payoff, column payoff); row player picks the row:\n");
    out.push_str(&grid(g.col_actions(), g.row_actions(), |i, j| {
        let (a, b) = g.cell(i, j);
        format!("({a}, {b})")
    }));
    out.push_str("\nRow player's payoffs, own action by row:\n");
    out.push_str(&grid(g.col_actions(), g.row_actions(), |i, j| g.payoff(PlayerRole::Row, i, j).to_string()));
    out.push_str("\nColumn player's payoffs, own action by row:\n");
    out.push_str(&grid(g.row_actions(), g.col_actions(), |i, j| g.payoff(PlayerRole::Column, i, j).to_string()));
    out
}
