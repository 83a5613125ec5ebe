//! Prompt templates, placeholder rendering and response parsing.
//!
//! Placeholders are `{name}` with `name` made of lowercase letters, digits
//! and underscores. A line that mentions any per-outcome placeholder
//! (`{i}`, `{j}`, `{payoff_ij_0}`, `{payoff_ij_1}`) is emitted once per
//! outcome, own action outermost. Payoffs are always from the acting
//! player's perspective: `{payoff_ij_0}` is the player's own payoff.

use cogh_core::{ActionRecord, Game, Mechanism, PlayerRole};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const OUTCOME_KEYS: [&str; 4] = ["i", "j", "payoff_ij_0", "payoff_ij_1"];
const SCALAR_KEYS: [&str; 8] = ["n", "m", "rounds", "round", "records", "conversations", "player_name", "advisor_name"];

const RULES: &str = "## Game Rules
You have {n} actions, numbered 1 to {n}. Your opponent has {m} actions, numbered 1 to {m}.
Both of you choose at the same time, without seeing the other's choice. The game is repeated for {rounds} rounds.
There are {n} x {m} possible outcomes:
- If you choose action {i} and your opponent chooses action {j}, you receive {payoff_ij_0} and your opponent receives {payoff_ij_1}.
";

const RECORDS: &str = "## Historical Game Records
{records}
";

const CONVERSATIONS: &str = "## Conversations
{conversations}
";

const DECIDE: &str = "## Question
This is round {round} of {rounds}. Which action do you choose? Reply with a single number between 1 and {n}.

## Your Choice
";

fn decision(memory: bool, chat: bool) -> String {
    let mut s = String::from("You are {player_name}, a player in a repeated two-player game.\n\n");
    s.push_str(RULES);
    s.push('\n');
    if memory {
        s.push_str(RECORDS);
        s.push('\n');
    }
    if chat {
        s.push_str("Earlier you talked the game over with your advisor {advisor_name}. Weigh that discussion against your own reasoning.\n");
        s.push_str(CONVERSATIONS);
        s.push('\n');
    }
    s.push_str(DECIDE);
    s
}

fn consultation(memory: bool) -> String {
    let mut s = String::from(
        "You are {player_name}, a player in a repeated two-player game. Before choosing, you may consult your advisor {advisor_name}.\n\n",
    );
    s.push_str(RULES);
    s.push('\n');
    if memory {
        s.push_str(RECORDS);
        s.push('\n');
    }
    s.push_str(CONVERSATIONS);
    s.push_str(
        "\n## Question
Ask {advisor_name} one question about the rules, your opponent, or how to play. Reply with the question only.
",
    );
    s
}

fn advisor(memory: bool) -> String {
    let mut s = String::from(
        "You are {advisor_name}, a thoughtful and helpful advisor. Your friend {player_name} is playing the repeated two-player game below and asked for your help. Advise {player_name} in their own interest.\n\nThe rules as {player_name} sees them:\n\n",
    );
    s.push_str(&RULES.replace("You have", "{player_name} has").replace("you receive", "{player_name} receives"));
    s.push('\n');
    if memory {
        s.push_str(RECORDS);
        s.push('\n');
    }
    s.push_str(CONVERSATIONS);
    s.push_str(
        "\n## Question
Answer {player_name}'s latest question. Reply with your answer only.
",
    );
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub decision_template: String,
    pub consultation_template: String,
    pub advisor_template: String,
}

impl PromptBundle {
    pub fn for_mechanism(kind: Mechanism) -> Self {
        let memory = matches!(kind, Mechanism::MemoryFull | Mechanism::MemoryPartial | Mechanism::ChatMemory);
        let chat = matches!(kind, Mechanism::Chat | Mechanism::ChatMemory);
        PromptBundle {
            decision_template: decision(memory, chat),
            consultation_template: consultation(kind == Mechanism::ChatMemory),
            advisor_template: advisor(kind == Mechanism::ChatMemory),
        }
    }

    /// Checks that the templates the mechanism uses carry the placeholders it needs.
    pub fn validate(&self, kind: Mechanism) -> Result<()> {
        let need = |tpl: &str, which: &str, keys: &[&str]| -> Result<()> {
            let found = placeholders(tpl);
            for k in keys {
                if !found.iter().any(|f| f == k) {
                    return Err(HarnessError::Template(format!("{which} template for {kind} lacks {{{k}}}")));
                }
            }
            for f in &found {
                if !OUTCOME_KEYS.contains(&f.as_str()) && !SCALAR_KEYS.contains(&f.as_str()) {
                    return Err(HarnessError::Template(format!("{which} template uses unknown placeholder {{{f}}}")));
                }
            }
            Ok(())
        };
        let mut decision_keys = vec!["n", "payoff_ij_0", "payoff_ij_1"];
        if matches!(kind, Mechanism::MemoryFull | Mechanism::MemoryPartial | Mechanism::ChatMemory) {
            decision_keys.push("records");
        }
        if matches!(kind, Mechanism::Chat | Mechanism::ChatMemory) {
            decision_keys.push("conversations");
            need(&self.consultation_template, "consultation", &["conversations"])?;
            need(&self.advisor_template, "advisor", &["conversations"])?;
        }
        need(&self.decision_template, "decision", &decision_keys)
    }
}

/// Values available to a template. `None` fields are unbound; a template
/// that references an unbound placeholder fails to render.
#[derive(Debug, Clone, Copy)]
pub struct PromptContext<'a> {
    pub game: &'a Game,
    pub role: PlayerRole,
    pub round: Option<usize>,
    pub total_rounds: Option<usize>,
    pub history: Option<&'a [ActionRecord]>,
    pub conversations: Option<&'a str>,
    pub player_name: &'a str,
    pub advisor_name: &'a str,
}

impl<'a> PromptContext<'a> {
    pub fn new(game: &'a Game, role: PlayerRole) -> Self {
        PromptContext {
            game,
            role,
            round: None,
            total_rounds: None,
            history: None,
            conversations: None,
            player_name: "Alex",
            advisor_name: "Blake",
        }
    }
}

/// One history line per record, from the acting player's perspective.
pub fn render_records(history: &[ActionRecord], role: PlayerRole) -> String {
    if history.is_empty() {
        return "No rounds have been played yet.".to_string();
    }
    history
        .iter()
        .map(|r| {
            let (own, opp, own_pay, opp_pay) = match role {
                PlayerRole::Row => (r.row_action, r.col_action, r.row_payoff, r.col_payoff),
                PlayerRole::Column => (r.col_action, r.row_action, r.col_payoff, r.row_payoff),
            };
            format!(
                "Round {}: you chose action {}, your opponent chose action {}; you received {}, your opponent received {}.",
                r.round,
                own + 1,
                opp + 1,
                own_pay,
                opp_pay
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Placeholder names in order of appearance (with repeats).
pub fn placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    scan(template, |piece| {
        if let Piece::Key(k) = piece {
            out.push(k.to_string());
        }
    });
    out
}

enum Piece<'t> {
    Text(&'t str),
    Key(&'t str),
}

fn scan<'t>(s: &'t str, mut f: impl FnMut(Piece<'t>)) {
    let mut rest = s;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let len = after.find(|c: char| !(c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')).unwrap_or(after.len());
        if len > 0 && after[len..].starts_with('}') {
            f(Piece::Text(&rest[..open]));
            f(Piece::Key(&after[..len]));
            rest = &after[len + 1..];
        } else {
            f(Piece::Text(&rest[..=open]));
            rest = after;
        }
    }
    f(Piece::Text(rest));
}

fn fill(line: &str, lookup: &dyn Fn(&str) -> Result<String>) -> Result<String> {
    let mut out = String::with_capacity(line.len());
    let mut err = None;
    scan(line, |piece| match piece {
        Piece::Text(t) => out.push_str(t),
        Piece::Key(k) => match lookup(k) {
            Ok(v) => out.push_str(&v),
            Err(e) => {
                err.get_or_insert(e);
            }
        },
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn render_prompt(template: &str, ctx: &PromptContext<'_>) -> Result<String> {
    let game = ctx.game;
    let role = ctx.role;
    let n = game.action_count(role);
    let m = game.action_count(role.opponent());
    let unbound = |k: &str| HarnessError::Template(format!("placeholder {{{k}}} has no binding"));

    let scalar = |k: &str| -> Result<String> {
        match k {
            "n" => Ok(n.to_string()),
            "m" => Ok(m.to_string()),
            "rounds" => ctx.total_rounds.map(|t| t.to_string()).ok_or_else(|| unbound(k)),
            "round" => ctx.round.map(|t| t.to_string()).ok_or_else(|| unbound(k)),
            "records" => ctx.history.map(|h| render_records(h, role)).ok_or_else(|| unbound(k)),
            "conversations" => ctx.conversations.map(str::to_string).ok_or_else(|| unbound(k)),
            "player_name" => Ok(ctx.player_name.to_string()),
            "advisor_name" => Ok(ctx.advisor_name.to_string()),
            _ if OUTCOME_KEYS.contains(&k) => Err(unbound(k)),
            _ => Err(HarnessError::Template(format!("unknown placeholder {{{k}}}"))),
        }
    };

    let mut lines = Vec::new();
    for line in template.split('\n') {
        let keys = placeholders(line);
        if keys.iter().any(|k| OUTCOME_KEYS.contains(&k.as_str())) {
            for i in 0..n {
                for j in 0..m {
                    let outcome = |k: &str| -> Result<String> {
                        match k {
                            "i" => Ok((i + 1).to_string()),
                            "j" => Ok((j + 1).to_string()),
                            "payoff_ij_0" => Ok(game.payoff(role, i, j).to_string()),
                            "payoff_ij_1" => Ok(game.payoff(role.opponent(), j, i).to_string()),
                            _ => scalar(k),
                        }
                    };
                    lines.push(fill(line, &outcome)?);
                }
            }
        } else {
            lines.push(fill(line, &scalar)?);
        }
    }
    Ok(lines.join("\n"))
}

/// Extracts the last standalone integer in `1..=n` and returns it 0-based.
///
/// An integer is standalone when it is not glued to letters, digits,
/// underscores or a decimal point.
pub fn parse_action(response: &str, n: usize) -> Result<usize> {
    let bytes = response.as_bytes();
    let glued = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut last = None;
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let before = start.checked_sub(1).map(|p| bytes[p]);
        let after = bytes.get(i).copied();
        let decimal_before = before == Some(b'.') && start >= 2 && bytes[start - 2].is_ascii_digit();
        let decimal_after = after == Some(b'.') && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit());
        let negative = before == Some(b'-');
        if before.is_some_and(glued) || after.is_some_and(glued) || decimal_before || decimal_after || negative {
            continue;
        }
        if let Ok(v) = response[start..i].parse::<usize>() {
            if (1..=n).contains(&v) {
                last = Some(v - 1);
            }
        }
    }
    last.ok_or_else(|| HarnessError::ParseFailure { response: response.to_string(), n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogh_core::Corpus;

    fn game(id: &str) -> Game {
        Corpus::builtin().game(id).unwrap().clone()
    }

    #[test]
    fn baseline_has_one_line_per_outcome() {
        let g = game("paper-01");
        let tpl = PromptBundle::for_mechanism(Mechanism::Baseline).decision_template;
        let mut ctx = PromptContext::new(&g, PlayerRole::Row);
        ctx.round = Some(1);
        ctx.total_rounds = Some(30);
        let out = render_prompt(&tpl, &ctx).unwrap();
        let outcomes: Vec<_> = out.lines().filter(|l| l.starts_with("- If you choose")).collect();
        assert_eq!(outcomes.len(), 4);
        assert!(outcomes[1].contains("action 1 and your opponent chooses action 2, you receive 5 and your opponent receives 0"));
        assert!(!out.contains("Historical Game Records"));
        assert!(!out.contains('{'));
    }

    #[test]
    fn payoffs_follow_the_acting_player() {
        let g = game("paper-15");
        let tpl = "{i}/{j}: {payoff_ij_0} vs {payoff_ij_1}";
        let out = render_prompt(tpl, &PromptContext::new(&g, PlayerRole::Column)).unwrap();
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines.len(), 9);
        // column plays its action 1 against row action 2: column payoff 3, row payoff 4
        assert_eq!(lines[1], "1/2: 3 vs 4");
    }

    #[test]
    fn unbound_and_unknown_placeholders() {
        let g = game("paper-01");
        let ctx = PromptContext::new(&g, PlayerRole::Row);
        let err = render_prompt("Play for {rounds} rounds", &ctx).unwrap_err();
        assert!(matches!(err, HarnessError::Template(ref m) if m.contains("rounds")), "{err}");
        assert!(render_prompt("{mystery}", &ctx).is_err());
        assert_eq!(render_prompt("JSON {\"a\": 1} {Not}", &ctx).unwrap(), "JSON {\"a\": 1} {Not}");
    }

    #[test]
    fn bundles_validate() {
        for kind in Mechanism::ALL {
            PromptBundle::for_mechanism(kind).validate(kind).unwrap();
        }
        let baseline = PromptBundle::for_mechanism(Mechanism::Baseline);
        assert!(baseline.validate(Mechanism::MemoryFull).is_err());
        assert!(baseline.validate(Mechanism::Chat).is_err());
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_action("I choose 2", 3).unwrap(), 1);
        assert_eq!(parse_action("Option 3 is tempting but I pick 1.", 3).unwrap(), 0);
        assert!(matches!(parse_action("I refuse to answer", 3), Err(HarnessError::ParseFailure { .. })));
        assert!(parse_action("I pick 7", 3).is_err());
        assert!(parse_action("take 2.5 or a2 or 2nd", 3).is_err());
        assert_eq!(parse_action("**2**", 2).unwrap(), 1);
        assert_eq!(parse_action("Answer:\n1", 2).unwrap(), 0);
        assert!(parse_action("-1", 2).is_err());
    }
}
