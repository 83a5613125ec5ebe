//! Running one match between two endpoints.

use cogh_core::{ActionLog, ActionRecord, Game, Mechanism, PlayerRole};
use serde::{Deserialize, Serialize};

use crate::endpoint::{ChatEndpoint, ChatMessage, ChatRequest, Purpose};
use crate::error::{HarnessError, Result};
use crate::prompt::{parse_action, render_prompt, PromptBundle, PromptContext};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub kind: Mechanism,
    /// Most recent rounds shown in `{records}`; `None` shows all of them.
    pub memory_window: Option<usize>,
    /// Question/answer exchanges per chat session.
    pub chat_rounds: usize,
    /// Rounds between chat sessions; `None` chats once before round 1.
    pub chat_interval: Option<usize>,
    pub player_name: String,
    pub advisor_name: String,
}

impl MechanismConfig {
    pub fn new(kind: Mechanism) -> Self {
        MechanismConfig {
            kind,
            memory_window: (kind == Mechanism::MemoryPartial).then_some(10),
            chat_rounds: 2,
            chat_interval: (kind == Mechanism::ChatMemory).then_some(10),
            player_name: "Alex".into(),
            advisor_name: "Blake".into(),
        }
    }

    pub fn uses_memory(&self) -> bool {
        matches!(self.kind, Mechanism::MemoryFull | Mechanism::MemoryPartial | Mechanism::ChatMemory)
    }

    pub fn uses_chat(&self) -> bool {
        matches!(self.kind, Mechanism::Chat | Mechanism::ChatMemory)
    }

    pub fn validate(&self) -> Result<()> {
        if self.memory_window == Some(0) {
            return Err(HarnessError::InvalidArgument("memory_window must be at least 1".into()));
        }
        if self.chat_interval == Some(0) {
            return Err(HarnessError::InvalidArgument("chat_interval must be at least 1".into()));
        }
        if self.uses_chat() && self.chat_rounds == 0 {
            return Err(HarnessError::InvalidArgument(format!("{} needs chat_rounds of at least 1", self.kind)));
        }
        if self.player_name == self.advisor_name {
            return Err(HarnessError::InvalidArgument("player and advisor need distinct names".into()));
        }
        Ok(())
    }

    /// The slice of `history` a player sees in its prompt.
    pub fn visible_history<'h>(&self, history: &'h [ActionRecord]) -> &'h [ActionRecord] {
        match self.memory_window {
            Some(w) if history.len() > w => &history[history.len() - w..],
            _ => history,
        }
    }

    /// True when a chat session precedes `round` (1-based).
    pub fn chat_before(&self, round: usize) -> bool {
        self.uses_chat()
            && match self.chat_interval {
                Some(k) => (round - 1) % k == 0,
                None => round == 1,
            }
    }

    /// Rounds preceded by a chat session in a match of `rounds` rounds.
    pub fn chat_schedule(&self, rounds: usize) -> Vec<usize> {
        (1..=rounds).filter(|&r| self.chat_before(r)).collect()
    }
}

struct Seat<'a> {
    endpoint: &'a dyn ChatEndpoint,
    role: PlayerRole,
    conversation: String,
}

struct Match<'a> {
    game: &'a Game,
    mech: &'a MechanismConfig,
    prompts: &'a PromptBundle,
    rounds: usize,
    seed: u64,
}

impl Match<'_> {
    fn context<'c>(&'c self, seat: &'c Seat<'_>, round: usize, history: &'c [ActionRecord]) -> PromptContext<'c> {
        let mut ctx = PromptContext::new(self.game, seat.role);
        ctx.round = Some(round);
        ctx.total_rounds = Some(self.rounds);
        ctx.player_name = &self.mech.player_name;
        ctx.advisor_name = &self.mech.advisor_name;
        if self.mech.uses_memory() {
            ctx.history = Some(self.mech.visible_history(history));
        }
        if self.mech.uses_chat() {
            ctx.conversations = Some(&seat.conversation);
        }
        ctx
    }

    /// Sends `prompt` until `accept` succeeds or retries run out.
    fn ask<T>(
        &self,
        seat: &Seat<'_>,
        purpose: Purpose,
        round: usize,
        prompt: String,
        accept: impl Fn(&str) -> Result<T>,
    ) -> std::result::Result<T, String> {
        let retries = seat.endpoint.max_retries();
        let mut request = ChatRequest {
            purpose,
            round,
            role: seat.role,
            attempt: 0,
            seed: self.seed,
            messages: vec![ChatMessage::user(prompt)],
        };
        let mut last_error = String::new();
        for attempt in 0..=retries {
            if attempt > 0 {
                std::thread::sleep(seat.endpoint.retry_delay(attempt - 1));
            }
            request.attempt = attempt;
            match seat.endpoint.complete(&request).and_then(|text| accept(&text)) {
                Ok(v) => return Ok(v),
                Err(e) => {
                    log::warn!(
                        "{} ({:?}) round {round} {purpose:?} attempt {}: {e}",
                        seat.endpoint.model_name(),
                        seat.role,
                        attempt + 1
                    );
                    last_error = e.to_string();
                }
            }
        }
        Err(format!(
            "{} ({:?}) gave no usable {purpose:?} reply in round {round} after {} attempts: {last_error}",
            seat.endpoint.model_name(),
            seat.role,
            retries + 1
        ))
    }

    fn chat_session(&self, seat: &mut Seat<'_>, round: usize, history: &[ActionRecord]) -> std::result::Result<(), String> {
        let mut transcript = String::new();
        for _ in 0..self.mech.chat_rounds {
            seat.conversation = if transcript.is_empty() { "No messages yet.".into() } else { transcript.clone() };
            let prompt = render_prompt(&self.prompts.consultation_template, &self.context(seat, round, history))
                .map_err(|e| e.to_string())?;
            let question = self.ask(seat, Purpose::Consultation, round, prompt, |t| Ok(t.trim().to_string()))?;
            transcript.push_str(&format!("{}: {question}\n", self.mech.player_name));

            seat.conversation = transcript.clone();
            let prompt =
                render_prompt(&self.prompts.advisor_template, &self.context(seat, round, history)).map_err(|e| e.to_string())?;
            let answer = self.ask(seat, Purpose::Advisor, round, prompt, |t| Ok(t.trim().to_string()))?;
            transcript.push_str(&format!("{}: {answer}\n", self.mech.advisor_name));
        }
        seat.conversation = transcript.trim_end().to_string();
        Ok(())
    }

    fn decide(&self, seat: &Seat<'_>, round: usize, history: &[ActionRecord]) -> std::result::Result<usize, String> {
        let prompt =
            render_prompt(&self.prompts.decision_template, &self.context(seat, round, history)).map_err(|e| e.to_string())?;
        let n = self.game.action_count(seat.role);
        self.ask(seat, Purpose::Decision, round, prompt, |t| parse_action(t, n))
    }
}

/// Plays `rounds` rounds. Every prompt is a fresh single-message context;
/// history and chat transcripts reach the model only through the template.
/// Row is queried before column, and neither prompt for a round can see
/// that round's choices.
pub fn run_match(
    game: &Game,
    row: &dyn ChatEndpoint,
    col: &dyn ChatEndpoint,
    mech: &MechanismConfig,
    prompts: &PromptBundle,
    rounds: usize,
    seed: u64,
) -> Result<ActionLog> {
    if rounds == 0 {
        return Err(HarnessError::InvalidArgument("a match needs at least one round".into()));
    }
    mech.validate()?;
    prompts.validate(mech.kind)?;

    let m = Match { game, mech, prompts, rounds, seed };
    let mut seats =
        [Seat { endpoint: row, role: PlayerRole::Row, conversation: String::new() }, Seat {
            endpoint: col,
            role: PlayerRole::Column,
            conversation: String::new(),
        }];
    let mut log = ActionLog {
        game_id: game.id().to_string(),
        row_model: row.model_name().to_string(),
        col_model: col.model_name().to_string(),
        mechanism: mech.kind,
        records: Vec::with_capacity(rounds),
    };
    let abort = |reason: String, log: ActionLog| HarnessError::MatchAborted { reason, partial: Box::new(log) };

    for round in 1..=rounds {
        if mech.chat_before(round) {
            for seat in seats.iter_mut() {
                if let Err(reason) = m.chat_session(seat, round, &log.records) {
                    return Err(abort(reason, log));
                }
            }
        }
        let a = match m.decide(&seats[0], round, &log.records) {
            Ok(a) => a,
            Err(reason) => return Err(abort(reason, log)),
        };
        let b = match m.decide(&seats[1], round, &log.records) {
            Ok(b) => b,
            Err(reason) => return Err(abort(reason, log)),
        };
        log.records.push(ActionRecord::from_game(game, round, a, b));
    }
    log.validate_against(game)?;
    Ok(log)
}
