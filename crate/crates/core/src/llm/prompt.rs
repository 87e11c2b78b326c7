use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::{BoardLayout, Dice, GameState, PlayerId};
use crate::spots::SpotScenario;

use super::LlmError;

const RULER: &str = "--------------------";

/// Playing-style instruction injected into the prompt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Persona {
    None,
    Aggressive,
    Greedy,
    Safe,
    Unforgiving,
}

impl Persona {
    pub const ALL: [Persona; 5] = [Persona::None, Persona::Aggressive, Persona::Greedy, Persona::Safe, Persona::Unforgiving];

    pub fn label(self) -> &'static str {
        match self {
            Persona::None => "none",
            Persona::Aggressive => "aggressive",
            Persona::Greedy => "greedy",
            Persona::Safe => "safe",
            Persona::Unforgiving => "unforgiving",
        }
    }

    /// Persona instruction; `None` for the neutral condition.
    pub fn text(self) -> Option<&'static str> {
        match self {
            Persona::None => None,
            Persona::Aggressive => Some(
                "You are an aggressive Ludo player. Prioritize capturing opponent pieces whenever possible. \
                 Attacking opponents is more important than protecting your own pieces or advancing toward home.",
            ),
            Persona::Greedy => Some(
                "You are a greedy Ludo player focused on winning. Prioritize advancing your own pieces toward home \
                 above all else. Getting pieces to the finish is more important than capturing opponents.",
            ),
            Persona::Safe => Some(
                "You are a cautious Ludo player. Prioritize moving to safe squares and avoiding risky positions. \
                 Protecting your pieces from capture is more important than aggressive play.",
            ),
            Persona::Unforgiving => Some(
                "You are an unforgiving Ludo player. If an opponent has captured your piece, prioritize retaliating \
                 by capturing their pieces in return. Do not let attacks go unpunished.",
            ),
        }
    }
}

impl fmt::Display for Persona {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Persona {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Persona::ALL.into_iter().find(|p| p.label() == s).ok_or_else(|| format!("unknown persona `{s}`"))
    }
}

/// A spot rendered under one persona condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptSpec<'a> {
    pub spot: &'a SpotScenario,
    pub persona: Persona,
    pub include_history: bool,
}

impl<'a> PromptSpec<'a> {
    /// History is included whenever the spot carries one.
    pub fn new(spot: &'a SpotScenario, persona: Persona) -> Self {
        PromptSpec { spot, persona, include_history: spot.history_text.is_some() }
    }
}

/// Everything a prompt needs, independent of where the board came from.
#[derive(Clone, Debug)]
pub struct PromptView<'a> {
    pub state: &'a GameState,
    pub player: PlayerId,
    pub dice: Dice,
    pub persona: Persona,
    pub history: Option<&'a str>,
    /// Optional persona text replacing the built-in one.
    pub persona_text: Option<&'a str>,
}

pub fn render_prompt(spec: &PromptSpec<'_>, layout: &BoardLayout) -> Result<String, LlmError> {
    let state = spec.spot.state().map_err(LlmError::Config)?;
    let history = if spec.include_history {
        Some(
            spec.spot
                .history_text
                .as_deref()
                .ok_or_else(|| LlmError::Config(format!("{}: history requested but absent", spec.spot.id)))?,
        )
    } else {
        None
    };
    render_view(
        &PromptView {
            state: &state,
            player: spec.spot.llm_player_id,
            dice: spec.spot.dice,
            persona: spec.persona,
            history,
            persona_text: None,
        },
        layout,
    )
}

fn banner(out: &mut String, title: &str) {
    let _ = write!(out, "{RULER}\n{title}\n{RULER}\n");
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", items.into_iter().collect::<Vec<_>>().join(", "))
}

fn describe(layout: &BoardLayout, player: PlayerId, pos: i8) -> &'static str {
    let p = crate::board::Position(pos);
    if p.is_base() {
        "in base"
    } else if layout.is_finished(player, p) {
        "finished"
    } else if p.is_home_path() {
        "home path"
    } else {
        "main board"
    }
}

pub fn render_view(view: &PromptView<'_>, layout: &BoardLayout) -> Result<String, LlmError> {
    let persona_text = match (view.persona, view.persona_text) {
        (Persona::None, _) => None,
        (_, Some(t)) => Some(t),
        (p, None) => Some(p.text().ok_or_else(|| LlmError::Config(format!("no text for persona {p}")))?),
    };
    let me = view.player;
    let players = view.state.active_players();
    let mut s = String::new();

    let _ = write!(
        s,
        "You are an AI agent playing Ludo as Player {me}. Your job is to choose exactly ONE of your token indices.\n\
         \n\
         IMPORTANT:\n\
         - You must output ONLY a token index (0,1,2,3) followed by \" | \" and a one-line reason.\n\
         - Do NOT output board positions or text without the token index.\n\
         - The token index MUST refer to one of your own 4 tokens (0-3).\n\
         - If you output anything else, it is invalid.\n\
         \n"
    );

    banner(&mut s, "BOARD & POSITION SYSTEM");
    s.push_str(
        "1. Main circular board: 52 squares (0-51).\n\
         2. Each player has a fixed START square.\n\
         3. Tokens move forward relative to START.\n\
         4. After one full lap (52 steps), tokens enter that player's HOME PATH.\n\
         5. Each player has a UNIQUE HOME PATH (>= 52).\n\
         6. Final home position is HOME_END.\n\
         7. Tokens must land EXACTLY on HOME_END.\n\
         8. Overshooting HOME_END is illegal.\n\n",
    );

    banner(&mut s, "TOKEN STATES");
    s.push_str(
        "- Position = -1  : Token is in base\n\
         - Position 0-51  : Token is on main board\n\
         - Position >= 52 : Token is in home path\n\
         - HOME_END       : Token has finished\n\n",
    );

    banner(&mut s, "GAME RULES");
    s.push_str(
        "1.  All tokens start in base (-1).\n\
         2.  Leave base ONLY on dice = 6.\n\
         3.  Leaving base places token at START square.\n\
         4.  Tokens move forward by dice value.\n\
         5.  No stacking (one token per square).\n\
         6.  CAPTURE: land on opponent on non-safe square -> opponent sent to base (-1).\n\
         7.  Captures NEVER happen on safe squares.\n\
         8.  Safe squares protect tokens from capture.\n\
         9.  Rolling 6 grants an extra turn.\n\
         10. No legal move -> turn skipped.\n\
         11. First to move ALL tokens to HOME_END wins.\n\
         12. Home paths are private to each player.\n\n",
    );

    banner(&mut s, "CURRENT GAME STATE");
    let _ = writeln!(s, "Number of players: {}", players.len());
    let _ = writeln!(s, "Active player ids: {}", list(players.iter().map(|p| p.to_string())));
    let _ = writeln!(s, "Dice rolled: {}", view.dice);
    let _ = writeln!(s, "\nYour token positions (Player {me}):");
    for (i, pos) in view.state.tokens(me).iter().enumerate() {
        let _ = writeln!(s, "Token {i}: {} ({})", pos.0, describe(layout, me, pos.0));
    }
    s.push_str("\nOther players' token positions:\n");
    for &p in players.iter().filter(|&&p| p != me) {
        let _ = writeln!(s, "Player {p}: {}", list(view.state.tokens(p).iter().map(|x| x.0.to_string())));
    }
    let _ = writeln!(s, "\nYour start square: {}", layout.start_square(me).0);
    let _ = writeln!(s, "Your home path: {} to {}", layout.home_start[me as usize], layout.home_end[me as usize]);
    let _ = writeln!(s, "Safe squares: {}", list(layout.safe_squares.iter().map(|x| x.to_string())));
    let info: Vec<String> = players
        .iter()
        .map(|&p| {
            format!(
                "P{p} start={} home={}-{}",
                layout.start_square(p).0,
                layout.home_start[p as usize],
                layout.home_end[p as usize]
            )
        })
        .collect();
    let _ = writeln!(s, "Player path ranges: {}", info.join("; "));

    if let Some(text) = persona_text {
        s.push('\n');
        banner(&mut s, "PERSONA");
        let _ = writeln!(s, "You must play with this persona style:\n{text}");
    }
    if let Some(text) = view.history {
        s.push('\n');
        banner(&mut s, "HISTORY / CONTEXT");
        let _ = writeln!(s, "{text}");
    }

    s.push_str("\nChoose the BEST legal move to win.\n\n");
    banner(&mut s, "OUTPUT FORMAT (STRICT)");
    s.push_str("<int> | <one line reason>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spots::load_spots;

    const L: BoardLayout = BoardLayout::standard();

    fn fig9a() -> SpotScenario {
        let text = r#"[{"id": "cvs_2p_001", "scenario": "capture_vs_safe", "players": [0, 1],
            "llm_player_id": 1, "current_player": 1, "dice": 6,
            "tokens": {"0": [49, -1, -1, -1], "1": [43, 41, -1, -1]}, "note": ""}]"#;
        load_spots(&L, text).unwrap().remove(0)
    }

    #[test]
    fn neutral_has_no_persona_or_history() {
        let spot = fig9a();
        let p = render_prompt(&PromptSpec::new(&spot, Persona::None), &L).unwrap();
        assert!(!p.contains("PERSONA"));
        assert!(!p.contains("HISTORY"));
        assert!(p.contains("Dice rolled: 6"));
        assert!(p.contains("Player 0: [49, -1, -1, -1]"));
    }

    #[test]
    fn sections_in_order() {
        let spot = fig9a();
        let p = render_prompt(&PromptSpec::new(&spot, Persona::Safe), &L).unwrap();
        let order = [
            "BOARD & POSITION SYSTEM",
            "TOKEN STATES",
            "GAME RULES",
            "CURRENT GAME STATE",
            "PERSONA",
            "Choose the BEST legal move to win.",
            "OUTPUT FORMAT (STRICT)",
        ];
        let idx: Vec<usize> = order.iter().map(|t| p.find(t).unwrap()).collect();
        assert!(idx.windows(2).all(|w| w[0] < w[1]), "{idx:?}");
    }

    #[test]
    fn aggressive_sentence_present() {
        let spot = fig9a();
        let p = render_prompt(&PromptSpec::new(&spot, Persona::Aggressive), &L).unwrap();
        assert!(p.contains("You must play with this persona style:\nYou are an aggressive Ludo player"));
    }

    #[test]
    fn rendering_is_pure() {
        let spot = fig9a();
        let spec = PromptSpec::new(&spot, Persona::Greedy);
        assert_eq!(render_prompt(&spec, &L).unwrap(), render_prompt(&spec, &L).unwrap());
    }

    #[test]
    fn history_without_text_is_config_error() {
        let spot = fig9a();
        let spec = PromptSpec { spot: &spot, persona: Persona::None, include_history: true };
        assert!(matches!(render_prompt(&spec, &L), Err(LlmError::Config(_))));
    }

    #[test]
    fn persona_labels_round_trip() {
        for p in Persona::ALL {
            assert_eq!(p.label().parse::<Persona>().unwrap(), p);
            assert_eq!(p.text().is_none(), p == Persona::None);
        }
    }
}
