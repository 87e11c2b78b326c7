use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::AgentError;
use crate::board::BoardLayout;
use crate::rng::derive_seed;

use super::game::run_game;
use super::{AgentFactory, MatchConfig};

/// Head-to-head record of one unordered pairing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matchup {
    pub a: usize,
    pub b: usize,
    pub games: u32,
    /// Games won by `a` (for self-play, by the instance listed first).
    pub wins_a: u32,
    /// Games `a` played from the first seat.
    pub a_first: u32,
    pub adjudicated: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinMatrix {
    pub agents: Vec<String>,
    pub matchups: Vec<Matchup>,
    /// `rates[i][j]`: agent i's win fraction against agent j.
    pub rates: Vec<Vec<f64>>,
}

impl WinMatrix {
    pub fn rate(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.agents.iter().position(|x| x == a)?;
        let j = self.agents.iter().position(|x| x == b)?;
        Some(self.rates[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("agent,opponent,wins,games,win_rate\n");
        for m in &self.matchups {
            let (a, b) = (&self.agents[m.a], &self.agents[m.b]);
            let _ = writeln!(s, "{a},{b},{},{},{}", m.wins_a, m.games, self.rates[m.a][m.b]);
            if m.a != m.b {
                let _ = writeln!(s, "{b},{a},{},{},{}", m.games - m.wins_a, m.games, self.rates[m.b][m.a]);
            }
        }
        s
    }
}

/// Plays every pairing of the roster (self-play included) in two-player
/// games. Each pairing alternates seats game by game, so each side moves
/// first in exactly half of an even number of games.
pub fn run_tournament(layout: &BoardLayout, cfg: &MatchConfig, factory: &AgentFactory) -> Result<WinMatrix, AgentError> {
    let n = cfg.roster.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let jobs: Vec<(usize, usize, u32)> = pairs.iter().flat_map(|&(i, j)| (0..cfg.games).map(move |g| (i, j, g))).collect();
    let outcomes: Vec<Result<(bool, bool, bool), AgentError>> = jobs
        .par_iter()
        .map(|&(i, j, g)| {
            let a_first = g % 2 == 0;
            let (first, second) = if a_first { (i, j) } else { (j, i) };
            let mut agents = vec![factory(&cfg.roster[first])?, factory(&cfg.roster[second])?];
            let seed = derive_seed(cfg.seed, &[i as u64, j as u64, g as u64]);
            let r = run_game(layout, &mut agents, &[0, 1], seed, cfg.turn_cap)?;
            let a_won = (r.winner == 0) == a_first;
            Ok((a_won, a_first, r.adjudicated))
        })
        .collect();
    let mut matchups: Vec<Matchup> =
        pairs.iter().map(|&(a, b)| Matchup { a, b, games: 0, wins_a: 0, a_first: 0, adjudicated: 0 }).collect();
    for (k, out) in outcomes.into_iter().enumerate() {
        let (a_won, a_first, adj) = out?;
        let m = &mut matchups[k / cfg.games as usize];
        m.games += 1;
        m.wins_a += a_won as u32;
        m.a_first += a_first as u32;
        m.adjudicated += adj as u32;
    }
    let mut rates = vec![vec![f64::NAN; n]; n];
    for m in &matchups {
        let r = m.wins_a as f64 / m.games as f64;
        rates[m.a][m.b] = r;
        if m.a != m.b {
            rates[m.b][m.a] = 1.0 - r;
        }
    }
    Ok(WinMatrix { agents: cfg.roster.iter().map(|a| a.to_string()).collect(), matchups, rates })
}
