//! The fair-coin gambler's ruin: the discrete skeleton of the collapse
//! mechanism. Absorption probabilities and expected game lengths come
//! from the absorbing-Markov-chain linear system (solved directly, so the
//! closed forms `a/(a+b)` and `a*b` stay independent checks rather than
//! assumptions), plus a seeded Monte Carlo of actual games.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::noise::{derive_stream_seed, rng_for};
use crate::{Error, Result};

/// Two players with `alice + bob` pennies on the table; each fair flip
/// moves one penny, and the game ends when either side holds all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RuinGame {
    pub alice: u64,
    pub bob: u64,
}

impl RuinGame {
    pub fn new(alice: u64, bob: u64) -> Result<Self> {
        if alice + bob == 0 {
            return Err(Error::InvalidGame { alice, bob });
        }
        Ok(Self { alice, bob })
    }

    pub fn total(&self) -> u64 {
        self.alice + self.bob
    }
}

/// Solves a tridiagonal system with constant coefficients
/// `sub * x[k-1] + diag * x[k] + sup * x[k+1] = rhs[k]` (Thomas
/// algorithm). `rhs` is consumed as workspace.
fn solve_tridiagonal(sub: f64, diag: f64, sup: f64, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    if n == 0 {
        return rhs;
    }
    let mut scratch = vec![0.0f64; n];
    scratch[0] = sup / diag;
    rhs[0] /= diag;
    for k in 1..n {
        let denom = diag - sub * scratch[k - 1];
        scratch[k] = sup / denom;
        rhs[k] = (rhs[k] - sub * rhs[k - 1]) / denom;
    }
    for k in (0..n - 1).rev() {
        rhs[k] -= scratch[k] * rhs[k + 1];
    }
    rhs
}

/// Probability that Alice ends up with every penny, from the linear
/// system `u_k = (u_{k-1} + u_{k+1}) / 2` with absorbing boundaries
/// `u_0 = 0`, `u_N = 1`. Matches `a / (a + b)` to solver precision.
pub fn ruin_probability_exact(game: &RuinGame) -> Result<f64> {
    if game.total() == 0 {
        return Err(Error::InvalidGame {
            alice: game.alice,
            bob: game.bob,
        });
    }
    if game.alice == 0 {
        return Ok(0.0);
    }
    if game.bob == 0 {
        return Ok(1.0);
    }
    let n = game.total() as usize;
    // Interior states 1..n-1; only the top boundary feeds the RHS.
    let mut rhs = vec![0.0f64; n - 1];
    rhs[n - 2] = 0.5;
    let u = solve_tridiagonal(-0.5, 1.0, -0.5, rhs);
    Ok(u[game.alice as usize - 1])
}

/// Expected number of flips until someone is ruined, from the
/// fundamental-matrix system `t_k = 1 + (t_{k-1} + t_{k+1}) / 2` with
/// `t_0 = t_N = 0`. Equals `a * b` for the fair coin.
pub fn expected_length_exact(game: &RuinGame) -> Result<f64> {
    if game.total() == 0 {
        return Err(Error::InvalidGame {
            alice: game.alice,
            bob: game.bob,
        });
    }
    if game.alice == 0 || game.bob == 0 {
        return Ok(0.0);
    }
    let n = game.total() as usize;
    let rhs = vec![1.0f64; n - 1];
    let t = solve_tridiagonal(-0.5, 1.0, -0.5, rhs);
    Ok(t[game.alice as usize - 1])
}

/// Monte Carlo outcome of `n_games` independent games.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RuinStats {
    pub n_games: u64,
    pub alice_wins: u64,
    pub win_frequency: f64,
    pub mean_length: f64,
}

/// Plays one game to absorption; returns whether Alice won and the number
/// of flips. Pure function of `(game, seed, index)` via the derived
/// per-game stream.
pub fn play_game(game: &RuinGame, seed: u64, index: u64) -> (bool, u64) {
    let mut rng = rng_for(derive_stream_seed(seed, index), 0);
    let total = game.total();
    let mut alice = game.alice;
    let mut flips = 0u64;
    while alice > 0 && alice < total {
        if rng.random::<bool>() {
            alice += 1;
        } else {
            alice -= 1;
        }
        flips += 1;
    }
    (alice == total, flips)
}

/// Runs `n_games` seeded games sequentially. Per-game streams mean a
/// parallel driver summing the same per-game results reproduces this
/// exactly.
pub fn ruin_simulate(game: &RuinGame, n_games: u64, seed: u64) -> Result<RuinStats> {
    if game.total() == 0 {
        return Err(Error::InvalidGame {
            alice: game.alice,
            bob: game.bob,
        });
    }
    if n_games == 0 {
        return Err(Error::InvalidInput {
            what: "n_games must be >= 1",
        });
    }
    let mut wins = 0u64;
    let mut total_flips = 0u64;
    for i in 0..n_games {
        let (alice_won, flips) = play_game(game, seed, i);
        if alice_won {
            wins += 1;
        }
        total_flips += flips;
    }
    Ok(tally_games(n_games, wins, total_flips))
}

/// Folds per-game totals into the summary statistics; shared by the
/// sequential and parallel drivers.
pub fn tally_games(n_games: u64, wins: u64, total_flips: u64) -> RuinStats {
    RuinStats {
        n_games,
        alice_wins: wins,
        win_frequency: wins as f64 / n_games as f64,
        mean_length: total_flips as f64 / n_games as f64,
    }
}
