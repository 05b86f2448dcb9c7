//! Sure/limit-sure solving: the SAS region becomes an absorbing target,
//! Player 0 must surely win the sure condition, and must reach the target
//! almost surely from within the sure region. Witnesses play the reaching
//! strategy for a bounded number of own moves, then a sure strategy.

use num_traits::{One, Zero};

use crate::analysis::{arena_satisfies_sure, min_reach_probability};
use crate::chain::arena;
use crate::error::{Error, Result};
use crate::game::{
    CombinedObjective, ConfigSet, FiniteMemoryStrategy, Game, MemorylessStrategy, Mode, Owner, Player, Priorities, Prob,
};
use crate::parity::solve_parity;
use crate::sas_game::solve_sas_game_fm;

/// Largest horizon tried by [`SlsSolution::horizon`].
pub const HORIZON_CAP: usize = 10_000;

/// Region won surely with sure priorities, random configurations adversarial.
pub fn sure_winning_region(game: &Game, alpha_s: &Priorities) -> Result<(ConfigSet, MemorylessStrategy)> {
    let sol = solve_parity(&game.random_as_adversary(), alpha_s)?;
    Ok((sol.w0, sol.strat0))
}

/// Configurations from which Player 0 reaches `target` with probability 1,
/// with a strategy that always moves to a successor of smaller rank.
pub fn almost_sure_reach(game: &Game, target: &ConfigSet) -> (ConfigSet, MemorylessStrategy) {
    let n = game.len();
    let mut z = vec![true; n];
    loop {
        // Least fixpoint Y inside z, with the layer each configuration enters.
        let mut rank: Vec<Option<usize>> = (0..n).map(|v| target.contains(v).then_some(0)).collect();
        let mut layer = 0;
        loop {
            layer += 1;
            let y: Vec<bool> = rank.iter().map(Option::is_some).collect();
            let add: Vec<usize> = (0..n)
                .filter(|v| z[*v] && !y[*v])
                .filter(|&v| {
                    let s = game.succ(v);
                    match game.owner(v) {
                        Owner::Player0 => s.iter().any(|w| y[*w]),
                        Owner::Player1 => s.iter().all(|w| y[*w]),
                        Owner::Random => s.iter().all(|w| z[*w]) && s.iter().any(|w| y[*w]),
                    }
                })
                .collect();
            if add.is_empty() {
                break;
            }
            for v in add {
                rank[v] = Some(layer);
            }
        }
        let next: Vec<bool> = rank.iter().map(Option::is_some).collect();
        if next == z {
            let mut sigma = MemorylessStrategy::new(Player::Zero, n);
            for v in game.owned_by(Owner::Player0) {
                let r = rank[v].filter(|r| *r > 0);
                let w = match r {
                    Some(r) => game.succ(v).iter().copied().find(|w| rank[*w].is_some_and(|q| q < r)),
                    None => None,
                };
                sigma.set(v, w.unwrap_or(game.succ(v)[0]));
            }
            return (ConfigSet::from_mask(z), sigma);
        }
        z = next;
    }
}

/// Result of [`solve_sls`].
#[derive(Clone, Debug)]
pub struct SlsSolution {
    /// Limit-sure region.
    pub z: ConfigSet,
    /// Finite-memory SAS region, the absorbing target.
    pub a: ConfigSet,
    /// Sure region of the game with `a` absorbing.
    pub x: ConfigSet,
    sas: FiniteMemoryStrategy,
    reach: MemorylessStrategy,
    sure: MemorylessStrategy,
    game: Game,
    obj: CombinedObjective,
}

/// A witness strategy for one `epsilon`.
#[derive(Clone, Debug)]
pub struct SlsStrategy {
    /// Number of own moves played with the reaching strategy.
    pub horizon: usize,
    pub strategy: FiniteMemoryStrategy,
    /// Exact worst-case probability of reaching the SAS region, per start configuration of `z`.
    pub reach: Vec<(usize, Prob)>,
}

/// Solves the sure/limit-sure problem for finite-memory strategies.
pub fn solve_sls(game: &Game, w: &CombinedObjective) -> Result<SlsSolution> {
    if w.mode != Mode::Sls {
        return Err(Error::Objective("expected a sure/limit-sure objective".into()));
    }
    let sas_obj = CombinedObjective::sas(w.sure.clone(), w.secondary.clone())?;
    let sas = solve_sas_game_fm(game, &sas_obj)?;
    let a = sas.w0.clone();
    let mut absorbing = game.clone();
    let mut sure_prio = w.sure.clone();
    for v in a.iter() {
        absorbing.set_owner(v, Owner::Player0);
        absorbing.set_edges(v, vec![v], Vec::new());
        sure_prio.0[v] = 0;
    }
    let (x, sure) = sure_winning_region(&absorbing, &sure_prio)?;
    let mut within = absorbing.clone();
    for v in x.complement().iter() {
        within.set_owner(v, Owner::Player0);
        within.set_edges(v, vec![v], Vec::new());
    }
    let (z, reach) = almost_sure_reach(&within, &a.intersection(&x));
    Ok(SlsSolution { z, a, x, sas: sas.strat0, reach, sure, game: game.clone(), obj: w.clone() })
}

impl SlsSolution {
    /// The strategy that counts own moves up to `n + 1`, plays the reaching
    /// strategy on the first `n` of them, then the sure strategy, and
    /// switches to the SAS strategy on entering `a`.
    ///
    /// Memory `0..=n+1` is the counter; `n + 2 + m` is SAS memory `m`.
    pub fn strategy_with_horizon(&self, n: usize) -> FiniteMemoryStrategy {
        let g = &self.game;
        let off = n + 2;
        let mem = off + self.sas.memory;
        let mut s = FiniteMemoryStrategy::new(Player::Zero, mem, g.len());
        s.initial = 0;
        for m in 0..mem {
            for v in g.configs() {
                s.update[m][v] = if m >= off {
                    off + self.sas.update[m - off][v]
                } else if self.a.contains(v) {
                    off + self.sas.update[self.sas.initial][v]
                } else if g.owner(v) == Owner::Player0 {
                    (m + 1).min(n + 1)
                } else {
                    m
                };
            }
            for v in g.owned_by(Owner::Player0) {
                let out = if m >= off {
                    self.sas.output[m - off][v]
                } else if m.max(1) <= n && self.z.contains(v) {
                    self.reach.choice(v)
                } else {
                    self.sure.choice(v)
                };
                // Absorbing stand-ins are not edges of the input game.
                s.output[m][v] = out.filter(|w| g.succ(v).contains(w));
            }
        }
        s.completed(g)
    }

    /// Exact worst-case probability of reaching `a` from `v`.
    pub fn reach_probability(&self, sigma: &FiniteMemoryStrategy, v: usize) -> Result<Prob> {
        let ar = arena(&self.game, sigma, v)?;
        let target: Vec<bool> = ar.states.iter().map(|(_, w)| self.a.contains(*w)).collect();
        Ok(min_reach_probability(&ar, &target)[ar.init].clone())
    }

    /// Smallest horizon whose strategy reaches `a` with probability at
    /// least `1 - epsilon` from every configuration of `z`.
    pub fn horizon(&self, epsilon: &Prob) -> Result<usize> {
        if !(epsilon > &Prob::zero() && epsilon < &Prob::one()) {
            return Err(Error::Epsilon);
        }
        let goal = Prob::one() - epsilon;
        for n in 0..=HORIZON_CAP {
            let s = self.strategy_with_horizon(n);
            let mut ok = true;
            for v in self.z.iter() {
                if self.reach_probability(&s, v)? < goal {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(n);
            }
        }
        Err(Error::Cap(format!("no horizon up to {HORIZON_CAP} reaches 1 - epsilon")))
    }

    /// The witness for `epsilon`, checked to win the sure condition against
    /// every adversary and to reach `a` with probability at least `1 - epsilon`.
    pub fn strategy_builder(&self, epsilon: &Prob) -> Result<SlsStrategy> {
        let horizon = self.horizon(epsilon)?;
        let strategy = self.strategy_with_horizon(horizon);
        let mut reach = Vec::new();
        for v in self.z.iter() {
            if !arena_satisfies_sure(&arena(&self.game, &strategy, v)?, &self.obj.sure) {
                return Err(Error::Verification(format!("sls strategy loses the sure condition from {}", self.game.display_name(v))));
            }
            reach.push((v, self.reach_probability(&strategy, v)?));
        }
        Ok(SlsStrategy { horizon, strategy, reach })
    }
}
