//! Products of a game with strategies.
//!
//! [`Arena`] fixes only the Player-0 strategy and keeps Player-1 choices
//! open; [`MarkovChain`] additionally resolves Player 1. Both contain only
//! the part reachable from the initial state.

use std::collections::HashMap;

use num_traits::One;

use crate::error::{Error, Result};
use crate::game::{FiniteMemoryStrategy, Game, MemorylessStrategy, Owner, Prob};

/// A finite Markov chain over `(memory, config)` pairs.
#[derive(Clone, Debug)]
pub struct MarkovChain {
    /// `(memory, config)` per state.
    pub states: Vec<(usize, usize)>,
    /// Outgoing edges with exact probabilities; every row sums to 1.
    pub edges: Vec<Vec<(usize, Prob)>>,
    pub init: usize,
}

impl MarkovChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Projection of a state onto the game configuration.
    pub fn config(&self, s: usize) -> usize {
        self.states[s].1
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|row| row.iter().map(|(t, _)| *t).collect()).collect()
    }

    /// Lifts a per-configuration labelling to states.
    pub fn lift<T: Copy>(&self, per_config: &[T]) -> Vec<T> {
        self.states.iter().map(|(_, v)| per_config[*v]).collect()
    }

    /// States whose configuration lies in the given mask.
    pub fn states_in(&self, configs: &[bool]) -> Vec<bool> {
        self.states.iter().map(|(_, v)| configs[*v]).collect()
    }
}

/// The product of a game with a Player-0 strategy; Player-1 states stay open.
#[derive(Clone, Debug)]
pub struct Arena {
    pub states: Vec<(usize, usize)>,
    pub owner: Vec<Owner>,
    /// Successors; probabilities are meaningful at random states and the
    /// single resolved edge of a Player-0 state has probability 1.
    pub edges: Vec<Vec<(usize, Prob)>>,
    pub init: usize,
}

impl Arena {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|row| row.iter().map(|(t, _)| *t).collect()).collect()
    }

    pub fn lift<T: Copy>(&self, per_config: &[T]) -> Vec<T> {
        self.states.iter().map(|(_, v)| per_config[*v]).collect()
    }

    pub fn player1_states(&self) -> Vec<bool> {
        self.owner.iter().map(|o| *o == Owner::Player1).collect()
    }
}

fn check_sigma(game: &Game, sigma: &FiniteMemoryStrategy) -> Result<()> {
    let v = sigma.validate(game);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidStrategy(v))
    }
}

/// Builds the arena reachable from `init` under `sigma`.
pub fn arena(game: &Game, sigma: &FiniteMemoryStrategy, init: usize) -> Result<Arena> {
    check_sigma(game, sigma)?;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut a = Arena { states: Vec::new(), owner: Vec::new(), edges: Vec::new(), init: 0 };
    let start = (sigma.next_memory(sigma.initial, init), init);
    index.insert(start, 0);
    a.states.push(start);
    let mut head = 0;
    while head < a.states.len() {
        let (m, v) = a.states[head];
        head += 1;
        let owner = game.owner(v);
        let targets: Vec<(usize, Prob)> = match owner {
            Owner::Player0 => vec![(sigma.choice(m, v).unwrap(), Prob::one())],
            Owner::Player1 => game.succ(v).iter().map(|w| (*w, Prob::one())).collect(),
            Owner::Random => game.succ(v).iter().cloned().zip(game.probs(v).iter().cloned()).collect(),
        };
        let mut row = Vec::with_capacity(targets.len());
        for (w, p) in targets {
            let key = (sigma.next_memory(m, w), w);
            let id = *index.entry(key).or_insert_with(|| {
                a.states.push(key);
                a.states.len() - 1
            });
            row.push((id, p));
        }
        a.owner.push(owner);
        a.edges.push(row);
    }
    Ok(a)
}

/// The Markov chain induced by `sigma` for Player 0 and `pi` for Player 1.
pub fn product(game: &Game, sigma: &FiniteMemoryStrategy, pi: &MemorylessStrategy) -> Result<MarkovChain> {
    let init = game.init.ok_or(Error::MissingInit)?;
    product_from(game, sigma, pi, init)
}

/// Like [`product`] but from an explicit initial configuration.
pub fn product_from(
    game: &Game,
    sigma: &FiniteMemoryStrategy,
    pi: &MemorylessStrategy,
    init: usize,
) -> Result<MarkovChain> {
    let pv = pi.validate(game);
    if !pv.is_empty() {
        return Err(Error::InvalidStrategy(pv));
    }
    let a = arena(game, sigma, init)?;
    Ok(resolve(game, &a, pi))
}

/// Resolves the open Player-1 states of an arena with a memoryless strategy
/// and keeps only what stays reachable.
pub fn resolve(game: &Game, a: &Arena, pi: &MemorylessStrategy) -> MarkovChain {
    let mut rows: Vec<Vec<(usize, Prob)>> = Vec::with_capacity(a.len());
    for s in 0..a.len() {
        if a.owner[s] == Owner::Player1 {
            let (_, v) = a.states[s];
            let w = pi.choice(v).unwrap_or(game.succ(v)[0]);
            let t = a.edges[s].iter().find(|(t, _)| a.states[*t].1 == w).unwrap().0;
            rows.push(vec![(t, Prob::one())]);
        } else {
            rows.push(a.edges[s].clone());
        }
    }
    // Keep the reachable part, renumbered in BFS order.
    let mut id = vec![usize::MAX; a.len()];
    let mut order = vec![a.init];
    id[a.init] = 0;
    let mut head = 0;
    while head < order.len() {
        let s = order[head];
        head += 1;
        for (t, _) in &rows[s] {
            if id[*t] == usize::MAX {
                id[*t] = order.len();
                order.push(*t);
            }
        }
    }
    MarkovChain {
        states: order.iter().map(|s| a.states[*s]).collect(),
        edges: order.iter().map(|s| rows[*s].iter().map(|(t, p)| (id[*t], p.clone())).collect()).collect(),
        init: 0,
    }
}

/// The chain of a game without players (every configuration random).
pub fn chain_of(game: &Game, init: usize) -> Result<MarkovChain> {
    if !game.is_markov_chain() {
        return Err(Error::Objective("game is not a Markov chain".into()));
    }
    let sigma = FiniteMemoryStrategy::new(crate::game::Player::Zero, 1, game.len());
    let pi = MemorylessStrategy::new(crate::game::Player::One, game.len());
    product_from(game, &sigma, &pi, init)
}
