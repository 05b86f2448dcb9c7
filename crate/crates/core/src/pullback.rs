//! Pulling a memoryless strategy of a solved product back to the input game.
//!
//! The product is built over a gadget game, which itself replaces the random
//! configurations of a middle game (the input game, or its restricted-copies
//! MDP). A memory state of the pulled-back strategy is an *anchor*: a
//! product node whose gadget node stands for an input configuration. Moves
//! of the input game are simulated in the product; inside a gadget the
//! Player-1 choices are resolved so that the simulated play matches the
//! random outcome.

use std::collections::HashMap;

use crate::game::{FiniteMemoryStrategy, Game, MemorylessStrategy, Owner, Player};
use crate::reduce::{GadgetGame, GadgetKind, Product};

/// Everything needed to simulate input moves in the product.
pub struct Pipeline<'a> {
    pub game: &'a Game,
    pub gadget: &'a GadgetGame,
    /// Per middle configuration: the input configuration it stands for when it can be an anchor.
    pub mid_config: Vec<Option<usize>>,
    /// Per middle configuration: the input configuration reached by moving there.
    pub mid_target: Vec<Option<usize>>,
    /// Per input configuration: its middle configuration at the start of a play.
    pub mid_entry: Vec<usize>,
    pub product: &'a Product,
    pub sigma: &'a MemorylessStrategy,
}

/// A pulled-back strategy and the product anchor of each memory state
/// (the last memory state is the start state and has no anchor).
#[derive(Clone, Debug)]
pub struct PulledBack {
    pub strategy: FiniteMemoryStrategy,
    pub anchors: Vec<usize>,
}

impl Pipeline<'_> {
    fn kind(&self, h: usize) -> GadgetKind {
        self.gadget.kind[self.product.base[h]]
    }

    /// Input configuration of an anchor node.
    pub fn anchor_config(&self, h: usize) -> Option<usize> {
        match self.kind(h) {
            GadgetKind::Plain(s) | GadgetKind::Bar(s) => self.mid_config[s],
            _ => None,
        }
    }

    fn target(&self, h: usize) -> Option<usize> {
        match self.kind(h) {
            GadgetKind::Plain(s) | GadgetKind::Bar(s) => self.mid_target[s],
            _ => None,
        }
    }

    fn choose(&self, h: usize) -> Option<usize> {
        self.sigma.choice(h)
    }

    /// Follows Player-0 transit nodes until an anchor.
    fn walk(&self, mut h: usize) -> Option<usize> {
        for _ in 0..=self.product.len() {
            if self.anchor_config(h).is_some() {
                return Some(h);
            }
            if self.product.game.owner(h) != Owner::Player0 {
                return None;
            }
            h = self.choose(h)?;
        }
        None
    }

    /// Successor of `h` leading to input configuration `w`.
    fn towards(&self, h: usize, w: usize) -> Option<usize> {
        self.product.game.succ(h).iter().copied().find(|x| self.target(*x) == Some(w))
    }

    /// Anchor entered first when a play starts in `v`.
    pub fn entry_anchor(&self, v: usize) -> usize {
        self.product.entry(self.gadget.entry[self.mid_entry[v]])
    }

    /// Input successor chosen at a Player-0 anchor.
    pub fn output(&self, h: usize) -> Option<usize> {
        self.target(self.choose(h)?)
    }

    /// Anchor reached from anchor `h` when the input play moves to `w`.
    pub fn enter(&self, h: usize, w: usize) -> Option<usize> {
        let v = self.anchor_config(h)?;
        match self.game.owner(v) {
            Owner::Player0 => {
                let h1 = self.choose(h)?;
                if self.target(h1) != Some(w) {
                    return None;
                }
                self.walk(h1)
            }
            Owner::Player1 => self.walk(self.towards(h, w)?),
            Owner::Random => {
                let tildes = self.product.game.succ(h);
                let odd = tildes.iter().position(|t| {
                    self.choose(*t).is_some_and(|x| matches!(self.kind(x), GadgetKind::Hat(_, j) if j % 2 == 1))
                });
                let hat = match odd {
                    Some(i) => {
                        let hat_odd = self.choose(tildes[i])?;
                        let x = self.choose(hat_odd)?;
                        if self.target(x) == Some(w) {
                            return self.walk(x);
                        }
                        self.choose(tildes[i.checked_sub(1)?])?
                    }
                    None => self.choose(*tildes.last()?)?,
                };
                self.walk(self.towards(hat, w)?)
            }
        }
    }

    /// Builds the strategy over all anchors reachable from the entry anchors.
    pub fn pull_back(&self) -> PulledBack {
        let n = self.game.len();
        let mut anchors: Vec<usize> = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut add = |h: usize, anchors: &mut Vec<usize>| {
            *index.entry(h).or_insert_with(|| {
                anchors.push(h);
                anchors.len() - 1
            })
        };
        for v in 0..n {
            add(self.entry_anchor(v), &mut anchors);
        }
        let mut moves: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut head = 0;
        while head < anchors.len() {
            let h = anchors[head];
            head += 1;
            let v = self.anchor_config(h).expect("anchor");
            let row = self
                .game
                .succ(v)
                .iter()
                .map(|&w| {
                    let h2 = self.enter(h, w).filter(|h2| self.anchor_config(*h2) == Some(w));
                    (w, add(h2.unwrap_or_else(|| self.entry_anchor(w)), &mut anchors))
                })
                .collect();
            moves.push(row);
        }
        let start = anchors.len();
        let entry: Vec<usize> = (0..n).map(|v| index[&self.entry_anchor(v)]).collect();
        let mut s = FiniteMemoryStrategy::new(Player::Zero, start + 1, n);
        s.initial = start;
        for m in 0..=start {
            s.update[m].clone_from(&entry);
        }
        for (m, row) in moves.iter().enumerate() {
            for &(w, m2) in row {
                s.update[m][w] = m2;
            }
        }
        let out_at = |m: usize, v: usize| {
            let h = anchors[m];
            self.output(h).filter(|w| self.game.succ(v).contains(w)).unwrap_or(self.game.succ(v)[0])
        };
        for v in self.game.owned_by(Owner::Player0) {
            for (m, row) in s.output.iter_mut().enumerate().take(start + 1) {
                let m_eff = if m < start && self.anchor_config(anchors[m]) == Some(v) { m } else { entry[v] };
                row[v] = Some(out_at(m_eff, v));
            }
        }
        PulledBack { strategy: s, anchors }
    }
}
