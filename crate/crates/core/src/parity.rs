//! Attractors and Zielonka's recursive algorithm for (non-stochastic)
//! parity games under the min-even convention.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::game::{ConfigSet, Game, MemorylessStrategy, Owner, Player, Priorities};

/// Winning regions and memoryless winning strategies of a parity game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParitySolution {
    pub w0: ConfigSet,
    pub w1: ConfigSet,
    /// Defined on Player-0 configurations in `w0`.
    pub strat0: MemorylessStrategy,
    /// Defined on Player-1 configurations in `w1`.
    pub strat1: MemorylessStrategy,
}

impl ParitySolution {
    pub fn region(&self, player: Player) -> &ConfigSet {
        match player {
            Player::Zero => &self.w0,
            Player::One => &self.w1,
        }
    }
}

fn owned(game: &Game, v: usize, player: Player) -> bool {
    game.owner(v) == player.owner()
}

/// Attractor of `target` for `player` inside `dom`. Returns the set and a
/// witness successor for every `player` configuration added outside `target`.
///
/// The queue is seeded in increasing id order, so witnesses are deterministic.
pub(crate) fn attractor_within(
    game: &Game,
    pred: &[Vec<usize>],
    player: Player,
    target: &[bool],
    dom: &[bool],
) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = game.len();
    let mut attr = vec![false; n];
    let mut witness = vec![None; n];
    let mut remaining: Vec<usize> = (0..n)
        .map(|v| if dom[v] { game.succ(v).iter().filter(|w| dom[**w]).count() } else { 0 })
        .collect();
    let mut queue = VecDeque::new();
    for v in 0..n {
        if dom[v] && target[v] {
            attr[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(w) = queue.pop_front() {
        for &u in &pred[w] {
            if !dom[u] || attr[u] {
                continue;
            }
            if owned(game, u, player) {
                attr[u] = true;
                witness[u] = Some(w);
                queue.push_back(u);
            } else {
                remaining[u] -= 1;
                if remaining[u] == 0 {
                    attr[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    (attr, witness)
}

/// Attractor for `player` towards `target` in a non-stochastic game.
pub fn attractor(game: &Game, player: Player, target: &ConfigSet) -> Result<(ConfigSet, MemorylessStrategy)> {
    if !game.is_non_stochastic() {
        return Err(Error::Stochastic);
    }
    let pred = game.predecessors();
    let dom = vec![true; game.len()];
    let (attr, witness) = attractor_within(game, &pred, player, target.mask(), &dom);
    Ok((ConfigSet::from_mask(attr), MemorylessStrategy::from_choices(player, witness)))
}

struct Zielonka<'a> {
    game: &'a Game,
    prio: &'a [u32],
    pred: Vec<Vec<usize>>,
}

struct Partial {
    /// Winner per configuration of the subgame.
    win0: Vec<bool>,
    /// Choice of the owner at configurations it wins.
    choice: Vec<Option<usize>>,
}

impl Zielonka<'_> {
    fn solve(&self, dom: &[bool]) -> Partial {
        let n = self.game.len();
        let Some(p) = (0..n).filter(|v| dom[*v]).map(|v| self.prio[v]).min() else {
            return Partial { win0: vec![false; n], choice: vec![None; n] };
        };
        let alpha = Player::of_priority(p);
        let top: Vec<bool> = (0..n).map(|v| dom[v] && self.prio[v] == p).collect();
        let (a, a_wit) = attractor_within(self.game, &self.pred, alpha, &top, dom);
        let sub: Vec<bool> = (0..n).map(|v| dom[v] && !a[v]).collect();
        let inner = self.solve(&sub);
        let wins = |r: &Partial, v: usize, pl: Player| (r.win0[v]) == (pl == Player::Zero);
        let opp = alpha.opponent();
        let opp_region: Vec<bool> = (0..n).map(|v| sub[v] && wins(&inner, v, opp)).collect();

        if !opp_region.iter().any(|b| *b) {
            let mut out = Partial { win0: vec![false; n], choice: vec![None; n] };
            for v in (0..n).filter(|v| dom[*v]) {
                out.win0[v] = alpha == Player::Zero;
                if !owned(self.game, v, alpha) {
                    continue;
                }
                out.choice[v] = if sub[v] {
                    inner.choice[v]
                } else if top[v] {
                    self.game.succ(v).iter().copied().filter(|w| dom[*w]).min()
                } else {
                    a_wit[v]
                };
            }
            out
        } else {
            let (b, b_wit) = attractor_within(self.game, &self.pred, opp, &opp_region, dom);
            let rest: Vec<bool> = (0..n).map(|v| dom[v] && !b[v]).collect();
            let mut out = self.solve(&rest);
            for v in (0..n).filter(|v| b[*v]) {
                out.win0[v] = opp == Player::Zero;
                out.choice[v] = if !owned(self.game, v, opp) {
                    None
                } else if opp_region[v] {
                    inner.choice[v]
                } else {
                    b_wit[v]
                };
            }
            out
        }
    }
}

/// Solves a parity game exactly (Zielonka's recursive algorithm).
pub fn solve_parity(game: &Game, obj: &Priorities) -> Result<ParitySolution> {
    if !game.is_non_stochastic() {
        return Err(Error::Stochastic);
    }
    if obj.len() != game.len() {
        return Err(Error::Objective("priority column does not match the game".into()));
    }
    let z = Zielonka { game, prio: obj.as_slice(), pred: game.predecessors() };
    let n = game.len();
    let res = z.solve(&vec![true; n]);
    let w0 = ConfigSet::from_mask(res.win0.clone());
    let w1 = w0.complement();
    let mut strat0 = MemorylessStrategy::new(Player::Zero, n);
    let mut strat1 = MemorylessStrategy::new(Player::One, n);
    for v in 0..n {
        match (game.owner(v), res.win0[v], res.choice[v]) {
            (Owner::Player0, true, Some(w)) => strat0.set(v, w),
            (Owner::Player1, false, Some(w)) => strat1.set(v, w),
            _ => {}
        }
    }
    Ok(ParitySolution { w0, w1, strat0, strat1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_game;

    fn self_loop(prio: u32) -> Game {
        parse_game(&format!("game t\nconfig 0 owner=p0 prio_sure={prio}\nedge 0 0\n")).unwrap()
    }

    #[test]
    fn single_loop_even_and_odd() {
        let g = self_loop(0);
        let s = solve_parity(&g, g.prio_sure.as_ref().unwrap()).unwrap();
        assert_eq!(s.w0.to_vec(), vec![0]);
        let g = self_loop(1);
        let s = solve_parity(&g, g.prio_sure.as_ref().unwrap()).unwrap();
        assert_eq!(s.w1.to_vec(), vec![0]);
    }

    #[test]
    fn attractor_trivial_targets() {
        let g = parse_game("game t\nconfig 0 owner=p0\nconfig 1 owner=p0\nconfig 2 owner=p0\nedge 0 1\nedge 1 2\nedge 2 2\n")
            .unwrap();
        let (a, _) = attractor(&g, Player::Zero, &ConfigSet::full(3)).unwrap();
        assert_eq!(a.len(), 3);
        let (a, _) = attractor(&g, Player::Zero, &ConfigSet::empty(3)).unwrap();
        assert!(a.is_empty());
        let (a, s) = attractor(&g, Player::Zero, &ConfigSet::from_ids(3, [2])).unwrap();
        assert_eq!(a.to_vec(), vec![0, 1, 2]);
        assert_eq!(s.choice(0), Some(1));
        assert_eq!(s.choice(1), Some(2));
    }

    #[test]
    fn opponent_must_be_forced() {
        // 0 (p1) -> 1 | 2, target {1}: Player 1 escapes to 2.
        let g = parse_game("game t\nconfig 0 owner=p1\nconfig 1 owner=p0\nconfig 2 owner=p0\nedge 0 1\nedge 0 2\nedge 1 1\nedge 2 2\n")
            .unwrap();
        let (a, _) = attractor(&g, Player::Zero, &ConfigSet::from_ids(3, [1])).unwrap();
        assert_eq!(a.to_vec(), vec![1]);
    }

    #[test]
    fn random_configs_are_rejected() {
        let g = parse_game("game t\nconfig 0 owner=rand prio_sure=0\nedge 0 0 prob=1/1\n").unwrap();
        assert_eq!(solve_parity(&g, g.prio_sure.as_ref().unwrap()).unwrap_err(), Error::Stochastic);
    }
}
