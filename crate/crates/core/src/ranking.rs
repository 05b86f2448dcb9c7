//! Almost-sure rankings: lexicographic certificates that Player 0 wins a
//! parity condition with probability 1 in an arena where its choices are
//! already resolved.
//!
//! A rank is a vector with one entry per odd priority `1, 3, ...` or `∞`.
//! `≤_k` compares the prefix for the odd priorities up to `k`.

use num_traits::Zero;

use crate::chain::{arena, Arena};
use crate::error::{Error, Result};
use crate::game::{CombinedObjective, Game, Owner, Priorities, Prob};
use crate::sas_game::GamePipeline;

/// A rank: `None` is `∞`.
pub type Rank = Option<Vec<u32>>;

/// A ranking of arena states together with the probability threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    pub vec: Vec<Rank>,
    pub epsilon: Prob,
}

/// Length of the prefix compared by `≤_k`: the number of odd priorities up to `k`.
pub fn prefix_len(k: i64) -> usize {
    if k < 1 {
        0
    } else {
        ((k + 1) / 2) as usize
    }
}

/// `a ≤_k b`.
pub fn le_k(a: &Rank, b: &Rank, k: i64) -> bool {
    let l = prefix_len(k);
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => l == 0,
        (Some(x), Some(y)) => x[..l] <= y[..l],
    }
}

/// `a <_k b`.
pub fn lt_k(a: &Rank, b: &Rank, k: i64) -> bool {
    let l = prefix_len(k);
    match (a, b) {
        (None, _) => false,
        (Some(_), None) => l > 0,
        (Some(x), Some(y)) => x[..l] < y[..l],
    }
}

/// Checks the four clauses at every state of finite rank, with `alpha`
/// indexed by configuration.
pub fn check_almost_sure_ranking(a: &Arena, ranking: &Ranking, alpha: &Priorities) -> Result<bool> {
    let dim = prefix_len(alpha.index() as i64);
    if ranking.vec.len() != a.len() {
        return Err(Error::Dimension(format!("{} ranks for {} states", ranking.vec.len(), a.len())));
    }
    if let Some(r) = ranking.vec.iter().flatten().find(|r| r.len() != dim) {
        return Err(Error::Dimension(format!("rank of length {} where {dim} is expected", r.len())));
    }
    let r = &ranking.vec;
    for s in 0..a.len() {
        if r[s].is_none() {
            continue;
        }
        let p = alpha.get(a.states[s].1) as i64;
        let step_ok = |t: usize| le_k(&r[t], &r[s], p) && (p % 2 == 0 || lt_k(&r[t], &r[s], p));
        let prob = |f: &dyn Fn(usize) -> bool| -> Prob {
            a.edges[s].iter().filter(|(t, _)| f(*t)).fold(Prob::zero(), |acc, (_, q)| acc + q)
        };
        let ok = match a.owner[s] {
            Owner::Player0 => a.edges[s].iter().any(|(t, _)| step_ok(*t)),
            Owner::Player1 => a.edges[s].iter().all(|(t, _)| step_ok(*t)),
            Owner::Random => {
                let total = prob(&|_| true);
                let odd_clause = (1..=p).step_by(2).any(|j| {
                    prob(&|t| le_k(&r[t], &r[s], j - 2)) == total && prob(&|t| lt_k(&r[t], &r[s], j)) >= ranking.epsilon
                });
                odd_clause || (p % 2 == 0 && prob(&|t| le_k(&r[t], &r[s], p - 1)) == total)
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Least progress measure of a graph in which every node is universal:
/// each node's rank dominates every successor's up to its priority,
/// strictly when the priority is odd. Nodes from which some path is
/// losing get `∞`.
pub fn progress_measure(adj: &[Vec<usize>], prio: &[u32]) -> Vec<Rank> {
    let d = prio.iter().copied().max().unwrap_or(0);
    let dim = prefix_len(d as i64);
    let bound: Vec<u32> = (0..dim).map(|i| prio.iter().filter(|p| **p == 2 * i as u32 + 1).count() as u32).collect();
    let lift = |w: &Rank, p: u32| -> Rank {
        let mut x = w.clone()?;
        let l = prefix_len(p as i64);
        for c in x.iter_mut().skip(l) {
            *c = 0;
        }
        if p % 2 == 1 {
            let mut i = l;
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                if x[i] < bound[i] {
                    x[i] += 1;
                    break;
                }
                x[i] = 0;
            }
        }
        Some(x)
    };
    let greater = |a: &Rank, b: &Rank| match (a, b) {
        (None, None) => false,
        (None, Some(_)) => true,
        (Some(_), None) => false,
        (Some(x), Some(y)) => x > y,
    };
    let mut rho: Vec<Rank> = vec![Some(vec![0; dim]); adj.len()];
    loop {
        let mut changed = false;
        for v in 0..adj.len() {
            for &w in &adj[v] {
                let cand = lift(&rho[w], prio[v]);
                if greater(&cand, &rho[v]) {
                    rho[v] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return rho;
        }
    }
}

/// A ranking certificate for one start configuration.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub start: usize,
    /// Arena of the pulled-back strategy from `start`.
    pub arena: Arena,
    pub ranking: Ranking,
}

/// Extracts a certificate for every configuration won by Player 0: the
/// progress measure of the solved product, restricted to the winning
/// strategy and read with the secondary priorities, carried to the arena
/// of the pulled-back strategy through its memory anchors.
pub fn extract_rankings(game: &Game, w: &CombinedObjective) -> Result<Vec<Certificate>> {
    let pl = GamePipeline::build(game, w)?;
    let p = &pl.solved.product;
    let sigma = &pl.solved.solution.strat0;
    let adj: Vec<Vec<usize>> = (0..p.len())
        .map(|h| match (p.game.owner(h), sigma.choice(h)) {
            (Owner::Player0, Some(x)) => vec![x],
            _ => p.game.succ(h).to_vec(),
        })
        .collect();
    let prio: Vec<u32> = (0..p.len()).map(|h| pl.gadget.b.get(p.base[h])).collect();
    let rho = progress_measure(&adj, &prio);
    let pipe = pl.pipeline(game);
    let pb = pipe.pull_back();
    let epsilon = game.min_probability();
    let mut out = Vec::new();
    for v in pl.region(game.len()).iter() {
        let ar = arena(game, &pb.strategy, v)?;
        let vec = ar
            .states
            .iter()
            .map(|&(m, x)| match pb.anchors.get(m) {
                Some(&h) if pipe.anchor_config(h) == Some(x) => rho[h].clone(),
                _ => None,
            })
            .collect();
        out.push(Certificate { start: v, arena: ar, ranking: Ranking { vec, epsilon: epsilon.clone() } });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_game;
    use crate::game::{FiniteMemoryStrategy, Player};

    fn arena_of(text: &str) -> Arena {
        let g = parse_game(text).unwrap();
        let s = FiniteMemoryStrategy::new(Player::Zero, 1, g.len()).completed(&g);
        arena(&g, &s, 0).unwrap()
    }

    #[test]
    fn prefixes() {
        assert_eq!(prefix_len(-1), 0);
        assert_eq!(prefix_len(0), 0);
        assert_eq!(prefix_len(1), 1);
        assert_eq!(prefix_len(2), 1);
        assert_eq!(prefix_len(3), 2);
        assert!(le_k(&None, &Some(vec![0]), 0));
        assert!(!le_k(&None, &Some(vec![0]), 1));
        assert!(lt_k(&Some(vec![0, 5]), &Some(vec![1, 0]), 1));
        assert!(!lt_k(&Some(vec![1, 0]), &Some(vec![1, 5]), 2));
    }

    #[test]
    fn zero_ranking_on_even_cycle() {
        let a = arena_of("game t\nconfig 0 owner=p0\nconfig 1 owner=p0\nedge 0 1\nedge 1 0\n");
        let r = Ranking { vec: vec![Some(vec![0]); 2], epsilon: Prob::from_integer(1.into()) };
        assert!(!check_almost_sure_ranking(&a, &r, &Priorities::new(vec![0, 1])).unwrap());
        assert!(check_almost_sure_ranking(&a, &r, &Priorities::new(vec![0, 2])).unwrap());
    }

    #[test]
    fn infinite_ranking_is_vacuous() {
        let a = arena_of("game t\nconfig 0 owner=p0\nedge 0 0\n");
        let r = Ranking { vec: vec![None], epsilon: Prob::from_integer(1.into()) };
        assert!(check_almost_sure_ranking(&a, &r, &Priorities::new(vec![1])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = arena_of("game t\nconfig 0 owner=p0\nedge 0 0\n");
        let r = Ranking { vec: vec![Some(vec![0, 0])], epsilon: Prob::from_integer(1.into()) };
        assert!(check_almost_sure_ranking(&a, &r, &Priorities::new(vec![1])).is_err());
    }

    #[test]
    fn progress_measure_marks_odd_cycles_infinite() {
        let adj = vec![vec![1], vec![0], vec![2]];
        let r = progress_measure(&adj, &[0, 1, 1]);
        assert!(r[0].is_some() && r[1].is_some());
        assert!(r[2].is_none());
    }
}
