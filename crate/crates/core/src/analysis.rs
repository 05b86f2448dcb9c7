//! Exact analysis of finite Markov chains and of strategy products.

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{arena, resolve, Arena, MarkovChain};
use crate::error::{Error, Result};
use crate::game::{CombinedObjective, FiniteMemoryStrategy, Game, MemorylessStrategy, Owner, Player, Priorities, Prob};
use crate::graph;

/// Bottom SCCs among the states reachable from `init`.
pub fn bottom_sccs(chain: &MarkovChain) -> Vec<Vec<usize>> {
    let adj = chain.adjacency();
    let alive = graph::reachable(&adj, [chain.init], &vec![true; chain.len()]);
    let comps = graph::sccs(&adj, &alive);
    let mut comp_of = vec![0; chain.len()];
    for (i, c) in comps.iter().enumerate() {
        for &s in c {
            comp_of[s] = i;
        }
    }
    let mut out: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|s| adj[*s].iter().all(|t| comp_of[*t] == *i)))
        .map(|(_, c)| c.clone())
        .collect();
    out.sort();
    out
}

/// Solves `A x = b` exactly; `A` must be nonsingular.
fn solve_linear(mut a: Vec<Vec<Prob>>, mut b: Vec<Prob>) -> Vec<Prob> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|r| !a[*r][col].is_zero()).expect("singular system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Prob::one() / a[col][col].clone();
        for x in a[col][col..].iter_mut() {
            *x = &*x * &inv;
        }
        b[col] = &b[col] * &inv;
        let pivot_row = a[col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &f * p;
            }
            let d = &f * &b[col];
            b[r] -= d;
        }
    }
    b
}

/// Values of `x = 1` on `fixed_one`, `0` on `fixed_zero` and the weighted
/// average elsewhere, for a chain given as rows.
fn absorption(rows: &[Vec<(usize, Prob)>], fixed_one: &[bool], fixed_zero: &[bool]) -> Vec<Prob> {
    let n = rows.len();
    let free: Vec<usize> = (0..n).filter(|s| !fixed_one[*s] && !fixed_zero[*s]).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, s) in free.iter().enumerate() {
        pos[*s] = i;
    }
    let k = free.len();
    let mut a = vec![vec![Prob::zero(); k]; k];
    let mut b = vec![Prob::zero(); k];
    for (i, &s) in free.iter().enumerate() {
        a[i][i] += Prob::one();
        for (t, p) in &rows[s] {
            if fixed_one[*t] {
                b[i] += p;
            } else if !fixed_zero[*t] {
                a[i][pos[*t]] -= p;
            }
        }
    }
    let x = solve_linear(a, b);
    (0..n)
        .map(|s| {
            if fixed_one[s] {
                Prob::one()
            } else if fixed_zero[s] {
                Prob::zero()
            } else {
                x[pos[s]].clone()
            }
        })
        .collect()
}

/// Exact probability of eventually reaching `target` (a state mask) from every state.
pub fn reach_probabilities(chain: &MarkovChain, target: &[bool]) -> Vec<Prob> {
    let adj = chain.adjacency();
    let alive = vec![true; chain.len()];
    let can = graph::can_reach(&adj, target, &alive);
    let zero: Vec<bool> = can.iter().map(|c| !c).collect();
    absorption(&chain.edges, target, &zero)
}

/// Whether every path from the initial state satisfies the parity objective.
pub fn chain_satisfies_sure(chain: &MarkovChain, alpha: &Priorities) -> bool {
    let prio = chain.lift(alpha.as_slice());
    let adj = chain.adjacency();
    let alive = graph::reachable(&adj, [chain.init], &vec![true; chain.len()]);
    !graph::has_odd_cycle(&adj, &prio, &alive)
}

/// Whether the parity objective holds with probability 1, i.e. every
/// bottom SCC has an even minimal priority.
pub fn chain_satisfies_almost_sure(chain: &MarkovChain, alpha: &Priorities) -> bool {
    bottom_sccs(chain)
        .iter()
        .all(|c| c.iter().map(|s| alpha.get(chain.config(*s))).min().unwrap() % 2 == 0)
}

/// Sure check on an arena: no path (over all Player-1 and random choices) violates `alpha`.
pub fn arena_satisfies_sure(a: &Arena, alpha: &Priorities) -> bool {
    let prio = a.lift(alpha.as_slice());
    !graph::has_odd_cycle(&a.adjacency(), &prio, &vec![true; a.len()])
}

/// Arena states from which `alpha` holds almost surely against every
/// Player-1 strategy. Player 1 can make `alpha` fail with positive
/// probability iff it can reach an end component it controls whose minimal
/// priority is odd.
pub fn arena_almost_sure_states(a: &Arena, alpha: &Priorities) -> Vec<bool> {
    let prio = a.lift(alpha.as_slice());
    let adj = a.adjacency();
    let ctrl = a.player1_states();
    let max = prio.iter().copied().max().unwrap_or(0);
    let mut bad = vec![false; a.len()];
    let mut k = 1;
    while k <= max {
        let sub: Vec<bool> = prio.iter().map(|p| *p >= k).collect();
        for ec in graph::maximal_end_components(&adj, &ctrl, &sub) {
            if ec.iter().any(|s| prio[*s] == k) {
                for s in ec {
                    bad[s] = true;
                }
            }
        }
        k += 2;
    }
    let all = vec![true; a.len()];
    graph::can_reach(&adj, &bad, &all).into_iter().map(|c| !c).collect()
}

/// Almost-sure check on an arena from its initial state against every Player-1 strategy.
pub fn arena_satisfies_almost_sure(a: &Arena, alpha: &Priorities) -> bool {
    arena_almost_sure_states(a, alpha)[a.init]
}

/// Lower bound on the probability that `alpha` holds from the initial
/// state against every Player-1 strategy: the worst-case probability of
/// reaching a state from which it holds almost surely.
pub fn arena_probability_bound(a: &Arena, alpha: &Priorities) -> Prob {
    min_reach_probability(a, &arena_almost_sure_states(a, alpha))[a.init].clone()
}

/// Verifies that `sigma` wins the SAS objective from `init` against every
/// Player-1 strategy (surely for `obj.sure`, almost-surely for `obj.secondary`).
pub fn verify_sas_strategy(game: &Game, obj: &CombinedObjective, sigma: &FiniteMemoryStrategy, init: usize) -> Result<bool> {
    let a = arena(game, sigma, init)?;
    Ok(arena_satisfies_sure(&a, &obj.sure) && arena_satisfies_almost_sure(&a, &obj.secondary))
}

/// Enumerates the memoryless Player-1 strategies of `game` in lexicographic
/// order of choices. Fails with [`Error::Cap`] beyond `cap` strategies.
pub fn enumerate_player1(game: &Game, cap: usize) -> Result<Vec<MemorylessStrategy>> {
    enumerate_memoryless(game, Player::One, None, cap)
}

/// Memoryless strategies of `player`. With `within`, only configurations
/// inside it branch (over successors inside it when there are any); the
/// others keep their first successor.
pub fn enumerate_memoryless(
    game: &Game,
    player: Player,
    within: Option<&[bool]>,
    cap: usize,
) -> Result<Vec<MemorylessStrategy>> {
    let mut out = Vec::new();
    find_memoryless(game, player, within, cap, |s| {
        out.push(s.clone());
        false
    })?;
    Ok(out)
}

/// Visits the strategies of [`enumerate_memoryless`] in the same order and
/// returns the first one accepted by `accept`.
pub fn find_memoryless(
    game: &Game,
    player: Player,
    within: Option<&[bool]>,
    cap: usize,
    mut accept: impl FnMut(&MemorylessStrategy) -> bool,
) -> Result<Option<MemorylessStrategy>> {
    let owned: Vec<usize> = game.owned_by(player.owner()).collect();
    let options: Vec<Vec<usize>> = owned
        .iter()
        .map(|v| {
            let all = game.succ(*v).to_vec();
            match within {
                Some(w) if w[*v] => {
                    let inside: Vec<usize> = all.iter().copied().filter(|x| w[*x]).collect();
                    if inside.is_empty() {
                        all
                    } else {
                        inside
                    }
                }
                Some(_) => vec![all[0]],
                None => all,
            }
        })
        .collect();
    let total = options.iter().try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
    match total {
        Some(t) if t <= cap => {}
        _ => return Err(Error::Cap(format!("more than {cap} memoryless strategies"))),
    }
    let mut idx = vec![0usize; owned.len()];
    let mut s = MemorylessStrategy::new(player, game.len());
    loop {
        for (i, v) in owned.iter().enumerate() {
            s.set(*v, options[i][idx[i]]);
        }
        if accept(&s) {
            return Ok(Some(s));
        }
        let mut i = owned.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < options[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Verification by enumerating memoryless Player-1 strategies, each checked
/// on its induced chain.
pub fn verify_sas_strategy_enumerated(
    game: &Game,
    obj: &CombinedObjective,
    sigma: &FiniteMemoryStrategy,
    init: usize,
    cap: usize,
) -> Result<bool> {
    let a = arena(game, sigma, init)?;
    let refuting = find_memoryless(game, Player::One, None, cap, |pi| {
        let c = resolve(game, &a, pi);
        !chain_satisfies_sure(&c, &obj.sure) || !chain_satisfies_almost_sure(&c, &obj.secondary)
    })?;
    Ok(refuting.is_none())
}

/// Minimal probability, over all Player-1 strategies, of reaching the
/// arena states in `target`. Computed exactly by strategy iteration after
/// removing the states from which Player 1 can avoid the target forever.
pub fn min_reach_probability(a: &Arena, target: &[bool]) -> Vec<Prob> {
    let n = a.len();
    let adj = a.adjacency();
    // States from which Player 1 avoids the target surely.
    let mut avoid: Vec<bool> = target.iter().map(|t| !t).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !avoid[s] {
                continue;
            }
            let ok = if a.owner[s] == Owner::Player1 {
                adj[s].iter().any(|t| avoid[*t])
            } else {
                adj[s].iter().all(|t| avoid[*t])
            };
            if !ok {
                avoid[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut policy: Vec<usize> = (0..n).map(|_| 0).collect();
    loop {
        let rows: Vec<Vec<(usize, Prob)>> = (0..n)
            .map(|s| {
                if a.owner[s] == Owner::Player1 {
                    vec![(a.edges[s][policy[s]].0, Prob::one())]
                } else {
                    a.edges[s].clone()
                }
            })
            .collect();
        let x = absorption(&rows, target, &avoid);
        let mut improved = false;
        for s in 0..n {
            if a.owner[s] != Owner::Player1 || target[s] || avoid[s] {
                continue;
            }
            let cur = &x[a.edges[s][policy[s]].0];
            let (best, val) = a.edges[s]
                .iter()
                .enumerate()
                .map(|(i, (t, _))| (i, &x[*t]))
                .min_by(|l, r| l.1.cmp(r.1).then(l.0.cmp(&r.0)))
                .unwrap();
            if val < cur {
                policy[s] = best;
                improved = true;
            }
        }
        if !improved {
            return x;
        }
    }
}

/// Empirical visit frequencies per state (fraction of runs that visit the
/// state within `steps` steps). Deterministic for a fixed seed; a sanity
/// tool only.
pub fn simulate(chain: &MarkovChain, steps: usize, trials: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<f64>> = chain
        .edges
        .iter()
        .map(|row| row.iter().map(|(_, p)| p.to_f64().unwrap_or(0.0)).collect())
        .collect();
    let mut hits = vec![0usize; chain.len()];
    let mut seen = vec![usize::MAX; chain.len()];
    for trial in 0..trials {
        let mut s = chain.init;
        seen[s] = trial;
        hits[s] += 1;
        for _ in 0..steps {
            let row = &chain.edges[s];
            let mut r: f64 = rng.gen();
            let mut next = row[row.len() - 1].0;
            for (i, w) in weights[s].iter().enumerate() {
                if r < *w {
                    next = row[i].0;
                    break;
                }
                r -= w;
            }
            s = next;
            if seen[s] != trial {
                seen[s] = trial;
                hits[s] += 1;
            }
        }
    }
    hits.iter().map(|h| *h as f64 / trials.max(1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::chain_of;
    use crate::format::parse_game;

    fn q(a: i64, b: i64) -> Prob {
        Prob::new(a.into(), b.into())
    }

    #[test]
    fn absorbing_state_is_its_own_bottom_scc() {
        let g = parse_game("game t\nconfig 0 owner=rand\nedge 0 0 prob=1/1\n").unwrap();
        let c = chain_of(&g, 0).unwrap();
        assert_eq!(bottom_sccs(&c), vec![vec![0]]);
    }

    #[test]
    fn two_cycle_is_one_bottom_scc() {
        let g = parse_game("game t\nconfig 0 owner=rand\nconfig 1 owner=rand\nedge 0 1 prob=1/1\nedge 1 0 prob=1/1\n").unwrap();
        let c = chain_of(&g, 0).unwrap();
        assert_eq!(bottom_sccs(&c), vec![vec![0, 1]]);
    }

    #[test]
    fn reach_unreachable_and_certain() {
        let g = parse_game(
            "game t\nconfig 0 owner=rand\nconfig 1 owner=rand\nconfig 2 owner=rand\nedge 0 1 prob=1/1\nedge 1 1 prob=1/1\nedge 2 2 prob=1/1\n",
        )
        .unwrap();
        let c = chain_of(&g, 0).unwrap();
        let to2 = c.states_in(&[false, false, true]);
        assert!(reach_probabilities(&c, &to2).iter().all(|p| p.is_zero()));
        let to1 = c.states_in(&[false, true, false]);
        assert_eq!(reach_probabilities(&c, &to1)[c.init], q(1, 1));
    }

    #[test]
    fn geometric_reach() {
        // 0 -> 1 (1/2) | 0 (1/2)
        let g = parse_game("game t\nconfig 0 owner=rand\nconfig 1 owner=rand\nedge 0 0 prob=1/2\nedge 0 1 prob=1/2\nedge 1 1 prob=1/1\n").unwrap();
        let c = chain_of(&g, 0).unwrap();
        assert_eq!(reach_probabilities(&c, &c.states_in(&[false, true]))[0], q(1, 1));
    }

    #[test]
    fn transient_odd_cycle_is_almost_sure_but_not_sure() {
        // 0 (prio 1) loops with 1/2 and moves to the even sink 1.
        let g = parse_game(
            "game t\nconfig 0 owner=rand prio_sure=1\nconfig 1 owner=rand prio_sure=0\nedge 0 0 prob=1/2\nedge 0 1 prob=1/2\nedge 1 1 prob=1/1\n",
        )
        .unwrap();
        let c = chain_of(&g, 0).unwrap();
        let a = g.prio_sure.as_ref().unwrap();
        assert!(chain_satisfies_almost_sure(&c, a));
        assert!(!chain_satisfies_sure(&c, a));
    }

    #[test]
    fn absorbing_odd_fails_both() {
        let g = parse_game("game t\nconfig 0 owner=rand prio_sure=1\nedge 0 0 prob=1/1\n").unwrap();
        let c = chain_of(&g, 0).unwrap();
        let a = g.prio_sure.as_ref().unwrap();
        assert!(!chain_satisfies_almost_sure(&c, a));
        assert!(!chain_satisfies_sure(&c, a));
    }

    #[test]
    fn simulation_is_seed_repeatable() {
        let g = parse_game("game t\nconfig 0 owner=rand\nconfig 1 owner=rand\nedge 0 0 prob=1/2\nedge 0 1 prob=1/2\nedge 1 1 prob=1/1\n").unwrap();
        let c = chain_of(&g, 0).unwrap();
        assert_eq!(simulate(&c, 3, 200, 7), simulate(&c, 3, 200, 7));
        let det = parse_game("game t\nconfig 0 owner=rand\nconfig 1 owner=rand\nedge 0 1 prob=1/1\nedge 1 1 prob=1/1\n").unwrap();
        let c = chain_of(&det, 0).unwrap();
        assert_eq!(simulate(&c, 2, 50, 1)[1], 1.0);
    }
}
