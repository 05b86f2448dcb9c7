//! Brute-force reference solvers for small instances.
//!
//! These quantify over strategies directly and share no reduction code
//! with the solvers they are compared against.

use num_traits::One;

use crate::analysis::{find_memoryless, reach_probabilities};
use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::game::{CombinedObjective, ConfigSet, FiniteMemoryStrategy, Game, MemorylessStrategy, Owner, Player, Priorities, Prob};
use crate::graph;
use crate::parity::solve_parity;

/// Default cap on enumerated memoryless strategies.
pub const ENUM_CAP: usize = 1_000_000;

/// Default cap on search nodes of [`oracle_solve_sas`] per configuration.
pub const SEARCH_CAP: u64 = 20_000_000;

/// Successor lists with Player-1 configurations fixed by `pi`.
fn fixed_adjacency(game: &Game, pi: &MemorylessStrategy) -> Vec<Vec<usize>> {
    game.configs()
        .map(|v| match (game.owner(v), pi.choice(v)) {
            (Owner::Player1, Some(w)) => vec![w],
            _ => game.succ(v).to_vec(),
        })
        .collect()
}

/// Configurations won by Player 0 for the conjunction of all given parity
/// columns: for every memoryless Player-1 strategy, a cycle good for every
/// column must be reachable.
pub fn oracle_solve_multi(game: &Game, columns: &[&[u32]]) -> Result<(ConfigSet, ConfigSet)> {
    if !game.is_non_stochastic() {
        return Err(Error::Stochastic);
    }
    let n = game.len();
    let alive = vec![true; n];
    let mut w0 = vec![true; n];
    find_memoryless(game, Player::One, None, ENUM_CAP, |pi| {
        let adj = fixed_adjacency(game, pi);
        let good = graph::good_cycle_nodes(&adj, columns, &alive);
        let reach = graph::can_reach(&adj, &good, &alive);
        for v in 0..n {
            w0[v] &= reach[v];
        }
        false
    })?;
    let w0 = ConfigSet::from_mask(w0);
    let w1 = w0.complement();
    Ok((w0, w1))
}

/// Reference parity solver.
pub fn oracle_solve_parity(game: &Game, prio: &Priorities) -> Result<(ConfigSet, ConfigSet)> {
    oracle_solve_multi(game, &[prio.as_slice()])
}

/// Reference solver for the conjunction of two parity conditions.
pub fn oracle_solve_conj(game: &Game, a: &Priorities, b: &Priorities) -> Result<(ConfigSet, ConfigSet)> {
    oracle_solve_multi(game, &[a.as_slice(), b.as_slice()])
}

/// All simple cycles of a small graph, each starting at its least node.
pub fn simple_cycles(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn extend(adj: &[Vec<usize>], start: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        for &w in &adj[v] {
            if w == start {
                out.push(path.clone());
            } else if w > start && !on[w] {
                on[w] = true;
                path.push(w);
                extend(adj, start, path, on, out);
                path.pop();
                on[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; adj.len()];
    for s in 0..adj.len() {
        let mut path = vec![s];
        on[s] = true;
        extend(adj, s, &mut path, &mut on, &mut out);
        on[s] = false;
    }
    out
}

/// Reference almost-sure reachability: `v` is winning iff some memoryless
/// Player-0 strategy reaches `target` with probability exactly 1 against
/// every memoryless Player-1 strategy, by exact chain analysis.
pub fn oracle_almost_sure_reach(game: &Game, target: &ConfigSet) -> Result<ConfigSet> {
    let n = game.len();
    let mut win = vec![false; n];
    find_memoryless(game, Player::Zero, None, ENUM_CAP, |sigma| {
        let mut ok = vec![true; n];
        let _ = find_memoryless(game, Player::One, None, ENUM_CAP, |pi| {
            let chain = MarkovChain {
                states: (0..n).map(|v| (0, v)).collect(),
                edges: (0..n)
                    .map(|v| match game.owner(v) {
                        Owner::Player0 => vec![(sigma.choice(v).unwrap(), Prob::one())],
                        Owner::Player1 => vec![(pi.choice(v).unwrap(), Prob::one())],
                        Owner::Random => game.succ(v).iter().copied().zip(game.probs(v).iter().cloned()).collect(),
                    })
                    .collect(),
                init: 0,
            };
            let x = reach_probabilities(&chain, target.mask());
            for v in 0..n {
                ok[v] &= x[v].is_one();
            }
            false
        });
        for v in 0..n {
            win[v] |= ok[v];
        }
        false
    })?;
    Ok(ConfigSet::from_mask(win))
}

/// Almost-sure parity region of an MDP restricted to `alive` (which must be
/// closed under random moves): reach, with probability 1, an end component
/// whose least priority is even.
fn mdp_almost_sure_region(game: &Game, prio: &[u32], alive: &[bool]) -> Vec<bool> {
    let n = game.len();
    let adj: Vec<Vec<usize>> = game.configs().map(|v| game.succ(v).to_vec()).collect();
    let ctrl: Vec<bool> = game.configs().map(|v| game.owner(v) == Owner::Player0).collect();
    let max = prio.iter().copied().max().unwrap_or(0);
    let mut good = vec![false; n];
    let mut k = 0;
    while k <= max {
        let sub: Vec<bool> = (0..n).map(|v| alive[v] && prio[v] >= k).collect();
        for ec in graph::maximal_end_components(&adj, &ctrl, &sub) {
            if ec.iter().any(|v| prio[*v] == k) {
                for v in ec {
                    good[v] = true;
                }
            }
        }
        k += 2;
    }
    // Almost-sure reachability of `good` in an MDP.
    let mut r = alive.to_vec();
    loop {
        let reach = graph::can_reach(&adj, &good, &r);
        let mut changed = false;
        for v in 0..n {
            if r[v] && !reach[v] {
                r[v] = false;
                changed = true;
            }
        }
        loop {
            let mut more = false;
            for v in 0..n {
                if !r[v] {
                    continue;
                }
                let keep = if ctrl[v] { adj[v].iter().any(|w| r[*w]) } else { adj[v].iter().all(|w| r[*w]) };
                if !keep {
                    r[v] = false;
                    more = true;
                }
            }
            if !more {
                break;
            }
            changed = true;
        }
        if !changed {
            return r;
        }
    }
}

/// Largest subset of `set` in which Player 0 can stay forever.
fn safe_core(game: &Game, set: &[bool]) -> Vec<bool> {
    let mut s = set.to_vec();
    loop {
        let mut changed = false;
        for v in game.configs() {
            if !s[v] {
                continue;
            }
            let keep = if game.owner(v) == Owner::Player0 {
                game.succ(v).iter().any(|w| s[*w])
            } else {
                game.succ(v).iter().all(|w| s[*w])
            };
            if !keep {
                s[v] = false;
                changed = true;
            }
        }
        if !changed {
            return s;
        }
    }
}

/// The subgame induced by a Player-0-safe set (other configurations become inert self-loops).
fn restrict(game: &Game, s: &[bool]) -> Game {
    let mut g = game.clone();
    for v in game.configs() {
        if s[v] {
            if game.owner(v) == Owner::Player0 {
                let keep: Vec<usize> = game.succ(v).iter().copied().filter(|w| s[*w]).collect();
                g.set_edges(v, keep, Vec::new());
            }
        } else {
            g.set_owner(v, Owner::Player0);
            g.set_edges(v, vec![v], Vec::new());
        }
    }
    g
}

/// Configurations from which a winning strategy can only ever visit:
/// surely winnable for the sure condition (random moves adversarial) and,
/// for MDPs, almost-surely winnable for the secondary condition.
fn candidate_set(game: &Game, obj: &CombinedObjective) -> Result<Vec<bool>> {
    let mut s = vec![true; game.len()];
    loop {
        let g = restrict(game, &s);
        let x = solve_parity(&g.random_as_adversary(), &obj.sure)?;
        let mut next: Vec<bool> = (0..game.len()).map(|v| s[v] && x.w0.contains(v)).collect();
        if game.is_mdp() {
            let a = mdp_almost_sure_region(&g, obj.secondary.as_slice(), &next);
            for v in 0..game.len() {
                next[v] &= a[v];
            }
        }
        let next = safe_core(game, &next);
        if next == s {
            return Ok(s);
        }
        s = next;
    }
}

#[derive(Clone, Copy)]
enum Decision {
    Out(usize, usize),
    Upd(usize, usize),
}

/// Depth-first search over finite-memory strategies, decided lazily on the
/// reachable part of the product. The play starts in memory 0 at `v0`;
/// later memory labels are introduced in order, so relabelled copies of one
/// strategy are visited once.
struct Search<'a> {
    game: &'a Game,
    sure: &'a [u32],
    sec: &'a [u32],
    ctrl: Vec<bool>,
    allowed: &'a [bool],
    k: usize,
    v0: usize,
    upd: Vec<Vec<Option<usize>>>,
    out: Vec<Vec<Option<usize>>>,
    used: usize,
    nodes: u64,
    cap: u64,
}

/// Decided part of the product arena.
struct Explored {
    adj: Vec<Vec<usize>>,
    seen: Vec<bool>,
    full: Vec<bool>,
    open: Option<Decision>,
}

impl Search<'_> {
    fn new<'a>(game: &'a Game, obj: &'a CombinedObjective, allowed: &'a [bool], k: usize, v0: usize, cap: u64) -> Search<'a> {
        let n = game.len();
        Search {
            game,
            sure: obj.sure.as_slice(),
            sec: obj.secondary.as_slice(),
            ctrl: (0..k * n).map(|s| game.owner(s % n) == Owner::Player1).collect(),
            allowed,
            k,
            v0,
            upd: vec![vec![None; n]; k],
            out: vec![vec![None; n]; k],
            used: 1,
            nodes: 0,
            cap,
        }
    }

    fn id(&self, m: usize, v: usize) -> usize {
        m * self.game.len() + v
    }

    /// Output decisions come before update decisions; among each kind the
    /// most recently discovered state wins.
    fn explore(&self) -> Explored {
        let total = self.k * self.game.len();
        let mut e = Explored { adj: vec![Vec::new(); total], seen: vec![false; total], full: vec![false; total], open: None };
        let mut open_out = None;
        let mut open_upd = None;
        let mut queue = vec![(0, self.v0)];
        e.seen[self.id(0, self.v0)] = true;
        let mut head = 0;
        while head < queue.len() {
            let (m, v) = queue[head];
            head += 1;
            let s = self.id(m, v);
            let single;
            let targets: &[usize] = if self.game.owner(v) == Owner::Player0 {
                match self.out[m][v] {
                    Some(w) => {
                        single = [w];
                        &single
                    }
                    None => {
                        open_out = Some(Decision::Out(m, v));
                        continue;
                    }
                }
            } else {
                self.game.succ(v)
            };
            let mut complete = true;
            for &w in targets {
                match self.upd[m][w] {
                    Some(m2) => {
                        let t = self.id(m2, w);
                        e.adj[s].push(t);
                        if !e.seen[t] {
                            e.seen[t] = true;
                            queue.push((m2, w));
                        }
                    }
                    None => {
                        if complete {
                            open_upd = Some(Decision::Upd(m, w));
                        }
                        complete = false;
                    }
                }
            }
            e.full[s] = complete;
        }
        e.open = open_out.or(open_upd);
        e
    }

    /// Whether the decided part already contains a violation that every completion keeps.
    fn doomed(&self, e: &Explored) -> bool {
        let n = self.game.len();
        let total = e.adj.len();
        let sure: Vec<u32> = (0..total).map(|s| self.sure[s % n]).collect();
        if graph::has_odd_cycle(&e.adj, &sure, &e.seen) {
            return true;
        }
        let sec: Vec<u32> = (0..total).map(|s| self.sec[s % n]).collect();
        let max = sec.iter().copied().max().unwrap_or(0);
        let mut k = 1;
        while k <= max {
            let sub: Vec<bool> = (0..total).map(|s| e.full[s] && sec[s] >= k).collect();
            if graph::maximal_end_components(&e.adj, &self.ctrl, &sub).iter().any(|ec| ec.iter().any(|s| sec[*s] == k)) {
                return true;
            }
            k += 2;
        }
        false
    }

    fn run(&mut self) -> Result<Option<Vec<bool>>> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::Cap(format!("oracle search exceeded {} nodes", self.cap)));
        }
        let e = self.explore();
        if self.doomed(&e) {
            return Ok(None);
        }
        match e.open {
            None => Ok(Some(e.seen)),
            Some(Decision::Out(m, v)) => {
                let opts: Vec<usize> = self.game.succ(v).iter().copied().filter(|w| self.allowed[*w]).collect();
                for w in opts {
                    self.out[m][v] = Some(w);
                    if let Some(r) = self.run()? {
                        return Ok(Some(r));
                    }
                }
                self.out[m][v] = None;
                Ok(None)
            }
            Some(Decision::Upd(m, w)) => {
                if !self.allowed[w] {
                    return Ok(None);
                }
                let top = (self.used + 1).min(self.k);
                for m2 in 0..top {
                    let fresh = m2 == self.used;
                    if fresh {
                        self.used += 1;
                    }
                    self.upd[m][w] = Some(m2);
                    let won = self.run()?;
                    if fresh {
                        self.used -= 1;
                    }
                    if won.is_some() {
                        return Ok(won);
                    }
                }
                self.upd[m][w] = None;
                Ok(None)
            }
        }
    }

    /// The found strategy, with an extra start state that moves to memory 0 on `v0`.
    fn strategy(&self) -> FiniteMemoryStrategy {
        let n = self.game.len();
        let mem = self.used;
        let mut s = FiniteMemoryStrategy::new(Player::Zero, mem + 1, n);
        for m in 0..mem {
            for v in 0..n {
                s.update[m][v] = self.upd[m][v].unwrap_or(0);
                s.output[m][v] = self.out[m][v];
            }
        }
        s.initial = mem;
        s.update[mem] = vec![0; n];
        s.output[mem] = self.out[0].clone();
        s.completed(self.game).minimized()
    }
}

/// A Player-0 strategy that wins the SAS objective from `v` and, after the
/// first configuration, uses at most `mem_bound` memory states.
pub fn oracle_sas_strategy(
    game: &Game,
    obj: &CombinedObjective,
    mem_bound: usize,
    v: usize,
) -> Result<Option<FiniteMemoryStrategy>> {
    let allowed = candidate_set(game, obj)?;
    Ok(sas_search(game, obj, mem_bound, v, &allowed, SEARCH_CAP)?.map(|(s, _)| s))
}

/// Tries memory 1 first, then `mem_bound`. Returns the strategy and the
/// configurations it visits.
fn sas_search(
    game: &Game,
    obj: &CombinedObjective,
    mem_bound: usize,
    v: usize,
    allowed: &[bool],
    cap: u64,
) -> Result<Option<(FiniteMemoryStrategy, Vec<bool>)>> {
    if !allowed[v] || mem_bound == 0 {
        return Ok(None);
    }
    let n = game.len();
    let mut bounds = vec![1];
    if mem_bound > 1 {
        bounds.push(mem_bound);
    }
    for k in bounds {
        let mut s = Search::new(game, obj, allowed, k, v, cap);
        if let Some(seen) = s.run()? {
            let visited = (0..n).map(|w| (0..k).any(|m| seen[m * n + w])).collect();
            return Ok(Some((s.strategy(), visited)));
        }
    }
    Ok(None)
}

/// Configurations from which some pure strategy wins the SAS objective
/// against every Player-1 strategy while using at most `mem_bound` memory
/// states after the first configuration.
///
/// For games, the search is confined to configurations won in every MDP
/// obtained by fixing a memoryless Player-1 strategy. Winning and losing
/// are shared between start configurations: the suffix
/// of a winning strategy wins from every configuration it visits, so those
/// are won too; a lost configuration is excluded from later searches.
pub fn oracle_solve_sas(game: &Game, obj: &CombinedObjective, mem_bound: usize) -> Result<ConfigSet> {
    oracle_solve_sas_capped(game, obj, mem_bound, SEARCH_CAP)
}

pub fn oracle_solve_sas_capped(game: &Game, obj: &CombinedObjective, mem_bound: usize, cap: u64) -> Result<ConfigSet> {
    let n = game.len();
    let mut allowed = candidate_set(game, obj)?;
    if !game.is_mdp() {
        // A strategy winning the game wins every MDP left by a memoryless Player-1 strategy.
        let mut err = None;
        find_memoryless(game, Player::One, None, ENUM_CAP, |pi| {
            match oracle_solve_sas_capped(&game.fix_player1(pi), obj, mem_bound, cap) {
                Ok(r) => {
                    for (v, a) in allowed.iter_mut().enumerate() {
                        *a &= r.contains(v);
                    }
                }
                Err(e) => {
                    err.get_or_insert(e);
                }
            }
            err.is_some() || !allowed.contains(&true)
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        allowed = safe_core(game, &allowed);
    }
    let mut won = vec![false; n];
    let mut order: Vec<usize> = game.configs().collect();
    let indeg = game.predecessors();
    order.sort_by_key(|v| std::cmp::Reverse(indeg[*v].len()));
    for v in order {
        if won[v] || !allowed[v] {
            continue;
        }
        match sas_search(game, obj, mem_bound, v, &allowed, cap)? {
            Some((_, visited)) => {
                for w in 0..n {
                    won[w] |= visited[w];
                }
            }
            None => {
                allowed[v] = false;
                allowed = safe_core(game, &allowed);
            }
        }
    }
    Ok(ConfigSet::from_mask(won))
}
