//! Non-stochastic games won by the conjunction of two parity conditions,
//! solved through Streett pairs and an index appearance record product.

use crate::analysis::find_memoryless;
use crate::error::{Error, Result};
use crate::game::{ConfigSet, FiniteMemoryStrategy, Game, MemorylessStrategy, Owner, Player, Priorities};
use crate::graph;
use crate::parity::{solve_parity, ParitySolution};
use crate::reduce::{build_product, Product, PRODUCT_CAP};

/// Default limit on the number of Streett pairs.
pub const PAIR_CAP: usize = 6;

/// Limit on memoryless Player-1 strategies tried when the projected one fails.
pub const FALLBACK_CAP: usize = 200_000;

/// Streett pairs `(R, G)`: a play wins iff for every pair, visiting `R`
/// infinitely often implies visiting `G` infinitely often.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreettPairs {
    pub pairs: Vec<(ConfigSet, ConfigSet)>,
}

impl StreettPairs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// One pair per objective and odd priority `k` occurring in it:
/// `R = prio⁻¹(k)`, `G = prio⁻¹(even j < k)`.
pub fn conj_to_streett(a: &Priorities, b: &Priorities) -> StreettPairs {
    let mut pairs = Vec::new();
    for obj in [a, b] {
        let mut odd: Vec<u32> = obj.as_slice().iter().copied().filter(|p| p % 2 == 1).collect();
        odd.sort_unstable();
        odd.dedup();
        for k in odd {
            let r = ConfigSet::from_mask(obj.as_slice().iter().map(|p| *p == k).collect());
            let g = ConfigSet::from_mask(obj.as_slice().iter().map(|p| *p < k && p % 2 == 0).collect());
            pairs.push((r, g));
        }
    }
    StreettPairs { pairs }
}

/// Product of `game` with an index appearance record over the pairs.
///
/// A node stores the configuration and the record before reading it. With
/// `h` (resp. `l`) the largest 1-based record position of a pair whose `G`
/// (resp. `R`) contains the configuration, the max-convention colour is `2h`
/// if `h >= l` and `2l - 1` otherwise; the emitted min-even priority is
/// `2k - colour`. Pairs whose `G` was hit move to the front.
pub fn streett_to_parity_iar(game: &Game, pairs: &StreettPairs) -> Result<Product> {
    let roots: Vec<usize> = game.configs().collect();
    streett_to_parity_iar_capped(game, pairs, &roots, PAIR_CAP)
}

/// Like [`streett_to_parity_iar`], built only from the entries of `roots`.
pub fn streett_to_parity_iar_capped(game: &Game, pairs: &StreettPairs, roots: &[usize], pair_cap: usize) -> Result<Product> {
    let k = pairs.len();
    if k > pair_cap {
        return Err(Error::Cap(format!("{k} Streett pairs exceed the cap of {pair_cap}")));
    }
    let in_g = |i: u8, v: usize| pairs.pairs[i as usize].1.contains(v);
    let in_r = |i: u8, v: usize| pairs.pairs[i as usize].0.contains(v);
    build_product(
        game,
        &format!("{}-iar", game.name),
        |_| (0..k as u8).collect::<Vec<u8>>(),
        |perm, v, _| {
            let mut next: Vec<u8> = perm.iter().copied().filter(|i| in_g(*i, v)).collect();
            next.extend(perm.iter().copied().filter(|i| !in_g(*i, v)));
            next
        },
        |perm, v| {
            let pos = |f: &dyn Fn(u8) -> bool| perm.iter().rposition(|i| f(*i)).map_or(0, |p| p + 1) as u32;
            let h = pos(&|i| in_g(i, v));
            let l = pos(&|i| in_r(i, v));
            let colour = if h >= l { 2 * h } else { 2 * l - 1 };
            2 * k as u32 - colour
        },
        |perm| perm.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(""),
        roots,
        PRODUCT_CAP,
    )
}

/// Winning regions and strategies for the conjunction of two parity conditions.
#[derive(Clone, Debug)]
pub struct ConjSolution {
    pub w0: ConfigSet,
    pub w1: ConfigSet,
    /// Memory: product nodes plus a start state, minimized.
    pub strat0: FiniteMemoryStrategy,
    pub strat1: MemorylessStrategy,
}

/// A solved IAR product, kept for callers that pull strategies back themselves.
#[derive(Clone, Debug)]
pub struct SolvedProduct {
    pub product: Product,
    pub solution: ParitySolution,
}

impl SolvedProduct {
    /// Base configurations whose entry node is won by Player 0.
    pub fn region0(&self, n: usize) -> ConfigSet {
        ConfigSet::from_ids(n, (0..n).filter(|v| self.solution.w0.contains(self.product.entry(*v))))
    }
}

/// Solves a product and returns it with its parity solution.
pub fn solve_product(product: Product) -> Result<SolvedProduct> {
    let solution = solve_parity(&product.game, &product.prio)?;
    Ok(SolvedProduct { product, solution })
}

/// Turns a memoryless Player-0 strategy on a product into a finite-memory
/// strategy on the base game whose memory is the current product node.
/// Memory `product.len()` is the start state.
pub fn strategy_through_product(base: &Game, product: &Product, sigma: &MemorylessStrategy) -> FiniteMemoryStrategy {
    let n = base.len();
    let start = product.len();
    let mut s = FiniteMemoryStrategy::new(Player::Zero, start + 1, n);
    s.initial = start;
    for v in 0..n {
        s.update[start][v] = product.entry(v);
    }
    for h in 0..product.len() {
        for v in 0..n {
            s.update[h][v] = product.step(h, v).unwrap_or(product.entry(v));
        }
    }
    for m in 0..=start {
        for v in base.owned_by(Owner::Player0) {
            let h = if m < start && product.base[m] == v { m } else { product.entry(v) };
            let choice = sigma.choice(h).map(|x| product.base[x]).unwrap_or(base.succ(v)[0]);
            s.output[m][v] = Some(choice);
        }
    }
    s
}

/// Whether a memoryless Player-1 strategy keeps every configuration of
/// `region` from reaching a cycle good for both objectives.
pub fn player1_refutes(game: &Game, a: &Priorities, b: &Priorities, pi: &MemorylessStrategy, region: &ConfigSet) -> bool {
    let adj: Vec<Vec<usize>> = game
        .configs()
        .map(|v| match (game.owner(v), pi.choice(v)) {
            (Owner::Player1, Some(w)) => vec![w],
            _ => game.succ(v).to_vec(),
        })
        .collect();
    let alive = vec![true; game.len()];
    let good = graph::good_cycle_nodes(&adj, &[a.as_slice(), b.as_slice()], &alive);
    let reach = graph::can_reach(&adj, &good, &alive);
    region.iter().all(|v| !reach[v])
}

/// Projects the product's Player-1 strategy onto base configurations; `None`
/// if two reachable product nodes of one configuration disagree.
fn project_player1(game: &Game, sp: &SolvedProduct, w1: &ConfigSet) -> Option<MemorylessStrategy> {
    let p = &sp.product;
    let sol = &sp.solution;
    let adj: Vec<Vec<usize>> = (0..p.len())
        .map(|h| match sol.strat1.choice(h) {
            Some(x) if p.game.owner(h) == Owner::Player1 => vec![x],
            _ => p.game.succ(h).to_vec(),
        })
        .collect();
    let roots = w1.iter().map(|v| p.entry(v));
    let seen = graph::reachable(&adj, roots, &vec![true; p.len()]);
    let mut pi = MemorylessStrategy::new(Player::One, game.len());
    for h in (0..p.len()).filter(|h| seen[*h] && p.game.owner(*h) == Owner::Player1) {
        let v = p.base[h];
        let w = p.base[sol.strat1.choice(h)?];
        match pi.choice(v) {
            Some(x) if x != w => return None,
            _ => pi.set(v, w),
        }
    }
    for v in game.owned_by(Owner::Player1) {
        if pi.choice(v).is_none() {
            let w = game.succ(v).iter().copied().find(|w| w1.contains(*w)).unwrap_or(game.succ(v)[0]);
            pi.set(v, w);
        }
    }
    Some(pi)
}

/// Solves the conjunction game exactly.
pub fn solve_conj_parity(game: &Game, a: &Priorities, b: &Priorities) -> Result<ConjSolution> {
    if !game.is_non_stochastic() {
        return Err(Error::Stochastic);
    }
    let pairs = conj_to_streett(a, b);
    let sp = solve_product(streett_to_parity_iar(game, &pairs)?)?;
    let n = game.len();
    let w0 = sp.region0(n);
    let w1 = w0.complement();
    let strat0 = strategy_through_product(game, &sp.product, &sp.solution.strat0).minimized();
    let strat1 = match project_player1(game, &sp, &w1) {
        Some(pi) if player1_refutes(game, a, b, &pi, &w1) => pi,
        _ => {
            log::debug!("projected Player-1 strategy rejected, enumerating");
            find_memoryless(game, Player::One, Some(w1.mask()), FALLBACK_CAP, |pi| {
                player1_refutes(game, a, b, pi, &w1)
            })?
            .ok_or_else(|| Error::Verification("no memoryless Player-1 strategy refutes the region".into()))?
        }
    };
    Ok(ConjSolution { w0, w1, strat0, strat1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_game;

    #[test]
    fn buchi_is_one_pair() {
        let a = Priorities::new(vec![0, 1, 1]);
        let p = conj_to_streett(&a, &Priorities::constant(3, 0));
        assert_eq!(p.pairs, vec![(ConfigSet::from_ids(3, [1, 2]), ConfigSet::from_ids(3, [0]))]);
    }

    #[test]
    fn iar_size_bound() {
        let g = parse_game(
            "game t\nconfig 0 owner=p0\nconfig 1 owner=p1\nconfig 2 owner=p0\nconfig 3 owner=p1\nedge 0 1\nedge 0 2\nedge 1 2\nedge 1 3\nedge 2 3\nedge 2 0\nedge 3 0\nedge 3 3\n",
        )
        .unwrap();
        let a = Priorities::new(vec![0, 1, 2, 1]);
        let b = Priorities::new(vec![1, 0, 0, 2]);
        let pairs = conj_to_streett(&a, &b);
        assert_eq!(pairs.len(), 2);
        let p = streett_to_parity_iar(&g, &pairs).unwrap();
        assert!(p.len() <= 4 * 2 * 3);
        assert!(p.prio.index() <= 2 * 2 + 1);
    }

    #[test]
    fn conj_needs_both_conditions() {
        // Player 0 chooses forever between two self-loops, each good for one objective only.
        let g = parse_game("game t\nconfig 0 owner=p0\nconfig 1 owner=p0\nedge 0 0\nedge 0 1\nedge 1 1\nedge 1 0\n").unwrap();
        let a = Priorities::new(vec![0, 1]);
        let b = Priorities::new(vec![1, 0]);
        let s = solve_conj_parity(&g, &a, &b).unwrap();
        // alternating visits both: min is 0 in each column
        assert_eq!(s.w0.len(), 2);
        let a2 = Priorities::new(vec![0, 1]);
        let b2 = Priorities::new(vec![1, 2]);
        let s = solve_conj_parity(&g, &a2, &b2).unwrap();
        assert!(s.w0.is_empty());
    }

    #[test]
    fn trivial_second_condition_matches_parity() {
        let g = parse_game(
            "game t\nconfig 0 owner=p1\nconfig 1 owner=p0\nconfig 2 owner=p0\nedge 0 1\nedge 0 2\nedge 1 1\nedge 2 2\nedge 2 0\n",
        )
        .unwrap();
        let a = Priorities::new(vec![2, 0, 1]);
        let s = solve_conj_parity(&g, &a, &Priorities::constant(3, 0)).unwrap();
        let p = solve_parity(&g, &a).unwrap();
        assert_eq!(s.w0, p.w0);
    }
}
