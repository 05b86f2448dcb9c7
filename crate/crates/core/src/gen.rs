//! Seeded random instances for the validation suites.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain::MarkovChain;
use crate::game::{Game, Owner, Priorities, Prob};

/// Shape of a random game.
#[derive(Clone, Debug)]
pub struct GenParams {
    pub max_n: usize,
    /// Most Player-1 configurations; 0 gives MDPs (or non-stochastic one-player games).
    pub max_p1: usize,
    pub random: bool,
    pub max_sure: u32,
    pub max_sec: u32,
    pub max_branching: usize,
}

impl GenParams {
    /// MDPs with up to `n` configurations and priorities up to `d`.
    pub fn mdp(n: usize, d: u32) -> Self {
        GenParams { max_n: n, max_p1: 0, random: true, max_sure: d, max_sec: d, max_branching: 3 }
    }

    /// Stochastic games with up to `p1` Player-1 configurations.
    pub fn game(n: usize, p1: usize, d: u32) -> Self {
        GenParams { max_n: n, max_p1: p1, random: true, max_sure: d, max_sec: d, max_branching: 3 }
    }

    /// Non-stochastic two-player games.
    pub fn two_player(n: usize, d: u32) -> Self {
        GenParams { max_n: n, max_p1: n, random: false, max_sure: d, max_sec: d, max_branching: 3 }
    }
}

/// Splits 1 into `k <= 4` positive multiples of 1/4.
fn quarters(rng: &mut impl Rng, k: usize) -> Vec<Prob> {
    let mut parts = vec![1u32; k];
    for _ in k..4 {
        parts[rng.gen_range(0..k)] += 1;
    }
    parts.into_iter().map(|q| Prob::new(BigInt::from(q), BigInt::from(4))).collect()
}

/// A random game carrying both priority columns, with `init = 0`.
pub fn random_game(rng: &mut impl Rng, p: &GenParams) -> Game {
    let n = rng.gen_range(1..=p.max_n);
    let mut owners: Vec<Owner> = (0..n)
        .map(|_| if p.random && rng.gen_bool(0.4) { Owner::Random } else { Owner::Player0 })
        .collect();
    let p1 = rng.gen_range(0..=p.max_p1.min(n));
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    for &v in &ids[..p1] {
        owners[v] = Owner::Player1;
    }
    let mut g = Game::new("random");
    for &o in &owners {
        g.add_config(o, None);
    }
    for (v, &owner) in owners.iter().enumerate() {
        let k = rng.gen_range(1..=p.max_branching.min(n).min(4));
        let mut succ: Vec<usize> = (0..n).collect();
        succ.shuffle(rng);
        succ.truncate(k);
        succ.sort_unstable();
        let probs = if owner == Owner::Random { quarters(rng, k) } else { Vec::new() };
        g.set_edges(v, succ, probs);
    }
    g.prio_sure = Some(Priorities::new((0..n).map(|_| rng.gen_range(0..=p.max_sure)).collect()));
    g.prio_sec = Some(Priorities::new((0..n).map(|_| rng.gen_range(0..=p.max_sec)).collect()));
    g.init = Some(0);
    g
}

/// A random Markov chain on `n` states with priorities up to `d`.
pub fn random_chain(rng: &mut impl Rng, n: usize, d: u32) -> (MarkovChain, Vec<u32>) {
    let edges = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=n.min(3));
            let mut succ: Vec<usize> = (0..n).collect();
            succ.shuffle(rng);
            succ.into_iter().take(k).zip(quarters(rng, k)).collect()
        })
        .collect();
    let chain = MarkovChain { states: (0..n).map(|v| (0, v)).collect(), edges, init: 0 };
    (chain, (0..n).map(|_| rng.gen_range(0..=d)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn games_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_game(&mut a, &GenParams::game(6, 3, 3));
            assert!(g.validate().is_empty());
            assert!(g.owned_by(Owner::Player1).count() <= 3);
            assert_eq!(crate::format::serialize_game(&g), crate::format::serialize_game(&random_game(&mut b, &GenParams::game(6, 3, 3))));
        }
    }

    #[test]
    fn chain_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c, _) = random_chain(&mut rng, 5, 3);
        for row in &c.edges {
            assert!(row.iter().fold(Prob::from_integer(0.into()), |s, (_, p)| s + p).is_one());
        }
    }
}
