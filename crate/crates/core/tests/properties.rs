//! Invariants checked on seeded random instances.

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spg_core::analysis::{chain_satisfies_almost_sure, chain_satisfies_sure, reach_probabilities};
use spg_core::conj::{conj_to_streett, streett_to_parity_iar};
use spg_core::format::{parse_game, serialize_game};
use spg_core::gen::{random_chain, random_game, GenParams};
use spg_core::oracle::{oracle_solve_parity, oracle_solve_sas, simple_cycles};
use spg_core::parity::solve_parity;
use spg_core::reduce::{gadget_reduction, GadgetKind};
use spg_core::sas_game::solve_sas_game_fm;
use spg_core::sas_mdp::solve_sas_mdp_fm;
use spg_core::sls::solve_sls;
use spg_core::{Mode, Owner, Prob};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sure_implies_almost_sure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let (chain, prio) = random_chain(&mut r, n, 3);
        let alpha = spg_core::Priorities::new(prio);
        if chain_satisfies_sure(&chain, &alpha) {
            prop_assert!(chain_satisfies_almost_sure(&chain, &alpha));
        }
    }

    #[test]
    fn sure_check_matches_cycle_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let (chain, prio) = random_chain(&mut r, n, 3);
        let adj: Vec<Vec<usize>> = chain.edges.iter().map(|row| row.iter().map(|(t, _)| *t).collect()).collect();
        let reach = spg_core::graph::reachable(&adj, [chain.init], &vec![true; n]);
        let odd = simple_cycles(&adj)
            .iter()
            .any(|c| reach[c[0]] && c.iter().map(|s| prio[*s]).min().unwrap() % 2 == 1);
        prop_assert_eq!(chain_satisfies_sure(&chain, &spg_core::Priorities::new(prio)), !odd);
    }

    #[test]
    fn reach_probabilities_are_exact_probabilities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let (chain, _) = random_chain(&mut r, n, 0);
        let target: Vec<bool> = (0..n).map(|_| r.gen_bool(0.3)).collect();
        let x = reach_probabilities(&chain, &target);
        let adj: Vec<Vec<usize>> = chain.edges.iter().map(|row| row.iter().map(|(t, _)| *t).collect()).collect();
        let can = spg_core::graph::can_reach(&adj, &target, &vec![true; n]);
        for s in 0..n {
            prop_assert!(x[s] >= Prob::zero() && x[s] <= Prob::one());
            if target[s] {
                prop_assert!(x[s].is_one());
            }
            if !can[s] {
                prop_assert!(x[s].is_zero());
            }
        }
    }

    #[test]
    fn parity_regions_partition_and_match_oracle(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::two_player(6, 4));
        let a = g.prio_sure.clone().unwrap();
        let s = solve_parity(&g, &a).unwrap();
        prop_assert!(s.w0.intersection(&s.w1).is_empty());
        prop_assert_eq!(s.w0.union(&s.w1).len(), g.len());
        let (o0, _) = oracle_solve_parity(&g, &a).unwrap();
        prop_assert_eq!(s.w0, o0);
    }

    #[test]
    fn iar_product_stays_within_bounds(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::two_player(5, 3));
        let pairs = conj_to_streett(g.prio_sure.as_ref().unwrap(), g.prio_sec.as_ref().unwrap());
        let k = pairs.len();
        let p = streett_to_parity_iar(&g, &pairs).unwrap();
        let fact: usize = (1..=k).product();
        prop_assert!(p.len() <= g.len() * fact);
        prop_assert!(p.prio.index() as usize <= 2 * k);
    }

    #[test]
    fn gadget_shape(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::game(5, 2, 3));
        let w = g.combined(Mode::Sas).unwrap();
        let gg = gadget_reduction(&g, &w.sure, &w.secondary).unwrap();
        prop_assert!(gg.game.is_non_stochastic());
        for (x, k) in gg.kind.iter().enumerate() {
            prop_assert_eq!(gg.a.get(x), w.sure.get(k.source()));
            let want = match *k {
                GadgetKind::Plain(v) => g.owner(v),
                GadgetKind::Bar(_) => Owner::Player1,
                GadgetKind::Tilde(..) => Owner::Player0,
                GadgetKind::Hat(_, j) if j % 2 == 0 => Owner::Player1,
                GadgetKind::Hat(..) => Owner::Player0,
            };
            prop_assert_eq!(gg.game.owner(x), want);
        }
    }

    #[test]
    fn game_regions_partition_and_are_closed(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::game(6, 3, 3));
        let w = g.combined(Mode::Sas).unwrap();
        let s = solve_sas_game_fm(&g, &w).unwrap();
        prop_assert!(s.w0.intersection(&s.w1).is_empty());
        prop_assert_eq!(s.w0.union(&s.w1).len(), g.len());
        for v in s.w0.iter() {
            if g.owner(v) != Owner::Player0 {
                prop_assert!(g.succ(v).iter().all(|x| s.w0.contains(*x)));
            }
        }
    }

    #[test]
    fn game_pipeline_agrees_with_mdp_pipeline(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::mdp(6, 3));
        let w = g.combined(Mode::Sas).unwrap();
        prop_assert_eq!(solve_sas_game_fm(&g, &w).unwrap().w0, solve_sas_mdp_fm(&g, &w).unwrap().w0);
    }

    #[test]
    fn oracle_is_monotone_in_memory(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::mdp(4, 3));
        let w = g.combined(Mode::Sas).unwrap();
        let one = oracle_solve_sas(&g, &w, 1).unwrap();
        let two = oracle_solve_sas(&g, &w, 2).unwrap();
        prop_assert!(one.is_subset(&two));
    }

    #[test]
    fn sls_regions_nest(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::game(5, 2, 3));
        let s = solve_sls(&g, &g.combined(Mode::Sls).unwrap()).unwrap();
        prop_assert!(s.a.is_subset(&s.z));
        prop_assert!(s.z.is_subset(&s.x));
        if s.a.len() == g.len() {
            prop_assert_eq!(s.z.len(), g.len());
        }
    }

    #[test]
    fn sls_witnesses_meet_their_epsilon(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::game(5, 2, 3));
        let s = solve_sls(&g, &g.combined(Mode::Sls).unwrap()).unwrap();
        let eps = [Prob::new(1.into(), 4.into()), Prob::new(1.into(), 64.into())];
        let a = s.strategy_builder(&eps[0]).unwrap();
        let b = s.strategy_builder(&eps[1]).unwrap();
        prop_assert!(b.horizon >= a.horizon);
        for (e, x) in eps.iter().zip([&a, &b]) {
            for (_, p) in &x.reach {
                prop_assert!(*p >= Prob::one() - e);
            }
        }
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let g = random_game(&mut rng(seed), &GenParams::game(6, 3, 3));
        let text = serialize_game(&g);
        prop_assert_eq!(serialize_game(&parse_game(&text).unwrap()), text);
    }
}
