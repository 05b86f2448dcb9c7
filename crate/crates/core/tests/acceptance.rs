//! Acceptance suite: one pass/fail line per criterion, non-zero exit on failure.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spg_core::analysis::{bottom_sccs, chain_satisfies_almost_sure, chain_satisfies_sure, reach_probabilities};
use spg_core::chain::product;
use spg_core::conj::solve_conj_parity;
use spg_core::format::{parse_game, parse_rational};
use spg_core::gen::{random_game, GenParams};
use spg_core::oracle::{oracle_almost_sure_reach, oracle_solve_conj, oracle_solve_parity, oracle_solve_sas};
use spg_core::parity::solve_parity;
use spg_core::ranking::{check_almost_sure_ranking, extract_rankings};
use spg_core::sas_game::solve_sas_game_fm;
use spg_core::sas_mdp::solve_sas_mdp_fm;
use spg_core::sls::{almost_sure_reach, solve_sls};
use spg_core::{ConfigSet, FiniteMemoryStrategy, Game, MemorylessStrategy, Mode, Owner, Player};

fn load(name: &str) -> Game {
    let path = format!("{}/../../games/{name}.game", env!("CARGO_MANIFEST_DIR"));
    parse_game(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn partition(w0: &ConfigSet, w1: &ConfigSet) -> bool {
    w0.intersection(w1).is_empty() && w0.union(w1).len() == w0.universe()
}

struct Outcome {
    ok: bool,
    detail: String,
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.3}s (limit {}s)", e.as_secs_f64(), limit.as_secs()))
}

/// The counterexample MDP: no finite-memory strategy wins, and the two
/// natural candidates fail for the stated reasons.
fn c1() -> Outcome {
    let t = Instant::now();
    let g = load("fig1");
    let w = g.combined(Mode::Sas).unwrap();
    let (c, p, r) = (1, 2, 3);
    let pipeline_empty = solve_sas_mdp_fm(&g, &w).unwrap().w0.is_empty();
    let oracle_empty = oracle_solve_sas(&g, &w, 4).unwrap().is_empty();
    let no_p1 = MemorylessStrategy::new(Player::One, g.len());

    let mut always = MemorylessStrategy::new(Player::Zero, g.len());
    for v in g.owned_by(Owner::Player0) {
        always.set(v, g.succ(v)[0]);
    }
    always.set(c, p);
    let chain = product(&g, &always.to_finite_memory(&g), &no_p1).unwrap();
    let always_fails_sure = !chain_satisfies_sure(&chain, &w.sure);

    // Memory counts visits to c: the first N go to p, later ones to r.
    let n = 3;
    let mut after = FiniteMemoryStrategy::new(Player::Zero, n + 1, g.len());
    for m in 0..=n {
        after.update[m][c] = (m + 1).min(n);
        after.output[m][c] = Some(if m < n { p } else { r });
    }
    after.initial = 0;
    let after = after.completed(&g);
    let chain = product(&g, &after, &no_p1).unwrap();
    let bottom_has_r = bottom_sccs(&chain).iter().any(|b| b.iter().any(|s| chain.states[*s].1 == r));
    let after_fails_as = !chain_satisfies_almost_sure(&chain, &w.secondary) && bottom_has_r;

    let (fast, time) = within(t, Duration::from_secs(1));
    outcome(
        pipeline_empty && oracle_empty && always_fails_sure && after_fails_as && fast,
        format!(
            "pipeline w0=∅ {pipeline_empty}, oracle(4) w0=∅ {oracle_empty}, always c->p fails sure {always_fails_sure}, c->r after {n} fails a.s. {after_fails_as}, {time}"
        ),
    )
}

/// Limit-sure winning strictly extends SAS winning on the second example.
fn c2() -> Outcome {
    let t = Instant::now();
    let g = load("fig2");
    let sls = solve_sls(&g, &g.combined(Mode::Sls).unwrap()).unwrap();
    let sas = solve_sas_game_fm(&g, &g.combined(Mode::Sas).unwrap()).unwrap();
    let strict = sas.w0.is_subset(&sls.z) && sas.w0.len() < sls.z.len();
    let eps = parse_rational("1/16").unwrap();
    let built = sls.strategy_builder(&eps).unwrap();
    let chain = product(&g, &built.strategy, &MemorylessStrategy::new(Player::One, g.len())).unwrap();
    let target: Vec<bool> = chain.states.iter().map(|(_, v)| sls.a.contains(*v)).collect();
    let reach = reach_probabilities(&chain, &target)[chain.init].clone();
    let exact = reach == parse_rational("15/16").unwrap();
    let sure = chain_satisfies_sure(&chain, &g.prio_sure.clone().unwrap());
    let (fast, time) = within(t, Duration::from_secs(1));
    outcome(
        strict && exact && sure && fast,
        format!(
            "sls z={:?} ⊋ sas w0={:?} {strict}, N={} reach={reach} exact {exact}, sure {sure}, {time}",
            sls.z.to_vec(),
            sas.w0.to_vec(),
            built.horizon
        ),
    )
}

fn mdp_suite() -> Vec<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..200).map(|_| random_game(&mut rng, &GenParams::mdp(6, 3))).collect()
}

fn game_suite() -> Vec<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    (0..150).map(|_| random_game(&mut rng, &GenParams::game(6, 3, 3))).collect()
}

/// MDP pipeline against the bounded-memory oracle.
fn c3(suite: &[Game]) -> Outcome {
    let t = Instant::now();
    let mut bad = 0;
    for g in suite {
        let w = g.combined(Mode::Sas).unwrap();
        let bound = (w.sure.index() as usize).max(1);
        match (solve_sas_mdp_fm(g, &w), oracle_solve_sas(g, &w, bound)) {
            (Ok(s), Ok(o)) if s.w0 == o => {}
            _ => bad += 1,
        }
    }
    let (fast, time) = within(t, Duration::from_secs(300));
    outcome(bad == 0 && fast, format!("{} MDPs, {bad} mismatches, {time}", suite.len()))
}

/// Game pipeline against the oracle, with the Player-1 strategy refuting
/// every Player-0 strategy of at most 3 memory states on `w1`.
fn c4(suite: &[Game]) -> Outcome {
    let t = Instant::now();
    let (mut bad, mut not_partition, mut not_refuting) = (0, 0, 0);
    for g in suite {
        let w = g.combined(Mode::Sas).unwrap();
        let s = match solve_sas_game_fm(g, &w) {
            Ok(s) => s,
            Err(_) => {
                bad += 1;
                continue;
            }
        };
        if oracle_solve_sas(g, &w, 3).map_or(true, |o| o != s.w0) {
            bad += 1;
        }
        if !partition(&s.w0, &s.w1) {
            not_partition += 1;
        }
        let fixed = g.fix_player1(&s.strat1);
        if oracle_solve_sas(&fixed, &w, 3).map_or(true, |o| !o.intersection(&s.w1).is_empty()) {
            not_refuting += 1;
        }
    }
    let (fast, time) = within(t, Duration::from_secs(600));
    outcome(
        bad + not_partition + not_refuting == 0 && fast,
        format!(
            "{} games, {bad} mismatches, {not_partition} bad partitions, {not_refuting} strat1 refuted, {time}",
            suite.len()
        ),
    )
}

/// Parity and conjunction solvers against strategy enumeration.
fn c5() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut bad_parity, mut bad_conj) = (0, 0);
    for _ in 0..500 {
        let g = random_game(&mut rng, &GenParams::two_player(7, 4));
        let a = g.prio_sure.clone().unwrap();
        let s = solve_parity(&g, &a).unwrap();
        let (o0, o1) = oracle_solve_parity(&g, &a).unwrap();
        if s.w0 != o0 || s.w1 != o1 || !partition(&s.w0, &s.w1) {
            bad_parity += 1;
        }
    }
    for _ in 0..150 {
        let g = random_game(&mut rng, &GenParams::two_player(5, 3));
        let (a, b) = (g.prio_sure.clone().unwrap(), g.prio_sec.clone().unwrap());
        let ok = match (solve_conj_parity(&g, &a, &b), oracle_solve_conj(&g, &a, &b)) {
            (Ok(s), Ok((o0, o1))) => s.w0 == o0 && s.w1 == o1 && partition(&s.w0, &s.w1),
            _ => false,
        };
        if !ok {
            bad_conj += 1;
        }
    }
    let (fast, time) = within(t, Duration::from_secs(300));
    outcome(
        bad_parity + bad_conj == 0 && fast,
        format!("500 parity games {bad_parity} mismatches, 150 conjunction games {bad_conj} mismatches, {time}"),
    )
}

/// Size of the final parity game of the MDP pipeline.
fn c6(suite: &[Game]) -> Outcome {
    let (mut over, mut index_over) = (0, 0);
    let mut worst: f64 = 0.0;
    for g in suite {
        let w = g.combined(Mode::Sas).unwrap();
        let s = solve_sas_mdp_fm(g, &w).unwrap().stats;
        if s.parity > 8 * s.n * (s.d_as as usize + 1) * (s.d_s as usize + 1) {
            over += 1;
        }
        if s.parity_index > s.d_s + 1 {
            index_over += 1;
        }
        worst = worst.max(s.constant());
    }
    outcome(
        over + index_over == 0,
        format!(
            "{} MDPs, {over} over 8·n·(d_as+1)·(d_s+1), {index_over} over index d_s+1, measured constant max {worst:.3}",
            suite.len()
        ),
    )
}

/// Almost-sure reachability against exact reach probabilities.
fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for _ in 0..150 {
        let mut g = random_game(&mut rng, &GenParams::game(6, 3, 3));
        let n = g.len();
        let target = ConfigSet::from_mask((0..n).map(|_| rng.gen_bool(0.3)).collect());
        for v in target.iter() {
            g.set_owner(v, Owner::Player0);
            g.set_edges(v, vec![v], Vec::new());
        }
        let (z, _) = almost_sure_reach(&g, &target);
        if oracle_almost_sure_reach(&g, &target).map_or(true, |o| o != z) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("150 games, {bad} mismatches"))
}

/// Ranking certificates for every Player-0 win of the game suite.
fn c8(suite: &[Game]) -> Outcome {
    let (mut checked, mut bad) = (0, 0);
    for g in suite {
        let w = g.combined(Mode::Sas).unwrap();
        for c in extract_rankings(g, &w).unwrap() {
            checked += 1;
            let finite = c.ranking.vec[c.arena.init].is_some();
            if !finite || !check_almost_sure_ranking(&c.arena, &c.ranking, &w.secondary).unwrap() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0 && checked > 0, format!("{checked} won configurations certified, {bad} failures"))
}

fn main() {
    let mdps = mdp_suite();
    let games = game_suite();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("counterexample fidelity", Box::new(c1)),
        ("limit-sure separation", Box::new(c2)),
        ("MDP pipeline vs oracle", Box::new(|| c3(&mdps))),
        ("game pipeline vs oracle", Box::new(|| c4(&games))),
        ("parity and conjunction solvers", Box::new(c5)),
        ("size bounds", Box::new(|| c6(&mdps))),
        ("almost-sure reachability", Box::new(c7)),
        ("ranking certificates", Box::new(|| c8(&games))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {} {name}: {} ({})", i + 1, if o.ok { "PASS" } else { "FAIL" }, o.detail);
        if !o.ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
