//! Finite-memory sure/almost-sure solving for stochastic games: gadgets
//! replace the random configurations and the resulting game with a
//! conjunction of two parity conditions is solved through an index
//! appearance record product.

use crate::analysis::{find_memoryless, verify_sas_strategy};
use crate::conj::{conj_to_streett, solve_product, streett_to_parity_iar_capped, SolvedProduct, FALLBACK_CAP, PAIR_CAP};
use crate::error::{Error, Result};
use crate::game::{CombinedObjective, ConfigSet, FiniteMemoryStrategy, Game, MemorylessStrategy, Mode, Owner, Player};
use crate::graph;
use crate::pullback::{Pipeline, PulledBack};
use crate::reduce::{gadget_reduction, GadgetGame, ReductionTrace};
use crate::sas_mdp::sas_mdp_region;

/// Winning regions and strategies of both players.
#[derive(Clone, Debug)]
pub struct SasGameSolution {
    pub w0: ConfigSet,
    pub w1: ConfigSet,
    /// Winning from every configuration of `w0`; memory minimized.
    pub strat0: FiniteMemoryStrategy,
    /// Winning from every configuration of `w1` against finite-memory strategies.
    pub strat1: MemorylessStrategy,
    pub trace: ReductionTrace,
}

/// Intermediate objects of the pipeline.
pub struct GamePipeline {
    pub gadget: GadgetGame,
    pub solved: SolvedProduct,
}

impl GamePipeline {
    pub fn build(game: &Game, w: &CombinedObjective) -> Result<GamePipeline> {
        if w.mode != Mode::Sas {
            return Err(Error::Objective("expected a sure/almost-sure objective".into()));
        }
        let gadget = gadget_reduction(game, &w.sure, &w.secondary)?;
        let pairs = conj_to_streett(&gadget.a, &gadget.b);
        let solved = solve_product(streett_to_parity_iar_capped(&gadget.game, &pairs, &gadget.entry, PAIR_CAP)?)?;
        Ok(GamePipeline { gadget, solved })
    }

    /// Input configurations won by Player 0.
    pub fn region(&self, n: usize) -> ConfigSet {
        let p = &self.solved.product;
        ConfigSet::from_ids(n, (0..n).filter(|v| self.solved.solution.w0.contains(p.entry(self.gadget.entry[*v]))))
    }

    pub fn pipeline<'a>(&'a self, game: &'a Game) -> Pipeline<'a> {
        let n = game.len();
        Pipeline {
            game,
            gadget: &self.gadget,
            mid_config: (0..n).map(Some).collect(),
            mid_target: (0..n).map(Some).collect(),
            mid_entry: (0..n).collect(),
            product: &self.solved.product,
            sigma: &self.solved.solution.strat0,
        }
    }

    pub fn pull_back(&self, game: &Game) -> PulledBack {
        self.pipeline(game).pull_back()
    }

    pub fn trace(&self, game: &Game) -> ReductionTrace {
        let mut t = ReductionTrace::default();
        t.push("input", game.clone(), (0..game.len()).map(|v| (Some(v), "input".to_string())).collect());
        t.push("gadget", self.gadget.game.clone(), self.gadget.origin());
        let p = &self.solved.product;
        t.push("parity", p.game.clone(), p.origin());
        t
    }

    /// Projects the product's Player-1 strategy onto input configurations,
    /// following it from the entries of `w1`; the first choice seen wins.
    pub fn project_player1(&self, game: &Game, w1: &ConfigSet) -> MemorylessStrategy {
        let p = &self.solved.product;
        let sol = &self.solved.solution;
        let adj: Vec<Vec<usize>> = (0..p.len())
            .map(|h| match sol.strat1.choice(h) {
                Some(x) if p.game.owner(h) == Owner::Player1 => vec![x],
                _ => p.game.succ(h).to_vec(),
            })
            .collect();
        let roots = w1.iter().map(|v| p.entry(self.gadget.entry[v]));
        let seen = graph::reachable(&adj, roots, &vec![true; p.len()]);
        let mut pi = MemorylessStrategy::new(Player::One, game.len());
        for h in (0..p.len()).filter(|h| seen[*h]) {
            let g = p.base[h];
            let v = self.gadget.kind[g].source();
            if g != self.gadget.entry[v] || game.owner(v) != Owner::Player1 || pi.choice(v).is_some() {
                continue;
            }
            if let Some(x) = sol.strat1.choice(h) {
                pi.set(v, self.gadget.kind[p.base[x]].source());
            }
        }
        for v in game.owned_by(Owner::Player1) {
            if pi.choice(v).is_none() {
                let w = game.succ(v).iter().copied().find(|w| w1.contains(*w)).unwrap_or(game.succ(v)[0]);
                pi.set(v, w);
            }
        }
        pi
    }
}

/// Whether fixing `pi` leaves Player 0 no finite-memory win from `w1`.
pub fn player1_refutes_sas(game: &Game, w: &CombinedObjective, pi: &MemorylessStrategy, w1: &ConfigSet) -> Result<bool> {
    let mdp = game.fix_player1(pi);
    Ok(sas_mdp_region(&mdp, w)?.intersection(w1).is_empty())
}

/// Decides finite-memory SAS winning in a stochastic game and returns
/// verified strategies for both players.
pub fn solve_sas_game_fm(game: &Game, w: &CombinedObjective) -> Result<SasGameSolution> {
    let pl = GamePipeline::build(game, w)?;
    let n = game.len();
    let w0 = pl.region(n);
    let w1 = w0.complement();
    let strat0 = pl.pull_back(game).strategy.minimized();
    for v in w0.iter() {
        if !verify_sas_strategy(game, w, &strat0, v)? {
            return Err(Error::Verification(format!("pulled-back strategy fails from {}", game.display_name(v))));
        }
    }
    let projected = pl.project_player1(game, &w1);
    let strat1 = if player1_refutes_sas(game, w, &projected, &w1)? {
        projected
    } else {
        log::debug!("projected Player-1 strategy rejected, enumerating");
        let mut err = None;
        let found = find_memoryless(game, Player::One, Some(w1.mask()), FALLBACK_CAP, |pi| {
            player1_refutes_sas(game, w, pi, &w1).unwrap_or_else(|e| {
                err.get_or_insert(e);
                false
            })
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        found.ok_or_else(|| Error::Verification("no memoryless Player-1 strategy refutes the region".into()))?
    };
    Ok(SasGameSolution { w0, w1, strat0, strat1, trace: pl.trace(game) })
}

/// Region only, without strategies.
pub fn sas_game_region(game: &Game, w: &CombinedObjective) -> Result<ConfigSet> {
    Ok(GamePipeline::build(game, w)?.region(game.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_game;
    use crate::game::Priorities;
    use crate::sas_mdp::solve_sas_mdp_fm;

    fn fig(name: &str) -> Game {
        parse_game(&std::fs::read_to_string(format!("{}/../../games/{name}.game", env!("CARGO_MANIFEST_DIR"))).unwrap())
            .unwrap()
    }

    #[test]
    fn mdp_inputs_match_mdp_pipeline() {
        for name in ["fig1", "fig2"] {
            let g = fig(name);
            let w = g.combined(Mode::Sas).unwrap();
            let s = solve_sas_game_fm(&g, &w).unwrap();
            assert_eq!(s.w0, solve_sas_mdp_fm(&g, &w).unwrap().w0, "{name}");
        }
    }

    #[test]
    fn player1_dominated_choice() {
        // 0 (P1) -> 1 or 2, both odd self-loops for the sure condition.
        let g = parse_game(
            "game t\nconfig 0 owner=p1\nconfig 1 owner=p0\nconfig 2 owner=rand\nedge 0 1\nedge 0 2\nedge 1 1\nedge 2 2 prob=1\n",
        )
        .unwrap();
        let w = CombinedObjective::sas(Priorities::new(vec![0, 1, 1]), Priorities::constant(3, 0)).unwrap();
        let s = solve_sas_game_fm(&g, &w).unwrap();
        assert!(s.w0.is_empty());
        assert_eq!(s.w1.len(), 3);
    }

    #[test]
    fn gadget_keeps_sure_priorities() {
        let g = fig("fig1");
        let w = g.combined(Mode::Sas).unwrap();
        let gg = gadget_reduction(&g, &w.sure, &w.secondary).unwrap();
        for (x, k) in gg.kind.iter().enumerate() {
            assert_eq!(gg.a.get(x), w.sure.get(k.source()));
        }
    }
}
