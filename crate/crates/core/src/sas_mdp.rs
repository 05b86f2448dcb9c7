//! Finite-memory sure/almost-sure solving for MDPs: restricted copies turn
//! the almost-sure parity condition into Büchi, gadgets remove the random
//! configurations, and a monitor turns Büchi ∧ parity into one parity
//! condition solved by Zielonka's algorithm.

use crate::analysis::verify_sas_strategy;
use crate::conj::{solve_product, SolvedProduct};
use crate::error::{Error, Result};
use crate::game::{CombinedObjective, ConfigSet, FiniteMemoryStrategy, Game, Mode};
use crate::pullback::{Pipeline, PulledBack};
use crate::reduce::{
    as_parity_to_buchi, buchi_and_parity_to_parity_capped, buchi_mdp_to_conj_game, CopiesGame, CopyKind, GadgetGame,
    ReductionTrace, PRODUCT_CAP,
};

/// Sizes of the pipeline stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeStats {
    pub n: usize,
    pub d_s: u32,
    pub d_as: u32,
    pub copies: usize,
    pub gadget: usize,
    pub parity: usize,
    pub parity_index: u32,
}

impl SizeStats {
    /// `parity / (n (d_as+1) (d_s+1))`.
    pub fn constant(&self) -> f64 {
        self.parity as f64 / (self.n * (self.d_as as usize + 1) * (self.d_s as usize + 1)) as f64
    }
}

#[derive(Clone, Debug)]
pub struct SasMdpSolution {
    pub w0: ConfigSet,
    /// Winning from every configuration of `w0`; memory minimized.
    pub strategy: FiniteMemoryStrategy,
    pub trace: ReductionTrace,
    pub stats: SizeStats,
}

/// Intermediate objects of the pipeline.
pub struct MdpPipeline {
    pub copies: CopiesGame,
    pub gadget: GadgetGame,
    pub solved: SolvedProduct,
}

impl MdpPipeline {
    pub fn build(mdp: &Game, w: &CombinedObjective) -> Result<MdpPipeline> {
        if w.mode != Mode::Sas {
            return Err(Error::Objective("expected a sure/almost-sure objective".into()));
        }
        let copies = as_parity_to_buchi(mdp, w)?;
        let (gadget, buchi) = buchi_mdp_to_conj_game(&copies.game, &copies.sure, &copies.buchi)?;
        let roots: Vec<usize> = copies.orig.iter().map(|o| gadget.entry[*o]).collect();
        let product = buchi_and_parity_to_parity_capped(&gadget.game, &buchi, &gadget.a, &roots, PRODUCT_CAP)?;
        let solved = solve_product(product)?;
        Ok(MdpPipeline { copies, gadget, solved })
    }

    /// Input configurations won by Player 0.
    pub fn region(&self, n: usize) -> ConfigSet {
        let p = &self.solved.product;
        ConfigSet::from_ids(
            n,
            (0..n).filter(|v| self.solved.solution.w0.contains(p.entry(self.gadget.entry[self.copies.orig[*v]]))),
        )
    }

    pub fn pipeline<'a>(&'a self, mdp: &'a Game) -> Pipeline<'a> {
        let kind = &self.copies.kind;
        Pipeline {
            game: mdp,
            gadget: &self.gadget,
            mid_config: kind
                .iter()
                .map(|k| match k {
                    CopyKind::Orig(v) | CopyKind::Copy(v, _) => Some(*v),
                    _ => None,
                })
                .collect(),
            mid_target: kind.iter().map(|k| k.config()).collect(),
            mid_entry: self.copies.orig.clone(),
            product: &self.solved.product,
            sigma: &self.solved.solution.strat0,
        }
    }

    pub fn pull_back(&self, mdp: &Game) -> PulledBack {
        self.pipeline(mdp).pull_back()
    }

    pub fn trace(&self, mdp: &Game) -> ReductionTrace {
        let mut t = ReductionTrace::default();
        t.push("input", mdp.clone(), (0..mdp.len()).map(|v| (Some(v), "input".to_string())).collect());
        let origin = self
            .copies
            .kind
            .iter()
            .map(|k| match k {
                CopyKind::Orig(v) => (Some(*v), "orig".to_string()),
                CopyKind::Commit(v) => (Some(*v), "commit".to_string()),
                CopyKind::Copy(v, i) => (Some(*v), format!("copy {i}")),
                CopyKind::Bot => (None, "bot".to_string()),
            })
            .collect();
        t.push("copies", self.copies.game.clone(), origin);
        t.push("gadget", self.gadget.game.clone(), self.gadget.origin());
        let p = &self.solved.product;
        t.push("parity", p.game.clone(), p.origin());
        t
    }

    pub fn stats(&self, mdp: &Game, w: &CombinedObjective) -> SizeStats {
        SizeStats {
            n: mdp.len(),
            d_s: w.sure.index(),
            d_as: w.secondary.index(),
            copies: self.copies.game.len(),
            gadget: self.gadget.game.len(),
            parity: self.solved.product.len(),
            parity_index: self.solved.product.prio.index(),
        }
    }
}

/// Decides finite-memory SAS winning in an MDP and returns a verified
/// winning strategy for the winning region.
pub fn solve_sas_mdp_fm(mdp: &Game, w: &CombinedObjective) -> Result<SasMdpSolution> {
    let pl = MdpPipeline::build(mdp, w)?;
    let w0 = pl.region(mdp.len());
    let strategy = pl.pull_back(mdp).strategy.minimized();
    for v in w0.iter() {
        if !verify_sas_strategy(mdp, w, &strategy, v)? {
            return Err(Error::Verification(format!(
                "pulled-back strategy fails from {}",
                mdp.display_name(v)
            )));
        }
    }
    Ok(SasMdpSolution { w0, strategy, trace: pl.trace(mdp), stats: pl.stats(mdp, w) })
}

/// Region only, without pulling back a strategy.
pub fn sas_mdp_region(mdp: &Game, w: &CombinedObjective) -> Result<ConfigSet> {
    Ok(MdpPipeline::build(mdp, w)?.region(mdp.len()))
}
