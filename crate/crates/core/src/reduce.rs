//! Game constructions used by the reduction pipelines: restricted copies,
//! the random-configuration gadget, deterministic products with automata
//! (Büchi monitor, index appearance records) and stage bookkeeping.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::One;

use crate::error::{Error, Result};
use crate::game::{CombinedObjective, ConfigSet, Game, Owner, Priorities, Prob};

/// Default limit on the number of product nodes.
pub const PRODUCT_CAP: usize = 2_000_000;

/// One stage of a reduction: the emitted game and, per new configuration,
/// its origin in the previous stage plus an annotation.
#[derive(Clone, Debug)]
pub struct Stage {
    pub name: String,
    pub game: Game,
    pub origin: Vec<(Option<usize>, String)>,
}

/// Ordered list of stages from the input game to the final parity game.
#[derive(Clone, Debug, Default)]
pub struct ReductionTrace {
    pub stages: Vec<Stage>,
}

impl ReductionTrace {
    pub fn push(&mut self, name: &str, game: Game, origin: Vec<(Option<usize>, String)>) {
        self.stages.push(Stage { name: name.to_string(), game, origin });
    }

    /// Maps a configuration of the last stage back to the input game.
    pub fn origin_of(&self, mut v: usize) -> Option<usize> {
        for st in self.stages.iter().rev() {
            v = st.origin[v].0?;
        }
        Some(v)
    }

    /// Renders a stage map, one `new_id <- origin_id [annot]` line per configuration.
    pub fn map_text(&self, stage: usize) -> String {
        let mut out = String::new();
        for (i, (o, annot)) in self.stages[stage].origin.iter().enumerate() {
            let o = o.map_or("-".to_string(), |o| o.to_string());
            out.push_str(&format!("{i} <- {o} [{annot}]\n"));
        }
        out
    }
}

/// Kind of a configuration of the restricted-copies game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CopyKind {
    /// The unrestricted copy of `v`.
    Orig(usize),
    /// The commitment point entered when moving to `v`.
    Commit(usize),
    /// `v` in the copy that forbids priorities below `i`.
    Copy(usize, u32),
    /// The losing sink.
    Bot,
}

impl CopyKind {
    /// Input configuration represented, if any (commit points count as their target).
    pub fn config(self) -> Option<usize> {
        match self {
            CopyKind::Orig(v) | CopyKind::Commit(v) | CopyKind::Copy(v, _) => Some(v),
            CopyKind::Bot => None,
        }
    }
}

/// The restricted-copies MDP with a sure parity and an almost-sure Büchi condition.
#[derive(Clone, Debug)]
pub struct CopiesGame {
    pub game: Game,
    pub sure: Priorities,
    pub buchi: ConfigSet,
    pub kind: Vec<CopyKind>,
    /// Id of `Orig(v)` per input configuration.
    pub orig: Vec<usize>,
}

fn name_of(g: &Game, v: usize) -> String {
    g.label(v).map_or_else(|| format!("v{v}"), str::to_string)
}

/// Replaces the almost-sure parity condition of an MDP by a Büchi condition
/// on restricted copies: from a commitment point Player 0 stays in the
/// original copy, enters copy `i` (where priorities below `i` lead to the
/// losing sink and priority `i` is Büchi) or gives up.
pub fn as_parity_to_buchi(mdp: &Game, w: &CombinedObjective) -> Result<CopiesGame> {
    if !mdp.is_mdp() {
        return Err(Error::NotMdp);
    }
    let n = mdp.len();
    let levels: Vec<u32> = (0..=w.secondary.index() / 2).map(|k| 2 * k).collect();
    let mut g = Game::new(format!("{}-copies", mdp.name));
    let mut kind = Vec::new();
    let mut add = |g: &mut Game, k: CopyKind, owner: Owner, label: String| {
        kind.push(k);
        g.add_config(owner, Some(label))
    };
    let orig: Vec<usize> = (0..n).map(|v| add(&mut g, CopyKind::Orig(v), mdp.owner(v), name_of(mdp, v))).collect();
    let commit: Vec<usize> =
        (0..n).map(|v| add(&mut g, CopyKind::Commit(v), Owner::Player0, format!("{}~", name_of(mdp, v)))).collect();
    let copy: Vec<Vec<usize>> = levels
        .iter()
        .map(|&i| {
            (0..n)
                .map(|v| add(&mut g, CopyKind::Copy(v, i), mdp.owner(v), format!("{}@{i}", name_of(mdp, v))))
                .collect()
        })
        .collect();
    let bot = add(&mut g, CopyKind::Bot, Owner::Player0, "bot".to_string());
    g.add_edge(bot, bot);
    let random = |v: usize| mdp.owner(v) == Owner::Random;
    for v in 0..n {
        let targets: Vec<usize> = mdp.succ(v).iter().map(|w| commit[*w]).collect();
        let probs = if random(v) { mdp.probs(v).to_vec() } else { Vec::new() };
        g.set_edges(orig[v], targets, probs);
        let mut opts = vec![orig[v]];
        opts.extend(copy.iter().map(|c| c[v]));
        opts.push(bot);
        g.set_edges(commit[v], opts, Vec::new());
        for (li, &i) in levels.iter().enumerate() {
            let node = copy[li][v];
            if w.secondary.get(v) >= i {
                let targets = mdp.succ(v).iter().map(|x| copy[li][*x]).collect();
                let probs = if random(v) { mdp.probs(v).to_vec() } else { Vec::new() };
                g.set_edges(node, targets, probs);
            } else if random(v) {
                g.set_edges(node, vec![bot], vec![Prob::one()]);
            } else {
                g.set_edges(node, vec![bot], Vec::new());
            }
        }
    }
    let sure = Priorities::new(kind.iter().map(|k| k.config().map_or(1, |v| w.sure.get(v))).collect());
    let buchi = ConfigSet::from_mask(
        kind.iter().map(|k| matches!(k, CopyKind::Copy(v, i) if w.secondary.get(*v) == *i)).collect(),
    );
    g.prio_sure = Some(sure.clone());
    g.prio_sec = Some(Priorities::new(buchi.iter_mask().map(|b| if b { 0 } else { 1 }).collect()));
    Ok(CopiesGame { game: g.checked()?, sure, buchi, kind, orig })
}

/// Kind of a configuration of a gadget game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GadgetKind {
    /// A non-random configuration kept as is.
    Plain(usize),
    /// Entry of the gadget of a random configuration (Player 1).
    Bar(usize),
    /// `(v~, 2i)`, Player 0 chooses between the two adjacent hat nodes.
    Tilde(usize, u32),
    /// `(v^, j)`, Player 1 for even `j`, Player 0 for odd `j`; moves to the successors.
    Hat(usize, u32),
}

impl GadgetKind {
    pub fn source(self) -> usize {
        match self {
            GadgetKind::Plain(v) | GadgetKind::Bar(v) | GadgetKind::Tilde(v, _) | GadgetKind::Hat(v, _) => v,
        }
    }
}

/// Non-stochastic game obtained by replacing every random configuration by a gadget.
#[derive(Clone, Debug)]
pub struct GadgetGame {
    pub game: Game,
    /// Sure priorities copied from the origin.
    pub a: Priorities,
    /// Secondary priorities: the origin's outside hat nodes, `j` at `(v^, j)`.
    pub b: Priorities,
    pub kind: Vec<GadgetKind>,
    /// Per source configuration: its `Plain` or `Bar` node.
    pub entry: Vec<usize>,
}

/// Replaces each random configuration `v` (with `p = sec(v)`) by a gadget:
/// `v̄` (Player 1) picks `(ṽ,2i)` for even `2i <= p+1`; `(ṽ,2i)` (Player 0)
/// picks `(v̂,2i)` if `2i <= p` or `(v̂,2i-1)` if `2i >= 2`; hat nodes move to
/// the successors of `v`.
pub fn gadget_reduction(game: &Game, sure: &Priorities, sec: &Priorities) -> Result<GadgetGame> {
    let n = game.len();
    let mut g = Game::new(format!("{}-gadget", game.name));
    let mut kind = Vec::new();
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    let mut entry = Vec::with_capacity(n);
    // Node ids per random source: bar, tildes (by i), hats (by j).
    let mut tildes: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut hats: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        let name = name_of(game, v);
        let (s, p) = (sure.get(v), sec.get(v));
        let mut push = |g: &mut Game, k: GadgetKind, o: Owner, label: String, b: u32| {
            kind.push(k);
            pa.push(s);
            pb.push(b);
            g.add_config(o, Some(label))
        };
        if game.owner(v) != Owner::Random {
            entry.push(push(&mut g, GadgetKind::Plain(v), game.owner(v), name, p));
            continue;
        }
        entry.push(push(&mut g, GadgetKind::Bar(v), Owner::Player1, format!("{name}^bar"), p));
        let t: Vec<usize> = (0..=p.div_ceil(2))
            .map(|i| push(&mut g, GadgetKind::Tilde(v, 2 * i), Owner::Player0, format!("{name}~{}", 2 * i), p))
            .collect();
        let h: Vec<usize> = (0..=p)
            .map(|j| {
                let o = if j % 2 == 0 { Owner::Player1 } else { Owner::Player0 };
                push(&mut g, GadgetKind::Hat(v, j), o, format!("{name}^{j}"), j)
            })
            .collect();
        tildes.insert(v, t);
        hats.insert(v, h);
    }
    for v in 0..n {
        let succ: Vec<usize> = game.succ(v).iter().map(|w| entry[*w]).collect();
        if game.owner(v) != Owner::Random {
            g.set_edges(entry[v], succ, Vec::new());
            continue;
        }
        let p = sec.get(v);
        let t = &tildes[&v];
        let h = &hats[&v];
        g.set_edges(entry[v], t.clone(), Vec::new());
        for (i, &node) in t.iter().enumerate() {
            let two_i = 2 * i as u32;
            let mut out = Vec::new();
            if two_i <= p {
                out.push(h[two_i as usize]);
            }
            if two_i >= 2 {
                out.push(h[two_i as usize - 1]);
            }
            g.set_edges(node, out, Vec::new());
        }
        for &node in h {
            g.set_edges(node, succ.clone(), Vec::new());
        }
    }
    let a = Priorities::new(pa);
    let b = Priorities::new(pb);
    g.prio_sure = Some(a.clone());
    g.prio_sec = Some(b.clone());
    g.init = game.init.map(|v| entry[v]);
    Ok(GadgetGame { game: g.checked()?, a, b, kind, entry })
}

impl GadgetGame {
    /// Stage map entries: origin id and kind annotation per node.
    pub fn origin(&self) -> Vec<(Option<usize>, String)> {
        self.kind
            .iter()
            .map(|k| {
                let annot = match k {
                    GadgetKind::Plain(_) => "plain".to_string(),
                    GadgetKind::Bar(_) => "bar".to_string(),
                    GadgetKind::Tilde(_, i) => format!("tilde {i}"),
                    GadgetKind::Hat(_, j) => format!("hat {j}"),
                };
                (Some(k.source()), annot)
            })
            .collect()
    }
}

/// Replaces the random configurations of a Büchi-SAS MDP by gadgets. The
/// Büchi set is read as secondary priority 0 and its complement as 1, so a
/// random configuration outside the set lets Player 0 take the odd branch.
/// Returns the gadget game and its Büchi set (secondary priority 0).
pub fn buchi_mdp_to_conj_game(mdp: &Game, sure: &Priorities, buchi: &ConfigSet) -> Result<(GadgetGame, ConfigSet)> {
    if !mdp.is_mdp() {
        return Err(Error::NotMdp);
    }
    let sec = Priorities::new(buchi.iter_mask().map(|b| if b { 0 } else { 1 }).collect());
    let gg = gadget_reduction(mdp, sure, &sec)?;
    let b = ConfigSet::from_mask(gg.b.as_slice().iter().map(|p| *p == 0).collect());
    Ok((gg, b))
}

/// Product of a non-stochastic game with a deterministic automaton reading
/// the visited configurations.
#[derive(Clone, Debug)]
pub struct Product {
    /// Owners and edges follow the base game; `prio_sure` holds the product priority.
    pub game: Game,
    pub prio: Priorities,
    pub base: Vec<usize>,
    /// Automaton state index per node.
    pub state: Vec<usize>,
    /// Per base configuration: the node entered first, if it was built.
    pub entries: Vec<Option<usize>>,
}

impl Product {
    pub fn len(&self) -> usize {
        self.game.len()
    }

    pub fn is_empty(&self) -> bool {
        self.game.is_empty()
    }

    /// The node entered first at base configuration `g`; panics if the
    /// product was built without it.
    pub fn entry(&self, g: usize) -> usize {
        self.entries[g].expect("entry node of a root configuration")
    }

    /// Successor of `h` whose base configuration is `g`.
    pub fn step(&self, h: usize, g: usize) -> Option<usize> {
        self.game.succ(h).iter().copied().find(|x| self.base[*x] == g)
    }

    pub fn origin(&self) -> Vec<(Option<usize>, String)> {
        (0..self.len()).map(|h| (Some(self.base[h]), format!("q{}", self.state[h]))).collect()
    }
}

/// Builds the product reachable from the entry nodes of `roots`.
/// Node `(g, q)` moves to `(g', next(q, g, g'))`.
#[allow(clippy::too_many_arguments)]
pub fn build_product<Q: Clone + Eq + Hash>(
    base: &Game,
    name: &str,
    init: impl Fn(usize) -> Q,
    next: impl Fn(&Q, usize, usize) -> Q,
    prio: impl Fn(&Q, usize) -> u32,
    label: impl Fn(&Q) -> String,
    roots: &[usize],
    cap: usize,
) -> Result<Product> {
    if !base.is_non_stochastic() {
        return Err(Error::Stochastic);
    }
    let mut states: HashMap<Q, usize> = HashMap::new();
    let mut qs: Vec<Q> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    fn intern<Q: Clone + Eq + Hash>(q: Q, states: &mut HashMap<Q, usize>, qs: &mut Vec<Q>) -> usize {
        if let Some(i) = states.get(&q) {
            return *i;
        }
        qs.push(q.clone());
        states.insert(q, qs.len() - 1);
        qs.len() - 1
    }
    fn node(key: (usize, usize), index: &mut HashMap<(usize, usize), usize>, nodes: &mut Vec<(usize, usize)>) -> usize {
        *index.entry(key).or_insert_with(|| {
            nodes.push(key);
            nodes.len() - 1
        })
    }
    let mut entries = vec![None; base.len()];
    for &g in roots {
        let qi = intern(init(g), &mut states, &mut qs);
        entries[g] = Some(node((g, qi), &mut index, &mut nodes));
    }
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut head = 0;
    while head < nodes.len() {
        if nodes.len() > cap {
            return Err(Error::Cap(format!("product exceeds {cap} nodes")));
        }
        let (g, qi) = nodes[head];
        head += 1;
        let mut row = Vec::new();
        for &g2 in base.succ(g) {
            let q2 = next(&qs[qi], g, g2);
            let q2i = intern(q2, &mut states, &mut qs);
            row.push(node((g2, q2i), &mut index, &mut nodes));
        }
        edges.push(row);
    }
    let mut game = Game::new(name.to_string());
    let mut pr = Vec::with_capacity(nodes.len());
    for &(g, qi) in &nodes {
        let q = &qs[qi];
        game.add_config(base.owner(g), Some(format!("{}|{}", name_of(base, g), label(q))));
        pr.push(prio(q, g));
    }
    for (h, row) in edges.into_iter().enumerate() {
        game.set_edges(h, row, Vec::new());
    }
    let prio = Priorities::new(pr);
    game.prio_sure = Some(prio.clone());
    Ok(Product {
        game,
        prio,
        base: nodes.iter().map(|x| x.0).collect(),
        state: nodes.iter().map(|x| x.1).collect(),
        entries,
    })
}

/// Odd ceiling: `d` if odd, `d + 1` otherwise.
pub fn odd_ceil(d: u32) -> u32 {
    if d % 2 == 1 {
        d
    } else {
        d + 1
    }
}

/// Parity game for `buchi ∧ alpha` by a product with a monitor that
/// remembers the least priority seen since the last Büchi visit.
pub fn buchi_and_parity_to_parity(game: &Game, buchi: &ConfigSet, alpha: &Priorities) -> Result<Product> {
    let roots: Vec<usize> = game.configs().collect();
    buchi_and_parity_to_parity_capped(game, buchi, alpha, &roots, PRODUCT_CAP)
}

pub fn buchi_and_parity_to_parity_capped(
    game: &Game,
    buchi: &ConfigSet,
    alpha: &Priorities,
    roots: &[usize],
    cap: usize,
) -> Result<Product> {
    let top = odd_ceil(alpha.index());
    let delta = |(i, _): (u32, bool), v: usize| {
        let a = alpha.get(v);
        if buchi.contains(v) || a < i {
            (a, true)
        } else {
            (i, false)
        }
    };
    build_product(
        game,
        &format!("{}-monitor", game.name),
        |v| delta((top, false), v),
        |q, _, v2| delta(*q, v2),
        |&(i, fresh), _| if fresh { i } else { odd_ceil(i) },
        |&(i, fresh)| format!("{i}{}", if fresh { "T" } else { "F" }),
        roots,
        cap,
    )
}
