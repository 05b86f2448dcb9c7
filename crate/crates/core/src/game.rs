//! Stochastic turn-based games, objectives and strategies.
//!
//! Configurations are dense indices `0..n`. A game owns its successor
//! lists, the exact transition probabilities of its random configurations
//! and up to two priority columns (the sure objective and the secondary
//! objective).

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact probabilities.
pub type Prob = BigRational;

/// Who resolves the choice at a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Player0,
    Player1,
    Random,
}

impl Owner {
    pub fn as_str(self) -> &'static str {
        match self {
            Owner::Player0 => "p0",
            Owner::Player1 => "p1",
            Owner::Random => "rand",
        }
    }
}

/// One of the two players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }

    pub fn owner(self) -> Owner {
        match self {
            Player::Zero => Owner::Player0,
            Player::One => Owner::Player1,
        }
    }

    /// The player favoured by a priority under the min-even convention.
    pub fn of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Zero
        } else {
            Player::One
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::Zero => 0,
            Player::One => 1,
        }
    }
}

/// A parity objective: the minimal priority seen infinitely often must be even.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Priorities(pub Vec<u32>);

impl Priorities {
    pub fn new(prio: Vec<u32>) -> Self {
        Priorities(prio)
    }

    /// Constant priority on `n` configurations.
    pub fn constant(n: usize, p: u32) -> Self {
        Priorities(vec![p; n])
    }

    /// Büchi objective: priority 0 on the set, 1 elsewhere.
    pub fn buchi(set: &ConfigSet) -> Self {
        Priorities(set.iter_mask().map(|b| if b { 0 } else { 1 }).collect())
    }

    /// The index `d`, i.e. the maximal priority.
    pub fn index(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> u32 {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// A parity objective is its priority column.
pub type ParityObjective = Priorities;

/// A set of configurations stored as a membership mask.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ConfigSet {
    mask: Vec<bool>,
}

/// Büchi sets and reachability targets.
pub type TargetSet = ConfigSet;

impl ConfigSet {
    pub fn empty(n: usize) -> Self {
        ConfigSet { mask: vec![false; n] }
    }

    pub fn full(n: usize) -> Self {
        ConfigSet { mask: vec![true; n] }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        ConfigSet { mask }
    }

    pub fn from_ids(n: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = ConfigSet::empty(n);
        for v in ids {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.mask.get(v).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        let was = self.mask[v];
        self.mask[v] = true;
        !was
    }

    pub fn remove(&mut self, v: usize) {
        self.mask[v] = false;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, b)| **b).map(|(v, _)| v)
    }

    pub fn iter_mask(&self) -> impl Iterator<Item = bool> + '_ {
        self.mask.iter().copied()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &ConfigSet) -> ConfigSet {
        ConfigSet::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect())
    }

    pub fn intersection(&self, other: &ConfigSet) -> ConfigSet {
        ConfigSet::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect())
    }

    pub fn difference(&self, other: &ConfigSet) -> ConfigSet {
        ConfigSet::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a && !*b).collect())
    }

    pub fn complement(&self) -> ConfigSet {
        ConfigSet::from_mask(self.mask.iter().map(|b| !*b).collect())
    }

    pub fn is_subset(&self, other: &ConfigSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }
}

impl fmt::Debug for ConfigSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Which pair of qualitative criteria a combined objective asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Sure for the first objective, almost-sure for the second.
    Sas,
    /// Sure for the first objective, limit-sure for the second.
    Sls,
}

/// Two parity objectives on the same configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinedObjective {
    pub sure: Priorities,
    pub secondary: Priorities,
    pub mode: Mode,
}

impl CombinedObjective {
    pub fn new(sure: Priorities, secondary: Priorities, mode: Mode) -> Result<Self> {
        if sure.len() != secondary.len() {
            return Err(Error::Objective(format!(
                "objectives disagree on size: {} vs {}",
                sure.len(),
                secondary.len()
            )));
        }
        Ok(CombinedObjective { sure, secondary, mode })
    }

    pub fn sas(sure: Priorities, secondary: Priorities) -> Result<Self> {
        Self::new(sure, secondary, Mode::Sas)
    }

    pub fn sls(sure: Priorities, secondary: Priorities) -> Result<Self> {
        Self::new(sure, secondary, Mode::Sls)
    }
}

/// A turn-based stochastic game (MDPs, Markov chains and plain games are special cases).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    pub name: String,
    owner: Vec<Owner>,
    succ: Vec<Vec<usize>>,
    /// Parallel to `succ` for random configurations, empty otherwise.
    prob: Vec<Vec<Prob>>,
    labels: Vec<Option<String>>,
    pub init: Option<usize>,
    pub prio_sure: Option<Priorities>,
    pub prio_sec: Option<Priorities>,
}

impl Game {
    pub fn new(name: impl Into<String>) -> Self {
        Game {
            name: name.into(),
            owner: Vec::new(),
            succ: Vec::new(),
            prob: Vec::new(),
            labels: Vec::new(),
            init: None,
            prio_sure: None,
            prio_sec: None,
        }
    }

    /// Adds a configuration without successors and returns its id.
    pub fn add_config(&mut self, owner: Owner, label: Option<String>) -> usize {
        self.owner.push(owner);
        self.succ.push(Vec::new());
        self.prob.push(Vec::new());
        self.labels.push(label);
        self.owner.len() - 1
    }

    /// Adds a non-probabilistic edge.
    pub fn add_edge(&mut self, src: usize, dst: usize) {
        self.succ[src].push(dst);
    }

    /// Adds a probabilistic edge out of a random configuration.
    pub fn add_prob_edge(&mut self, src: usize, dst: usize, p: Prob) {
        self.succ[src].push(dst);
        self.prob[src].push(p);
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn configs(&self) -> std::ops::Range<usize> {
        0..self.owner.len()
    }

    pub fn owner(&self, v: usize) -> Owner {
        self.owner[v]
    }

    pub fn set_owner(&mut self, v: usize, owner: Owner) {
        self.owner[v] = owner;
    }

    pub fn succ(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    /// Probabilities aligned with [`Game::succ`]; empty for non-random configurations.
    pub fn probs(&self, v: usize) -> &[Prob] {
        &self.prob[v]
    }

    /// Replaces the outgoing edges of `v`.
    pub fn set_edges(&mut self, v: usize, succ: Vec<usize>, prob: Vec<Prob>) {
        self.succ[v] = succ;
        self.prob[v] = prob;
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels[v].as_deref()
    }

    pub fn set_label(&mut self, v: usize, label: Option<String>) {
        self.labels[v] = label;
    }

    /// Label if present, the numeric id otherwise.
    pub fn display_name(&self, v: usize) -> String {
        match &self.labels[v] {
            Some(l) => l.clone(),
            None => v.to_string(),
        }
    }

    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.as_deref() == Some(label))
    }

    pub fn owned_by(&self, owner: Owner) -> impl Iterator<Item = usize> + '_ {
        self.configs().filter(move |v| self.owner[*v] == owner)
    }

    pub fn is_mdp(&self) -> bool {
        !self.owner.contains(&Owner::Player1)
    }

    pub fn is_markov_chain(&self) -> bool {
        self.owner.iter().all(|o| *o == Owner::Random)
    }

    pub fn is_non_stochastic(&self) -> bool {
        !self.owner.contains(&Owner::Random)
    }

    /// Probability of the edge `v -> w` (1 for a sole non-random edge).
    pub fn edge_prob(&self, v: usize, w: usize) -> Prob {
        if self.owner[v] == Owner::Random {
            self.succ[v]
                .iter()
                .zip(&self.prob[v])
                .filter(|(x, _)| **x == w)
                .fold(Prob::zero(), |acc, (_, p)| acc + p)
        } else if self.succ[v].contains(&w) {
            Prob::one()
        } else {
            Prob::zero()
        }
    }

    /// Minimal positive transition probability (1 when there are no random configurations).
    pub fn min_probability(&self) -> Prob {
        self.prob
            .iter()
            .flatten()
            .filter(|p| !p.is_zero())
            .min()
            .cloned()
            .unwrap_or_else(Prob::one)
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for v in self.configs() {
            for &w in &self.succ[v] {
                if !pred[w].contains(&v) {
                    pred[w].push(v);
                }
            }
        }
        pred
    }

    /// The combined objective carried by the game, if both columns are present.
    pub fn combined(&self, mode: Mode) -> Result<CombinedObjective> {
        match (&self.prio_sure, &self.prio_sec) {
            (Some(s), Some(a)) => CombinedObjective::new(s.clone(), a.clone(), mode),
            _ => Err(Error::Objective("game does not carry both priority columns".into())),
        }
    }

    /// Lists every violated well-formedness rule.
    pub fn validate(&self) -> Vec<String> {
        validate(self)
    }

    /// Validates and turns violations into an error.
    pub fn checked(self) -> Result<Self> {
        let violations = validate(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// The game in which every random configuration is handed to Player 1.
    pub fn random_as_adversary(&self) -> Game {
        let mut g = self.clone();
        for v in g.configs() {
            if g.owner[v] == Owner::Random {
                g.owner[v] = Owner::Player1;
                g.prob[v].clear();
            }
        }
        g
    }

    /// Fixes the Player-1 choices of `pi`, turning P1 configurations into
    /// deterministic random ones. Configurations without a choice keep their owner.
    pub fn fix_player1(&self, pi: &MemorylessStrategy) -> Game {
        let mut g = self.clone();
        for v in self.owned_by(Owner::Player1).collect::<Vec<_>>() {
            if let Some(w) = pi.choice(v) {
                g.owner[v] = Owner::Random;
                g.succ[v] = vec![w];
                g.prob[v] = vec![Prob::one()];
            }
        }
        g
    }
}

/// Reports every violated invariant, each naming the configuration and rule.
pub fn validate(game: &Game) -> Vec<String> {
    let mut out = Vec::new();
    let n = game.len();
    for v in game.configs() {
        let name = game.display_name(v);
        if game.succ[v].is_empty() {
            out.push(format!("deadlock at {name}"));
            continue;
        }
        for &w in &game.succ[v] {
            if w >= n {
                out.push(format!("edge from {name} to unknown config {w}"));
            }
        }
        let mut seen = game.succ[v].clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != game.succ[v].len() {
            out.push(format!("duplicate edge at {name}"));
        }
        match game.owner[v] {
            Owner::Random => {
                if game.prob[v].len() != game.succ[v].len() {
                    out.push(format!("missing probability at {name}"));
                    continue;
                }
                if game.prob[v].iter().any(|p| *p <= Prob::zero() || *p > Prob::one()) {
                    out.push(format!("prob out of (0,1] at {name}"));
                }
                let sum: Prob = game.prob[v].iter().sum();
                if !sum.is_one() {
                    out.push(format!("prob sum ≠ 1 at {name}"));
                }
            }
            _ => {
                if !game.prob[v].is_empty() {
                    out.push(format!("prob on non-random source {name}"));
                }
            }
        }
    }
    if let Some(i) = game.init {
        if i >= n {
            out.push(format!("init {i} is not a config"));
        }
    }
    for (col, prio) in [("prio_sure", &game.prio_sure), ("prio_sec", &game.prio_sec)] {
        if let Some(p) = prio {
            if p.len() != n {
                out.push(format!("{col} has {} entries for {n} configs", p.len()));
            }
        }
    }
    out
}

/// A pure memoryless strategy: one successor per owned configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MemorylessStrategy {
    pub player: Player,
    choice: Vec<Option<usize>>,
}

impl MemorylessStrategy {
    pub fn new(player: Player, n: usize) -> Self {
        MemorylessStrategy { player, choice: vec![None; n] }
    }

    pub fn from_choices(player: Player, choice: Vec<Option<usize>>) -> Self {
        MemorylessStrategy { player, choice }
    }

    pub fn choice(&self, v: usize) -> Option<usize> {
        self.choice.get(v).copied().flatten()
    }

    pub fn set(&mut self, v: usize, w: usize) {
        self.choice[v] = Some(w);
    }

    pub fn unset(&mut self, v: usize) {
        self.choice[v] = None;
    }

    pub fn choices(&self) -> &[Option<usize>] {
        &self.choice
    }

    /// Fills every owned configuration lacking a choice with its first successor.
    pub fn completed(mut self, game: &Game) -> Self {
        for v in game.owned_by(self.player.owner()) {
            if self.choice[v].is_none() {
                self.choice[v] = Some(game.succ(v)[0]);
            }
        }
        self
    }

    /// Checks totality on owned configurations and that choices are edges.
    pub fn validate(&self, game: &Game) -> Vec<String> {
        let mut out = Vec::new();
        for v in game.owned_by(self.player.owner()) {
            match self.choice.get(v).copied().flatten() {
                None => out.push(format!("no choice at {}", game.display_name(v))),
                Some(w) if !game.succ(v).contains(&w) => {
                    out.push(format!("choice at {} is not an edge", game.display_name(v)))
                }
                _ => {}
            }
        }
        out
    }

    /// Embeds the strategy as a finite-memory strategy with one memory state.
    pub fn to_finite_memory(&self, game: &Game) -> FiniteMemoryStrategy {
        let output = vec![self.choice.clone()];
        let mut s = FiniteMemoryStrategy::new(self.player, 1, game.len());
        s.output = output;
        s
    }
}

/// A pure strategy with finite memory `0..memory`.
///
/// Memory is updated when a configuration is entered (including the
/// initial one), and the output is read from the updated memory. A play
/// `v0 v1 ...` therefore visits memory `m_i = update(m_{i-1}, v_i)` with
/// `m_{-1} = initial`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMemoryStrategy {
    pub player: Player,
    pub memory: usize,
    pub initial: usize,
    /// `update[m][v]`
    pub update: Vec<Vec<usize>>,
    /// `output[m][v]`, defined on owned configurations.
    pub output: Vec<Vec<Option<usize>>>,
}

impl FiniteMemoryStrategy {
    /// A strategy that never changes memory and has no outputs yet.
    pub fn new(player: Player, memory: usize, n: usize) -> Self {
        FiniteMemoryStrategy {
            player,
            memory,
            initial: 0,
            update: (0..memory).map(|m| vec![m; n]).collect(),
            output: vec![vec![None; n]; memory],
        }
    }

    pub fn next_memory(&self, m: usize, v: usize) -> usize {
        self.update[m][v]
    }

    pub fn choice(&self, m: usize, v: usize) -> Option<usize> {
        self.output[m][v]
    }

    pub fn validate(&self, game: &Game) -> Vec<String> {
        let mut out = Vec::new();
        if self.initial >= self.memory {
            out.push("initial memory out of range".to_string());
        }
        if self.update.len() != self.memory || self.output.len() != self.memory {
            out.push("memory tables have the wrong size".to_string());
            return out;
        }
        for m in 0..self.memory {
            if self.update[m].len() != game.len() || self.output[m].len() != game.len() {
                out.push(format!("tables for memory {m} do not cover the game"));
                continue;
            }
            for v in game.configs() {
                if self.update[m][v] >= self.memory {
                    out.push(format!("update ({m},{}) out of range", game.display_name(v)));
                }
                if game.owner(v) == self.player.owner() {
                    match self.output[m][v] {
                        None => out.push(format!("no output at ({m},{})", game.display_name(v))),
                        Some(w) if !game.succ(v).contains(&w) => out.push(format!(
                            "output at ({m},{}) is not an edge",
                            game.display_name(v)
                        )),
                        _ => {}
                    }
                }
            }
        }
        out
    }

    /// Fills undefined outputs on owned configurations with the first successor.
    pub fn completed(mut self, game: &Game) -> Self {
        for m in 0..self.memory {
            for v in game.owned_by(self.player.owner()) {
                if self.output[m][v].is_none() {
                    self.output[m][v] = Some(game.succ(v)[0]);
                }
            }
        }
        self
    }

    /// Merges memory states that cannot be told apart (Moore-style partition refinement).
    pub fn minimized(&self) -> FiniteMemoryStrategy {
        let m = self.memory;
        if m <= 1 {
            return self.clone();
        }
        let n = self.update.first().map_or(0, |r| r.len());
        let mut class: Vec<usize> = {
            let mut keys: Vec<&Vec<Option<usize>>> = Vec::new();
            (0..m)
                .map(|x| match keys.iter().position(|k| **k == self.output[x]) {
                    Some(i) => i,
                    None => {
                        keys.push(&self.output[x]);
                        keys.len() - 1
                    }
                })
                .collect()
        };
        loop {
            let mut keys: Vec<(usize, Vec<usize>)> = Vec::new();
            let next: Vec<usize> = (0..m)
                .map(|x| {
                    let key = (class[x], (0..n).map(|v| class[self.update[x][v]]).collect::<Vec<_>>());
                    match keys.iter().position(|k| *k == key) {
                        Some(i) => i,
                        None => {
                            keys.push(key);
                            keys.len() - 1
                        }
                    }
                })
                .collect();
            let stable = keys.len() == class.iter().max().map_or(0, |c| c + 1);
            class = next;
            if stable {
                break;
            }
        }
        let k = class.iter().max().map_or(0, |c| c + 1);
        let mut rep = vec![usize::MAX; k];
        for x in 0..m {
            if rep[class[x]] == usize::MAX {
                rep[class[x]] = x;
            }
        }
        FiniteMemoryStrategy {
            player: self.player,
            memory: k,
            initial: class[self.initial],
            update: rep.iter().map(|&x| self.update[x].iter().map(|&y| class[y]).collect()).collect(),
            output: rep.iter().map(|&x| self.output[x].clone()).collect(),
        }
    }
}
