//! Subcommand implementations. Each fills the report and returns the exit status.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use sha2::{Digest, Sha256};

use spg_core::analysis::{arena_probability_bound, arena_satisfies_sure, simulate, verify_sas_strategy};
use spg_core::chain::{arena, product_from};
use spg_core::conj::{conj_to_streett, player1_refutes, solve_conj_parity, streett_to_parity_iar};
use spg_core::format::{format_rational, parse_game, parse_rational, parse_strategy, serialize_game, serialize_strategy};
use spg_core::oracle::{oracle_solve_conj, oracle_solve_parity, oracle_solve_sas_capped, SEARCH_CAP};
use spg_core::parity::solve_parity;
use spg_core::reduce::ReductionTrace;
use spg_core::sas_game::{player1_refutes_sas, solve_sas_game_fm};
use spg_core::sas_mdp::solve_sas_mdp_fm;
use spg_core::sls::solve_sls;
use spg_core::{
    CombinedObjective, ConfigSet, Error, FiniteMemoryStrategy, Game, MemorylessStrategy, Mode, Player, Priorities, Prob,
};

use crate::report::{config_ref, region, Report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REFUTED: u8 = 2;
pub const EXIT_CAP: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_PARSE: u8 = 65;
pub const EXIT_INTERNAL: u8 = 70;

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, msg: msg.into() }
    }

    fn internal(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INTERNAL, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Invalid(_) | Error::InvalidStrategy(_) => EXIT_PARSE,
            Error::Objective(_) | Error::MissingInit | Error::Stochastic | Error::NotMdp | Error::Epsilon => EXIT_USAGE,
            Error::Cap(_) => EXIT_CAP,
            Error::Verification(_) | Error::Dimension(_) => EXIT_INTERNAL,
        };
        Failure { code, msg: e.to_string() }
    }
}

pub type Outcome = Result<u8, Failure>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveMode {
    Parity,
    Conj,
    Sas,
    Sls,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Auto,
    Mdp,
    Game,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PipelineKind {
    SasMdp,
    SasGame,
    StreettParity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Parity,
    Conj,
    Sas,
}

/// Reads and parses a game, recording its path and digest.
fn load_game(path: &Path, report: &mut Report, key: &str) -> Result<Game, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    report.kv(key, path.display());
    report.kv(format!("{key}_sha256"), hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8(bytes).map_err(|_| Failure { code: EXIT_PARSE, msg: format!("{} is not UTF-8", path.display()) })?;
    let game = parse_game(&text).map_err(|e| Failure { code: EXIT_PARSE, msg: format!("{}: {e}", path.display()) })?;
    report.kv("game", &game.name);
    report.kv("configs", game.len());
    Ok(game)
}

fn load_strategy(path: &Path, game: &Game, report: &mut Report) -> Result<(String, FiniteMemoryStrategy), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    report.kv("strategy", path.display());
    report.kv("strategy_sha256", hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8_lossy(&bytes);
    parse_strategy(&text, game).map_err(|e| Failure { code: EXIT_PARSE, msg: format!("{}: {e}", path.display()) })
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::internal(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Resolves a configuration given by id or label.
fn config_arg(game: &Game, s: &str) -> Result<usize, Failure> {
    match s.parse::<usize>() {
        Ok(v) if v < game.len() => Ok(v),
        Ok(v) => Err(Failure::usage(format!("configuration {v} out of range"))),
        Err(_) => game.find_label(s).ok_or_else(|| Failure::usage(format!("unknown configuration `{s}`"))),
    }
}

fn epsilon_arg(s: Option<&str>) -> Result<Prob, Failure> {
    let s = s.ok_or_else(|| Failure::usage("--epsilon is required in sls mode"))?;
    parse_rational(s).ok_or_else(|| Failure::usage(format!("bad epsilon `{s}`, expected <num>/<den>")))
}

fn model_name(game: &Game) -> &'static str {
    if game.is_markov_chain() {
        "chain"
    } else if game.is_non_stochastic() {
        "two-player"
    } else if game.is_mdp() {
        "mdp"
    } else {
        "stochastic game"
    }
}

/// The only priority column of a one-objective game.
fn single_column(game: &Game) -> Result<(&'static str, Priorities), Failure> {
    match (&game.prio_sure, &game.prio_sec) {
        (Some(p), None) => Ok(("prio_sure", p.clone())),
        (None, Some(p)) => Ok(("prio_sec", p.clone())),
        (Some(_), Some(_)) => Err(Failure::usage("parity mode takes one objective, but the input also carries prio_sec")),
        (None, None) => Err(Failure::usage("the input carries no priorities")),
    }
}

fn both_columns(game: &Game) -> Result<(Priorities, Priorities), Failure> {
    match (&game.prio_sure, &game.prio_sec) {
        (Some(a), Some(b)) => Ok((a.clone(), b.clone())),
        (None, _) => Err(Failure::usage("this mode needs two objectives, but the input lacks prio_sure")),
        (_, None) => Err(Failure::usage("this mode needs two objectives, but the input lacks prio_sec")),
    }
}

fn objective(game: &Game, mode: Mode) -> Result<CombinedObjective, Failure> {
    let (a, b) = both_columns(game)?;
    Ok(CombinedObjective::new(a, b, mode)?)
}

/// What a strategy file is checked against.
pub enum Check {
    Parity(Priorities),
    Conj(Priorities, Priorities),
    Sas(CombinedObjective),
    Sls(CombinedObjective, Prob),
}

impl Check {
    pub fn new(game: &Game, mode: Option<SolveMode>, epsilon: Option<&str>) -> Result<Check, Failure> {
        let mode = match mode {
            Some(m) => m,
            None if game.prio_sec.is_some() && game.prio_sure.is_some() => SolveMode::Sas,
            None => SolveMode::Parity,
        };
        Ok(match mode {
            SolveMode::Parity => Check::Parity(single_column(game)?.1),
            SolveMode::Conj => {
                let (a, b) = both_columns(game)?;
                Check::Conj(a, b)
            }
            SolveMode::Sas => Check::Sas(objective(game, Mode::Sas)?),
            SolveMode::Sls => Check::Sls(objective(game, Mode::Sls)?, epsilon_arg(epsilon)?),
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Check::Parity(_) => "parity",
            Check::Conj(..) => "conj",
            Check::Sas(_) => "sas",
            Check::Sls(..) => "sls",
        }
    }

    /// Whether `sigma` wins from `v`; for SLS also the guaranteed probability
    /// of the secondary objective.
    pub fn holds(&self, game: &Game, sigma: &FiniteMemoryStrategy, v: usize) -> Result<(bool, Option<Prob>), Failure> {
        if sigma.player == Player::One {
            return self.holds_for_player1(game, sigma, v).map(|b| (b, None));
        }
        let a = arena(game, sigma, v)?;
        Ok(match self {
            Check::Parity(p) => (arena_satisfies_sure(&a, p), None),
            Check::Conj(p, q) => (arena_satisfies_sure(&a, p) && arena_satisfies_sure(&a, q), None),
            Check::Sas(w) => (verify_sas_strategy(game, w, sigma, v)?, None),
            Check::Sls(w, eps) => {
                let bound = arena_probability_bound(&a, &w.secondary);
                (arena_satisfies_sure(&a, &w.sure) && bound >= Prob::from_integer(1.into()) - eps, Some(bound))
            }
        })
    }

    fn holds_for_player1(&self, game: &Game, sigma: &FiniteMemoryStrategy, v: usize) -> Result<bool, Failure> {
        if sigma.memory != 1 {
            return Err(Failure::usage("Player-1 strategies are checked only when memoryless"));
        }
        let pi = MemorylessStrategy::from_choices(Player::One, sigma.output[0].clone());
        let at = ConfigSet::from_ids(game.len(), [v]);
        match self {
            Check::Parity(p) if game.is_non_stochastic() => Ok(player1_refutes(game, p, p, &pi, &at)),
            Check::Conj(p, q) if game.is_non_stochastic() => Ok(player1_refutes(game, p, q, &pi, &at)),
            Check::Sas(w) => Ok(player1_refutes_sas(game, w, &pi, &at)?),
            Check::Parity(_) | Check::Conj(..) => Err(Error::Stochastic.into()),
            Check::Sls(..) => Err(Failure::usage("Player-1 strategies are not checked in sls mode")),
        }
    }
}

/// Checks `sigma` from every configuration of `from`; a failure is internal.
fn self_check(game: &Game, check: &Check, sigma: &FiniteMemoryStrategy, from: &ConfigSet) -> Result<(), Failure> {
    for v in from.iter() {
        if !check.holds(game, sigma, v)?.0 {
            return Err(Failure::internal(format!(
                "emitted {} strategy fails from {}",
                check.name(),
                config_ref(game, v)
            )));
        }
    }
    Ok(())
}

fn emit_strategy(
    report: &mut Report,
    emit: Option<&Path>,
    key: &str,
    name: &str,
    sigma: &FiniteMemoryStrategy,
) -> Result<(), Failure> {
    report.kv(format!("{key}_memory"), sigma.memory);
    if let Some(dir) = emit {
        let path = write(dir, &format!("{name}.strat"), &serialize_strategy(name, sigma))?;
        report.kv(key, path.display());
    }
    Ok(())
}

fn stage_sizes(report: &mut Report, trace: &ReductionTrace) {
    for st in &trace.stages {
        report.kv(format!("stage_{}", st.name), st.game.len());
    }
}

pub struct SolveArgs<'a> {
    pub input: &'a Path,
    pub mode: SolveMode,
    pub model: Model,
    pub epsilon: Option<&'a str>,
    pub emit: Option<&'a Path>,
}

pub fn solve(args: SolveArgs, report: &mut Report) -> Outcome {
    let game = load_game(args.input, report, "input")?;
    report.kv("model", model_name(&game));
    report.kv("mode", args.mode.to_possible_value().unwrap().get_name());
    match args.model {
        Model::Mdp if !game.is_mdp() => return Err(Error::NotMdp.into()),
        Model::Game | Model::Auto | Model::Mdp => {}
    }
    let emit = args.emit;
    match args.mode {
        SolveMode::Parity => {
            let (col, p) = single_column(&game)?;
            report.kv("objective", col);
            let s = solve_parity(&game, &p)?;
            report.kv("w0", region(&game, &s.w0));
            report.kv("w1", region(&game, &s.w1));
            let s0 = s.strat0.completed(&game).to_finite_memory(&game);
            let s1 = s.strat1.completed(&game).to_finite_memory(&game);
            let check = Check::Parity(p);
            self_check(&game, &check, &s0, &s.w0)?;
            self_check(&game, &check, &s1, &s.w1)?;
            emit_strategy(report, emit, "strategy0", "player0", &s0)?;
            emit_strategy(report, emit, "strategy1", "player1", &s1)?;
        }
        SolveMode::Conj => {
            let (a, b) = both_columns(&game)?;
            let s = solve_conj_parity(&game, &a, &b)?;
            report.kv("w0", region(&game, &s.w0));
            report.kv("w1", region(&game, &s.w1));
            let s1 = s.strat1.completed(&game).to_finite_memory(&game);
            let check = Check::Conj(a, b);
            self_check(&game, &check, &s.strat0, &s.w0)?;
            self_check(&game, &check, &s1, &s.w1)?;
            emit_strategy(report, emit, "strategy0", "player0", &s.strat0)?;
            emit_strategy(report, emit, "strategy1", "player1", &s1)?;
        }
        SolveMode::Sas => {
            let w = objective(&game, Mode::Sas)?;
            let check = Check::Sas(w.clone());
            let mdp = match args.model {
                Model::Auto => game.is_mdp(),
                Model::Mdp => true,
                Model::Game => false,
            };
            if mdp {
                report.kv("pipeline", "sas-mdp");
                let s = solve_sas_mdp_fm(&game, &w)?;
                report.kv("w0", region(&game, &s.w0));
                report.kv("w1", region(&game, &s.w0.complement()));
                stage_sizes(report, &s.trace);
                report.kv("d_s", s.stats.d_s);
                report.kv("d_as", s.stats.d_as);
                report.kv("parity_index", s.stats.parity_index);
                report.kv("size_constant", format!("{:.3}", s.stats.constant()));
                self_check(&game, &check, &s.strategy, &s.w0)?;
                emit_strategy(report, emit, "strategy0", "player0", &s.strategy)?;
            } else {
                report.kv("pipeline", "sas-game");
                let s = solve_sas_game_fm(&game, &w)?;
                report.kv("w0", region(&game, &s.w0));
                report.kv("w1", region(&game, &s.w1));
                stage_sizes(report, &s.trace);
                let s1 = s.strat1.completed(&game).to_finite_memory(&game);
                self_check(&game, &check, &s.strat0, &s.w0)?;
                self_check(&game, &check, &s1, &s.w1)?;
                emit_strategy(report, emit, "strategy0", "player0", &s.strat0)?;
                emit_strategy(report, emit, "strategy1", "player1", &s1)?;
            }
        }
        SolveMode::Sls => {
            let w = objective(&game, Mode::Sls)?;
            let eps = epsilon_arg(args.epsilon)?;
            let s = solve_sls(&game, &w)?;
            let b = s.strategy_builder(&eps)?;
            report.kv("epsilon", format_rational(&eps));
            report.kv("sas_region", region(&game, &s.a));
            report.kv("sure_region", region(&game, &s.x));
            report.kv("w0", region(&game, &s.z));
            report.kv("horizon", b.horizon);
            for (v, p) in &b.reach {
                report.kv(format!("reach[{}]", config_ref(&game, *v)), format_rational(p));
            }
            self_check(&game, &Check::Sls(w, eps), &b.strategy, &s.z)?;
            emit_strategy(report, emit, "strategy0", "player0", &b.strategy)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn reduce(input: &Path, pipeline: PipelineKind, emit: &Path, report: &mut Report) -> Outcome {
    let game = load_game(input, report, "input")?;
    report.kv("pipeline", pipeline.to_possible_value().unwrap().get_name());
    let trace = match pipeline {
        PipelineKind::SasMdp => solve_sas_mdp_fm(&game, &objective(&game, Mode::Sas)?)?.trace,
        PipelineKind::SasGame => solve_sas_game_fm(&game, &objective(&game, Mode::Sas)?)?.trace,
        PipelineKind::StreettParity => {
            let (a, b) = both_columns(&game)?;
            if !game.is_non_stochastic() {
                return Err(Error::Stochastic.into());
            }
            let pairs = conj_to_streett(&a, &b);
            report.kv("streett_pairs", pairs.len());
            let p = streett_to_parity_iar(&game, &pairs)?;
            let mut t = ReductionTrace::default();
            t.push("input", game.clone(), (0..game.len()).map(|v| (Some(v), "input".to_string())).collect());
            t.push("parity", p.game.clone(), p.origin());
            t
        }
    };
    for (i, st) in trace.stages.iter().enumerate() {
        let stem = format!("{i:02}-{}", st.name);
        let g = write(emit, &format!("{stem}.game"), &serialize_game(&st.game))?;
        write(emit, &format!("{stem}.map"), &trace.map_text(i))?;
        report.kv(format!("stage_{}", st.name), st.game.len());
        report.kv(format!("stage_{}_file", st.name), g.display());
    }
    Ok(EXIT_OK)
}

pub struct VerifyArgs<'a> {
    pub game: &'a Path,
    pub strategy: &'a Path,
    pub mode: Option<SolveMode>,
    pub epsilon: Option<&'a str>,
    pub from: &'a [String],
}

pub fn verify(args: VerifyArgs, report: &mut Report) -> Outcome {
    let game = load_game(args.game, report, "input")?;
    let (name, sigma) = load_strategy(args.strategy, &game, report)?;
    let check = Check::new(&game, args.mode, args.epsilon)?;
    report.kv("strategy_name", name);
    report.kv("player", if sigma.player == Player::Zero { 0 } else { 1 });
    report.kv("mode", check.name());
    let from: Vec<usize> = if args.from.is_empty() {
        vec![game.init.ok_or_else(|| Failure::usage("no --from given and the game has no init"))?]
    } else {
        args.from.iter().map(|s| config_arg(&game, s)).collect::<Result<_, _>>()?
    };
    let mut all = true;
    for v in from {
        let (ok, bound) = check.holds(&game, &sigma, v)?;
        all &= ok;
        let verdict = if ok { "verified" } else { "refuted" };
        match bound {
            Some(p) => report.kv(format!("from[{}]", config_ref(&game, v)), format!("{verdict} (probability >= {})", format_rational(&p))),
            None => report.kv(format!("from[{}]", config_ref(&game, v)), verdict),
        }
    }
    report.kv("result", if all { "verified" } else { "refuted" });
    Ok(if all { EXIT_OK } else { EXIT_REFUTED })
}

pub fn oracle(input: &Path, mode: OracleMode, mem_bound: usize, cap: u64, report: &mut Report) -> Outcome {
    let game = load_game(input, report, "input")?;
    report.kv("mode", mode.to_possible_value().unwrap().get_name());
    let w0 = match mode {
        OracleMode::Parity => oracle_solve_parity(&game, &single_column(&game)?.1)?.0,
        OracleMode::Conj => {
            let (a, b) = both_columns(&game)?;
            oracle_solve_conj(&game, &a, &b)?.0
        }
        OracleMode::Sas => {
            report.kv("mem_bound", mem_bound);
            oracle_solve_sas_capped(&game, &objective(&game, Mode::Sas)?, mem_bound, cap)?
        }
    };
    report.kv("w0", region(&game, &w0));
    Ok(EXIT_OK)
}

/// Default search budget of the `oracle` subcommand.
pub const ORACLE_CAP: u64 = SEARCH_CAP;

pub struct SimulateArgs<'a> {
    pub input: &'a Path,
    pub strategy: &'a Path,
    pub opponent: Option<&'a Path>,
    pub from: Option<&'a str>,
    pub seed: u64,
    pub steps: usize,
    pub trials: usize,
}

pub fn simulate_cmd(args: SimulateArgs, report: &mut Report) -> Outcome {
    let game = load_game(args.input, report, "input")?;
    let (_, sigma) = load_strategy(args.strategy, &game, report)?;
    if sigma.player != Player::Zero {
        return Err(Failure::usage("the simulated strategy must belong to Player 0"));
    }
    let pi = match args.opponent {
        None => MemorylessStrategy::new(Player::One, game.len()).completed(&game),
        Some(p) => {
            let (_, o) = parse_opponent(p, &game)?;
            o
        }
    };
    let v = match args.from {
        Some(s) => config_arg(&game, s)?,
        None => game.init.ok_or_else(|| Failure::usage("no --from given and the game has no init"))?,
    };
    let chain = product_from(&game, &sigma, &pi, v)?;
    report.kv("from", config_ref(&game, v));
    report.kv("seed", args.seed);
    report.kv("steps", args.steps);
    report.kv("trials", args.trials);
    report.kv("chain_states", chain.len());
    let freq = simulate(&chain, args.steps, args.trials, args.seed);
    for (s, f) in freq.iter().enumerate() {
        let (m, c) = chain.states[s];
        report.kv(format!("visited[{}@{m}]", config_ref(&game, c)), format!("{f:.4}"));
    }
    Ok(EXIT_OK)
}

fn parse_opponent(path: &Path, game: &Game) -> Result<(String, MemorylessStrategy), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let (name, s) = parse_strategy(&text, game).map_err(|e| Failure { code: EXIT_PARSE, msg: format!("{}: {e}", path.display()) })?;
    if s.player != Player::One || s.memory != 1 {
        return Err(Failure::usage("the opponent must be a memoryless Player-1 strategy"));
    }
    Ok((name, MemorylessStrategy::from_choices(Player::One, s.output[0].clone())))
}
