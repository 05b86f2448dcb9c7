//! Line-oriented text formats for games and strategies.
//!
//! ```text
//! game <name>
//! config <id> owner=<p0|p1|rand> [prio_sure=<nat>] [prio_sec=<nat>] [label=<string>]
//! edge <src> <dst> [prob=<num>/<den>]
//! init <id>
//! ```
//!
//! ```text
//! strategy <name> player=<0|1> memory=<m>
//! initmem <m0>
//! out <mem> <config> -> <successor>
//! upd <mem> <config> -> <mem'>
//! ```
//!
//! `#` starts a comment. Rationals are written `<num>/<den>` in lowest terms.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{FiniteMemoryStrategy, Game, Owner, Player, Priorities, Prob};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_nat(line: usize, what: &str, s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| perr(line, format!("bad {what} `{s}`")))
}

/// Parses `num/den` (or a bare integer) into a reduced rational.
pub fn parse_rational(s: &str) -> Option<Prob> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse::<BigInt>().ok()?, b.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if den.is_zero() {
        return None;
    }
    Some(Prob::new(num, den))
}

/// Writes a rational as `num/den` in lowest terms.
pub fn format_rational(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

struct ConfigDecl {
    owner: Owner,
    prio_sure: Option<u32>,
    prio_sec: Option<u32>,
    label: Option<String>,
}

/// Parses and validates a game.
pub fn parse_game(text: &str) -> Result<Game> {
    let mut name: Option<String> = None;
    let mut configs: Vec<Option<ConfigDecl>> = Vec::new();
    let mut edges: Vec<(usize, usize, usize, Option<Prob>)> = Vec::new();
    let mut init: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next().unwrap() {
            "game" => {
                if name.is_some() {
                    return Err(perr(ln, "duplicate game header"));
                }
                name = Some(tok.collect::<Vec<_>>().join(" "));
            }
            "config" => {
                let id = parse_nat(ln, "config id", tok.next().ok_or_else(|| perr(ln, "missing config id"))?)?;
                let mut decl = ConfigDecl { owner: Owner::Player0, prio_sure: None, prio_sec: None, label: None };
                let mut has_owner = false;
                for attr in tok {
                    let (k, v) = attr.split_once('=').ok_or_else(|| perr(ln, format!("bad attribute `{attr}`")))?;
                    match k {
                        "owner" => {
                            decl.owner = match v {
                                "p0" => Owner::Player0,
                                "p1" => Owner::Player1,
                                "rand" => Owner::Random,
                                _ => return Err(perr(ln, format!("unknown owner `{v}`"))),
                            };
                            has_owner = true;
                        }
                        "prio_sure" => decl.prio_sure = Some(parse_nat(ln, "priority", v)? as u32),
                        "prio_sec" => decl.prio_sec = Some(parse_nat(ln, "priority", v)? as u32),
                        "label" => decl.label = Some(v.to_string()),
                        _ => return Err(perr(ln, format!("unknown attribute `{k}`"))),
                    }
                }
                if !has_owner {
                    return Err(perr(ln, "config without owner"));
                }
                if configs.len() <= id {
                    configs.resize_with(id + 1, || None);
                }
                if configs[id].is_some() {
                    return Err(perr(ln, format!("config {id} declared twice")));
                }
                configs[id] = Some(decl);
            }
            "edge" => {
                let src = parse_nat(ln, "edge source", tok.next().ok_or_else(|| perr(ln, "missing edge source"))?)?;
                let dst = parse_nat(ln, "edge target", tok.next().ok_or_else(|| perr(ln, "missing edge target"))?)?;
                let mut prob = None;
                for attr in tok {
                    match attr.split_once('=') {
                        Some(("prob", v)) => {
                            prob = Some(parse_rational(v).ok_or_else(|| perr(ln, format!("bad probability `{v}`")))?)
                        }
                        _ => return Err(perr(ln, format!("bad attribute `{attr}`"))),
                    }
                }
                edges.push((ln, src, dst, prob));
            }
            "init" => {
                if init.is_some() {
                    return Err(perr(ln, "duplicate init"));
                }
                init = Some(parse_nat(ln, "init", tok.next().ok_or_else(|| perr(ln, "missing init id"))?)?);
            }
            other => return Err(perr(ln, format!("unknown directive `{other}`"))),
        }
    }

    let mut game = Game::new(name.unwrap_or_default());
    let mut sure = Vec::new();
    let mut sec = Vec::new();
    for (id, decl) in configs.into_iter().enumerate() {
        let decl = decl.ok_or_else(|| perr(0, format!("config {id} is not declared (ids must be dense)")))?;
        game.add_config(decl.owner, decl.label);
        sure.push(decl.prio_sure);
        sec.push(decl.prio_sec);
    }
    let n = game.len();
    for (ln, src, dst, prob) in edges {
        if src >= n || dst >= n {
            return Err(perr(ln, format!("edge {src} {dst} mentions an undeclared config")));
        }
        match (game.owner(src), prob) {
            (Owner::Random, Some(p)) => game.add_prob_edge(src, dst, p),
            (Owner::Random, None) => return Err(perr(ln, "missing prob on random source")),
            (_, Some(_)) => return Err(perr(ln, "prob on non-random source")),
            (_, None) => game.add_edge(src, dst),
        }
    }
    game.init = init;
    game.prio_sure = column("prio_sure", sure)?;
    game.prio_sec = column("prio_sec", sec)?;
    game.checked()
}

fn column(name: &str, col: Vec<Option<u32>>) -> Result<Option<Priorities>> {
    if col.iter().all(|p| p.is_none()) {
        return Ok(None);
    }
    if let Some(v) = col.iter().position(|p| p.is_none()) {
        return Err(perr(0, format!("{name} missing at config {v}")));
    }
    Ok(Some(Priorities::new(col.into_iter().map(|p| p.unwrap()).collect())))
}

/// Canonical text of a game.
pub fn serialize_game(game: &Game) -> String {
    let mut out = String::new();
    writeln!(out, "game {}", game.name).unwrap();
    for v in game.configs() {
        write!(out, "config {v} owner={}", game.owner(v).as_str()).unwrap();
        if let Some(p) = &game.prio_sure {
            write!(out, " prio_sure={}", p.get(v)).unwrap();
        }
        if let Some(p) = &game.prio_sec {
            write!(out, " prio_sec={}", p.get(v)).unwrap();
        }
        if let Some(l) = game.label(v) {
            write!(out, " label={l}").unwrap();
        }
        out.push('\n');
    }
    for v in game.configs() {
        if game.owner(v) == Owner::Random {
            for (w, p) in game.succ(v).iter().zip(game.probs(v)) {
                writeln!(out, "edge {v} {w} prob={}", format_rational(p)).unwrap();
            }
        } else {
            for w in game.succ(v) {
                writeln!(out, "edge {v} {w}").unwrap();
            }
        }
    }
    if let Some(i) = game.init {
        writeln!(out, "init {i}").unwrap();
    }
    out
}

fn config_ref(game: &Game, line: usize, s: &str) -> Result<usize> {
    if let Ok(v) = s.parse::<usize>() {
        if v < game.len() {
            return Ok(v);
        }
        return Err(perr(line, format!("config {v} out of range")));
    }
    game.find_label(s).ok_or_else(|| perr(line, format!("unknown config `{s}`")))
}

/// Parses a strategy for `game`. Missing `upd` entries keep the memory unchanged.
pub fn parse_strategy(text: &str, game: &Game) -> Result<(String, FiniteMemoryStrategy)> {
    let mut header: Option<(String, Player, usize)> = None;
    let mut strat: Option<FiniteMemoryStrategy> = None;
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok[0] {
            "strategy" => {
                if header.is_some() {
                    return Err(perr(ln, "duplicate strategy header"));
                }
                let name = tok.get(1).ok_or_else(|| perr(ln, "missing strategy name"))?.to_string();
                let mut player = None;
                let mut memory = None;
                for attr in &tok[2..] {
                    match attr.split_once('=') {
                        Some(("player", "0")) => player = Some(Player::Zero),
                        Some(("player", "1")) => player = Some(Player::One),
                        Some(("memory", m)) => memory = Some(parse_nat(ln, "memory", m)?),
                        _ => return Err(perr(ln, format!("bad attribute `{attr}`"))),
                    }
                }
                let player = player.ok_or_else(|| perr(ln, "missing player"))?;
                let memory = memory.ok_or_else(|| perr(ln, "missing memory"))?;
                if memory == 0 {
                    return Err(perr(ln, "memory must be positive"));
                }
                strat = Some(FiniteMemoryStrategy::new(player, memory, game.len()));
                header = Some((name, player, memory));
            }
            "initmem" | "out" | "upd" => {
                let s = strat.as_mut().ok_or_else(|| perr(ln, "strategy header must come first"))?;
                let mem = |t: &str| -> Result<usize> {
                    let m = parse_nat(ln, "memory", t)?;
                    if m >= s.memory {
                        Err(perr(ln, format!("memory {m} out of range")))
                    } else {
                        Ok(m)
                    }
                };
                if tok[0] == "initmem" {
                    let m = mem(tok.get(1).ok_or_else(|| perr(ln, "missing memory"))?)?;
                    s.initial = m;
                    continue;
                }
                if tok.len() != 5 || tok[3] != "->" {
                    return Err(perr(ln, format!("expected `{} <mem> <config> -> <target>`", tok[0])));
                }
                let m = mem(tok[1])?;
                let v = config_ref(game, ln, tok[2])?;
                if tok[0] == "out" {
                    let w = config_ref(game, ln, tok[4])?;
                    s.output[m][v] = Some(w);
                } else {
                    s.update[m][v] = mem(tok[4])?;
                }
            }
            other => return Err(perr(ln, format!("unknown directive `{other}`"))),
        }
    }
    let (name, _, _) = header.ok_or_else(|| perr(0, "missing strategy header"))?;
    let s = strat.unwrap();
    let violations = s.validate(game);
    if !violations.is_empty() {
        return Err(Error::InvalidStrategy(violations));
    }
    Ok((name, s))
}

/// Canonical text of a strategy.
pub fn serialize_strategy(name: &str, s: &FiniteMemoryStrategy) -> String {
    let mut out = String::new();
    let player = match s.player {
        Player::Zero => 0,
        Player::One => 1,
    };
    writeln!(out, "strategy {name} player={player} memory={}", s.memory).unwrap();
    writeln!(out, "initmem {}", s.initial).unwrap();
    for m in 0..s.memory {
        for (v, o) in s.output[m].iter().enumerate() {
            if let Some(w) = o {
                writeln!(out, "out {m} {v} -> {w}").unwrap();
            }
        }
    }
    for m in 0..s.memory {
        for (v, &m2) in s.update[m].iter().enumerate() {
            if m2 != m {
                writeln!(out, "upd {m} {v} -> {m2}").unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prob_on_player_config_is_rejected() {
        let text = "game t\nconfig 0 owner=p0\nconfig 1 owner=p0\nedge 0 1 prob=1/2\nedge 1 1\n";
        match parse_game(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("prob on non-random source"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rationals_are_reduced() {
        let p = parse_rational("2/4").unwrap();
        assert_eq!(format_rational(&p), "1/2");
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn dense_ids_required() {
        let text = "game t\nconfig 0 owner=p0\nconfig 2 owner=p0\nedge 0 0\nedge 2 2\n";
        assert!(matches!(parse_game(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn deadlock_is_reported() {
        let text = "game t\nconfig 0 owner=p0\n";
        match parse_game(text) {
            Err(Error::Invalid(v)) => assert_eq!(v, vec!["deadlock at 0".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strategy_round_trip() {
        let g = parse_game("game t\nconfig 0 owner=p0\nconfig 1 owner=p0\nedge 0 1\nedge 0 0\nedge 1 0\n").unwrap();
        let text = "strategy s player=0 memory=2\ninitmem 0\nout 0 0 -> 1\nout 0 1 -> 0\nout 1 0 -> 0\nout 1 1 -> 0\nupd 0 1 -> 1\n";
        let (name, s) = parse_strategy(text, &g).unwrap();
        assert_eq!(name, "s");
        assert_eq!(serialize_strategy(&name, &s), text);
    }

    #[test]
    fn strategy_output_must_be_edge() {
        let g = parse_game("game t\nconfig 0 owner=p0\nconfig 1 owner=p0\nedge 0 0\nedge 1 0\n").unwrap();
        let text = "strategy s player=0 memory=1\nout 0 0 -> 1\nout 0 1 -> 0\n";
        assert!(matches!(parse_strategy(text, &g), Err(Error::InvalidStrategy(_))));
    }
}
