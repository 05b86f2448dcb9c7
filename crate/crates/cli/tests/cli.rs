//! End-to-end runs of the `spg` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spg_core::format::{parse_game, serialize_game};
use spg_core::gen::{random_game, GenParams};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn field(&self, key: &str) -> Option<&str> {
        self.stdout.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
    }
}

fn spg(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_spg")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn example(name: &str) -> String {
    format!("{}/../../games/{name}.game", env!("CARGO_MANIFEST_DIR"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ids of a region line such as `[0, 2=r]`.
fn ids(region: &str) -> Vec<String> {
    let inner = region.trim_start_matches('[').trim_end_matches(']');
    inner.split(", ").filter(|x| !x.is_empty()).map(|x| x.split('=').next().unwrap().to_string()).collect()
}

#[test]
fn infinite_memory_example_is_lost() {
    let r = spg(&["solve", "--mode", "sas", "--input", &example("fig1")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.field("w0"), Some("[]"));
    assert_eq!(r.field("pipeline"), Some("sas-mdp"));
}

#[test]
fn limit_sure_example_and_its_strategy_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let r = spg(&["solve", "--mode", "sls", "--epsilon", "1/16", "--input", &example("fig2"), "--emit", s(dir.path())]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.field("w0"), Some("[1=c, 2=p, 3=r]"));
    assert_eq!(r.field("horizon"), Some("4"));
    assert_eq!(r.field("reach[1=c]"), Some("15/16"));
    let strat = r.field("strategy0").unwrap();
    let v = spg(&[
        "verify", "--game", &example("fig2"), "--strategy", strat, "--mode", "sls", "--epsilon", "1/16", "--from", "c",
        "--from", "p", "--from", "r",
    ]);
    assert_eq!(v.code, 0, "{}", v.stdout);
    assert_eq!(v.field("result"), Some("verified"));
    let tighter = spg(&["verify", "--game", &example("fig2"), "--strategy", strat, "--mode", "sls", "--epsilon", "1/64", "--from", "c"]);
    assert_eq!(tighter.code, 2);
}

#[test]
fn parity_mode_rejects_a_second_objective() {
    let r = spg(&["solve", "--mode", "parity", "--input", &example("fig2")]);
    assert_eq!(r.code, 64);
    assert!(r.stderr.contains("prio_sec"), "{}", r.stderr);
}

#[test]
fn reports_are_reproducible() {
    let args = ["solve", "--mode", "sas", "--model", "game", "--input", &example("fig2")];
    let a = spg(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, spg(&args).stdout);
    let dir = tempfile::tempdir().unwrap();
    let sls = spg(&["solve", "--mode", "sls", "--epsilon", "1/8", "--input", &example("fig2"), "--emit", s(dir.path())]);
    let sim = ["simulate", "--input", &example("fig2"), "--strategy", sls.field("strategy0").unwrap(), "--seed", "9"];
    let first = spg(&sim);
    assert_eq!(first.code, 0, "{}", first.stderr);
    assert_eq!(first.stdout, spg(&sim).stdout);
}

#[test]
fn losing_start_is_refuted() {
    let dir = tempfile::tempdir().unwrap();
    let r = spg(&["solve", "--mode", "sas", "--input", &example("fig2"), "--emit", s(dir.path())]);
    assert_eq!(r.field("w0"), Some("[3=r]"));
    let strat = r.field("strategy0").unwrap();
    assert_eq!(spg(&["verify", "--game", &example("fig2"), "--strategy", strat, "--from", "r"]).code, 0);
    let v = spg(&["verify", "--game", &example("fig2"), "--strategy", strat]);
    assert_eq!(v.code, 2);
    assert_eq!(v.field("from[1=c]"), Some("refuted"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.game");
    std::fs::write(&bad, "game x\nconfig 0 owner=p9\n").unwrap();
    assert_eq!(spg(&["solve", "--mode", "sas", "--input", s(&bad)]).code, 65);
    assert_eq!(spg(&["solve", "--mode", "sas"]).code, 64);
    assert_eq!(spg(&["solve", "--mode", "sls", "--input", &example("fig2")]).code, 64);
    assert_eq!(spg(&["solve", "--mode", "sls", "--epsilon", "1", "--input", &example("fig2")]).code, 64);
    assert_eq!(spg(&["oracle", "--input", &example("fig1"), "--mem-bound", "4", "--cap", "1"]).code, 3);
    assert_eq!(spg(&["--help"]).code, 0);
}

#[test]
fn reduce_emits_every_stage_with_maps() {
    let dir = tempfile::tempdir().unwrap();
    let r = spg(&["reduce", "--pipeline", "sas-game", "--input", &example("fig2"), "--emit", s(dir.path())]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let gadget = parse_game(&std::fs::read_to_string(dir.path().join("01-gadget.game")).unwrap()).unwrap();
    assert!(gadget.prio_sure.is_some() && gadget.prio_sec.is_some());
    assert!(gadget.is_non_stochastic());
    let map = std::fs::read_to_string(dir.path().join("01-gadget.map")).unwrap();
    assert_eq!(map.lines().count(), gadget.len());
    assert!(map.lines().all(|l| l.contains(" <- ") && l.ends_with(']')));
    let parity = parse_game(&std::fs::read_to_string(dir.path().join("02-parity.game")).unwrap()).unwrap();
    assert_eq!(r.field("stage_parity"), Some(parity.len().to_string().as_str()));
}

#[test]
fn streett_parity_reduction_on_two_player_game() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_game(&mut ChaCha8Rng::seed_from_u64(1), &GenParams::two_player(5, 3));
    let input = dir.path().join("g.game");
    std::fs::write(&input, serialize_game(&g)).unwrap();
    let out = dir.path().join("out");
    let r = spg(&["reduce", "--to", "streett-parity", "--input", s(&input), "--emit", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(out.join("01-parity.game").exists() && out.join("01-parity.map").exists());
}

#[test]
fn emitted_strategies_reverify_on_random_games() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..12 {
        let (params, mode) = match i % 3 {
            0 => (GenParams::mdp(5, 2), "sas"),
            1 => (GenParams::game(5, 2, 2), "sas"),
            _ => (GenParams::two_player(5, 2), "conj"),
        };
        let g = random_game(&mut rng, &params);
        let input: PathBuf = dir.path().join(format!("g{i}.game"));
        std::fs::write(&input, serialize_game(&g)).unwrap();
        let emit = dir.path().join(format!("out{i}"));
        let r = spg(&["solve", "--mode", mode, "--input", s(&input), "--emit", s(&emit)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        for (player, region) in [("strategy0", "w0"), ("strategy1", "w1")] {
            let Some(strat) = r.field(player) else { continue };
            let from = ids(r.field(region).unwrap());
            if from.is_empty() {
                continue;
            }
            let mut args = vec!["verify", "--game", s(&input), "--strategy", strat, "--mode", mode];
            for v in &from {
                args.extend(["--from", v.as_str()]);
            }
            let v = spg(&args);
            assert_eq!(v.code, 0, "game {i} {player}: {}", v.stdout);
        }
    }
}
