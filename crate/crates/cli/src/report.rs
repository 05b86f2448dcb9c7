//! Plain-text run reports: one `key: value` line per field, in insertion order.

use std::fmt::Display;

use spg_core::{ConfigSet, Game};

#[derive(Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn kv(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }
}

/// A configuration id, followed by its label when it has one.
pub fn config_ref(game: &Game, v: usize) -> String {
    match game.label(v) {
        Some(l) => format!("{v}={l}"),
        None => v.to_string(),
    }
}

/// A sorted region as `[id=label, ...]`.
pub fn region(game: &Game, set: &ConfigSet) -> String {
    let items: Vec<String> = set.iter().map(|v| config_ref(game, v)).collect();
    format!("[{}]", items.join(", "))
}
