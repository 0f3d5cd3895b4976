//! CSV tables and plain reports, written to a file or stdout.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Comment line stamped atop every CSV output.
pub fn meta_line(command: &str, seed: u64, extra: &[(&str, String)]) -> String {
    let mut line = format!("# meta command={command} seed={seed} version={VERSION}");
    for (key, value) in extra {
        write!(line, " {key}={value}").unwrap();
    }
    line
}

/// Shortest round-trip decimal, always with a fractional part or exponent.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Rounded to 12 decimals for human-facing summaries.
pub fn rounded(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

pub struct Table {
    text: String,
}

impl Table {
    pub fn new(meta: String, columns: &[&str]) -> Self {
        let mut text = meta;
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for cell in cells {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(cell.as_ref());
            first = false;
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            }),
    }
}
