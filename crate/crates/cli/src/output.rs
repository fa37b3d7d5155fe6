//! Run configuration and output sinks.
//!
//! Files written with `--out` embed the configuration that produced them: CSV
//! files start with a `# critwin {json}` comment line and JSON documents carry
//! a `config` object. Standard output gets the same JSON but plain CSV.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub format: &'static str,
    /// Every flag of the subcommand, including the seed where there is one.
    pub args: Value,
}

impl RunConfig {
    pub fn new(subcommand: &'static str, format: &'static str, args: &impl Serialize) -> Self {
        RunConfig {
            tool: "critwin",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            format,
            args: serde_json::to_value(args).expect("flags serialize"),
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> critwin::Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| critwin::Error::Io(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| critwin::Error::Io(format!("stdout: {e}"))),
    }
}

/// Writes CSV text (header row first) to `out` or standard output.
pub fn emit_csv(config: &RunConfig, out: Option<&Path>, csv: &str) -> critwin::Result<()> {
    match out {
        Some(_) => {
            let header = serde_json::to_string(config).expect("config serializes");
            write_text(out, &format!("# critwin {header}\n{csv}"))
        }
        None => write_text(None, csv),
    }
}

/// Writes `document` with the configuration attached under `config`.
pub fn emit_json(config: &RunConfig, out: Option<&Path>, document: &impl Serialize) -> critwin::Result<()> {
    let mut value = serde_json::to_value(document).expect("document serializes");
    if let Value::Object(map) = &mut value {
        map.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    }
    let mut text = serde_json::to_string_pretty(&value).expect("json serializes");
    text.push('\n');
    write_text(out, &text)
}
