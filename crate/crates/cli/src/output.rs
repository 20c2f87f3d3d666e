//! File emission and JSON report assembly.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nematic_core::io::fmt17;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Sink {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
}

impl Sink {
    pub fn new(dir: PathBuf, format: Option<Format>) -> Self {
        Self {
            dir,
            csv: format != Some(Format::Json),
            json: format != Some(Format::Csv),
        }
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| io_error(&self.dir, e))?;
        let path = self.dir.join(name);
        nematic_core::io::write_file(&path, contents)?;
        Ok(path)
    }

    pub fn csv(&self, name: &str, contents: &str) -> Result<(), CliError> {
        if self.csv {
            let p = self.write(name, contents)?;
            log::info!("wrote {}", p.display());
        }
        Ok(())
    }

    pub fn json(&self, name: &str, report: &Report) -> Result<(), CliError> {
        if self.json {
            let p = self.write(name, &report.render())?;
            log::info!("wrote {}", p.display());
        }
        Ok(())
    }
}

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// JSON number, or the `fmt17` spelling for non-finite values.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(fmt17(v)))
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn opt(v: Option<f64>) -> Value {
    v.map(num).unwrap_or(Value::Null)
}

/// TOML value as JSON, keeping `inf`/`nan` as strings.
fn toml_to_json(v: &toml::Value) -> Value {
    match v {
        toml::Value::String(s) => Value::String(s.clone()),
        toml::Value::Integer(i) => json!(i),
        toml::Value::Float(f) => num(*f),
        toml::Value::Boolean(b) => json!(b),
        toml::Value::Datetime(d) => Value::String(d.to_string()),
        toml::Value::Array(a) => Value::Array(a.iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => {
            let mut m = Map::new();
            for (k, v) in t {
                m.insert(k.clone(), toml_to_json(v));
            }
            Value::Object(m)
        }
    }
}

/// A JSON report: deterministic `data` plus a `metadata` block holding the
/// only run-dependent values (timestamps and timings).
pub struct Report {
    command: String,
    config: Value,
    data: Value,
    started: SystemTime,
    clock: Instant,
}

impl Report {
    pub fn start(command: &str, cfg: &RunConfig) -> Self {
        let config = toml::Value::try_from(cfg)
            .map(|v| toml_to_json(&v))
            .unwrap_or(Value::Null);
        Self {
            command: command.to_string(),
            config,
            data: Value::Null,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn set_data(&mut self, data: Value) {
        self.data = data;
    }

    pub fn render(&self) -> String {
        let since = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let doc = json!({
            "command": self.command,
            "config": self.config,
            "data": self.data,
            "metadata": {
                "version": env!("CARGO_PKG_VERSION"),
                "started_unix_s": since(self.started),
                "finished_unix_s": since(SystemTime::now()),
                "wall_time_s": self.clock.elapsed().as_secs_f64(),
            },
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}
