//! Files written inside one output directory, each carrying the schema
//! version and the resolved configuration.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use satfront::io::{csv_string, json_string, write_text, SCHEMA_VERSION};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub struct Artifacts {
    dir: PathBuf,
    config: Value,
    meta: String,
    csv: bool,
    json: bool,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, config: &RunConfig) -> Self {
        let resolved = config.resolved_json();
        let meta = serde_json::to_string(&json!({ "schema_version": SCHEMA_VERSION, "config": resolved }))
            .expect("config is serialisable");
        Self {
            dir: dir.to_path_buf(),
            config: resolved,
            meta,
            csv: config.writes(Format::Csv),
            json: config.writes(Format::Json),
            written: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        R: AsRef<[f64]>,
        I: IntoIterator<Item = R>,
    {
        if !self.csv {
            return Ok(());
        }
        let text = csv_string(Some(&self.meta), header, rows);
        self.write(name, &text)
    }

    /// Writes `{schema_version, config, <report fields>}`.
    pub fn json(&mut self, name: &str, report: Value) -> Result<(), CliError> {
        if !self.json {
            return Ok(());
        }
        let mut doc = json!({ "schema_version": SCHEMA_VERSION, "config": self.config });
        if let (Value::Object(d), Value::Object(r)) = (&mut doc, report) {
            d.extend(r);
        }
        let text = json_string(&doc).map_err(|e| CliError::io(&self.dir.join(name), e))?;
        self.write(name, &text)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_text(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}
