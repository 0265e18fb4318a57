//! Files written by the commands: CSVs, `summary.json` and gnuplot scripts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir { root: root.to_path_buf(), written: vec![] })
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let path = self.root.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(f);
        body(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(name, |w| writeln!(w, "{text}"))
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Value,
    pub threshold: String,
    pub pass: bool,
}

pub fn check(name: &str, value: impl Serialize, threshold: impl Into<String>, pass: bool) -> Check {
    Check { name: name.to_string(), value: serde_json::to_value(value).unwrap_or(Value::Null), threshold: threshold.into(), pass }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub command: &'a str,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub results: Value,
    pub files: Vec<String>,
}

/// Writes `summary.json` last so that it lists every other file.
pub fn finish(mut out: OutDir, command: &str, checks: Vec<Check>, results: Value) -> Result<bool> {
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!("[{}] {}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    let summary = Summary { command, pass, checks, results, files: out.files().to_vec() };
    out.write_json("summary.json", &summary)?;
    Ok(pass)
}

/// `gnuplot plot.gp` from inside the output directory renders `plot.png`.
pub fn gnuplot(out: &mut OutDir, body: &str) -> Result<()> {
    out.write("plot.gp", |w| {
        writeln!(w, "set terminal pngcairo size 1000,700")?;
        writeln!(w, "set output 'plot.png'")?;
        writeln!(w, "set datafile separator ','")?;
        writeln!(w, "set key autotitle columnhead")?;
        write!(w, "{body}")
    })
}
