//! CSV/JSON writers with a metadata header and atomic replacement.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub struct Metadata {
    pub experiment: String,
    pub config_json: String,
    pub seed: u64,
}

impl Metadata {
    pub fn config_sha256(&self) -> String {
        let digest = Sha256::digest(self.config_json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn header(&self) -> String {
        format!(
            "# adiawalk {}\n# experiment: {}\n# config: {}\n# config-sha256: {}\n# seed: {}\n# rng: ChaCha8\n",
            env!("CARGO_PKG_VERSION"),
            self.experiment,
            self.config_json,
            self.config_sha256(),
            self.seed
        )
    }
}

/// Full-precision float formatting shared by all tables.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "nan".into())
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Metadata) -> String {
        let mut out = meta.header();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the table (and optional JSON summary next to it) or prints to stdout.
pub fn emit(table: &Table, summary: Option<&serde_json::Value>, meta: &Metadata, out: Option<&Path>) -> std::io::Result<()> {
    let csv = table.render(meta);
    match out {
        Some(path) => {
            write_atomic(path, csv.as_bytes())?;
            if let Some(s) = summary {
                let mut text = serde_json::to_string_pretty(s).expect("summary serializes");
                text.push('\n');
                write_atomic(&path.with_extension("summary.json"), text.as_bytes())?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(csv.as_bytes())?;
            if let Some(s) = summary {
                writeln!(stdout, "# summary: {}", serde_json::to_string(s).expect("summary serializes"))?;
            }
        }
    }
    Ok(())
}
