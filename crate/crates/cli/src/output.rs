//! Artifact writing: every file goes through a temporary name and a rename,
//! and a manifest with SHA-256 hashes is written last.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::Path;
use tiedown_core::stats::ComparisonReport;

/// Everything an experiment produced, held in memory until it finished.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    /// `(file stem, report)` pairs.
    pub reports: Vec<(String, ComparisonReport)>,
}

impl Artifacts {
    pub fn file(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn report(&mut self, stem: impl Into<String>, r: ComparisonReport) {
        self.reports.push((stem.into(), r));
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.all_pass())
    }
}

#[derive(Serialize)]
struct Entry {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    command: &'a str,
    config: &'a crate::config::ExperimentConfig,
    pass: bool,
    artifacts: Vec<Entry>,
}

fn write_atomic(dir: &Path, name: &str, data: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.partial"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

/// Writes reports as `<stem>.json` and the other files as named, then `manifest.json`.
/// Returns the written names.
pub fn write_all(dir: &Path, command: &str, config: &crate::config::ExperimentConfig, art: &Artifacts) -> std::io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for (stem, r) in &art.reports {
        files.push((format!("{stem}.json"), (r.to_json() + "\n").into_bytes()));
    }
    files.extend(art.files.iter().cloned());
    let mut entries = Vec::new();
    for (name, data) in &files {
        write_atomic(dir, name, data)?;
        entries.push(Entry { path: name.clone(), bytes: data.len(), sha256: hex::encode(Sha256::digest(data)) });
    }
    let manifest = Manifest { schema: 1, command, config, pass: art.all_pass(), artifacts: entries };
    let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
    write_atomic(dir, "manifest.json", text.as_bytes())?;
    Ok(files.into_iter().map(|f| f.0).chain(std::iter::once("manifest.json".into())).collect())
}
