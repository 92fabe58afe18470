//! Corpus manifest (`id,main_octave_start,order`) and directory loading.
//!
//! A corpus directory holds one data-sheet CSV per Gusheh, optional
//! `<id>.structure` sidecars, and an optional `manifest.csv` fixing the
//! playing order and the main-octave anchor.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_datasheet, parse_structure, CorpusError, MainOctaveStart, Tune};

pub const MANIFEST_HEADER: &str = "id,main_octave_start,order";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub main_octave_start: String,
    pub order: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Manifest, CorpusError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        if header.join(",") != MANIFEST_HEADER {
            return Err(CorpusError::BadHeader {
                expected: MANIFEST_HEADER.to_string(),
                found: header.join(","),
            });
        }
        let mut entries = Vec::new();
        for record in reader.deserialize() {
            let entry: ManifestEntry = record?;
            // Validate the anchor spelling eagerly.
            MainOctaveStart::parse(&entry.main_octave_start)?;
            entries.push(entry);
        }
        entries.sort_by_key(|e| e.order);
        Ok(Manifest { entries })
    }

    pub fn render(&self) -> String {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.id, e.main_octave_start, e.order));
        }
        out
    }

    pub fn anchor_for(&self, id: &str) -> Option<MainOctaveStart> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .and_then(|e| MainOctaveStart::parse(&e.main_octave_start).ok())
    }
}

/// Loads every data sheet in `dir`, ordered by the manifest when present
/// and alphabetically otherwise. Structure sidecars (`<id>.structure`)
/// are attached when found.
pub fn load_corpus(dir: &Path) -> Result<(Vec<Tune>, Option<Manifest>), CorpusError> {
    let manifest_path = dir.join("manifest.csv");
    let manifest = if manifest_path.exists() {
        Some(Manifest::parse(&fs::read_to_string(&manifest_path)?)?)
    } else {
        None
    };

    let mut ids: Vec<String> = Vec::new();
    if let Some(m) = &manifest {
        ids.extend(m.entries.iter().map(|e| e.id.clone()));
    } else {
        let mut found = Vec::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().map(|e| e == "csv").unwrap_or(false) {
                let stem = path.file_stem().unwrap().to_string_lossy().to_string();
                if stem != "manifest" {
                    found.push(stem);
                }
            }
        }
        found.sort();
        ids = found;
    }

    let mut tunes = Vec::new();
    for id in ids {
        let path = dir.join(format!("{id}.csv"));
        let text = fs::read_to_string(&path)?;
        let mut tune = parse_datasheet(&id, &text)?;
        let sidecar = dir.join(format!("{id}.structure"));
        if sidecar.exists() {
            tune.structure = Some(parse_structure(&fs::read_to_string(&sidecar)?)?);
        }
        tunes.push(tune);
    }
    Ok((tunes, manifest))
}
