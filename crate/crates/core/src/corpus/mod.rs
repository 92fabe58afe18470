//! Corpus data model and file formats: data-sheet CSV, structure-annotation
//! sidecars, and the per-corpus manifest.

mod datasheet;
mod manifest;
pub mod pitch;
mod structure;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use datasheet::{parse_datasheet, serialize_datasheet, DATASHEET_HEADER};
pub use manifest::{load_corpus, Manifest, ManifestEntry, MANIFEST_HEADER};
pub use pitch::{
    note_name_from_midi, note_name_to_midi, Accidental, Letter, MainOctaveStart, NoteName,
    MICROTONE_BEND, PLAYABLE_SCALE, PLAYABLE_SCALE_GAPS,
};
pub use structure::{parse_structure, render_structure, StructureTree};

pub const VALID_DURATIONS: [u8; 4] = [1, 2, 4, 8];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed note name '{0}'")]
    BadNoteName(String),
    #[error("no playable spelling for midi {midi} bend {bend}")]
    UnspellablePitch { midi: i32, bend: i32 },
    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("row {row}: bend {bend} not in {{0, 2048}}")]
    BadBend { row: usize, bend: i32 },
    #[error("row {row}: duration {duration} not in {{1, 2, 4, 8}}")]
    BadDuration { row: usize, duration: i64 },
    #[error("unexpected header: expected '{expected}', found '{found}'")]
    BadHeader { expected: String, found: String },
    #[error("data sheet has no note rows")]
    EmptyTune,
    #[error("unbalanced bracket at position {0}")]
    UnbalancedBracket(usize),
    #[error("structure annotation: {0}")]
    BadStructure(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// One corpus event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub name: NoteName,
    pub midi: i32,
    /// 0 for plain notes, 2048 for koron/sori.
    pub bend: i32,
    /// Duration class: 1, 2, 4, or 8.
    pub duration: u8,
    /// Quarter-tone distance from the previous note; 0 for the first.
    pub interval_qt: i32,
}

impl Note {
    /// Position on the quarter-tone lattice: `2 * midi + (bend != 0)`.
    pub fn quarter_pitch(&self) -> i32 {
        2 * self.midi + if self.bend == MICROTONE_BEND { 1 } else { 0 }
    }
}

/// An ordered, monophonic note sequence with optional structure annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tune {
    pub id: String,
    pub notes: Vec<Note>,
    pub structure: Option<StructureTree>,
}

impl Tune {
    pub fn new(id: impl Into<String>, notes: Vec<Note>) -> Self {
        Tune {
            id: id.into(),
            notes,
            structure: None,
        }
    }

    /// The `(midi, duration)` skeleton used by the variation pipeline.
    pub fn midi_durations(&self) -> Vec<(i32, u8)> {
        self.notes.iter().map(|n| (n.midi, n.duration)).collect()
    }

    /// Per-pitch bend and name templates, for re-spelling generated notes
    /// that stay inside the tune's vocabulary.
    pub fn spelling_map(&self) -> BTreeMap<i32, (i32, NoteName)> {
        self.notes
            .iter()
            .map(|n| (n.midi, (n.bend, n.name)))
            .collect()
    }

    /// Rebuilds a tune from `(midi, duration)` pairs, spelling each pitch
    /// from this tune's vocabulary where possible and falling back to the
    /// playable-scale spelling anchored at this tune's lowest natural.
    pub fn with_midi_durations(
        &self,
        id: impl Into<String>,
        pairs: &[(i32, u8)],
    ) -> Result<Tune, CorpusError> {
        let spelling = self.spelling_map();
        let fallback_anchor = self.fallback_anchor();
        let mut notes = Vec::with_capacity(pairs.len());
        let mut prev_qp: Option<i32> = None;
        for &(midi, duration) in pairs {
            let (bend, name) = match spelling.get(&midi) {
                Some(&(bend, name)) => (bend, name),
                None => {
                    let name = note_name_from_midi(midi, 0, fallback_anchor)?;
                    (0, name)
                }
            };
            let qp = 2 * midi + if bend == MICROTONE_BEND { 1 } else { 0 };
            notes.push(Note {
                name,
                midi,
                bend,
                duration,
                interval_qt: prev_qp.map_or(0, |p| qp - p),
            });
            prev_qp = Some(qp);
        }
        Ok(Tune {
            id: id.into(),
            notes,
            structure: None,
        })
    }

    fn fallback_anchor(&self) -> MainOctaveStart {
        let lowest = self.notes.iter().map(|n| n.midi).min().unwrap_or(60);
        // Snap down to the nearest natural.
        for delta in 0..12 {
            let candidate = lowest - delta;
            let pc = candidate.rem_euclid(12);
            if let Some(letter) = Letter::ALL.iter().find(|l| l.pitch_class() == pc) {
                return MainOctaveStart {
                    letter: *letter,
                    octave: candidate.div_euclid(12) - 1,
                };
            }
        }
        MainOctaveStart {
            letter: Letter::C,
            octave: 4,
        }
    }
}

/// A single validation finding; violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// 1-based note row.
    pub row: usize,
    pub message: String,
}

/// Checks every note invariant plus cross-note interval consistency.
pub fn validate_tune(t: &Tune) -> Vec<Violation> {
    let mut violations = Vec::new();
    if t.notes.is_empty() {
        violations.push(Violation {
            row: 0,
            message: "tune has no notes".into(),
        });
        return violations;
    }
    for (i, note) in t.notes.iter().enumerate() {
        let row = i + 1;
        if note.bend != 0 && note.bend != MICROTONE_BEND {
            violations.push(Violation {
                row,
                message: format!("bend {} not in {{0, 2048}}", note.bend),
            });
        }
        if !VALID_DURATIONS.contains(&note.duration) {
            violations.push(Violation {
                row,
                message: format!("duration {} not in {{1, 2, 4, 8}}", note.duration),
            });
        }
        let microtonal = note.name.accidental.is_microtonal();
        if (note.bend == MICROTONE_BEND) != microtonal {
            violations.push(Violation {
                row,
                message: format!(
                    "bend {} inconsistent with accidental {:?}",
                    note.bend, note.name.accidental
                ),
            });
        }
    }
    if t.notes[0].interval_qt != 0 {
        violations.push(Violation {
            row: 1,
            message: format!("first interval {} should be 0", t.notes[0].interval_qt),
        });
    }
    for i in 1..t.notes.len() {
        let computed = t.notes[i].quarter_pitch() - t.notes[i - 1].quarter_pitch();
        if t.notes[i].interval_qt != computed {
            violations.push(Violation {
                row: i + 1,
                message: format!(
                    "stored interval {} but computed {} quarter tones",
                    t.notes[i].interval_qt, computed
                ),
            });
        }
    }
    if let Some(structure) = &t.structure {
        if let Err(e) = structure.validate_against(t.notes.len()) {
            violations.push(Violation { row: 0, message: e });
        }
    }
    violations
}

/// Checks that each note's name maps back to its stored `(midi, bend)`
/// under the given main-octave anchor.
pub fn validate_names(t: &Tune, main_octave_start: MainOctaveStart) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (i, note) in t.notes.iter().enumerate() {
        let (midi, bend) = note_name_to_midi(&note.name, main_octave_start);
        if (midi, bend) != (note.midi, note.bend) {
            violations.push(Violation {
                row: i + 1,
                message: format!(
                    "name {} maps to ({midi},{bend}) but row stores ({},{})",
                    note.name, note.midi, note.bend
                ),
            });
        }
    }
    violations
}

/// Small hand-built tunes used by tests, benches, and examples.
pub mod fixtures {
    use super::*;

    /// The worked opening sequence from the dataset description:
    /// [(53,2), (55,2), (56,2), (58,2), (56,2), (55,2), (56,2), (55,2),
    ///  (56,1), (56,2), (55,8)].
    pub fn daramad_opening() -> Tune {
        let pairs: [(i32, u8); 11] = [
            (53, 2),
            (55, 2),
            (56, 2),
            (58, 2),
            (56, 2),
            (55, 2),
            (56, 2),
            (55, 2),
            (56, 1),
            (56, 2),
            (55, 8),
        ];
        tune_from_pairs("daramad-opening", &pairs)
    }

    /// Builds a valid tune from `(midi, duration)` pairs using plain
    /// (bend 0) spellings anchored at F3.
    pub fn tune_from_pairs(id: &str, pairs: &[(i32, u8)]) -> Tune {
        let anchor = MainOctaveStart::parse("F3").unwrap();
        let mut notes = Vec::new();
        let mut prev: Option<i32> = None;
        for &(midi, duration) in pairs {
            let name = note_name_from_midi(midi, 0, anchor).unwrap();
            notes.push(Note {
                name,
                midi,
                bend: 0,
                duration,
                interval_qt: prev.map_or(0, |p| 2 * (midi - p)),
            });
            prev = Some(midi);
        }
        Tune::new(id, notes)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn daramad_opening_is_self_consistent() {
        let t = daramad_opening();
        assert!(validate_tune(&t).is_empty());
    }

    #[test]
    fn interval_mismatch_names_the_row() {
        let mut t = daramad_opening();
        t.notes[1].interval_qt = 3;
        let v = validate_tune(&t);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].row, 2);
    }

    #[test]
    fn bad_bend_is_reported() {
        let mut t = daramad_opening();
        t.notes[2].bend = 1024;
        let v = validate_tune(&t);
        assert!(v
            .iter()
            .any(|v| v.row == 3 && v.message.contains("bend 1024")));
    }

    #[test]
    fn rebuilt_tune_keeps_spelling() {
        let t = daramad_opening();
        let rebuilt = t.with_midi_durations("copy", &t.midi_durations()).unwrap();
        assert_eq!(
            rebuilt
                .notes
                .iter()
                .map(|n| (n.midi, n.bend, n.duration))
                .collect::<Vec<_>>(),
            t.notes
                .iter()
                .map(|n| (n.midi, n.bend, n.duration))
                .collect::<Vec<_>>()
        );
        assert!(validate_tune(&rebuilt).is_empty());
    }
}
