//! Data-sheet CSV format: one file per Gusheh, header
//! `Note,Duration,MIDI,Interval,Bend`, one row per note in playing order.

use super::{CorpusError, Note, NoteName, Tune, MICROTONE_BEND, VALID_DURATIONS};

pub const DATASHEET_HEADER: &str = "Note,Duration,MIDI,Interval,Bend";

/// Parses a data sheet. Unknown or missing columns are rejected.
pub fn parse_datasheet(id: &str, text: &str) -> Result<Tune, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let expected: Vec<&str> = DATASHEET_HEADER.split(',').collect();
    if header != expected {
        return Err(CorpusError::BadHeader {
            expected: DATASHEET_HEADER.to_string(),
            found: header.join(","),
        });
    }

    let mut notes = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != 5 {
            return Err(CorpusError::MalformedRow {
                row,
                message: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let name = NoteName::parse(field(0)).map_err(|e| CorpusError::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        let duration: i64 = field(1).parse().map_err(|_| CorpusError::MalformedRow {
            row,
            message: format!("bad duration '{}'", field(1)),
        })?;
        let midi: i32 = field(2).parse().map_err(|_| CorpusError::MalformedRow {
            row,
            message: format!("bad MIDI number '{}'", field(2)),
        })?;
        let interval_qt: i32 = field(3).parse().map_err(|_| CorpusError::MalformedRow {
            row,
            message: format!("bad interval '{}'", field(3)),
        })?;
        let bend: i32 = field(4).parse().map_err(|_| CorpusError::MalformedRow {
            row,
            message: format!("bad bend '{}'", field(4)),
        })?;

        if bend != 0 && bend != MICROTONE_BEND {
            return Err(CorpusError::BadBend { row, bend });
        }
        if !(1..=8).contains(&duration) || !VALID_DURATIONS.contains(&(duration as u8)) {
            return Err(CorpusError::BadDuration { row, duration });
        }
        notes.push(Note {
            name,
            midi,
            bend,
            duration: duration as u8,
            interval_qt,
        });
    }
    if notes.is_empty() {
        return Err(CorpusError::EmptyTune);
    }
    Ok(Tune::new(id, notes))
}

/// Renders a tune back to the data-sheet format; inverse of
/// [`parse_datasheet`] for valid tunes.
pub fn serialize_datasheet(t: &Tune) -> String {
    let mut out = String::from(DATASHEET_HEADER);
    out.push('\n');
    for note in &t.notes {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            note.name, note.duration, note.midi, note.interval_qt, note.bend
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::daramad_opening;

    const OPENING: &str = "\
Note,Duration,MIDI,Interval,Bend
F,2,53,0,0
G,2,55,2,0
Ab,2,56,1,0
";

    #[test]
    fn parses_the_worked_opening_rows() {
        let t = parse_datasheet("daramad", OPENING).unwrap();
        assert_eq!(
            t.notes.iter().map(|n| n.midi).collect::<Vec<_>>(),
            [53, 55, 56]
        );
        assert_eq!(
            t.notes.iter().map(|n| n.duration).collect::<Vec<_>>(),
            [2, 2, 2]
        );
        assert_eq!(t.notes[0].interval_qt, 0);
    }

    #[test]
    fn single_row_tune() {
        let t = parse_datasheet("one", "Note,Duration,MIDI,Interval,Bend\nF,8,53,0,0\n").unwrap();
        assert_eq!(t.notes.len(), 1);
        assert_eq!(t.notes[0].interval_qt, 0);
    }

    #[test]
    fn duration_outside_domain_rejected() {
        let text = "Note,Duration,MIDI,Interval,Bend\nF,3,53,0,0\n";
        assert!(matches!(
            parse_datasheet("x", text),
            Err(CorpusError::BadDuration {
                row: 1,
                duration: 3
            })
        ));
    }

    #[test]
    fn bad_bend_rejected() {
        let text = "Note,Duration,MIDI,Interval,Bend\nF,2,53,0,99\n";
        assert!(matches!(
            parse_datasheet("x", text),
            Err(CorpusError::BadBend { row: 1, bend: 99 })
        ));
    }

    #[test]
    fn malformed_row_names_the_row() {
        let text = "Note,Duration,MIDI,Interval,Bend\nF,2,53,0,0\nQ,2,55,2,0\n";
        match parse_datasheet("x", text) {
            Err(CorpusError::MalformedRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extra_columns_rejected() {
        let text = "Note,Duration,MIDI,Interval,Bend,Extra\nF,2,53,0,0,1\n";
        assert!(matches!(
            parse_datasheet("x", text),
            Err(CorpusError::BadHeader { .. })
        ));
    }

    #[test]
    fn serialize_parse_round_trip() {
        let t = daramad_opening();
        let text = serialize_datasheet(&t);
        let back = parse_datasheet(&t.id, &text).unwrap();
        assert_eq!(back, t);
    }
}
