//! Standard MIDI file export/import with quarter tones encoded as
//! pitch-bend offsets above the 14-bit center (8192 + 2048 for
//! koron/sori, center for plain notes).

use thiserror::Error;

use crate::corpus::{CorpusError, Tune, MICROTONE_BEND};

const BEND_CENTER: i32 = 8192;
/// Tolerance when classifying imported bend values.
const BEND_TOLERANCE: i32 = 64;

#[derive(Debug, Error)]
pub enum MidiError {
    #[error("truncated or malformed file: {0}")]
    Malformed(String),
    #[error("overlapping note-ons: polyphonic content is unsupported")]
    Polyphony,
    #[error("file contains no notes")]
    Empty,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidiConfig {
    pub ticks_per_quarter: u16,
    pub tempo_bpm: f64,
    pub channel: u8,
}

impl Default for MidiConfig {
    fn default() -> Self {
        MidiConfig {
            ticks_per_quarter: 480,
            tempo_bpm: 120.0,
            channel: 0,
        }
    }
}

/// Which bend convention an imported file used for microtones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BendConvention {
    /// 8192-centered wheel, microtones at center + 2048.
    CenterOffset,
    /// Raw values 0 / 2048.
    Absolute,
}

#[derive(Debug)]
pub struct MidiImport {
    pub tune: Tune,
    pub bend_convention: BendConvention,
    pub warnings: Vec<String>,
}

fn duration_ticks(class: u8, tpq: u32) -> u32 {
    match class {
        1 => tpq / 4,
        2 => tpq / 2,
        4 => tpq,
        8 => 2 * tpq,
        _ => tpq,
    }
}

fn push_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut bytes = vec![(value & 0x7f) as u8];
    value >>= 7;
    while value > 0 {
        bytes.push(((value & 0x7f) as u8) | 0x80);
        value >>= 7;
    }
    bytes.reverse();
    out.extend_from_slice(&bytes);
}

/// Renders a tune as a single-track format-0 file. Every note is preceded
/// by a bend event (center for plain notes, center + 2048 for microtones);
/// notes are strictly sequential.
pub fn export_midi(t: &Tune, cfg: &MidiConfig) -> Vec<u8> {
    let tpq = u32::from(cfg.ticks_per_quarter);
    let channel = cfg.channel & 0x0f;
    let mut track: Vec<u8> = Vec::new();

    // Tempo meta event.
    let us_per_quarter = (60_000_000.0 / cfg.tempo_bpm).round() as u32;
    push_vlq(&mut track, 0);
    track.extend_from_slice(&[0xff, 0x51, 0x03]);
    track.extend_from_slice(&us_per_quarter.to_be_bytes()[1..]);

    for note in &t.notes {
        let wheel = BEND_CENTER
            + if note.bend == MICROTONE_BEND {
                MICROTONE_BEND
            } else {
                0
            };
        push_vlq(&mut track, 0);
        track.push(0xe0 | channel);
        track.push((wheel & 0x7f) as u8);
        track.push(((wheel >> 7) & 0x7f) as u8);

        push_vlq(&mut track, 0);
        track.push(0x90 | channel);
        track.push(note.midi.clamp(0, 127) as u8);
        track.push(0x60);

        push_vlq(&mut track, duration_ticks(note.duration, tpq));
        track.push(0x80 | channel);
        track.push(note.midi.clamp(0, 127) as u8);
        track.push(0x40);
    }

    push_vlq(&mut track, 0);
    track.extend_from_slice(&[0xff, 0x2f, 0x00]);

    let mut out = Vec::with_capacity(track.len() + 22);
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes()); // format 0
    out.extend_from_slice(&1u16.to_be_bytes()); // one track
    out.extend_from_slice(&cfg.ticks_per_quarter.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], MidiError> {
        if self.pos + n > self.data.len() {
            return Err(MidiError::Malformed("unexpected end of data".into()));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn byte(&mut self) -> Result<u8, MidiError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, MidiError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, MidiError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32, MidiError> {
        let mut value: u32 = 0;
        for _ in 0..4 {
            let b = self.byte()?;
            value = (value << 7) | u32::from(b & 0x7f);
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(MidiError::Malformed(
            "variable-length quantity too long".into(),
        ))
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    NoteOn { time: u64, key: u8 },
    NoteOff { time: u64, key: u8 },
    Bend { time: u64, wheel: i32 },
}

impl Event {
    fn time(&self) -> u64 {
        match *self {
            Event::NoteOn { time, .. } | Event::NoteOff { time, .. } | Event::Bend { time, .. } => {
                time
            }
        }
    }
}

/// Parses a format-0 or format-1 file (tracks merged by absolute time)
/// into a monophonic tune. Durations quantize to the nearest class by
/// tick ratio; bend values map back to {0, 2048}, tolerating both the
/// center-offset and absolute conventions.
pub fn import_midi(bytes: &[u8]) -> Result<MidiImport, MidiError> {
    let mut r = Reader {
        data: bytes,
        pos: 0,
    };
    if r.take(4)? != b"MThd" {
        return Err(MidiError::Malformed("missing MThd".into()));
    }
    let header_len = r.u32()? as usize;
    let format = r.u16()?;
    let n_tracks = r.u16()?;
    let division = r.u16()?;
    if division & 0x8000 != 0 {
        return Err(MidiError::Malformed(
            "SMPTE time division unsupported".into(),
        ));
    }
    let tpq = u32::from(division.max(1));
    if header_len > 6 {
        r.take(header_len - 6)?;
    }
    if format > 1 {
        return Err(MidiError::Malformed(format!("format {format} unsupported")));
    }

    let mut events: Vec<Event> = Vec::new();
    for _ in 0..n_tracks {
        if r.take(4)? != b"MTrk" {
            return Err(MidiError::Malformed("missing MTrk".into()));
        }
        let len = r.u32()? as usize;
        let mut tr = Reader {
            data: r.take(len)?,
            pos: 0,
        };
        let mut time: u64 = 0;
        let mut running: Option<u8> = None;
        while tr.pos < tr.data.len() {
            time += u64::from(tr.vlq()?);
            let first = tr.byte()?;
            let status = if first & 0x80 != 0 {
                if first < 0xf0 {
                    running = Some(first);
                }
                first
            } else {
                tr.pos -= 1;
                running
                    .ok_or_else(|| MidiError::Malformed("running status without status".into()))?
            };
            match status & 0xf0 {
                0x90 => {
                    let key = tr.byte()?;
                    let vel = tr.byte()?;
                    if vel == 0 {
                        events.push(Event::NoteOff { time, key });
                    } else {
                        events.push(Event::NoteOn { time, key });
                    }
                }
                0x80 => {
                    let key = tr.byte()?;
                    let _vel = tr.byte()?;
                    events.push(Event::NoteOff { time, key });
                }
                0xe0 => {
                    let lsb = tr.byte()?;
                    let msb = tr.byte()?;
                    let wheel = i32::from(lsb & 0x7f) | (i32::from(msb & 0x7f) << 7);
                    events.push(Event::Bend { time, wheel });
                }
                0xa0 | 0xb0 => {
                    tr.take(2)?;
                }
                0xc0 | 0xd0 => {
                    tr.take(1)?;
                }
                0xf0 => match status {
                    0xff => {
                        let _type = tr.byte()?;
                        let len = tr.vlq()? as usize;
                        tr.take(len)?;
                    }
                    0xf0 | 0xf7 => {
                        let len = tr.vlq()? as usize;
                        tr.take(len)?;
                    }
                    _ => return Err(MidiError::Malformed(format!("status {status:#x}"))),
                },
                _ => return Err(MidiError::Malformed(format!("status {status:#x}"))),
            }
        }
    }
    events.sort_by_key(|e| e.time());

    // Walk events into monophonic (key, bend, ticks) triples.
    let mut warnings = Vec::new();
    let mut convention: Option<BendConvention> = None;
    let mut current_wheel: i32 = BEND_CENTER;
    let mut active: Option<(u8, i32, u64)> = None;
    let mut triples: Vec<(u8, i32, u64)> = Vec::new();
    for event in &events {
        match *event {
            Event::Bend { wheel, .. } => current_wheel = wheel,
            Event::NoteOn { time, key } => {
                if active.is_some() {
                    return Err(MidiError::Polyphony);
                }
                let bend = classify_bend(current_wheel, &mut convention, &mut warnings);
                active = Some((key, bend, time));
            }
            Event::NoteOff { time, key } => {
                if let Some((on_key, bend, start)) = active {
                    if on_key == key {
                        triples.push((on_key, bend, time - start));
                        active = None;
                    }
                }
            }
        }
    }
    if triples.is_empty() {
        return Err(MidiError::Empty);
    }

    let pairs: Vec<(i32, u8)> = triples
        .iter()
        .map(|&(key, _, ticks)| (i32::from(key), quantize_duration(ticks, tpq)))
        .collect();
    let tune = spell_imported(&pairs, &triples)?;
    Ok(MidiImport {
        tune,
        bend_convention: convention.unwrap_or(BendConvention::CenterOffset),
        warnings,
    })
}

fn classify_bend(
    wheel: i32,
    convention: &mut Option<BendConvention>,
    warnings: &mut Vec<String>,
) -> i32 {
    let near = |target: i32| (wheel - target).abs() <= BEND_TOLERANCE;
    if near(BEND_CENTER) {
        convention.get_or_insert(BendConvention::CenterOffset);
        0
    } else if near(BEND_CENTER + MICROTONE_BEND) {
        convention.get_or_insert(BendConvention::CenterOffset);
        MICROTONE_BEND
    } else if near(0) {
        convention.get_or_insert(BendConvention::Absolute);
        0
    } else if near(MICROTONE_BEND) {
        convention.get_or_insert(BendConvention::Absolute);
        MICROTONE_BEND
    } else {
        warnings.push(format!(
            "bend value {wheel} outside both conventions; treated as plain"
        ));
        0
    }
}

fn quantize_duration(ticks: u64, tpq: u32) -> u8 {
    let ratio = ticks as f64 / f64::from(tpq);
    let mut best = 1u8;
    let mut best_err = f64::INFINITY;
    for (class, target) in [(1u8, 0.25), (2, 0.5), (4, 1.0), (8, 2.0)] {
        let err = (ratio - target).abs();
        if err < best_err {
            best = class;
            best_err = err;
        }
    }
    best
}

fn spell_imported(pairs: &[(i32, u8)], triples: &[(u8, i32, u64)]) -> Result<Tune, MidiError> {
    use crate::corpus::{note_name_from_midi, Letter, MainOctaveStart, Note};
    // Main octave anchored at the lowest note's natural, per the corpus
    // convention.
    let lowest = triples
        .iter()
        .map(|&(key, bend, _)| i32::from(key) + i32::from(bend == MICROTONE_BEND))
        .min()
        .unwrap();
    let mut anchor = MainOctaveStart {
        letter: Letter::C,
        octave: lowest / 12 - 1,
    };
    for delta in 0..12 {
        let candidate = lowest - delta;
        let pc = candidate.rem_euclid(12);
        if let Some(letter) = Letter::ALL.iter().find(|l| l.pitch_class() == pc) {
            anchor = MainOctaveStart {
                letter: *letter,
                octave: candidate.div_euclid(12) - 1,
            };
            break;
        }
    }
    let mut notes = Vec::with_capacity(pairs.len());
    let mut prev_qp: Option<i32> = None;
    for (&(midi, duration), &(_, bend, _)) in pairs.iter().zip(triples) {
        let name = note_name_from_midi(midi, bend, anchor)?;
        let qp = 2 * midi + i32::from(bend == MICROTONE_BEND);
        notes.push(Note {
            name,
            midi,
            bend,
            duration,
            interval_qt: prev_qp.map_or(0, |p| qp - p),
        });
        prev_qp = Some(qp);
    }
    Ok(Tune::new("import", notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::daramad_opening;
    use crate::corpus::{Accidental, Letter, Note, NoteName};

    fn triples(t: &Tune) -> Vec<(i32, i32, u8)> {
        t.notes
            .iter()
            .map(|n| (n.midi, n.bend, n.duration))
            .collect()
    }

    #[test]
    fn plain_note_gets_center_bend_event() {
        let t = daramad_opening();
        let bytes = export_midi(&t, &MidiConfig::default());
        assert_eq!(&bytes[..4], b"MThd");
        // First bend event after the track header: 0xE0, lsb 0, msb 64
        // (center 8192). Skip the file header, which contains 0x01E0
        // (tpq 480).
        let body = &bytes[22..];
        let pos = 22 + body.iter().position(|&b| b == 0xe0).unwrap();
        assert_eq!(&bytes[pos..pos + 3], &[0xe0, 0x00, 0x40]);
    }

    #[test]
    fn microtone_carries_center_plus_2048() {
        let name = NoteName::new(Letter::E, Accidental::Koron, 0);
        let note = Note {
            name,
            midi: 63,
            bend: 2048,
            duration: 4,
            interval_qt: 0,
        };
        let t = Tune::new("ek", vec![note]);
        let bytes = export_midi(&t, &MidiConfig::default());
        let pos = 22 + bytes[22..].iter().position(|&b| b == 0xe0).unwrap();
        let wheel = i32::from(bytes[pos + 1]) | (i32::from(bytes[pos + 2]) << 7);
        assert_eq!(wheel, 8192 + 2048);
        // Quarter note at 480 tpq: 480 ticks between on and off.
        let import = import_midi(&bytes).unwrap();
        assert_eq!(triples(&import.tune), vec![(63, 2048, 4)]);
    }

    #[test]
    fn export_import_round_trip() {
        let t = daramad_opening();
        let bytes = export_midi(&t, &MidiConfig::default());
        let import = import_midi(&bytes).unwrap();
        assert_eq!(triples(&import.tune), triples(&t));
        assert_eq!(import.bend_convention, BendConvention::CenterOffset);
        assert!(import.warnings.is_empty());
    }

    #[test]
    fn polyphony_is_rejected() {
        // Hand-built track with two simultaneous note-ons.
        let mut track: Vec<u8> = Vec::new();
        for key in [60u8, 64] {
            track.extend_from_slice(&[0x00, 0x90, key, 0x60]);
        }
        for key in [60u8, 64] {
            track.extend_from_slice(&[0x60, 0x80, key, 0x40]);
        }
        track.extend_from_slice(&[0x00, 0xff, 0x2f, 0x00]);
        let mut bytes: Vec<u8> = Vec::new();
        bytes.extend_from_slice(b"MThd");
        bytes.extend_from_slice(&6u32.to_be_bytes());
        bytes.extend_from_slice(&0u16.to_be_bytes());
        bytes.extend_from_slice(&1u16.to_be_bytes());
        bytes.extend_from_slice(&480u16.to_be_bytes());
        bytes.extend_from_slice(b"MTrk");
        bytes.extend_from_slice(&(track.len() as u32).to_be_bytes());
        bytes.extend_from_slice(&track);
        assert!(matches!(import_midi(&bytes), Err(MidiError::Polyphony)));
    }

    #[test]
    fn absolute_bend_convention_detected() {
        let t = daramad_opening();
        let mut bytes = export_midi(&t, &MidiConfig::default());
        // Rewrite every bend event to the absolute convention (0 / 2048).
        let mut i = 0;
        while i + 2 < bytes.len() {
            if bytes[i] == 0xe0 && bytes[i + 2] == 0x40 {
                bytes[i + 1] = 0;
                bytes[i + 2] = 0;
                i += 3;
            } else {
                i += 1;
            }
        }
        let import = import_midi(&bytes).unwrap();
        assert_eq!(import.bend_convention, BendConvention::Absolute);
        assert_eq!(triples(&import.tune), triples(&t));
    }

    #[test]
    fn total_tick_length_matches_duration_classes() {
        let t = daramad_opening();
        let bytes = export_midi(&t, &MidiConfig::default());
        let import = import_midi(&bytes).unwrap();
        let expected: Vec<u8> = t.notes.iter().map(|n| n.duration).collect();
        let got: Vec<u8> = import.tune.notes.iter().map(|n| n.duration).collect();
        assert_eq!(got, expected);
    }
}
