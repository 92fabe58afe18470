//! Symbolic note names, accidentals, and the mapping to MIDI numbers with
//! quarter-tone pitch bend.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Pitch-bend offset (in 14-bit units above center) that marks a
/// quarter-tone note.
pub const MICROTONE_BEND: i32 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Accidental {
    Natural,
    Flat,
    /// Quarter tone below the natural; MIDI number of the flattened
    /// natural, bend 2048.
    Koron,
    /// Quarter tone above the natural; MIDI number of the natural,
    /// bend 2048.
    Sori,
    Sharp,
}

impl Accidental {
    pub fn is_microtonal(self) -> bool {
        matches!(self, Accidental::Koron | Accidental::Sori)
    }

    /// Shift applied to the natural's MIDI number.
    fn semitone_shift(self) -> i32 {
        match self {
            Accidental::Flat | Accidental::Koron => -1,
            Accidental::Sharp => 1,
            Accidental::Natural | Accidental::Sori => 0,
        }
    }

    /// Bend carried by notes with this accidental.
    pub fn bend(self) -> i32 {
        if self.is_microtonal() {
            MICROTONE_BEND
        } else {
            0
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Accidental::Natural => "",
            Accidental::Flat => "b",
            Accidental::Koron => "k",
            Accidental::Sori => "s",
            Accidental::Sharp => "#",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Letter {
    pub const ALL: [Letter; 7] = [
        Letter::C,
        Letter::D,
        Letter::E,
        Letter::F,
        Letter::G,
        Letter::A,
        Letter::B,
    ];

    /// Semitones above C.
    pub fn pitch_class(self) -> i32 {
        match self {
            Letter::C => 0,
            Letter::D => 2,
            Letter::E => 4,
            Letter::F => 5,
            Letter::G => 7,
            Letter::A => 9,
            Letter::B => 11,
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        Some(match c {
            'C' => Letter::C,
            'D' => Letter::D,
            'E' => Letter::E,
            'F' => Letter::F,
            'G' => Letter::G,
            'A' => Letter::A,
            'B' => Letter::B,
            _ => return None,
        })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A note name relative to the main octave: letter, accidental, and a
/// signed octave offset (`0` = main octave, `+n`/`-n` above/below).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoteName {
    pub letter: Letter,
    pub accidental: Accidental,
    pub octave_offset: i32,
}

impl NoteName {
    pub fn new(letter: Letter, accidental: Accidental, octave_offset: i32) -> Self {
        NoteName {
            letter,
            accidental,
            octave_offset,
        }
    }

    /// Parses names of the form `F`, `Ab`, `Ak+1`, `Bb-1`.
    pub fn parse(s: &str) -> Result<NoteName, CorpusError> {
        let bad = || CorpusError::BadNoteName(s.to_string());
        let mut chars = s.chars();
        let letter = chars.next().and_then(Letter::from_char).ok_or_else(bad)?;
        let rest: &str = chars.as_str();
        let (accidental, rest) = match rest.chars().next() {
            Some('b') => (Accidental::Flat, &rest[1..]),
            Some('k') => (Accidental::Koron, &rest[1..]),
            Some('s') => (Accidental::Sori, &rest[1..]),
            Some('#') => (Accidental::Sharp, &rest[1..]),
            _ => (Accidental::Natural, rest),
        };
        let octave_offset = if rest.is_empty() {
            0
        } else {
            match rest.chars().next() {
                Some('+') => rest[1..].parse::<i32>().map_err(|_| bad())?,
                Some('-') => -rest[1..].parse::<i32>().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        };
        Ok(NoteName {
            letter,
            accidental,
            octave_offset,
        })
    }

    pub fn render(&self) -> String {
        let mut s = format!("{}{}", self.letter, self.accidental.suffix());
        if self.octave_offset > 0 {
            s.push_str(&format!("+{}", self.octave_offset));
        } else if self.octave_offset < 0 {
            s.push_str(&format!("{}", self.octave_offset));
        }
        s
    }
}

impl fmt::Display for NoteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// An absolute register anchor: the lowest note of the corpus's first
/// tune, e.g. `F3` (MIDI 53, with C4 = 60).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainOctaveStart {
    pub letter: Letter,
    pub octave: i32,
}

impl MainOctaveStart {
    /// Parses scientific pitch notation restricted to naturals, e.g. `F3`.
    pub fn parse(s: &str) -> Result<MainOctaveStart, CorpusError> {
        let bad = || CorpusError::BadNoteName(s.to_string());
        let mut chars = s.chars();
        let letter = chars.next().and_then(Letter::from_char).ok_or_else(bad)?;
        let octave = chars.as_str().parse::<i32>().map_err(|_| bad())?;
        Ok(MainOctaveStart { letter, octave })
    }

    pub fn render(&self) -> String {
        format!("{}{}", self.letter, self.octave)
    }

    /// MIDI number of the anchor (C4 = 60).
    pub fn midi(&self) -> i32 {
        (self.octave + 1) * 12 + self.letter.pitch_class()
    }
}

/// Maps a relative note name to `(midi, bend)` given the main-octave
/// anchor: the name's natural lands inside `[start, start + 12)` shifted
/// by whole octaves per the offset, then the accidental is applied.
pub fn note_name_to_midi(name: &NoteName, main_octave_start: MainOctaveStart) -> (i32, i32) {
    let start = main_octave_start.midi();
    let pc = name.letter.pitch_class();
    let natural_in_main = start + (pc - start).rem_euclid(12);
    let natural = natural_in_main + 12 * name.octave_offset;
    (
        natural + name.accidental.semitone_shift(),
        name.accidental.bend(),
    )
}

/// Inverse of [`note_name_to_midi`]: spells `(midi, bend)` as a relative
/// name using the 18-member playable scale (naturals/flats for plain
/// notes, koron/sori for bent ones).
pub fn note_name_from_midi(
    midi: i32,
    bend: i32,
    main_octave_start: MainOctaveStart,
) -> Result<NoteName, CorpusError> {
    let qpc = (2 * midi.rem_euclid(12) + if bend == MICROTONE_BEND { 1 } else { 0 }) % 24;
    let (letter, accidental) =
        spell_quarter_pitch_class(qpc).ok_or(CorpusError::UnspellablePitch { midi, bend })?;
    let natural = midi - accidental.semitone_shift();
    let start = main_octave_start.midi();
    let octave_offset = (natural - start).div_euclid(12);
    Ok(NoteName {
        letter,
        accidental,
        octave_offset,
    })
}

/// The 18 playable pitch classes of the quarter-tone chromatic scale,
/// with their positions in quarter tones above C.
pub const PLAYABLE_SCALE: [(&str, u8); 18] = [
    ("C", 0),
    ("Db", 2),
    ("Dk", 3),
    ("D", 4),
    ("Eb", 6),
    ("Ek", 7),
    ("E", 8),
    ("F", 10),
    ("Fs", 11),
    ("F#", 12),
    ("Gk", 13),
    ("G", 14),
    ("Ab", 16),
    ("Ak", 17),
    ("A", 18),
    ("Bb", 20),
    ("Bk", 21),
    ("B", 22),
];

/// Quarter-tone gaps between adjacent playable pitch classes as listed in
/// the dataset description; the wrap from B back to C adds 2, closing the
/// octave at 24.
pub const PLAYABLE_SCALE_GAPS: [u8; 17] = [2, 1, 1, 2, 1, 1, 2, 1, 1, 1, 1, 2, 1, 1, 2, 1, 1];

fn spell_quarter_pitch_class(qpc: i32) -> Option<(Letter, Accidental)> {
    for (name, pos) in PLAYABLE_SCALE {
        if i32::from(pos) == qpc {
            return Some(name_to_parts(name));
        }
    }
    // Pitch classes outside the playable 18 (e.g. C#): spell sharps for
    // semitones, sori for remaining quarter tones.
    let semi = qpc / 2;
    if qpc % 2 == 0 {
        for letter in Letter::ALL {
            if letter.pitch_class() == semi - 1 {
                return Some((letter, Accidental::Sharp));
            }
        }
        None
    } else {
        for letter in Letter::ALL {
            if letter.pitch_class() == semi {
                return Some((letter, Accidental::Sori));
            }
        }
        None
    }
}

fn name_to_parts(name: &str) -> (Letter, Accidental) {
    let mut chars = name.chars();
    let letter = Letter::from_char(chars.next().unwrap()).unwrap();
    let accidental = match chars.next() {
        Some('b') => Accidental::Flat,
        Some('k') => Accidental::Koron,
        Some('s') => Accidental::Sori,
        Some('#') => Accidental::Sharp,
        _ => Accidental::Natural,
    };
    (letter, accidental)
}

#[cfg(test)]
mod tests {
    use super::*;

    const F3: MainOctaveStart = MainOctaveStart {
        letter: Letter::F,
        octave: 3,
    };

    #[test]
    fn main_octave_anchor_midi() {
        assert_eq!(F3.midi(), 53);
        assert_eq!(MainOctaveStart::parse("F3").unwrap(), F3);
    }

    #[test]
    fn f_natural_in_main_octave() {
        let name = NoteName::parse("F").unwrap();
        assert_eq!(note_name_to_midi(&name, F3), (53, 0));
    }

    #[test]
    fn koron_one_octave_up() {
        // A koron one octave above the main octave: flat of A5 with bend.
        let name = NoteName::parse("Ak+1").unwrap();
        assert_eq!(note_name_to_midi(&name, F3), (68, MICROTONE_BEND));
    }

    #[test]
    fn sori_keeps_natural_midi() {
        let name = NoteName::parse("Fs").unwrap();
        assert_eq!(note_name_to_midi(&name, F3), (53, MICROTONE_BEND));
    }

    #[test]
    fn all_scale_members_round_trip() {
        // Brute-force check across the 18 playable classes and 3 octaves.
        for (text, _) in PLAYABLE_SCALE {
            for offset in [-1, 0, 1] {
                let base = NoteName::parse(text).unwrap();
                let name = NoteName {
                    octave_offset: offset,
                    ..base
                };
                let (midi, bend) = note_name_to_midi(&name, F3);
                let back = note_name_from_midi(midi, bend, F3).unwrap();
                assert_eq!(back, name, "{text}{offset:+}");
            }
        }
    }

    #[test]
    fn scale_gap_list_sums_to_22_and_closes_octave() {
        let sum: u32 = PLAYABLE_SCALE_GAPS.iter().map(|&g| u32::from(g)).sum();
        assert_eq!(sum, 22);
        let diffs: Vec<u8> = PLAYABLE_SCALE
            .windows(2)
            .map(|pair| pair[1].1 - pair[0].1)
            .collect();
        assert_eq!(diffs, PLAYABLE_SCALE_GAPS);
        let b_to_c = 24 - i32::from(PLAYABLE_SCALE[17].1);
        assert_eq!(b_to_c, 2);
    }

    #[test]
    fn name_parse_render_round_trip() {
        for s in ["C", "Db", "Dk+1", "Fs-2", "G#+3", "Bb", "A-1"] {
            let name = NoteName::parse(s).unwrap();
            assert_eq!(name.render(), s);
        }
    }

    #[test]
    fn bad_note_names_rejected() {
        for s in ["", "H", "Cx", "C+", "C1", "Ck+"] {
            assert!(NoteName::parse(s).is_err(), "{s}");
        }
    }
}
