//! Conversion between tunes and algorithm-level token sequences across
//! the representation axes: pitch/interval, chromatic/diatonic,
//! forward/backward, integer/tuple.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Tune;
use crate::mutation::repair::{repair_degree, repair_pitch_chromatic, RepairStrategy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RepresentationError {
    #[error("interval representation requires an anchor pitch")]
    MissingAnchor,
    #[error("anchor pitch {0} is not in the modal framework")]
    AnchorOutsideFramework(i32),
    #[error("setup invalid: {0}")]
    InvalidSetup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Pitch,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Chromatic,
    Diatonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Integer,
    Tuple,
}

/// One point in the representation/generation option space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupConfig {
    pub basis: Basis,
    pub scale: Scale,
    pub direction: Direction,
    pub shape: Shape,
    pub repair: RepairStrategy,
}

impl SetupConfig {
    pub fn new(
        basis: Basis,
        scale: Scale,
        direction: Direction,
        shape: Shape,
        repair: RepairStrategy,
    ) -> Result<Self, RepresentationError> {
        if repair == RepairStrategy::None && basis != Basis::Pitch {
            return Err(RepresentationError::InvalidSetup(
                "interval setups require a repair strategy".into(),
            ));
        }
        if scale == Scale::Diatonic && basis != Basis::Interval {
            return Err(RepresentationError::InvalidSetup(
                "diatonic scale is only used with the interval basis".into(),
            ));
        }
        Ok(SetupConfig {
            basis,
            scale,
            direction,
            shape,
            repair,
        })
    }

    /// The five named experiment setups.
    pub fn named(name: &str) -> Option<SetupConfig> {
        use Basis::*;
        use Direction::*;
        use Scale::*;
        use Shape::*;
        let cfg = match name {
            "setup_1" => SetupConfig::new(Pitch, Chromatic, Forward, Tuple, RepairStrategy::None),
            "setup_2" => {
                SetupConfig::new(Interval, Chromatic, Forward, Tuple, RepairStrategy::Clamp)
            }
            "setup_3" => {
                SetupConfig::new(Interval, Chromatic, Backward, Tuple, RepairStrategy::Clamp)
            }
            "setup_4" => {
                SetupConfig::new(Interval, Diatonic, Backward, Tuple, RepairStrategy::Clamp)
            }
            "setup_5" => {
                SetupConfig::new(Interval, Diatonic, Backward, Tuple, RepairStrategy::Mirror)
            }
            _ => return None,
        };
        Some(cfg.expect("built-in setups are valid"))
    }

    pub const SETUP_NAMES: [&'static str; 5] =
        ["setup_1", "setup_2", "setup_3", "setup_4", "setup_5"];
}

/// Algorithm-level unit: a MIDI pitch or an interval step, with the
/// duration class attached in tuple shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token {
    pub value: i32,
    pub duration: Option<u8>,
}

impl Token {
    pub fn tuple(value: i32, duration: u8) -> Token {
        Token {
            value,
            duration: Some(duration),
        }
    }

    pub fn bare(value: i32) -> Token {
        Token {
            value,
            duration: None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.duration {
            Some(d) => write!(f, "({},{})", self.value, d),
            None => write!(f, "{}", self.value),
        }
    }
}

/// The ordered set of distinct pitches used in a tune, with 1-based
/// degree numbering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModalFramework {
    pitches: Vec<i32>,
    degree_of: BTreeMap<i32, usize>,
}

impl ModalFramework {
    pub fn from_pitches(mut pitches: Vec<i32>) -> ModalFramework {
        pitches.sort_unstable();
        pitches.dedup();
        let degree_of = pitches
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i + 1))
            .collect();
        ModalFramework { pitches, degree_of }
    }

    pub fn pitches(&self) -> &[i32] {
        &self.pitches
    }

    pub fn len(&self) -> usize {
        self.pitches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pitches.is_empty()
    }

    /// 1-based degree of a member pitch.
    pub fn degree_of(&self, pitch: i32) -> Option<usize> {
        self.degree_of.get(&pitch).copied()
    }

    /// Pitch at a 1-based degree.
    pub fn pitch_at(&self, degree: usize) -> Option<i32> {
        self.pitches.get(degree.checked_sub(1)?).copied()
    }

    pub fn contains(&self, pitch: i32) -> bool {
        self.degree_of.contains_key(&pitch)
    }
}

/// Builds the modal framework from a tune's distinct MIDI pitches.
pub fn build_modal_framework(t: &Tune) -> ModalFramework {
    ModalFramework::from_pitches(t.notes.iter().map(|n| n.midi).collect())
}

/// Converts a tune to tokens under a setup. Backward setups reverse the
/// note order before conversion; the first interval token is always 0.
pub fn to_tokens(t: &Tune, cfg: &SetupConfig) -> Vec<Token> {
    let fw = build_modal_framework(t);
    let mut pairs = t.midi_durations();
    if cfg.direction == Direction::Backward {
        pairs.reverse();
    }
    let mut out = Vec::with_capacity(pairs.len());
    let mut prev: Option<i32> = None;
    for (midi, duration) in pairs {
        let value = match cfg.basis {
            Basis::Pitch => midi,
            Basis::Interval => match prev {
                None => 0,
                Some(p) => match cfg.scale {
                    Scale::Chromatic => midi - p,
                    Scale::Diatonic => {
                        let d = fw.degree_of(midi).expect("tune pitch in framework") as i32;
                        let dp = fw.degree_of(p).expect("tune pitch in framework") as i32;
                        d - dp
                    }
                },
            },
        };
        prev = Some(midi);
        out.push(match cfg.shape {
            Shape::Tuple => Token::tuple(value, duration),
            Shape::Integer => Token::bare(value),
        });
    }
    out
}

/// Reconstructs a `(midi, duration)` note list from tokens.
///
/// In the interval basis the anchor pitch stands in for the sequence's
/// first note (the first token's interval is the positional 0 marker and
/// is not applied); each later interval steps from the previous repaired
/// pitch, and the configured repair pulls out-of-framework values back in.
/// Backward setups re-reverse the result so it plays forward.
pub fn from_tokens(
    tokens: &[Token],
    cfg: &SetupConfig,
    anchor: Option<i32>,
    fw: &ModalFramework,
    durations_fallback: u8,
) -> Result<Vec<(i32, u8)>, RepresentationError> {
    let mut out: Vec<(i32, u8)> = Vec::with_capacity(tokens.len());
    match cfg.basis {
        Basis::Pitch => {
            for token in tokens {
                let midi = match cfg.repair {
                    RepairStrategy::None => token.value,
                    _ => repair_value(token.value, cfg, fw),
                };
                out.push((midi, token.duration.unwrap_or(durations_fallback)));
            }
        }
        Basis::Interval => {
            let anchor = anchor.ok_or(RepresentationError::MissingAnchor)?;
            match cfg.scale {
                Scale::Chromatic => {
                    let mut current = anchor;
                    for (i, token) in tokens.iter().enumerate() {
                        if i > 0 {
                            current = repair_value(current + token.value, cfg, fw);
                        }
                        out.push((current, token.duration.unwrap_or(durations_fallback)));
                    }
                }
                Scale::Diatonic => {
                    let mut degree = fw
                        .degree_of(anchor)
                        .ok_or(RepresentationError::AnchorOutsideFramework(anchor))?
                        as i32;
                    for (i, token) in tokens.iter().enumerate() {
                        if i > 0 {
                            degree = repair_degree(degree + token.value, fw, cfg.repair);
                        }
                        let midi = fw
                            .pitch_at(degree as usize)
                            .expect("repaired degree within framework");
                        out.push((midi, token.duration.unwrap_or(durations_fallback)));
                    }
                }
            }
        }
    }
    if cfg.direction == Direction::Backward {
        out.reverse();
    }
    Ok(out)
}

/// Chromatic-level repair of a raw pitch.
fn repair_value(pitch: i32, cfg: &SetupConfig, fw: &ModalFramework) -> i32 {
    repair_pitch_chromatic(pitch, fw, cfg.repair)
}

/// The anchor pitch a setup needs for reconstruction: the original first
/// pitch for forward setups, the original last pitch for backward ones.
pub fn anchor_for(t: &Tune, cfg: &SetupConfig) -> Option<i32> {
    match cfg.direction {
        Direction::Forward => t.notes.first().map(|n| n.midi),
        Direction::Backward => t.notes.last().map(|n| n.midi),
    }
}
