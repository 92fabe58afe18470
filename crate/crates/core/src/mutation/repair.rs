//! Clamp and mirror repair of out-of-framework pitches and degrees.

use serde::{Deserialize, Serialize};

use crate::representation::ModalFramework;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairStrategy {
    None,
    Clamp,
    Mirror,
}

/// Clamps a raw chromatic pitch to the closest framework member; ties
/// resolve to the lower pitch.
pub fn repair_clamp_chromatic(pitch: i32, fw: &ModalFramework) -> i32 {
    debug_assert!(!fw.is_empty());
    let mut best = fw.pitches()[0];
    let mut best_dist = (pitch - best).abs();
    for &p in &fw.pitches()[1..] {
        let dist = (pitch - p).abs();
        if dist < best_dist {
            best = p;
            best_dist = dist;
        }
    }
    best
}

/// Clamps a raw 1-based degree into `[1, |fw|]`.
pub fn repair_clamp_degree(degree: i32, fw: &ModalFramework) -> i32 {
    degree.clamp(1, fw.len() as i32)
}

/// Reflects an out-of-range degree back inside `[1, |fw|]` at the violated
/// boundary, iterating until it lands in range. In-range input is returned
/// unchanged.
pub fn repair_mirror_degree(mut degree: i32, fw: &ModalFramework) -> i32 {
    let top = fw.len() as i32;
    if top == 1 {
        return 1;
    }
    loop {
        if degree > top {
            degree = 2 * top - degree;
        } else if degree < 1 {
            degree = 2 - degree;
        } else {
            return degree;
        }
    }
}

/// Applies a strategy at the degree level.
pub fn repair_degree(degree: i32, fw: &ModalFramework, strategy: RepairStrategy) -> i32 {
    match strategy {
        RepairStrategy::None => degree,
        RepairStrategy::Clamp => repair_clamp_degree(degree, fw),
        RepairStrategy::Mirror => repair_mirror_degree(degree, fw),
    }
}

/// Applies a strategy to a raw chromatic pitch. Mirror reflects at the
/// framework's pitch boundaries, then snaps to the closest member so the
/// result is always inside the framework.
pub fn repair_pitch_chromatic(pitch: i32, fw: &ModalFramework, strategy: RepairStrategy) -> i32 {
    match strategy {
        RepairStrategy::None => pitch,
        RepairStrategy::Clamp => repair_clamp_chromatic(pitch, fw),
        RepairStrategy::Mirror => {
            let lo = fw.pitches()[0];
            let hi = *fw.pitches().last().expect("non-empty framework");
            let mut p = pitch;
            if hi > lo {
                loop {
                    if p > hi {
                        p = 2 * hi - p;
                    } else if p < lo {
                        p = 2 * lo - p;
                    } else {
                        break;
                    }
                }
            }
            repair_clamp_chromatic(p, fw)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fw() -> ModalFramework {
        ModalFramework::from_pitches(vec![53, 55, 56, 58, 60])
    }

    #[test]
    fn clamp_below_range() {
        assert_eq!(repair_clamp_chromatic(52, &fw()), 53);
    }

    #[test]
    fn clamp_tie_prefers_lower_pitch() {
        // 57 is equidistant from 56 and 58; brute-force over members
        // confirms the tie, and the lower pitch wins.
        let f = fw();
        let dists: Vec<i32> = f.pitches().iter().map(|&p| (57 - p).abs()).collect();
        assert_eq!(dists.iter().filter(|&&d| d == 1).count(), 2);
        assert_eq!(repair_clamp_chromatic(57, &f), 56);
    }

    #[test]
    fn clamp_degree_bounds() {
        assert_eq!(repair_clamp_degree(7, &fw()), 5);
        assert_eq!(repair_clamp_degree(0, &fw()), 1);
        assert_eq!(repair_clamp_degree(3, &fw()), 3);
    }

    #[test]
    fn mirror_reflects_at_violated_boundary() {
        assert_eq!(repair_mirror_degree(6, &fw()), 4);
        assert_eq!(repair_mirror_degree(0, &fw()), 2);
        assert_eq!(repair_mirror_degree(3, &fw()), 3);
    }

    #[test]
    fn mirror_matches_brute_force_reflection_walk() {
        // Oracle: step toward the range one reflection at a time.
        fn oracle(mut d: i32, top: i32) -> i32 {
            for _ in 0..64 {
                if d > top {
                    d = top - (d - top);
                } else if d < 1 {
                    d = 1 + (1 - d);
                } else {
                    return d;
                }
            }
            panic!("no convergence");
        }
        let f = fw();
        for d in -20..=20 {
            assert_eq!(repair_mirror_degree(d, &f), oracle(d, 5), "degree {d}");
            let got = repair_mirror_degree(d, &f);
            assert!((1..=5).contains(&got));
        }
    }

    #[test]
    fn mirror_degree_six_is_pitch_58() {
        let f = fw();
        let repaired = repair_mirror_degree(6, &f);
        assert_eq!(f.pitch_at(repaired as usize), Some(58));
    }

    #[test]
    fn chromatic_mirror_lands_in_framework() {
        let f = fw();
        for p in 40..=75 {
            let got = repair_pitch_chromatic(p, &f, RepairStrategy::Mirror);
            assert!(f.contains(got), "pitch {p} -> {got}");
        }
        // Members pass through untouched.
        for &p in f.pitches() {
            assert_eq!(repair_pitch_chromatic(p, &f, RepairStrategy::Mirror), p);
        }
    }
}
