//! End-to-end variation generation: tokenize, induce, mutate n times,
//! expand, and reconstruct with anchored repair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{CorpusError, Tune};
use crate::grammar::{induce, GrammarError};
use crate::representation::{
    anchor_for, build_modal_framework, from_tokens, to_tokens, RepresentationError, SetupConfig,
    Token,
};

use super::{mutate, MutationError, MutationRecord};

#[derive(Debug, Error)]
pub enum VariationError {
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Default duration class restored when the integer shape dropped
/// durations.
pub const DURATION_FALLBACK: u8 = 2;

/// Generates a variation of `t` by applying `n_mutations` random grammar
/// mutations under `cfg`. Deterministic for a fixed `(tune, cfg, n, seed)`.
pub fn generate_variation(
    t: &Tune,
    cfg: &SetupConfig,
    n_mutations: usize,
    seed: u64,
) -> Result<(Tune, Vec<MutationRecord<Token>>), VariationError> {
    let tokens = to_tokens(t, cfg);
    let fw = build_modal_framework(t);
    let anchor = anchor_for(t, cfg);

    let mut grammar = induce(&tokens)?;
    let mut records = Vec::with_capacity(n_mutations);
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for step in 1..=n_mutations {
        let step_seed: u64 = master.gen();
        let (next, record) = mutate(&grammar, None, step_seed, step)?;
        grammar = next;
        records.push(record);
    }

    let expanded = grammar.expand()?;
    let pairs = from_tokens(&expanded, cfg, anchor, &fw, DURATION_FALLBACK)?;
    let variant = t.with_midi_durations(format!("{}-var", t.id), &pairs)?;
    Ok((variant, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::daramad_opening;
    use crate::representation::build_modal_framework;

    #[test]
    fn zero_mutations_is_identity() {
        let t = daramad_opening();
        for name in SetupConfig::SETUP_NAMES {
            let cfg = SetupConfig::named(name).unwrap();
            let (variant, records) = generate_variation(&t, &cfg, 0, 9).unwrap();
            assert!(records.is_empty());
            assert_eq!(variant.midi_durations(), t.midi_durations(), "{name}");
        }
    }

    #[test]
    fn backward_clamp_preserves_final_pitch_and_framework() {
        let t = daramad_opening();
        let cfg = SetupConfig::named("setup_4").unwrap();
        let fw = build_modal_framework(&t);
        let (variant, records) = generate_variation(&t, &cfg, 5, 42).unwrap();
        assert_eq!(records.len(), 5);
        assert_eq!(variant.notes.last().unwrap().midi, 55);
        for note in &variant.notes {
            assert!(fw.contains(note.midi), "pitch {} escaped", note.midi);
        }
    }

    #[test]
    fn variation_is_deterministic() {
        let t = daramad_opening();
        let cfg = SetupConfig::named("setup_3").unwrap();
        let (a, ra) = generate_variation(&t, &cfg, 10, 7).unwrap();
        let (b, rb) = generate_variation(&t, &cfg, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn mutated_variant_usually_differs() {
        let t = daramad_opening();
        let cfg = SetupConfig::named("setup_1").unwrap();
        let mut changed = 0;
        for seed in 0..10 {
            let (variant, _) = generate_variation(&t, &cfg, 8, seed).unwrap();
            if variant.midi_durations() != t.midi_durations() {
                changed += 1;
            }
        }
        assert!(changed >= 8, "only {changed}/10 variants changed");
    }
}
