//! Experiment metrics: Levenshtein edit distance, per-step statistics
//! over mutation chains, and the concatenated-corpus compression
//! analysis.

mod experiment;

pub use experiment::{
    concat_analysis, run_experiment, write_metrics_csv, ExperimentCell, StepMetrics,
    METRICS_CSV_HEADER,
};

/// Levenshtein distance with unit insert/delete/substitute costs over
/// whole-element equality.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0; b.len() + 1];
    for (i, item_a) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, item_b) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(item_a != item_b);
            current[j + 1] = substitution.min(prev[j + 1] + 1).min(current[j] + 1);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}
