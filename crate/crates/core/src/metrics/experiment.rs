//! Batch mutation experiments and the concatenated-corpus analysis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Tune;
use crate::grammar::induce;
use crate::metrics::edit_distance;
use crate::mutation::{mutate, pipeline::DURATION_FALLBACK};
use crate::representation::{
    anchor_for, build_modal_framework, from_tokens, to_tokens, SetupConfig,
};

pub const METRICS_CSV_HEADER: &str = "tune,setup,seed,step,length,ed,pai,pai_over_length,ed_norm";

/// Metrics for one mutation step, measured against the original tune.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepMetrics {
    pub step: usize,
    /// Note count of the reconstructed tune.
    pub length: usize,
    pub ed: usize,
    pub pai: usize,
    pub pai_over_length: f64,
    pub ed_normalized: f64,
}

/// One (tune, setup) pipeline of `n` successive mutations.
#[derive(Debug, Clone)]
pub struct ExperimentCell {
    pub tune_id: String,
    pub setup_name: String,
    pub seed: u64,
    /// `n + 1` rows (step 0 included), or the failure message.
    pub outcome: Result<Vec<StepMetrics>, String>,
}

/// Derives a per-cell seed so parallel execution order never changes
/// results. FNV-1a over the cell key, folded into the master seed.
fn cell_seed(master: u64, tune_id: &str, setup_name: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in tune_id.bytes().chain(*b"|").chain(setup_name.bytes()) {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    master ^ hash
}

fn run_cell(
    tune: &Tune,
    setup_name: &str,
    cfg: &SetupConfig,
    n: usize,
    seed: u64,
) -> ExperimentCell {
    let outcome = (|| -> Result<Vec<StepMetrics>, String> {
        let original = tune.midi_durations();
        let tokens = to_tokens(tune, cfg);
        let fw = build_modal_framework(tune);
        let anchor = anchor_for(tune, cfg);
        let mut grammar = induce(&tokens).map_err(|e| e.to_string())?;
        let mut rows = Vec::with_capacity(n + 1);
        rows.push(step_row(0, &original, &original, grammar.pai()));
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        for step in 1..=n {
            let step_seed: u64 = master.gen();
            let (next, _) = mutate(&grammar, None, step_seed, step).map_err(|e| e.to_string())?;
            grammar = next;
            let expanded = grammar.expand().map_err(|e| e.to_string())?;
            let pairs = from_tokens(&expanded, cfg, anchor, &fw, DURATION_FALLBACK)
                .map_err(|e| e.to_string())?;
            rows.push(step_row(step, &pairs, &original, grammar.pai()));
        }
        Ok(rows)
    })();
    ExperimentCell {
        tune_id: tune.id.clone(),
        setup_name: setup_name.to_string(),
        seed,
        outcome,
    }
}

fn step_row(step: usize, current: &[(i32, u8)], original: &[(i32, u8)], pai: usize) -> StepMetrics {
    let ed = edit_distance(current, original);
    let length = current.len();
    let max_len = length.max(original.len()).max(1);
    StepMetrics {
        step,
        length,
        ed,
        pai,
        pai_over_length: pai as f64 / length.max(1) as f64,
        ed_normalized: ed as f64 / max_len as f64,
    }
}

/// Runs `n` successive mutations for every (tune, setup) pair. Cells fail
/// independently; one bad cell never aborts the rest.
pub fn run_experiment(
    corpus: &[Tune],
    setups: &[(String, SetupConfig)],
    n: usize,
    seed: u64,
) -> Vec<ExperimentCell> {
    let cells: Vec<(usize, &Tune, &(String, SetupConfig))> = corpus
        .iter()
        .flat_map(|t| setups.iter().map(move |s| (t, s)))
        .enumerate()
        .map(|(i, (t, s))| (i, t, s))
        .collect();
    let mut results: Vec<(usize, ExperimentCell)> = cells
        .par_iter()
        .map(|&(i, tune, (name, cfg))| {
            let cell = run_cell(tune, name, cfg, n, cell_seed(seed, &tune.id, name));
            (i, cell)
        })
        .collect();
    results.sort_by_key(|&(i, _)| i);
    results.into_iter().map(|(_, c)| c).collect()
}

/// Writes cells (plus per-setup mean rows, `tune = "MEAN"`) in canonical
/// order: sorted by tune, setup, step, with MEAN rows last per setup.
pub fn write_metrics_csv(
    cells: &[ExperimentCell],
    mut out: impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(out, "{METRICS_CSV_HEADER}")?;
    let mut sorted: Vec<&ExperimentCell> = cells.iter().collect();
    sorted.sort_by(|a, b| (&a.tune_id, &a.setup_name).cmp(&(&b.tune_id, &b.setup_name)));
    for cell in &sorted {
        if let Ok(rows) = &cell.outcome {
            for row in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{:.6},{:.6}",
                    cell.tune_id,
                    cell.setup_name,
                    cell.seed,
                    row.step,
                    row.length,
                    row.ed,
                    row.pai,
                    row.pai_over_length,
                    row.ed_normalized
                )?;
            }
        }
    }
    for (setup, rows) in mean_rows(cells) {
        for row in rows {
            writeln!(
                out,
                "MEAN,{},0,{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                setup,
                row.step,
                row.length,
                row.ed,
                row.pai,
                row.pai_over_length,
                row.ed_normalized
            )?;
        }
    }
    Ok(())
}

/// Per-setup means across tunes at each step (the "thick line").
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRow {
    pub step: usize,
    pub length: f64,
    pub ed: f64,
    pub pai: f64,
    pub pai_over_length: f64,
    pub ed_normalized: f64,
}

pub fn mean_rows(cells: &[ExperimentCell]) -> Vec<(String, Vec<MeanRow>)> {
    use std::collections::BTreeMap;
    let mut by_setup: BTreeMap<&str, Vec<&Vec<StepMetrics>>> = BTreeMap::new();
    for cell in cells {
        if let Ok(rows) = &cell.outcome {
            by_setup.entry(&cell.setup_name).or_default().push(rows);
        }
    }
    let mut out = Vec::new();
    for (setup, runs) in by_setup {
        let steps = runs.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut means = Vec::with_capacity(steps);
        for step in 0..steps {
            let rows: Vec<&StepMetrics> = runs.iter().filter_map(|r| r.get(step)).collect();
            let count = rows.len() as f64;
            means.push(MeanRow {
                step,
                length: rows.iter().map(|r| r.length as f64).sum::<f64>() / count,
                ed: rows.iter().map(|r| r.ed as f64).sum::<f64>() / count,
                pai: rows.iter().map(|r| r.pai as f64).sum::<f64>() / count,
                pai_over_length: rows.iter().map(|r| r.pai_over_length).sum::<f64>() / count,
                ed_normalized: rows.iter().map(|r| r.ed_normalized).sum::<f64>() / count,
            });
        }
        out.push((setup.to_string(), means));
    }
    out
}

/// Compares the compressed size of the concatenated corpus against the
/// sum of individually compressed tunes: `(pai_concat, pai_sum)`.
pub fn concat_analysis(corpus: &[Tune], cfg: &SetupConfig) -> (usize, usize) {
    let token_lists: Vec<_> = corpus.iter().map(|t| to_tokens(t, cfg)).collect();
    let pai_sum = token_lists
        .iter()
        .filter(|l| !l.is_empty())
        .map(|l| induce(l).expect("non-empty").pai())
        .sum();
    let concatenated: Vec<_> = token_lists.into_iter().flatten().collect();
    let pai_concat = if concatenated.is_empty() {
        0
    } else {
        induce(&concatenated).expect("non-empty").pai()
    };
    (pai_concat, pai_sum)
}
