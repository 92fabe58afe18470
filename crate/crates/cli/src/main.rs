//! `gusheh`: parse quarter-tone tunes into repetition grammars, mutate
//! them into variations, and run batch experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gusheh::corpus::{load_corpus, parse_datasheet, serialize_datasheet, validate_tune, Tune};
use gusheh::grammar::induce;
use gusheh::metrics::{concat_analysis, run_experiment, write_metrics_csv};
use gusheh::midi::{export_midi, MidiConfig};
use gusheh::mutation::repair::RepairStrategy;
use gusheh::mutation::{generate_variation, write_records};
use gusheh::representation::{to_tokens, Basis, Direction, Scale, SetupConfig, Shape};

#[derive(Parser)]
#[command(
    name = "gusheh",
    version,
    about = "Grammar-based analysis and variation of quarter-tone tunes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a data sheet, induce its grammar, and print the rules and PAI
    Parse {
        /// Input data sheet (CSV)
        input: PathBuf,
        #[command(flatten)]
        setup: SetupArgs,
        /// Also write the rule topology as Graphviz DOT
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the dump to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a variation: data sheet, MIDI, and mutation log
    Variation {
        input: PathBuf,
        #[command(flatten)]
        setup: SetupArgs,
        /// Number of mutations
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (default: alongside the input)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the batch mutation experiment over a corpus and all five setups
    Experiment {
        /// Corpus directory (defaults to $GUSHEH_CORPUS_DIR)
        #[arg(long, env = "GUSHEH_CORPUS_DIR")]
        corpus: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the PAI of the concatenated corpus against the per-tune sum
    Concat {
        #[arg(long, env = "GUSHEH_CORPUS_DIR")]
        corpus: PathBuf,
        #[command(flatten)]
        setup: SetupArgs,
    },
    /// Export a data sheet as a standard MIDI file
    ExportMidi {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a data sheet for internal inconsistencies
    Validate { input: PathBuf },
    /// Write a grammar's rule topology as Graphviz DOT
    Topology {
        input: PathBuf,
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SetupArgs {
    /// Named setup (setup_1..setup_5); overrides the axis flags
    #[arg(long)]
    setup: Option<String>,
    #[arg(long, value_enum, default_value = "pitch")]
    basis: CliBasis,
    #[arg(long, value_enum, default_value = "chromatic")]
    scale: CliScale,
    #[arg(long, value_enum, default_value = "forward")]
    direction: CliDirection,
    #[arg(long, value_enum, default_value = "tuple")]
    shape: CliShape,
    #[arg(long, value_enum, default_value = "none")]
    repair: CliRepair,
}

macro_rules! cli_enum {
    ($name:ident, $target:ty, $($variant:ident => $mapped:expr),+) => {
        #[derive(Clone, Copy, clap::ValueEnum)]
        enum $name { $($variant),+ }
        impl From<$name> for $target {
            fn from(v: $name) -> $target {
                match v { $($name::$variant => $mapped),+ }
            }
        }
    };
}

cli_enum!(CliBasis, Basis, Pitch => Basis::Pitch, Interval => Basis::Interval);
cli_enum!(CliScale, Scale, Chromatic => Scale::Chromatic, Diatonic => Scale::Diatonic);
cli_enum!(CliDirection, Direction, Forward => Direction::Forward, Backward => Direction::Backward);
cli_enum!(CliShape, Shape, Integer => Shape::Integer, Tuple => Shape::Tuple);
cli_enum!(
    CliRepair, RepairStrategy,
    None => RepairStrategy::None, Clamp => RepairStrategy::Clamp, Mirror => RepairStrategy::Mirror
);

impl SetupArgs {
    fn resolve(&self) -> Result<SetupConfig, CliError> {
        if let Some(name) = &self.setup {
            return SetupConfig::named(name)
                .ok_or_else(|| CliError::pipeline(format!("unknown setup '{name}'")));
        }
        SetupConfig::new(
            self.basis.into(),
            self.scale.into(),
            self.direction.into(),
            self.shape.into(),
            self.repair.into(),
        )
        .map_err(|e| CliError::pipeline(e.to_string()))
    }
}

/// Exit code 1 for pipeline errors, 2 for I/O and format errors.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn pipeline(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn load_tune(path: &Path) -> Result<Tune, CliError> {
    let text = read_to_string(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "tune".to_string());
    parse_datasheet(&id, &text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Parse {
            input,
            setup,
            dot,
            out,
        } => {
            let tune = load_tune(&input)?;
            let cfg = setup.resolve()?;
            let tokens = to_tokens(&tune, &cfg);
            let grammar = induce(&tokens).map_err(|e| CliError::pipeline(e.to_string()))?;
            let mut text = grammar.dump();
            text.push_str(&format!("PAI: {}\n", grammar.pai()));
            match out {
                Some(path) => write_file(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
            if let Some(path) = dot {
                write_file(&path, grammar.topology_dot().as_bytes())?;
            }
            Ok(())
        }
        Command::Variation {
            input,
            setup,
            n,
            seed,
            out,
        } => {
            let tune = load_tune(&input)?;
            let cfg = setup.resolve()?;
            let (variant, records) = generate_variation(&tune, &cfg, n, seed)
                .map_err(|e| CliError::pipeline(e.to_string()))?;
            let dir = out.unwrap_or_else(|| {
                input
                    .parent()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            fs::create_dir_all(&dir)
                .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
            let base = dir.join(&variant.id);
            write_file(
                &base.with_extension("csv"),
                serialize_datasheet(&variant).as_bytes(),
            )?;
            write_file(
                &base.with_extension("mid"),
                &export_midi(&variant, &MidiConfig::default()),
            )?;
            let mut log = Vec::new();
            write_records(&records, &mut log).map_err(|e| CliError::pipeline(e.to_string()))?;
            write_file(&base.with_extension("log.jsonl"), &log)?;
            println!(
                "{} -> {} ({} notes, {} mutations)",
                tune.id,
                variant.id,
                variant.notes.len(),
                records.len()
            );
            Ok(())
        }
        Command::Experiment {
            corpus,
            n,
            seed,
            out,
        } => {
            let (tunes, _) = load_corpus(&corpus)
                .map_err(|e| CliError::io(format!("{}: {e}", corpus.display())))?;
            if tunes.is_empty() {
                return Err(CliError::io(format!(
                    "{}: no data sheets found",
                    corpus.display()
                )));
            }
            let setups: Vec<(String, SetupConfig)> = SetupConfig::SETUP_NAMES
                .iter()
                .map(|&name| (name.to_string(), SetupConfig::named(name).unwrap()))
                .collect();
            let cells = run_experiment(&tunes, &setups, n, seed);
            let failures: Vec<&_> = cells.iter().filter(|c| c.outcome.is_err()).collect();
            for cell in &failures {
                eprintln!(
                    "cell {}/{} failed: {}",
                    cell.tune_id,
                    cell.setup_name,
                    cell.outcome.as_ref().unwrap_err()
                );
            }
            if failures.len() == cells.len() {
                return Err(CliError::pipeline("every experiment cell failed"));
            }
            let mut buffer = Vec::new();
            write_metrics_csv(&cells, &mut buffer).map_err(|e| CliError::io(e.to_string()))?;
            write_file(&out, &buffer)?;
            println!(
                "{} cells ({} failed) -> {}",
                cells.len(),
                failures.len(),
                out.display()
            );
            Ok(())
        }
        Command::Concat { corpus, setup } => {
            let (tunes, _) = load_corpus(&corpus)
                .map_err(|e| CliError::io(format!("{}: {e}", corpus.display())))?;
            if tunes.is_empty() {
                return Err(CliError::io(format!(
                    "{}: no data sheets found",
                    corpus.display()
                )));
            }
            let cfg = setup.resolve()?;
            let (pai_concat, pai_sum) = concat_analysis(&tunes, &cfg);
            println!("tunes: {}", tunes.len());
            println!("pai_concat: {pai_concat}");
            println!("pai_sum: {pai_sum}");
            Ok(())
        }
        Command::ExportMidi { input, out } => {
            let tune = load_tune(&input)?;
            write_file(&out, &export_midi(&tune, &MidiConfig::default()))?;
            println!("{} notes -> {}", tune.notes.len(), out.display());
            Ok(())
        }
        Command::Validate { input } => {
            let tune = load_tune(&input)?;
            let violations = validate_tune(&tune);
            if violations.is_empty() {
                println!("{}: ok ({} notes)", tune.id, tune.notes.len());
                Ok(())
            } else {
                for v in &violations {
                    eprintln!("{}: row {}: {}", tune.id, v.row, v.message);
                }
                Err(CliError::pipeline(format!(
                    "{} violation(s)",
                    violations.len()
                )))
            }
        }
        Command::Topology { input, setup, out } => {
            let tune = load_tune(&input)?;
            let cfg = setup.resolve()?;
            let tokens = to_tokens(&tune, &cfg);
            let grammar = induce(&tokens).map_err(|e| CliError::pipeline(e.to_string()))?;
            let dot = grammar.topology_dot();
            match out {
                Some(path) => write_file(&path, dot.as_bytes())?,
                None => print!("{dot}"),
            }
            Ok(())
        }
    }
}
