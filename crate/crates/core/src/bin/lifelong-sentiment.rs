use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lifelong_sentiment::corpus::{domain_name_for, load_domain, LabelMode};
use lifelong_sentiment::evaluation::{self, DEFAULT_FOLDS, DEFAULT_SEED};
use lifelong_sentiment::state::{self, StateDir};
use lifelong_sentiment::synthetic::{self, SyntheticConfig};
use lifelong_sentiment::{ClassLabel, DomainCorpus, EngineConfig, Error, Result};

/// Lifelong naive Bayes sentiment classification.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelFlags {
    /// Additive smoothing constant.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Share of frequency-eligible words kept per domain.
    #[arg(long, default_value_t = 30.0)]
    percent: f64,
    /// Minimum average occurrences per domain for a word to be ranked.
    #[arg(long = "min-freq", default_value_t = 5.0)]
    min_freq: f64,
    /// Seed for fold assignment, recorded in every output.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl ModelFlags {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            lambda: self.lambda,
            select_percent: self.percent,
            min_avg_freq: self.min_freq,
            ..EngineConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Initial learning over labeled domain files (`label TAB text`).
    Initial {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// State directory to create.
        #[arg(long)]
        out: PathBuf,
        /// Gate self-study predictions with the full vocabulary instead of
        /// knowledge-base words.
        #[arg(long)]
        no_kb_gate: bool,
        /// Prediction passes per self-study domain.
        #[arg(long, default_value_t = 1)]
        passes: usize,
        /// Score self-study domains by re-predicting after the refit.
        #[arg(long)]
        score_after_refit: bool,
        #[command(flatten)]
        flags: ModelFlags,
    },
    /// Self-study of one unlabeled domain file (one review per line).
    SelfStudy {
        #[arg(long)]
        state: PathBuf,
        file: PathBuf,
        /// Domain name; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
        /// Labeled copy of the same domain used only for scoring.
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Macro-F1 under decreasing vocabulary percentages.
    Sweep {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = default_percents())]
        percents: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        /// Machine-readable output file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: ModelFlags,
    },
    /// Source-only, in-domain and lifelong comparison over labeled targets.
    Evaluate {
        /// Labeled source domains for initial learning (repeatable).
        #[arg(long = "source", required = true)]
        sources: Vec<PathBuf>,
        /// Labeled target domains, consumed by self-study in order.
        #[arg(required = true)]
        targets: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        /// Also sweep vocabulary percentages over every domain.
        #[arg(long)]
        emit_table1: bool,
        /// Print the system comparison as an aligned table.
        #[arg(long)]
        emit_table2: bool,
        #[arg(long, value_delimiter = ',', default_values_t = default_percents())]
        percents: Vec<f64>,
        /// Machine-readable output file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: ModelFlags,
    },
    /// Top words of one class from a state's knowledge base.
    ExportKb {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_parser = parse_class)]
        class: ClassLabel,
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Re-executes a state's manifest into a new directory.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes a synthetic multi-domain corpus and its planted lexicon
    /// (`word TAB class TAB shared|emerging`).
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        domains: usize,
        #[arg(long, default_value_t = 500)]
        docs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn default_percents() -> Vec<f64> {
    (1..=10).rev().map(|i| f64::from(i) * 10.0).collect()
}

fn parse_class(s: &str) -> std::result::Result<ClassLabel, String> {
    s.parse()
}

fn load_labeled(paths: &[PathBuf]) -> Result<Vec<DomainCorpus>> {
    paths
        .iter()
        .map(|p| load_domain(p, &domain_name_for(p), LabelMode::Labeled))
        .collect()
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Initial {
            files,
            out,
            no_kb_gate,
            passes,
            score_after_refit,
            flags,
        } => {
            let config = EngineConfig {
                restrict_to_kb: !no_kb_gate,
                self_study_passes: passes,
                score_after_refit,
                ..flags.config()
            };
            let inputs: Vec<(String, PathBuf)> = files.iter().map(|p| (domain_name_for(p), p.clone())).collect();
            let dir = state::initial_command(&out, &inputs, config, flags.seed)?;
            let kb = dir.load_kb()?;
            let _ = writeln!(
                stdout,
                "initial learning on {} domains; knowledge base has {} entries",
                inputs.len(),
                kb.len()
            );
        }
        Command::SelfStudy {
            state: dir,
            file,
            name,
            gold,
        } => {
            let name = name.unwrap_or_else(|| domain_name_for(&file));
            let summary = state::self_study_command(&dir, &name, &file, gold.as_deref())?;
            let _ = write!(stdout, "{name}: pseudo-labeled {} documents", summary.documents);
            if let Some(f1) = summary.macro_f1 {
                let _ = write!(stdout, ", macro-F1 {f1:.4}");
            }
            let _ = writeln!(stdout);
        }
        Command::Sweep {
            files,
            percents,
            folds,
            out,
            flags,
        } => {
            let domains = load_labeled(&files)?;
            let table = evaluation::percentage_sweep(&domains, &percents, folds, flags.seed, &flags.config())?;
            let _ = write!(stdout, "{}", table.render_table());
            if let Some(out) = out {
                write_out(&out, &table.to_tsv())?;
            }
        }
        Command::Evaluate {
            sources,
            targets,
            folds,
            emit_table1,
            emit_table2,
            percents,
            out,
            flags,
        } => {
            let config = flags.config();
            let sources = load_labeled(&sources)?;
            let targets = load_labeled(&targets)?;
            let report = evaluation::compare_systems(&sources, &targets, folds, flags.seed, &config)?;
            let mut machine = report.to_tsv();
            if emit_table2 {
                let _ = write!(stdout, "{}", report.render_table());
            }
            if emit_table1 {
                let all: Vec<DomainCorpus> = sources.iter().chain(&targets).cloned().collect();
                let table = evaluation::percentage_sweep(&all, &percents, folds, flags.seed, &config)?;
                let _ = write!(stdout, "{}", table.render_table());
                machine.push_str(&table.to_tsv());
            }
            if !emit_table1 && !emit_table2 {
                let _ = write!(stdout, "{machine}");
            }
            if let Some(out) = out {
                write_out(&out, &machine)?;
            }
        }
        Command::ExportKb { state: dir, class, top } => {
            let kb = StateDir::open(&dir)?.load_kb()?;
            for e in kb.top_k(class, top) {
                let _ = writeln!(stdout, "{}\t{}", e.word, e.score);
            }
        }
        Command::Replay { manifest, out } => {
            let dir = state::replay(&manifest, &out)?;
            let _ = writeln!(stdout, "replayed into {}", dir.root().display());
        }
        Command::Generate {
            out,
            domains,
            docs,
            seed,
        } => {
            let config = SyntheticConfig {
                domains,
                docs_per_domain: docs,
                ..SyntheticConfig::default()
            };
            fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            for d in synthetic::generate(&config, seed)? {
                write_out(&out.join(format!("{}.tsv", d.name())), &d.to_text())?;
            }
            let shared = config.lexicon().into_iter().map(|(w, c)| (w, c, "shared"));
            let emerging = config.emerging_lexicon().into_iter().map(|(w, c)| (w, c, "emerging"));
            let lexicon: String = shared
                .chain(emerging)
                .map(|(w, c, kind)| format!("{w}\t{c}\t{kind}\n"))
                .collect();
            write_out(&out.join("lexicon.tsv"), &lexicon)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
