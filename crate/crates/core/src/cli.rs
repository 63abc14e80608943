//! The `uft` command line.
//!
//! ```text
//! uft synth [SPEC] --out DIR [--suite N] [--seed S]
//! uft track DATASET [--out PATH] [--vot-compat]
//! uft eval DATASET [--results PATH | --ablation] [--out CSV]
//! uft sweep DATASET [--trials N] [--seed S] [--out CSV]
//! ```
//!
//! `--config`, `--variant` and `--jobs` apply to every command. Settings are
//! resolved as defaults, then the config file, then `UFT_*` environment
//! variables, then flags. Exit status is 0 on success, 1 for usage and
//! configuration errors and 2 for data errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::dataset::{load_dataset, SceneData};
use crate::error::{Error, Result};
use crate::eval::ablation::{ablation_report, to_csv, to_table, CSV_HEADER};
use crate::eval::results::{parse_records, records_of, to_statuses, write_records, Record};
use crate::eval::{evaluate, random_search, run_scene, EvalSummary, SequenceResult};
use crate::io_util::write_atomic;
use crate::synth::{distractor_suite, Scenario, SuiteConfig};
use crate::tracker::Variant;

#[derive(Debug, Parser)]
#[command(
    name = "uft",
    version,
    about = "Flow-mask fusion tracker and synthetic benchmark"
)]
pub struct Cli {
    /// Run configuration file (flat `key = value`).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for scene generation and the hyperparameter search.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tracker variant.
    #[arg(long, global = true, value_name = "NAME")]
    pub variant: Option<String>,
    /// Output file or directory.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Write results with numeric status codes, one line per frame.
    #[arg(long, global = true)]
    pub vot_compat: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene (or a generated suite) to a dataset directory.
    Synth {
        /// Scene description file.
        spec: Option<PathBuf>,
        /// Generate this many distractor scenes instead of reading SPEC.
        #[arg(long, value_name = "N", conflicts_with = "spec")]
        suite: Option<usize>,
    },
    /// Track every scene of a dataset under the reset protocol.
    Track { dataset: PathBuf },
    /// Report accuracy, robustness, failures and EAO.
    Eval {
        dataset: PathBuf,
        /// Results file (one scene) or directory of `<scene>.txt` files.
        #[arg(long, value_name = "PATH")]
        results: Option<PathBuf>,
        /// Evaluate every tracker variant.
        #[arg(long, conflicts_with = "results")]
        ablation: bool,
    },
    /// Random search over k_c, k_p and k_f, maximising EAO.
    Sweep {
        dataset: PathBuf,
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
    },
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    match execute(&cli, std::env::vars(), stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Resolves the configuration and dispatches to the command.
pub fn execute<E, K, V>(cli: &Cli, env: E, stdout: &mut dyn Write) -> Result<()>
where
    E: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env(env)?;
    if let Some(v) = &cli.variant {
        cfg.set("variant", v)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Command::Sweep {
        trials: Some(n), ..
    } = cli.command
    {
        cfg.trials = n;
    }
    cfg.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::config("jobs", "must be positive"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;

    let out = cli.out.as_deref();
    let text = pool.install(|| match &cli.command {
        Command::Synth { spec, suite } => cmd_synth(spec.as_deref(), *suite, cli.seed, &cfg, out),
        Command::Track { dataset } => cmd_track(dataset, &cfg, out, cli.vot_compat),
        Command::Eval {
            dataset,
            results,
            ablation,
        } => cmd_eval(dataset, results.as_deref(), *ablation, &cfg, out),
        Command::Sweep { dataset, .. } => cmd_sweep(dataset, &cfg, out),
    })?;
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

fn required_out(out: Option<&Path>) -> Result<&Path> {
    out.ok_or_else(|| Error::config("out", "an output path is required"))
}

/// Renders one scene from `spec`, or a distractor suite of `suite` scenes
/// named `scene_000`, `scene_001`, ... With a spec file, `seed` replaces the
/// file's own seed.
pub fn cmd_synth(
    spec: Option<&Path>,
    suite: Option<usize>,
    seed: Option<u64>,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<String> {
    let out = required_out(out)?;
    let scenes: Vec<(String, Scenario)> = match (spec, suite) {
        (Some(p), _) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::config("spec", format!("{}: {e}", p.display())))?;
            let mut s = Scenario::parse(&text)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let name = out
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            vec![(name, s)]
        }
        (None, Some(0)) => return Err(Error::config("suite", "must be positive")),
        (None, Some(n)) => distractor_suite(n, cfg.seed, &SuiteConfig::default())
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("scene_{i:03}"), s))
            .collect(),
        (None, None) => return Err(Error::config("spec", "give a scene file or --suite N")),
    };
    let single = spec.is_some();
    scenes
        .par_iter()
        .map(|(name, s)| {
            let data = SceneData::generate(name.clone(), s)?;
            let dir = if single {
                out.to_path_buf()
            } else {
                out.join(name)
            };
            data.save(&dir)
        })
        .collect::<Result<Vec<()>>>()?;
    let frames: usize = scenes.iter().map(|(_, s)| s.frames).sum();
    Ok(format!(
        "wrote {} scene(s), {frames} frames, to {}\n",
        scenes.len(),
        out.display()
    ))
}

fn results_name(scene: &SceneData) -> String {
    format!("{}.txt", scene.name)
}

/// Tracks every scene. A single scene is written to `out` (or returned for
/// standard output); several scenes need `out` to be a directory, which
/// receives one `<scene>.txt` per scene.
pub fn cmd_track(
    dataset: &Path,
    cfg: &RunConfig,
    out: Option<&Path>,
    vot_compat: bool,
) -> Result<String> {
    let scenes = load_dataset(dataset)?;
    let settings = cfg.settings();
    let results = scenes
        .par_iter()
        .map(|s| run_scene(s, &settings, &cfg.protocol))
        .collect::<Result<Vec<_>>>()?;
    let texts: Vec<String> = results
        .iter()
        .map(|r| write_records(&records_of(r), vot_compat))
        .collect();
    match (scenes.len(), out) {
        (1, None) => Ok(texts.into_iter().next().unwrap_or_default()),
        (1, Some(p)) if !p.is_dir() => {
            write_atomic(p, texts[0].as_bytes())?;
            Ok(format!("wrote {}\n", p.display()))
        }
        (_, None) => Err(Error::config(
            "out",
            "a directory is required when the dataset holds several scenes",
        )),
        (_, Some(dir)) => {
            fs::create_dir_all(dir)?;
            for (s, t) in scenes.iter().zip(&texts) {
                write_atomic(&dir.join(results_name(s)), t.as_bytes())?;
            }
            Ok(format!(
                "wrote {} results files to {}\n",
                scenes.len(),
                dir.display()
            ))
        }
    }
}

fn load_results(scene: &SceneData, path: &Path, cfg: &RunConfig) -> Result<SequenceResult> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Insufficient(format!("{}: {e}", path.display())))?;
    let mut records = parse_records(&text)?;
    if records.is_empty() {
        return Err(Error::Insufficient(format!(
            "{}: no results",
            path.display()
        )));
    }
    if matches!(records[0], Record::Ok(_)) {
        records[0] = Record::Init;
    }
    let (kinds, outputs) = to_statuses(&records);
    SequenceResult::from_outputs(&kinds, &outputs, &scene.groundtruth(), &cfg.protocol)
        .map_err(|e| Error::Insufficient(format!("{}: {e}", path.display())))
}

fn summary_csv(label: &str, s: &EvalSummary) -> String {
    format!(
        "{CSV_HEADER}\n{label},{:.6},{:.6},{:.6},{},{}\n",
        s.eao,
        s.robustness(),
        s.accuracy,
        s.failures,
        s.frames
    )
}

fn summary_text(label: &str, scenes: usize, s: &EvalSummary) -> String {
    format!(
        "{label}: {scenes} scene(s), {} frames\naccuracy    {:.4}\nrobustness  {:.3}\nfailures    {}\neao         {:.4}\n",
        s.frames,
        s.accuracy,
        s.robustness(),
        s.failures,
        s.eao
    )
}

fn default_report(dataset: &Path, name: &str) -> PathBuf {
    let root = if dataset.is_dir() {
        dataset
    } else {
        dataset.parent().unwrap_or(Path::new("."))
    };
    root.join(name)
}

/// Evaluates stored results, a fresh run of the configured variant, or every
/// variant. Prints the metrics and writes a CSV report to `out`, by default
/// `metrics.csv` (or `ablation.csv`) in the dataset directory.
pub fn cmd_eval(
    dataset: &Path,
    results: Option<&Path>,
    ablation: bool,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<String> {
    let scenes = load_dataset(dataset)?;
    let (text, csv, name) = if ablation {
        let rows = ablation_report(&scenes, &Variant::ALL, &cfg.settings(), &cfg.protocol)?;
        (to_table(&rows), to_csv(&rows), "ablation.csv")
    } else {
        let summary = match results {
            Some(path) => {
                let seqs = if scenes.len() == 1 && !path.is_dir() {
                    vec![load_results(&scenes[0], path, cfg)?]
                } else {
                    scenes
                        .iter()
                        .map(|s| load_results(s, &path.join(results_name(s)), cfg))
                        .collect::<Result<Vec<_>>>()?
                };
                EvalSummary::from_results(seqs, &cfg.protocol)?
            }
            None => evaluate(&scenes, &cfg.settings(), &cfg.protocol)?,
        };
        let label = if results.is_some() {
            "results".to_string()
        } else {
            cfg.variant.mode.to_string()
        };
        (
            summary_text(&label, scenes.len(), &summary),
            summary_csv(&label, &summary),
            "metrics.csv",
        )
    };
    let path = out.map_or_else(|| default_report(dataset, name), Path::to_path_buf);
    write_atomic(&path, csv.as_bytes())?;
    Ok(format!("{text}report: {}\n", path.display()))
}

/// Random search maximising EAO over the dataset. Prints the search ranges,
/// the leaderboard and the best configuration; the leaderboard CSV goes to
/// `out`, by default `leaderboard.csv` in the dataset directory.
pub fn cmd_sweep(dataset: &Path, cfg: &RunConfig, out: Option<&Path>) -> Result<String> {
    let scenes = load_dataset(dataset)?;
    let r = &cfg.ranges;
    let mut text = format!(
        "searching k_c in [{:.2}, {:.2}], k_p in [{:.2}, {:.2}], k_f in [{:.2}, {:.2}] over {} trial(s)\n",
        r.k_c.0, r.k_c.1, r.k_p.0, r.k_p.1, r.k_f.0, r.k_f.1, cfg.trials
    );
    let base = cfg.settings();
    let result = random_search(&cfg.score, r, cfg.trials, cfg.seed, |score| {
        let settings = crate::eval::RunSettings {
            score: *score,
            ..base
        };
        Ok(evaluate(&scenes, &settings, &cfg.protocol)?.eao)
    })?;

    let mut csv = String::from("rank,trial,k_c,k_p,k_f,eao\n");
    let _ = writeln!(
        text,
        "{:>4} {:>5} {:>8} {:>8} {:>8} {:>8}",
        "rank", "trial", "k_c", "k_p", "k_f", "eao"
    );
    for (rank, t) in result.leaderboard.iter().enumerate() {
        let c = &t.config;
        let _ = writeln!(
            csv,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            rank + 1,
            t.index,
            c.k_c,
            c.k_p,
            c.k_f,
            t.objective
        );
        let _ = writeln!(
            text,
            "{:>4} {:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            rank + 1,
            t.index,
            c.k_c,
            c.k_p,
            c.k_f,
            t.objective
        );
    }
    let best = result.best().config;
    let _ = writeln!(
        text,
        "best:\nk_c = {}\nk_p = {}\nk_f = {}",
        best.k_c, best.k_p, best.k_f
    );
    let path = out.map_or_else(
        || default_report(dataset, "leaderboard.csv"),
        Path::to_path_buf,
    );
    write_atomic(&path, csv.as_bytes())?;
    let _ = writeln!(text, "leaderboard: {}", path.display());
    Ok(text)
}
