//! Command-line front end for `seqclt`.
//!
//! Exit codes: 0 success, 1 malformed input, 2 I/O failure, 3 internal
//! consistency failure (variance routes disagree, or a decay ratio above 1),
//! 10 coboundary obstruction.

mod scenario;
pub mod svg;

use std::ffi::{OsStr, OsString};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use seqclt::analysis::{variance_report, verify_decay, VarianceReport};
use seqclt::coboundary;
use seqclt::montecarlo::sample_birkhoff;
use seqclt::report::to_json;
use seqclt::SampleConfig;

pub use scenario::{Scenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_OBSTRUCTION: i32 = 10;

/// Smallest and largest map multiplier drawn by `verify-decay`.
pub const DECAY_WORD_RANGE: (u64, u64) = (2, 10);

#[derive(Debug, Parser)]
#[command(name = "seqclt", version, about = "Birkhoff sums along sequences of expanding circle maps")]
pub struct Cli {
    /// Output prefix; defaults to the scenario path with `.out` in place of
    /// its extension
    #[arg(long, global = true, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
    /// Worker cap; results do not depend on it
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Also write raw S_n values to <PREFIX>.samples.csv (simulate only)
    #[arg(long, global = true)]
    pub dump_samples: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact variance and transversality report
    Analyze { scenario: PathBuf },
    /// Monte Carlo sampling of S_n
    Simulate { scenario: PathBuf },
    /// Solve f = u∘T_b − u or print the obstruction
    Coboundary {
        scenario: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        base: u64,
    },
    /// Check transfer-operator decay along random map words
    VerifyDecay {
        scenario: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Inconsistent(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => EXIT_INPUT,
            Self::Io(_) => EXIT_IO,
            Self::Inconsistent(_) => EXIT_INCONSISTENT,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Read { .. } => Self::Io(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

/// Summary printed by `verify-decay`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySummary {
    pub k: u64,
    pub trials: u64,
    pub seed: u64,
    pub failed: u64,
    pub worst_ratio: f64,
    pub worst_trial: u64,
    pub worst_word: Vec<u64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t as usize).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, stdout, stderr)),
            Err(e) => Err(CliError::Io(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<i32, CliError> {
    match &cli.command {
        Command::Analyze { scenario } => {
            let s = Scenario::load(scenario)?;
            let p = prefix(cli, scenario);
            check_outputs(scenario, &[".csv", ".json", ".svg"].map(|x| output_path(&p, x)))?;
            cmd_analyze(&s, &p, stdout, stderr)
        }
        Command::Simulate { scenario } => {
            let s = Scenario::load(scenario)?;
            let p = prefix(cli, scenario);
            check_outputs(scenario, &[".mc.json", ".samples.csv"].map(|x| output_path(&p, x)))?;
            cmd_simulate(&s, &p, cli.dump_samples, stdout)
        }
        Command::Coboundary { scenario, base } => {
            let s = Scenario::load(scenario)?;
            cmd_coboundary(&s, *base, stdout)
        }
        Command::VerifyDecay {
            scenario,
            k,
            trials,
            seed,
        } => {
            let s = Scenario::load(scenario)?;
            cmd_verify_decay(&s, *k, *trials, *seed, stdout)
        }
    }
}

fn prefix(cli: &Cli, scenario: &Path) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(|| output_path(&scenario.with_extension(""), ".out"))
}

/// `<prefix><suffix>`, appended to the prefix rather than replacing an
/// extension.
pub fn output_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = prefix.as_os_str().to_owned();
    s.push(OsStr::new(suffix));
    PathBuf::from(s)
}

/// Rejects an output path that would overwrite the scenario file itself.
fn check_outputs(scenario: &Path, outputs: &[PathBuf]) -> Result<(), CliError> {
    let same = |p: &Path| match (scenario.canonicalize(), p.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => scenario == p,
    };
    match outputs.iter().find(|p| same(p)) {
        Some(p) => Err(CliError::Input(format!(
            "output {} would overwrite the scenario file",
            p.display()
        ))),
        None => Ok(()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(stdout: &mut (dyn Write + Send), text: &str) -> Result<(), CliError> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

/// SVG with `Var(S_n)` and the accumulated transversality against `n`.
pub fn variance_svg(report: &VarianceReport) -> String {
    let var = svg::Series {
        title: "Var(S_n)",
        y_label: "variance",
        points: report.rows.iter().map(|r| (r.k as f64, r.var_cov_prefix)).collect(),
    };
    let acc = svg::Series {
        title: "accumulated transversality",
        y_label: "sum of min(sin², sin²)",
        points: report
            .rows
            .iter()
            .map(|r| (r.k as f64, r.acc_transversality))
            .collect(),
    };
    svg::line_plots(&[var, acc])
}

pub fn cmd_analyze(
    s: &Scenario,
    prefix: &Path,
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> Result<i32, CliError> {
    let report = variance_report(&s.function, &s.sequence, s.n);
    let summary = to_json(&report.summary()).expect("summary serializes");
    write_file(&output_path(prefix, ".csv"), &report.to_csv())?;
    write_file(&output_path(prefix, ".json"), &summary)?;
    write_file(&output_path(prefix, ".svg"), &variance_svg(&report))?;
    emit(stdout, &summary)?;
    if report.consistent() {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(
            stderr,
            "error: variance routes disagree: covariance {:e}, martingale {:e}",
            report.var_cov, report.var_mart
        );
        Ok(EXIT_INCONSISTENT)
    }
}

pub fn cmd_simulate(
    s: &Scenario,
    prefix: &Path,
    dump_samples: bool,
    stdout: &mut (dyn Write + Send),
) -> Result<i32, CliError> {
    let (Some(samples), Some(seed)) = (s.samples, s.seed) else {
        return Err(CliError::Input(
            "simulate needs both `samples` and `seed` in the scenario".into(),
        ));
    };
    let config = SampleConfig::new(samples, seed).standardization(s.standardization);
    let report = sample_birkhoff(&s.function, &s.sequence, s.n, &config)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let json = to_json(&report).expect("report serializes");
    write_file(&output_path(prefix, ".mc.json"), &json)?;
    if dump_samples {
        write_file(&output_path(prefix, ".samples.csv"), &report.samples_csv())?;
    }
    emit(stdout, &json)?;
    Ok(EXIT_OK)
}

pub fn cmd_coboundary(s: &Scenario, base: u64, stdout: &mut (dyn Write + Send)) -> Result<i32, CliError> {
    if base < 2 {
        return Err(CliError::Input(format!("base must be at least 2, got {base}")));
    }
    let result = coboundary::solve(&s.function, base);
    emit(stdout, &to_json(&result).expect("result serializes"))?;
    Ok(if result.is_solution() {
        EXIT_OK
    } else {
        EXIT_OBSTRUCTION
    })
}

/// The `trials` words of length `k` drawn by `verify-decay`.
pub fn decay_words(k: u64, trials: u64, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (lo, hi) = DECAY_WORD_RANGE;
    (0..trials)
        .map(|_| (0..k).map(|_| rng.random_range(lo..=hi)).collect())
        .collect()
}

pub fn decay_summary(s: &Scenario, k: u64, trials: u64, seed: u64) -> Result<DecaySummary, CliError> {
    if k == 0 || trials == 0 {
        return Err(CliError::Input("k and trials must be at least 1".into()));
    }
    let mut summary = DecaySummary {
        k,
        trials,
        seed,
        failed: 0,
        worst_ratio: 0.0,
        worst_trial: 0,
        worst_word: Vec::new(),
    };
    for (t, word) in decay_words(k, trials, seed).into_iter().enumerate() {
        let rep = verify_decay(&s.function, &word).map_err(|e| CliError::Input(e.to_string()))?;
        if !rep.passed {
            summary.failed += 1;
        }
        if t == 0 || rep.worst_ratio > summary.worst_ratio {
            summary.worst_ratio = rep.worst_ratio;
            summary.worst_trial = t as u64;
            summary.worst_word = word;
        }
    }
    Ok(summary)
}

pub fn cmd_verify_decay(
    s: &Scenario,
    k: u64,
    trials: u64,
    seed: u64,
    stdout: &mut (dyn Write + Send),
) -> Result<i32, CliError> {
    let summary = decay_summary(s, k, trials, seed)?;
    emit(stdout, &to_json(&summary).expect("summary serializes"))?;
    Ok(if summary.failed == 0 {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    })
}
