//! `rearrange`: configuration-driven experiment runner.
//!
//! Exit codes: 0 success, 1 an SRI test failed, 2 invalid configuration,
//! 3 underpowered test, 4 I/O error. Reports go to stdout or `--out`;
//! stderr only carries log lines and error messages.

mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{ExperimentConfig, Function, FunctionConfig, Number};
use rearrange::exactgeom::{exact2_report, Probability};
use rearrange::rankcore::{permutation_from_initial_ranks, rank_array};
use rearrange::rearrangements::simulate;
use rearrange::sritest::{default_partitions, run_sri_test, SriReport, DEFAULT_ALPHA, DEFAULT_TRIALS};
use rearrange::{Error, Permutation, RankTuple, RunConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "rearrange",
    version,
    about = "Simulate rearrangements and test rank independence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; required for every Monte Carlo command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Family-wise significance level.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trials and dump one record per trial.
    Simulate,
    /// Run the strong rank independence test.
    Sri,
    /// Exact two-point geometry for rational θ and c.
    Exact2 {
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        c: Option<String>,
    },
    /// Rank array of a permutation, or the permutation of a rank tuple.
    Ranks {
        /// Whitespace- or comma-separated entries, e.g. "3 1 2".
        input: String,
        /// Read the input as initial ranks instead of a permutation.
        #[arg(long)]
        initial_ranks: bool,
    },
    /// Canonical measure-preserving representative of a directing function.
    Canonicalize {
        /// Inline JSON `{"breakpoints": [...], "values": [...]}`.
        #[arg(long)]
        function: Option<String>,
    },
}

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Underpowered { .. } => Failure {
                code: 3,
                message: format!("{e}; raise --trials or use a coarser partition"),
            },
            _ => Failure::config(e.to_string()),
        }
    }
}

/// Run parameters after merging the config file with the flags.
struct Settings {
    config: ExperimentConfig,
    seed: Option<u64>,
    trials: Option<u64>,
    alpha: f64,
    workers: usize,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl Settings {
    fn resolve(common: Common) -> Result<Self, Failure> {
        let config = match &common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(Settings {
            seed: common.seed.or(config.seed),
            trials: common.trials.or(config.trials),
            alpha: common.alpha.or(config.alpha).unwrap_or(DEFAULT_ALPHA),
            workers: common.workers.or(config.workers).unwrap_or(1),
            out: common.out.or_else(|| config.out.clone()),
            format: common.format,
            config,
        })
    }

    fn seed(&self) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| Failure::config("a master seed is required (--seed or \"seed\" in the config)"))
    }

    fn run_config(&self, default_trials: Option<u64>) -> Result<RunConfig, Failure> {
        let trials = self
            .trials
            .or(default_trials)
            .ok_or_else(|| Failure::config("a trial count is required (--trials or \"trials\" in the config)"))?;
        Ok(RunConfig::new(trials, self.seed()?).with_workers(self.workers))
    }

    fn format(&self, allowed: &[Format], default: Option<Format>) -> Result<Option<Format>, Failure> {
        match self.format {
            Some(f) if !allowed.contains(&f) => Err(Failure::config("this command does not support that --format")),
            Some(f) => Ok(Some(f)),
            None => Ok(default),
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| Failure::io(format!("stdout: {e}")))
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_text(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    rows(&mut w).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_simulate(s: &Settings) -> Result<ExitCode, Failure> {
    let format = s.format(&[Format::Jsonl, Format::Json, Format::Csv], Some(Format::Jsonl))?;
    let spec = s
        .config
        .spec
        .as_ref()
        .ok_or_else(|| Failure::config("simulate needs a \"spec\" in the config"))?;
    let cfg = s.run_config(None)?;
    log::info!(
        "simulating {} trials of a {} rearrangement, n = {}",
        cfg.trials,
        spec.kind().name(),
        spec.n()
    );
    let records = simulate(spec, &cfg)?;
    let text = match format {
        Some(Format::Json) => to_json(&records),
        Some(Format::Csv) => csv_text(|w| {
            let n = spec.n();
            let mut header = vec!["trial".to_string()];
            for field in ["x_desc", "mu", "y", "rank"] {
                header.extend((1..=n).map(|i| format!("{field}_{i}")));
            }
            w.write_record(&header)?;
            for (t, r) in records.iter().enumerate() {
                let mut row = vec![t.to_string()];
                row.extend(r.x_desc.iter().map(|v| v.to_string()));
                row.extend(r.mu.images().iter().map(|v| v.to_string()));
                row.extend(r.y.iter().map(|v| v.to_string()));
                row.extend(r.ranks.ranks().iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
            Ok(())
        }),
        _ => {
            let mut out = String::new();
            for r in &records {
                out.push_str(&serde_json::to_string(r).expect("records serialize"));
                out.push('\n');
            }
            out
        }
    };
    s.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn sri_csv(report: &SriReport) -> String {
    csv_text(|w| {
        w.write_record(["k", "partition", "cell", "rank", "count"])?;
        for rank in &report.ranks {
            for test in &rank.tests {
                for (cell, row) in test.table.counts.iter().enumerate() {
                    for (l, count) in row.iter().enumerate() {
                        w.write_record([
                            rank.k.to_string(),
                            test.partition.clone(),
                            (cell + 1).to_string(),
                            (l + 1).to_string(),
                            count.to_string(),
                        ])?;
                    }
                }
            }
        }
        Ok(())
    })
}

fn cmd_sri(mut s: Settings) -> Result<ExitCode, Failure> {
    let format = s.format(&[Format::Json, Format::Csv], Some(Format::Json))?;
    let spec = s
        .config
        .spec
        .take()
        .ok_or_else(|| Failure::config("sri needs a \"spec\" in the config"))?;
    let cfg = s.run_config(Some(DEFAULT_TRIALS))?;
    let partitions = match s.config.partitions.take() {
        Some(list) => list
            .into_iter()
            .map(|p| p.build())
            .collect::<rearrange::Result<Vec<_>>>()?,
        None => default_partitions(&spec)?,
    };
    log::info!(
        "testing {} partitions over {} trials at alpha = {}",
        partitions.len(),
        cfg.trials,
        s.alpha
    );
    let report = run_sri_test(&spec, &partitions, &cfg, s.alpha)?;
    let text = match format {
        Some(Format::Csv) => sri_csv(&report),
        _ => to_json(&report),
    };
    s.emit(&text)?;
    if !report.pass {
        log::warn!("strong rank independence rejected");
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn probability_line(p: &Probability) -> String {
    match p {
        Probability::Exact { value, decimal } => format!("{value} ({decimal})"),
        Probability::Estimate { value, hits, trials } => format!("~{value} ({hits}/{trials})"),
    }
}

fn cmd_exact2(s: &Settings, theta: Option<String>, c: Option<String>) -> Result<ExitCode, Failure> {
    let format = s.format(&[Format::Json], None)?;
    let pick = |flag: Option<String>, field: &Option<Number>, name: &str| match (flag, field) {
        (Some(text), _) => Number::Text(text).rational(),
        (None, Some(n)) => n.rational(),
        (None, None) => Err(Failure::config(format!(
            "exact2 needs --{name} or \"{name}\" in the config"
        ))),
    };
    let theta = pick(theta, &s.config.theta, "theta")?;
    let c = pick(c, &s.config.c, "c")?;
    let r = exact2_report(theta, c)?;
    if format == Some(Format::Json) {
        s.emit(&to_json(&r))?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut out = String::new();
    let _ = writeln!(out, "theta = {}", r.theta);
    let _ = writeln!(out, "c = {}", r.c);
    let _ = writeln!(out, "alpha = {}", r.alpha);
    for (i, l) in r.lengths.iter().enumerate() {
        let _ = writeln!(out, "l_{} = {l}", i + 1);
    }
    for a in &r.atoms {
        let _ = writeln!(out, "m(X_{}{}) = {}", a.i, a.j, a.measure);
    }
    let id = &r.identity;
    let _ = writeln!(
        out,
        "identity: {} + {} = {} {}",
        id.left_first,
        id.left_second,
        id.right,
        if id.holds { "✓" } else { "✗" }
    );
    let _ = writeln!(
        out,
        "P(R_2 = 2 | Y_1 in I_1) = {}",
        probability_line(&r.travellers.given_i1)
    );
    let _ = writeln!(
        out,
        "P(R_2 = 2 | Y_1 in I_3) = {}",
        probability_line(&r.travellers.given_i3)
    );
    s.emit(&out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RanksReport {
    permutation: Permutation,
    rank_array: Vec<Vec<usize>>,
    diagonal: RankTuple,
    round_trip: Permutation,
}

fn cmd_ranks(s: &Settings, input: &str, initial_ranks: bool) -> Result<ExitCode, Failure> {
    let format = s.format(&[Format::Json], None)?;
    let entries = input
        .split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Failure::config(format!("not a positive integer: {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let permutation = if initial_ranks {
        permutation_from_initial_ranks(&RankTuple::new(entries)?)
    } else {
        Permutation::new(entries)?
    };
    let rho = rank_array(&permutation);
    let diagonal = rho.diagonal();
    let report = RanksReport {
        round_trip: permutation_from_initial_ranks(&diagonal),
        rank_array: rho.rows(),
        diagonal,
        permutation,
    };
    let text = if format == Some(Format::Json) {
        to_json(&report)
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "permutation: {}", join(report.permutation.images()));
        let _ = writeln!(out, "rank array (row j, column k):");
        for row in &report.rank_array {
            let _ = writeln!(out, "  {}", join(row));
        }
        let _ = writeln!(out, "diagonal: {}", join(report.diagonal.ranks()));
        let _ = writeln!(out, "round trip: {}", join(report.round_trip.images()));
        out
    };
    s.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FunctionJson {
    breakpoints: Vec<serde_json::Value>,
    values: Vec<serde_json::Value>,
}

fn cmd_canonicalize(s: &Settings, inline: Option<String>) -> Result<ExitCode, Failure> {
    s.format(&[Format::Json], Some(Format::Json))?;
    let fc: FunctionConfig = match (inline, &s.config.function) {
        (Some(text), _) => serde_json::from_str(&text).map_err(|e| Failure::config(format!("--function: {e}")))?,
        (None, Some(f)) => f.clone(),
        (None, None) => {
            return Err(Failure::config(
                "canonicalize needs --function or \"function\" in the config",
            ))
        }
    };
    let out = match fc.build()? {
        Function::Float(f) => {
            let g = f.canonicalize();
            FunctionJson {
                breakpoints: g.breakpoints().iter().map(|&x| x.into()).collect(),
                values: g.values().iter().map(|&x| x.into()).collect(),
            }
        }
        Function::Exact(f) => {
            let g = f.canonicalize();
            FunctionJson {
                breakpoints: g.breakpoints().iter().map(|x| x.to_string().into()).collect(),
                values: g.values().iter().map(|x| x.to_string().into()).collect(),
            }
        }
    };
    s.emit(&to_json(&out))?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let settings = Settings::resolve(cli.common)?;
    match cli.command {
        Command::Simulate => cmd_simulate(&settings),
        Command::Sri => cmd_sri(settings),
        Command::Exact2 { theta, c } => cmd_exact2(&settings, theta, c),
        Command::Ranks { input, initial_ranks } => cmd_ranks(&settings, &input, initial_ranks),
        Command::Canonicalize { function } => cmd_canonicalize(&settings, function),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REARRANGE_LOG", "warn")).init();
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
