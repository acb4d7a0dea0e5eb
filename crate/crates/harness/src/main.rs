use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use revpref_core::constraints::SolverConfig;
use revpref_core::models::ModelSpec;
use revpref_core::relation::density;
use revpref_harness::generate::{generate_pool, Preset, DEFAULT_POOL_SIZE};
use revpref_harness::io::{self, load_pool, PoolFormat, SubjectPool};
use revpref_harness::metrics::{analyze_pool, analyze_subject, solver_config_from_env, Outcome};
use revpref_harness::replicate::{replicate, ReplicateConfig};
use revpref_harness::report::{write_report, ReportFormat};
use revpref_harness::verify::verify;

#[derive(Parser)]
#[command(
    name = "revpref",
    version,
    about = "Revealed preference analysis for two-stage choice models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct DataArgs {
    /// Pool file (JSON, or long-format CSV when --menus is given).
    #[arg(long)]
    data: PathBuf,
    /// Menus file accompanying a CSV pool.
    #[arg(long)]
    menus: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<SubjectPool, String> {
        let format = match &self.menus {
            Some(m) => PoolFormat::Csv { menus: m.clone() },
            None => PoolFormat::Json,
        };
        load_pool(&self.data, &format).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Test every subject; exit 0 if all pass, 1 if some fail, 2 on error.
    Check {
        #[arg(long)]
        model: ModelSpec,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Print the revealed preference relation of one subject.
    Reveal {
        #[arg(long)]
        model: ModelSpec,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        subject: String,
    },
    /// Pass rates, predictive success, densities and indicators for a pool.
    Replicate {
        #[command(flatten)]
        data: DataArgs,
        /// Number of random benchmark subjects.
        #[arg(long, default_value_t = 1000)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        /// Comma-separated models; all study configurations by default.
        #[arg(long, value_delimiter = ',')]
        models: Vec<ModelSpec>,
    },
    /// Generate a synthetic pool on the default menus.
    Gen {
        /// rational, random, mixture or model:M
        #[arg(long)]
        preset: Preset,
        #[arg(long, default_value_t = DEFAULT_POOL_SIZE)]
        subjects: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the solver with brute-force enumeration on a small universe.
    OracleVerify {
        #[arg(long)]
        universe: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check(model: ModelSpec, pool: &SubjectPool, cfg: &SolverConfig) -> Result<ExitCode, String> {
    let analysis = analyze_pool(&[model], pool, cfg, false).remove(0);
    for (id, outcome) in &analysis.outcomes {
        match outcome {
            Outcome::Pass(_) => println!("{id}\tpass"),
            Outcome::Fail => println!("{id}\tfail"),
            Outcome::Error(m) => println!("{id}\terror\t{m}"),
        }
    }
    println!(
        "{model}: {} pass, {} fail, {} error",
        analysis.passes(),
        analysis.fails(),
        analysis.errors().len()
    );
    Ok(if !analysis.errors().is_empty() {
        ExitCode::from(2)
    } else if analysis.fails() > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn reveal(
    model: ModelSpec,
    pool: &SubjectPool,
    subject: &str,
    cfg: &SolverConfig,
) -> Result<ExitCode, String> {
    let s = pool
        .subject(subject)
        .ok_or_else(|| format!("no subject '{subject}'"))?;
    match analyze_subject(model, &s.data, cfg, true) {
        Outcome::Pass(Some(rel)) => {
            for (x, y) in rel.pairs() {
                println!("{} > {}", s.data.label(x), s.data.label(y));
            }
            let d = density(&rel, pool.n());
            let total = pool.n() * pool.n().saturating_sub(1) / 2;
            println!("density {d:.4} ({} of {total} pairs)", rel.len());
            Ok(ExitCode::SUCCESS)
        }
        Outcome::Fail => {
            println!("subject {subject} is not rationalizable by {model}");
            Ok(ExitCode::from(1))
        }
        Outcome::Error(m) => Err(m),
        Outcome::Pass(None) => unreachable!(),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let cfg = solver_config_from_env().map_err(|e| e.to_string())?;
    match cli.command {
        Command::Check { model, data } => check(model, &data.load()?, &cfg),
        Command::Reveal {
            model,
            data,
            subject,
        } => reveal(model, &data.load()?, &subject, &cfg),
        Command::Replicate {
            data,
            random,
            seed,
            out,
            format,
            models,
        } => {
            let pool = data.load()?;
            let mut rc = ReplicateConfig {
                random_subjects: random,
                seed,
                solver: cfg,
                ..ReplicateConfig::default()
            };
            if !models.is_empty() {
                rc.models = models;
            }
            let bundle = replicate(&pool, &rc);
            match out {
                Some(p) => write_report(&bundle, &p, format).map_err(|e| e.to_string())?,
                None => print!("{}", bundle.render(format)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            preset,
            subjects,
            seed,
            out,
        } => {
            let pool = generate_pool(preset, subjects, seed);
            emit(&io::to_json(&pool), out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleVerify {
            universe,
            samples,
            seed,
        } => {
            let s = verify(universe, samples, seed, &cfg).map_err(|e| e.to_string())?;
            println!("universe {} datasets {}", s.universe, s.datasets);
            for (m, t) in &s.tallies {
                println!(
                    "{m}\tchecked {}\tverdict mismatches {}\trevealed mismatches {}\tunsound {}",
                    t.checked, t.verdict_mismatches, t.revealed_mismatches, t.unsound
                );
            }
            if s.passed() {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "FAILED: {} base mismatches, {} unsound",
                    s.base_mismatches(),
                    s.unsound()
                );
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
