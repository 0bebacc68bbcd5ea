use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use distortion_core::experiment::{
    format_float, run_experiment, to_json, write_outputs, ExperimentConfig, ExperimentError,
};
use distortion_core::scenarios::families;

/// Numerical checks of bounded distortion for nonstationary compositions.
///
/// Exit codes: 0 bound holds, 1 bound violated, 2 hypothesis unverified or
/// failed, 3 config error.
#[derive(Parser)]
#[command(name = "nbdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Validate a config and build its scenario without running an engine.
    Check {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// List builtin scenario families and their parameters.
    ListScenarios {
        /// Print the list as JSON.
        #[arg(long)]
        json_only: bool,
    },
}

#[derive(Args)]
struct Flags {
    /// Directory for report.json, steps.csv and profile.csv.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write only report.json and print it instead of the summary.
    #[arg(long)]
    json_only: bool,
}

const CONFIG_ERROR: u8 = 3;

fn load(path: &Path, flags: &Flags) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    cfg.apply_overrides(flags.samples, flags.resolution, flags.seed);
    Ok(cfg)
}

fn fail(e: &ExperimentError) -> ExitCode {
    eprintln!("nbdp: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn run(path: &Path, flags: &Flags) -> ExitCode {
    let cfg = match load(path, flags) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let dir = flags
        .output_dir
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let written = match write_outputs(&report, &dir, flags.json_only) {
        Ok(w) => w,
        Err(e) => return fail(&e.into()),
    };
    let r = &report.result;
    if flags.json_only {
        print!("{}", to_json(&report).expect("report serializes"));
    } else {
        println!("engine      {}", r.engine.as_str());
        println!("maps        {}", r.trace.n);
        println!("empirical   {}", format_float(r.empirical));
        println!("log K       {}", format_float(r.theoretical_log_k));
        println!("slack       {}", format_float(r.slack));
        if let Some(check) = &r.ratio {
            println!(
                "ratio       {} (r = {}, allowed [{}, {}])",
                format_float(check.ratio),
                format_float(check.r),
                format_float(check.lower),
                format_float(check.upper)
            );
        }
        println!("lemmas      {}", if r.lemmas.passed { "pass" } else { "fail" });
        for note in report.scenario_notes.iter().chain(&r.notes) {
            println!("note        {note}");
        }
        println!("verdict     {}", r.verdict.as_str());
        println!("report      {}", written.report.display());
        for p in written.steps.iter().chain(&written.profile) {
            println!("table       {}", p.display());
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn check(path: &Path, flags: &Flags) -> ExitCode {
    let sc = match load(path, flags).and_then(|c| c.check().map(|s| (c, s))) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let (cfg, sc) = sc;
    println!(
        "ok: {} maps of family {} (dimension {}), engine {}",
        sc.sequence.len(),
        cfg.scenario.family,
        sc.sequence.dim(),
        cfg.engine.kind.kind().as_str()
    );
    ExitCode::SUCCESS
}

fn list(json: bool) -> ExitCode {
    let fams = families();
    if json {
        println!("{}", serde_json::to_string_pretty(&fams).expect("families serialize"));
        return ExitCode::SUCCESS;
    }
    for f in fams {
        let dim = f.dimension.map_or("any".to_string(), |d| d.to_string());
        println!("{}  (dimension {dim})", f.name);
        println!("    {}", f.description);
        for (k, v) in f.params {
            println!("    {k} = {v}");
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(CONFIG_ERROR),
            };
        }
    };
    match &cli.command {
        Command::Run { config, flags } => run(config, flags),
        Command::Check { config, flags } => check(config, flags),
        Command::ListScenarios { json_only } => list(*json_only),
    }
}
