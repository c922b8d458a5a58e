use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use udn_cli::{run, Command, ExperimentSpec, Format};

#[derive(Parser)]
#[command(name = "udn", version, about = "Blockage, spectral efficiency and UL/DL allocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// LOS distances from building statistics.
    Blockage {
        /// Building statistics CSV.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Analytic SE bounds and asymptotes over a density grid.
    Se {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo SE at one or more densities.
    Simulate {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal UL/DL allocation sweep, with and without decoupling.
    Allocate {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo SE sweep over both tiers and directions.
    Sweep {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Target {
    /// `mmw`, `muw` or `both`.
    #[arg(long)]
    tier: Option<String>,
    /// `dl`, `ul` or `both`.
    #[arg(long)]
    direction: Option<String>,
    /// Comma-separated BS-to-user density ratios.
    #[arg(long = "lambda-hat")]
    lambda_hat: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Extra key=value overrides, applied last.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn spec(command: Command, common: Common, mut flags: Vec<String>) -> ExperimentSpec {
    if let Some(s) = common.seed {
        flags.push(format!("seed={s}"));
    }
    if let Some(t) = common.threads {
        flags.push(format!("threads={t}"));
    }
    flags.extend(common.overrides);
    ExperimentSpec {
        command,
        config_path: common.config,
        overrides: flags,
        output_path: common.output,
        format: match common.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
    }
}

fn target_flags(t: Target) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(v) = t.tier {
        out.push(format!("tier={v}"));
    }
    if let Some(v) = t.direction {
        out.push(format!("direction={v}"));
    }
    if let Some(v) = t.lambda_hat {
        out.push(format!("lambda_hat_list={v}"));
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match cli.command {
        Cmd::Blockage { input, common } => {
            let flags = input.map(|p| format!("input_csv={}", p.display())).into_iter().collect();
            spec(Command::Blockage, common, flags)
        }
        Cmd::Se { target, common } => spec(Command::Se, common, target_flags(target)),
        Cmd::Simulate { target, common } => spec(Command::Simulate, common, target_flags(target)),
        Cmd::Allocate { common } => spec(Command::Allocate, common, Vec::new()),
        Cmd::Sweep { target, common } => spec(Command::Sweep, common, target_flags(target)),
    };
    match run(&spec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("udn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
