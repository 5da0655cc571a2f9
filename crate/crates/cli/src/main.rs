use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use relci::run::{run, Command, Options, Outcome, Which};
use relci::scenario::{ScenarioFile, WindowSpec};
use relci_core::{PrimeField, Rationals};

#[derive(Parser, Debug)]
#[command(name = "relci", version, about = "Ext, Tor and their comparison over relative complete intersections")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// characteristic of the coefficient field (overrides the scenario)
    #[arg(long = "char", global = true, value_name = "P")]
    characteristic: Option<u32>,

    /// compute over the rationals
    #[arg(long, global = true, conflicts_with = "characteristic")]
    rational: bool,

    #[arg(long, global = true)]
    max_hdeg: Option<i32>,

    #[arg(long, global = true)]
    max_ideg: Option<i32>,

    /// number of series coefficients to report (at most max_hdeg + 1)
    #[arg(long, global = true, value_name = "T")]
    trunc: Option<i32>,

    /// write the JSON report here (`-` for stdout)
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// include operator and comparison matrices in the report
    #[arg(long, global = true)]
    verbose_operators: bool,

    /// record wall-clock time in the report (makes it nondeterministic)
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Koszul-regularity of f and f'
    CheckRegular { scenario: PathBuf },
    /// Tor tables for one sequence
    Tor {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = WhichArg::F)]
        which: WhichArg,
    },
    /// Ext tables for one sequence
    Ext {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = WhichArg::F)]
        which: WhichArg,
    },
    /// Poincare and Bass series truncations
    Series {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = WhichArg::Both)]
        which: WhichArg,
    },
    /// compare Q/(f) with Q/(f') through the perturbation pipeline
    VerifyT2 { scenario: PathBuf },
    /// compare Q/(f) with Q when f lies in I ann(M) (f' = 0)
    VerifyT9 { scenario: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WhichArg {
    F,
    FPrime,
    Both,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let (command, path, which) = match &cli.command {
        Cmd::CheckRegular { scenario } => (Command::CheckRegular, scenario, WhichArg::Both),
        Cmd::Tor { scenario, which } => (Command::Tor, scenario, *which),
        Cmd::Ext { scenario, which } => (Command::Ext, scenario, *which),
        Cmd::Series { scenario, which } => (Command::Series, scenario, *which),
        Cmd::VerifyT2 { scenario } => (Command::VerifyT2, scenario, WhichArg::Both),
        Cmd::VerifyT9 { scenario } => (Command::VerifyT9, scenario, WhichArg::Both),
    };
    let file = ScenarioFile::load(path)?;
    let window = WindowSpec {
        max_hdeg: cli.max_hdeg.unwrap_or(file.window.max_hdeg),
        max_ideg: cli.max_ideg.unwrap_or(file.window.max_ideg),
    };
    let opts = Options {
        which: match which {
            WhichArg::F => Which::F,
            WhichArg::FPrime => Which::FPrime,
            WhichArg::Both => Which::Both,
        },
        window,
        truncation: cli.trunc,
        verbose_operators: cli.verbose_operators,
        timing: cli.timing,
    };
    let name = file
        .name
        .clone()
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let characteristic = cli.characteristic.unwrap_or_else(|| file.characteristic());
    let outcome: Outcome = if cli.rational || characteristic == 0 {
        run(Rationals, command, &file, &name, &opts)?
    } else {
        let field = PrimeField::new(characteristic).with_context(|| format!("--char {}", characteristic))?;
        run(field, command, &file, &name, &opts)?
    };
    match &cli.json {
        Some(p) if p.as_os_str() == "-" => print!("{}", outcome.report.to_json()),
        Some(p) => {
            std::fs::write(p, outcome.report.to_json()).with_context(|| format!("writing {}", p.display()))?;
            print!("{}", outcome.text);
        }
        None => print!("{}", outcome.text),
    }
    Ok(outcome.report.passed)
}
