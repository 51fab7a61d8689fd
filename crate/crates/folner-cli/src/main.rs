//! `folner` — generate symbolic streams over amenable carriers and test
//! them for normality, block complexity, and tiling-related statistics.
//!
//! Exit codes: 0 success/verdict passed, 1 usage or construction error,
//! 2 a tested property failed.

mod build;
mod config;
mod run;

use clap::Parser;

use config::CommonArgs;
use run::Command;

#[derive(Parser)]
#[command(name = "folner", version, about = "Normality and complexity along subsets of amenable groups")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Subcommand)]
enum Cmd {
    /// Evaluate a generator along the canonical enumeration.
    Generate(CommonArgs),
    /// Test a stream for normality along a subset.
    Normality(CommonArgs),
    /// Block-complexity profile over a growing chain of domains.
    Complexity(CommonArgs),
    /// Preservation bundle: all normality modes, densities, and a profile.
    Experiment(CommonArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (cmd, args) = match cli.command {
        Cmd::Generate(a) => (Command::Generate, a),
        Cmd::Normality(a) => (Command::Normality, a),
        Cmd::Complexity(a) => (Command::Complexity, a),
        Cmd::Experiment(a) => (Command::Experiment, a),
    };
    let cfg = match args.resolve() {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    };
    let outcome = match cfg.group.to_ascii_lowercase().as_str() {
        "n" => run::execute(&folner::NatAdd, cmd, &cfg),
        "z" => run::execute(&folner::IntAdd, cmd, &cfg),
        "z2" | "z^2" => run::execute(&folner::VecAdd::<2>::new(), cmd, &cfg),
        "z3" | "z^3" => run::execute(&folner::VecAdd::<3>::new(), cmd, &cfg),
        "nmul" => run::execute(&folner::NatMul, cmd, &cfg),
        "perm" => run::execute(&folner::FinPerm::new(), cmd, &cfg),
        other => Err(format!("unknown group {other} (expected n, z, z2, z3, nmul, or perm)")),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}
