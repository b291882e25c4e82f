//! `u21`: verification harness for the U(2,1) principal-series model.

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "u21", version, about = "Finite-level checks for principal series of unramified U(2,1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites.
    Verify {
        /// Suite ids (comma separated or repeated), or `all`.
        #[arg(long = "suite", value_delimiter = ',')]
        suite: Vec<String>,
        /// Corrupt the hermitian form; the unitarity suite must fail.
        #[arg(long)]
        self_test: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Dimension table of V(n) for a character.
    Dimensions {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    epsilon: Option<u64>,
    /// Levels, `a..b` inclusive or a single level.
    #[arg(long)]
    n: Option<String>,
    /// Level for the point model, or `auto`.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    window: Option<u32>,
    /// `unramified`, `e1`, `quadratic` or `c=..,u=..,cp=..,v=..`.
    #[arg(long)]
    chi: Option<String>,
    /// Two specializations of chi_1(p), `a/b,c/d`.
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    /// Directory for report.json and report.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve(common: &Common, suites: Option<Vec<String>>, self_test: bool) -> Result<RunConfig, String> {
    let mut c = RunConfig::default();
    if let Some(f) = &common.config {
        c.load_file(f)?;
    }
    let opt = |v: &Option<String>| v.clone();
    let overrides: [(&str, Option<String>); 8] = [
        ("p", common.p.map(|v| v.to_string())),
        ("epsilon", common.epsilon.map(|v| v.to_string())),
        ("n", opt(&common.n)),
        ("m", opt(&common.m)),
        ("window", common.window.map(|v| v.to_string())),
        ("chi", opt(&common.chi)),
        ("x", opt(&common.x)),
        ("budget", common.budget.map(|v| v.to_string())),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            c.set(k, &v)?;
        }
    }
    if let Some(o) = &common.out {
        c.out = Some(o.clone());
    }
    if let Some(s) = suites {
        if !s.is_empty() {
            c.set("suites", &s.join(","))?;
        }
    }
    if self_test {
        c.self_test = true;
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.command {
        Command::Verify { suite, self_test, common } => resolve(common, Some(suite.clone()), *self_test),
        Command::Dimensions { common } => resolve(common, Some(vec!["dimensions".into()]), false),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match report::run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = report::text(&report);
    print!("{text}");
    if let Some(dir) = &config.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        let written = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join("report.json"), json + "\n"))
            .and_then(|_| std::fs::write(dir.join("report.txt"), &text));
        if let Err(e) = written {
            eprintln!("cannot write reports to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
