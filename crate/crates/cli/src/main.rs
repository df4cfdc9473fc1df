use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use lpnt::binunf::binunf_bounded;
use lpnt::pattern::initial_rules;
use lpnt_cli::{load, render_json, render_text, run, CliError, OutputFormat, RunConfig};

/// Prove non-termination of logic programs by unfolding pattern rules.
#[derive(Parser)]
#[command(name = "lpnt", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    analyze: Analyze,
}

#[derive(Args)]
struct Analyze {
    /// Program files or directories of `.pl` files.
    inputs: Vec<PathBuf>,
    /// Per-query time limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Maximum number of unfolding rounds.
    #[arg(long = "max-iter", default_value_t = 10)]
    max_iter: usize,
    /// Maximum number of derived pattern rules.
    #[arg(long = "max-rules", default_value_t = 100_000)]
    max_rules: usize,
    /// Validate witnesses with this many resolution steps (0 disables).
    #[arg(long, default_value_t = 0)]
    validate: usize,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Print every stored pattern rule to stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the bounded binary unfolding of a program.
    Binunf {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Print the initial pattern rules of a program.
    Initial { file: PathBuf },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<u8, CliError> {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    match cli.command {
        Some(Command::Binunf { file, depth }) => {
            let p = load(&file)?;
            for r in binunf_bounded(&p, depth).iter() {
                let _ = writeln!(stdout, "{r}");
            }
            Ok(0)
        }
        Some(Command::Initial { file }) => {
            let p = load(&file)?;
            for r in initial_rules(&p) {
                let _ = writeln!(stdout, "{r}");
            }
            Ok(0)
        }
        None => {
            let a = cli.analyze;
            if !(a.timeout > 0.0 && a.timeout.is_finite()) {
                return Err(CliError::ZeroTimeout);
            }
            let cfg = RunConfig {
                inputs: a.inputs,
                timeout: Duration::from_secs_f64(a.timeout),
                max_iterations: a.max_iter,
                max_rules: a.max_rules,
                validate_steps: a.validate,
                output: if a.json {
                    OutputFormat::Json
                } else {
                    OutputFormat::Text
                },
                trace: a.trace,
            };
            let res = run(&cfg, &mut io::stderr())?;
            for e in &res.errors {
                eprintln!("skipped {e}");
            }
            let text = match cfg.output {
                OutputFormat::Text => render_text(&res.rows),
                OutputFormat::Json => render_json(&res.rows) + "\n",
            };
            let _ = stdout.write_all(text.as_bytes());
            Ok(res.exit_code() as u8)
        }
    }
}
