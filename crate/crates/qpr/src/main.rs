use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpr::commands::{self, RunOptions, EXIT_INPUT};
use qpr::selftest::SelftestConfig;
use qpr::{load_instance, CliError};
use qpr_core::Engine;

#[derive(Parser)]
#[command(
    name = "qpr",
    version,
    about = "Amplitude-amplified multi-pattern recognition simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Full,
    Reduced,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "reduced")]
    engine: EngineArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "cap-factor", default_value_t = 8.0)]
    cap_factor: f64,
    #[arg(long, default_value_t = 1.2)]
    lambda: f64,
    /// Output file for JSON Lines records (default stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// One randomized search for a single feature.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        feature: Option<u64>,
        /// Overrides the instance threshold.
        #[arg(long)]
        alpha: Option<u64>,
    },
    /// Recognize every codebook feature and diff against brute force.
    Recognize {
        #[command(flatten)]
        common: Common,
    },
    /// Mean iteration counts over seeded trials for each (N, M).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Run the invariant suites.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            engine: match self.engine {
                EngineArg::Full => Engine::Full,
                EngineArg::Reduced => Engine::Reduced,
            },
            seed: self.seed,
            cap_factor: self.cap_factor,
            lambda: self.lambda,
            jobs: self.jobs,
        }
    }

    fn output(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.report {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn instance(&self) -> Result<qpr::Instance, CliError> {
        let path = self
            .instance
            .as_ref()
            .ok_or_else(|| CliError::Usage("--instance is required".into()))?;
        Ok(load_instance(path)?)
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate {
            common,
            feature,
            alpha,
        } => {
            let instance = common.instance()?;
            let mut out = common.output()?;
            commands::cmd_simulate(&instance, feature, alpha, &common.options(), &mut out)?;
            out.flush()?;
            Ok(commands::EXIT_OK)
        }
        Command::Recognize { common } => {
            let instance = common.instance()?;
            let mut out = common.output()?;
            let code = commands::cmd_recognize(&instance, &common.options(), &mut out)?;
            out.flush()?;
            Ok(code)
        }
        Command::Sweep {
            common,
            n,
            m,
            trials,
        } => {
            let mut out = common.output()?;
            commands::cmd_sweep(&n, &m, trials, &common.options(), &mut out)?;
            out.flush()?;
            Ok(commands::EXIT_OK)
        }
        Command::Selftest { common } => {
            let mut out = common.output()?;
            let config = SelftestConfig {
                seed: common.seed,
                ..Default::default()
            };
            let code = commands::cmd_selftest(&config, &mut out)?;
            out.flush()?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage errors would exit with 2, which is reserved for diffs
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() {
                EXIT_INPUT as u8
            } else {
                0
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
