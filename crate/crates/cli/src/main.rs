use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lognls_cli::commands::{failure_json, print_table, run, Command};
use lognls_cli::config::parse_config;

#[derive(Parser)]
#[command(name = "lognls", version, about = "Logarithmic NLS with a delta potential: ground states, dynamics, stability")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Analytic identity suite on the sampled peak-Gausson.
    Verify,
    /// Nehari-constrained descent and comparison with the analytic profile.
    Groundstate,
    /// Ground eigenpair of the delta Hamiltonian.
    Spectrum,
    /// Standing-wave trajectory with conservation diagnostics.
    Evolve,
    /// Perturbation experiment around the standing wave.
    Stability,
    /// Continuation over the (omega, gamma) lists.
    Sweep,
}

#[derive(Args)]
struct Overrides {
    /// key = value file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega: Option<String>,
    #[arg(long = "L", global = true)]
    half_width: Option<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    dt: Option<String>,
    #[arg(long = "T", global = true)]
    t_final: Option<String>,
    #[arg(long = "m-reg", global = true)]
    m_reg: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    /// phase_kick | amplitude_scale | bump | random_h1
    #[arg(long, global = true)]
    perturbation: Option<String>,
    #[arg(long = "output-dir", global = true)]
    output_dir: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        [
            ("gamma", &self.gamma),
            ("omega", &self.omega),
            ("L", &self.half_width),
            ("n", &self.n),
            ("dt", &self.dt),
            ("T", &self.t_final),
            ("m_reg", &self.m_reg),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("epsilon", &self.epsilon),
            ("perturbation", &self.perturbation),
            ("output_dir", &self.output_dir),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

fn fail(json: serde_json::Value) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(&json).expect("plain JSON"));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match &cli.overrides.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => return fail(failure_json(&[], Some(("config", &format!("{}: {e}", path.display()))))),
        },
        None => String::new(),
    };
    let config = match parse_config(&text, &cli.overrides.pairs()) {
        Ok(config) => config,
        Err(e) => return fail(failure_json(&[], Some(("config", &e.to_string())))),
    };
    let command = match cli.command {
        Sub::Verify => Command::Verify,
        Sub::Groundstate => Command::Groundstate,
        Sub::Spectrum => Command::Spectrum,
        Sub::Evolve => Command::Evolve,
        Sub::Stability => Command::Stability,
        Sub::Sweep => Command::Sweep,
    };
    match run(command, &config) {
        Ok(checks) => {
            print_table(&checks, std::io::stdout()).expect("stdout");
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                let json = failure_json(&checks, None);
                let _ = std::fs::write(
                    config.output_dir.join("failures.json"),
                    serde_json::to_string_pretty(&json).expect("plain JSON") + "\n",
                );
                fail(json)
            }
        }
        Err(e) => fail(failure_json(&[], Some((command.name(), &e.to_string())))),
    }
}
