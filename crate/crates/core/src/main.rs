use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qubit_decoherence::cli::report::{report, write_report};
use qubit_decoherence::cli::sweep::{sweep, write_trace, SweepSpec};
use qubit_decoherence::cli::verify::{self, VerifyOptions};
use qubit_decoherence::cli::Preset;
use qubit_decoherence::two_qubit::Family;
use qubit_decoherence::{CoefficientModel, Result};

/// Two qubits in independent Lorentzian reservoirs beyond the rotating-wave
/// approximation.
#[derive(Parser)]
#[command(name = "decoherence", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence on the (γt, β²) grid as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle checks; exits non-zero if any fails.
    Verify {
        /// Presets to check (default: all).
        #[arg(long, value_delimiter = ',')]
        preset: Vec<Preset>,
        #[arg(long)]
        rel_tol: Option<f64>,
        /// Drop the π/(8ω₀) step cap.
        #[arg(long)]
        uncapped: bool,
    },
    /// Death, revival and plateau summary per β².
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disentangling coefficients, channel entries and Γₖ along one
    /// trajectory as CSV.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "B")]
    preset: Preset,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "phi")]
    state: Family,
    /// Single β² value instead of a grid.
    #[arg(long)]
    beta2: Option<f64>,
    /// Phase φ of η.
    #[arg(long, default_value_t = 0.0)]
    phase: f64,
    /// End of the time grid in units of 1/γ.
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    #[arg(long, default_value_t = 201)]
    t_steps: usize,
    #[arg(long, default_value_t = 51)]
    beta2_steps: usize,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Accepted for compatibility; output never depends on a seed.
    #[arg(long)]
    seedless: bool,
    /// Drop the counter-rotating coefficients (exploration only).
    #[arg(long)]
    truncated_rwa: bool,
    /// Drop the π/(8ω₀) step cap.
    #[arg(long)]
    uncapped: bool,
}

impl Common {
    fn spec(&self) -> Result<SweepSpec> {
        let mut spec = SweepSpec::new(self.preset, self.state);
        let p = &mut spec.params;
        p.omega0 = self.omega0.unwrap_or(p.omega0);
        p.lambda = self.lambda.unwrap_or(p.lambda);
        p.gamma = self.gamma.unwrap_or(p.gamma);
        p.validate()?;
        spec.settings = qubit_decoherence::IntegratorSettings::for_params(p);
        if let Some(tol) = self.rel_tol {
            spec.settings.rel_tol = tol;
            spec.settings.abs_tol = tol;
        }
        spec.settings.oscillation_cap = !self.uncapped;
        if self.truncated_rwa {
            spec.model = CoefficientModel::TruncatedRwa;
        }
        spec.eta_phase = self.phase;
        spec.t_max = self.tmax;
        spec.t_steps = self.t_steps;
        spec.beta2_steps = self.beta2_steps;
        if let Some(b) = self.beta2 {
            spec = spec.single_beta2(b);
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep { common, out } => {
            let spec = common.spec()?;
            let surface = sweep(&spec)?;
            if let Some(e) = &surface.failure {
                eprintln!("warning: integration stopped early: {e}; remaining rows are NaN");
            }
            for w in &surface.warnings {
                eprintln!("warning: {w}");
            }
            let mut w = output(&out)?;
            surface.write_csv(&mut w, spec.params.gamma)?;
            w.flush()?;
        }
        Command::Verify {
            preset,
            rel_tol,
            uncapped,
        } => {
            let opts = VerifyOptions {
                presets: if preset.is_empty() {
                    Preset::ALL.to_vec()
                } else {
                    preset
                },
                rel_tol,
                uncapped,
            };
            let checks = verify::run(&opts);
            let mut out = io::stdout().lock();
            for c in &checks {
                writeln!(out, "{c}")?;
                if let Some(note) = &c.note {
                    eprintln!("{}: {note}", c.name);
                }
            }
            if !checks.iter().all(|c| c.passed()) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { common, out } => {
            let spec = common.spec()?;
            let surface = sweep(&spec)?;
            if let Some(e) = &surface.failure {
                eprintln!("warning: integration stopped early: {e}");
            }
            if !surface.warnings.is_empty() {
                eprintln!(
                    "warning: {} grid points have no concurrence (state outside the positive cone)",
                    surface.warnings.len()
                );
            }
            let rows = report(&surface, spec.params.gamma)?;
            let mut w = output(&out)?;
            write_report(&rows, spec.params.gamma, &mut w)?;
            w.flush()?;
        }
        Command::Trace { common, out } => {
            let spec = common.spec()?;
            let mut w = output(&out)?;
            let failure = write_trace(&spec, &mut w)?;
            w.flush()?;
            if let Some(e) = failure {
                eprintln!("warning: integration stopped early: {e}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
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
