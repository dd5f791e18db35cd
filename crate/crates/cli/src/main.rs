use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fujita::sweep::audit::{eigen_report, kernel_audit, threshold_report, EigenConfig, KernelAuditConfig, ThresholdConfig};
use fujita::sweep::{run_config, run_sweep, RunConfig, SweepConfig};
use fujita::Error;

/// Semilinear heat equations on rotationally symmetric manifolds.
#[derive(Parser)]
#[command(name = "fujita", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and classify it.
    Simulate {
        config: PathBuf,
        /// Directory for trajectory, summary and plot.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a parameter sweep and compare against the analytic thresholds.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Calibrate the numerical heat kernel and check its decay rate.
    KernelAudit { config: PathBuf },
    /// Solve the ground-state equation and report residual and envelope.
    Eigen {
        config: PathBuf,
        /// Also write the profile as `r,phi` CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Print the analytic verdict for a model and nonlinearity.  Accepts a
    /// file path or an inline JSON object.
    Thresholds { params: String },
}

fn read_config(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate { config, out } => {
            let cfg = RunConfig::from_json(&read_config(&config)?)?;
            let record = run_config(&cfg, Some(&out))?;
            println!(
                "verdict: {}  t_est: {}  sup_final: {:.6e}  analytic: {}  agreement: {}",
                record.verdict.label(),
                record.verdict.t_est().map_or("NA".into(), |t| format!("{t:.6}")),
                record.sup_final,
                record.analytic.map_or("none", |k| k.label()),
                record.agreement()
            );
        }
        Command::Sweep { config, out } => {
            let cfg = SweepConfig::from_json(&read_config(&config)?)?;
            let report = run_sweep(&cfg, Some(&out))?;
            let bad = report.disagreements_outside_band();
            println!(
                "{} points, {} disagreements outside the {:.0}% band; results in {}",
                report.records.len(),
                bad.len(),
                100.0 * cfg.band,
                out.display()
            );
            if let Some(rows) = report.boundary(cfg.base.manifold.build()?.lambda_star()) {
                for row in rows {
                    println!("  row {:.4}: analytic {:.4}, transitions {:?}", row.y, row.analytic, row.transitions);
                }
            }
        }
        Command::KernelAudit { config } => {
            let cfg = KernelAuditConfig::from_json(&read_config(&config)?)?;
            print_json(&kernel_audit(&cfg)?);
        }
        Command::Eigen { config, profile } => {
            let cfg = EigenConfig::from_json(&read_config(&config)?)?;
            let report = eigen_report(&cfg)?;
            println!(
                "lambda: {}  ode_residual: {:.3e}  c_low: {:.6}  c_up: {:.6}  envelope_ratio: {:.4}",
                report.lambda, report.ode_residual, report.c_low, report.c_up, report.envelope_ratio
            );
            if let Some(path) = profile {
                let mut text = String::from("r,phi\n");
                for (r, v) in report.nodes.iter().zip(&report.profile) {
                    text.push_str(&format!("{r:.9e},{v:.9e}\n"));
                }
                std::fs::write(path, text)?;
            }
        }
        Command::Thresholds { params } => {
            let text = if params.trim_start().starts_with('{') {
                params
            } else {
                read_config(Path::new(&params))?
            };
            let cfg = ThresholdConfig::from_json(&text)?;
            match threshold_report(&cfg)? {
                Some(v) => print_json(&v),
                None => println!("no nonlinearity: every solution is global"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
