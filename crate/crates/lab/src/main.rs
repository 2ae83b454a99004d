use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use holonomy_core::bath::{rates_from_bath, OhmicBath};
use holonomy_core::closed_form::revival_times;
use holonomy_core::revivals::{find_revivals_numeric, scan_generalized_loop};
use holonomy_lab::csv::format_g12;
use holonomy_lab::report::{optimal_time_report, report_csv};
use holonomy_lab::{run_experiment, Experiment, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(name = "holonomy-lab", version, about = "Holonomic tripod gate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write its CSV.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Locate the fidelity maximum near the first revival time.
    OptimalReport {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List revival times, closed form next to the numerical maxima.
    Revivals {
        #[arg(long, default_value_t = 5)]
        k_max: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Print the rate table of an Ohmic bath in config format.
    Rates {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        omega_c: f64,
        #[arg(long)]
        temperature: f64,
    },
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    figure: Option<String>,
    #[arg(long)]
    tau_min: Option<String>,
    #[arg(long)]
    tau_max: Option<String>,
    #[arg(long)]
    tau_points: Option<String>,
    #[arg(long)]
    lambda2: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    omega_c: Option<String>,
    #[arg(long)]
    temperature: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), LabError> {
        let pairs = [
            ("figure", &self.figure),
            ("tau_min", &self.tau_min),
            ("tau_max", &self.tau_max),
            ("tau_points", &self.tau_points),
            ("lambda2", &self.lambda2),
            ("preset", &self.preset),
            ("kappa", &self.kappa),
            ("omega_c", &self.omega_c),
            ("temperature", &self.temperature),
            ("samples", &self.samples),
            ("steps", &self.steps),
            ("seed", &self.seed),
            ("out", &self.out),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(())
    }
}

fn load(config: &Path, overrides: &Overrides) -> Result<ExperimentConfig, LabError> {
    let mut cfg = ExperimentConfig::from_file(config)?;
    overrides.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let out = run_experiment(&cfg)?;
            eprintln!(
                "wrote {} rows to {}",
                out.table.rows.len(),
                cfg.out.display()
            );
            if !out.failures.is_empty() {
                for f in &out.failures {
                    eprintln!("row omega_tau={} omitted: {}", format_g12(f.omega_tau), f.message);
                }
                return Err(LabError::Numerical(holonomy_core::Error::IntegrationDiverged(format!(
                    "{} grid point(s) failed",
                    out.failures.len()
                ))));
            }
        }
        Command::OptimalReport { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let exp = Experiment::new(cfg.clone())?;
            let entries = optimal_time_report(&exp)?;
            std::fs::write(&cfg.out, report_csv(&entries)).map_err(|source| LabError::Io {
                path: cfg.out.clone(),
                source,
            })?;
            for e in &entries {
                eprintln!(
                    "{}: maximum at {} (tau* = {}, offset {})",
                    e.label,
                    format_g12(e.tau_max),
                    format_g12(e.tau_star),
                    format_g12(e.offset())
                );
            }
        }
        Command::Revivals { k_max, n } => {
            if k_max == 0 {
                return Err(LabError::config("k-max", "must be at least 1"));
            }
            if n == 0 {
                return Err(LabError::config("n", "must be at least 1"));
            }
            let closed = revival_times(k_max, n, 1.0)?;
            let lo = 0.5 * closed[0];
            let hi = closed[closed.len() - 1] + 0.5 * closed[0];
            println!("k,omega_tau_closed_form,omega_tau_numeric,offset,mean_fidelity");
            if n == 1 {
                for r in find_revivals_numeric(lo, hi, 1.0)?.iter().take(k_max as usize) {
                    println!(
                        "{},{},{},{},{}",
                        r.k,
                        format_g12(r.closed_form_omega_tau),
                        format_g12(r.omega_tau),
                        format_g12(r.offset()),
                        format_g12(r.mean_fidelity)
                    );
                }
            } else {
                let points = ((hi - lo) / 0.05).ceil() as usize + 1;
                let maxima = scan_generalized_loop(n, 1.0, lo, hi, points)?;
                let revivals: Vec<_> = maxima.iter().filter(|m| m.is_revival(1e-8)).collect();
                for (k, tc) in closed.iter().enumerate() {
                    let nearest = revivals
                        .iter()
                        .min_by(|a, b| (a.omega_tau - tc).abs().total_cmp(&(b.omega_tau - tc).abs()));
                    match nearest {
                        Some(m) => println!(
                            "{},{},{},{},{}",
                            k + 1,
                            format_g12(*tc),
                            format_g12(m.omega_tau),
                            format_g12(m.omega_tau - tc),
                            format_g12(m.mean_fidelity)
                        ),
                        None => eprintln!("no numerical revival found near {}", format_g12(*tc)),
                    }
                }
                for m in maxima.iter().filter(|m| !m.is_revival(1e-8)) {
                    eprintln!(
                        "side maximum at {} with mean fidelity {}",
                        format_g12(m.omega_tau),
                        format_g12(m.mean_fidelity)
                    );
                }
            }
        }
        Command::Rates {
            kappa,
            omega_c,
            temperature,
        } => {
            let bath = OhmicBath::new(kappa, omega_c, temperature)
                .map_err(|e| LabError::config("rates", e.to_string()))?;
            print!("{}", rates_from_bath(&bath)?.to_config());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
