use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use warmup_lab::harness::{
    cli_constants, cli_experiment, cli_lemmas, cli_run, cli_verify, emit_report, output_root, parse_cert_arg,
};
use warmup_lab::theory::write_reports_csv;
use warmup_lab::Result;

#[derive(Parser)]
#[command(name = "warmup-lab", version, about = "(H0,H1)-smoothness and warm-up laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a TOML experiment config (sweeps run in parallel).
    Run {
        config: PathBuf,
        /// Worker threads; defaults to all hardware threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a canned experiment and print its markdown report.
    Experiment { name: String },
    /// Print the problem's certificate as JSON.
    Constants { problem: PathBuf },
    /// Check a certificate numerically on points from the problem's region.
    Verify {
        problem: PathBuf,
        /// H0,H1[,f_star[,rho]]; defaults to the closed-form certificate.
        #[arg(long)]
        cert: Option<String>,
        #[arg(long, default_value_t = 500)]
        points: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Gradient-bound and descent-lemma checks, as CSV on stdout.
    Lemmas {
        problem: PathBuf,
        #[arg(long, default_value_t = 500)]
        points: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Aggregate run directories into a markdown table.
    Report {
        ids: Vec<String>,
        /// Also write the effective step-size CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Run { config, jobs } => {
            for r in cli_run(&config, jobs)? {
                println!(
                    "{}  {:?} after {} iterations  {}",
                    r.run_id,
                    r.summary.stop_reason,
                    r.summary.iters,
                    r.artifacts.summary.parent().map(|p| p.display().to_string()).unwrap_or_default()
                );
            }
        }
        Cmd::Experiment { name } => {
            let rep = cli_experiment(&name, &output_root(None))?;
            println!("{}", rep.markdown);
            for f in &rep.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Cmd::Constants { problem } => println!("{}", serde_json::to_string_pretty(&cli_constants(&problem)?)?),
        Cmd::Verify { problem, cert, points, tol } => {
            let cert = cert.as_deref().map(parse_cert_arg).transpose()?;
            let rep = cli_verify(&problem, cert, points, tol)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
            if !rep.passed() {
                eprintln!("{} violation(s)", rep.violations.len());
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::Lemmas { problem, points, steps } => {
            let reports = cli_lemmas(&problem, points, steps)?;
            write_reports_csv(&reports, std::io::stdout().lock())?;
            if reports.iter().any(|r| !r.passed()) {
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::Report { ids, csv } => {
            let rep = emit_report(&output_root(None), &ids)?;
            print!("{}", rep.markdown);
            if let Some(path) = csv {
                std::fs::write(path, rep.steps_csv)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
