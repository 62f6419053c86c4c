use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dps_hdg::driver::{self, PartialConfig, Scenario};

/// Coupled dual-porosity/Stokes HDG solver.
#[derive(Parser, Debug)]
#[command(name = "dps-hdg", version)]
struct Cli {
    /// mms, wellbore-vertical, wellbore-horizontal or random-perm
    scenario: Scenario,
    /// Polynomial degree
    #[arg(long)]
    k: Option<usize>,
    /// Refinement levels (mms)
    #[arg(long)]
    levels: Option<usize>,
    /// Interior penalty, default 10 k^2
    #[arg(long)]
    beta: Option<f64>,
    /// Grid intervals per unit length (coarsest level for mms)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    kappa_f: Option<f64>,
    #[arg(long)]
    kappa_m: Option<f64>,
    /// Exchange shape factor
    #[arg(long)]
    sigma: Option<f64>,
    /// Interface slip coefficient
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    fracture_pressure: Option<f64>,
    #[arg(long)]
    matrix_pressure: Option<f64>,
    /// LO,HI
    #[arg(long, value_delimiter = ',', num_args = 2)]
    kappa_f_range: Option<Vec<f64>>,
    /// LO,HI
    #[arg(long, value_delimiter = ',', num_args = 2)]
    kappa_m_range: Option<Vec<f64>>,
    /// Seed of the permeability sampler
    #[arg(long)]
    seed: Option<u64>,
    /// Static condensation; `--condense false` solves the full system
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    condense: Option<bool>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with the same keys (a previous manifest.toml works)
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn partial(self) -> PartialConfig {
        let pair = |v: Option<Vec<f64>>| v.map(|v| [v[0], v[1]]);
        PartialConfig {
            scenario: Some(self.scenario),
            k: self.k,
            beta: self.beta,
            levels: self.levels,
            n: self.n,
            mu: self.mu,
            kappa_f: self.kappa_f,
            kappa_m: self.kappa_m,
            sigma: self.sigma,
            alpha: self.alpha,
            fracture_pressure: self.fracture_pressure,
            matrix_pressure: self.matrix_pressure,
            kappa_f_range: pair(self.kappa_f_range),
            kappa_m_range: pair(self.kappa_m_range),
            seed: self.seed,
            condense: self.condense,
            out: self.out,
        }
    }
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with the other configuration errors
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let file = match cli.config.as_deref().map(PartialConfig::from_file).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let config = match cli.partial().over(file).resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let outcome = match driver::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for l in &outcome.levels {
        println!(
            "{:>6} cells  {:>8} unknowns  {:>7} global  residual {:.1e}  {:.2}s",
            l.cells, l.unknowns, l.global_unknowns, l.relative_residual, l.seconds
        );
    }
    if let Some(table) = &outcome.rates {
        for (_, norms) in dps_hdg::mms::TABLE_LAYOUTS {
            print!("{}", table.to_csv(norms));
        }
    }
    if let Some(s) = outcome.mean_speed {
        println!("mean speed {s:.4e}");
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    println!("{:?}: wrote {} files to {}", outcome.status, outcome.files.len(), config.out.display());
    ExitCode::from(outcome.status.exit_code() as u8)
}
