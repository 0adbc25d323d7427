#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "oscidos", version, about = "Partition function and density of states of a charged oscillator in a photon field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// coupling angle in radians, 0 <= phi < pi/2
    #[arg(long, global = true, default_value_t = 0.3)]
    pub phi: f64,
    /// oscillator frequency
    #[arg(long, global = true, default_value_t = 1.0)]
    pub eta: f64,
    /// UV cutoff in units of eta/c
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// reduced temperature rho = beta*eta/(2 pi)
    #[arg(long, global = true, conflicts_with = "rho_range")]
    pub rho: Option<f64>,
    /// a:b:n, n equally spaced values from a to b
    #[arg(long, global = true, value_parser = parse_range)]
    pub rho_range: Option<(f64, f64, usize)>,
    /// grid length of the density in the Laplace variable t
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// grid step in t
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// number of convolution terms (default: chosen from the truncation bound)
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    /// output file (default: standard output)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// seed of randomized checks
    #[arg(long, global = true, default_value_t = 20_240_601)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Strict)]
    pub tolerance_profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Fast,
    Strict,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Z0, Z(beta; gamma), Z(beta), ln Z by the Binet route and F_ex per rho
    Partition,
    /// the density on its grid, in t and in frequency, with the Lorentz residual
    Density,
    /// per-line summary: centers, widths, exact masses, measured interval masses
    Lorentz {
        /// number of lines
        #[arg(long, default_value_t = 4)]
        lines: usize,
    },
    /// lattice Riemann sums S_{l,N} and the finite-mode ratio Z_N
    Discretize {
        /// lattice levels N
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 8])]
        levels: Vec<usize>,
        /// Matsubara indices l
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 5])]
        l: Vec<usize>,
    },
    /// Laplace transform of the computed measure against the closed form
    Transform,
    /// the acceptance suite
    Verify {
        /// run only these criteria
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected a:b:n".into());
    }
    let a = parts[0].parse::<f64>().map_err(|e| format!("a: {e}"))?;
    let b = parts[1].parse::<f64>().map_err(|e| format!("b: {e}"))?;
    let n = parts[2].parse::<usize>().map_err(|e| format!("n: {e}"))?;
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    Ok((a, b, n))
}

pub enum Failure {
    Usage(String),
    Numeric(String),
    Verify,
}

impl From<oscidos::Error> for Failure {
    fn from(e: oscidos::Error) -> Self {
        match e {
            oscidos::Error::InvalidParameter { .. } => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(format!("output: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let (doc, ok) = commands::dispatch(cli)?;
    match &cli.common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            doc.write(&mut w, cli.common.format)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            doc.write(&mut w, cli.common.format)?;
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}
