mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use twistjet::{Error, ErrorClass};

#[derive(Parser, Debug)]
#[command(name = "twistjet", version, about = "Twisted prolongations, symmetries and conservation laws")]
pub struct Cli {
    /// Problem file (TOML).
    #[arg(short, long, global = true, value_name = "FILE")]
    pub problem: Option<PathBuf>,

    /// Machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Flow {
    /// Twist form name.
    #[arg(long)]
    pub twist: Option<String>,
    /// Use the untwisted prolongation.
    #[arg(long)]
    pub standard: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prolong a field to order k.
    Prolong {
        #[arg(long)]
        field: String,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        twist: Option<String>,
    },
    /// Fail unless the first prolongation annihilates the Lagrangian.
    CheckSymmetry {
        #[arg(long)]
        field: String,
        #[arg(long)]
        twist: Option<String>,
    },
    /// Euler-Lagrange equations, twisted when a twist is given.
    El {
        #[arg(long)]
        twist: Option<String>,
    },
    /// Solve the equations for the highest derivatives.
    NormalForm {
        #[arg(long)]
        twist: Option<String>,
    },
    /// Conserved quantity or current of a twisted symmetry.
    Conserved {
        #[arg(long)]
        field: String,
        #[arg(long)]
        twist: String,
    },
    /// Symmetry residual and verdict.
    Residual {
        #[arg(long)]
        field: String,
        #[command(flatten)]
        flow: Flow,
    },
    /// Compatibility condition of a twist form.
    Compat {
        #[arg(long)]
        twist: String,
    },
    /// Bracket of two fields.
    Bracket {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        fields: Vec<String>,
        /// Gauge matrix R; fields are mapped by R⁻¹ before bracketing.
        #[arg(long)]
        deformed: Option<String>,
    },
    /// Structure constants, derived series and solvability.
    Algebra {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        fields: Vec<String>,
        #[arg(long)]
        deformed: Option<String>,
    },
    /// Check R⁻¹D_iR + R⁻¹Λ_iR = 0.
    GaugeCheck {
        #[arg(long)]
        gauge: String,
        #[arg(long)]
        twist: String,
    },
    /// Integrate the (twisted) flow with RK4 and report drift.
    Simulate {
        /// Twisted flow; without it the standard flow is integrated.
        #[arg(long)]
        twist: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ic: Option<Vec<f64>>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Quantities to watch: names from [quantities] or J_<field>.
        #[arg(long, value_delimiter = ',')]
        watch: Vec<String>,
        /// Write the trajectory as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Central differences against the symbolic partial derivative.
    FdCheck {
        /// Expression; defaults to the Lagrangian.
        #[arg(long)]
        expr: Option<String>,
        #[arg(long)]
        var: String,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the problem file with canonical expressions.
    Fmt,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 1,
        ErrorClass::Parse => 2,
        ErrorClass::Domain => 3,
        ErrorClass::Numeric => 4,
    }
}

fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Usage => "usage",
        ErrorClass::Parse => "parse",
        ErrorClass::Domain => "domain",
        ErrorClass::Numeric => "numeric",
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fail(e: &Error) -> ExitCode {
    let class = e.class();
    eprintln!(
        "error[{}:{}] {}",
        class_name(class),
        e.kind(),
        one_line(&e.to_string())
    );
    ExitCode::from(exit_code(class))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                    fail(&Error::Usage(first.to_string()))
                }
            };
        }
    };
    match commands::run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.json_string());
            } else {
                print!("{}", report.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
