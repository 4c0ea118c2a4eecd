mod commands;
mod output;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use adelic_heights::{Error, ErrorClass};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use commands::{Grid, Report};

#[derive(Parser)]
#[command(name = "adelic-heights", version, about = "Heights, energies and Legendre duals of toric adelic families")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Numerical tolerance for inexact steps
    #[arg(long, global = true, env = "ADELIC_HEIGHTS_TOL", default_value_t = 1e-9, value_parser = positive)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// `--input` accepts a path, inline JSON, or `-` for stdin.
#[derive(clap::Args)]
struct Input {
    #[arg(long)]
    input: String,
}

#[derive(Subcommand)]
enum Command {
    /// Global height, roof function and positivity of a family
    Height(Input),
    /// Global energy of a singular family against a reference
    Energy(Input),
    /// Legendre dual of a concave function, sampled on a grid
    Dual {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<Grid>,
    },
    /// Monge-Ampere measure of a concave function
    Ma(Input),
    /// Positivity class of a divisor with local functions
    NefCheck(Input),
    /// Checks the product formula for a nonzero rational
    ProductFormula {
        #[arg(allow_hyphen_values = true)]
        rational: String,
    },
    /// Height of the alpha family by both routes against the closed form
    ExampleAlpha {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value = "inf")]
        place: String,
    },
    /// Samples of the local functions and of the roof
    Plot {
        #[command(flatten)]
        input: Input,
        /// Grid for the local functions
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<Grid>,
        /// Grid for the roof function
        #[arg(long, allow_hyphen_values = true)]
        roof_grid: Option<Grid>,
    },
    /// Worked examples on divisorial spaces
    CoreDemo,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

fn read_input(input: &Input) -> Result<Value, Error> {
    let text = if input.input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Parse(format!("stdin: {e}")))?;
        s
    } else if input.input.trim_start().starts_with(['{', '[']) {
        input.input.clone()
    } else {
        std::fs::read_to_string(&input.input).map_err(|e| Error::Parse(format!("{}: {e}", input.input)))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn run(cli: &Cli) -> Result<Report, Error> {
    match &cli.command {
        Command::Height(i) => commands::height(&read_input(i)?),
        Command::Energy(i) => commands::energy(&read_input(i)?),
        Command::Dual { input, grid } => commands::dual(&read_input(input)?, grid.as_ref()),
        Command::Ma(i) => commands::ma(&read_input(i)?),
        Command::NefCheck(i) => commands::nef(&read_input(i)?),
        Command::ProductFormula { rational } => commands::product_formula(rational),
        Command::ExampleAlpha { alpha, place } => commands::example_alpha(alpha, place, cli.tol),
        Command::Plot { input, grid, roof_grid } => commands::plot(&read_input(input)?, grid.as_ref(), roof_grid.as_ref()),
        Command::CoreDemo => commands::core_demo(cli.tol),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Schema => 2,
        ErrorClass::Precondition => 3,
        ErrorClass::Divergence => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let text = match cli.format {
        Format::Json => {
            let pretty = serde_json::to_string_pretty(&output::round_all(report.json)).expect("serializable");
            pretty + "\n"
        }
        Format::Csv => report.csv,
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::Precondition("x".into())), 3);
        assert_eq!(exit_code(&Error::DivergesToPlusInfinity("x".into())), 4);
    }

    #[test]
    fn grids() {
        let g: Grid = "-1:1".parse().unwrap();
        assert_eq!(g.n, commands::DEFAULT_POINTS);
        let g: Grid = "-1/2:1/2:3".parse().unwrap();
        assert_eq!(g.points(), vec![-0.5, 0.0, 0.5]);
        assert!("1:0:5".parse::<Grid>().is_err());
        assert!("0:1:1".parse::<Grid>().is_err());
        assert!("0".parse::<Grid>().is_err());
    }

    #[test]
    fn positive_tolerance() {
        assert!(positive("1e-9").is_ok());
        assert!(positive("0").is_err());
        assert!(positive("-1").is_err());
        assert!(positive("inf").is_err());
    }
}
