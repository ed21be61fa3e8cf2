mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CertifyArgs, FactorArgs, Out, VerifyArgs};
use output::{CliError, Format};

/// Interval exchanges, piecewise contractions and their natural codings.
///
/// Scalars are exact: rationals `p/q` or quadratic surds written as
/// `(a+b*sqrt(d))/c`. Map files are JSON with `"type": "iet"` or `"pc"`.
#[derive(Parser)]
#[command(name = "ietpc", version)]
struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

type Positive = std::num::NonZeroUsize;

#[derive(Subcommand)]
enum Command {
    /// Natural coding of a point.
    Code {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        len: Positive,
        /// Follow a PC orbit through outward-rounded enclosures at this precision.
        #[arg(long, value_parser = clap::value_parser!(u32).range(8..))]
        bits: Option<u32>,
    },
    /// Factor complexity p(1..=kmax), counted on a coding or by partition refinement.
    Complexity {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "1000")]
        len: Positive,
        #[arg(long)]
        kmax: Positive,
        /// Count new points of the backward discontinuity orbits instead (IETs only).
        #[arg(long)]
        refinement: bool,
    },
    /// Infinite distinct orbit condition checked to a finite depth.
    Idoc {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "200")]
        depth: Positive,
    },
    /// Build the ½-affine contraction whose codings match those of an IET.
    Construct {
        #[arg(long)]
        map: PathBuf,
        /// Gap-system depth N.
        #[arg(long, default_value = "64")]
        depth: Positive,
        /// Start of the dense orbit; must be an endpoint of an image interval.
        #[arg(long)]
        x: Option<String>,
        /// Also write enclosures, provenance and the gap table here.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Compare codings of the constructed contraction and the IET on gap midpoints.
    Verify {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "64")]
        depth: Positive,
        #[arg(long, default_value = "64")]
        len: Positive,
        #[arg(long, default_value = "20")]
        samples: Positive,
        #[arg(long)]
        x: Option<String>,
    },
    /// Rabbit constant enclosure and the δ = 1 − R/2 check.
    Rabbit {
        #[arg(long, default_value = "60", value_parser = clap::value_parser!(u32).range(1..))]
        bits: u32,
        /// Length of the golden-rotation coding used for δ.
        #[arg(long, default_value = "200")]
        len: Positive,
    },
    /// Certify that the coding of a point is eventually periodic.
    Certify {
        #[arg(long)]
        map: PathBuf,
        /// Certify against the enclosure family recorded by `construct`.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long, default_value = "0")]
        x: String,
        #[arg(long, default_value = "5000")]
        budget: Positive,
        /// Outward-rounded arithmetic at this precision instead of exact.
        #[arg(long, value_parser = clap::value_parser!(u32).range(8..))]
        bits: Option<u32>,
    },
    /// Empirical estimate of the IET factor from orbit statistics.
    Factor {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long, default_value = "0")]
        x: String,
        #[arg(long, default_value = "50000")]
        m: Positive,
        #[arg(long, default_value = "1001")]
        grid: Positive,
        /// Steps spent ruling out a periodic orbit first.
        #[arg(long, default_value = "2000")]
        budget: Positive,
    },
    /// Certify periodicity over seeded random slope-½ 2-PCs.
    Sweep {
        #[arg(long, default_value = "100")]
        count: Positive,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long, default_value = "5000")]
        budget: Positive,
        #[arg(long, default_value = "1")]
        jobs: Positive,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = Out {
        format: cli.format,
        path: cli.output.as_deref(),
        force: cli.force,
    };
    match cli.command {
        Command::Code { map, x, len, bits } => commands::code(&out, &map, &x, len.get(), bits),
        Command::Complexity {
            map,
            x,
            len,
            kmax,
            refinement,
        } => commands::complexity_cmd(&out, &map, &x, len.get(), kmax.get(), refinement),
        Command::Idoc { map, depth } => commands::idoc(&out, &map, depth.get()),
        Command::Construct { map, depth, x, sidecar } => {
            commands::construct(&out, &map, depth.get(), x.as_deref(), sidecar.as_deref())
        }
        Command::Verify {
            map,
            depth,
            len,
            samples,
            x,
        } => commands::verify(
            &out,
            VerifyArgs {
                map: &map,
                depth: depth.get(),
                len: len.get(),
                samples: samples.get(),
                seed: x.as_deref(),
            },
        ),
        Command::Rabbit { bits, len } => commands::rabbit(&out, bits, len.get()),
        Command::Certify {
            map,
            sidecar,
            x,
            budget,
            bits,
        } => commands::certify(
            &out,
            CertifyArgs {
                map: &map,
                sidecar: sidecar.as_ref(),
                x: &x,
                budget: budget.get(),
                bits,
            },
        ),
        Command::Factor {
            map,
            sidecar,
            x,
            m,
            grid,
            budget,
        } => commands::factor(
            &out,
            FactorArgs {
                map: &map,
                sidecar: sidecar.as_ref(),
                x: &x,
                m: m.get(),
                grid: grid.get(),
                budget: budget.get(),
            },
        ),
        Command::Sweep {
            count,
            seed,
            budget,
            jobs,
        } => commands::sweep(&out, count.get(), seed, budget.get(), jobs.get()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let detail = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::invalid("argument", detail).to_json());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
