//! Experiment runner. One subcommand per pipeline; each writes a schema-1 JSON report and optional CSV
//! series. Report, CSV and algebra/action/frame document layouts are listed in README.md.

mod config;
mod error;
mod experiments;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::Params;
use error::CliError;
use report::{emit_plotdata, write_report, ExperimentReport};

/// Finite-dimensional checks of noncommutative covering constructions.
#[derive(Parser)]
#[command(name = "nccover", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-bump partition of unity on the circle grid
    Bumps(Params),
    /// Translate sums of lifted bumps on a window of the line, and the windowed line frame
    LinePartition(Params),
    /// Bump partition on the n-fold cover of the circle
    CircleCover(Params),
    /// Galois frame of the Z_m × Z_n cover of a rational torus
    TorusCover(Params),
    /// Torus area from the Dirac spectrum: 2π·∮D^{-2} against 1/Im τ
    TorusArea(Params),
    /// Canonical-map solver and rank verdict on finite actions (presets boring, conjugation, trivial, random)
    GaloisCheck(Params),
    /// Von Neumann orthogonalization of random commuting partitions
    VnOrth(Params),
    /// Star product and its twisted realization on truncated torus modes
    StarCheck(Params),
    /// Leibniz rule for Grassmannian connections on random projective modules
    ConnectionCheck(Params),
    /// Lift of Dirac operators to boring and circle covers
    DiracLift(Params),
    /// Singular-value asymptotics: circle integral, lift scaling, norm inequalities
    Dixmier(Params),
    /// Galois frame of the n-th root extension of a unitary
    RootExtension(Params),
    /// Root extension over the mapping cone of z ↦ zⁿ
    MappingCone(Params),
    /// Sheets of the n-th root extension over an SU(2) sample grid
    Su2Disconnect(Params),
}

type Pipeline = fn(&Params) -> Result<ExperimentReport, CliError>;

impl Command {
    fn dispatch(&self) -> (&'static str, &Params, Pipeline) {
        use experiments as e;
        match self {
            Command::Bumps(p) => ("bumps", p, e::bumps),
            Command::LinePartition(p) => ("line-partition", p, e::line_partition),
            Command::CircleCover(p) => ("circle-cover", p, e::circle_cover),
            Command::TorusCover(p) => ("torus-cover", p, e::torus_cover),
            Command::TorusArea(p) => ("torus-area", p, e::torus_area),
            Command::GaloisCheck(p) => ("galois-check", p, e::galois_check),
            Command::VnOrth(p) => ("vn-orth", p, e::vn_orth),
            Command::StarCheck(p) => ("star-check", p, e::star_check),
            Command::ConnectionCheck(p) => ("connection-check", p, e::connection_check),
            Command::DiracLift(p) => ("dirac-lift", p, e::dirac_lift),
            Command::Dixmier(p) => ("dixmier", p, e::dixmier),
            Command::RootExtension(p) => ("root-extension", p, e::root_extension),
            Command::MappingCone(p) => ("mapping-cone", p, e::mapping_cone),
            Command::Su2Disconnect(p) => ("su2-disconnect", p, e::su2_disconnect),
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let (name, flags, pipeline) = cli.command.dispatch();
    let params = Params::resolve(flags, name)?;
    let start = Instant::now();
    let mut report = pipeline(&params)?;
    report.wall_time = start.elapsed();
    if let Some(preset) = &params.preset {
        report.param("preset", preset);
    }
    write_report(&report, params.output.as_deref())?;
    if let Some(dir) = &params.plot_dir {
        emit_plotdata(&report, dir)?;
    }
    eprintln!("{}", report.summary());
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
