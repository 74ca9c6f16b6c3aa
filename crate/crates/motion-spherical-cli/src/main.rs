//! Command-line front end for the motion-spherical library.
//!
//! One verb per invocation; every verb writes a single tabular artifact
//! (CSV by default, JSON with --format json) to --out or stdout.  Identical
//! configurations produce byte-identical artifacts.  MOTION_SPHERICAL_THREADS
//! caps the worker pool used by the parallel verbs.

mod settings;
mod svg;
mod table;
mod verbs;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use settings::{Common, Settings};
use verbs::{
    DecomposeArgs, ExtendArgs, ExtendOpts, JetArgs, JetOpts, OracleArgs, PhiArgs, Route,
    TransformArgs, VerifyArgs,
};

#[derive(Parser, Debug)]
#[command(
    name = "motion-spherical",
    version,
    about = "Matrix-valued spherical analysis on the motion groups of R^3 and R^4",
    after_help = "Examples:\n  \
        motion-spherical eigs --n 4 --nu 0.5 --mu 0.5\n  \
        motion-spherical spectrum --n 3 --mu 1 --rho 2\n  \
        motion-spherical transform --n 3 --mu 1 --rho-max 3 --rho-steps 30 --out v.csv\n  \
        motion-spherical decompose --n 3 --mu 1 --in v.csv --format json\n  \
        motion-spherical extend --n 4 --nu 1 --mu 1 --builder cutoff --svg field.svg\n  \
        motion-spherical verify --check multiplier-property"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Branch eigenvalues lambda_s with weight multiplicities
    Eigs,
    /// Embedded spectrum points (xi1, xi2) over the rho grid
    Spectrum,
    /// Matrix spherical function entries along a radial ray
    Phi(PhiArgs),
    /// Spherical transform of a generator profile on the rho grid
    Transform(TransformArgs),
    /// gamma_i recovery from transform samples, per grid point
    Decompose(DecomposeArgs),
    /// Two-variable extension field on a rectangular grid
    Extend(ExtendArgs),
    /// Maclaurin coefficient table from branch jet data
    Jet(JetArgs),
    /// Exact rational cross-checks of the closed-form layer
    Oracle(OracleArgs),
    /// The invariant suite with measured residuals
    Verify(VerifyArgs),
}

fn run(cli: &Cli) -> Result<bool> {
    let st = Settings::resolve(&cli.common)?;
    let (table, ok) = match &cli.verb {
        Verb::Eigs => (verbs::eigs(&st)?, true),
        Verb::Spectrum => (verbs::spectrum(&st)?, true),
        Verb::Phi(args) => (verbs::phi(&st, args.samples)?, true),
        Verb::Transform(args) => {
            let route = match args.route.as_str() {
                "quadrature" => Route::Quadrature,
                _ => Route::Exact,
            };
            (verbs::transform(&st, args.gamma.as_deref(), args.decay, route)?, true)
        }
        Verb::Decompose(args) => (
            verbs::decompose(&st, args.input.as_deref(), args.gamma.as_deref(), args.decay)?,
            true,
        ),
        Verb::Extend(args) => {
            let opts = ExtendOpts {
                builder: &args.builder,
                gamma: args.gamma.as_deref(),
                decay: args.decay,
                xi1_max: args.xi1_max,
                xi2_max: args.xi2_max,
                samples: args.samples,
                jet_in: args.jet_in.as_deref(),
                svg: args.svg.as_deref(),
            };
            (verbs::extend(&st, &opts)?, true)
        }
        Verb::Jet(args) => {
            let opts = JetOpts {
                input: args.input.as_deref(),
                synthetic: args.synthetic,
                order: args.order,
                h: args.h,
            };
            (verbs::jet(&st, &opts)?, true)
        }
        Verb::Oracle(args) => verbs::oracle(&st, args.all)?,
        Verb::Verify(args) => {
            let checks = if args.all { Vec::new() } else { args.checks.clone() };
            verbs::verify(&checks)?
        }
    };
    table.emit(st.out.as_deref(), st.json)?;
    Ok(ok)
}

fn main() -> ExitCode {
    motion_spherical::init_threads();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
