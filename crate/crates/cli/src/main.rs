//! Command-line front end: spectrum tables, diagnostics, approximation
//! ladders and oracle comparisons, all written as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fiberspec::bv_approx::ApproximationLadder;
use fiberspec::report::{g12, Csv};
use fiberspec::spectral_grid::cross_section_modes;
use fiberspec::{
    diagnose, eigenpair_convergence, eigenvalue, enumerate, read_profile, CelerityProfile, CrossSection,
    DiagnoseOptions, Layer, WellInterval,
};

#[derive(Parser)]
#[command(name = "fiberspec", version, about = "Fiber eigenpairs of layered operators -div(c(y) grad)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every fiber eigenvalue up to --lmax, optionally classified by sector.
    #[command(after_help = "CSV columns: k,mu,ell,lambda and, with --eps, sector (guided|non-guided|residual).")]
    Spectrum(SpectrumArgs),
    /// Layer masses and amplitude diagnostics for every eigenpair up to --lmax.
    #[command(after_help = "CSV columns: k,mu,ell,lambda,sector,mass,R_omega,min_r2,max_gap.\n\
        The summary (family infima, mass floor, fitted decay exponent) goes to stderr or --summary.")]
    Diagnose(DiagnoseArgs),
    /// Piecewise-constant approximation ladder and eigenpair convergence.
    #[command(after_help = "CSV columns: n,lambda_n,err_lambda,err_u_sup,err_flux_sup.")]
    Approx(ApproxArgs),
    /// Solver eigenvalues against the finite-difference oracle.
    #[command(after_help = "CSV columns: k,mu,ell,lambda,lambda_fd,rel_error.")]
    Compare(CompareArgs),
}

#[derive(Args)]
struct Common {
    /// Profile file (TOML with `type`, `H` and representation arrays).
    #[arg(long)]
    profile: PathBuf,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    /// Cross-section, `interval:<L>` or `box:<L1>,<L2>`; lengths accept `pi`.
    #[arg(long, default_value = "interval:pi")]
    cross: String,
    /// Largest eigenvalue to list.
    #[arg(long)]
    lmax: f64,
    /// Sector margin; adds the sector column.
    #[arg(long)]
    eps: Option<f64>,
    /// Well threshold used for the guided sector.
    #[arg(long)]
    c1: Option<f64>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "interval:pi")]
    cross: String,
    #[arg(long)]
    lmax: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    c1: Option<f64>,
    /// Layer `a,b` with 0 <= a < b <= H.
    #[arg(long, value_parser = parse_pair)]
    layer: (f64, f64),
    /// Cross-section window `a,b`; repeat once per side, or give one for all sides.
    #[arg(long, value_parser = parse_pair)]
    window: Vec<(f64, f64)>,
    /// Equal intervals of the eigenfunction grid (profile knots are added).
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Summary path; standard error when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    ell: usize,
    /// Numbers of pieces, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4,16,64,256")]
    ns: Vec<usize>,
    /// Equal intervals of the comparison grid.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "interval:pi")]
    cross: String,
    /// Number of cross-section modes.
    #[arg(long, default_value_t = 3)]
    kmax: usize,
    /// Eigenvalues per mode.
    #[arg(long, default_value_t = 10)]
    num: usize,
    /// Interior nodes of the finite-difference grid.
    #[arg(long, default_value_t = 8192)]
    oracle_n: usize,
    /// Relative tolerance reported as pass/fail in the summary.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_summary(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn load(common: &Common) -> Result<CelerityProfile> {
    Ok(read_profile(&common.profile)?)
}

fn well_for(profile: &CelerityProfile, c1: Option<f64>) -> Result<Option<WellInterval>> {
    match c1 {
        Some(c) => match profile.find_well(c)? {
            Some(w) => Ok(Some(w)),
            None => bail!("no well for c1 = {c}"),
        },
        None => Ok(None),
    }
}

fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let profile = load(&args.common)?;
    let cs = CrossSection::parse(&args.cross)?;
    if args.c1.is_some() && args.eps.is_none() {
        bail!("--c1 needs --eps");
    }
    let well = well_for(&profile, args.c1)?;
    let table = enumerate(&profile, &cs, args.lmax, args.eps, well.as_ref())?;
    emit(args.common.out.as_ref(), &table.to_csv())
}

fn diagnose_cmd(args: &DiagnoseArgs) -> Result<()> {
    let profile = load(&args.common)?;
    let cs = CrossSection::parse(&args.cross)?;
    let well = well_for(&profile, args.c1)?;
    let sides = match &cs {
        CrossSection::Interval { .. } => 1,
        CrossSection::Box { lengths } => lengths.len(),
    };
    let mut layer = Layer::new(args.layer.0, args.layer.1);
    match args.window.len() {
        0 => {}
        1 => layer = layer.with_window(vec![args.window[0]; sides]),
        n if n == sides => layer = layer.with_window(args.window.clone()),
        n => bail!("{n} windows given for a cross-section with {sides} sides"),
    }
    layer.validate(profile.height())?;
    let table = enumerate(&profile, &cs, args.lmax, Some(args.eps), well.as_ref())?;
    let opts = DiagnoseOptions { eps: args.eps, well, layer, grid: args.grid };
    let report = diagnose(&profile, &table, &opts)?;
    emit(args.common.out.as_ref(), &report.to_csv())?;
    emit_summary(args.summary.as_ref(), &report.summary())
}

fn approx(args: &ApproxArgs) -> Result<()> {
    let profile = load(&args.common)?;
    if args.ns.is_empty() || args.ns.contains(&0) {
        bail!("--ns needs positive piece counts");
    }
    let ladder = ApproximationLadder::new(&profile, &args.ns)?;
    let table = eigenpair_convergence(&profile, args.mu, args.ell, &args.ns, args.grid)?;
    let mut s = format!("target lambda = {}\n", g12(table.lambda));
    s.push_str(&format!("target TV = {}\n", g12(profile.total_variation())));
    for ((n, err), tv) in ladder.ns.iter().zip(&ladder.sup_errors).zip(&ladder.tvs) {
        s.push_str(&format!("n = {n}: sup |c_n - c| = {}, TV = {}\n", g12(*err), g12(*tv)));
    }
    let orders = table.observed_orders();
    s.push_str(&format!(
        "observed orders (lambda, u, flux) = {}, {}, {}\n",
        g12(orders[0]),
        g12(orders[1]),
        g12(orders[2])
    ));
    emit(args.common.out.as_ref(), &table.to_csv())?;
    emit_summary(args.summary.as_ref(), &s)
}

fn compare_cmd(args: &CompareArgs) -> Result<()> {
    let profile = load(&args.common)?;
    let cs = CrossSection::parse(&args.cross)?;
    let modes = cross_section_modes(&cs, args.kmax)?;
    let mut csv = Csv::new(&["k", "mu", "ell", "lambda", "lambda_fd", "rel_error"]);
    let (mut worst, mut worst_at) = (0.0f64, (0, 0));
    for m in &modes.modes {
        let solver: Vec<f64> = (1..=args.num).map(|l| eigenvalue(&profile, m.mu, l)).collect::<fiberspec::Result<_>>()?;
        let oracle = fiberspec::fd_spectrum(&profile, m.mu, args.num, args.oracle_n)?;
        let rep = fiberspec::compare(&solver, &oracle, args.tol)?;
        for (i, ((s, o), e)) in solver.iter().zip(&oracle).zip(&rep.rel_errors).enumerate() {
            csv.row(&[m.k.to_string(), g12(m.mu), (i + 1).to_string(), g12(*s), g12(*o), g12(*e)]);
            if *e > worst {
                worst = *e;
                worst_at = (m.k, i + 1);
            }
        }
    }
    let verdict = if worst <= args.tol { "PASS" } else { "FAIL" };
    let s = format!(
        "oracle N = {}, worst relative error {} at (k, ell) = ({}, {}), tolerance {}: {verdict}\n",
        args.oracle_n,
        g12(worst),
        worst_at.0,
        worst_at.1,
        g12(args.tol)
    );
    emit(args.common.out.as_ref(), &csv.finish())?;
    emit_summary(args.summary.as_ref(), &s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Diagnose(a) => diagnose_cmd(a),
        Command::Approx(a) => approx(a),
        Command::Compare(a) => compare_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.downcast_ref::<fiberspec::Error>().is_some_and(fiberspec::Error::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
