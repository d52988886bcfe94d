//! `sng`: solve, rescale and evolve Schrödinger–Newton bound states.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand};
use sn_core::checks::{run_suite, Suite};
use sn_core::evolve::{bound_period, dispersion_time, STEPS_PER_PERIOD};
use sn_core::physical::{energy_breakdown, rescale_to_physical, PhysicalParams, G_SI, HBAR_SI, NUCLEON_MASS_KG};
use sn_core::shoot::{
    scan_brackets, shoot_gamma0, ShootSettings, DEFAULT_CAP, DEFAULT_POINTS, DEFAULT_RHO_MAX, DEFAULT_TOL,
};
use sn_core::{make_grid, Error, NonlinearityKind, RadialState, UniversalSolution};

use error::CliError;
use output::{
    density_table, profile_table, series_table, to_json, universal_table, GridRecord, Outputs, RescaleRecord,
    StateRecord,
};

#[derive(Debug, Parser)]
#[command(name = "sng", version, about = "Schrödinger–Newton bound states and dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the bound state with n nodes of the universal system.
    Solve(SolveArgs),
    /// Find the bound states n = 0..=n_max.
    Spectrum(SpectrumArgs),
    /// Rescale a solved state to physical units and report its energies.
    Rescale(RescaleArgs),
    /// Evolve a Gaussian packet or a solved state in time.
    Evolve(EvolveArgs),
    /// Run self-check suites.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Outer radius of the universal grid.
    #[arg(long, default_value_t = DEFAULT_RHO_MAX)]
    rho_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Bisection tolerance on γ₀.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Number of radial nodes.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// JSON summary (standard output when omitted).
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// CSV of rho, f_star, g_star.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    n_max: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// JSON array of summaries (standard output when omitted).
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Directory receiving one `state_<n>.csv` per state.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct UnitArgs {
    /// ħ = G = m = N = 1.
    #[arg(long, conflicts_with_all = ["mass_kg", "n_particles", "hbar", "g"])]
    natural: bool,
    /// Particle mass in kg (nucleon by default).
    #[arg(long)]
    mass_kg: Option<f64>,
    /// Number of particles.
    #[arg(long)]
    n_particles: Option<f64>,
    /// Reduced Planck constant in J s.
    #[arg(long)]
    hbar: Option<f64>,
    /// Gravitational constant in m³ kg⁻¹ s⁻².
    #[arg(long)]
    g: Option<f64>,
}

impl UnitArgs {
    fn params(&self) -> Result<PhysicalParams<f64>, CliError> {
        if self.natural {
            return Ok(PhysicalParams::natural());
        }
        Ok(PhysicalParams::new(
            self.mass_kg.unwrap_or(NUCLEON_MASS_KG),
            self.n_particles.unwrap_or(1.0),
            self.hbar.unwrap_or(HBAR_SI),
            self.g.unwrap_or(G_SI),
        )?)
    }
}

#[derive(Debug, Args)]
struct RescaleArgs {
    /// JSON written by `solve`.
    #[arg(long)]
    in_json: PathBuf,
    #[command(flatten)]
    units: UnitArgs,
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// CSV of r_m, f, phi.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("initial").required(true).args(["gaussian_sigma", "from"])))]
#[command(group(ArgGroup::new("nonlinearity").required(true).args(["free", "cubic", "gravity"])))]
struct EvolveArgs {
    /// Start from a Gaussian packet with this per-axis width (m).
    #[arg(long)]
    gaussian_sigma: Option<f64>,
    /// Start from the state in a `solve` JSON, rescaled with the unit flags.
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long)]
    free: bool,
    /// Cubic nonlinearity ±κ|ψ|²; needs --kappa and --sign.
    #[arg(long, requires_all = ["kappa", "sign"])]
    cubic: bool,
    /// Self-gravity of the N particles.
    #[arg(long)]
    gravity: bool,
    /// Cubic coupling κ (J m³).
    #[arg(long)]
    kappa: Option<f64>,
    /// Sign of the cubic term, +1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    sign: Option<f64>,
    #[command(flatten)]
    units: UnitArgs,
    /// Time step (s); defaults to 1/200 of the dispersion time or bound period.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    observe_every: usize,
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Directory for `snapshot_<k>.csv` density files.
    #[arg(long, default_value = "snapshots")]
    snapshot_dir: PathBuf,
    /// Outer radius of the Gaussian grid in units of sigma.
    #[arg(long, default_value_t = 60.0)]
    r_max_sigmas: f64,
    /// Grid points for the Gaussian packet.
    #[arg(long, default_value_t = 3001)]
    points: usize,
    /// CSV of t, norm, energy, rms_width (standard output when omitted).
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Comma-separated suites: virial, homogeneity, poisson, oracle, evolution, continuity.
    #[arg(long, value_delimiter = ',', value_parser = parse_suite)]
    suites: Vec<Suite>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn settings(grid: &GridArgs) -> ShootSettings<f64> {
    ShootSettings {
        tol: grid.tol,
        ..ShootSettings::default()
    }
}

fn solve_one(n: usize, args: &GridArgs) -> Result<UniversalSolution<f64>, CliError> {
    let grid = make_grid(args.rho_max, args.points)?;
    Ok(sn_core::solve_state(n, grid, &settings(args))?)
}

fn cmd_solve(args: &SolveArgs, out: &mut Outputs) -> Result<(), CliError> {
    let sol = solve_one(args.n, &args.grid)?;
    out.file_or_stdout(args.out_json.as_deref(), to_json(&StateRecord::from_solution(&sol))?);
    if let Some(path) = &args.out_csv {
        out.file(path, universal_table(&sol).to_bytes()?);
    }
    Ok(())
}

fn worker_count() -> Result<usize, CliError> {
    match std::env::var("SNG_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::BadInput(format!("SNG_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn cmd_spectrum(args: &SpectrumArgs, out: &mut Outputs) -> Result<(), CliError> {
    let grid = make_grid(args.grid.rho_max, args.grid.points)?;
    let s = settings(&args.grid);
    let brackets = scan_brackets(s.scan_range, s.scan_steps, grid, s.cap)?;
    let jobs: Vec<_> = (0..=args.n_max)
        .map(|n| brackets.iter().find(|b| b.n == n).copied().ok_or(Error::NoBracket { n }))
        .collect::<Result<_, _>>()?;
    let workers = worker_count()?.min(jobs.len());
    let mut results: Vec<Option<sn_core::Result<UniversalSolution<f64>>>> = (0..jobs.len()).map(|_| None).collect();
    thread::scope(|scope| {
        let chunks = results.chunks_mut(jobs.len().div_ceil(workers));
        let job_chunks = jobs.chunks(jobs.len().div_ceil(workers));
        for (slots, batch) in chunks.zip(job_chunks) {
            scope.spawn(move || {
                for (slot, b) in slots.iter_mut().zip(batch) {
                    *slot = Some(shoot_gamma0(b.n, (b.lo, b.hi), grid, s.tol, s.cap));
                }
            });
        }
    });
    let states = results
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect::<sn_core::Result<Vec<_>>>()?;
    for pair in states.windows(2) {
        if !(pair[1].gamma0 < pair[0].gamma0) {
            return Err(Error::NotConverged(format!(
                "γ₀ not strictly decreasing between n = {} and n = {}",
                pair[0].n, pair[1].n
            ))
            .into());
        }
    }
    let records: Vec<_> = states.iter().map(StateRecord::from_solution).collect();
    out.file_or_stdout(args.out_json.as_deref(), to_json(&records)?);
    if let Some(dir) = &args.csv_dir {
        for sol in &states {
            out.file(&dir.join(format!("state_{}.csv", sol.n)), universal_table(sol).to_bytes()?);
        }
    }
    Ok(())
}

fn read_state(path: &Path) -> Result<UniversalSolution<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))?;
    let rec: StateRecord = serde_json::from_str(&text)?;
    let GridRecord { rho_max, points } = rec.grid;
    let grid = make_grid(rho_max, points).map_err(|e| CliError::BadInput(e.to_string()))?;
    let sol = UniversalSolution::from_gamma0(rec.n, rec.gamma0, rec.bracket_width, grid, DEFAULT_CAP)
        .map_err(|e| CliError::BadInput(e.to_string()))?;
    if sol.node_count != rec.n {
        return Err(CliError::BadInput(format!(
            "γ₀ = {} gives {} nodes, record claims n = {}",
            rec.gamma0, sol.node_count, rec.n
        )));
    }
    Ok(sol)
}

fn cmd_rescale(args: &RescaleArgs, out: &mut Outputs) -> Result<(), CliError> {
    let sol = read_state(&args.in_json)?;
    let profile = rescale_to_physical(&sol, &args.units.params()?)?;
    let energies = energy_breakdown(&profile)?;
    out.file_or_stdout(args.out_json.as_deref(), to_json(&RescaleRecord::new(&profile, &energies))?);
    if let Some(path) = &args.out_csv {
        out.file(path, profile_table(&profile).to_bytes()?);
    }
    Ok(())
}

fn cmd_evolve(args: &EvolveArgs, out: &mut Outputs) -> Result<(), CliError> {
    let params = args.units.params()?;
    let nl = if args.free {
        NonlinearityKind::Free
    } else if args.cubic {
        NonlinearityKind::cubic(args.kappa.unwrap_or(0.0), args.sign.unwrap_or(1.0))?
    } else {
        NonlinearityKind::gravity(&params)
    };
    let (state, natural_dt) = match (&args.from, args.gaussian_sigma) {
        (Some(path), _) => {
            let sol = read_state(path)?;
            let profile = rescale_to_physical(&sol, &params)?;
            let energies = energy_breakdown(&profile)?;
            let state = RadialState::from_psi(*profile.f.grid(), profile.f.values(), params.mass, params.hbar)?;
            (state, bound_period(energies.e_single, params.hbar))
        }
        (None, Some(sigma)) => {
            if !(sigma > 0.0) || !(args.r_max_sigmas > 0.0) {
                return Err(CliError::BadInput("Gaussian width and extent must be positive".into()));
            }
            let grid = make_grid(args.r_max_sigmas * sigma, args.points)?;
            let state = RadialState::gaussian(grid, sigma, params.mass, params.hbar)?;
            (state, dispersion_time(sigma, params.mass, params.hbar))
        }
        (None, None) => unreachable!("clap enforces an initial state"),
    };
    let dt = args.dt.unwrap_or(natural_dt / STEPS_PER_PERIOD as f64);
    let (_, series) = sn_core::evolve_steps(&state, args.steps, dt, &nl, args.observe_every, args.snapshot_every)?;
    out.file_or_stdout(args.out_csv.as_deref(), series_table(&series).to_bytes()?);
    for (k, (_, density)) in series.snapshots.iter().enumerate() {
        out.file(
            &args.snapshot_dir.join(format!("snapshot_{k:05}.csv")),
            density_table(density).to_bytes()?,
        );
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    let suites = if args.suites.is_empty() { Suite::ALL.to_vec() } else { args.suites.clone() };
    let mut failures = 0;
    for suite in suites {
        match run_suite(suite) {
            Ok(lines) => {
                for line in lines {
                    if !line.passed() {
                        failures += 1;
                    }
                    println!("{line}");
                }
            }
            Err(e) => {
                failures += 1;
                println!("FAIL {:<12} {e}", suite.name());
            }
        }
    }
    if failures > 0 {
        return Err(CliError::ChecksFailed(failures));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut out = Outputs::default();
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, &mut out)?,
        Command::Spectrum(a) => cmd_spectrum(a, &mut out)?,
        Command::Rescale(a) => cmd_rescale(a, &mut out)?,
        Command::Evolve(a) => cmd_evolve(a, &mut out)?,
        Command::Check(a) => cmd_check(a)?,
    }
    out.flush()
}

fn subcommand_usage() -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let name = std::env::args().nth(1).unwrap_or_default();
    match cmd.find_subcommand_mut(&name) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::InvalidValue | ErrorKind::ValueValidation) {
                eprintln!("\n{}", subcommand_usage());
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sng: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
