//! Self-check suites: each measures a property of the solver and compares it
//! with a fixed bound. Used by the `check` command.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::evolve::{
    bound_period, continuity_residual, dispersion_time, evolve, evolve_steps, free_gaussian_width, step,
    NonlinearityKind, STEPS_PER_PERIOD,
};
use crate::grid::{make_grid, RadialField};
use crate::oracle::{compare_with_oracle, scf_oracle, OracleComparison, ScfSettings};
use crate::physical::{energy_breakdown, hamiltonian_functional, rescale_to_physical, EnergyBreakdown, PhysicalParams, PhysicalProfile};
use crate::poisson::{enclosed_charge, solve_radial_poisson};
use crate::shoot::{default_grid, solve_state, ShootSettings, UniversalSolution};
use crate::state::RadialState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Virial,
    Homogeneity,
    Poisson,
    Oracle,
    Evolution,
    Continuity,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Virial,
        Suite::Homogeneity,
        Suite::Poisson,
        Suite::Oracle,
        Suite::Evolution,
        Suite::Continuity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Virial => "virial",
            Suite::Homogeneity => "homogeneity",
            Suite::Poisson => "poisson",
            Suite::Oracle => "oracle",
            Suite::Evolution => "evolution",
            Suite::Continuity => "continuity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub suite: Suite,
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub comparison: Comparison,
}

impl CheckLine {
    fn at_most(suite: Suite, label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            suite,
            label: label.into(),
            value,
            bound,
            comparison: Comparison::AtMost,
        }
    }

    fn at_least(suite: Suite, label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            comparison: Comparison::AtLeast,
            ..Self::at_most(suite, label, value, bound)
        }
    }

    pub fn passed(&self) -> bool {
        match self.comparison {
            Comparison::AtMost => self.value <= self.bound,
            Comparison::AtLeast => self.value >= self.bound,
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        };
        write!(
            f,
            "{:<4} {:<12} {:<44} {:>12.4e} {} {:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.label,
            self.value,
            op,
            self.bound
        )
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<CheckLine>> {
    match suite {
        Suite::Virial => virial_suite(),
        Suite::Homogeneity => homogeneity_suite(),
        Suite::Poisson => poisson_suite(),
        Suite::Oracle => oracle_suite(),
        Suite::Evolution => evolution_suite(),
        Suite::Continuity => continuity_suite(),
    }
}

/// Bound state `n` on the given grid, rescaled to natural units, with its
/// energy breakdown.
pub fn natural_state(n: usize, points: usize) -> Result<(UniversalSolution<f64>, PhysicalProfile<f64>, EnergyBreakdown<f64>)> {
    let grid = make_grid(default_grid::<f64>().rho_max(), points)?;
    let sol = solve_state(n, grid, &ShootSettings::default())?;
    let profile = rescale_to_physical(&sol, &PhysicalParams::natural())?;
    let energies = energy_breakdown(&profile)?;
    Ok((sol, profile, energies))
}

/// The three relative disagreements of the eigenvalue chain:
/// `(3/2)E_grav` vs the rescaled shooting value, vs `-3 E_kin`, and vs `3 e_single`.
pub fn eigenvalue_chain(profile: &PhysicalProfile<f64>, e: &EnergyBreakdown<f64>) -> [f64; 3] {
    [
        (e.epsilon / profile.epsilon_shoot - 1.0).abs(),
        (e.epsilon_from_kinetic() / e.epsilon - 1.0).abs(),
        (3.0 * e.e_single / e.epsilon - 1.0).abs(),
    ]
}

fn virial_suite() -> Result<Vec<CheckLine>> {
    let s = Suite::Virial;
    let points = default_grid::<f64>().n_points();
    let mut out = Vec::new();
    for n in 0..=2 {
        let (_, profile, e) = natural_state(n, points)?;
        out.push(CheckLine::at_most(s, format!("n={n} |2E_kin/|E_grav| - 1|"), e.virial_residual(), 1e-3));
        let [shoot, kinetic, single] = eigenvalue_chain(&profile, &e);
        out.push(CheckLine::at_most(s, format!("n={n} eps: energy vs shooting"), shoot, 1e-3));
        out.push(CheckLine::at_most(s, format!("n={n} eps: energy vs -3 E_kin"), kinetic, 1e-3));
        out.push(CheckLine::at_most(s, format!("n={n} eps: energy vs 3 e_single"), single, 1e-3));
    }
    let (_, _, refined) = natural_state(0, 2 * points - 1)?;
    let (_, _, coarse) = natural_state(0, points)?;
    out.push(CheckLine::at_least(
        s,
        "n=0 residual ratio under 2x refinement",
        coarse.virial_residual() / refined.virial_residual(),
        3.5,
    ));
    Ok(out)
}

/// Test states of differing shape, phase structure and normalization.
pub fn homogeneity_states() -> Result<Vec<RadialState<f64>>> {
    let grid = make_grid(30.0f64, 1501)?;
    let gaussian = RadialState::gaussian(grid, 2.0, 1.0, 1.0)?;
    let psi: Vec<f64> = grid.nodes().map(|r| (1.0 - r / 3.0) * (-r / 2.0).exp()).collect();
    let mut chirped = RadialState::from_psi(grid, &psi, 1.0, 1.0)?;
    chirped
        .u
        .iter_mut()
        .zip(grid.nodes())
        .for_each(|(z, r)| *z *= Complex::from_polar(1.0, 0.2 * r));
    let wide = RadialState::gaussian(grid, 4.0, 1.0, 1.0)?.scaled(Complex::new(3.0, -1.0));
    Ok(vec![gaussian, chirped, wide])
}

/// Largest `|H[λψ] - λ²H[ψ]| / |λ²H[ψ]|` over the given factors.
pub fn homogeneity_error(state: &RadialState<f64>, params: &PhysicalParams<f64>, lambdas: &[f64]) -> Result<f64> {
    let h0 = hamiltonian_functional(state, params)?;
    let mut worst = 0.0f64;
    for &lambda in lambdas {
        let h = hamiltonian_functional(&state.scaled(Complex::new(lambda, 0.0)), params)?;
        let expected = lambda * lambda * h0;
        worst = worst.max(((h - expected) / expected).abs());
    }
    Ok(worst)
}

fn homogeneity_suite() -> Result<Vec<CheckLine>> {
    let params = PhysicalParams::natural();
    homogeneity_states()?
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let err = homogeneity_error(st, &params, &[0.1, 2.5, 10.0])?;
            Ok(CheckLine::at_most(Suite::Homogeneity, format!("state {i}: H[λψ] vs λ²H[ψ]"), err, 1e-12))
        })
        .collect()
}

/// Largest relative error of the potential of a uniform ball against its
/// closed form, over every node.
pub fn uniform_ball_error() -> Result<f64> {
    let grid = make_grid(4.0f64, 4001)?;
    let (radius, rho0, big_g) = (1.5, 2.0, 0.7);
    // the jump is sampled at its midpoint value; R falls on a node
    let ball = RadialField::from_fn(grid, |r| {
        if (r - radius).abs() < 1e-9 {
            0.5 * rho0
        } else if r < radius {
            rho0
        } else {
            0.0
        }
    })?;
    let phi = solve_radial_poisson(&ball, 4.0 * PI * big_g)?;
    let mass = 4.0 / 3.0 * PI * radius.powi(3) * rho0;
    Ok(grid.nodes().enumerate().fold(0.0f64, |worst, (i, r)| {
        let exact = if r < radius {
            -2.0 * PI * big_g * rho0 * (radius * radius - r * r / 3.0)
        } else {
            -big_g * mass / r
        };
        worst.max(((phi[i] - exact) / exact).abs())
    }))
}

/// Largest relative deviation from `-GM/r` outside a compact Gaussian shell.
pub fn exterior_tail_error() -> Result<f64> {
    let grid = make_grid(20.0f64, 4001)?;
    let (r0, w, big_g) = (3.0, 0.3, 1.3);
    let shell = RadialField::from_fn(grid, |r| (-(r - r0).powi(2) / (2.0 * w * w)).exp())?;
    let mass = 4.0 * PI * enclosed_charge(&shell)?;
    let phi = solve_radial_poisson(&shell, 4.0 * PI * big_g)?;
    Ok(grid
        .nodes()
        .enumerate()
        .filter(|&(_, r)| r > r0 + 12.0 * w)
        .fold(0.0f64, |worst, (i, r)| {
            let tail = -big_g * mass / r;
            worst.max(((phi[i] - tail) / tail).abs())
        }))
}

fn poisson_suite() -> Result<Vec<CheckLine>> {
    Ok(vec![
        CheckLine::at_most(Suite::Poisson, "uniform ball vs closed form", uniform_ball_error()?, 1e-4),
        CheckLine::at_most(Suite::Poisson, "exterior tail vs -GM/r", exterior_tail_error()?, 1e-4),
    ])
}

/// Shooting solution on the default grid compared with the SCF oracle.
pub fn oracle_comparison(n: usize) -> Result<OracleComparison<f64>> {
    let sol = solve_state(n, default_grid(), &ShootSettings::default())?;
    let oracle = scf_oracle(&ScfSettings::for_state(n))?;
    Ok(compare_with_oracle(&sol, &oracle))
}

fn oracle_suite() -> Result<Vec<CheckLine>> {
    let s = Suite::Oracle;
    let mut out = Vec::new();
    for (n, bound) in [(0, 1e-4), (1, 1e-3)] {
        let c = oracle_comparison(n)?;
        out.push(CheckLine::at_most(s, format!("n={n} gamma0 vs SCF"), c.gamma0_rel, bound));
        out.push(CheckLine::at_most(s, format!("n={n} density vs SCF"), c.density_rel, bound));
    }
    Ok(out)
}

/// Free-evolution test packet: σ = ħ = m = 1 on [0, 60] with 3001 points.
pub fn test_packet() -> Result<RadialState<f64>> {
    RadialState::gaussian(make_grid(60.0f64, 3001)?, 1.0, 1.0, 1.0)
}

/// Largest relative error of the RMS width of a free Gaussian against the
/// closed-form spreading law over `dispersion_times` dispersion times.
pub fn dispersion_error(dispersion_times: f64) -> Result<f64> {
    let s = test_packet()?;
    let td = dispersion_time(1.0, 1.0, 1.0);
    let (_, series) = evolve(&s, dispersion_times * td, td / STEPS_PER_PERIOD as f64, &NonlinearityKind::Free, 10, None)?;
    Ok(series.times.iter().zip(&series.widths).fold(0.0f64, |worst, (&t, &w)| {
        let exact = 3f64.sqrt() * free_gaussian_width(1.0, 1.0, 1.0, t);
        worst.max((w / exact - 1.0).abs())
    }))
}

/// `(norm drift, energy drift)` over `steps` steps of the test packet.
pub fn conservation_drifts(nl: &NonlinearityKind<f64>, steps: usize) -> Result<(f64, f64)> {
    let s = test_packet()?;
    let dt = dispersion_time(1.0, 1.0, 1.0) / STEPS_PER_PERIOD as f64;
    let (_, series) = evolve_steps(&s, steps, dt, nl, 1, None)?;
    Ok((series.norm_drift(), series.energy_drift()))
}

/// Stationarity of the gravitational ground state over one period at
/// `dt = T/200`: relative L∞ change of `|ψ|²`, plus norm and energy drift.
pub fn ground_state_stationarity() -> Result<(f64, f64, f64)> {
    let (_, profile, e) = natural_state(0, default_grid::<f64>().n_points())?;
    let params = profile.params;
    let period = bound_period(e.e_single, params.hbar);
    let s = RadialState::from_psi(*profile.f.grid(), profile.f.values(), params.mass, params.hbar)?;
    let nl = NonlinearityKind::gravity(&params);
    let (end, series) = evolve_steps(&s, STEPS_PER_PERIOD, period / STEPS_PER_PERIOD as f64, &nl, 1, None)?;
    let (d0, d1) = (s.density(), end.density());
    let drift = d0
        .values()
        .iter()
        .zip(d1.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / d0.max_abs();
    Ok((drift, series.norm_drift(), series.energy_drift()))
}

pub fn evolution_modes() -> Vec<(&'static str, NonlinearityKind<f64>)> {
    vec![
        ("free", NonlinearityKind::Free),
        ("cubic +1", NonlinearityKind::Cubic { kappa: 1.0, sign: 1.0 }),
        ("cubic -1", NonlinearityKind::Cubic { kappa: 1.0, sign: -1.0 }),
        ("gravity", NonlinearityKind::gravity(&PhysicalParams::natural())),
    ]
}

fn evolution_suite() -> Result<Vec<CheckLine>> {
    let s = Suite::Evolution;
    let mut out = Vec::new();
    for (name, nl) in evolution_modes() {
        let (norm, energy) = conservation_drifts(&nl, 1000)?;
        out.push(CheckLine::at_most(s, format!("{name}: norm drift, 1000 steps"), norm, 1e-8));
        out.push(CheckLine::at_most(s, format!("{name}: energy drift, 1000 steps"), energy, 1e-5));
    }
    out.push(CheckLine::at_most(s, "free width vs dispersion law, 5 t_d", dispersion_error(5.0)?, 1e-3));
    let (drift, norm, energy) = ground_state_stationarity()?;
    out.push(CheckLine::at_most(s, "ground state |psi|^2 drift, one period", drift, 1e-3));
    out.push(CheckLine::at_most(s, "ground state norm drift, one period", norm, 1e-8));
    out.push(CheckLine::at_most(s, "ground state energy drift, one period", energy, 1e-5));
    Ok(out)
}

/// Continuity residual over one step of a dispersing Gaussian taken at
/// `t = 1` with the given grid size and time step.
pub fn dispersing_continuity(points: usize, dt: f64) -> Result<f64> {
    let s = RadialState::gaussian(make_grid(60.0f64, points)?, 1.0, 1.0, 1.0)?;
    let (before, _) = evolve(&s, 1.0, dt, &NonlinearityKind::Free, usize::MAX, None)?;
    let after = step(&before, dt, &NonlinearityKind::Free)?;
    continuity_residual(&before, &after)
}

/// Residual for the real ground-state profile against itself one step later.
pub fn stationary_continuity() -> Result<f64> {
    let (_, profile, _) = natural_state(0, default_grid::<f64>().n_points())?;
    let s = RadialState::from_psi(*profile.f.grid(), profile.f.values(), 1.0, 1.0)?;
    continuity_residual(&s, &s)
}

fn continuity_suite() -> Result<Vec<CheckLine>> {
    let s = Suite::Continuity;
    let coarse = dispersing_continuity(1501, 0.02)?;
    let fine = dispersing_continuity(3001, 0.01)?;
    let h = 60.0 / 3000.0;
    Ok(vec![
        CheckLine::at_most(s, "real stationary profile", stationary_continuity()?, 1e-6),
        CheckLine::at_most(s, "dispersing Gaussian / (dt^2 + dr^2)", fine / (0.01f64.powi(2) + h * h), 1e-2),
        CheckLine::at_least(s, "refinement ratio (dt, dr halved)", coarse / fine, 3.5),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for suite in [Suite::Poisson, Suite::Homogeneity, Suite::Continuity] {
            for line in run_suite(suite).unwrap() {
                assert!(line.passed(), "{line}");
            }
        }
    }

    #[test]
    fn line_formatting() {
        let l = CheckLine::at_least(Suite::Virial, "ratio", 4.0, 3.5);
        assert!(l.passed());
        assert!(l.to_string().starts_with("PASS virial"));
        let l = CheckLine::at_most(Suite::Poisson, "err", 1.0, 0.5);
        assert!(l.to_string().starts_with("FAIL"));
    }
}
