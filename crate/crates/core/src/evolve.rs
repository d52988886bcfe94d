//! Crank–Nicolson time evolution of spherically symmetric states with a
//! free, cubic or self-gravitating nonlinearity.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::RadialField;
use crate::physical::{gravity_energy, gravity_potential, PhysicalParams};
use crate::real::Real;
use crate::state::RadialState;

/// Largest relative change of the potential between predictor and
/// corrector before a step is rejected.
pub const MAX_POTENTIAL_CHANGE: f64 = 0.5;
/// Relative amplitude at the outer boundary above which a warning is logged.
pub const BOUNDARY_WARN_LEVEL: f64 = 1e-8;
/// Steps per dispersion time or per bound period for default time steps.
pub const STEPS_PER_PERIOD: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityKind<T> {
    Free,
    /// `V = sign · κ |ψ|²` with `sign = ±1`.
    Cubic { kappa: T, sign: T },
    /// Self-gravity of `n_particles` particles of mass `mass`,
    /// `V = mass · Φ` with `∇²Φ = 4π G N mass |ψ|² / 𝒩`.
    Gravity { g: T, mass: T, n_particles: T },
}

impl<T: Real> NonlinearityKind<T> {
    pub fn cubic(kappa: T, sign: T) -> Result<Self> {
        let nl = Self::Cubic { kappa, sign };
        nl.validate()?;
        Ok(nl)
    }

    pub fn gravity(params: &PhysicalParams<T>) -> Self {
        Self::Gravity {
            g: params.g,
            mass: params.mass,
            n_particles: params.n_particles,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Free => Ok(()),
            Self::Cubic { kappa, sign } => {
                if !(kappa >= T::zero()) || !kappa.is_finite() {
                    return Err(Error::InvalidArgument(format!("cubic coupling must be non-negative, got {kappa}")));
                }
                if sign != T::one() && sign != -T::one() {
                    return Err(Error::InvalidArgument(format!("cubic sign must be +1 or -1, got {sign}")));
                }
                Ok(())
            }
            Self::Gravity { g, mass, n_particles } => PhysicalParams::new(mass, n_particles, T::one(), g).map(|_| ()),
        }
    }

    fn params(&self, hbar: T) -> Option<PhysicalParams<T>> {
        match *self {
            Self::Gravity { g, mass, n_particles } => Some(PhysicalParams {
                mass,
                n_particles,
                hbar,
                g,
            }),
            _ => None,
        }
    }

    /// Potential energy at every node (zero at the origin where `u` vanishes).
    fn potential(&self, state: &RadialState<T>) -> Result<Vec<T>> {
        let n = state.u.len();
        match *self {
            Self::Free => Ok(vec![T::zero(); n]),
            Self::Cubic { kappa, sign } => Ok(state
                .grid
                .nodes()
                .zip(&state.u)
                .map(|(r, z)| if r > T::zero() { sign * kappa * z.norm_sqr() / (r * r) } else { T::zero() })
                .collect()),
            Self::Gravity { mass, .. } => {
                let params = self.params(state.hbar).expect("gravity kind");
                let phi = gravity_potential(state, &params)?;
                Ok(phi.values().iter().map(|&p| mass * p).collect())
            }
        }
    }

    /// Conserved energy of the evolution: kinetic plus the interaction
    /// functional belonging to this nonlinearity.
    pub fn energy(&self, state: &RadialState<T>) -> Result<T> {
        let kinetic = state.kinetic_energy();
        match *self {
            Self::Free => Ok(kinetic),
            Self::Cubic { kappa, sign } => {
                // (κ/2) ∫ |ψ|⁴ d³x with the same node sum that defines V
                let h = state.grid.spacing();
                let s = state
                    .grid
                    .nodes()
                    .zip(&state.u)
                    .skip(1)
                    .fold(T::zero(), |a, (r, z)| a + z.norm_sqr() * z.norm_sqr() / (r * r));
                let four_pi = T::lit(4.0) * T::PI();
                Ok(kinetic + sign * kappa / T::lit(2.0) * four_pi * h * s)
            }
            Self::Gravity { .. } => {
                let params = self.params(state.hbar).expect("gravity kind");
                Ok(kinetic + gravity_energy(state, &params)?)
            }
        }
    }

    /// Rate of the global phase ledger, `E_gravity / 𝒩` divided by ħ.
    fn phase_rate(&self, state: &RadialState<T>) -> Result<T> {
        match self.params(state.hbar) {
            Some(params) => Ok(gravity_energy(state, &params)? / state.norm() / state.hbar),
            None => Ok(T::zero()),
        }
    }
}

/// Recorded observables of an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries<T> {
    pub times: Vec<T>,
    pub norms: Vec<T>,
    pub energies: Vec<T>,
    /// Root-mean-square radius.
    pub widths: Vec<T>,
    pub snapshots: Vec<(T, RadialField<T>)>,
}

impl<T: Real> ObservableSeries<T> {
    fn new() -> Self {
        Self {
            times: Vec::new(),
            norms: Vec::new(),
            energies: Vec::new(),
            widths: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    fn record(&mut self, state: &RadialState<T>, nl: &NonlinearityKind<T>) -> Result<()> {
        self.times.push(state.time);
        self.norms.push(state.norm());
        self.energies.push(nl.energy(state)?);
        self.widths.push(state.rms_radius());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |𝒩(t)/𝒩(0) - 1|`
    pub fn norm_drift(&self) -> T {
        max_relative_drift(&self.norms)
    }

    /// `max |E(t) - E(0)| / |E(0)|`
    pub fn energy_drift(&self) -> T {
        max_relative_drift(&self.energies)
    }
}

fn max_relative_drift<T: Real>(v: &[T]) -> T {
    match v.first() {
        Some(&v0) => v.iter().fold(T::zero(), |m, &x| m.max(((x - v0) / v0).abs())),
        None => T::zero(),
    }
}

/// Dispersion time `2 m σ² / ħ` of a free Gaussian of width `σ`.
pub fn dispersion_time<T: Real>(sigma: T, mass: T, hbar: T) -> T {
    T::lit(2.0) * mass * sigma * sigma / hbar
}

/// Period `2π ħ / |E|` of a bound state with one-particle eigenvalue `E`.
pub fn bound_period<T: Real>(e_single: T, hbar: T) -> T {
    T::lit(2.0) * T::PI() * hbar / e_single.abs()
}

/// Width of a free Gaussian after time `t`: `σ(t)² = σ₀²(1 + (ħt / 2mσ₀²)²)`.
pub fn free_gaussian_width<T: Real>(sigma0: T, mass: T, hbar: T, t: T) -> T {
    let x = t / dispersion_time(sigma0, mass, hbar);
    sigma0 * (T::one() + x * x).sqrt()
}

// Solves (1 + a(2k + V_i)) x_i - a k (x_{i-1} + x_{i+1}) = rhs_i on the
// interior nodes, with x = 0 at both ends.
fn cn_solve<T: Real>(u: &[Complex<T>], v: &[T], a: Complex<T>, k: T) -> Vec<Complex<T>> {
    let n = u.len();
    let one = Complex::new(T::one(), T::zero());
    let two_k = k + k;
    let off = -a * k;
    let m = n - 2;
    let mut rhs = Vec::with_capacity(m);
    for i in 1..n - 1 {
        let d = a * (two_k + v[i]);
        rhs.push((one - d) * u[i] - off * (u[i - 1] + u[i + 1]));
    }
    // Thomas algorithm with constant off-diagonals
    let mut c_prime = vec![Complex::new(T::zero(), T::zero()); m];
    let mut d_prime = vec![Complex::new(T::zero(), T::zero()); m];
    for j in 0..m {
        let diag = one + a * (two_k + v[j + 1]);
        let (denom, prev_d) = if j == 0 {
            (diag, Complex::new(T::zero(), T::zero()))
        } else {
            (diag - off * c_prime[j - 1], d_prime[j - 1])
        };
        c_prime[j] = off / denom;
        d_prime[j] = (rhs[j] - off * prev_d) / denom;
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    for j in (0..m).rev() {
        let next = if j + 1 < m { out[j + 2] } else { Complex::new(T::zero(), T::zero()) };
        out[j + 1] = d_prime[j] - c_prime[j] * next;
    }
    out
}

/// One Crank–Nicolson step with a single predictor–corrector pass for the
/// nonlinear potential.
pub fn step<T: Real>(state: &RadialState<T>, dt: T, nl: &NonlinearityKind<T>) -> Result<RadialState<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    nl.validate()?;
    let h = state.grid.spacing();
    let k = state.hbar * state.hbar / (T::lit(2.0) * state.mass * h * h);
    let a = Complex::new(T::zero(), dt / (T::lit(2.0) * state.hbar));

    let v0 = nl.potential(state)?;
    let mut u_pred = cn_solve(&state.u, &v0, a, k);
    let (u_new, mid) = if matches!(nl, NonlinearityKind::Free) {
        let mid = state.clone();
        (u_pred, mid)
    } else {
        let half = T::lit(0.5);
        u_pred.iter_mut().zip(&state.u).for_each(|(p, &z)| *p = (*p + z) * half);
        let mid = RadialState { u: u_pred, ..state.clone() };
        let v1 = nl.potential(&mid)?;
        let scale = v0.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale > T::zero() {
            let change = v0.iter().zip(&v1).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())) / scale;
            if change > T::lit(MAX_POTENTIAL_CHANGE) {
                let suggested = dt * T::lit(MAX_POTENTIAL_CHANGE / 2.0) / change;
                return Err(Error::StepRejected {
                    dt: dt.as_f64(),
                    suggested_dt: suggested.as_f64(),
                    change: change.as_f64(),
                });
            }
        }
        (cn_solve(&state.u, &v1, a, k), mid)
    };
    let phase = state.phase + nl.phase_rate(&mid)? * dt;
    Ok(RadialState {
        u: u_new,
        time: state.time + dt,
        phase,
        ..state.clone()
    })
}

/// Evolves for `n_steps` steps of size `dt`, recording observables every
/// `observe_every` steps (and at the last step) and density snapshots every
/// `snapshot_every` steps.
pub fn evolve_steps<T: Real>(
    state: &RadialState<T>,
    n_steps: usize,
    dt: T,
    nl: &NonlinearityKind<T>,
    observe_every: usize,
    snapshot_every: Option<usize>,
) -> Result<(RadialState<T>, ObservableSeries<T>)> {
    if observe_every == 0 || snapshot_every == Some(0) {
        return Err(Error::InvalidArgument("observation cadence must be positive".into()));
    }
    let mut series = ObservableSeries::new();
    let mut current = state.clone();
    let mut warned = false;
    let observe = |s: &RadialState<T>, series: &mut ObservableSeries<T>, i: usize, warned: &mut bool| -> Result<()> {
        if i.is_multiple_of(observe_every) || i == n_steps {
            series.record(s, nl)?;
            let edge = s.boundary_amplitude();
            if !*warned && edge > T::lit(BOUNDARY_WARN_LEVEL) {
                log::warn!("|ψ| at the outer boundary is {edge:e} of its peak at t = {}; enlarge the domain", s.time);
                *warned = true;
            }
        }
        if snapshot_every.is_some_and(|every| i.is_multiple_of(every)) {
            series.snapshots.push((s.time, s.density()));
        }
        Ok(())
    };
    observe(&current, &mut series, 0, &mut warned)?;
    for i in 1..=n_steps {
        current = step(&current, dt, nl)?;
        observe(&current, &mut series, i, &mut warned)?;
    }
    Ok((current, series))
}

/// Evolves until `t_final` with steps no larger than `dt`; the step is
/// shortened uniformly so the run ends exactly at `t_final`.
pub fn evolve<T: Real>(
    state: &RadialState<T>,
    t_final: T,
    dt: T,
    nl: &NonlinearityKind<T>,
    observe_every: usize,
    snapshot_every: Option<usize>,
) -> Result<(RadialState<T>, ObservableSeries<T>)> {
    let span = t_final - state.time;
    if !(span > T::zero()) {
        return Err(Error::InvalidArgument("final time must lie after the current time".into()));
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let n_steps = (span / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    let dt = span / T::from_count(n_steps);
    evolve_steps(state, n_steps, dt, nl, observe_every, snapshot_every)
}

fn current_density<T: Real>(state: &RadialState<T>) -> (Vec<T>, Vec<T>) {
    let psi = state.psi_samples();
    let h = state.grid.spacing();
    let n = psi.len();
    let rho = psi.iter().map(|z| z.norm_sqr()).collect();
    let c = state.hbar / state.mass / (T::lit(2.0) * h);
    let mut j = vec![T::zero(); n];
    for i in 1..n - 1 {
        j[i] = c * (psi[i].conj() * (psi[i + 1] - psi[i - 1])).im;
    }
    (rho, j)
}

/// L∞ norm of the discrete continuity residual `∂ρ/∂t + ∇·j` between two
/// states, with `j = (ħ/m) Im(ψ* ∂ψ/∂r)` averaged over both ends of the
/// step. Equal times leave only the divergence term.
pub fn continuity_residual<T: Real>(before: &RadialState<T>, after: &RadialState<T>) -> Result<T> {
    if !before.same_grid(after) {
        return Err(Error::InvalidArgument("states live on different grids".into()));
    }
    if before.mass != after.mass || before.hbar != after.hbar {
        return Err(Error::InvalidArgument("states disagree on m or ħ".into()));
    }
    let dt = after.time - before.time;
    if dt < T::zero() {
        return Err(Error::InvalidArgument("second state precedes the first".into()));
    }
    let (rho_b, j_b) = current_density(before);
    let (rho_a, j_a) = current_density(after);
    let grid = before.grid;
    let h = grid.spacing();
    let half = T::lit(0.5);
    let j: Vec<T> = j_b.iter().zip(&j_a).map(|(a, b)| half * (*a + *b)).collect();
    let n = j.len();
    let mut worst = T::zero();
    for i in 2..n - 2 {
        let r = grid.node(i);
        let div = (j[i + 1] - j[i - 1]) / (h + h) + T::lit(2.0) * j[i] / r;
        let dens = if dt > T::zero() { (rho_a[i] - rho_b[i]) / dt } else { T::zero() };
        worst = worst.max((dens + div).abs());
    }
    Ok(worst)
}
