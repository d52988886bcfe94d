//! Shooting solver for the dimensionless universal system
//!
//! ```text
//! ∇²f* = g* f*,    ∇²g* = (f*)²
//! f*(0) = 1, f*'(0) = 0, g*(0) = γ₀, g*'(0) = 0
//! ```
//!
//! Each shot integrates outward with fixed-step RK4. Bound states are
//! located by bisection on γ₀, with the principal quantum number `n`
//! identified as the number of radial nodes of f*.

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::quadrature::integrate_radial;
use crate::real::Real;

pub const DEFAULT_RHO_MAX: f64 = 40.0;
pub const DEFAULT_POINTS: usize = 8001;
pub const DEFAULT_TOL: f64 = 1e-10;
/// |f*| beyond this declares divergence.
pub const DEFAULT_CAP: f64 = 1e3;
pub const DEFAULT_SCAN_RANGE: (f64, f64) = (-5.0, 0.0);
pub const DEFAULT_SCAN_STEPS: usize = 501;

/// How a single outward integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Reached the outer radius with a tiny, still decaying tail.
    Converged,
    /// f* exceeded `+cap`.
    DivergedUp,
    /// f* fell below `-cap`.
    DivergedDown,
    /// Reached the outer radius without diverging or decaying to zero.
    MaxRadiusReached,
}

/// Samples of one outward integration, from the origin up to the node where
/// it stopped.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    grid: RadialGrid<T>,
    pub f: Vec<T>,
    pub df: Vec<T>,
    pub g: Vec<T>,
    pub dg: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    /// Number of nodes actually integrated.
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn radius(&self, i: usize) -> T {
        self.grid.node(i)
    }
}

/// Result of [`integrate_universal`].
#[derive(Debug, Clone)]
pub struct ShootOutcome<T> {
    pub gamma0: T,
    pub classification: Classification,
    pub node_count: usize,
    pub trajectory: Trajectory<T>,
    pub blowup_radius: Option<T>,
}

impl<T: Real> ShootOutcome<T> {
    /// Number of bound states whose γ₀ lies above this shot's γ₀.
    ///
    /// A diverging shot just above γ₀(n) has `n` nodes; just below it the tail
    /// has crossed zero once more. Shots that reach the outer radius are
    /// counted by where the tail is heading: towards zero means one more
    /// node is pending.
    pub fn states_above(&self) -> usize {
        match self.classification {
            Classification::DivergedUp | Classification::DivergedDown => self.node_count,
            Classification::Converged | Classification::MaxRadiusReached => {
                let t = &self.trajectory;
                let last = t.len() - 1;
                if t.f[last] * t.df[last] < T::zero() {
                    self.node_count + 1
                } else {
                    self.node_count
                }
            }
        }
    }
}

/// Converged bound state of the universal system.
#[derive(Debug, Clone)]
pub struct UniversalSolution<T> {
    pub n: usize,
    pub gamma0: T,
    /// `∫ (f*)² ρ² dρ`
    pub gamma1: T,
    /// `(3/γ₁) ∫ (f*)² g* ρ² dρ`
    pub epsilon_star: T,
    pub f_star: RadialField<T>,
    pub g_star: RadialField<T>,
    pub node_count: usize,
    pub bracket_width: T,
    pub grid: RadialGrid<T>,
    /// Radius where the shot trajectory was cut and the decaying tail begins.
    pub clamp_radius: T,
    /// Asymptotic value `lim g*(ρ)` implied by the field at the clamp.
    pub g_infinity: T,
    /// Bisection iterations performed.
    pub iterations: usize,
}

impl<T: Real> UniversalSolution<T> {
    /// `g*(∞) + ε*`, which vanishes when the virial relation holds exactly.
    pub fn potential_offset(&self) -> T {
        self.g_infinity + self.epsilon_star
    }

    /// Rebuilds a solution from a known γ₀, e.g. one read back from disk.
    pub fn from_gamma0(n: usize, gamma0: T, bracket_width: T, grid: RadialGrid<T>, cap: T) -> Result<Self> {
        let shot = integrate_universal(gamma0, grid, cap)?;
        build_solution(n, shot, bracket_width, 0)
    }
}

fn derivs<T: Real>(rho: T, y: [T; 4]) -> [T; 4] {
    let two = T::lit(2.0);
    [
        y[1],
        y[2] * y[0] - two * y[1] / rho,
        y[3],
        y[0] * y[0] - two * y[3] / rho,
    ]
}

fn rk4_step<T: Real>(rho: T, h: T, y: [T; 4]) -> [T; 4] {
    let half = h / T::lit(2.0);
    let add = |y: [T; 4], k: [T; 4], s: T| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]];
    let k1 = derivs(rho, y);
    let k2 = derivs(rho + half, add(y, k1, half));
    let k3 = derivs(rho + half, add(y, k2, half));
    let k4 = derivs(rho + h, add(y, k3, h));
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let mut out = y;
    for j in 0..4 {
        out[j] = y[j] + sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]);
    }
    out
}

/// Regular series of the universal system about the origin, through ρ⁴:
/// `f* = 1 + γ₀ρ²/6 + (γ₀²+1)ρ⁴/120`, `g* = γ₀ + ρ²/6 + γ₀ρ⁴/60`.
pub fn origin_series<T: Real>(gamma0: T, rho: T) -> [T; 4] {
    let r2 = rho * rho;
    let a2 = gamma0 / T::lit(6.0);
    let a4 = (gamma0 * gamma0 + T::one()) / T::lit(120.0);
    let b2 = T::one() / T::lit(6.0);
    let b4 = gamma0 / T::lit(60.0);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    [
        T::one() + a2 * r2 + a4 * r2 * r2,
        two * a2 * rho + four * a4 * r2 * rho,
        gamma0 + b2 * r2 + b4 * r2 * r2,
        two * b2 * rho + four * b4 * r2 * rho,
    ]
}

/// Below this |f*| a tail that reaches the outer radius still decaying is
/// classified as converged.
const CONVERGED_TAIL: f64 = 1e-8;

/// Integrates the universal system outward from the origin for a given γ₀.
///
/// Stops at the outer radius or as soon as `|f*| > cap`; `node_count` is the
/// number of sign changes of f* seen before stopping.
pub fn integrate_universal<T: Real>(gamma0: T, grid: RadialGrid<T>, cap: T) -> Result<ShootOutcome<T>> {
    if !(cap > T::one()) {
        return Err(Error::InvalidArgument(format!("divergence cap must exceed 1, got {cap}")));
    }
    if !gamma0.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma0 must be finite, got {gamma0}")));
    }
    let n = grid.n_points();
    let h = grid.spacing();
    let mut traj = Trajectory {
        grid,
        f: Vec::with_capacity(n),
        df: Vec::with_capacity(n),
        g: Vec::with_capacity(n),
        dg: Vec::with_capacity(n),
    };
    let push = |t: &mut Trajectory<T>, y: [T; 4]| {
        t.f.push(y[0]);
        t.df.push(y[1]);
        t.g.push(y[2]);
        t.dg.push(y[3]);
    };
    push(&mut traj, [T::one(), T::zero(), gamma0, T::zero()]);
    let mut nodes = 0usize;
    let mut last_sign = T::one();
    let mut classification = Classification::MaxRadiusReached;
    let mut blowup_radius = None;
    let count_sign = |v: T, nodes: &mut usize, last_sign: &mut T| {
        if v != T::zero() && v.signum() != *last_sign {
            *nodes += 1;
            *last_sign = v.signum();
        }
    };
    let diverged = |f: T| {
        if f > T::zero() {
            Classification::DivergedUp
        } else {
            Classification::DivergedDown
        }
    };

    let mut y = origin_series(gamma0, grid.node(1));
    if y.iter().any(|v| !v.is_finite()) {
        // the series itself overflows; its leading term γ₀ρ²/6 sets the direction
        classification = diverged(gamma0);
        count_sign(gamma0, &mut nodes, &mut last_sign);
        blowup_radius = Some(grid.node(1));
    } else {
        push(&mut traj, y);
        count_sign(y[0], &mut nodes, &mut last_sign);
        if y[0].abs() > cap {
            classification = diverged(y[0]);
            blowup_radius = Some(grid.node(1));
        }
    }

    if classification == Classification::MaxRadiusReached {
        for i in 1..n - 1 {
            let next = rk4_step(grid.node(i), h, y);
            if next.iter().any(|v| !v.is_finite()) {
                // overflowed within one step; the last finite sample gives the direction
                classification = diverged(y[0]);
                blowup_radius = Some(grid.node(i + 1));
                break;
            }
            y = next;
            push(&mut traj, y);
            count_sign(y[0], &mut nodes, &mut last_sign);
            if y[0].abs() > cap {
                classification = diverged(y[0]);
                blowup_radius = Some(grid.node(i + 1));
                break;
            }
        }
    }
    if classification == Classification::MaxRadiusReached {
        let last = traj.len() - 1;
        if traj.f[last].abs() < T::lit(CONVERGED_TAIL) && traj.f[last] * traj.df[last] < T::zero() {
            classification = Classification::Converged;
        }
    }
    Ok(ShootOutcome {
        gamma0,
        classification,
        node_count: nodes,
        trajectory: traj,
        blowup_radius,
    })
}

/// Bisects γ₀ inside `bracket = (lo, hi)` for the state with `n` nodes.
///
/// The two ends must sit in different spectral bands (different numbers of
/// states above them). After convergence the mid-bracket trajectory is cut
/// where |f*| stops decaying and continued by its asymptotic tail.
pub fn shoot_gamma0<T: Real>(
    n: usize,
    bracket: (T, T),
    grid: RadialGrid<T>,
    tol: T,
    cap: T,
) -> Result<UniversalSolution<T>> {
    let (mut lo, mut hi) = bracket;
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bracket must satisfy lo < hi, got ({lo}, {hi})")));
    }
    let band_lo = integrate_universal(lo, grid, cap)?.states_above();
    let band_hi = integrate_universal(hi, grid, cap)?.states_above();
    if band_lo <= band_hi {
        return Err(Error::InvalidBracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            band: band_hi,
        });
    }

    let two = T::lit(2.0);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if integrate_universal(mid, grid, cap)?.states_above() <= n {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    if hi - lo > tol {
        return Err(Error::NotConverged(format!(
            "bracket width {:e} cannot reach tolerance {tol:e} at this precision",
            (hi - lo).as_f64()
        )));
    }
    let final_lo = integrate_universal(lo, grid, cap)?.states_above();
    let final_hi = integrate_universal(hi, grid, cap)?.states_above();
    if !(final_hi <= n && n < final_lo) {
        let found = if final_hi > n { final_hi } else { final_lo };
        return Err(Error::WrongState { expected: n, found });
    }
    let gamma0 = lo + (hi - lo) / two;
    let shot = integrate_universal(gamma0, grid, cap)?;
    build_solution(n, shot, hi - lo, iterations)
}

fn sign_change_indices<T: Real>(f: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last = f[0].signum();
    for (i, &v) in f.iter().enumerate().skip(1) {
        if v != T::zero() && v.signum() != last {
            out.push(i);
            last = v.signum();
        }
    }
    out
}

/// Index where the bound-state part of a trajectory ends: the first local
/// minimum of |f*| after the peak of the outermost lobe, never past a
/// further zero crossing.
fn clamp_index<T: Real>(f: &[T], n: usize) -> Result<usize> {
    let crossings = sign_change_indices(f);
    if crossings.len() < n {
        return Err(Error::WrongState {
            expected: n,
            found: crossings.len(),
        });
    }
    let mut i = if n == 0 { 0 } else { crossings[n - 1] };
    let last = f.len() - 1;
    while i < last && f[i + 1].abs() >= f[i].abs() {
        i += 1;
    }
    while i < last && f[i + 1].abs() < f[i].abs() && f[i + 1].signum() == f[i].signum() {
        i += 1;
    }
    Ok(i)
}

fn build_solution<T: Real>(
    n: usize,
    shot: ShootOutcome<T>,
    bracket_width: T,
    iterations: usize,
) -> Result<UniversalSolution<T>> {
    let traj = &shot.trajectory;
    let grid = *traj.grid();
    let c = clamp_index(&traj.f, n)?;
    let node_count = sign_change_indices(&traj.f[..=c]).len();
    if node_count != n {
        return Err(Error::WrongState {
            expected: n,
            found: node_count,
        });
    }

    if c < 2 {
        return Err(Error::NotConverged("shot is too short to attach a decaying tail".into()));
    }
    let rho_c = grid.node(c);
    let (f_c, g_c, dg_c) = (traj.f[c], traj.g[c], traj.dg[c]);
    // outside the clamp f* ≈ 0, so g* is the exterior Coulomb field g∞ − Q/ρ
    let charge = rho_c * rho_c * dg_c;
    let g_inf = g_c + rho_c * dg_c;
    if !(g_inf > T::zero()) {
        return Err(Error::NotConverged(format!(
            "asymptotic g* = {g_inf} is not positive; the tail cannot decay"
        )));
    }
    let kappa = g_inf.sqrt();
    let power = charge / (T::lit(2.0) * kappa) - T::one();

    let n_points = grid.n_points();
    let mut f = Vec::with_capacity(n_points);
    let mut g = Vec::with_capacity(n_points);
    f.extend_from_slice(&traj.f[..=c]);
    g.extend_from_slice(&traj.g[..=c]);
    for i in c + 1..n_points {
        let rho = grid.node(i);
        f.push(f_c * (rho / rho_c).powf(power) * (-kappa * (rho - rho_c)).exp());
        g.push(g_inf - charge / rho);
    }
    if f.iter().chain(&g).any(|v| !v.is_finite()) {
        return Err(Error::NotConverged("non-finite values in the clamped solution".into()));
    }
    let f_star = RadialField::new(grid, f)?;
    let g_star = RadialField::new(grid, g)?;

    let density = f_star.map(|v| v * v);
    let gamma1 = integrate_radial(&density)?;
    let weighted = density.zip_with(&g_star, |d, g| d * g)?;
    let epsilon_star = T::lit(3.0) * integrate_radial(&weighted)? / gamma1;

    Ok(UniversalSolution {
        n,
        gamma0: shot.gamma0,
        gamma1,
        epsilon_star,
        f_star,
        g_star,
        node_count,
        bracket_width,
        grid,
        clamp_radius: rho_c,
        g_infinity: g_inf,
        iterations,
    })
}

/// One candidate bracket found by [`scan_brackets`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub n: usize,
    pub lo: T,
    pub hi: T,
}

/// Shoots on a uniform γ₀ lattice over `range` and reports every pair of
/// neighbours whose spectral band differs, once per state `n` in between.
pub fn scan_brackets<T: Real>(range: (T, T), steps: usize, grid: RadialGrid<T>, cap: T) -> Result<Vec<Bracket<T>>> {
    let (lo, hi) = range;
    if !(lo < hi) || steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "scan needs lo < hi and at least 2 steps, got ({lo}, {hi}) with {steps}"
        )));
    }
    let dx = (hi - lo) / T::from_count(steps - 1);
    let points: Vec<T> = (0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + dx * T::from_count(i) })
        .collect();
    let bands = points
        .iter()
        .map(|&x| integrate_universal(x, grid, cap).map(|s| s.states_above()))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    // walk downward in γ₀ so states come out in increasing n
    for k in (0..steps - 1).rev() {
        let (band_hi, band_lo) = (bands[k + 1], bands[k]);
        for n in band_hi..band_lo {
            out.push(Bracket {
                n,
                lo: points[k],
                hi: points[k + 1],
            });
        }
    }
    Ok(out)
}

/// Tunables for [`solve_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootSettings<T> {
    pub tol: T,
    pub cap: T,
    pub scan_range: (T, T),
    pub scan_steps: usize,
}

impl<T: Real> Default for ShootSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(DEFAULT_TOL),
            cap: T::lit(DEFAULT_CAP),
            scan_range: (T::lit(DEFAULT_SCAN_RANGE.0), T::lit(DEFAULT_SCAN_RANGE.1)),
            scan_steps: DEFAULT_SCAN_STEPS,
        }
    }
}

/// Default universal grid: ρ ∈ [0, 40] with 8001 points.
pub fn default_grid<T: Real>() -> RadialGrid<T> {
    RadialGrid::uniform(T::lit(DEFAULT_RHO_MAX), DEFAULT_POINTS).expect("default grid is valid")
}

/// Scans for the bracket of state `n` and bisects it.
pub fn solve_state<T: Real>(n: usize, grid: RadialGrid<T>, settings: &ShootSettings<T>) -> Result<UniversalSolution<T>> {
    let brackets = scan_brackets(settings.scan_range, settings.scan_steps, grid, settings.cap)?;
    let b = brackets.iter().find(|b| b.n == n).ok_or(Error::NoBracket { n })?;
    shoot_gamma0(n, (b.lo, b.hi), grid, settings.tol, settings.cap)
}

/// States `0..=n_max`, reusing one bracket scan.
pub fn solve_spectrum<T: Real>(
    n_max: usize,
    grid: RadialGrid<T>,
    settings: &ShootSettings<T>,
) -> Result<Vec<UniversalSolution<T>>> {
    let brackets = scan_brackets(settings.scan_range, settings.scan_steps, grid, settings.cap)?;
    (0..=n_max)
        .map(|n| {
            let b = brackets.iter().find(|b| b.n == n).ok_or(Error::NoBracket { n })?;
            shoot_gamma0(n, (b.lo, b.hi), grid, settings.tol, settings.cap)
        })
        .collect()
}

/// Number of sign changes of a sampled function.
pub fn count_nodes<T: Real>(values: &[T]) -> usize {
    sign_change_indices(values).len()
}
