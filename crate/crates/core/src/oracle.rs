//! Self-consistent-field oracle for the universal bound states.
//!
//! Independent of the shooting path: the reduced radial function `u = x f`
//! is found as the `n`-th eigenvector of the finite-difference Hamiltonian
//! `-d²/dx² + V` in a frozen potential, `V` is refreshed from the Poisson
//! equation `∇²V = f²`, and the two steps alternate with damped mixing until
//! the potential stops changing. The state is normalized to `∫ f² x² dx = Q`
//! and converted to the universal normalization `f*(0) = 1` afterwards using
//! the scaling `f → λ² f(λ x)`, `V - E → λ² (V - E)(λ x)`.
//!
//! Two grids (spacing `h` and `h/2`) are combined by Richardson
//! extrapolation to remove the leading `O(h²)` error of the three-point
//! Laplacian.

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::poisson::solve_radial_poisson;
use crate::real::Real;
use crate::shoot::UniversalSolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfSettings<T> {
    /// Target state (number of radial nodes).
    pub n: usize,
    /// Normalization `Q = ∫ f² x² dx`; sets the length scale of the solve.
    pub norm: T,
    pub x_max: T,
    /// Spacing of the coarse grid; the fine grid halves it.
    pub spacing: T,
    pub mixing: T,
    /// Stop when the potential update changes by less than this (L∞).
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> ScfSettings<T> {
    /// Settings that place state `n` at roughly universal scale.
    pub fn for_state(n: usize) -> Self {
        let nf = T::from_count(n);
        Self {
            n,
            norm: T::lit(4.0) * (nf + T::one()),
            x_max: T::lit(50.0) + T::lit(10.0) * nf,
            spacing: T::lit(0.02),
            mixing: T::lit(0.5),
            tol: T::lit(1e-11),
            max_iter: 1000,
        }
    }
}

/// Converged SCF state on one grid, in the `∫ f² x² dx = Q` normalization.
#[derive(Debug, Clone)]
pub struct ScfState<T> {
    pub grid: RadialGrid<T>,
    pub f: Vec<T>,
    pub potential: Vec<T>,
    pub energy: T,
    pub iterations: usize,
    pub last_update: T,
}

impl<T: Real> ScfState<T> {
    /// `f(0)` from the even expansion through the first two interior nodes.
    pub fn f_origin(&self) -> T {
        (T::lit(4.0) * self.f[1] - self.f[2]) / T::lit(3.0)
    }
}

/// Oracle result in universal normalization.
#[derive(Debug, Clone)]
pub struct OracleSolution<T> {
    pub n: usize,
    pub gamma0: T,
    pub gamma1: T,
    /// Universal radii of the samples.
    pub rho: Vec<T>,
    /// `f*`, with `f*(0) = 1`.
    pub f_star: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> OracleSolution<T> {
    /// Normalized density `(f*)² / γ₁` at each sample.
    pub fn density(&self) -> Vec<T> {
        self.f_star.iter().map(|&f| f * f / self.gamma1).collect()
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count<T: Real>(diag: &[T], off: T, x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let off2 = off * off;
    let mut count = 0;
    let mut d = diag[0] - x;
    for (i, &a) in diag.iter().enumerate() {
        if i > 0 {
            d = a - x - off2 / d;
        }
        if d == T::zero() {
            d = -tiny;
        }
        if d < T::zero() {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenpair of a symmetric tridiagonal matrix with constant
/// off-diagonal `off`, by Sturm bisection and inverse iteration.
fn tridiagonal_eigenpair<T: Real>(diag: &[T], off: T, k: usize) -> (T, Vec<T>) {
    let two = T::lit(2.0);
    let spread = two * off.abs();
    let mut lo = diag.iter().fold(T::infinity(), |m, &d| m.min(d)) - spread;
    let mut hi = diag.iter().fold(T::neg_infinity(), |m, &d| m.max(d)) + spread;
    for _ in 0..200 {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = lo + (hi - lo) / two;

    let m = diag.len();
    let shift = lambda + T::epsilon() * lambda.abs().max(T::one());
    let tiny = T::epsilon() * (diag.iter().fold(T::zero(), |a, d| a.max(d.abs())) + spread);
    let mut x = vec![T::one(); m];
    let mut c = vec![T::zero(); m];
    for _ in 0..3 {
        // Thomas sweep on (A - shift) y = x
        let mut pivot = diag[0] - shift;
        if pivot.abs() < tiny {
            pivot = tiny;
        }
        c[0] = off / pivot;
        x[0] = x[0] / pivot;
        for i in 1..m {
            pivot = diag[i] - shift - off * c[i - 1];
            if pivot.abs() < tiny {
                pivot = tiny;
            }
            c[i] = off / pivot;
            x[i] = (x[i] - off * x[i - 1]) / pivot;
        }
        for i in (0..m - 1).rev() {
            x[i] = x[i] - c[i] * x[i + 1];
        }
        let norm = x.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
        x.iter_mut().for_each(|v| *v = *v / norm);
    }
    (lambda, x)
}

/// Runs the SCF iteration on a single grid with spacing `spacing`.
pub fn scf_single_grid<T: Real>(settings: &ScfSettings<T>, spacing: T) -> Result<ScfState<T>> {
    let points = (settings.x_max / spacing).round().to_usize().unwrap_or(0) + 1;
    let grid = RadialGrid::uniform(settings.x_max, points)?;
    let h = grid.spacing();
    let xs: Vec<T> = grid.nodes().collect();
    let q = settings.norm;

    let normalize = |f: &mut Vec<T>| {
        let w: Vec<T> = f.iter().zip(&xs).map(|(&v, &x)| v * v * x * x).collect();
        let s = crate::quadrature::integrate_uniform(&w, h);
        let scale = (q / s).sqrt();
        f.iter_mut().for_each(|v| *v = *v * scale);
    };
    let potential_of = |f: &[T]| -> Result<Vec<T>> {
        let density = RadialField::new(grid, f.iter().map(|&v| v * v).collect())?;
        Ok(solve_radial_poisson(&density, T::one())?.into_values())
    };

    let width = settings.x_max / T::lit(8.0);
    let mut f: Vec<T> = xs.iter().map(|&x| (-(x * x) / (T::lit(2.0) * width * width)).exp()).collect();
    normalize(&mut f);
    let mut v = potential_of(&f)?;

    let inv_h2 = T::one() / (h * h);
    let off = -inv_h2;
    let mut energy = T::zero();
    let mut last_update = T::infinity();
    for it in 1..=settings.max_iter {
        let diag: Vec<T> = v[1..points - 1].iter().map(|&vi| T::lit(2.0) * inv_h2 + vi).collect();
        let (lambda, u) = tridiagonal_eigenpair(&diag, off, settings.n);
        energy = lambda;
        let sign = if u[0] < T::zero() { -T::one() } else { T::one() };
        f = vec![T::zero(); points];
        for i in 1..points - 1 {
            f[i] = sign * u[i - 1] / xs[i];
        }
        f[0] = (T::lit(4.0) * f[1] - f[2]) / T::lit(3.0);
        normalize(&mut f);
        let v_new = potential_of(&f)?;
        last_update = v_new
            .iter()
            .zip(&v)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        if last_update < settings.tol {
            // final eigenpair is consistent with the potential that produced it
            return Ok(ScfState {
                grid,
                f,
                potential: v,
                energy,
                iterations: it,
                last_update,
            });
        }
        let a = settings.mixing;
        v = v.iter().zip(&v_new).map(|(&old, &new)| (T::one() - a) * old + a * new).collect();
    }
    Err(Error::NotConverged(format!(
        "SCF for n = {} stalled after {} iterations (update {}, energy {})",
        settings.n,
        settings.max_iter,
        last_update.as_f64(),
        energy.as_f64()
    )))
}

/// Two-grid Richardson-extrapolated SCF oracle for state `settings.n`.
pub fn scf_oracle<T: Real>(settings: &ScfSettings<T>) -> Result<OracleSolution<T>> {
    let coarse = scf_single_grid(settings, settings.spacing)?;
    let fine = scf_single_grid(settings, settings.spacing / T::lit(2.0))?;
    if fine.grid.n_points() != 2 * (coarse.grid.n_points() - 1) + 1 {
        return Err(Error::InvalidArgument(
            "oracle spacing must divide the radius evenly".into(),
        ));
    }
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let rich = |fine: T, coarse: T| (four * fine - coarse) / three;

    let energy = rich(fine.energy, coarse.energy);
    let v0 = rich(fine.potential[0], coarse.potential[0]);
    let a = rich(fine.f_origin(), coarse.f_origin());
    let f: Vec<T> = (0..coarse.grid.n_points())
        .map(|i| rich(fine.f[2 * i], coarse.f[i]))
        .collect();

    let sqrt_a = a.sqrt();
    Ok(OracleSolution {
        n: settings.n,
        gamma0: (v0 - energy) / a,
        gamma1: settings.norm / sqrt_a,
        rho: coarse.grid.nodes().map(|x| x * sqrt_a).collect(),
        f_star: f.iter().map(|&v| v / a).collect(),
        iterations: coarse.iterations.max(fine.iterations),
    })
}

/// Cubic (four-point Lagrange) interpolation on a uniform field.
fn cubic_at<T: Real>(field: &RadialField<T>, rho: T) -> T {
    let grid = field.grid();
    let v = field.values();
    let n = v.len();
    let x = rho / grid.spacing();
    let i = x.floor().to_usize().unwrap_or(0).clamp(1, n - 3);
    let t = x - T::from_count(i);
    let (p0, p1, p2, p3) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    -t * (t - one) * (t - two) / six * p0 + (t + one) * (t - one) * (t - two) / two * p1
        - (t + one) * t * (t - two) / two * p2
        + (t + one) * t * (t - one) / six * p3
}

/// Comparison of a shooting solution against the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison<T> {
    pub gamma0_rel: T,
    pub gamma1_rel: T,
    /// `max |d_shoot - d_oracle| / max d_shoot` for the normalized density.
    pub density_rel: T,
}

/// Relative deviations between `solution` and `oracle`, with the density
/// compared at the oracle's sample radii inside the clamp radius.
pub fn compare_with_oracle<T: Real>(solution: &UniversalSolution<T>, oracle: &OracleSolution<T>) -> OracleComparison<T> {
    let rel = |a: T, b: T| ((a - b) / b).abs();
    let density = oracle.density();
    let mut worst = T::zero();
    let mut peak = T::zero();
    for (i, &rho) in oracle.rho.iter().enumerate() {
        if rho > solution.clamp_radius {
            break;
        }
        let f = cubic_at(&solution.f_star, rho);
        let d = f * f / solution.gamma1;
        peak = peak.max(d);
        worst = worst.max((d - density[i]).abs());
    }
    OracleComparison {
        gamma0_rel: rel(oracle.gamma0, solution.gamma0),
        gamma1_rel: rel(oracle.gamma1, solution.gamma1),
        density_rel: worst / peak,
    }
}
