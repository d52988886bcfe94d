//! Complex radial wavefunctions stored as `u(r) = r ψ(r)`, and the discrete
//! functionals shared by the energy bookkeeping and the time evolution.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::real::Real;

/// Spherically symmetric one-body state.
///
/// `u` holds the reduced wavefunction `r ψ(r)`; `u(0) = 0` always. `phase`
/// is a global phase kept outside the samples (the physical wavefunction is
/// `e^{i phase} u / r`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState<T> {
    pub grid: RadialGrid<T>,
    pub u: Vec<Complex<T>>,
    pub mass: T,
    pub hbar: T,
    pub time: T,
    pub phase: T,
}

impl<T: Real> RadialState<T> {
    pub fn new(grid: RadialGrid<T>, u: Vec<Complex<T>>, mass: T, hbar: T, time: T) -> Result<Self> {
        if u.len() != grid.n_points() {
            return Err(Error::InvalidField(format!(
                "{} samples for a grid of {} points",
                u.len(),
                grid.n_points()
            )));
        }
        if !(mass > T::zero()) || !(hbar > T::zero()) {
            return Err(Error::InvalidArgument("mass and hbar must be positive".into()));
        }
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidField("non-finite wavefunction sample".into()));
        }
        if u[0] != Complex::new(T::zero(), T::zero()) {
            return Err(Error::InvalidField("u(0) must vanish".into()));
        }
        let state = Self {
            grid,
            u,
            mass,
            hbar,
            time,
            phase: T::zero(),
        };
        if !(state.norm() > T::zero()) {
            return Err(Error::InvalidArgument("state has zero norm".into()));
        }
        Ok(state)
    }

    /// Real state from samples of `ψ(r)`; the outer node is pinned to zero.
    pub fn from_psi(grid: RadialGrid<T>, psi: &[T], mass: T, hbar: T) -> Result<Self> {
        if psi.len() != grid.n_points() {
            return Err(Error::InvalidField("wavefunction length does not match grid".into()));
        }
        let last = grid.n_points() - 1;
        let u = grid
            .nodes()
            .zip(psi)
            .enumerate()
            .map(|(i, (r, &p))| {
                if i == last {
                    Complex::new(T::zero(), T::zero())
                } else {
                    Complex::new(r * p, T::zero())
                }
            })
            .collect();
        Self::new(grid, u, mass, hbar, T::zero())
    }

    /// Normalized Gaussian packet `ψ ∝ exp(-r² / 4σ²)`, so that `σ` is the
    /// per-axis standard deviation of `|ψ|²`.
    pub fn gaussian(grid: RadialGrid<T>, sigma: T, mass: T, hbar: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::InvalidArgument("Gaussian width must be positive".into()));
        }
        let four = T::lit(4.0);
        let psi: Vec<T> = grid.nodes().map(|r| (-(r * r) / (four * sigma * sigma)).exp()).collect();
        let mut state = Self::from_psi(grid, &psi, mass, hbar)?;
        state.normalize();
        Ok(state)
    }

    /// `𝒩 = 4π ∫ |u|² dr` (trapezoid; both ends vanish).
    pub fn norm(&self) -> T {
        let h = self.grid.spacing();
        let s = self.u.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        T::lit(4.0) * T::PI() * h * s
    }

    pub fn normalize(&mut self) {
        let s = self.norm().sqrt();
        self.u.iter_mut().for_each(|z| *z = *z / s);
    }

    /// Copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self {
            u: self.u.iter().map(|&z| z * factor).collect(),
            ..self.clone()
        }
    }

    /// `ψ(r) = u / r` without the ledger phase; the origin uses the even
    /// extrapolation `(4ψ₁ - ψ₂)/3`.
    pub fn psi_samples(&self) -> Vec<Complex<T>> {
        let mut psi: Vec<Complex<T>> = self
            .grid
            .nodes()
            .zip(&self.u)
            .map(|(r, &z)| if r > T::zero() { z / r } else { z })
            .collect();
        psi[0] = (psi[1] * T::lit(4.0) - psi[2]) / T::lit(3.0);
        psi
    }

    /// Physical wavefunction including the global ledger phase.
    pub fn wavefunction(&self) -> Vec<Complex<T>> {
        let rot = Complex::from_polar(T::one(), self.phase);
        self.psi_samples().into_iter().map(|z| z * rot).collect()
    }

    /// `|ψ|²` at every node.
    pub fn density(&self) -> RadialField<T> {
        let values = self.psi_samples().iter().map(|z| z.norm_sqr()).collect();
        RadialField::new(self.grid, values).expect("finite state has finite density")
    }

    /// `(ħ²/2m) ∫ |∇ψ|² d³x`, with the derivative of `u` taken on the
    /// half-grid: `4π Σ |u_{i+1} - u_i|² / h`.
    pub fn kinetic_energy(&self) -> T {
        let h = self.grid.spacing();
        let s = self.u.windows(2).fold(T::zero(), |a, w| a + (w[1] - w[0]).norm_sqr());
        let four_pi = T::lit(4.0) * T::PI();
        self.hbar * self.hbar / (T::lit(2.0) * self.mass) * four_pi * s / h
    }

    /// Root-mean-square radius `sqrt(<r²>)`.
    pub fn rms_radius(&self) -> T {
        let h = self.grid.spacing();
        let s = self
            .grid
            .nodes()
            .zip(&self.u)
            .fold(T::zero(), |a, (r, z)| a + r * r * z.norm_sqr());
        (T::lit(4.0) * T::PI() * h * s / self.norm()).sqrt()
    }

    /// `|ψ|` at the last interior node relative to the peak of `|ψ|`.
    pub fn boundary_amplitude(&self) -> T {
        let psi = self.psi_samples();
        let peak = psi.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let n = psi.len();
        psi[n - 2].norm() / peak
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }
}
