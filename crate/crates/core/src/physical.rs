//! Physical units: rescaling universal solutions by the gravitational Bohr
//! radius, and the energy functionals of the one-particle state.

use crate::error::{Error, Result};
use crate::grid::RadialField;
use crate::poisson::solve_radial_poisson;
use crate::quadrature::{cumulative, integrate_radial};
use crate::real::Real;
use crate::shoot::UniversalSolution;
use crate::state::RadialState;

pub const HBAR_SI: f64 = 1.054_571_817e-34;
pub const G_SI: f64 = 6.674_30e-11;
pub const NUCLEON_MASS_KG: f64 = 1.6726e-27;

/// Allowed deviation of the printed amplitude from unit norm before the
/// profile is renormalized.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-3;
/// Allowed deviation from unit norm for [`energy_breakdown`].
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Mass per particle, particle number, ħ and G.
///
/// `n_particles` is real so that macroscopic numbers such as 1e23 are fine.
/// SI values underflow in `f32`; use natural units there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    pub mass: T,
    pub n_particles: T,
    pub hbar: T,
    pub g: T,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(mass: T, n_particles: T, hbar: T, g: T) -> Result<Self> {
        let p = Self {
            mass,
            n_particles,
            hbar,
            g,
        };
        p.validate()?;
        Ok(p)
    }

    /// ħ = G = m = N = 1.
    pub fn natural() -> Self {
        Self {
            mass: T::one(),
            n_particles: T::one(),
            hbar: T::one(),
            g: T::one(),
        }
    }

    /// `n_particles` nucleons with SI constants.
    pub fn nucleons(n_particles: T) -> Result<Self> {
        Self::new(T::lit(NUCLEON_MASS_KG), n_particles, T::lit(HBAR_SI), T::lit(G_SI))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("n_particles", self.n_particles),
            ("hbar", self.hbar),
            ("G", self.g),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_n_particles(self, n_particles: T) -> Result<Self> {
        Self::new(self.mass, n_particles, self.hbar, self.g)
    }
}

/// `a_g = ħ² / (G N m³)`.
pub fn gravitational_bohr_radius<T: Real>(params: &PhysicalParams<T>) -> T {
    let v = params.hbar / params.mass;
    v * v / (params.g * params.mass) / params.n_particles
}

/// A universal solution expressed in physical units.
#[derive(Debug, Clone)]
pub struct PhysicalProfile<T> {
    /// One-particle wavefunction, m^{-3/2}.
    pub f: RadialField<T>,
    /// Gravitational potential per unit mass, vanishing at infinity.
    pub phi: RadialField<T>,
    pub params: PhysicalParams<T>,
    pub bohr_radius: T,
    /// `∫ 4π r² f² dr`
    pub norm: T,
    /// Set when the amplitude had to be rescaled to reach unit norm.
    pub renormalized: bool,
    /// Norm produced by the closed-form amplitude before any correction.
    pub raw_norm: T,
    /// Constant removed from `phi` so that it vanishes at infinity.
    pub phi_shift: T,
    /// Length unit of the universal variable, `γ₁ a_g / 2`.
    pub length_scale: T,
    /// Energy unit `ħ² / (2 m L²)`.
    pub energy_scale: T,
    /// Eigenparameter obtained by rescaling the shooting value ε*.
    pub epsilon_shoot: T,
    /// Node count of the underlying state.
    pub n: usize,
}

impl<T: Real> PhysicalProfile<T> {
    /// Eigenparameter paired with the shifted `phi`, so that
    /// `∇²f = (2m/ħ²)(mΦ - ε) f` holds.
    pub fn eigenparameter(&self) -> T {
        self.epsilon_shoot - self.params.mass * self.phi_shift
    }

    /// Radius where `|f|` first falls to half its peak value outside the peak.
    pub fn half_max_radius(&self) -> T {
        level_crossing(&self.f, T::lit(0.5))
    }

    /// `sqrt(∫ 4π r⁴ f² dr / norm)`
    pub fn rms_radius(&self) -> T {
        let r2 = RadialField::from_fn(*self.f.grid(), |r| r * r).expect("finite grid");
        let w = self.f.zip_with(&r2, |f, r2| f * f * r2).expect("same grid");
        let m2 = integrate_radial(&w).expect("finite profile");
        (T::lit(4.0) * T::PI() * m2 / self.norm).sqrt()
    }

    /// Radius enclosing the given fraction of the probability.
    pub fn mass_radius(&self, fraction: T) -> T {
        let grid = self.f.grid();
        let integrand: Vec<T> = grid.nodes().zip(self.f.values()).map(|(r, &f)| r * r * f * f).collect();
        let cum = cumulative(&integrand, grid.spacing());
        let total = cum[cum.len() - 1];
        let target = fraction * total;
        match cum.iter().position(|&c| c >= target) {
            Some(0) => T::zero(),
            Some(i) => {
                let t = (target - cum[i - 1]) / (cum[i] - cum[i - 1]);
                grid.node(i - 1) + t * grid.spacing()
            }
            None => grid.rho_max(),
        }
    }
}

fn level_crossing<T: Real>(f: &RadialField<T>, level: T) -> T {
    let v = f.values();
    let grid = f.grid();
    let (peak_i, peak) = v
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
    let target = level * peak;
    for i in peak_i + 1..v.len() {
        if v[i].abs() <= target {
            let (a, b) = (v[i - 1].abs(), v[i].abs());
            let t = (a - target) / (a - b);
            return grid.node(i - 1) + t * grid.spacing();
        }
    }
    grid.rho_max()
}

/// Builds `f(r)` and `Φ(r)` from a universal solution.
///
/// `r = L ρ` with `L = γ₁ a_g / 2`, `f = √2 / (√π γ₁² a_g^{3/2}) · f*(ρ)` and
/// `Φ = 2 G² N² m⁴ / (γ₁² ħ²) · (g*(ρ) + ε*)`, minus the constant that makes
/// `Φ(∞) = 0`.
pub fn rescale_to_physical<T: Real>(sol: &UniversalSolution<T>, params: &PhysicalParams<T>) -> Result<PhysicalProfile<T>> {
    params.validate()?;
    if sol.node_count != sol.n || !sol.gamma1.is_finite() || !(sol.gamma1 > T::zero()) || !sol.bracket_width.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "solution is not a converged state (n = {}, nodes = {})",
            sol.n, sol.node_count
        )));
    }
    let a_g = gravitational_bohr_radius(params);
    let two = T::lit(2.0);
    let gamma1 = sol.gamma1;
    let length = gamma1 * a_g / two;
    let grid = sol.grid.scaled(length)?;

    let amplitude = (two / T::PI()).sqrt() / (gamma1 * gamma1 * a_g * a_g.sqrt());
    let mut f = RadialField::new(grid, sol.f_star.values().iter().map(|&v| amplitude * v).collect())?;

    // ħ²/(2 m L²), equal to 2 G² N² m⁵ / (γ₁² ħ²)
    let energy_scale = params.hbar / length * (params.hbar / length) / (two * params.mass);
    let phi_scale = energy_scale / params.mass;
    let phi_shift = phi_scale * sol.potential_offset();
    let phi = RadialField::new(
        grid,
        sol.g_star
            .values()
            .iter()
            .map(|&g| phi_scale * (g + sol.epsilon_star) - phi_shift)
            .collect(),
    )?;

    let four_pi = T::lit(4.0) * T::PI();
    let raw_norm = four_pi * integrate_radial(&f.map(|v| v * v))?;
    let mut norm = raw_norm;
    let renormalized = (raw_norm - T::one()).abs() > T::lit(RENORMALIZE_THRESHOLD);
    if renormalized {
        log::warn!("closed-form amplitude gives norm {raw_norm}; renormalizing");
        let s = raw_norm.sqrt();
        f = f.map(|v| v / s);
        norm = four_pi * integrate_radial(&f.map(|v| v * v))?;
    }

    Ok(PhysicalProfile {
        f,
        phi,
        params: *params,
        bohr_radius: a_g,
        norm,
        renormalized,
        raw_norm,
        phi_shift,
        length_scale: length,
        energy_scale,
        epsilon_shoot: energy_scale * sol.epsilon_star,
        n: sol.n,
    })
}

/// Per-particle energies of a normalized profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<T> {
    pub e_kinetic: T,
    pub e_gravity: T,
    pub e_total: T,
    /// Eigenparameter `ε = (3/2) E_gravity`.
    pub epsilon: T,
    /// One-particle eigenvalue `E = ε / 3`.
    pub e_single: T,
}

impl<T: Real> EnergyBreakdown<T> {
    /// `|2 E_kin / |E_grav| - 1|`
    pub fn virial_residual(&self) -> T {
        (T::lit(2.0) * self.e_kinetic / self.e_gravity.abs() - T::one()).abs()
    }

    /// ε from the virial relation, `-3 E_kin`.
    pub fn epsilon_from_kinetic(&self) -> T {
        -T::lit(3.0) * self.e_kinetic
    }
}

/// Kinetic, gravitational and total energy of a profile, each per particle.
pub fn energy_breakdown<T: Real>(profile: &PhysicalProfile<T>) -> Result<EnergyBreakdown<T>> {
    let params = &profile.params;
    params.validate()?;
    let norm = T::lit(4.0) * T::PI() * integrate_radial(&profile.f.map(|v| v * v))?;
    if (norm - T::one()).abs() > T::lit(NORM_TOLERANCE) {
        return Err(Error::InvalidArgument(format!("profile norm is {norm}, expected 1")));
    }
    let state = RadialState::from_psi(*profile.f.grid(), profile.f.values(), params.mass, params.hbar)?;
    let e_kinetic = state.kinetic_energy();
    let e_gravity = gravity_energy(&state, params)?;
    let epsilon = T::lit(1.5) * e_gravity;
    Ok(EnergyBreakdown {
        e_kinetic,
        e_gravity,
        e_total: e_kinetic + e_gravity,
        epsilon,
        e_single: epsilon / T::lit(3.0),
    })
}

/// Potential of the state's own mass distribution, `∇²Φ = 4πGNm |ψ|² / 𝒩`.
pub fn gravity_potential<T: Real>(state: &RadialState<T>, params: &PhysicalParams<T>) -> Result<RadialField<T>> {
    let norm = state.norm();
    if !(norm > T::zero()) {
        return Err(Error::InvalidArgument("state has zero norm".into()));
    }
    let coupling = T::lit(4.0) * T::PI() * params.g * params.n_particles * params.mass / norm;
    solve_radial_poisson(&state.density(), coupling)
}

/// Self-energy divided by the norm, `(m/2) ∫ |ψ|² Φ d³x` with `Φ` from
/// [`gravity_potential`].
pub fn gravity_energy<T: Real>(state: &RadialState<T>, params: &PhysicalParams<T>) -> Result<T> {
    let phi = gravity_potential(state, params)?;
    let integrand = state.density().zip_with(&phi, |d, p| d * p)?;
    Ok(params.mass / T::lit(2.0) * T::lit(4.0) * T::PI() * integrate_radial(&integrand)?)
}

/// `H[ψ] = E_kin[ψ] + E_grav[ψ] / 𝒩[ψ]`, homogeneous of degree two in ψ.
pub fn hamiltonian_functional<T: Real>(state: &RadialState<T>, params: &PhysicalParams<T>) -> Result<T> {
    params.validate()?;
    if state.mass != params.mass || state.hbar != params.hbar {
        return Err(Error::InvalidArgument("state and parameters disagree on m or ħ".into()));
    }
    if !(state.norm() > T::zero()) {
        return Err(Error::InvalidArgument("state has zero norm".into()));
    }
    Ok(state.kinetic_energy() + gravity_energy(state, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::poisson::radial_laplacian;
    use crate::quadrature::integrate_uniform;
    use crate::shoot::{default_grid, solve_state, ShootSettings};
    use num_complex::Complex;
    use std::sync::OnceLock;

    fn ground() -> &'static UniversalSolution<f64> {
        static S: OnceLock<UniversalSolution<f64>> = OnceLock::new();
        S.get_or_init(|| solve_state(0, default_grid(), &ShootSettings::default()).unwrap())
    }

    fn natural_ground() -> PhysicalProfile<f64> {
        rescale_to_physical(ground(), &PhysicalParams::natural()).unwrap()
    }

    #[test]
    fn bohr_radius_values() {
        assert_eq!(gravitational_bohr_radius(&PhysicalParams::<f64>::natural()), 1.0);
        let one = gravitational_bohr_radius(&PhysicalParams::<f64>::nucleons(1.0).unwrap());
        assert!((one / 3.56e22 - 1.0).abs() < 0.01, "{one}");
        let many = gravitational_bohr_radius(&PhysicalParams::<f64>::nucleons(1e23).unwrap());
        assert!((many / 0.356 - 1.0).abs() < 0.01, "{many}");
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(PhysicalParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(PhysicalParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn natural_ground_state_has_unit_norm() {
        let p = natural_ground();
        assert!((p.norm - 1.0).abs() < 1e-6);
        assert!(!p.renormalized);
        assert!((p.raw_norm - 1.0).abs() < 1e-12);
        assert!(p.phi_shift.abs() < 1e-8);
        // attractive wherever the wavefunction is appreciable
        let fmax = p.f.max_abs();
        for (&f, &phi) in p.f.values().iter().zip(p.phi.values()) {
            if f.abs() > 1e-6 * fmax {
                assert!(phi < 0.0);
            }
        }
    }

    #[test]
    fn unconverged_solution_rejected() {
        let mut s = ground().clone();
        s.node_count = 1;
        assert!(matches!(
            rescale_to_physical(&s, &PhysicalParams::natural()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn doubling_n_halves_the_radius() {
        let p1 = rescale_to_physical(ground(), &PhysicalParams::nucleons(1e23).unwrap()).unwrap();
        let p2 = rescale_to_physical(ground(), &PhysicalParams::nucleons(2e23).unwrap()).unwrap();
        let ratio = p2.half_max_radius() / p1.half_max_radius();
        assert!((ratio - 0.5).abs() < 1e-6 * 0.5);
        assert!((p1.norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn macroscopic_localization_is_metre_scale() {
        let p = rescale_to_physical(ground(), &PhysicalParams::nucleons(1e23).unwrap()).unwrap();
        let r99 = p.mass_radius(0.99);
        assert!(r99 > 0.3 && r99 < 10.0, "{r99}");
        assert!(p.half_max_radius() < p.rms_radius());
        assert!(p.rms_radius() < r99);
    }

    #[test]
    fn rescaled_pair_satisfies_physical_equations() {
        let params = PhysicalParams::new(2.0, 3.0, 0.5, 1.5).unwrap();
        let p = rescale_to_physical(ground(), &params).unwrap();
        let m = params.mass;
        let lap_f = radial_laplacian(&p.f);
        let mphi = p.phi.map(|v| m * v);
        let lap_phi = radial_laplacian(&mphi);
        let eps = p.eigenparameter();
        let k = 2.0 * m / (params.hbar * params.hbar);
        let c = 4.0 * std::f64::consts::PI * params.g * params.n_particles * m * m;
        let h = p.f.grid().spacing();
        let fmax = p.f.max_abs();
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        let n = p.f.len();
        // the outer node uses a one-sided stencil and the tail clamp is not an
        // exact solution, so stop short of it
        let stop = p.f.grid().nearest_index(ground().clamp_radius * p.length_scale).min(n - 2);
        for i in 0..stop {
            let f = p.f[i];
            r1 = r1.max((lap_f[i] - k * (mphi[i] - eps) * f).abs());
            r2 = r2.max((lap_phi[i] - c * f * f).abs());
        }
        let scale1 = k * p.energy_scale * fmax;
        let scale2 = c * fmax * fmax;
        let (r1, r2) = (r1 / scale1, r2 / scale2);
        let h_rho = h / p.length_scale;
        assert!(r1 < h_rho * h_rho, "{r1}");
        assert!(r2 < h_rho * h_rho, "{r2}");
    }

    #[test]
    fn virial_and_eigenvalue_chain() {
        let p = natural_ground();
        let e = energy_breakdown(&p).unwrap();
        assert!(e.e_gravity < 0.0 && e.e_kinetic > 0.0);
        assert!(e.virial_residual() < 1e-3, "{}", e.virial_residual());
        assert!((e.e_total - (e.e_kinetic + e.e_gravity)).abs() <= 1e-9 * e.e_total.abs());
        assert!((3.0 * e.e_single - e.epsilon).abs() <= 1e-12 * e.epsilon.abs());
        assert!((e.epsilon / p.epsilon_shoot - 1.0).abs() < 1e-3);
        assert!((e.epsilon_from_kinetic() / e.epsilon - 1.0).abs() < 1e-3);
    }

    #[test]
    fn energy_breakdown_rejects_unnormalized() {
        let mut p = natural_ground();
        p.f = p.f.map(|v| 1.01 * v);
        assert!(matches!(energy_breakdown(&p), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gaussian_kinetic_energy_matches_closed_form() {
        // f ∝ exp(-r²/2σ²), σ = 1: E_kin = 3ħ²/(4mσ²)
        let grid = make_grid(12.0f64, 12001).unwrap();
        let raw = RadialField::from_fn(grid, |r| (-r * r / 2.0).exp()).unwrap();
        let norm = 4.0 * std::f64::consts::PI * integrate_radial(&raw.map(|v| v * v)).unwrap();
        let f = raw.map(|v| v / norm.sqrt());
        let mut p = natural_ground();
        p.phi = RadialField::zeros(grid);
        p.f = f;
        let e = energy_breakdown(&p).unwrap();
        assert!((e.e_kinetic - 0.75).abs() < 1e-6 * 0.75, "{}", e.e_kinetic);
    }

    fn test_states() -> Vec<RadialState<f64>> {
        let grid = make_grid(30.0f64, 1501).unwrap();
        let g = RadialState::gaussian(grid, 2.0, 1.0, 1.0).unwrap();
        let psi: Vec<f64> = grid.nodes().map(|r| (1.0 - r / 3.0) * (-r / 2.0).exp()).collect();
        let mut excited = RadialState::from_psi(grid, &psi, 1.0, 1.0).unwrap();
        excited.u.iter_mut().zip(grid.nodes()).for_each(|(z, r)| *z *= Complex::from_polar(1.0, 0.2 * r));
        let mut unnormalized = RadialState::gaussian(grid, 4.0, 1.0, 1.0).unwrap().scaled(Complex::new(3.0, -1.0));
        unnormalized.u[7] += Complex::new(0.01, 0.0);
        vec![g, excited, unnormalized]
    }

    #[test]
    fn hamiltonian_is_degree_two_homogeneous() {
        let params = PhysicalParams::natural();
        for s in test_states() {
            let h0 = hamiltonian_functional(&s, &params).unwrap();
            for lambda in [0.1, 2.5, 10.0] {
                let h = hamiltonian_functional(&s.scaled(Complex::new(lambda, 0.0)), &params).unwrap();
                assert!((h - lambda * lambda * h0).abs() <= 1e-12 * (lambda * lambda * h0).abs());
            }
            let h = hamiltonian_functional(&s.scaled(Complex::new(0.0, 2.5)), &params).unwrap();
            assert!((h - 6.25 * h0).abs() <= 1e-12 * (6.25 * h0).abs());
        }
    }

    #[test]
    fn hamiltonian_matches_breakdown_on_ground_state() {
        let p = natural_ground();
        let e = energy_breakdown(&p).unwrap();
        let s = RadialState::from_psi(*p.f.grid(), p.f.values(), 1.0, 1.0).unwrap();
        let h = hamiltonian_functional(&s, &p.params).unwrap();
        assert!((h - e.e_total).abs() <= 1e-9 * e.e_total.abs());
    }

    #[test]
    fn narrow_gaussian_is_nearly_free() {
        // kinetic ∝ 1/σ², self-energy ∝ 1/σ: gravity is negligible for σ ≪ a_g
        let params = PhysicalParams::natural();
        let ratio = |sigma: f64| {
            let grid = make_grid(12.0 * sigma, 4001).unwrap();
            let s = RadialState::gaussian(grid, sigma, 1.0, 1.0).unwrap();
            let h = hamiltonian_functional(&s, &params).unwrap();
            let k = s.kinetic_energy();
            (h - k) / k
        };
        assert!(ratio(0.01).abs() < 0.01);
        // and dominant for σ ≫ a_g
        assert!(ratio(100.0) < -10.0);
    }

    #[test]
    fn mismatched_state_rejected() {
        let grid = make_grid(10.0f64, 101).unwrap();
        let s = RadialState::gaussian(grid, 1.0, 2.0, 1.0).unwrap();
        assert!(hamiltonian_functional(&s, &PhysicalParams::natural()).is_err());
    }

    // Literal double integral  -(G N m² / 2) ∫∫ ρ(x) ρ(y) / |x - y|, with the
    // angular integrals done analytically: 1/|x-y| averages to 1/max(r, s).
    fn double_integral_self_energy(state: &RadialState<f64>, params: &PhysicalParams<f64>) -> f64 {
        let grid = state.grid;
        let h = grid.spacing();
        let d = state.density();
        let r: Vec<f64> = grid.nodes().collect();
        let n = r.len();
        let outer: Vec<f64> = (0..n)
            .map(|i| {
                let row: Vec<f64> = (0..n).map(|j| r[j] * r[j] * d[j] / r[i].max(r[j]).max(1e-300)).collect();
                let inner = if i >= 2 { integrate_uniform(&row[..=i], h) } else { 0.0 };
                let inner = if i == 1 { h * row[1] / 2.0 } else { inner };
                let outer = if n - 1 - i >= 2 { integrate_uniform(&row[i..], h) } else { 0.0 };
                r[i] * r[i] * d[i] * (inner + outer)
            })
            .collect();
        let four_pi = 4.0 * std::f64::consts::PI;
        let total = four_pi * four_pi * integrate_uniform(&outer, h);
        let norm = state.norm();
        -params.g * params.n_particles * params.mass * params.mass / 2.0 * total / norm
    }

    #[test]
    fn self_energy_matches_double_integral() {
        let params = PhysicalParams::new(1.0, 2.0, 1.0, 0.5).unwrap();
        let grid = make_grid(10.0f64, 401).unwrap();
        let s = RadialState::gaussian(grid, 1.0, 1.0, 1.0).unwrap();
        let fast = gravity_energy(&s, &params).unwrap();
        let slow = double_integral_self_energy(&s, &params);
        assert!(((fast - slow) / slow).abs() < 1e-6, "{fast} {slow}");
        // analytic value for a Gaussian with density std σ: -G N m² / (2 σ √π)
        let exact = -params.g * params.n_particles * params.mass * params.mass / (2.0 * std::f64::consts::PI.sqrt());
        assert!(((fast - exact) / exact).abs() < 1e-6, "{fast} {exact}");
    }
}
