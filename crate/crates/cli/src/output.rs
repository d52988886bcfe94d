//! JSON records and CSV tables written by the commands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sn_core::physical::{PhysicalProfile, EnergyBreakdown};
use sn_core::{ObservableSeries, RadialField, UniversalSolution};

use crate::error::CliError;

pub const GENERATED_BY: &str = concat!("sng ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridRecord {
    pub rho_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateRecord {
    pub generated_by: String,
    pub n: usize,
    pub gamma0: f64,
    pub gamma1: f64,
    pub epsilon_star: f64,
    pub node_count: usize,
    pub bracket_width: f64,
    pub grid: GridRecord,
    #[serde(default)]
    pub x_clamp_radius: Option<f64>,
    #[serde(default)]
    pub x_g_infinity: Option<f64>,
    #[serde(default)]
    pub x_bisection_iterations: Option<usize>,
}

impl StateRecord {
    pub fn from_solution(sol: &UniversalSolution<f64>) -> Self {
        Self {
            generated_by: GENERATED_BY.to_string(),
            n: sol.n,
            gamma0: sol.gamma0,
            gamma1: sol.gamma1,
            epsilon_star: sol.epsilon_star,
            node_count: sol.node_count,
            bracket_width: sol.bracket_width,
            grid: GridRecord {
                rho_max: sol.grid.rho_max(),
                points: sol.grid.n_points(),
            },
            x_clamp_radius: Some(sol.clamp_radius),
            x_g_infinity: Some(sol.g_infinity),
            x_bisection_iterations: Some(sol.iterations),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RescaleRecord {
    pub generated_by: String,
    pub bohr_radius_m: f64,
    pub half_max_radius_m: f64,
    pub rms_radius_m: f64,
    #[serde(rename = "e_kinetic_J")]
    pub e_kinetic_j: f64,
    #[serde(rename = "e_gravity_J")]
    pub e_gravity_j: f64,
    #[serde(rename = "e_total_J")]
    pub e_total_j: f64,
    #[serde(rename = "epsilon_J")]
    pub epsilon_j: f64,
    #[serde(rename = "e_single_J")]
    pub e_single_j: f64,
    pub virial_residual: f64,
    pub renormalized: bool,
    pub x_n: usize,
    pub x_mass_kg: f64,
    pub x_n_particles: f64,
    /// Radius enclosing 99% of the probability.
    pub x_localization_radius_m: f64,
    #[serde(rename = "x_epsilon_shoot_J")]
    pub x_epsilon_shoot_j: f64,
    pub x_norm: f64,
    pub x_raw_norm: f64,
    pub x_phi_shift: f64,
    /// Potential prefactor used, `2 G² N² m⁴ / (γ₁² ħ²)`.
    pub x_phi_prefactor: f64,
    /// The same prefactor with a single power of N.
    pub x_phi_prefactor_single_n: f64,
}

impl RescaleRecord {
    pub fn new(profile: &PhysicalProfile<f64>, energies: &EnergyBreakdown<f64>) -> Self {
        let p = &profile.params;
        let phi_prefactor = profile.energy_scale / p.mass;
        Self {
            generated_by: GENERATED_BY.to_string(),
            bohr_radius_m: profile.bohr_radius,
            half_max_radius_m: profile.half_max_radius(),
            rms_radius_m: profile.rms_radius(),
            e_kinetic_j: energies.e_kinetic,
            e_gravity_j: energies.e_gravity,
            e_total_j: energies.e_total,
            epsilon_j: energies.epsilon,
            e_single_j: energies.e_single,
            virial_residual: energies.virial_residual(),
            renormalized: profile.renormalized,
            x_n: profile.n,
            x_mass_kg: p.mass,
            x_n_particles: p.n_particles,
            x_localization_radius_m: profile.mass_radius(0.99),
            x_epsilon_shoot_j: profile.epsilon_shoot,
            x_norm: profile.norm,
            x_raw_norm: profile.raw_norm,
            x_phi_shift: profile.phi_shift,
            x_phi_prefactor: phi_prefactor,
            x_phi_prefactor_single_n: phi_prefactor / p.n_particles,
        }
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table held in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| fmt_num(x)))?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

pub fn universal_table(sol: &UniversalSolution<f64>) -> Table {
    let mut t = Table::new(vec!["rho", "f_star", "g_star"]);
    for (i, rho) in sol.grid.nodes().enumerate() {
        t.push(vec![rho, sol.f_star[i], sol.g_star[i]]);
    }
    t
}

pub fn profile_table(profile: &PhysicalProfile<f64>) -> Table {
    let mut t = Table::new(vec!["r_m", "f", "phi"]);
    for (i, r) in profile.f.grid().nodes().enumerate() {
        t.push(vec![r, profile.f[i], profile.phi[i]]);
    }
    t
}

pub fn series_table(series: &ObservableSeries<f64>) -> Table {
    let mut t = Table::new(vec!["t", "norm", "energy", "rms_width"]);
    for i in 0..series.len() {
        t.push(vec![series.times[i], series.norms[i], series.energies[i], series.widths[i]]);
    }
    t
}

pub fn density_table(density: &RadialField<f64>) -> Table {
    let mut t = Table::new(vec!["r", "density"]);
    for (i, r) in density.grid().nodes().enumerate() {
        t.push(vec![r, density[i]]);
    }
    t
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Files collected during a command and written together at the end.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(std::path::PathBuf, Vec<u8>)>,
    stdout: Vec<u8>,
}

impl Outputs {
    pub fn file(&mut self, path: &Path, bytes: Vec<u8>) {
        self.files.push((path.to_path_buf(), bytes));
    }

    /// Writes to `path` if given, otherwise to standard output.
    pub fn file_or_stdout(&mut self, path: Option<&Path>, bytes: Vec<u8>) {
        match path {
            Some(p) => self.file(p, bytes),
            None => self.stdout.extend(bytes),
        }
    }

    pub fn flush(self) -> Result<(), CliError> {
        for (path, bytes) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
        }
        if !self.stdout.is_empty() {
            use std::io::Write;
            std::io::stdout()
                .write_all(&self.stdout)
                .map_err(|e| CliError::Output(e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_num(-0.1).parse::<f64>().unwrap(), -0.1);
        let x = 0.918_579_771_779_123_4;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn table_has_single_header() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![1.0, 2.0]);
        let s = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(s, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
