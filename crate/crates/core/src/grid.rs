//! Uniform radial grids and the sampled fields that live on them.

use crate::error::{Error, Result};
use crate::real::Real;

/// Uniform discretization of the radial half-line `[0, rho_max]`.
///
/// Nodes are generated on demand; the first node is exactly zero and the
/// last is exactly `rho_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid<T> {
    rho_max: T,
    n_points: usize,
    spacing: T,
}

/// Spacing mode of a [`RadialGrid`]. Only uniform grids exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingKind {
    Uniform,
}

/// Builds a uniform grid with `n_points` nodes on `[0, rho_max]`.
pub fn make_grid<T: Real>(rho_max: T, n_points: usize) -> Result<RadialGrid<T>> {
    RadialGrid::uniform(rho_max, n_points)
}

impl<T: Real> RadialGrid<T> {
    pub fn uniform(rho_max: T, n_points: usize) -> Result<Self> {
        if !(rho_max > T::zero()) || !rho_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid radius must be positive and finite, got {}",
                rho_max
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 3 points, got {n_points}"
            )));
        }
        Ok(Self {
            rho_max,
            n_points,
            spacing: rho_max / T::from_count(n_points - 1),
        })
    }

    #[inline]
    pub fn rho_max(&self) -> T {
        self.rho_max
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    #[inline]
    pub fn spacing_kind(&self) -> SpacingKind {
        SpacingKind::Uniform
    }

    /// Radius of node `i`.
    #[inline]
    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            self.rho_max
        } else {
            T::from_count(i) * self.spacing
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    /// Same node count, radii multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::uniform(self.rho_max * factor, self.n_points)
    }

    /// Grid with the same extent and `2(n-1)+1` nodes.
    pub fn refined(&self) -> Self {
        Self::uniform(self.rho_max, 2 * (self.n_points - 1) + 1).expect("refinement of a valid grid")
    }

    /// Index of the node closest to `rho`, clamped into the grid.
    pub fn nearest_index(&self, rho: T) -> usize {
        let x = (rho / self.spacing).round();
        if !(x > T::zero()) {
            return 0;
        }
        x.to_usize().unwrap_or(self.n_points - 1).min(self.n_points - 1)
    }
}

/// Real samples of a radial function, one per node of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField<T> {
    grid: RadialGrid<T>,
    values: Vec<T>,
}

impl<T: Real> RadialField<T> {
    /// Wraps samples; fails when the length does not match or a sample is
    /// not finite.
    pub fn new(grid: RadialGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidField(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n_points()
            )));
        }
        let field = Self { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    pub fn zeros(grid: RadialGrid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.n_points()],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: RadialGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    #[inline]
    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::InvalidField(format!(
                "non-finite sample {} at node {i}",
                self.values[i]
            ))),
            None => Ok(()),
        }
    }

    /// Pointwise map onto a new field on the same grid.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Same samples attached to a different grid with the same node count.
    pub fn with_grid(&self, grid: RadialGrid<T>) -> Result<Self> {
        Self::new(grid, self.values.clone())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Linear interpolation at an arbitrary radius; zero beyond the grid.
    pub fn interpolate(&self, rho: T) -> T {
        let h = self.grid.spacing();
        if rho < T::zero() {
            return self.values[0];
        }
        if rho > self.grid.rho_max() {
            return T::zero();
        }
        let x = rho / h;
        let i = x.floor().to_usize().unwrap_or(0).min(self.values.len() - 2);
        let t = x - T::from_count(i);
        self.values[i] * (T::one() - t) + self.values[i + 1] * t
    }
}

impl<T> std::ops::Index<usize> for RadialField<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_spacing_grid() {
        let g = make_grid(10.0, 11).unwrap();
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes, (0..=10).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn three_point_grid() {
        let g = make_grid(1.0, 3).unwrap();
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn default_shooting_grid() {
        let g = make_grid(40.0f64, 8001).unwrap();
        assert!((g.spacing() - 0.005).abs() < 1e-15);
        assert_eq!(g.node(8000), 40.0);
        assert_eq!(g.node(0), 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(make_grid(0.0, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(-1.0, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(f64::NAN, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(1.0, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_precision_grid() {
        let g = make_grid(2.0f32, 5).unwrap();
        assert_eq!(g.node(4), 2.0f32);
        assert_eq!(g.node(2), 1.0f32);
    }

    #[test]
    fn field_rejects_nan_and_wrong_length() {
        let g = make_grid(1.0, 3).unwrap();
        assert!(RadialField::new(g, vec![0.0, 1.0]).is_err());
        assert!(RadialField::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(RadialField::new(g, vec![0.0, f64::INFINITY, 1.0]).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_linear_data() {
        let g = make_grid(4.0f64, 9).unwrap();
        let f = RadialField::from_fn(g, |r| 2.0 * r + 1.0).unwrap();
        assert!((f.interpolate(1.3) - 3.6).abs() < 1e-14);
        assert_eq!(f.interpolate(5.0), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn grid_invariants(rho_max in 1e-3f64..1e4, n in 3usize..5000) {
            let g = make_grid(rho_max, n).unwrap();
            let h = rho_max / (n - 1) as f64;
            proptest::prop_assert_eq!(g.node(0), 0.0);
            proptest::prop_assert_eq!(g.node(n - 1), rho_max);
            for i in 0..n - 1 {
                let d = g.node(i + 1) - g.node(i);
                proptest::prop_assert!(d > 0.0);
                proptest::prop_assert!((d - h).abs() <= 1e-12 * rho_max);
            }
        }
    }
}
