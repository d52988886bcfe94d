//! Composite quadrature on uniform radial grids.
//!
//! Every interval `[x_i, x_{i+1}]` is integrated with the quadratic through
//! three neighbouring samples. Forward stencils on even intervals and
//! backward stencils on odd ones make each pair of intervals sum to exactly
//! one composite Simpson panel, so cumulative integrals taken at even nodes
//! are Simpson sums and the odd nodes stay third-order accurate locally.

use crate::error::Result;
use crate::grid::RadialField;
use crate::real::Real;

/// Integral of the sampled function over each grid interval.
pub fn interval_integrals<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    assert!(n >= 3, "quadrature needs at least three samples");
    let w = h / T::lit(12.0);
    let (five, eight) = (T::lit(5.0), T::lit(8.0));
    (0..n - 1)
        .map(|i| {
            if i % 2 == 0 && i + 2 < n {
                w * (five * values[i] + eight * values[i + 1] - values[i + 2])
            } else {
                w * (five * values[i + 1] + eight * values[i] - values[i - 1])
            }
        })
        .collect()
}

/// Running integral `∫_{x_0}^{x_i}` at every node, starting from zero.
pub fn cumulative<T: Real>(values: &[T], h: T) -> Vec<T> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = T::zero();
    out.push(acc);
    for piece in interval_integrals(values, h) {
        acc = acc + piece;
        out.push(acc);
    }
    out
}

/// Running integral `∫_{x_i}^{x_last}` at every node.
pub fn cumulative_from_end<T: Real>(values: &[T], h: T) -> Vec<T> {
    let pieces = interval_integrals(values, h);
    let mut out = vec![T::zero(); values.len()];
    let mut acc = T::zero();
    for i in (0..pieces.len()).rev() {
        acc = acc + pieces[i];
        out[i] = acc;
    }
    out
}

/// Integral over the whole uniform grid. Composite Simpson when the number
/// of intervals is even; the trailing interval of an odd count uses the
/// backward quadratic stencil.
pub fn integrate_uniform<T: Real>(values: &[T], h: T) -> T {
    interval_integrals(values, h)
        .into_iter()
        .fold(T::zero(), |a, b| a + b)
}

/// `∫_0^{rho_max} h(ρ) ρ² dρ` for a sampled field.
pub fn integrate_radial<T: Real>(field: &RadialField<T>) -> Result<T> {
    field.check_finite()?;
    let grid = field.grid();
    let integrand: Vec<T> = field
        .values()
        .iter()
        .zip(grid.nodes())
        .map(|(&v, r)| v * r * r)
        .collect();
    Ok(integrate_uniform(&integrand, grid.spacing()))
}
