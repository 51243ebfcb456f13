use super::{NumericsError, RadialGrid};

/// `∫₀^R v dr` for nodal values `v` on `grid`.
pub fn quad(grid: &RadialGrid, values: &[f64]) -> Result<f64, NumericsError> {
    if values.len() != grid.len() {
        return Err(NumericsError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(grid
        .weights()
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum())
}

/// `∫₀^R f(r) dr` sampling `f` at the grid nodes.
pub fn quad_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> f64 {
    grid.weights()
        .iter()
        .zip(grid.nodes())
        .map(|(w, &r)| w * f(r))
        .sum()
}
