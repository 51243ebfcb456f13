//! Second variation of the energy at the radial solution.
//!
//! A perturbation `φ = Σ φₙ(r) e^{inθ}` splits the second variation into the
//! one-dimensional forms `E₁(φ₁)` and `Eₙ(φₙ, φ₂₋ₙ)`, each of which separates
//! further into a real and an imaginary sector. Every form is discretized
//! with piecewise-linear elements on the grid nodes with `r > 0`, trapezoidal
//! (nodal) quadrature, and the lumped `r dr` mass absorbed symmetrically, so
//! the generalized problem `K v = λ W v` becomes the banded symmetric
//! `W^{-1/2} K W^{-1/2}`.
//!
//! For `n = 2` the imaginary sector in the variables `A = φ₀ + φ₂`,
//! `B = φ₀ − φ₂` is the form `F₂`; [`assemble_g2`] builds the reduced form
//! `G₂` whose coefficients carry the sign structure used in the Picone
//! argument.

mod coefficients;
mod forms;
mod picone;
mod spectrum;

pub use coefficients::{coefficient_signs, h_slope, CoefficientTables, SignCertificate};
pub use forms::{
    assemble_e1, assemble_en, assemble_f2, assemble_g2, far_field_exponent, remainder_form,
};
pub use picone::{cutoff, cutoff_slope, picone_certificate, PiconeReport};
pub use spectrum::{
    analyze, spectrum, ModeResult, SpectrumReport, StabilityOptions, StabilityReport, Verdict,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{BandedSymmetricMatrix, NumericsError, RadialGrid};
use crate::profile::ProfileError;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("mode index must be at least {min} (got {n})")]
    InvalidMode { n: usize, min: usize },
    #[error("expected {expected} nodal values per component, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("test pair must vanish at r = {radius} (value {value:e})")]
    SupportTouchesBoundary { radius: f64, value: f64 },
    #[error("{0}")]
    Profile(#[from] ProfileError),
    #[error("{0}")]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Real,
    Imaginary,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Real => "real",
            Sector::Imaginary => "imaginary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    /// `E₁` (one component).
    E1,
    /// `Eₙ` on the pair `(φₙ, φ₂₋ₙ)`.
    En,
    /// `E₂` imaginary sector in `(A, B)` variables.
    F2,
    /// Reduced form of `F₂` in `(A, B)` variables.
    G2,
    /// `F₂ − G₂` remainder in `(A, B)` variables.
    Remainder,
}

/// A discretized quadratic form.
///
/// Degrees of freedom are interleaved: component `k` at node `j` (counting
/// only nodes with `r > 0`) sits at index `j·blocks + k`.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    kind: FormKind,
    n: usize,
    sector: Sector,
    p: f64,
    blocks: usize,
    grid: RadialGrid,
    matrix: BandedSymmetricMatrix,
    sqrt_mass: Vec<f64>,
    locals: Vec<Local>,
    boundary: Boundary,
    zero_mode: Option<Vec<f64>>,
}

impl ModeOperator {
    pub fn kind(&self) -> FormKind {
        self.kind
    }
    pub fn mode(&self) -> usize {
        self.n
    }
    pub fn sector(&self) -> Sector {
        self.sector
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn blocks(&self) -> usize {
        self.blocks
    }
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    /// The scaled operator `W^{-1/2} K W^{-1/2}`.
    pub fn matrix(&self) -> &BandedSymmetricMatrix {
        &self.matrix
    }
    pub fn order(&self) -> usize {
        self.matrix.order()
    }
    /// Infinity norm of the scaled operator.
    pub fn norm(&self) -> f64 {
        self.matrix.norm_inf()
    }
    /// Radii of the degrees of freedom (grid nodes with `r > 0`).
    pub fn radii(&self) -> &[f64] {
        &self.grid.nodes()[1..]
    }
    /// Nodal values of the analytic kernel direction, if the form has one.
    pub fn zero_mode(&self) -> Option<&[f64]> {
        self.zero_mode.as_deref()
    }

    /// Interleaves full-grid component arrays, dropping the node at `r = 0`.
    pub fn pack(&self, components: &[&[f64]]) -> Result<Vec<f64>, StabilityError> {
        pack(self.grid.len(), self.blocks, components)
    }

    /// Nodal vector to the symmetric (mass-scaled) variables.
    pub fn to_scaled(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.sqrt_mass).map(|(a, s)| a * s).collect()
    }
    pub fn from_scaled(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.sqrt_mass).map(|(a, s)| a / s).collect()
    }

    /// Discrete form value on a nodal vector.
    pub fn form_value(&self, v: &[f64]) -> f64 {
        self.matrix.quadratic_form(&self.to_scaled(v))
    }

    /// `‖op‖∞ · ‖W^{1/2} v‖²`, the reference size for "approximately zero".
    pub fn scale(&self, v: &[f64]) -> f64 {
        self.norm() * self.to_scaled(v).iter().map(|x| x * x).sum::<f64>()
    }

    /// The form evaluated with Simpson quadrature on the profile grid, given
    /// nodal values and exact nodal derivatives (both packed). Includes the
    /// far-field term at `R`.
    pub fn functional(&self, values: &[f64], derivatives: &[f64]) -> f64 {
        let m = self.blocks;
        let weights = &self.grid.weights()[1..];
        let mut total = 0.0;
        for (j, q) in self.locals.iter().enumerate() {
            let mut z = [0.0; 4];
            for c in 0..m {
                z[c] = derivatives[j * m + c];
                z[m + c] = values[j * m + c];
            }
            total += weights[j] * quad_local(q, &z, 2 * m);
        }
        let last = self.locals.len() - 1;
        total + self.boundary.value(&values[last * m..])
    }

    /// Weak Euler-Lagrange residual `‖W^{-1/2} K v‖ / (‖op‖ ‖W^{1/2} v‖)`.
    pub fn residual(&self, v: &[f64]) -> f64 {
        let y = self.to_scaled(v);
        let ky = self.matrix.matvec(&y);
        let num = ky.iter().map(|x| x * x).sum::<f64>().sqrt();
        let den = self.norm() * y.iter().map(|x| x * x).sum::<f64>().sqrt();
        num / den
    }
}

pub(crate) fn pack(
    grid_len: usize,
    blocks: usize,
    components: &[&[f64]],
) -> Result<Vec<f64>, StabilityError> {
    if components.len() != blocks {
        return Err(StabilityError::LengthMismatch { expected: blocks, got: components.len() });
    }
    for c in components {
        if c.len() != grid_len {
            return Err(StabilityError::LengthMismatch { expected: grid_len, got: c.len() });
        }
    }
    let mut out = Vec::with_capacity((grid_len - 1) * blocks);
    for j in 1..grid_len {
        for c in components {
            out.push(c[j]);
        }
    }
    Ok(out)
}

/// Integrand at one node as a symmetric quadratic form in
/// `(u₁′, …, u_m′, u₁, …, u_m)`, already multiplied by the measure (`r` for
/// the `r dr` forms).
pub(crate) type Local = [[f64; 4]; 4];

fn quad_local(q: &Local, z: &[f64; 4], len: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..len {
        for j in 0..len {
            s += q[i][j] * z[i] * z[j];
        }
    }
    s
}

/// Far-field energy beyond `R` as a quadratic form in the values at `R`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Boundary(pub [[f64; 2]; 2]);

impl Boundary {
    fn value(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                s += self.0[i][j] * x[i] * x[j];
            }
        }
        s
    }
}

pub(crate) struct Assembled {
    pub matrix: BandedSymmetricMatrix,
    pub sqrt_mass: Vec<f64>,
    pub locals: Vec<Local>,
}

/// P1 assembly with trapezoidal quadrature over the nodes `r > 0`, plus the
/// boundary form at the last node.
///
/// `local(j)` is the integrand at node `j + 1` of the grid.
pub(crate) fn assemble<F>(grid: &RadialGrid, blocks: usize, local: F, boundary: Boundary) -> Assembled
where
    F: Fn(usize) -> Local,
{
    let r = &grid.nodes()[1..];
    let nodes = r.len();
    let m = blocks;
    let mut k = BandedSymmetricMatrix::zeros(nodes * m, 2 * m - 1);
    let mut mass = vec![0.0; nodes];
    let qs: Vec<Local> = (0..nodes).map(&local).collect();
    let last = (nodes - 1) * m;
    for a in 0..m {
        for b in 0..=a {
            k.add(last + a, last + b, boundary.0[a][b]);
        }
    }
    for e in 0..nodes - 1 {
        let dr = r[e + 1] - r[e];
        for (side, q) in [(0usize, &qs[e]), (1, &qs[e + 1])] {
            // z = t · x with x the 2m local unknowns (node e then node e + 1)
            let mut t = [[0.0; 4]; 4];
            for c in 0..m {
                t[c][c] = -1.0 / dr;
                t[c][m + c] = 1.0 / dr;
                t[m + c][side * m + c] = 1.0;
            }
            let w = 0.5 * dr;
            for a in 0..2 * m {
                for b in 0..=a {
                    let mut s = 0.0;
                    for i in 0..2 * m {
                        if t[i][a] == 0.0 {
                            continue;
                        }
                        for j in 0..2 * m {
                            s += t[i][a] * q[i][j] * t[j][b];
                        }
                    }
                    k.add(e * m + a, e * m + b, w * s);
                }
            }
            mass[e + side] += w * r[e + side];
        }
    }
    let sqrt_mass: Vec<f64> = mass.iter().flat_map(|&w| std::iter::repeat_n(w.sqrt(), m)).collect();
    for i in 0..k.order() {
        for j in i.saturating_sub(k.bandwidth())..=i {
            let v = k.get(i, j) / (sqrt_mass[i] * sqrt_mass[j]);
            k.set(i, j, v);
        }
    }
    Assembled { matrix: k, sqrt_mass, locals: qs }
}
