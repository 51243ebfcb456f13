use rayon::prelude::*;
use serde::Serialize;

use super::coefficients::{coefficient_signs, CoefficientTables, SignCertificate};
use super::forms::{assemble_e1, assemble_en};
use super::{FormKind, ModeOperator, Sector, StabilityError};
use crate::numerics::{lowest_eigenpairs, RadialGrid};
use crate::profile::{solve_shooting, Params, Profile};

/// Negative eigenvalues are counted below `-NEGATIVE_TOL · ‖op‖`.
pub const NEGATIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub kind: FormKind,
    pub n: usize,
    pub sector: Sector,
    pub norm: f64,
    /// Ascending Rayleigh quotients of the computed eigenvectors.
    pub eigenvalues: Vec<f64>,
    /// `|cos|` between each eigenvector and the kernel direction in the
    /// mass-weighted inner product; empty if the form has none.
    pub zero_mode_overlaps: Vec<f64>,
    pub negative_count: usize,
    /// Eigenvectors as nodal values (`W`-normalized), interleaved.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Lowest `k` eigenpairs of `W^{-1/2} K W^{-1/2}`.
pub fn spectrum(op: &ModeOperator, k: usize) -> Result<SpectrumReport, StabilityError> {
    let k = k.min(op.order());
    let pairs = lowest_eigenpairs(op.matrix(), k)?;
    let mut refined: Vec<(f64, Vec<f64>)> = pairs
        .into_iter()
        .map(|pair| (op.matrix().quadratic_form(&pair.vector), pair.vector))
        .collect();
    refined.sort_by(|a, b| a.0.total_cmp(&b.0));
    let norm = op.norm();
    let zero = op.zero_mode().map(|z| {
        let y = op.to_scaled(z);
        let nrm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        y.into_iter().map(|x| x / nrm).collect::<Vec<_>>()
    });
    let zero_mode_overlaps = zero
        .map(|z| {
            refined
                .iter()
                .map(|(_, v)| v.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().abs().min(1.0))
                .collect()
        })
        .unwrap_or_default();
    let negative_count = refined.iter().filter(|(l, _)| *l < -NEGATIVE_TOL * norm).count();
    Ok(SpectrumReport {
        kind: op.kind(),
        n: op.mode(),
        sector: op.sector(),
        norm,
        eigenvalues: refined.iter().map(|(l, _)| *l).collect(),
        zero_mode_overlaps,
        negative_count,
        eigenvectors: refined.into_iter().map(|(_, v)| op.from_scaled(&v)).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityOptions {
    pub nodes: usize,
    pub radius: Option<f64>,
    pub modes: Vec<usize>,
    pub eigenpairs: usize,
    /// An eigenvalue is near zero if `|λ| ≤ drift_factor · |λ(N) − λ(2N−1)|`.
    pub drift_factor: f64,
    pub ode_tol: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            nodes: 2000,
            radius: None,
            modes: (1..=8).collect(),
            eigenpairs: 6,
            drift_factor: 100.0,
            ode_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeResult {
    pub n: usize,
    pub sector: Sector,
    pub norm: f64,
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues on the refined grid.
    pub refined: Vec<f64>,
    pub drift: Vec<f64>,
    pub overlaps: Vec<f64>,
    /// Indices of near-zero eigenvalues.
    pub near_zero: Vec<usize>,
    pub negative_count: usize,
}

impl ModeResult {
    pub fn smallest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }
    /// Smallest eigenvalue relative to the operator norm.
    pub fn relative_smallest(&self) -> f64 {
        self.smallest() / self.norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    OutsideCertifiedRange,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Stable => "STABLE",
            Verdict::Unstable => "UNSTABLE",
            Verdict::OutsideCertifiedRange => "outside certified range",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub p: f64,
    pub nodes: usize,
    pub radius: f64,
    pub modes: Vec<ModeResult>,
    pub kernel_dimension: usize,
    /// Overlap of each near-zero eigenvector with its kernel direction.
    pub kernel_overlaps: Vec<f64>,
    pub negative_total: usize,
    pub signs: SignCertificate,
    pub verdict: Verdict,
}

fn operator(profile: &Profile, n: usize, sector: Sector) -> Result<ModeOperator, StabilityError> {
    if n == 1 {
        Ok(assemble_e1(profile, sector))
    } else {
        assemble_en(n, profile, sector)
    }
}

/// Spectra of the mode family on `nodes` and on the bisected grid, with
/// near-zero eigenvalues identified by their refinement drift.
pub fn analyze(params: Params, opts: &StabilityOptions) -> Result<StabilityReport, StabilityError> {
    if let Some(&n) = opts.modes.iter().find(|&&n| n == 0) {
        return Err(StabilityError::InvalidMode { n, min: 1 });
    }
    let radius = opts.radius.unwrap_or_else(|| params.default_radius());
    let coarse_grid = RadialGrid::graded(radius, opts.nodes)?;
    let fine_grid = coarse_grid.refined();
    let coarse = solve_shooting(params, &coarse_grid, opts.ode_tol)?;
    let fine = solve_shooting(params, &fine_grid, opts.ode_tol)?;
    let tasks: Vec<(usize, Sector)> = opts
        .modes
        .iter()
        .flat_map(|&n| [(n, Sector::Real), (n, Sector::Imaginary)])
        .collect();
    let modes: Vec<ModeResult> = tasks
        .par_iter()
        .map(|&(n, sector)| -> Result<ModeResult, StabilityError> {
            let a = spectrum(&operator(&coarse, n, sector)?, opts.eigenpairs)?;
            let b = spectrum(&operator(&fine, n, sector)?, opts.eigenpairs)?;
            let drift: Vec<f64> =
                a.eigenvalues.iter().zip(&b.eigenvalues).map(|(x, y)| (x - y).abs()).collect();
            let near_zero = a
                .eigenvalues
                .iter()
                .zip(&drift)
                .enumerate()
                .filter(|(_, (l, d))| l.abs() <= opts.drift_factor * **d)
                .map(|(i, _)| i)
                .collect();
            Ok(ModeResult {
                n,
                sector,
                norm: a.norm,
                eigenvalues: a.eigenvalues,
                refined: b.eigenvalues,
                drift,
                overlaps: a.zero_mode_overlaps,
                near_zero,
                negative_count: a.negative_count,
            })
        })
        .collect::<Result<_, _>>()?;
    let kernel_overlaps: Vec<f64> = modes
        .iter()
        .flat_map(|m| m.near_zero.iter().map(|&i| m.overlaps.get(i).copied().unwrap_or(0.0)))
        .collect();
    let negative_total = modes.iter().map(|m| m.negative_count).sum();
    let signs = coefficient_signs(&CoefficientTables::new(&coarse));
    let verdict = if params.p() > 4.0 {
        Verdict::OutsideCertifiedRange
    } else if negative_total == 0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    Ok(StabilityReport {
        p: params.p(),
        nodes: opts.nodes,
        radius,
        kernel_dimension: kernel_overlaps.len(),
        kernel_overlaps,
        negative_total,
        modes,
        signs,
        verdict,
    })
}
