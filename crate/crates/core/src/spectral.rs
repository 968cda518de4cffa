//! Discretized biphoton wave functions and their Schmidt analysis.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::source::SourceParams;

/// Tolerance on the discrete normalization `sum |phi|^2 dk^2 = 1`.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid k-grid: {0}")]
    InvalidGrid(String),

    #[error("invalid BWF model: {0}")]
    InvalidModel(String),

    #[error("BWF is not normalized: sum |phi|^2 dk^2 = {0}")]
    NotNormalized(f64),

    #[error("BWF matrix must be {expected}x{expected}, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
}

/// Uniform grid of wavevector bins centred on `k0`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGrid {
    pub k0: f64,
    #[serde(default = "one")]
    pub dk: f64,
    #[serde(default = "one_usize")]
    pub n_bins: usize,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl KGrid {
    pub fn new(k0: f64, dk: f64, n_bins: usize) -> Result<Self, SpectralError> {
        let g = Self { k0, dk, n_bins };
        g.validate()?;
        Ok(g)
    }

    /// Single-mode idealization at `k0`.
    pub fn single(k0: f64) -> Self {
        Self { k0, dk: 1.0, n_bins: 1 }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.n_bins == 0 {
            return Err(SpectralError::InvalidGrid("n_bins must be >= 1".into()));
        }
        if !self.k0.is_finite() {
            return Err(SpectralError::InvalidGrid("k0 must be finite".into()));
        }
        if self.n_bins > 1 && !(self.dk > 0.0 && self.dk.is_finite()) {
            return Err(SpectralError::InvalidGrid(format!("dk must be > 0, got {}", self.dk)));
        }
        Ok(())
    }

    /// Wavevector at the centre of bin `i`.
    pub fn k(&self, i: usize) -> f64 {
        if self.n_bins == 1 {
            return self.k0;
        }
        self.k0 + (i as f64 - (self.n_bins as f64 - 1.0) / 2.0) * self.dk
    }

    pub fn ks(&self) -> Vec<f64> {
        (0..self.n_bins).map(|i| self.k(i)).collect()
    }

    /// Integration weight of one bin. A single-bin grid uses weight 1.
    pub fn bin_width(&self) -> f64 {
        if self.n_bins == 1 {
            1.0
        } else {
            self.dk
        }
    }
}

/// Functional form of a single-ring biphoton wave function.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BwfModel {
    SingleBin,
    /// `v(k1) v(k2)` with `v(k) ~ exp(-(k-k0)^2 / (4 sigma^2))`.
    SeparableGaussian { sigma: f64 },
    /// `exp(-(k1+k2-2k0)^2 / (4 sigma_s^2) - (k1-k2)^2 / (4 sigma_a^2))`.
    CorrelatedGaussian { sigma_s: f64, sigma_a: f64 },
}

impl BwfModel {
    fn widths(&self) -> Vec<f64> {
        match *self {
            BwfModel::SingleBin => vec![],
            BwfModel::SeparableGaussian { sigma } => vec![sigma],
            BwfModel::CorrelatedGaussian { sigma_s, sigma_a } => vec![sigma_s, sigma_a],
        }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.widths().iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(SpectralError::InvalidModel(format!("widths must be > 0: {self:?}")));
        }
        Ok(())
    }
}

/// Non-fatal discretization diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralWarning {
    /// A model width is smaller than the bin width.
    UnderResolved { width: f64, dk: f64 },
}

impl std::fmt::Display for SpectralWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectralWarning::UnderResolved { width, dk } => {
                write!(f, "model width {width} is below the bin width {dk}")
            }
        }
    }
}

/// `phi(k1, k2)` sampled on a [`KGrid`], with `sum |phi|^2 w^2 = 1` where
/// `w` is the bin width.
#[derive(Clone, Debug, PartialEq)]
pub struct BwfMatrix {
    grid: KGrid,
    values: DMatrix<C64>,
}

impl BwfMatrix {
    /// Wraps raw samples, rejecting anything that is not normalized.
    pub fn from_values(grid: KGrid, values: DMatrix<C64>) -> Result<Self, SpectralError> {
        grid.validate()?;
        let n = grid.n_bins;
        if values.nrows() != n || values.ncols() != n {
            return Err(SpectralError::Shape {
                expected: n,
                rows: values.nrows(),
                cols: values.ncols(),
            });
        }
        let b = Self { grid, values };
        let s = b.norm_sqr();
        if (s - 1.0).abs() > NORM_TOL {
            return Err(SpectralError::NotNormalized(s));
        }
        Ok(b)
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> C64 {
        self.values[(i, j)]
    }

    /// Discrete amplitudes `phi(k_i, k_j) * w`; a unit-norm matrix.
    pub fn weights(&self) -> DMatrix<C64> {
        let w = self.grid.bin_width();
        self.values.map(|v| v * w)
    }

    pub fn norm_sqr(&self) -> f64 {
        let w = self.grid.bin_width();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w * w
    }

    pub fn scale_phase(&self, phase: f64) -> Self {
        let p = C64::from_polar(1.0, phase);
        Self {
            grid: self.grid,
            values: self.values.map(|v| v * p),
        }
    }
}

/// Samples `model` on `grid` and normalizes it.
pub fn discretize(model: &BwfModel, grid: &KGrid) -> Result<(BwfMatrix, Vec<SpectralWarning>), SpectralError> {
    grid.validate()?;
    model.validate()?;
    let n = grid.n_bins;
    let mut warnings = Vec::new();
    if n > 1 {
        for w in model.widths() {
            if w < grid.dk {
                warnings.push(SpectralWarning::UnderResolved { width: w, dk: grid.dk });
            }
        }
    }
    let k0 = grid.k0;
    let raw = match *model {
        BwfModel::SingleBin => {
            if n != 1 {
                return Err(SpectralError::InvalidModel(format!(
                    "single-bin model needs a 1-bin grid, got {n} bins"
                )));
            }
            DMatrix::from_element(1, 1, C64::new(1.0, 0.0))
        }
        BwfModel::SeparableGaussian { sigma } => {
            let v: Vec<f64> = grid
                .ks()
                .iter()
                .map(|k| (-(k - k0).powi(2) / (4.0 * sigma * sigma)).exp())
                .collect();
            DMatrix::from_fn(n, n, |i, j| C64::new(v[i] * v[j], 0.0))
        }
        BwfModel::CorrelatedGaussian { sigma_s, sigma_a } => {
            let ks = grid.ks();
            DMatrix::from_fn(n, n, |i, j| {
                let s = ks[i] + ks[j] - 2.0 * k0;
                let d = ks[i] - ks[j];
                let e = -s * s / (4.0 * sigma_s * sigma_s) - d * d / (4.0 * sigma_a * sigma_a);
                C64::new(e.exp(), 0.0)
            })
        }
    };
    let w = grid.bin_width();
    let norm = (raw.iter().map(|v| v.norm_sqr()).sum::<f64>() * w * w).sqrt();
    if !(norm > 0.0) {
        return Err(SpectralError::InvalidModel("model vanishes on the grid".into()));
    }
    let values = raw.map(|v| v / norm);
    Ok((BwfMatrix { grid: *grid, values }, warnings))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtReport {
    /// Singular values of the discrete amplitude matrix, descending.
    pub coefficients: Vec<f64>,
    /// `sum c^4`.
    pub purity: f64,
}

impl SchmidtReport {
    /// Effective number of Schmidt modes, `1 / purity`.
    pub fn schmidt_number(&self) -> f64 {
        1.0 / self.purity
    }

    pub fn is_separable(&self, tol: f64) -> bool {
        (self.purity - 1.0).abs() <= tol
    }
}

pub fn schmidt(bwf: &BwfMatrix) -> SchmidtReport {
    let svd = bwf.weights().svd(false, false);
    let mut coefficients: Vec<f64> = svd.singular_values.iter().copied().collect();
    coefficients.sort_by(|a, b| b.total_cmp(a));
    let purity = coefficients.iter().map(|c| c.powi(4)).sum();
    SchmidtReport { coefficients, purity }
}

/// Which propagation-phase bookkeeping to use for the pair phase.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiVariant {
    /// `2 (k1 + k2)(L1 + L2 - L3)`.
    Paper,
    /// `(k1 + k2)(L1 + L2 - L3)`: each pump photon picks up `e^{ik(L1+L2)}`
    /// once and each generated photon `e^{-ikL3}` once.
    #[default]
    Direct,
}

pub fn psi_phase(k1: f64, k2: f64, params: &SourceParams, variant: PsiVariant) -> f64 {
    let direct = (k1 + k2) * (params.l1 + params.l2 - params.l3);
    match variant {
        PsiVariant::Paper => 2.0 * direct,
        PsiVariant::Direct => direct,
    }
}
