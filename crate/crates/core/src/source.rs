//! Four-ring pair source: pump and emission coefficients, the pair
//! amplitude table and the pair creation operator.
//!
//! Pump routing to ring `n` is described by `A_n(k)`, emission from ring `n`
//! into output channel `p` by `B_{n,p}(k)`. The pair amplitude in channels
//! `(p, q)` is `sum_n A_n(k_a) A_n(k_b) B_{n,p}(k1) B_{n,q}(k2) phi_ring(k1, k2)`
//! with `k_a + k_b = k1 + k2`, rescaled to unit total norm. The rescaling
//! factor fixes the ratio between the source-level and single-ring pair
//! amplitudes.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{apply, Channel, CreationMonomial, FockError, KetVector, ModeId, ModeUniverse, OperatorPoly};
use crate::spectral::{BwfMatrix, KGrid, PsiVariant, NORM_TOL};

/// Channel pairs the source can populate.
pub const OMEGA: [(u8, u8); 8] = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 3), (4, 3), (3, 4), (4, 4)];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("ring index {0} is outside 1..=4")]
    RingIndex(u8),

    #[error("invalid source parameters: {0}")]
    InvalidParams(String),

    #[error("BWF is not normalized: {0}")]
    UnnormalizedBwf(f64),

    #[error("pair amplitudes vanish identically; no effective beta exists")]
    ZeroRawNorm,

    #[error("pair amplitude table is not normalized: {0}")]
    UnnormalizedTable(f64),

    #[error(transparent)]
    Fock(#[from] FockError),
}

pub type SourceResult<T> = Result<T, SourceError>;

/// Geometry and phases of the four-ring source.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    pub t: f64,
    pub r: f64,
    /// Pump phase of block 2 relative to block 1.
    #[serde(deserialize_with = "crate::angle::deserialize")]
    pub phi: f64,
    #[serde(deserialize_with = "crate::angle::deserialize")]
    pub phi1: f64,
    #[serde(deserialize_with = "crate::angle::deserialize")]
    pub phi2: f64,
    #[serde(default)]
    pub l1: f64,
    #[serde(default)]
    pub l2: f64,
    #[serde(default)]
    pub l3: f64,
    /// Common phase of the pump entering both blocks.
    #[serde(default, deserialize_with = "crate::angle::deserialize")]
    pub pump_phase: f64,
}

impl SourceParams {
    /// 50:50 couplers, `phi1 = phi2 = pi/2`, zero lengths.
    pub fn balanced(phi: f64) -> Self {
        Self {
            t: FRAC_1_SQRT_2,
            r: FRAC_1_SQRT_2,
            phi,
            phi1: FRAC_PI_2,
            phi2: FRAC_PI_2,
            l1: 0.0,
            l2: 0.0,
            l3: 0.0,
            pump_phase: 0.0,
        }
    }

    pub fn validate(&self) -> SourceResult<()> {
        if self.t < 0.0 || self.r < 0.0 || (self.t * self.t + self.r * self.r - 1.0).abs() > 1e-12 {
            return Err(SourceError::InvalidParams(format!(
                "need t, r >= 0 and t^2 + r^2 = 1, got t={}, r={}",
                self.t, self.r
            )));
        }
        for (name, l) in [("l1", self.l1), ("l2", self.l2), ("l3", self.l3)] {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(SourceError::InvalidParams(format!("{name} = {l} must be >= 0")));
            }
        }
        for (name, a) in [("phi", self.phi), ("phi1", self.phi1), ("phi2", self.phi2), ("pump_phase", self.pump_phase)] {
            if !a.is_finite() {
                return Err(SourceError::InvalidParams(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Whether the settings admit the closed-form table (50:50 couplers,
    /// `phi1 = phi2 = pi/2 mod 2 pi`).
    pub fn closed_form_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let off = |x: f64| {
            let d = (x - FRAC_PI_2).rem_euclid(std::f64::consts::TAU);
            d.min(std::f64::consts::TAU - d)
        };
        if off(self.phi1) > 1e-9 {
            w.push(format!("phi1 = {} differs from pi/2", self.phi1));
        }
        if off(self.phi2) > 1e-9 {
            w.push(format!("phi2 = {} differs from pi/2", self.phi2));
        }
        if (self.t - FRAC_1_SQRT_2).abs() > 1e-12 {
            w.push(format!("t = {} is not 1/sqrt(2)", self.t));
        }
        w
    }
}

/// Pump amplitude reaching ring `n` at wavevector `k`.
pub fn a_coeff(n: u8, k: f64, p: &SourceParams) -> SourceResult<C64> {
    let it = C64::new(0.0, p.t);
    let r = C64::new(p.r, 0.0);
    let prop = C64::from_polar(1.0, k * (p.l1 + p.l2) + p.pump_phase);
    let a = match n {
        1 => it * it * C64::from_polar(1.0, p.phi1),
        2 => it * r,
        3 => r * r * C64::from_polar(1.0, p.phi),
        4 => it * r * C64::from_polar(1.0, p.phi + p.phi2),
        _ => return Err(SourceError::RingIndex(n)),
    };
    Ok(a * prop)
}

/// Emission amplitude from ring `n` into output channel `p`; zero for
/// unrouted pairs. Block 2 mirrors block 1.
pub fn b_coeff(n: u8, channel: u8, k: f64, p: &SourceParams) -> C64 {
    let prop = C64::from_polar(1.0, -k * p.l3);
    let thru = C64::new(p.r, 0.0);
    let cross = C64::new(0.0, p.t);
    let a = match (n, channel) {
        (1, 1) | (2, 2) | (3, 3) | (4, 4) => thru,
        (2, 1) | (1, 2) | (4, 3) | (3, 4) => cross,
        _ => return C64::new(0.0, 0.0),
    };
    a * prop
}

/// Normalized pair amplitudes `phi_{p,q}(k1, k2)` for `(p, q)` in `OMEGA`.
///
/// Values use the same convention as [`BwfMatrix`]:
/// `sum_{p,q} sum_{ij} |phi_{p,q}(k_i, k_j)|^2 w^2 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairAmplitudeTable {
    pub grid: KGrid,
    pub entries: BTreeMap<(u8, u8), DMatrix<C64>>,
    /// Norm of the table before rescaling; `|beta| = |beta_ring| * raw_norm`.
    pub raw_norm: f64,
}

impl PairAmplitudeTable {
    pub fn get(&self, p: u8, q: u8) -> Option<&DMatrix<C64>> {
        self.entries.get(&(p, q))
    }

    pub fn norm_sqr(&self) -> f64 {
        let w = self.grid.bin_width();
        self.entries
            .values()
            .flat_map(|m| m.iter())
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            * w
            * w
    }

    /// Rescales raw (unnormalized) sums into a table.
    pub fn from_raw(grid: KGrid, raw: BTreeMap<(u8, u8), DMatrix<C64>>) -> SourceResult<Self> {
        let w = grid.bin_width();
        let raw_norm = (raw.values().flat_map(|m| m.iter()).map(|v| v.norm_sqr()).sum::<f64>() * w * w).sqrt();
        if !(raw_norm > 0.0) {
            return Err(SourceError::ZeroRawNorm);
        }
        let entries = raw.into_iter().map(|(k, m)| (k, m / C64::new(raw_norm, 0.0))).collect();
        Ok(Self { grid, entries, raw_norm })
    }

    /// Largest entry-wise difference against another table.
    pub fn max_deviation(&self, other: &PairAmplitudeTable) -> f64 {
        let mut worst = 0.0f64;
        for key in self.entries.keys().chain(other.entries.keys()) {
            match (self.entries.get(key), other.entries.get(key)) {
                (Some(a), Some(b)) => worst = worst.max((a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)),
                (Some(m), None) | (None, Some(m)) => worst = worst.max(m.iter().map(|v| v.norm()).fold(0.0, f64::max)),
                (None, None) => {}
            }
        }
        worst
    }

    /// Channel pairs whose amplitudes exceed `tol` somewhere on the grid.
    pub fn support(&self, tol: f64) -> Vec<(u8, u8)> {
        self.entries
            .iter()
            .filter(|(_, m)| m.iter().any(|v| v.norm() > tol))
            .map(|(k, _)| *k)
            .collect()
    }
}

pub fn pair_amplitudes(params: &SourceParams, bwf: &BwfMatrix, variant: PsiVariant) -> SourceResult<PairAmplitudeTable> {
    params.validate()?;
    let nrm = bwf.norm_sqr();
    if (nrm - 1.0).abs() > NORM_TOL {
        return Err(SourceError::UnnormalizedBwf(nrm));
    }
    let grid = *bwf.grid();
    let n = grid.n_bins;
    let ks = grid.ks();
    let mut raw = BTreeMap::new();
    for &(p, q) in &OMEGA {
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                let (k1, k2) = (ks[i], ks[j]);
                // A_n(k_a) A_n(k_b) depends only on k_a + k_b = k1 + k2.
                let kp = 0.5 * (k1 + k2);
                let mut s = C64::new(0.0, 0.0);
                for ring in 1..=4u8 {
                    let a = a_coeff(ring, kp, params)?;
                    s += a * a * b_coeff(ring, p, k1, params) * b_coeff(ring, q, k2, params);
                }
                if variant == PsiVariant::Paper {
                    s *= C64::from_polar(1.0, (k1 + k2) * (params.l1 + params.l2 - params.l3));
                }
                m[(i, j)] = s * bwf.value(i, j);
            }
        }
        raw.insert((p, q), m);
    }
    PairAmplitudeTable::from_raw(grid, raw)
}

/// Source-level pair amplitude `beta` from the single-ring amplitude.
pub fn effective_beta(raw_norm: f64, beta_ring: C64) -> SourceResult<C64> {
    if !(raw_norm > 0.0) || !raw_norm.is_finite() {
        return Err(SourceError::ZeroRawNorm);
    }
    Ok(beta_ring * raw_norm)
}

/// Source-side universe: channels 1-4 on `n_bins` k-bins.
pub fn source_universe(n_bins: usize) -> ModeUniverse {
    ModeUniverse::new(Channel::source_channels(), n_bins)
}

/// `C† = (1/sqrt 2) sum_{p,q} sum_{ij} phi_{p,q}(k_i,k_j) w b†_{i,p} b†_{j,q}`.
///
/// Bin operators carry `sqrt(w)` of the continuum ones, so one factor of
/// `w` remains and `C†|vac>` has unit norm.
pub fn pair_creation_operator(table: &PairAmplitudeTable) -> SourceResult<OperatorPoly> {
    let nrm = table.norm_sqr();
    if !table.entries.is_empty() && (nrm - 1.0).abs() > 1e-10 {
        return Err(SourceError::UnnormalizedTable(nrm));
    }
    let n = table.grid.n_bins;
    let u = source_universe(n);
    let w = table.grid.bin_width();
    let pref = FRAC_1_SQRT_2 * w;
    let mut terms = Vec::with_capacity(table.entries.len() * n * n);
    for (&(p, q), m) in &table.entries {
        for i in 0..n {
            for j in 0..n {
                let a = ModeId::new(Channel::Source(p), i);
                let b = ModeId::new(Channel::Source(q), j);
                terms.push((m[(i, j)] * pref, CreationMonomial::from_factors([a, b])));
            }
        }
    }
    Ok(OperatorPoly::from_terms(&u, terms)?)
}

/// `C†|vac>`.
pub fn two_photon_state(params: &SourceParams, bwf: &BwfMatrix, variant: PsiVariant) -> SourceResult<KetVector> {
    let table = pair_amplitudes(params, bwf, variant)?;
    let c = pair_creation_operator(&table)?;
    Ok(apply(&c, &KetVector::vacuum(c.universe()))?)
}

/// `(|1_1 1_2> - |1_3 1_4>)/sqrt 2` on a single-bin source universe:
/// channels 1 and 4 carry qubit one (`|1>`, `|0>`), channels 3 and 2 carry
/// qubit two (`|1>`, `|0>`).
pub fn psi_minus() -> KetVector {
    let u = source_universe(1);
    let m = |p| ModeId::new(Channel::Source(p), 0);
    let s = FRAC_1_SQRT_2;
    KetVector::from_amplitudes(
        &u,
        [
            (crate::fock::FockBasisState::from_modes([m(1), m(2)]), C64::new(s, 0.0)),
            (crate::fock::FockBasisState::from_modes([m(3), m(4)]), C64::new(-s, 0.0)),
        ],
    )
    .expect("source modes")
}
