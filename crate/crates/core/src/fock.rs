//! Sparse bosonic algebra: creation-operator polynomials and Fock-basis kets.
//!
//! Every mode lives in a [`ModeUniverse`], a declared set of channels times a
//! number of k-bins. Operators and kets remember their universe so that
//! accidental mixing (say, a source-side operator applied to a detector-side
//! ket) is reported instead of silently producing an orthogonal result.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Coefficients with magnitude at or below this are dropped on simplification.
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("mode universe mismatch: {left} vs {right}")]
    UniverseMismatch { left: String, right: String },

    #[error("mode {0} is not part of the declared universe {1}")]
    UnknownMode(ModeId, String),

    #[error("cannot normalize the zero vector")]
    ZeroVector,
}

pub type FockResult<T> = Result<T, FockError>;

/// A waveguide label.
///
/// The variant order fixes the canonical (channel-major) mode ordering.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Output channel 1-4 of the pair source.
    Source(u8),
    /// Target detector `T`.
    Target,
    /// Detector port `D_{n,m}`, `n` in 1..=3, `m` in {0, 1}.
    Detector { n: u8, m: u8 },
    /// Internal or auxiliary wire.
    Wire(u16),
}

impl Channel {
    /// The six qubit detector ports followed by `T`.
    pub fn detector_ports() -> [Channel; 7] {
        [
            Channel::Target,
            Channel::Detector { n: 1, m: 0 },
            Channel::Detector { n: 1, m: 1 },
            Channel::Detector { n: 2, m: 0 },
            Channel::Detector { n: 2, m: 1 },
            Channel::Detector { n: 3, m: 0 },
            Channel::Detector { n: 3, m: 1 },
        ]
    }

    pub fn source_channels() -> [Channel; 4] {
        [Channel::Source(1), Channel::Source(2), Channel::Source(3), Channel::Source(4)]
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Source(p) => write!(f, "S{p}"),
            Channel::Target => write!(f, "T"),
            Channel::Detector { n, m } => write!(f, "D{n}_{m}"),
            Channel::Wire(w) => write!(f, "W{w}"),
        }
    }
}

/// One bosonic mode: a channel and a k-bin.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub channel: Channel,
    pub kbin: usize,
}

impl ModeId {
    pub fn new(channel: Channel, kbin: usize) -> Self {
        Self { channel, kbin }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.channel, self.kbin)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct UniverseInner {
    channels: BTreeSet<Channel>,
    n_bins: usize,
}

/// A closed set of channels crossed with `n_bins` k-bins.
#[derive(Clone, Debug)]
pub struct ModeUniverse(Arc<UniverseInner>);

impl PartialEq for ModeUniverse {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for ModeUniverse {}

impl ModeUniverse {
    pub fn new<I: IntoIterator<Item = Channel>>(channels: I, n_bins: usize) -> Self {
        Self(Arc::new(UniverseInner {
            channels: channels.into_iter().collect(),
            n_bins,
        }))
    }

    pub fn n_bins(&self) -> usize {
        self.0.n_bins
    }

    pub fn channels(&self) -> impl Iterator<Item = Channel> + '_ {
        self.0.channels.iter().copied()
    }

    pub fn contains(&self, mode: &ModeId) -> bool {
        mode.kbin < self.0.n_bins && self.0.channels.contains(&mode.channel)
    }

    /// Checked mode constructor.
    pub fn mode(&self, channel: Channel, kbin: usize) -> FockResult<ModeId> {
        let m = ModeId::new(channel, kbin);
        if self.contains(&m) {
            Ok(m)
        } else {
            Err(FockError::UnknownMode(m, self.to_string()))
        }
    }

    /// All modes in canonical order.
    pub fn modes(&self) -> Vec<ModeId> {
        self.channels()
            .flat_map(|c| (0..self.n_bins()).map(move |k| ModeId::new(c, k)))
            .collect()
    }

    fn check_same(&self, other: &ModeUniverse) -> FockResult<()> {
        if self == other {
            Ok(())
        } else {
            Err(FockError::UniverseMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for ModeUniverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chans: Vec<String> = self.channels().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}x{}", chans.join(","), self.n_bins())
    }
}

/// Sorted `(mode, power)` list with positive powers and unique modes.
///
/// Shared representation behind [`CreationMonomial`] and [`FockBasisState`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Occupation(Vec<(ModeId, u32)>);

impl Occupation {
    fn from_counts(counts: BTreeMap<ModeId, u32>) -> Self {
        Self(counts.into_iter().filter(|&(_, n)| n > 0).collect())
    }

    fn from_modes<I: IntoIterator<Item = ModeId>>(modes: I) -> Self {
        let mut counts = BTreeMap::new();
        for m in modes {
            *counts.entry(m).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    fn total(&self) -> u32 {
        self.0.iter().map(|&(_, n)| n).sum()
    }

    fn get(&self, mode: &ModeId) -> u32 {
        self.0
            .binary_search_by(|(m, _)| m.cmp(mode))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    fn merge(&self, other: &Occupation) -> Occupation {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Occupation(out)
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, empty: &str) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "{empty}");
        }
        for (i, (m, n)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *n == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{m}^{n}")?;
            }
        }
        Ok(())
    }
}

/// A product of creation operators in canonical (sorted) order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CreationMonomial(Occupation);

impl CreationMonomial {
    /// The empty product (identity operator).
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds a monomial from factors given in any order.
    pub fn from_factors<I: IntoIterator<Item = ModeId>>(factors: I) -> Self {
        Self(Occupation::from_modes(factors))
    }

    pub fn factors(&self) -> &[(ModeId, u32)] {
        &self.0 .0
    }

    /// Number of creation operators in the product.
    pub fn degree(&self) -> u32 {
        self.0.total()
    }

    pub fn mul(&self, other: &CreationMonomial) -> CreationMonomial {
        CreationMonomial(self.0.merge(&other.0))
    }
}

impl fmt::Display for CreationMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, "1")
    }
}

/// Occupation-number basis state. The empty state is the vacuum.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockBasisState(Occupation);

impl FockBasisState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Builds a state from a multiset of occupied modes.
    pub fn from_modes<I: IntoIterator<Item = ModeId>>(modes: I) -> Self {
        Self(Occupation::from_modes(modes))
    }

    pub fn from_counts<I: IntoIterator<Item = (ModeId, u32)>>(counts: I) -> Self {
        let mut map = BTreeMap::new();
        for (m, n) in counts {
            *map.entry(m).or_insert(0) += n;
        }
        Self(Occupation::from_counts(map))
    }

    pub fn occupations(&self) -> &[(ModeId, u32)] {
        &self.0 .0
    }

    pub fn occupation(&self, mode: &ModeId) -> u32 {
        self.0.get(mode)
    }

    pub fn photon_number(&self) -> u32 {
        self.0.total()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0 .0.is_empty()
    }

    /// Photon counts summed over k-bins, per channel.
    pub fn channel_counts(&self) -> BTreeMap<Channel, u32> {
        let mut out = BTreeMap::new();
        for &(m, n) in self.occupations() {
            *out.entry(m.channel).or_insert(0) += n;
        }
        out
    }

    /// Applies a monomial, returning the new state and the product of
    /// bosonic ladder factors `sqrt(n+1)`.
    fn raise(&self, mono: &CreationMonomial) -> (FockBasisState, f64) {
        let mut factor = 1.0;
        for &(mode, power) in mono.factors() {
            let n = self.occupation(&mode);
            for j in 1..=power {
                factor *= f64::from(n + j).sqrt();
            }
        }
        (FockBasisState(self.0.merge(&mono.0)), factor)
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, "vac")
    }
}

/// Sparse complex-weighted sum of creation monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPoly {
    universe: ModeUniverse,
    terms: BTreeMap<CreationMonomial, C64>,
}

impl OperatorPoly {
    pub fn zero(universe: &ModeUniverse) -> Self {
        Self {
            universe: universe.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The identity operator (empty monomial with unit weight).
    pub fn one(universe: &ModeUniverse) -> Self {
        let mut p = Self::zero(universe);
        p.terms.insert(CreationMonomial::one(), C64::new(1.0, 0.0));
        p
    }

    /// Single creation operator `b†_mode`.
    pub fn creation(universe: &ModeUniverse, mode: ModeId) -> FockResult<Self> {
        Self::from_terms(universe, [(C64::new(1.0, 0.0), CreationMonomial::from_factors([mode]))])
    }

    /// Builds a polynomial, merging duplicate monomials and checking that
    /// every mode belongs to `universe`.
    pub fn from_terms<I>(universe: &ModeUniverse, terms: I) -> FockResult<Self>
    where
        I: IntoIterator<Item = (C64, CreationMonomial)>,
    {
        let mut p = Self::zero(universe);
        for (c, mono) in terms {
            if let Some(&(m, _)) = mono.factors().iter().find(|(m, _)| !universe.contains(m)) {
                return Err(FockError::UnknownMode(m, universe.to_string()));
            }
            *p.terms.entry(mono).or_insert(C64::new(0.0, 0.0)) += c;
        }
        Ok(p.simplify())
    }

    pub fn universe(&self) -> &ModeUniverse {
        &self.universe
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CreationMonomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &CreationMonomial) -> C64 {
        self.terms.get(mono).copied().unwrap_or_default()
    }

    /// Drops terms with `|c| <= PRUNE_TOL`.
    pub fn simplify(mut self) -> Self {
        self.terms.retain(|_, c| c.norm() > PRUNE_TOL);
        self
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            universe: self.universe.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
        .simplify()
    }

    pub fn try_add(&self, other: &OperatorPoly) -> FockResult<Self> {
        self.universe.check_same(&other.universe)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert(C64::new(0.0, 0.0)) += c;
        }
        Ok(Self {
            universe: self.universe.clone(),
            terms,
        }
        .simplify())
    }

    /// Operator product. Creation operators commute, so this is ordinary
    /// polynomial multiplication.
    pub fn try_mul(&self, other: &OperatorPoly) -> FockResult<Self> {
        self.universe.check_same(&other.universe)?;
        let mut terms: BTreeMap<CreationMonomial, C64> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *terms.entry(ma.mul(mb)).or_insert(C64::new(0.0, 0.0)) += ca * cb;
            }
        }
        Ok(Self {
            universe: self.universe.clone(),
            terms,
        }
        .simplify())
    }

    /// Largest coefficient difference against another polynomial.
    pub fn max_deviation(&self, other: &OperatorPoly) -> f64 {
        let keys: BTreeSet<&CreationMonomial> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &OperatorPoly {
    type Output = OperatorPoly;

    /// Panics on universe mismatch; use [`OperatorPoly::try_add`] otherwise.
    fn add(self, rhs: &OperatorPoly) -> OperatorPoly {
        self.try_add(rhs).expect("operator universes differ")
    }
}

impl Mul<C64> for &OperatorPoly {
    type Output = OperatorPoly;

    fn mul(self, rhs: C64) -> OperatorPoly {
        self.scale(rhs)
    }
}

/// Sparse state vector over occupation-number basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct KetVector {
    universe: ModeUniverse,
    amps: BTreeMap<FockBasisState, C64>,
}

impl KetVector {
    pub fn zero(universe: &ModeUniverse) -> Self {
        Self {
            universe: universe.clone(),
            amps: BTreeMap::new(),
        }
    }

    pub fn vacuum(universe: &ModeUniverse) -> Self {
        Self::basis(universe, FockBasisState::vacuum())
    }

    pub fn basis(universe: &ModeUniverse, state: FockBasisState) -> Self {
        let mut k = Self::zero(universe);
        k.amps.insert(state, C64::new(1.0, 0.0));
        k
    }

    pub fn from_amplitudes<I>(universe: &ModeUniverse, amps: I) -> FockResult<Self>
    where
        I: IntoIterator<Item = (FockBasisState, C64)>,
    {
        let mut k = Self::zero(universe);
        for (s, a) in amps {
            if let Some(&(m, _)) = s.occupations().iter().find(|(m, _)| !universe.contains(m)) {
                return Err(FockError::UnknownMode(m, universe.to_string()));
            }
            *k.amps.entry(s).or_insert(C64::new(0.0, 0.0)) += a;
        }
        Ok(k.simplify())
    }

    pub fn universe(&self) -> &ModeUniverse {
        &self.universe
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (&FockBasisState, &C64)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, state: &FockBasisState) -> C64 {
        self.amps.get(state).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn simplify(mut self) -> Self {
        self.amps.retain(|_, a| a.norm() > PRUNE_TOL);
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            universe: self.universe.clone(),
            amps: self.amps.iter().map(|(k, a)| (k.clone(), a * s)).collect(),
        }
        .simplify()
    }

    pub fn try_add(&self, other: &KetVector) -> FockResult<Self> {
        self.universe.check_same(&other.universe)?;
        let mut amps = self.amps.clone();
        for (s, a) in &other.amps {
            *amps.entry(s.clone()).or_insert(C64::new(0.0, 0.0)) += a;
        }
        Ok(Self {
            universe: self.universe.clone(),
            amps,
        }
        .simplify())
    }

    /// Keeps only basis states accepted by `keep`.
    pub fn filter<F: Fn(&FockBasisState) -> bool>(&self, keep: F) -> Self {
        Self {
            universe: self.universe.clone(),
            amps: self
                .amps
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, a)| (s.clone(), *a))
                .collect(),
        }
    }
}

/// Applies a creation-operator polynomial to a ket.
pub fn apply(op: &OperatorPoly, ket: &KetVector) -> FockResult<KetVector> {
    op.universe.check_same(&ket.universe)?;
    let mut amps: BTreeMap<FockBasisState, C64> = BTreeMap::new();
    for (mono, c) in &op.terms {
        for (state, a) in &ket.amps {
            let (next, ladder) = state.raise(mono);
            *amps.entry(next).or_insert(C64::new(0.0, 0.0)) += c * a * ladder;
        }
    }
    Ok(KetVector {
        universe: ket.universe.clone(),
        amps,
    }
    .simplify())
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &KetVector, b: &KetVector) -> FockResult<C64> {
    a.universe.check_same(&b.universe)?;
    let (small, large, flip) = if a.amps.len() <= b.amps.len() {
        (a, b, false)
    } else {
        (b, a, true)
    };
    let mut acc = C64::new(0.0, 0.0);
    for (s, x) in &small.amps {
        if let Some(y) = large.amps.get(s) {
            acc += if flip { y.conj() * x } else { x.conj() * y };
        }
    }
    Ok(acc)
}

/// Returns the unit-norm ket and the original norm.
pub fn normalize(ket: &KetVector) -> FockResult<(KetVector, f64)> {
    let norm = ket.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(FockError::ZeroVector);
    }
    Ok((ket.scale(C64::new(1.0 / norm, 0.0)), norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni() -> ModeUniverse {
        ModeUniverse::new(Channel::source_channels(), 2)
    }

    fn m(p: u8, k: usize) -> ModeId {
        ModeId::new(Channel::Source(p), k)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_creation_on_vacuum() {
        let u = uni();
        let op = OperatorPoly::creation(&u, m(1, 0)).unwrap();
        let ket = apply(&op, &KetVector::vacuum(&u)).unwrap();
        let expect = FockBasisState::from_modes([m(1, 0)]);
        assert_eq!(ket.support_len(), 1);
        assert!((ket.amplitude(&expect) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn squared_creation_has_sqrt2_ladder() {
        let u = uni();
        let op = OperatorPoly::from_terms(&u, [(c(1.0, 0.0), CreationMonomial::from_factors([m(2, 1), m(2, 1)]))]).unwrap();
        let ket = apply(&op, &KetVector::vacuum(&u)).unwrap();
        let two = FockBasisState::from_counts([(m(2, 1), 2)]);
        assert!((ket.amplitude(&two).re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn balanced_pair_operator_single_bin_unit_norm() {
        // (-i/sqrt2)(b1 b2 - b3 b4) expanded by hand: four ordered terms of
        // (1/sqrt2) * phi_pq with phi_12 = phi_21 = -i/2, phi_34 = phi_43 = i/2
        // (phi = pi gives e^{2i phi} = 1).
        let u = ModeUniverse::new(Channel::source_channels(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let terms = [
            (c(0.0, -0.5 * s), [m(1, 0), m(2, 0)]),
            (c(0.0, -0.5 * s), [m(2, 0), m(1, 0)]),
            (c(0.0, 0.5 * s), [m(3, 0), m(4, 0)]),
            (c(0.0, 0.5 * s), [m(4, 0), m(3, 0)]),
        ]
        .map(|(a, f)| (a, CreationMonomial::from_factors(f)));
        let op = OperatorPoly::from_terms(&u, terms).unwrap();
        assert_eq!(op.len(), 2);
        let ket = apply(&op, &KetVector::vacuum(&u)).unwrap();
        assert!((ket.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inner_products() {
        let u = uni();
        let a = KetVector::basis(&u, FockBasisState::from_modes([m(1, 0)]));
        let b = KetVector::basis(&u, FockBasisState::from_modes([m(2, 0)]));
        assert_eq!(inner(&a, &a).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&a, &b).unwrap(), c(0.0, 0.0));
        let ai = a.scale(c(0.0, 1.0));
        assert_eq!(inner(&ai, &a).unwrap(), c(0.0, -1.0));
        let vac = KetVector::vacuum(&u);
        assert_eq!(inner(&vac, &vac).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn normalize_reports_norm() {
        let u = uni();
        let a = KetVector::basis(&u, FockBasisState::from_modes([m(1, 0)])).scale(c(2.0, 0.0));
        let (n, norm) = normalize(&a).unwrap();
        assert!((norm - 2.0).abs() < 1e-15);
        assert!((n.norm() - 1.0).abs() < 1e-15);
        assert_eq!(normalize(&KetVector::zero(&u)), Err(FockError::ZeroVector));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let u1 = uni();
        let u2 = ModeUniverse::new([Channel::Target], 1);
        let op = OperatorPoly::one(&u1);
        let ket = KetVector::vacuum(&u2);
        assert!(matches!(apply(&op, &ket), Err(FockError::UniverseMismatch { .. })));
        assert!(matches!(inner(&KetVector::vacuum(&u1), &ket), Err(FockError::UniverseMismatch { .. })));
        // structurally equal universes are the same universe
        let u3 = ModeUniverse::new(Channel::source_channels(), 2);
        assert!(apply(&op, &KetVector::vacuum(&u3)).is_ok());
    }

    #[test]
    fn foreign_modes_rejected() {
        let u = uni();
        assert!(u.mode(Channel::Target, 0).is_err());
        assert!(u.mode(Channel::Source(1), 2).is_err());
        let bad = CreationMonomial::from_factors([ModeId::new(Channel::Target, 0)]);
        assert!(matches!(
            OperatorPoly::from_terms(&u, [(c(1.0, 0.0), bad)]),
            Err(FockError::UnknownMode(..))
        ));
    }

    #[test]
    fn canonical_order_is_channel_major() {
        let a = ModeId::new(Channel::Source(1), 5);
        let b = ModeId::new(Channel::Source(2), 0);
        let t = ModeId::new(Channel::Target, 0);
        let d = ModeId::new(Channel::Detector { n: 1, m: 0 }, 0);
        assert!(a < b && b < t && t < d);
        let mono = CreationMonomial::from_factors([d, a, t, a]);
        assert_eq!(mono.factors(), &[(a, 2), (t, 1), (d, 1)]);
        assert_eq!(mono.degree(), 4);
    }

    #[test]
    fn pruning_removes_cancelled_terms() {
        let u = uni();
        let mono = CreationMonomial::from_factors([m(1, 0)]);
        let p = OperatorPoly::from_terms(&u, [(c(1.0, 0.0), mono.clone()), (c(-1.0, 1e-13), mono)]).unwrap();
        assert!(p.is_empty());
    }
}
