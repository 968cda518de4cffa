//! Second-order output state, detector fan-out, fourfold post-selection and
//! GHZ extraction.
//!
//! The output state is truncated at two pairs,
//! `|vac> + beta C†|vac> + (1/2) beta^2 (C†)^2 |vac>`, with the vacuum
//! coefficient's `O(|beta|^2)` correction left as a marker. Probabilities are
//! squared amplitudes of that truncated ket; they are not renormalized.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{build_fanout, heisenberg_rewrite, CircuitError, FanoutParams, ModeMap};
use crate::fock::{apply, normalize, Channel, FockBasisState, FockError, KetVector, OperatorPoly};
use crate::source::{effective_beta, pair_amplitudes, pair_creation_operator, PairAmplitudeTable, SourceError, SourceParams};
use crate::spectral::{BwfMatrix, KGrid, PsiVariant, SpectralError};

/// `C†|vac>` must have unit norm to this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// `|beta|^2` above which the two-pair truncation is flagged.
pub const HIGH_BETA_SQR: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("pair creation operator is not normalized: |C†|vac>| = {0}")]
    NotNormalized(f64),

    #[error("invalid detection pattern: {0}")]
    InvalidPattern(String),

    #[error("conditional state does not have the GHZ structure; unexpected support: {}", .0.join(", "))]
    StructuralMismatch(Vec<String>),

    #[error("conditional state is empty")]
    EmptyConditional,

    #[error(transparent)]
    Fock(#[from] FockError),

    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error(transparent)]
    Source(#[from] SourceError),

    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub type PipelineResult<T> = Result<T, PipelineError>;

/// Stands in for the unevaluated `1 + O(|beta|^2)` vacuum coefficient.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct VacuumMarker;

impl VacuumMarker {
    /// Value used when a concrete ket is needed.
    pub fn placeholder(self) -> C64 {
        C64::new(1.0, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionState {
    pub vacuum: VacuumMarker,
    pub beta: C64,
    /// `|II> = C†|vac>`.
    pub two_photon: KetVector,
    /// `|IV>`, the normalized `(C†)^2 |vac>`.
    pub four_photon: KetVector,
    /// Measured `|(1/2)(C†)^2 |vac>|`; `sqrt(3)/2` for a separable BWF.
    pub four_photon_factor: f64,
}

impl ExpansionState {
    pub fn four_photon_coefficient(&self) -> C64 {
        self.beta * self.beta * self.four_photon_factor
    }

    /// `|vac> + beta |II> + f beta^2 |IV>` with the vacuum placeholder.
    pub fn truncated_ket(&self) -> PipelineResult<KetVector> {
        let u = self.two_photon.universe();
        let vac = KetVector::vacuum(u).scale(self.vacuum.placeholder());
        let two = self.two_photon.scale(self.beta);
        let four = self.four_photon.scale(self.four_photon_coefficient());
        Ok(vac.try_add(&two)?.try_add(&four)?)
    }
}

fn check_unit(c: &OperatorPoly) -> PipelineResult<KetVector> {
    let two = apply(c, &KetVector::vacuum(c.universe()))?;
    let n = two.norm();
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(PipelineError::NotNormalized(n));
    }
    Ok(two)
}

/// Expands `exp(beta C† - h.c.)|vac>` to second order in `beta`.
pub fn expand_output(c: &OperatorPoly, beta: C64) -> PipelineResult<ExpansionState> {
    let two_photon = check_unit(c)?;
    let squared = apply(c, &two_photon)?;
    let (four_photon, norm) = normalize(&squared)?;
    Ok(ExpansionState {
        vacuum: VacuumMarker,
        beta,
        two_photon,
        four_photon,
        four_photon_factor: 0.5 * norm,
    })
}

/// Normalized `(C†)^2 |vac>`.
pub fn four_photon_state(c: &OperatorPoly) -> PipelineResult<KetVector> {
    let two = check_unit(c)?;
    Ok(normalize(&apply(c, &two)?)?.0)
}

/// How detectors report photon numbers.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorMode {
    #[default]
    NumberResolving,
    /// Each port only reports click / no click.
    Bucket,
}

/// Required counts on groups of detector ports.
///
/// In number-resolving mode a requirement `(ports, n)` demands exactly `n`
/// photons summed over `ports`; in bucket mode exactly `n` ports of the group
/// must click. Ports outside every group must stay dark unless listed in
/// `unobserved`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionPattern {
    pub required: Vec<(Vec<Channel>, u32)>,
    pub unobserved: BTreeSet<Channel>,
    pub mode: DetectorMode,
}

fn group(n: u8) -> Vec<Channel> {
    vec![Channel::Detector { n, m: 0 }, Channel::Detector { n, m: 1 }]
}

impl DetectionPattern {
    pub fn new(required: Vec<(Vec<Channel>, u32)>, unobserved: BTreeSet<Channel>, mode: DetectorMode) -> PipelineResult<Self> {
        let mut seen = BTreeSet::new();
        for (ports, n) in &required {
            if *n == 0 {
                return Err(PipelineError::InvalidPattern("required counts must be >= 1".into()));
            }
            if ports.is_empty() {
                return Err(PipelineError::InvalidPattern("empty port group".into()));
            }
            for p in ports {
                if !seen.insert(*p) || unobserved.contains(p) {
                    return Err(PipelineError::InvalidPattern(format!("port {p} listed twice")));
                }
            }
        }
        Ok(Self { required, unobserved, mode })
    }

    /// One photon in `T` and one in exactly one port of each `D_n`.
    pub fn fourfold(mode: DetectorMode) -> Self {
        Self::new(
            vec![(vec![Channel::Target], 1), (group(1), 1), (group(2), 1), (group(3), 1)],
            BTreeSet::new(),
            mode,
        )
        .expect("static pattern")
    }

    /// Threefold `D_1 D_2 D_3` coincidence with `T` ignored.
    pub fn threefold_without_target(mode: DetectorMode) -> Self {
        Self::new(
            vec![(group(1), 1), (group(2), 1), (group(3), 1)],
            [Channel::Target].into_iter().collect(),
            mode,
        )
        .expect("static pattern")
    }

    /// Exact number-resolved count on every listed port, zero elsewhere.
    pub fn exact<I: IntoIterator<Item = (Channel, u32)>>(counts: I) -> PipelineResult<Self> {
        Self::new(
            counts.into_iter().map(|(c, n)| (vec![c], n)).collect(),
            BTreeSet::new(),
            DetectorMode::NumberResolving,
        )
    }

    /// The vacuum pattern: every port dark.
    pub fn dark() -> Self {
        Self {
            required: vec![],
            unobserved: BTreeSet::new(),
            mode: DetectorMode::NumberResolving,
        }
    }

    pub fn matches(&self, state: &FockBasisState) -> bool {
        let counts = state.channel_counts();
        let mut covered = BTreeSet::new();
        for (ports, n) in &self.required {
            let got: u32 = ports
                .iter()
                .map(|p| {
                    let c = counts.get(p).copied().unwrap_or(0);
                    match self.mode {
                        DetectorMode::NumberResolving => c,
                        DetectorMode::Bucket => u32::from(c > 0),
                    }
                })
                .sum();
            if got != *n {
                return false;
            }
            covered.extend(ports.iter().copied());
        }
        counts
            .iter()
            .all(|(ch, &c)| c == 0 || covered.contains(ch) || self.unobserved.contains(ch))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PostSelection {
    pub probability: f64,
    /// Normalized matching component; `None` when nothing matches.
    pub conditional: Option<KetVector>,
}

/// Projects `state` onto the basis states accepted by `pattern`.
pub fn postselect(state: &KetVector, pattern: &DetectionPattern) -> PostSelection {
    let matched = state.filter(|s| pattern.matches(s));
    let probability = matched.norm_sqr();
    let conditional = normalize(&matched).ok().map(|(k, _)| k);
    PostSelection { probability, conditional }
}

/// Per-port photon counts of a basis state (summed over k-bins).
pub type PortCounts = Vec<(Channel, u32)>;

/// Probability of every number-resolved outcome of `state`.
pub fn outcome_distribution(state: &KetVector) -> BTreeMap<PortCounts, f64> {
    let mut out: BTreeMap<PortCounts, f64> = BTreeMap::new();
    for (s, a) in state.amplitudes() {
        let key: PortCounts = s.channel_counts().into_iter().collect();
        *out.entry(key).or_default() += a.norm_sqr();
    }
    out
}

/// All exact patterns on `ports` with at most `max_photons` photons in total.
pub fn all_exact_patterns(ports: &[Channel], max_photons: u32) -> Vec<DetectionPattern> {
    fn rec(ports: &[Channel], left: u32, cur: &mut Vec<(Channel, u32)>, out: &mut Vec<Vec<(Channel, u32)>>) {
        match ports.split_first() {
            None => out.push(cur.clone()),
            Some((p, rest)) => {
                for n in 0..=left {
                    if n > 0 {
                        cur.push((*p, n));
                    }
                    rec(rest, left - n, cur, out);
                    if n > 0 {
                        cur.pop();
                    }
                }
            }
        }
    }
    let mut all = Vec::new();
    rec(ports, max_photons, &mut Vec::new(), &mut all);
    all.into_iter()
        .map(|c| DetectionPattern::exact(c).expect("distinct ports"))
        .collect()
}

/// Path lengths and couplers needed to evaluate the GHZ phase.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GhzContext {
    pub grid: KGrid,
    pub fanout: FanoutParams,
}

/// `Theta = k1 (L11 - L31) + k2 (L21 - L10) + k2' (L30 - L20) + pi/2`.
pub fn theta_formula(k1: f64, k2: f64, k2p: f64, f: &FanoutParams) -> f64 {
    k1 * (f.l_11 - f.l_31) + k2 * (f.l_21 - f.l_10) + k2p * (f.l_30 - f.l_20) + FRAC_PI_2
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Smallest absolute difference between two angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Logical reading of a fourfold basis state: bits for `(D1, D2, D3)` and
/// the k-bins of `T` and of each `D_n` photon.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct QubitReading {
    pub bits: [u8; 3],
    pub target_kbin: usize,
    pub kbins: [usize; 3],
}

pub fn qubit_reading(state: &FockBasisState) -> Option<QubitReading> {
    let mut target = None;
    let mut bits = [None; 3];
    let mut kbins = [0usize; 3];
    for &(mode, n) in state.occupations() {
        if n != 1 {
            return None;
        }
        match mode.channel {
            Channel::Target if target.is_none() => target = Some(mode.kbin),
            Channel::Detector { n: d, m } if (1..=3).contains(&d) && m <= 1 && bits[d as usize - 1].is_none() => {
                bits[d as usize - 1] = Some(m);
                kbins[d as usize - 1] = mode.kbin;
            }
            _ => return None,
        }
    }
    Some(QubitReading {
        bits: [bits[0]?, bits[1]?, bits[2]?],
        target_kbin: target?,
        kbins,
    })
}

/// Wavevector bins `(T, k1, k2, k2')` shared by the `|110>` and `|001>`
/// components of one GHZ branch.
///
/// In `|110>`, `D_{1,1}` carries `k1`, `D_{2,1}` carries `k2` and `D_{3,0}`
/// carries `k2'`; in `|001>`, `D_{3,1}` carries `k1`, `D_{1,0}` carries `k2`
/// and `D_{2,0}` carries `k2'`.
pub type BranchKey = (usize, usize, usize, usize);

fn branch_of(r: &QubitReading) -> Option<(BranchKey, bool)> {
    match r.bits {
        [1, 1, 0] => Some(((r.target_kbin, r.kbins[0], r.kbins[1], r.kbins[2]), true)),
        [0, 0, 1] => Some(((r.target_kbin, r.kbins[2], r.kbins[0], r.kbins[1]), false)),
        _ => None,
    }
}

/// Whether a basis state is one of the two GHZ components.
pub fn is_ghz_component(state: &FockBasisState) -> bool {
    qubit_reading(state).and_then(|r| branch_of(&r)).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhzBranch {
    pub key: BranchKey,
    pub a110: C64,
    pub a001: C64,
    /// Share of the conditional state carried by this branch.
    pub weight: f64,
    pub theta_measured: Option<f64>,
    pub theta_formula: f64,
    /// `|<GHZ(theta_formula)|branch>|^2` for the normalized branch.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhzReport {
    pub probability: f64,
    pub conditional: KetVector,
    pub branches: Vec<GhzBranch>,
    /// Relative phase of the heaviest branch.
    pub theta_measured: Option<f64>,
    pub theta_formula: f64,
    /// Largest `|theta_measured - theta_formula|` (mod 2 pi) over branches.
    pub theta_deviation: f64,
    /// Overlap with the ideal GHZ state, summed over branches.
    pub fidelity: f64,
    /// Phase of the `|110>` amplitude of the heaviest branch.
    pub gamma: f64,
    /// Support outside the GHZ components.
    pub extra_support: Vec<FockBasisState>,
    pub extra_weight: f64,
}

/// Decomposes a conditional state into GHZ branches without rejecting
/// stray support; stray weight lowers the fidelity.
pub fn ghz_analyze(sel: &PostSelection, ctx: &GhzContext) -> PipelineResult<GhzReport> {
    let conditional = sel.conditional.clone().ok_or(PipelineError::EmptyConditional)?;
    let mut pairs: BTreeMap<BranchKey, (C64, C64)> = BTreeMap::new();
    let mut extra_support = Vec::new();
    let mut extra_weight = 0.0;
    for (s, a) in conditional.amplitudes() {
        match qubit_reading(s).and_then(|r| branch_of(&r)) {
            Some((key, is110)) => {
                let e = pairs.entry(key).or_default();
                if is110 {
                    e.0 += a;
                } else {
                    e.1 += a;
                }
            }
            None => {
                extra_support.push(s.clone());
                extra_weight += a.norm_sqr();
            }
        }
    }
    let total = conditional.norm_sqr();
    let grid = ctx.grid;
    let mut branches = Vec::with_capacity(pairs.len());
    let mut overlap_sum = 0.0;
    for (key, (a110, a001)) in pairs {
        let (_, b1, b2, b2p) = key;
        let tf = theta_formula(grid.k(b1), grid.k(b2), grid.k(b2p), &ctx.fanout);
        let w = a110.norm_sqr() + a001.norm_sqr();
        let theta_measured = (a110.norm() > 0.0 && a001.norm() > 0.0).then(|| wrap_angle((a001 / a110).arg()));
        let ov = (a110 + C64::from_polar(1.0, -tf) * a001).norm_sqr() / 2.0;
        overlap_sum += ov;
        branches.push(GhzBranch {
            key,
            a110,
            a001,
            weight: w / total,
            theta_measured,
            theta_formula: wrap_angle(tf),
            fidelity: ov / w,
        });
    }
    let heaviest = branches
        .iter()
        .max_by(|a, b| a.weight.total_cmp(&b.weight))
        .cloned();
    let theta_deviation = branches
        .iter()
        .map(|b| b.theta_measured.map_or(f64::INFINITY, |t| angle_distance(t, b.theta_formula)))
        .fold(0.0, f64::max);
    let (theta_measured, theta_formula, gamma) = match &heaviest {
        Some(b) => (b.theta_measured, b.theta_formula, b.a110.arg()),
        None => (None, f64::NAN, f64::NAN),
    };
    Ok(GhzReport {
        probability: sel.probability,
        conditional,
        branches,
        theta_measured,
        theta_formula,
        theta_deviation,
        fidelity: overlap_sum / total,
        gamma,
        extra_support,
        extra_weight: extra_weight / total,
    })
}

/// Like [`ghz_analyze`], but any support outside the `|110>`/`|001>`
/// components is an error.
pub fn ghz_extract(sel: &PostSelection, ctx: &GhzContext) -> PipelineResult<GhzReport> {
    let report = ghz_analyze(sel, ctx)?;
    if !report.extra_support.is_empty() {
        return Err(PipelineError::StructuralMismatch(
            report.extra_support.iter().map(|s| s.to_string()).collect(),
        ));
    }
    Ok(report)
}

/// Four-photon basis states that pass the fourfold-with-`T` criterion
/// without being GHZ components.
pub fn remainder_violations(four_photon: &KetVector, mode: DetectorMode) -> Vec<FockBasisState> {
    let fourfold = DetectionPattern::fourfold(mode);
    four_photon
        .amplitudes()
        .map(|(s, _)| s)
        .filter(|s| !is_ghz_component(s) && fourfold.matches(s))
        .cloned()
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RateEstimate {
    pub fourfold_probability: f64,
    pub rate_hz: f64,
    /// `|beta|^2` exceeds [`HIGH_BETA_SQR`].
    pub high_beta: bool,
}

/// Fourfold rate `|beta^2 / 4|^2 * rep_rate`.
pub fn generation_rate(beta: C64, rep_rate: f64) -> RateEstimate {
    let p = (beta * beta / 4.0).norm_sqr();
    RateEstimate {
        fourfold_probability: p,
        rate_hz: p * rep_rate,
        high_beta: beta.norm_sqr() > HIGH_BETA_SQR,
    }
}

/// Pair amplitude given either for the whole source or for one ring.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum BetaSpec {
    Source(C64),
    Ring(C64),
}

/// Everything computed by one end-to-end evaluation.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub table: PairAmplitudeTable,
    pub beta: C64,
    pub beta_ring: C64,
    pub source_operator: OperatorPoly,
    pub fanout: ModeMap,
    pub detector_operator: OperatorPoly,
    pub expansion: ExpansionState,
    pub truncated: KetVector,
}

impl PipelineRun {
    pub fn evaluate(
        source: &SourceParams,
        fanout: &FanoutParams,
        bwf: &BwfMatrix,
        beta: BetaSpec,
        variant: PsiVariant,
    ) -> PipelineResult<Self> {
        let table = pair_amplitudes(source, bwf, variant)?;
        let (beta, beta_ring) = match beta {
            BetaSpec::Source(b) => (b, b / table.raw_norm),
            BetaSpec::Ring(br) => (effective_beta(table.raw_norm, br)?, br),
        };
        let source_operator = pair_creation_operator(&table)?;
        let map = build_fanout(fanout, bwf.grid())?;
        let detector_operator = heisenberg_rewrite(&source_operator, &map)?;
        let expansion = expand_output(&detector_operator, beta)?;
        let truncated = expansion.truncated_ket()?;
        Ok(Self {
            table,
            beta,
            beta_ring,
            source_operator,
            fanout: map,
            detector_operator,
            expansion,
            truncated,
        })
    }

    pub fn postselect(&self, pattern: &DetectionPattern) -> PostSelection {
        postselect(&self.truncated, pattern)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{CreationMonomial, ModeId, ModeUniverse};
    use crate::source::SourceParams;
    use crate::spectral::{discretize, BwfModel};

    fn single() -> BwfMatrix {
        discretize(&BwfModel::SingleBin, &KGrid::single(0.0)).unwrap().0
    }

    fn ideal(beta_sqr: f64) -> PipelineRun {
        PipelineRun::evaluate(
            &SourceParams::balanced(PI),
            &FanoutParams::balanced(),
            &single(),
            BetaSpec::Source(C64::new(beta_sqr.sqrt(), 0.0)),
            PsiVariant::Direct,
        )
        .unwrap()
    }

    #[test]
    fn sqrt3_factor_emerges() {
        let run = ideal(0.1);
        assert!((run.expansion.four_photon_factor - 3f64.sqrt() / 2.0).abs() < 1e-12);
        // the same factor before the fan-out
        let e = expand_output(&run.source_operator, run.beta).unwrap();
        assert!((e.four_photon_factor - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(e.four_photon.support_len(), 3);
        assert!(e.four_photon.amplitudes().all(|(s, _)| s.photon_number() == 4));
    }

    #[test]
    fn single_mode_factor() {
        let u = ModeUniverse::new([Channel::Target], 1);
        let b = OperatorPoly::creation(&u, ModeId::new(Channel::Target, 0)).unwrap();
        let e = expand_output(&b, C64::new(0.1, 0.0)).unwrap();
        assert!((e.four_photon_factor - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_operator_rejected() {
        let u = ModeUniverse::new([Channel::Target], 1);
        let b = OperatorPoly::creation(&u, ModeId::new(Channel::Target, 0)).unwrap().scale(C64::new(2.0, 0.0));
        assert!(matches!(expand_output(&b, C64::new(0.1, 0.0)), Err(PipelineError::NotNormalized(_))));
    }

    #[test]
    fn ideal_fourfold_probability_and_ghz() {
        for b2 in [0.01, 0.1] {
            let run = ideal(b2);
            let sel = run.postselect(&DetectionPattern::fourfold(DetectorMode::NumberResolving));
            assert!((sel.probability - b2 * b2 / 16.0).abs() < 1e-12);
            let ctx = GhzContext { grid: KGrid::single(0.0), fanout: FanoutParams::balanced() };
            let rep = ghz_extract(&sel, &ctx).unwrap();
            assert_eq!(rep.branches.len(), 1);
            assert!((rep.fidelity - 1.0).abs() < 1e-10);
            assert!(angle_distance(rep.theta_measured.unwrap(), FRAC_PI_2) < 1e-12);
            assert!(rep.theta_deviation < 1e-12);
        }
    }

    #[test]
    fn double_34_pair_never_reaches_target() {
        let src = crate::source::source_universe(1);
        let m = |p| ModeId::new(Channel::Source(p), 0);
        let op = OperatorPoly::from_terms(&src, [(C64::new(1.0, 0.0), CreationMonomial::from_factors([m(3), m(3), m(4), m(4)]))]).unwrap();
        let map = build_fanout(&FanoutParams::balanced(), &KGrid::single(0.0)).unwrap();
        let det = heisenberg_rewrite(&op, &map).unwrap();
        let ket = apply(&det, &KetVector::vacuum(det.universe())).unwrap();
        assert!(ket.norm_sqr() > 0.0);
        let sel = postselect(&ket, &DetectionPattern::fourfold(DetectorMode::NumberResolving));
        assert_eq!(sel.probability, 0.0);
        assert!(ket.amplitudes().all(|(s, _)| !s.channel_counts().contains_key(&Channel::Target)));
    }

    #[test]
    fn theta_formula_values() {
        let mut f = FanoutParams::balanced();
        assert!((theta_formula(0.3, 0.4, 0.5, &f) - FRAC_PI_2).abs() < 1e-15);
        f.l_11 = 0.5;
        assert!((theta_formula(2.0, 0.0, 0.0, &f) - (1.0 + FRAC_PI_2)).abs() < 1e-15);
    }

    #[test]
    fn rates() {
        let r = generation_rate(C64::new(0.1f64.sqrt(), 0.0), 1e6);
        assert!((r.rate_hz - 625.0).abs() < 1e-9);
        assert!(!r.high_beta);
        assert_eq!(generation_rate(C64::new(0.0, 0.0), 1e6).rate_hz, 0.0);
        let r = generation_rate(C64::new(0.05f64.sqrt(), 0.0), 1e7);
        assert!((r.rate_hz - 1562.5).abs() < 1e-9);
        assert!(generation_rate(C64::new(0.5, 0.0), 1e6).high_beta);
    }

    #[test]
    fn pattern_semantics() {
        let t = ModeId::new(Channel::Target, 0);
        let d = |n, m| ModeId::new(Channel::Detector { n, m }, 0);
        let four = DetectionPattern::fourfold(DetectorMode::NumberResolving);
        assert!(four.matches(&FockBasisState::from_modes([t, d(1, 1), d(2, 1), d(3, 0)])));
        assert!(!four.matches(&FockBasisState::from_modes([t, d(1, 1), d(1, 0), d(3, 0)])));
        assert!(!four.matches(&FockBasisState::from_modes([d(1, 1), d(2, 1), d(3, 0)])));
        let doubled = FockBasisState::from_counts([(t, 1), (d(1, 1), 2), (d(2, 1), 1), (d(3, 0), 1)]);
        assert!(!four.matches(&doubled));
        let bucket = DetectionPattern::fourfold(DetectorMode::Bucket);
        assert!(bucket.matches(&doubled));
        let three = DetectionPattern::threefold_without_target(DetectorMode::NumberResolving);
        assert!(three.matches(&FockBasisState::from_modes([d(1, 1), d(2, 1), d(3, 0)])));
        assert!(three.matches(&FockBasisState::from_modes([t, t, d(1, 1), d(2, 1), d(3, 0)])));
        assert!(DetectionPattern::dark().matches(&FockBasisState::vacuum()));
        assert!(DetectionPattern::exact([(Channel::Target, 0)]).is_err());
        assert!(DetectionPattern::new(vec![(vec![Channel::Target], 1), (vec![Channel::Target], 1)], BTreeSet::new(), DetectorMode::Bucket).is_err());
    }

    #[test]
    fn empty_match_is_not_an_error() {
        let run = ideal(0.1);
        let pat = DetectionPattern::exact([(Channel::Wire(9), 3)]).unwrap();
        let sel = run.postselect(&pat);
        assert_eq!(sel.probability, 0.0);
        assert!(sel.conditional.is_none());
        let ctx = GhzContext { grid: KGrid::single(0.0), fanout: FanoutParams::balanced() };
        assert_eq!(ghz_extract(&sel, &ctx).unwrap_err(), PipelineError::EmptyConditional);
    }

    #[test]
    fn structural_mismatch_lists_extra_support() {
        let u = crate::circuit::detector_universe(1);
        let t = ModeId::new(Channel::Target, 0);
        let d = |n, m| ModeId::new(Channel::Detector { n, m }, 0);
        let ket = KetVector::from_amplitudes(
            &u,
            [
                (FockBasisState::from_modes([t, d(1, 1), d(2, 1), d(3, 0)]), C64::new(0.5, 0.0)),
                (FockBasisState::from_modes([t, d(1, 1), d(2, 0), d(3, 1)]), C64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let sel = postselect(&ket, &DetectionPattern::fourfold(DetectorMode::NumberResolving));
        let ctx = GhzContext { grid: KGrid::single(0.0), fanout: FanoutParams::balanced() };
        match ghz_extract(&sel, &ctx) {
            Err(PipelineError::StructuralMismatch(v)) => assert_eq!(v, vec!["T:0 D1_1:0 D2_0:0 D3_1:0".to_string()]),
            other => panic!("{other:?}"),
        }
        let rep = ghz_analyze(&sel, &ctx).unwrap();
        assert!((rep.extra_weight - 0.5).abs() < 1e-15);
        assert!((rep.fidelity - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exact_patterns_partition_outcomes() {
        let ports = [Channel::Target, Channel::Detector { n: 1, m: 0 }];
        let pats = all_exact_patterns(&ports, 2);
        assert_eq!(pats.len(), 6);
        let s = FockBasisState::from_counts([(ModeId::new(Channel::Target, 0), 1), (ModeId::new(Channel::Detector { n: 1, m: 0 }, 0), 1)]);
        assert_eq!(pats.iter().filter(|p| p.matches(&s)).count(), 1);
    }

    #[test]
    fn expansion_of_simple_poly() {
        let u = ModeUniverse::new([Channel::Target, Channel::Wire(0)], 1);
        let a = ModeId::new(Channel::Target, 0);
        let b = ModeId::new(Channel::Wire(0), 0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = OperatorPoly::from_terms(
            &u,
            [(C64::new(s, 0.0), CreationMonomial::from_factors([a])), (C64::new(0.0, s), CreationMonomial::from_factors([b]))],
        )
        .unwrap();
        let e = expand_output(&c, C64::new(0.2, 0.0)).unwrap();
        // (a + ib)^2 / 2 |0> = (sqrt2|2,0> + 2i|1,1> - sqrt2|0,2>) / 2 -> norm 1 / sqrt2
        assert!((e.four_photon_factor - s).abs() < 1e-15);
    }
}
