//! k-resolved linear optics and Heisenberg rewriting of creation operators.
//!
//! A [`ModeMap`] sends each input creation operator `b†_{k,in}` to a linear
//! combination of output creation operators at the same `k`. Maps are built
//! per component and composed into circuits; [`build_fanout`] assembles the
//! detector fan-out that follows the pair source.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{Channel, CreationMonomial, FockError, ModeId, ModeUniverse, OperatorPoly};
use crate::spectral::KGrid;

/// Tolerance for `t^2 + r^2 = 1` and unitarity checks.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("invalid component: {0}")]
    InvalidComponent(String),

    #[error("mode {0} has no entry in the mode map")]
    UnmappedMode(ModeId),

    #[error("channel {0} is not available at this point of the circuit")]
    MissingChannel(Channel),

    #[error("channel {0} already exists at this point of the circuit")]
    DuplicateChannel(Channel),

    #[error(transparent)]
    Fock(#[from] FockError),
}

pub type CircuitResult<T> = Result<T, CircuitError>;

/// Sign of the cross amplitude `±it` of a directional coupler.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplerConvention {
    /// `[[r, it], [it, r]]`, used for the pair source.
    Source,
    /// `[[r, -it], [-it, r]]`, used for the detector fan-out.
    Fanout,
}

impl CouplerConvention {
    pub fn sigma(self) -> f64 {
        match self {
            CouplerConvention::Source => 1.0,
            CouplerConvention::Fanout => -1.0,
        }
    }
}

/// Selects `e^{+ikL}` or `e^{-ikL}` for a delay.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelaySign {
    Plus,
    #[default]
    Minus,
}

impl DelaySign {
    pub fn value(self) -> f64 {
        match self {
            DelaySign::Plus => 1.0,
            DelaySign::Minus => -1.0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ComponentKind {
    DirectionalCoupler { t: f64, r: f64, convention: CouplerConvention },
    PhaseShift { phi: f64 },
    Delay { length: f64, sign: DelaySign },
    /// Phase-free waveguide crossing.
    Swap,
}

impl ComponentKind {
    pub fn arity(&self) -> usize {
        match self {
            ComponentKind::DirectionalCoupler { .. } | ComponentKind::Swap => 2,
            ComponentKind::PhaseShift { .. } | ComponentKind::Delay { .. } => 1,
        }
    }
}

/// A component placed on named wires. Output `j` of the component matrix is
/// relabelled to `outputs[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    pub inputs: Vec<Channel>,
    pub outputs: Vec<Channel>,
}

impl ComponentSpec {
    pub fn new(kind: ComponentKind, inputs: &[Channel], outputs: &[Channel]) -> Self {
        Self {
            kind,
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
        }
    }

    /// A single-wire component that keeps its label.
    pub fn on(kind: ComponentKind, wire: Channel) -> Self {
        Self::new(kind, &[wire], &[wire])
    }

    pub fn validate(&self) -> CircuitResult<()> {
        let n = self.kind.arity();
        if self.inputs.len() != n || self.outputs.len() != n {
            return Err(CircuitError::InvalidComponent(format!(
                "{:?} needs {n} input and output wires",
                self.kind
            )));
        }
        match self.kind {
            ComponentKind::DirectionalCoupler { t, r, .. } => {
                if t < 0.0 || r < 0.0 || (t * t + r * r - 1.0).abs() > UNITARY_TOL {
                    return Err(CircuitError::InvalidComponent(format!(
                        "coupler needs t, r >= 0 and t^2 + r^2 = 1, got t={t}, r={r}"
                    )));
                }
            }
            ComponentKind::Delay { length, .. } => {
                if !(length >= 0.0) {
                    return Err(CircuitError::InvalidComponent(format!("negative delay length {length}")));
                }
            }
            ComponentKind::PhaseShift { phi } => {
                if !phi.is_finite() {
                    return Err(CircuitError::InvalidComponent("non-finite phase".into()));
                }
            }
            ComponentKind::Swap => {}
        }
        Ok(())
    }
}

/// Transfer matrix `M[out][in]` of a component at wavevector `k`.
pub fn component_matrix(spec: &ComponentSpec, k: f64) -> CircuitResult<DMatrix<C64>> {
    spec.validate()?;
    let m = match spec.kind {
        ComponentKind::DirectionalCoupler { t, r, convention } => {
            let cross = C64::new(0.0, convention.sigma() * t);
            let thru = C64::new(r, 0.0);
            DMatrix::from_row_slice(2, 2, &[thru, cross, cross, thru])
        }
        ComponentKind::PhaseShift { phi } => DMatrix::from_element(1, 1, C64::from_polar(1.0, phi)),
        ComponentKind::Delay { length, sign } => {
            DMatrix::from_element(1, 1, C64::from_polar(1.0, sign.value() * k * length))
        }
        ComponentKind::Swap => {
            let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
            DMatrix::from_row_slice(2, 2, &[z, o, o, z])
        }
    };
    Ok(m)
}

/// Linear substitution `b†_{k,in} -> sum_out a(k) b†_{k,out}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMap {
    input: ModeUniverse,
    output: ModeUniverse,
    entries: BTreeMap<ModeId, Vec<(ModeId, C64)>>,
}

impl ModeMap {
    pub fn identity(universe: &ModeUniverse) -> Self {
        let entries = universe
            .modes()
            .into_iter()
            .map(|m| (m, vec![(m, C64::new(1.0, 0.0))]))
            .collect();
        Self {
            input: universe.clone(),
            output: universe.clone(),
            entries,
        }
    }

    pub fn input_universe(&self) -> &ModeUniverse {
        &self.input
    }

    pub fn output_universe(&self) -> &ModeUniverse {
        &self.output
    }

    pub fn image(&self, mode: &ModeId) -> Option<&[(ModeId, C64)]> {
        self.entries.get(mode).map(Vec::as_slice)
    }

    pub fn amplitude(&self, input: &ModeId, output: &ModeId) -> C64 {
        self.image(input)
            .and_then(|img| img.iter().find(|(m, _)| m == output).map(|(_, a)| *a))
            .unwrap_or_default()
    }

    /// Places one component on the current wires of `universe`; every other
    /// wire passes through unchanged.
    pub fn from_component(spec: &ComponentSpec, universe: &ModeUniverse, grid: &KGrid) -> CircuitResult<Self> {
        spec.validate()?;
        let chans: BTreeSet<Channel> = universe.channels().collect();
        for c in &spec.inputs {
            if !chans.contains(c) {
                return Err(CircuitError::MissingChannel(*c));
            }
        }
        let mut out_chans: BTreeSet<Channel> = chans.iter().filter(|c| !spec.inputs.contains(c)).copied().collect();
        for c in &spec.outputs {
            if !out_chans.insert(*c) {
                return Err(CircuitError::DuplicateChannel(*c));
            }
        }
        let output = ModeUniverse::new(out_chans, universe.n_bins());
        let mut entries = BTreeMap::new();
        for kbin in 0..universe.n_bins() {
            let m = component_matrix(spec, grid.k(kbin))?;
            for c in universe.channels() {
                let input = ModeId::new(c, kbin);
                let image = match spec.inputs.iter().position(|x| *x == c) {
                    Some(j) => spec
                        .outputs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| m[(*i, j)] != C64::new(0.0, 0.0))
                        .map(|(i, o)| (ModeId::new(*o, kbin), m[(i, j)]))
                        .collect(),
                    None => vec![(input, C64::new(1.0, 0.0))],
                };
                entries.insert(input, image);
            }
        }
        Ok(Self {
            input: universe.clone(),
            output,
            entries,
        })
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ModeMap) -> CircuitResult<ModeMap> {
        let mut entries = BTreeMap::new();
        for (input, image) in &self.entries {
            let mut acc: BTreeMap<ModeId, C64> = BTreeMap::new();
            for (mid, a) in image {
                let img2 = next.image(mid).ok_or(CircuitError::UnmappedMode(*mid))?;
                for (out, b) in img2 {
                    *acc.entry(*out).or_default() += a * b;
                }
            }
            let v = acc.into_iter().filter(|(_, a)| *a != C64::new(0.0, 0.0)).collect();
            entries.insert(*input, v);
        }
        Ok(ModeMap {
            input: self.input.clone(),
            output: next.output.clone(),
            entries,
        })
    }

    /// Conjugate transpose: maps output modes back onto input modes.
    pub fn adjoint(&self) -> ModeMap {
        let mut entries: BTreeMap<ModeId, Vec<(ModeId, C64)>> =
            self.output.modes().into_iter().map(|m| (m, Vec::new())).collect();
        for (input, image) in &self.entries {
            for (out, a) in image {
                entries.entry(*out).or_default().push((*input, a.conj()));
            }
        }
        ModeMap {
            input: self.output.clone(),
            output: self.input.clone(),
            entries,
        }
    }

    /// Largest amplitude difference against another map over the union of
    /// their entries.
    pub fn max_deviation(&self, other: &ModeMap) -> f64 {
        let inputs: BTreeSet<&ModeId> = self.entries.keys().chain(other.entries.keys()).collect();
        let mut worst = 0.0f64;
        for i in inputs {
            let outs: BTreeSet<ModeId> = self
                .image(i)
                .unwrap_or(&[])
                .iter()
                .chain(other.image(i).unwrap_or(&[]))
                .map(|(m, _)| *m)
                .collect();
            for o in outs {
                worst = worst.max((self.amplitude(i, &o) - other.amplitude(i, &o)).norm());
            }
        }
        worst
    }

    /// Restricts the map to the listed input channels.
    pub fn restrict_inputs(&self, channels: &[Channel]) -> ModeMap {
        let input = ModeUniverse::new(channels.iter().copied(), self.input.n_bins());
        let entries = self
            .entries
            .iter()
            .filter(|(m, _)| channels.contains(&m.channel))
            .map(|(m, v)| (*m, v.clone()))
            .collect();
        ModeMap {
            input,
            output: self.output.clone(),
            entries,
        }
    }
}

/// Composes components in order, starting from `universe`.
pub fn circuit_map(components: &[ComponentSpec], universe: &ModeUniverse, grid: &KGrid) -> CircuitResult<ModeMap> {
    let mut map = ModeMap::identity(universe);
    for spec in components {
        let stage = ModeMap::from_component(spec, map.output_universe(), grid)?;
        map = map.then(&stage)?;
    }
    Ok(map)
}

/// Substitutes every creation operator of `op` through `map`.
pub fn heisenberg_rewrite(op: &OperatorPoly, map: &ModeMap) -> CircuitResult<OperatorPoly> {
    let out = map.output_universe();
    let mut images: BTreeMap<ModeId, OperatorPoly> = BTreeMap::new();
    let mut total = OperatorPoly::zero(out);
    for (mono, c) in op.terms() {
        let mut term = OperatorPoly::one(out).scale(*c);
        for &(mode, power) in mono.factors() {
            let img = match images.entry(mode) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => {
                    let img = map.image(&mode).ok_or(CircuitError::UnmappedMode(mode))?;
                    e.insert(OperatorPoly::from_terms(
                        out,
                        img.iter().map(|(m, a)| (*a, CreationMonomial::from_factors([*m]))),
                    )?)
                }
            };
            for _ in 0..power {
                term = term.try_mul(img)?;
            }
        }
        total = total.try_add(&term)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarityReport {
    pub kbin: usize,
    /// `max |G - I|` over the Gram matrix of the input columns.
    pub worst_deviation: f64,
    pub worst_pair: Option<(ModeId, ModeId)>,
}

impl UnitarityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_deviation <= tol
    }
}

/// Checks that the columns of the map at `kbin` are orthonormal.
pub fn check_unitary(map: &ModeMap, kbin: usize) -> UnitarityReport {
    let inputs: Vec<&ModeId> = map.entries.keys().filter(|m| m.kbin == kbin).collect();
    let mut worst = 0.0f64;
    let mut worst_pair = None;
    for (a, ia) in inputs.iter().enumerate() {
        for ib in &inputs[a..] {
            let mut g = C64::new(0.0, 0.0);
            for (o, x) in map.image(ia).unwrap_or(&[]) {
                g += x.conj() * map.amplitude(ib, o);
            }
            let expect = if ia == ib { 1.0 } else { 0.0 };
            let dev = (g - expect).norm();
            if dev > worst {
                worst = dev;
                worst_pair = Some((**ia, **ib));
            }
        }
    }
    UnitarityReport {
        kbin,
        worst_deviation: worst,
        worst_pair,
    }
}

/// Coupler amplitudes and detector path lengths of the fan-out.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanoutParams {
    pub t1: f64,
    pub r1: f64,
    pub t2: f64,
    pub r2: f64,
    pub t3: f64,
    pub r3: f64,
    #[serde(default)]
    pub l_t: f64,
    #[serde(default)]
    pub l_10: f64,
    #[serde(default)]
    pub l_11: f64,
    #[serde(default)]
    pub l_20: f64,
    #[serde(default)]
    pub l_21: f64,
    #[serde(default)]
    pub l_30: f64,
    #[serde(default)]
    pub l_31: f64,
    /// Propagation sign on the `D_{1,0}` arm.
    #[serde(default)]
    pub l10_sign: DelaySign,
}

impl FanoutParams {
    /// 50:50 couplers, all lengths zero.
    pub fn balanced() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            t1: s,
            r1: s,
            t2: s,
            r2: s,
            t3: s,
            r3: s,
            l_t: 0.0,
            l_10: 0.0,
            l_11: 0.0,
            l_20: 0.0,
            l_21: 0.0,
            l_30: 0.0,
            l_31: 0.0,
            l10_sign: DelaySign::Minus,
        }
    }

    pub fn validate(&self) -> CircuitResult<()> {
        for (name, t, r) in [("1", self.t1, self.r1), ("2", self.t2, self.r2), ("3", self.t3, self.r3)] {
            if t < 0.0 || r < 0.0 || (t * t + r * r - 1.0).abs() > UNITARY_TOL {
                return Err(CircuitError::InvalidComponent(format!(
                    "fan-out coupler {name}: need t, r >= 0 and t^2 + r^2 = 1, got t={t}, r={r}"
                )));
            }
        }
        for (name, l) in self.lengths() {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(CircuitError::InvalidComponent(format!("length {name} = {l} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn lengths(&self) -> [(&'static str, f64); 7] {
        [
            ("l_t", self.l_t),
            ("l_10", self.l_10),
            ("l_11", self.l_11),
            ("l_20", self.l_20),
            ("l_21", self.l_21),
            ("l_30", self.l_30),
            ("l_31", self.l_31),
        ]
    }

    /// Component list of the fan-out, starting from source channels 1-4 and
    /// the idle coupler ports `W0..W2`.
    pub fn components(&self) -> Vec<ComponentSpec> {
        use Channel::{Detector as D, Source as S, Target, Wire};
        let dc = |t, r| ComponentKind::DirectionalCoupler {
            t,
            r,
            convention: CouplerConvention::Fanout,
        };
        let delay = |length, sign| ComponentKind::Delay { length, sign };
        let minus = DelaySign::Minus;
        vec![
            ComponentSpec::new(delay(self.l_t, minus), &[S(1)], &[Target]),
            // through arm first, cross arm second
            ComponentSpec::new(dc(self.t1, self.r1), &[S(2), Wire(0)], &[D { n: 2, m: 0 }, D { n: 3, m: 0 }]),
            ComponentSpec::new(dc(self.t2, self.r2), &[S(3), Wire(1)], &[D { n: 1, m: 1 }, D { n: 3, m: 1 }]),
            ComponentSpec::new(dc(self.t3, self.r3), &[S(4), Wire(2)], &[D { n: 1, m: 0 }, D { n: 2, m: 1 }]),
            ComponentSpec::on(delay(self.l_20, minus), D { n: 2, m: 0 }),
            ComponentSpec::on(delay(self.l_30, minus), D { n: 3, m: 0 }),
            ComponentSpec::on(delay(self.l_11, minus), D { n: 1, m: 1 }),
            ComponentSpec::on(delay(self.l_31, minus), D { n: 3, m: 1 }),
            ComponentSpec::on(delay(self.l_10, self.l10_sign), D { n: 1, m: 0 }),
            ComponentSpec::on(delay(self.l_21, minus), D { n: 2, m: 1 }),
        ]
    }
}

/// Universe at the fan-out input: source channels plus idle coupler ports.
pub fn fanout_input_universe(n_bins: usize) -> ModeUniverse {
    let mut chans: Vec<Channel> = Channel::source_channels().to_vec();
    chans.extend((0..3).map(Channel::Wire));
    ModeUniverse::new(chans, n_bins)
}

/// Detector-side universe: `T` and the six `D_{n,m}` ports.
pub fn detector_universe(n_bins: usize) -> ModeUniverse {
    ModeUniverse::new(Channel::detector_ports(), n_bins)
}

/// Full 7x7 fan-out map, including the idle coupler inputs.
pub fn build_fanout_full(params: &FanoutParams, grid: &KGrid) -> CircuitResult<ModeMap> {
    params.validate()?;
    circuit_map(&params.components(), &fanout_input_universe(grid.n_bins), grid)
}

/// Fan-out restricted to source channels 1-4.
pub fn build_fanout(params: &FanoutParams, grid: &KGrid) -> CircuitResult<ModeMap> {
    Ok(build_fanout_full(params, grid)?.restrict_inputs(&Channel::source_channels()))
}
