//! Brute-force reference: photon histories through explicit netlists and a
//! dense Fock-space expansion.
//!
//! Nothing here calls into the analytic source or circuit code. The oracle
//! reads the same parameter structs, declares its own topology of couplers,
//! phase shifters and propagation segments, enumerates every path a photon
//! can take, and multiplies the per-hop amplitudes.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{DelaySign, FanoutParams};
use crate::fock::{Channel, CreationMonomial, FockBasisState, FockError, KetVector, ModeId, ModeUniverse, OperatorPoly};
use crate::source::{PairAmplitudeTable, SourceParams, OMEGA};
use crate::spectral::{discretize, BwfMatrix, BwfModel, KGrid};

/// Channel limit of the dense expansion.
pub const MAX_DENSE_CHANNELS: usize = 8;
/// k-bin limit of the dense expansion.
pub const MAX_DENSE_BINS: usize = 3;
/// Photon-number cutoff of the dense basis.
pub const DENSE_MAX_PHOTONS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("netlist has no wire named {0:?}")]
    MissingWire(String),

    #[error("topology inconsistency: {0}")]
    Topology(String),

    #[error("dense expansion refused: {channels} channels x {bins} k-bins ({modes} modes, dimension {dimension}); limit is {MAX_DENSE_CHANNELS} x {MAX_DENSE_BINS}")]
    DimensionGuard { channels: usize, bins: usize, modes: usize, dimension: u128 },

    #[error("oracle pair amplitudes vanish")]
    ZeroNorm,

    #[error(transparent)]
    Fock(#[from] FockError),
}

pub type OracleResult<T> = Result<T, OracleError>;

/// One hop's amplitude as a function of the photon's wavevector.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Factor {
    Through(f64),
    /// `sign * i * t`.
    Cross { t: f64, sign: f64 },
    Phase(f64),
    /// `exp(sign * i * k * length)`.
    Propagate { length: f64, sign: f64 },
}

impl Factor {
    fn eval(&self, k: f64) -> C64 {
        match *self {
            Factor::Through(r) => C64::new(r, 0.0),
            Factor::Cross { t, sign } => C64::new(0.0, sign * t),
            Factor::Phase(phi) => C64::new(phi.cos(), phi.sin()),
            Factor::Propagate { length, sign } => {
                let x = sign * k * length;
                C64::new(x.cos(), x.sin())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Wire(String),
    Ring(u8),
    Out(Channel),
}

#[derive(Clone, Debug)]
struct Hop {
    label: &'static str,
    to: Node,
    factor: Factor,
}

/// Directed acyclic graph of hops between named wires.
#[derive(Clone, Debug, Default)]
pub struct Netlist {
    hops: BTreeMap<String, Vec<Hop>>,
}

/// One path from a start wire to a terminal node.
#[derive(Clone, Debug, PartialEq)]
pub struct History {
    /// `(wire, hop label)` for every choice made.
    pub steps: Vec<(String, &'static str)>,
    pub factors: Vec<Factor>,
    pub terminal: Node,
}

impl History {
    pub fn amplitude(&self, k: f64) -> C64 {
        self.factors.iter().fold(C64::new(1.0, 0.0), |acc, f| acc * f.eval(k))
    }
}

impl Netlist {
    fn hop(&mut self, from: &str, label: &'static str, to: Node, factor: Factor) {
        self.hops.entry(from.to_string()).or_default().push(Hop { label, to, factor });
    }

    /// Enumerates every history from `start` to a ring or output port.
    pub fn histories(&self, start: &str) -> OracleResult<Vec<History>> {
        let mut out = Vec::new();
        let mut stack = vec![(start.to_string(), Vec::new(), Vec::new())];
        while let Some((wire, steps, factors)) = stack.pop() {
            if steps.len() > self.hops.len() {
                return Err(OracleError::Topology(format!("cycle through {wire}")));
            }
            let hops = self.hops.get(&wire).ok_or_else(|| OracleError::MissingWire(wire.clone()))?;
            for h in hops {
                let mut s: Vec<(String, &'static str)> = steps.clone();
                s.push((wire.clone(), h.label));
                let mut f: Vec<Factor> = factors.clone();
                f.push(h.factor);
                match &h.to {
                    Node::Wire(next) => stack.push((next.clone(), s, f)),
                    terminal => out.push(History {
                        steps: s,
                        factors: f,
                        terminal: terminal.clone(),
                    }),
                }
            }
        }
        Ok(out)
    }
}

fn w(s: &str) -> Node {
    Node::Wire(s.to_string())
}

/// Pump distribution (from wire `pump`) and pair emission (from wires
/// `emit1`..`emit4`) of the four-ring source.
pub fn source_netlist(p: &SourceParams) -> Netlist {
    let mut n = Netlist::default();
    let (t, r) = (p.t, p.r);
    let x = |t| Factor::Cross { t, sign: 1.0 };
    let fwd = |length| Factor::Propagate { length, sign: 1.0 };
    n.hop("pump", "pump phase", w("split"), Factor::Phase(p.pump_phase));
    n.hop("split", "cross", w("block1"), x(t));
    n.hop("split", "through", w("block2 phase"), Factor::Through(r));
    n.hop("block2 phase", "phi", w("block2"), Factor::Phase(p.phi));
    n.hop("block1", "L1", w("block1 dc"), fwd(p.l1));
    n.hop("block2", "L1", w("block2 dc"), fwd(p.l1));
    n.hop("block1 dc", "cross", w("arm1"), x(t));
    n.hop("block1 dc", "through", w("arm2"), Factor::Through(r));
    n.hop("block2 dc", "through", w("arm3"), Factor::Through(r));
    n.hop("block2 dc", "cross", w("arm4"), x(t));
    n.hop("arm1", "phi1", w("arm1 L2"), Factor::Phase(p.phi1));
    n.hop("arm4", "phi2", w("arm4 L2"), Factor::Phase(p.phi2));
    n.hop("arm1 L2", "L2", Node::Ring(1), fwd(p.l2));
    n.hop("arm2", "L2", Node::Ring(2), fwd(p.l2));
    n.hop("arm3", "L2", Node::Ring(3), fwd(p.l2));
    n.hop("arm4 L2", "L2", Node::Ring(4), fwd(p.l2));
    // generated photons leave each ring through the block's output coupler
    for ring in 1..=4u8 {
        let dc = format!("out dc {ring}");
        n.hop(&format!("emit{ring}"), "L3", w(&dc), Factor::Propagate { length: p.l3, sign: -1.0 });
        let (own, other) = match ring {
            1 => (1, 2),
            2 => (2, 1),
            3 => (3, 4),
            _ => (4, 3),
        };
        n.hop(&dc, "through", Node::Out(Channel::Source(own)), Factor::Through(r));
        n.hop(&dc, "cross", Node::Out(Channel::Source(other)), x(t));
    }
    n
}

/// Detector fan-out, starting from wires `S1`..`S4`.
pub fn fanout_netlist(f: &FanoutParams) -> Netlist {
    let mut n = Netlist::default();
    let x = |t| Factor::Cross { t, sign: -1.0 };
    let back = |length| Factor::Propagate { length, sign: -1.0 };
    let d = |n, m| Channel::Detector { n, m };
    n.hop("S1", "L_T", Node::Out(Channel::Target), back(f.l_t));
    n.hop("S2", "through", w("to D2_0"), Factor::Through(f.r1));
    n.hop("S2", "cross", w("to D3_0"), x(f.t1));
    n.hop("S3", "through", w("to D1_1"), Factor::Through(f.r2));
    n.hop("S3", "cross", w("to D3_1"), x(f.t2));
    n.hop("S4", "through", w("to D1_0"), Factor::Through(f.r3));
    n.hop("S4", "cross", w("to D2_1"), x(f.t3));
    n.hop("to D2_0", "L_20", Node::Out(d(2, 0)), back(f.l_20));
    n.hop("to D3_0", "L_30", Node::Out(d(3, 0)), back(f.l_30));
    n.hop("to D1_1", "L_11", Node::Out(d(1, 1)), back(f.l_11));
    n.hop("to D3_1", "L_31", Node::Out(d(3, 1)), back(f.l_31));
    let s10 = match f.l10_sign {
        DelaySign::Plus => 1.0,
        DelaySign::Minus => -1.0,
    };
    n.hop("to D1_0", "L_10", Node::Out(d(1, 0)), Factor::Propagate { length: f.l_10, sign: s10 });
    n.hop("to D2_1", "L_21", Node::Out(d(2, 1)), back(f.l_21));
    n
}

fn out_channel(h: &History) -> OracleResult<Channel> {
    match h.terminal {
        Node::Out(c) => Ok(c),
        ref other => Err(OracleError::Topology(format!("history ends at {other:?}, expected an output port"))),
    }
}

/// Pair amplitudes recomputed from pump and emission histories.
pub fn enumerate_pair_amplitudes(params: &SourceParams, bwf: &BwfMatrix) -> OracleResult<PairAmplitudeTable> {
    let net = source_netlist(params);
    let pump = net.histories("pump")?;
    let mut emit = BTreeMap::new();
    for ring in 1..=4u8 {
        emit.insert(ring, net.histories(&format!("emit{ring}"))?);
    }
    let grid = *bwf.grid();
    let n = grid.n_bins;
    let mut raw: BTreeMap<(u8, u8), DMatrix<C64>> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            let (k1, k2) = (grid.k(i), grid.k(j));
            let kp = 0.5 * (k1 + k2);
            let mut acc: BTreeMap<(u8, u8), C64> = BTreeMap::new();
            for h1 in &pump {
                for h2 in &pump {
                    // both pump photons must meet in the same ring
                    let ring = match (&h1.terminal, &h2.terminal) {
                        (Node::Ring(a), Node::Ring(b)) if a == b => *a,
                        (Node::Ring(_), Node::Ring(_)) => continue,
                        other => return Err(OracleError::Topology(format!("pump ends at {other:?}"))),
                    };
                    let pumped = h1.amplitude(kp) * h2.amplitude(kp);
                    for g1 in &emit[&ring] {
                        for g2 in &emit[&ring] {
                            let (p, q) = match (out_channel(g1)?, out_channel(g2)?) {
                                (Channel::Source(p), Channel::Source(q)) => (p, q),
                                other => return Err(OracleError::Topology(format!("emission ends at {other:?}"))),
                            };
                            *acc.entry((p, q)).or_default() += pumped * g1.amplitude(k1) * g2.amplitude(k2);
                        }
                    }
                }
            }
            for ((p, q), a) in acc {
                if !OMEGA.contains(&(p, q)) && a.norm() > 1e-12 {
                    return Err(OracleError::Topology(format!("pair amplitude in ({p},{q}) outside the allowed set")));
                }
                raw.entry((p, q))
                    .or_insert_with(|| DMatrix::from_element(n, n, C64::new(0.0, 0.0)))[(i, j)] = a * bwf.value(i, j);
            }
        }
    }
    raw.retain(|k, _| OMEGA.contains(k));
    let wgt = grid.bin_width();
    let mut total = 0.0;
    for m in raw.values() {
        for v in m.iter() {
            total += v.norm_sqr() * wgt * wgt;
        }
    }
    let raw_norm = total.sqrt();
    if !(raw_norm > 0.0) {
        return Err(OracleError::ZeroNorm);
    }
    let entries = raw.into_iter().map(|(k, m)| (k, m.map(|v| v / raw_norm))).collect();
    Ok(PairAmplitudeTable { grid, entries, raw_norm })
}

/// The pair creation operator written directly on detector modes, by
/// pushing each photon of every pair amplitude through the fan-out
/// histories.
pub fn detector_pair_operator(table: &PairAmplitudeTable, fanout: &FanoutParams) -> OracleResult<OperatorPoly> {
    let net = fanout_netlist(fanout);
    let mut routes = BTreeMap::new();
    for p in 1..=4u8 {
        routes.insert(p, net.histories(&format!("S{p}"))?);
    }
    let grid = table.grid;
    let n = grid.n_bins;
    let universe = ModeUniverse::new(Channel::detector_ports(), n);
    let wgt = grid.bin_width();
    // one task per (pair site, k1 bin); the sum is order independent
    let sites: Vec<_> = table.entries.iter().flat_map(|(pq, m)| (0..n).map(move |i| (*pq, m, i))).collect();
    let chunks: Vec<OracleResult<Vec<(C64, CreationMonomial)>>> = sites
        .par_iter()
        .map(|&((p, q), m, i)| {
            let mut terms = Vec::new();
            for j in 0..n {
                let c = m[(i, j)] * FRAC_1_SQRT_2 * wgt;
                for h1 in &routes[&p] {
                    for h2 in &routes[&q] {
                        let a = ModeId::new(out_channel(h1)?, i);
                        let b = ModeId::new(out_channel(h2)?, j);
                        let amp = c * h1.amplitude(grid.k(i)) * h2.amplitude(grid.k(j));
                        terms.push((amp, CreationMonomial::from_factors([a, b])));
                    }
                }
            }
            Ok(terms)
        })
        .collect();
    let mut terms = Vec::new();
    for c in chunks {
        terms.extend(c?);
    }
    Ok(OperatorPoly::from_terms(&universe, terms)?)
}

/// Complex vector over every occupation pattern with at most
/// [`DENSE_MAX_PHOTONS`] photons.
#[derive(Clone, Debug)]
pub struct DenseKet {
    pub universe: ModeUniverse,
    pub modes: Vec<ModeId>,
    pub basis: Vec<Vec<u8>>,
    pub amps: Vec<C64>,
    index: HashMap<Vec<u8>, usize>,
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

impl DenseKet {
    fn empty(universe: &ModeUniverse) -> OracleResult<Self> {
        let channels = universe.channels().count();
        let bins = universe.n_bins();
        let modes = universe.modes();
        let m = modes.len() as u128;
        let dimension = binomial(m + DENSE_MAX_PHOTONS as u128, DENSE_MAX_PHOTONS as u128);
        if channels > MAX_DENSE_CHANNELS || bins > MAX_DENSE_BINS {
            return Err(OracleError::DimensionGuard {
                channels,
                bins,
                modes: modes.len(),
                dimension,
            });
        }
        let mut basis = Vec::with_capacity(dimension as usize);
        fn rec(slot: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if slot == cur.len() {
                out.push(cur.clone());
                return;
            }
            for n in 0..=left {
                cur[slot] = n as u8;
                rec(slot + 1, left - n, cur, out);
            }
            cur[slot] = 0;
        }
        rec(0, DENSE_MAX_PHOTONS, &mut vec![0u8; modes.len()], &mut basis);
        debug_assert_eq!(basis.len() as u128, dimension);
        let index = basis.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
        let amps = vec![C64::new(0.0, 0.0); basis.len()];
        Ok(Self {
            universe: universe.clone(),
            modes,
            basis,
            amps,
            index,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    fn occupation_of(&self, state: &FockBasisState) -> Option<Vec<u8>> {
        let mut occ = vec![0u8; self.modes.len()];
        for &(m, n) in state.occupations() {
            let slot = self.modes.iter().position(|x| *x == m)?;
            occ[slot] = u8::try_from(n).ok()?;
        }
        Some(occ)
    }

    /// Amplitude of a sparse basis state; zero outside the dense basis.
    pub fn amplitude_of(&self, state: &FockBasisState) -> C64 {
        self.occupation_of(state)
            .and_then(|o| self.index.get(&o))
            .map(|&i| self.amps[i])
            .unwrap_or_default()
    }

    pub fn basis_state(&self, i: usize) -> FockBasisState {
        FockBasisState::from_counts(
            self.basis[i]
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(s, &n)| (self.modes[s], u32::from(n))),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `op` with explicit `sqrt(n+1)` ladder factors; components
    /// above the photon cutoff are dropped.
    fn apply(&self, op: &OperatorPoly) -> Vec<C64> {
        let slots: HashMap<ModeId, usize> = self.modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            'terms: for (mono, c) in op.terms() {
                let mut occ = self.basis[i].clone();
                let mut ladder = 1.0;
                for &(mode, power) in mono.factors() {
                    let s = slots[&mode];
                    for _ in 0..power {
                        occ[s] += 1;
                        ladder *= f64::from(occ[s]).sqrt();
                    }
                }
                if occ.iter().map(|&n| n as usize).sum::<usize>() > DENSE_MAX_PHOTONS {
                    continue 'terms;
                }
                out[self.index[&occ]] += a * c * ladder;
            }
        }
        out
    }
}

/// Dense `C†|vac>` for a pair table left on the source channels.
pub fn dense_source_pair_state(table: &PairAmplitudeTable) -> OracleResult<DenseKet> {
    let grid = table.grid;
    let universe = ModeUniverse::new((1..=4).map(Channel::Source), grid.n_bins);
    let c = FRAC_1_SQRT_2 * grid.bin_width();
    let mut terms = Vec::new();
    for (&(p, q), m) in &table.entries {
        for i in 0..grid.n_bins {
            for j in 0..grid.n_bins {
                let modes = [ModeId::new(Channel::Source(p), i), ModeId::new(Channel::Source(q), j)];
                terms.push((m[(i, j)] * c, CreationMonomial::from_factors(modes)));
            }
        }
    }
    let op = OperatorPoly::from_terms(&universe, terms)?;
    let mut ket = DenseKet::empty(&universe)?;
    let zero = vec![0u8; ket.modes.len()];
    let v0 = ket.index[&zero];
    ket.amps[v0] = C64::new(1.0, 0.0);
    ket.amps = ket.apply(&op);
    Ok(ket)
}

/// Dense `(1 + beta C† + beta^2 (C†)^2 / 2)|vac>`.
pub fn dense_expand(op: &OperatorPoly, beta: C64) -> OracleResult<DenseKet> {
    let mut vac = DenseKet::empty(op.universe())?;
    let zero = vec![0u8; vac.modes.len()];
    let v0 = vac.index[&zero];
    vac.amps[v0] = C64::new(1.0, 0.0);
    let one = DenseKet {
        amps: vac.apply(op),
        ..vac.clone()
    };
    let two = one.apply(op);
    let amps = (0..vac.amps.len())
        .map(|i| vac.amps[i] + beta * one.amps[i] + 0.5 * beta * beta * two[i])
        .collect();
    Ok(DenseKet { amps, ..vac })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    /// Max component deviation after aligning the global phase.
    pub max_deviation: f64,
    /// Phase applied to the sparse ket.
    pub phase: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn compare(a: &KetVector, b: &DenseKet, tol: f64) -> CompareReport {
    let mut overlap = C64::new(0.0, 0.0);
    for (s, x) in a.amplitudes() {
        overlap += x.conj() * b.amplitude_of(s);
    }
    let phase = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let rot = C64::from_polar(1.0, phase);
    let mut worst = 0.0f64;
    let mut seen = 0usize;
    for (s, x) in a.amplitudes() {
        if b.occupation_of(s).is_some_and(|o| b.index.contains_key(&o)) {
            seen += 1;
        }
        worst = worst.max((x * rot - b.amplitude_of(s)).norm());
    }
    // dense components the sparse ket does not carry
    if seen < b.dimension() {
        for (i, y) in b.amps.iter().enumerate() {
            if y.norm() > worst && a.amplitude(&b.basis_state(i)) == C64::new(0.0, 0.0) {
                worst = y.norm();
            }
        }
    }
    CompareReport {
        max_deviation: worst,
        phase,
        tol,
        passed: worst < tol,
    }
}

/// Truncated detector-side ket computed entirely by the oracle.
pub fn oracle_truncated_ket(
    source: &SourceParams,
    fanout: &FanoutParams,
    bwf: &BwfMatrix,
    beta: C64,
) -> OracleResult<DenseKet> {
    let table = enumerate_pair_amplitudes(source, bwf)?;
    let op = detector_pair_operator(&table, fanout)?;
    dense_expand(&op, beta)
}

/// Threefold `D1 D2 D3` probability (T ignored) by direct scan of the
/// dense vector.
pub fn dense_threefold_probability(ket: &DenseKet) -> f64 {
    let mut p = 0.0;
    for (i, occ) in ket.basis.iter().enumerate() {
        let mut groups = [0u32; 3];
        let mut stray = false;
        for (s, &n) in occ.iter().enumerate() {
            match ket.modes[s].channel {
                Channel::Detector { n: d, .. } if (1..=3).contains(&d) => groups[d as usize - 1] += u32::from(n),
                Channel::Target => {}
                _ => stray |= n > 0,
            }
        }
        if !stray && groups == [1, 1, 1] {
            p += ket.amps[i].norm_sqr();
        }
    }
    p
}

/// A seeded random configuration for equivalence checks.
#[derive(Clone, Debug)]
pub struct OracleCase {
    pub seed: u64,
    pub source: SourceParams,
    pub fanout: FanoutParams,
    pub model: BwfModel,
    pub grid: KGrid,
    pub beta: C64,
}

impl OracleCase {
    /// Draws unbalanced couplers, generic phases and lengths, and either a
    /// single-bin or a two-bin correlated BWF.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coupler = |rng: &mut ChaCha8Rng| {
            let th: f64 = rng.gen_range(0.15..1.4);
            (th.sin(), th.cos())
        };
        let (t, r) = coupler(&mut rng);
        let source = SourceParams {
            t,
            r,
            phi: rng.gen_range(0.1..(2.0 * PI - 0.1)),
            phi1: rng.gen_range(0.0..2.0 * PI),
            phi2: rng.gen_range(0.0..2.0 * PI),
            l1: rng.gen_range(0.0..2.0),
            l2: rng.gen_range(0.0..2.0),
            l3: rng.gen_range(0.0..2.0),
            pump_phase: rng.gen_range(0.0..2.0 * PI),
        };
        let (t1, r1) = coupler(&mut rng);
        let (t2, r2) = coupler(&mut rng);
        let (t3, r3) = coupler(&mut rng);
        let mut len = || rng.gen_range(0.0..3.0);
        let fanout = FanoutParams {
            t1,
            r1,
            t2,
            r2,
            t3,
            r3,
            l_t: len(),
            l_10: len(),
            l_11: len(),
            l_20: len(),
            l_21: len(),
            l_30: len(),
            l_31: len(),
            l10_sign: DelaySign::Minus,
        };
        let k0 = rng.gen_range(-1.5..1.5);
        let (model, grid) = if seed.is_multiple_of(2) {
            (BwfModel::SingleBin, KGrid::single(k0))
        } else {
            let dk = rng.gen_range(0.2..0.6);
            let sigma_s = rng.gen_range(0.3..1.0);
            let sigma_a = rng.gen_range(0.3..1.0);
            (BwfModel::CorrelatedGaussian { sigma_s, sigma_a }, KGrid { k0, dk, n_bins: 2 })
        };
        let beta = C64::from_polar(rng.gen_range(0.05..0.4), rng.gen_range(0.0..2.0 * PI));
        Self {
            seed,
            source,
            fanout,
            model,
            grid,
            beta,
        }
    }

    pub fn bwf(&self) -> BwfMatrix {
        discretize(&self.model, &self.grid).expect("valid random model").0
    }
}
