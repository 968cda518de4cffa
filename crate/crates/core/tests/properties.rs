use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use pathghz::circuit::{
    build_fanout, circuit_map, fanout_input_universe, heisenberg_rewrite, ComponentKind, CouplerConvention, FanoutParams,
};
use pathghz::fock::{apply, Channel, CreationMonomial, KetVector, ModeId, ModeUniverse, OperatorPoly};
use pathghz::pipeline::{
    expand_output, ghz_analyze, outcome_distribution, BetaSpec, DetectionPattern, DetectorMode, GhzContext, PipelineRun,
};
use pathghz::source::{pair_amplitudes, pair_creation_operator, SourceParams};
use pathghz::spectral::{discretize, BwfModel, KGrid, PsiVariant};
use proptest::prelude::*;

fn universe() -> ModeUniverse {
    ModeUniverse::new(Channel::source_channels(), 2)
}

fn mode() -> impl Strategy<Value = ModeId> {
    (1u8..=4, 0usize..2).prop_map(|(c, k)| ModeId::new(Channel::Source(c), k))
}

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

fn poly(max_degree: usize) -> impl Strategy<Value = OperatorPoly> {
    prop::collection::vec((coeff(), prop::collection::vec(mode(), 0..=max_degree)), 0..5).prop_map(|terms| {
        OperatorPoly::from_terms(
            &universe(),
            terms.into_iter().map(|(c, ms)| (c, CreationMonomial::from_factors(ms))),
        )
        .unwrap()
    })
}

fn coupler() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..PI / 2.0).prop_map(|th| (th.sin(), th.cos()))
}

fn source() -> impl Strategy<Value = SourceParams> {
    (coupler(), 0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64).prop_map(
        |((t, r), phi, phi1, phi2, l1, l2, l3)| SourceParams {
            t,
            r,
            phi,
            phi1,
            phi2,
            l1,
            l2,
            l3,
            pump_phase: 0.0,
        },
    )
}

fn fanout() -> impl Strategy<Value = FanoutParams> {
    (coupler(), coupler(), coupler(), prop::array::uniform7(0.0..3.0f64)).prop_map(|((t1, r1), (t2, r2), (t3, r3), l)| {
        FanoutParams {
            t1,
            r1,
            t2,
            r2,
            t3,
            r3,
            l_t: l[0],
            l_10: l[1],
            l_11: l[2],
            l_20: l[3],
            l_21: l[4],
            l_30: l[5],
            l_31: l[6],
            ..FanoutParams::balanced()
        }
    })
}

fn grid() -> KGrid {
    KGrid {
        k0: 1.1,
        dk: 0.5,
        n_bins: 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simplify_is_idempotent(p in poly(3)) {
        let once = p.clone().simplify();
        prop_assert_eq!(once.clone().simplify(), once);
    }

    #[test]
    fn factor_order_does_not_matter(ms in prop::collection::vec(mode(), 0..6), rot in 0usize..6) {
        let mut shuffled = ms.clone();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        prop_assert_eq!(CreationMonomial::from_factors(ms), CreationMonomial::from_factors(shuffled));
    }

    #[test]
    fn products_commute(a in poly(2), b in poly(2)) {
        let ab = a.try_mul(&b).unwrap();
        let ba = b.try_mul(&a).unwrap();
        prop_assert!(ab.max_deviation(&ba) < 1e-12);
    }

    #[test]
    fn rewrite_is_linear_and_multiplicative(a in poly(2), b in poly(2), f in fanout()) {
        let map = build_fanout(&f, &grid()).unwrap();
        let sum = heisenberg_rewrite(&a.try_add(&b).unwrap(), &map).unwrap();
        let parts = heisenberg_rewrite(&a, &map).unwrap().try_add(&heisenberg_rewrite(&b, &map).unwrap()).unwrap();
        prop_assert!(sum.max_deviation(&parts) < 1e-12);
        let prod = heisenberg_rewrite(&a.try_mul(&b).unwrap(), &map).unwrap();
        let each = heisenberg_rewrite(&a, &map).unwrap().try_mul(&heisenberg_rewrite(&b, &map).unwrap()).unwrap();
        prop_assert!(prod.max_deviation(&each) < 1e-12);
    }

    #[test]
    fn pair_states_have_fixed_photon_number(s in source(), f in fanout()) {
        let bwf = discretize(&BwfModel::CorrelatedGaussian { sigma_s: 0.4, sigma_a: 0.9 }, &grid()).unwrap().0;
        let run = PipelineRun::evaluate(&s, &f, &bwf, BetaSpec::Ring(C64::new(0.2, 0.0)), PsiVariant::Direct).unwrap();
        prop_assert!(run.expansion.two_photon.amplitudes().all(|(b, _)| b.photon_number() == 2));
        prop_assert!(run.expansion.four_photon.amplitudes().all(|(b, _)| b.photon_number() == 4));
        prop_assert!((run.expansion.two_photon.norm() - 1.0).abs() < 1e-10);
        prop_assert!((run.table.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coupler_sign_convention_leaves_probabilities(s in source(), f in fanout()) {
        let g = grid();
        let bwf = discretize(&BwfModel::SeparableGaussian { sigma: 0.6 }, &g).unwrap().0;
        let c = pair_creation_operator(&pair_amplitudes(&s, &bwf, PsiVariant::Direct).unwrap()).unwrap();
        let flipped: Vec<_> = f
            .components()
            .into_iter()
            .map(|mut spec| {
                if let ComponentKind::DirectionalCoupler { convention, .. } = &mut spec.kind {
                    *convention = CouplerConvention::Source;
                }
                spec
            })
            .collect();
        let other = circuit_map(&flipped, &fanout_input_universe(g.n_bins), &g)
            .unwrap()
            .restrict_inputs(&Channel::source_channels());
        let a = expand_output(&heisenberg_rewrite(&c, &build_fanout(&f, &g).unwrap()).unwrap(), C64::new(0.3, 0.0)).unwrap();
        let b = expand_output(&heisenberg_rewrite(&c, &other).unwrap(), C64::new(0.3, 0.0)).unwrap();
        for (ka, kb) in [(&a.two_photon, &b.two_photon), (&a.four_photon, &b.four_photon)] {
            let (da, db) = (outcome_distribution(ka), outcome_distribution(kb));
            prop_assert_eq!(da.len(), db.len());
            for (k, p) in &da {
                prop_assert!((p - db[k]).abs() < 1e-12);
            }
            for (s, x) in ka.amplitudes() {
                prop_assert!((x.norm() - kb.amplitude(s).norm()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn psi_variant_does_not_change_single_mode_ghz() {
    let f = FanoutParams {
        l_11: 0.4,
        l_30: 1.3,
        ..FanoutParams::balanced()
    };
    let s = SourceParams {
        l1: 0.7,
        l2: 0.2,
        l3: 0.5,
        ..SourceParams::balanced(PI)
    };
    let g = KGrid::single(1.9);
    let bwf = discretize(&BwfModel::SingleBin, &g).unwrap().0;
    let ctx = GhzContext { grid: g, fanout: f };
    let report = |v| {
        let run = PipelineRun::evaluate(&s, &f, &bwf, BetaSpec::Source(C64::new(0.3, 0.0)), v).unwrap();
        ghz_analyze(&run.postselect(&DetectionPattern::fourfold(DetectorMode::NumberResolving)), &ctx).unwrap()
    };
    let (a, b) = (report(PsiVariant::Direct), report(PsiVariant::Paper));
    assert!((a.fidelity - b.fidelity).abs() < 1e-12);
    assert!((a.probability - b.probability).abs() < 1e-15);
    assert!((a.theta_measured.unwrap() - b.theta_measured.unwrap()).abs() < 1e-12);
    assert!((a.fidelity - 1.0).abs() < 1e-10);
}

#[test]
fn multi_bin_pair_state_is_unit_norm() {
    // bin operators must carry one power of the bin width
    for n in [1, 2, 5] {
        let g = KGrid { k0: 0.0, dk: 0.37, n_bins: n };
        let bwf = discretize(&BwfModel::SeparableGaussian { sigma: 0.5 }, &g).unwrap().0;
        let c = pair_creation_operator(&pair_amplitudes(&SourceParams::balanced(PI), &bwf, PsiVariant::Direct).unwrap()).unwrap();
        let two = apply(&c, &KetVector::vacuum(c.universe())).unwrap();
        assert!((two.norm() - 1.0).abs() < 1e-12, "n = {n}: {}", two.norm());
    }
}
