use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use pathghz::circuit::FanoutParams;
use pathghz::oracle::{compare, dense_threefold_probability, enumerate_pair_amplitudes, oracle_truncated_ket, OracleCase};
use pathghz::pipeline::{BetaSpec, DetectionPattern, DetectorMode, PipelineRun};
use pathghz::source::{pair_amplitudes, SourceParams};
use pathghz::spectral::{discretize, BwfModel, KGrid, PsiVariant};

#[test]
fn random_cases_match_dense_expansion() {
    for seed in 0..8 {
        let case = OracleCase::random(seed);
        let bwf = case.bwf();
        let run = PipelineRun::evaluate(&case.source, &case.fanout, &bwf, BetaSpec::Source(case.beta), PsiVariant::Direct).unwrap();
        let dense = oracle_truncated_ket(&case.source, &case.fanout, &bwf, case.beta).unwrap();
        let report = compare(&run.truncated, &dense, 1e-10);
        assert!(report.passed, "seed {seed}: deviation {}", report.max_deviation);

        let sel = run.postselect(&DetectionPattern::threefold_without_target(DetectorMode::NumberResolving));
        let p = dense_threefold_probability(&dense);
        assert!((sel.probability - p).abs() < 1e-12, "seed {seed}: {} vs {p}", sel.probability);
    }
}

#[test]
fn pair_tables_agree_entrywise() {
    for seed in 0..6 {
        let case = OracleCase::random(seed);
        let bwf = case.bwf();
        let a = pair_amplitudes(&case.source, &bwf, PsiVariant::Direct).unwrap();
        let b = enumerate_pair_amplitudes(&case.source, &bwf).unwrap();
        assert!(a.max_deviation(&b) < 1e-12, "seed {seed}");
        assert!((a.raw_norm - b.raw_norm).abs() < 1e-12);
    }
}

#[test]
fn coupler_edges_agree() {
    let bwf = discretize(&BwfModel::SingleBin, &KGrid::single(0.4)).unwrap().0;
    for (t, r) in [(0.0, 1.0), (1.0, 0.0)] {
        let src = SourceParams { t, r, ..SourceParams::balanced(PI / 3.0) };
        let a = pair_amplitudes(&src, &bwf, PsiVariant::Direct).unwrap();
        let b = enumerate_pair_amplitudes(&src, &bwf).unwrap();
        assert!(a.max_deviation(&b) < 1e-12, "t={t}");
        let beta = C64::new(0.1, 0.0);
        let fan = FanoutParams::balanced();
        let run = PipelineRun::evaluate(&src, &fan, &bwf, BetaSpec::Source(beta), PsiVariant::Direct).unwrap();
        let dense = oracle_truncated_ket(&src, &fan, &bwf, beta).unwrap();
        assert!(compare(&run.truncated, &dense, 1e-10).passed);
    }
}

#[test]
fn zero_beta_is_vacuum_only() {
    let case = OracleCase::random(3);
    let dense = oracle_truncated_ket(&case.source, &case.fanout, &case.bwf(), C64::new(0.0, 0.0)).unwrap();
    assert!((dense.norm_sqr() - 1.0).abs() < 1e-15);
    assert_eq!(dense_threefold_probability(&dense), 0.0);
}

#[test]
fn bell_fidelity_follows_cos_squared_phi() {
    use pathghz::fock::inner;
    use pathghz::oracle::dense_source_pair_state;
    use pathghz::source::{psi_minus, two_photon_state};

    let bwf = discretize(&BwfModel::SingleBin, &KGrid::single(0.0)).unwrap().0;
    let target = psi_minus();
    let mut fids = Vec::new();
    for step in 0..=8 {
        let phi = step as f64 * PI / 4.0;
        let src = SourceParams::balanced(phi);
        let two = two_photon_state(&src, &bwf, PsiVariant::Direct).unwrap();
        let f = inner(&target, &two).unwrap().norm_sqr();
        let dense = dense_source_pair_state(&enumerate_pair_amplitudes(&src, &bwf).unwrap()).unwrap();
        let overlap: C64 = target.amplitudes().map(|(s, a)| a.conj() * dense.amplitude_of(s)).sum();
        assert!((f - overlap.norm_sqr()).abs() < 1e-12, "phi = {phi}");
        // both pump photons pick up the block phase, so the period is pi
        assert!((f - phi.cos().powi(2)).abs() < 1e-12, "phi = {phi}: {f}");
        fids.push(f);
    }
    // non-decreasing from pi/2 up to pi
    assert!(fids[2..=4].windows(2).all(|w| w[0] <= w[1] + 1e-15));
}

#[test]
fn ghz_fidelity_does_not_depend_on_block_phase() {
    use pathghz::pipeline::{ghz_analyze, GhzContext};

    let bwf = discretize(&BwfModel::SingleBin, &KGrid::single(0.7)).unwrap().0;
    let fan = FanoutParams::balanced();
    let ctx = GhzContext { grid: KGrid::single(0.7), fanout: fan };
    for step in 0..=4 {
        let phi = PI / 2.0 + step as f64 * PI / 8.0;
        let run = PipelineRun::evaluate(&SourceParams::balanced(phi), &fan, &bwf, BetaSpec::Source(C64::new(0.3, 0.0)), PsiVariant::Direct)
            .unwrap();
        let sel = run.postselect(&DetectionPattern::fourfold(DetectorMode::NumberResolving));
        let dense = oracle_truncated_ket(&SourceParams::balanced(phi), &fan, &bwf, run.beta).unwrap();
        assert!(compare(&run.truncated, &dense, 1e-10).passed);
        let rep = ghz_analyze(&sel, &ctx).unwrap();
        assert!((rep.fidelity - 1.0).abs() < 1e-10, "phi = {phi}");
    }
}
