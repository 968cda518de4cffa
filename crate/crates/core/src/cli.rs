//! Batch front-end: config loading, scenario runs and CSV emission.
//!
//! Every CSV starts with a `# config-digest: sha256:<hex>` line followed by
//! a header row. Column meanings are listed in `docs/csv_schema.md`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{build_fanout_full, check_unitary, FanoutParams, UNITARY_TOL};
use crate::fock::{inner, Channel, KetVector};
use crate::oracle::{compare, oracle_truncated_ket, OracleCase, OracleError};
use crate::pipeline::{
    all_exact_patterns, generation_rate, ghz_analyze, remainder_violations, BetaSpec, DetectionPattern, DetectorMode,
    GhzContext, GhzReport, PipelineError, PipelineRun,
};
use crate::source::{pair_amplitudes, psi_minus, two_photon_state, PairAmplitudeTable, SourceParams};
use crate::spectral::{discretize, schmidt, BwfMatrix, BwfModel, KGrid, PsiVariant, SpectralWarning};

/// Tolerance of the pipeline vs oracle comparison.
pub const ORACLE_TOL: f64 = 1e-10;
/// Tolerance of the norm and conservation checks.
pub const CHECK_TOL: f64 = 1e-10;
/// Random configurations drawn by `oracle-check`.
pub const ORACLE_CASES: u64 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Bell,
    Ghz,
    Rate,
    Schmidt,
    OracleCheck,
    Sweep,
}

/// Pair amplitude as a real number, `{ re, im }`, or `{ abs2, phase }`.
#[derive(Copy, Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BetaInput {
    Real(f64),
    Cartesian {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Polar {
        abs2: f64,
        #[serde(default, deserialize_with = "crate::angle::deserialize")]
        phase: f64,
    },
}

impl BetaInput {
    pub fn value(self) -> C64 {
        match self {
            BetaInput::Real(x) => C64::new(x, 0.0),
            BetaInput::Cartesian { re, im } => C64::new(re, im),
            BetaInput::Polar { abs2, phase } => C64::from_polar(abs2.sqrt(), phase),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Dotted key path into the config, e.g. `fanout.l_10`.
    pub parameter: String,
    pub values: Vec<toml::Value>,
}

fn default_rep_rate() -> f64 {
    1e6
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceParams,
    pub fanout: FanoutParams,
    pub grid: KGrid,
    pub bwf: BwfModel,
    #[serde(default)]
    pub beta: Option<BetaInput>,
    #[serde(default)]
    pub beta_ring: Option<BetaInput>,
    /// Pump repetition rate in Hz.
    #[serde(default = "default_rep_rate")]
    pub rep_rate: f64,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub psi_variant: PsiVariant,
    #[serde(default)]
    pub detector_mode: DetectorMode,
}

impl RunConfig {
    pub fn beta_spec(&self) -> BetaSpec {
        match (self.beta, self.beta_ring) {
            (Some(b), _) => BetaSpec::Source(b.value()),
            (None, Some(b)) => BetaSpec::Ring(b.value()),
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let v = |path: &str, e: &dyn std::fmt::Display| CliError::Validation(format!("{path}: {e}"));
        self.source.validate().map_err(|e| v("source", &e))?;
        self.fanout.validate().map_err(|e| v("fanout", &e))?;
        self.grid.validate().map_err(|e| v("grid", &e))?;
        self.bwf.validate().map_err(|e| v("bwf", &e))?;
        let beta = match (self.beta, self.beta_ring) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(CliError::Validation("exactly one of `beta` and `beta_ring` must be given".into()))
            }
            (Some(b), None) => ("beta", b),
            (None, Some(b)) => ("beta_ring", b),
        };
        if let BetaInput::Polar { abs2, .. } = beta.1 {
            if !(abs2 >= 0.0) {
                return Err(v(&format!("{}.abs2", beta.0), &"must be >= 0"));
            }
        }
        if !beta.1.value().is_finite() {
            return Err(v(beta.0, &"must be finite"));
        }
        if !(self.rep_rate > 0.0 && self.rep_rate.is_finite()) {
            return Err(v("rep_rate", &"must be a positive number of Hz"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(v("sweep.values", &"must not be empty"));
            }
            if s.parameter.starts_with("sweep") {
                return Err(v("sweep.parameter", &"cannot sweep the sweep itself"));
            }
        }
        Ok(())
    }

    pub fn discretize(&self) -> CliResult<(BwfMatrix, Vec<SpectralWarning>)> {
        discretize(&self.bwf, &self.grid).map_err(|e| CliError::Validation(format!("bwf: {e}")))
    }
}

/// A parsed config together with its raw tree (for sweeps) and digest.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub raw: toml::Table,
    /// Hex sha256 of the config text.
    pub digest: String,
}

fn parse_table(raw: &toml::Table) -> CliResult<RunConfig> {
    let de = toml::Value::Table(raw.clone());
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("{path}: {}", e.inner()))
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config_str(text: &str) -> CliResult<LoadedConfig> {
    let raw: toml::Table = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
    let config = parse_table(&raw)?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let loaded = LoadedConfig { config, raw, digest };
    if let Some(s) = &loaded.config.sweep {
        loaded.with_value(&s.parameter, &s.values[0])?;
    }
    Ok(loaded)
}

pub fn load_config(path: &Path) -> CliResult<LoadedConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    load_config_str(&text)
}

impl LoadedConfig {
    /// The config with the value at dotted `path` replaced.
    pub fn with_value(&self, path: &str, value: &toml::Value) -> CliResult<RunConfig> {
        let mut raw = self.raw.clone();
        let keys: Vec<&str> = path.split('.').collect();
        let (last, parents) = keys.split_last().expect("split yields one item");
        let mut table = &mut raw;
        for (depth, key) in parents.iter().enumerate() {
            table = match table.get_mut(*key) {
                Some(toml::Value::Table(t)) => t,
                _ => {
                    return Err(CliError::Validation(format!(
                        "sweep.parameter: no table `{}` in config",
                        keys[..=depth].join(".")
                    )))
                }
            };
        }
        table.insert(last.to_string(), value.clone());
        let mut cfg = parse_table(&raw).map_err(|e| CliError::Validation(format!("sweep point {path} = {value}: {e}")))?;
        cfg.sweep = None;
        Ok(cfg)
    }
}

/// A named invariant evaluated during a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            passed: value <= tol,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

struct CsvOut<'a> {
    dir: &'a Path,
    digest: &'a str,
    files: Vec<PathBuf>,
}

impl CsvOut<'_> {
    fn write(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut buf = format!("# config-digest: sha256:{}\n", self.digest).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        fs::write(&path, buf)?;
        self.files.push(path);
        Ok(())
    }
}

fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn pair_table_rows(t: &PairAmplitudeTable) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (&(p, q), m) in &t.entries {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                rows.push(vec![i.to_string(), j.to_string(), p.to_string(), q.to_string(), num(v.re), num(v.im)]);
            }
        }
    }
    rows
}

const PAIR_TABLE_HEADER: [&str; 6] = ["k1_index", "k2_index", "p", "q", "re", "im"];

fn ket_rows(k: &KetVector) -> Vec<Vec<String>> {
    k.amplitudes()
        .map(|(s, a)| vec![s.to_string(), s.photon_number().to_string(), num(a.re), num(a.im)])
        .collect()
}

const KET_HEADER: [&str; 4] = ["state", "photons", "re", "im"];

fn warn_strings(ws: &[SpectralWarning], cfg: &RunConfig) -> Vec<String> {
    let src = &cfg.source;
    let mut out: Vec<String> = ws.iter().map(|w| w.to_string()).chain(src.closed_form_warnings()).collect();
    let path = src.l1 + src.l2 - src.l3;
    if cfg.psi_variant == PsiVariant::Paper && path != 0.0 {
        out.push(format!(
            "psi_variant = paper adds exp(i (k1 + k2) {path}) per pair on top of the direct path phase"
        ));
    }
    out
}

type GhzRow = (GhzReport, Vec<Check>, Vec<String>);

/// GHZ analysis of one config plus its invariant checks.
struct GhzPoint {
    run: PipelineRun,
    report: GhzReport,
    checks: Vec<Check>,
    warnings: Vec<String>,
}

fn fanout_unitarity(f: &FanoutParams, grid: &KGrid) -> CliResult<Check> {
    let full = build_fanout_full(f, grid).map_err(|e| CliError::Numerical(e.to_string()))?;
    let worst = (0..grid.n_bins).map(|b| check_unitary(&full, b).worst_deviation).fold(0.0, f64::max);
    Ok(Check::at_most("fanout_unitarity", worst, UNITARY_TOL))
}

fn ghz_point(cfg: &RunConfig) -> CliResult<GhzPoint> {
    let (bwf, _) = cfg.discretize()?;
    let run = PipelineRun::evaluate(&cfg.source, &cfg.fanout, &bwf, cfg.beta_spec(), cfg.psi_variant)?;
    let sel = run.postselect(&DetectionPattern::fourfold(cfg.detector_mode));
    let ctx = GhzContext {
        grid: cfg.grid,
        fanout: cfg.fanout,
    };
    let report = ghz_analyze(&sel, &ctx)?;
    let mut checks = vec![
        Check::at_most("pair_table_norm", (run.table.norm_sqr() - 1.0).abs(), CHECK_TOL),
        fanout_unitarity(&cfg.fanout, &cfg.grid)?,
    ];
    let total: f64 = all_exact_patterns(&Channel::detector_ports(), 4)
        .iter()
        .map(|p| run.postselect(p).probability)
        .sum();
    checks.push(Check::at_most(
        "probability_conservation",
        (total - run.truncated.norm_sqr()).abs(),
        CHECK_TOL,
    ));
    let stray = remainder_violations(&run.expansion.four_photon, cfg.detector_mode).len();
    let mut warnings = Vec::new();
    if cfg.source.closed_form_warnings().is_empty() {
        checks.push(Check::at_most("remainder_fourfold_violations", stray as f64, 0.0));
    } else if stray > 0 {
        // off-cross pairs are allowed away from the balanced point
        warnings.push(format!("{stray} non-GHZ four-photon components pass the fourfold criterion"));
    }
    Ok(GhzPoint { run, report, checks, warnings })
}

const GHZ_HEADER: [&str; 8] = [
    "probability",
    "theta_measured",
    "theta_formula",
    "theta_deviation",
    "fidelity",
    "gamma",
    "extra_weight",
    "branches",
];

fn ghz_row(r: &GhzReport) -> Vec<String> {
    vec![
        num(r.probability),
        opt(r.theta_measured),
        num(r.theta_formula),
        num(r.theta_deviation),
        num(r.fidelity),
        num(r.gamma),
        num(r.extra_weight),
        r.branches.len().to_string(),
    ]
}

fn bell(cfg: &RunConfig, out: &mut CsvOut, outcome: &mut Outcome) -> CliResult<()> {
    if cfg.grid.n_bins != 1 {
        return Err(CliError::Validation("grid.n_bins: the bell scenario needs a single-bin grid".into()));
    }
    let (bwf, ws) = cfg.discretize()?;
    outcome.warnings.extend(warn_strings(&ws, cfg));
    let num_err = |e: &dyn std::fmt::Display| CliError::Numerical(e.to_string());
    let table = pair_amplitudes(&cfg.source, &bwf, cfg.psi_variant).map_err(|e| num_err(&e))?;
    let two = two_photon_state(&cfg.source, &bwf, cfg.psi_variant).map_err(|e| num_err(&e))?;
    let fidelity = inner(&psi_minus(), &two).map_err(|e| num_err(&e))?.norm_sqr();
    out.write("pair_table.csv", &PAIR_TABLE_HEADER, &pair_table_rows(&table))?;
    out.write("two_photon_ket.csv", &KET_HEADER, &ket_rows(&two))?;
    out.write(
        "bell.csv",
        &["phi", "fidelity", "raw_norm", "beta_ratio"],
        &[vec![num(cfg.source.phi), num(fidelity), num(table.raw_norm), num(table.raw_norm * table.raw_norm)]],
    )?;
    outcome.checks.push(Check::at_most("two_photon_norm", (two.norm() - 1.0).abs(), CHECK_TOL));
    Ok(())
}

fn ghz(cfg: &RunConfig, out: &mut CsvOut, outcome: &mut Outcome) -> CliResult<()> {
    let (_, ws) = cfg.discretize()?;
    outcome.warnings.extend(warn_strings(&ws, cfg));
    let p = ghz_point(cfg)?;
    out.write("pair_table.csv", &PAIR_TABLE_HEADER, &pair_table_rows(&p.run.table))?;
    out.write("ghz.csv", &GHZ_HEADER, &[ghz_row(&p.report)])?;
    let branch_rows: Vec<Vec<String>> = p
        .report
        .branches
        .iter()
        .map(|b| {
            let (kt, k1, k2, k2p) = b.key;
            vec![
                kt.to_string(),
                k1.to_string(),
                k2.to_string(),
                k2p.to_string(),
                num(b.weight),
                num(b.a110.re),
                num(b.a110.im),
                num(b.a001.re),
                num(b.a001.im),
                opt(b.theta_measured),
                num(b.theta_formula),
                num(b.fidelity),
            ]
        })
        .collect();
    out.write(
        "ghz_branches.csv",
        &[
            "t_bin", "k1_bin", "k2_bin", "k2p_bin", "weight", "a110_re", "a110_im", "a001_re", "a001_im",
            "theta_measured", "theta_formula", "fidelity",
        ],
        &branch_rows,
    )?;
    out.write("conditional_ket.csv", &KET_HEADER, &ket_rows(&p.report.conditional))?;
    outcome.checks.extend(p.checks);
    outcome.warnings.extend(p.warnings);
    Ok(())
}

fn rate(cfg: &RunConfig, out: &mut CsvOut, outcome: &mut Outcome) -> CliResult<()> {
    let (_, ws) = cfg.discretize()?;
    outcome.warnings.extend(warn_strings(&ws, cfg));
    let p = ghz_point(cfg)?;
    let est = generation_rate(p.run.beta, cfg.rep_rate);
    if est.high_beta {
        outcome
            .warnings
            .push(format!("|beta|^2 = {} is large; multi-pair terms beyond fourth order are not modelled", p.run.beta.norm_sqr()));
    }
    out.write(
        "rate.csv",
        &["beta_abs2", "rep_rate_hz", "fourfold_probability", "rate_hz", "simulated_fourfold_probability", "simulated_rate_hz", "high_beta"],
        &[vec![
            num(p.run.beta.norm_sqr()),
            num(cfg.rep_rate),
            num(est.fourfold_probability),
            num(est.rate_hz),
            num(p.report.probability),
            num(p.report.probability * cfg.rep_rate),
            est.high_beta.to_string(),
        ]],
    )?;
    outcome.checks.extend(p.checks);
    outcome.warnings.extend(p.warnings);
    Ok(())
}

/// Purity implied by the Gaussian model parameters.
pub fn closed_form_purity(model: &BwfModel) -> Option<f64> {
    match *model {
        BwfModel::SingleBin | BwfModel::SeparableGaussian { .. } => Some(1.0),
        BwfModel::CorrelatedGaussian { sigma_s, sigma_a } => Some(2.0 * sigma_s * sigma_a / (sigma_s.powi(2) + sigma_a.powi(2))),
    }
}

fn schmidt_scenario(cfg: &RunConfig, out: &mut CsvOut, outcome: &mut Outcome) -> CliResult<()> {
    let (bwf, ws) = cfg.discretize()?;
    outcome.warnings.extend(ws.iter().map(|w| w.to_string()));
    let g = bwf.grid();
    let mut rows = Vec::new();
    for i in 0..g.n_bins {
        for j in 0..g.n_bins {
            let v = bwf.value(i, j);
            rows.push(vec![i.to_string(), j.to_string(), num(g.k(i)), num(g.k(j)), num(v.re), num(v.im)]);
        }
    }
    out.write("bwf.csv", &["k1_index", "k2_index", "k1", "k2", "re", "im"], &rows)?;
    let rep = schmidt(&bwf);
    let rows: Vec<Vec<String>> = rep.coefficients.iter().enumerate().map(|(i, c)| vec![i.to_string(), num(*c)]).collect();
    out.write("schmidt.csv", &["index", "coefficient"], &rows)?;
    out.write(
        "schmidt_summary.csv",
        &["purity", "schmidt_number", "closed_form_purity"],
        &[vec![num(rep.purity), num(rep.schmidt_number()), opt(closed_form_purity(&cfg.bwf))]],
    )?;
    outcome.checks.push(Check::at_most("bwf_norm", (bwf.norm_sqr() - 1.0).abs(), CHECK_TOL));
    Ok(())
}

struct OracleRow {
    label: String,
    seed: Option<u64>,
    n_bins: usize,
    deviation: f64,
    phase: f64,
    passed: bool,
}

fn oracle_row(
    label: String,
    seed: Option<u64>,
    source: &SourceParams,
    fanout: &FanoutParams,
    bwf: &BwfMatrix,
    beta: BetaSpec,
) -> CliResult<OracleRow> {
    // the oracle always runs the direct phase bookkeeping
    let run = PipelineRun::evaluate(source, fanout, bwf, beta, PsiVariant::Direct)?;
    let dense = oracle_truncated_ket(source, fanout, bwf, run.beta).map_err(|e| match e {
        OracleError::DimensionGuard { .. } => CliError::Validation(format!("{label}: {e}")),
        other => CliError::Numerical(format!("{label}: {other}")),
    })?;
    let rep = compare(&run.truncated, &dense, ORACLE_TOL);
    Ok(OracleRow {
        label,
        seed,
        n_bins: bwf.grid().n_bins,
        deviation: rep.max_deviation,
        phase: rep.phase,
        passed: rep.passed,
    })
}

fn oracle_check(cfg: &RunConfig, seed: u64, out: &mut CsvOut, outcome: &mut Outcome) -> CliResult<()> {
    let (bwf, _) = cfg.discretize()?;
    let base = oracle_row("config".into(), None, &cfg.source, &cfg.fanout, &bwf, cfg.beta_spec())?;
    let random: Vec<CliResult<OracleRow>> = (0..ORACLE_CASES)
        .into_par_iter()
        .map(|i| {
            let case = OracleCase::random(seed.wrapping_add(i));
            let b = case.bwf();
            oracle_row(format!("random-{i}"), Some(case.seed), &case.source, &case.fanout, &b, BetaSpec::Source(case.beta))
        })
        .collect();
    let mut rows = vec![base];
    for r in random {
        rows.push(r?);
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.n_bins.to_string(),
                num(r.deviation),
                num(r.phase),
                num(ORACLE_TOL),
                r.passed.to_string(),
            ]
        })
        .collect();
    out.write("oracle.csv", &["case", "seed", "n_bins", "max_deviation", "phase", "tol", "passed"], &csv_rows)?;
    for r in rows {
        outcome.checks.push(Check::at_most(format!("oracle_equivalence[{}]", r.label), r.deviation, ORACLE_TOL));
    }
    Ok(())
}

fn sweep(loaded: &LoadedConfig, out: &mut CsvOut, outcome: &mut Outcome) -> CliResult<()> {
    let Some(s) = &loaded.config.sweep else {
        return Err(CliError::Validation("sweep: the sweep scenario needs a [sweep] table".into()));
    };
    let points: Vec<CliResult<GhzRow>> = s
        .values
        .par_iter()
        .map(|v| {
            let cfg = loaded.with_value(&s.parameter, v)?;
            let p = ghz_point(&cfg)?;
            Ok((p.report, p.checks, p.warnings))
        })
        .collect();
    let mut rows = Vec::with_capacity(points.len());
    for (v, p) in s.values.iter().zip(points) {
        let (report, checks, warnings) = p?;
        outcome.warnings.extend(warnings.into_iter().map(|w| format!("{}={v}: {w}", s.parameter)));
        let shown = match v {
            toml::Value::String(x) => x.clone(),
            other => other.to_string(),
        };
        let mut row = vec![shown];
        row.extend(ghz_row(&report));
        rows.push(row);
        for c in checks {
            outcome.checks.push(Check { name: format!("{}[{}={v}]", c.name, s.parameter), ..c });
        }
    }
    let mut header = vec![s.parameter.as_str()];
    header.extend(GHZ_HEADER);
    out.write("sweep.csv", &header, &rows)?;
    Ok(())
}

/// Runs `scenario`, writing CSVs under `out_dir`.
///
/// `Err` means the run could not complete; failed invariant checks are
/// reported through [`Outcome::checks`] after all files are written.
pub fn run_scenario(loaded: &LoadedConfig, scenario: Scenario, seed: u64, out_dir: &Path) -> CliResult<Outcome> {
    fs::create_dir_all(out_dir)?;
    let mut out = CsvOut {
        dir: out_dir,
        digest: &loaded.digest,
        files: Vec::new(),
    };
    let mut outcome = Outcome::default();
    let cfg = &loaded.config;
    match scenario {
        Scenario::Bell => bell(cfg, &mut out, &mut outcome)?,
        Scenario::Ghz => ghz(cfg, &mut out, &mut outcome)?,
        Scenario::Rate => rate(cfg, &mut out, &mut outcome)?,
        Scenario::Schmidt => schmidt_scenario(cfg, &mut out, &mut outcome)?,
        Scenario::OracleCheck => oracle_check(cfg, seed, &mut out, &mut outcome)?,
        Scenario::Sweep => sweep(loaded, &mut out, &mut outcome)?,
    }
    let rows: Vec<Vec<String>> = outcome
        .checks
        .iter()
        .map(|c| vec![c.name.clone(), num(c.value), num(c.tol), c.passed.to_string()])
        .collect();
    out.write("checks.csv", &["check", "value", "tol", "passed"], &rows)?;
    outcome.files = out.files;
    Ok(outcome)
}

/// The paper-ideal GHZ configuration as TOML text.
pub const IDEAL_CONFIG: &str = r#"psi_variant = "direct"
detector_mode = "number-resolving"
rep_rate = 1e6
beta = { abs2 = 0.1 }

[source]
t = 0.7071067811865476
r = 0.7071067811865476
phi = "pi"
phi1 = "pi/2"
phi2 = "pi/2"

[fanout]
t1 = 0.7071067811865476
r1 = 0.7071067811865476
t2 = 0.7071067811865476
r2 = 0.7071067811865476
t3 = 0.7071067811865476
r3 = 0.7071067811865476

[grid]
k0 = 0.0

[bwf]
kind = "single-bin"
"#;
