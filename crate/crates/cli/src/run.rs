//! Full experiment runs: reports, consistency checks and artifact files.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use chiral_gap_core::matmodel::{
    assemble, krein_from_counting, norm_bound_checks, verify_chiral, ModelCaps,
};
use chiral_gap_core::shift::{
    arithmetic_shift_density, stationary_scan, ScanWarning, ShiftDensity, TestFunction, UniformGrid,
};
use chiral_gap_core::tracekit::compare_trace_representations;

use crate::config::{hex, ExperimentConfig, Mode};
use crate::error::{in_module, io_at, ExpError};
use crate::pipeline::{Pipeline, INSUFFICIENT_LEVELS_FLAG};
use crate::svg::render_svg;

pub const TRACE_TOLERANCE: f64 = 1e-6;
pub const PAIRING_TOLERANCE: f64 = 1e-10;
pub const KREIN_TOLERANCE: f64 = 1e-9;
pub const EULER_TOLERANCE: f64 = 1e-12;
const KREIN_PROBES: usize = 201;
const DENSITY_POINTS: usize = 401;
const DENSITY_HALF_WIDTH: f64 = 20.0;

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    text.into_bytes()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    /// Artifact file names, ascending.
    pub artifacts: Vec<String>,
    pub checks: BTreeMap<String, bool>,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|&ok| ok)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

pub fn bands_csv(pipeline_bands: &chiral_gap_core::floquet::BandStructure) -> String {
    let mut s = String::from("n,j,kappa,energy\n");
    let nodes = pipeline_bands.grid().nodes();
    for n in 0..pipeline_bands.n_bands() {
        for (j, &kappa) in nodes.iter().enumerate() {
            let e = pipeline_bands.energy(n, j);
            writeln!(s, "{n},{j},{},{}", fmt_float(kappa), fmt_float(e)).unwrap();
        }
    }
    s
}

pub fn gaps_csv(bands: &chiral_gap_core::floquet::BandStructure) -> String {
    let mut s = String::from("index,lower,upper,width\n");
    for g in bands.gaps() {
        writeln!(
            s,
            "{},{},{},{}",
            g.index,
            fmt_float(g.lower),
            fmt_float(g.upper),
            fmt_float(g.width())
        )
        .unwrap();
    }
    s
}

fn ensemble_csv(p: &Pipeline) -> String {
    let mut s = String::from("prime,mode,lambda\n");
    for (i, &prime) in p.ensemble.primes().as_slice().iter().enumerate() {
        for (m, &l) in p.ensemble.row(i).iter().enumerate() {
            writeln!(s, "{prime},{},{}", m + 1, fmt_float(l)).unwrap();
        }
    }
    s
}

fn mass_csv(p: &Pipeline) -> String {
    let mut s = String::from("mode,mass\n");
    for (m, &v) in p.shifts.values().iter().enumerate() {
        writeln!(s, "{},{}", m + 1, fmt_float(v)).unwrap();
    }
    s
}

fn spectrum_csv(p: &Pipeline) -> String {
    let mut s = String::from("k,lambda,multiplicity\n");
    for (k, (&v, &m)) in p
        .spectrum
        .values()
        .iter()
        .zip(p.spectrum.multiplicities())
        .enumerate()
    {
        writeln!(s, "{},{},{m}", k + 1, fmt_float(v)).unwrap();
    }
    s
}

fn spectrum_fibers_csv(p: &Pipeline) -> String {
    let mut s = String::from("k,n,j,m\n");
    for k in 0..p.spectrum.len() {
        for f in p.spectrum.fibers(k) {
            writeln!(s, "{},{},{},{}", k + 1, f.n, f.j, f.m).unwrap();
        }
    }
    s
}

fn staircase_csv(p: &Pipeline) -> String {
    let mut s = String::from("location,weight\n");
    for &(x, w) in p.staircase.jumps() {
        writeln!(s, "{},{w}", fmt_float(x)).unwrap();
    }
    s
}

fn diagnostics_json(p: &Pipeline) -> (Value, bool) {
    let hash = p.config.hash();
    match &p.alignment {
        Some(a) => {
            let r = &a.report;
            let flags: Vec<&str> = r.flags.iter().map(|f| f.as_str()).collect();
            let finite = [r.map.a, r.map.b, r.mae, r.max_abs, r.e_step]
                .iter()
                .all(|x| x.is_finite());
            let value = json!({
                "K": r.k,
                "a": r.map.a,
                "b": r.map.b,
                "MAE": r.mae,
                "max_abs": r.max_abs,
                "E_step": r.e_step,
                "T": r.window,
                "flags": flags,
                "deviations": r.deviations,
                "config_hash": hash,
            });
            (value, finite)
        }
        None => {
            let value = json!({
                "K": p.config.fit_count,
                "a": null,
                "b": null,
                "MAE": null,
                "max_abs": null,
                "E_step": null,
                "T": p.config.window,
                "flags": [INSUFFICIENT_LEVELS_FLAG],
                "deviations": [],
                "levels_available": p.spectrum.len(),
                "config_hash": hash,
            });
            (value, true)
        }
    }
}

/// Symmetric scan grid covering every level plus four widths.
fn stationary_grid(p: &Pipeline, phi: &TestFunction) -> Result<UniformGrid, ExpError> {
    let top = p.spectrum.values().last().copied().unwrap_or(0.0);
    UniformGrid::symmetric(top + 4.0 * phi.alpha(), phi.alpha() / 20.0).map_err(in_module("shift"))
}

fn warning_json(w: &ScanWarning) -> Value {
    match *w {
        ScanWarning::CoarseGrid { step, min_spacing } => {
            json!({"kind": "coarse_grid", "step": step, "min_spacing": min_spacing})
        }
        ScanWarning::WideTestFunction { alpha, min_spacing } => {
            json!({"kind": "wide_test_function", "alpha": alpha, "min_spacing": min_spacing})
        }
    }
}

fn prefix_sizes(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2))
        .take_while(|&k| k < n)
        .collect();
    out.push(n);
    out
}

/// Computes every artifact in memory. Keys are file names.
pub fn build_artifacts(
    p: &Pipeline,
) -> Result<(BTreeMap<String, Vec<u8>>, BTreeMap<String, bool>), ExpError> {
    let cfg = &p.config;
    let phi = TestFunction::gaussian(cfg.alpha).map_err(in_module("shift"))?;
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut checks: BTreeMap<String, bool> = BTreeMap::new();

    files.insert("bands.csv".into(), bands_csv(&p.bands).into_bytes());
    files.insert("gaps.csv".into(), gaps_csv(&p.bands).into_bytes());
    files.insert("ensemble.csv".into(), ensemble_csv(p).into_bytes());
    files.insert("massshifts.csv".into(), mass_csv(p).into_bytes());
    files.insert("spectrum.csv".into(), spectrum_csv(p).into_bytes());
    files.insert(
        "spectrum_fibers.csv".into(),
        spectrum_fibers_csv(p).into_bytes(),
    );
    files.insert("staircase.csv".into(), staircase_csv(p).into_bytes());

    let scan = stationary_scan(&p.spectrum, &phi, &stationary_grid(p, &phi)?);
    let mut stationary = String::from("t,kind\n");
    for r in &scan.roots {
        writeln!(stationary, "{},{}", fmt_float(r.t), r.kind.as_str()).unwrap();
    }
    files.insert("stationary.csv".into(), stationary.into_bytes());

    let trace = compare_trace_representations(
        &phi,
        &p.bands,
        p.e_star,
        &p.ensemble,
        &p.family,
        &p.shifts,
        cfg.t_max_step,
    )
    .map_err(in_module("tracekit"))?;
    let trace_ok = trace.rel_gap < TRACE_TOLERANCE;
    checks.insert("trace_agreement".into(), trace_ok);
    let euler_ok = match cfg.mode {
        Mode::ConstantOne => {
            let ok = trace.euler_gap < EULER_TOLERANCE;
            checks.insert("euler_factorization".into(), ok);
            Some(ok)
        }
        Mode::IidUniform => None,
    };
    let trace_json = json!({
        "alpha": cfg.alpha,
        "e_star": p.e_star,
        "theta_fiber": trace.theta_fiber,
        "theta_separated": trace.theta_separated,
        "rel_gap": trace.rel_gap,
        "euler_gap": trace.euler_gap,
        "imag_residual": trace.imag_residual,
        "t_max": trace.t_max,
        "h_t": trace.h_t,
        "prefactor": trace.prefactor,
        "passed": trace_ok,
        "euler_factorization_passed": euler_ok,
        "stationary_points": scan.roots.len(),
        "stationary_warnings": scan.warnings.iter().map(warning_json).collect::<Vec<_>>(),
    });
    files.insert("trace_report.json".into(), to_json_bytes(&trace_json));

    let caps = ModelCaps {
        max_fibers: cfg.model_max_fibers,
        max_modes: cfg.model_max_modes,
    };
    let model = assemble(&p.bands, p.e_star, &p.shifts, caps).map_err(in_module("matmodel"))?;
    let chiral = verify_chiral(&model);
    let reach = model
        .arith_spectrum()
        .iter()
        .chain(&model.glob_spectrum())
        .fold(0.0_f64, |a, x| a.max(x.abs()))
        + 1.0;
    let probes = UniformGrid::new(-reach, reach, KREIN_PROBES).map_err(in_module("matmodel"))?;
    let krein = krein_from_counting(&model, &phi, probes.nodes());
    let norms = norm_bound_checks(
        &p.family,
        &p.ensemble,
        &prefix_sizes(p.ensemble.primes().len()),
    )
    .map_err(in_module("matmodel"))?;
    let chiral_ok = chiral.anticommutator_norm == 0.0
        && chiral.gamma_square_defect == 0.0
        && chiral.reflected_anticommutator_norm == 0.0
        && chiral.pairing_defect < PAIRING_TOLERANCE;
    let krein_ok = krein.krein_gap < KREIN_TOLERANCE;
    checks.insert("chiral_pairing".into(), chiral_ok);
    checks.insert("krein_identity".into(), krein_ok);
    checks.insert("norm_bounds".into(), norms.all_ok());
    let matmodel_json = json!({
        "dimension": model.dimension(),
        "fibers": model.fibers().len(),
        "modes": model.modes().len(),
        "chiral": {
            "anticommutator_norm": chiral.anticommutator_norm,
            "gamma_square_defect": chiral.gamma_square_defect,
            "pairing_defect": chiral.pairing_defect,
            "reflected_anticommutator_norm": chiral.reflected_anticommutator_norm,
            "paper_j_commutator_norm": chiral.paper_j_commutator_norm,
            "paper_j_anticommutator_defect": chiral.paper_j_anticommutator_defect,
            "max_abs_eigenvalue": chiral.max_abs_eigenvalue,
            "passed": chiral_ok,
        },
        "krein": {
            "alpha": cfg.alpha,
            "trace_difference": krein.trace_difference,
            "jump_pairing": krein.jump_pairing,
            "krein_gap": krein.krein_gap,
            "net_jumps": krein.jumps.len(),
            "passed": krein_ok,
        },
        "norms": {
            "per_prime": norms.per_prime.iter().map(|n| json!({"p": n.p, "norm": n.norm, "bound": n.bound})).collect::<Vec<_>>(),
            "tails": norms.tails.iter().map(|t| json!({"prefix": t.prefix, "norm": t.norm, "bound": t.bound})).collect::<Vec<_>>(),
            "per_prime_ok": norms.per_prime_ok,
            "tails_bounded": norms.tails_bounded,
            "tails_monotone": norms.tails_monotone,
        },
    });
    files.insert("matmodel_report.json".into(), to_json_bytes(&matmodel_json));

    let (diag_json, diag_ok) = diagnostics_json(p);
    checks.insert("diagnostics_finite".into(), diag_ok);
    files.insert("diagnostics.json".into(), to_json_bytes(&diag_json));

    let map = p
        .alignment
        .as_ref()
        .map_or(chiral_gap_core::zeta::AffineMap::IDENTITY, |a| a.fit.map);
    let svg = render_svg(&p.staircase, p.zeros.ordinates(), &map, cfg.window);
    files.insert("staircase.svg".into(), svg.into_bytes());

    if cfg.shift_density {
        let grid = UniformGrid::new(-DENSITY_HALF_WIDTH, DENSITY_HALF_WIDTH, DENSITY_POINTS)
            .map_err(in_module("shift"))?;
        let density = arithmetic_shift_density(&p.ensemble, &p.family, grid.nodes())
            .map_err(in_module("shift"))?;
        let mut s = format!("# {}\nt,log_re,log_im,density\n", ShiftDensity::LABEL);
        for ((&t, l), &d) in density
            .grid
            .iter()
            .zip(&density.log_sum)
            .zip(&density.density)
        {
            writeln!(
                s,
                "{},{},{},{}",
                fmt_float(t),
                fmt_float(l.re),
                fmt_float(l.im),
                fmt_float(d)
            )
            .unwrap();
        }
        files.insert("shift_density_exploratory.csv".into(), s.into_bytes());
    }
    Ok((files, checks))
}

pub fn manifest_json(config: &ExperimentConfig, files: &BTreeMap<String, Vec<u8>>) -> Vec<u8> {
    let hashes: BTreeMap<&str, String> = files
        .iter()
        .map(|(name, bytes)| (name.as_str(), sha256_hex(bytes)))
        .collect();
    to_json_bytes(&json!({
        "config": config,
        "config_hash": config.hash(),
        "artifact_hashes": hashes,
        "version": env!("CARGO_PKG_VERSION"),
    }))
}

/// Writes every file or none: on failure the files already written are
/// removed.
pub fn write_all(dir: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<(), ExpError> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            for w in &written {
                let _ = fs::remove_file(w);
            }
            let _ = fs::remove_file(&path);
            return Err(io_at(path)(e));
        }
        written.push(path);
    }
    Ok(())
}

/// Runs the experiment and writes all artifacts plus `manifest.json` into
/// `out_dir`. Nothing is written when any stage fails.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, ExpError> {
    let pipeline = Pipeline::run(config)?;
    let (mut files, checks) = build_artifacts(&pipeline)?;
    let manifest = manifest_json(config, &files);
    files.insert("manifest.json".into(), manifest);
    write_all(out_dir, &files)?;
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        artifacts: files.into_keys().collect(),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub config_hash_ok: bool,
    /// Artifacts whose hash differs or which are missing.
    pub mismatched: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.config_hash_ok && self.mismatched.is_empty()
    }
}

/// Rechecks a run directory against its manifest.
pub fn verify_run(dir: &Path) -> Result<VerifyReport, ExpError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(io_at(&path))?;
    let manifest: Value = serde_json::from_str(&text)?;
    let config: ExperimentConfig = serde_json::from_value(manifest["config"].clone())?;
    let mut report = VerifyReport {
        config_hash_ok: manifest["config_hash"].as_str() == Some(config.hash().as_str()),
        mismatched: Vec::new(),
    };
    let hashes = manifest["artifact_hashes"]
        .as_object()
        .ok_or_else(|| ExpError::Other("manifest lacks artifact_hashes".into()))?;
    for (name, expected) in hashes {
        let actual = fs::read(dir.join(name)).ok().map(|b| sha256_hex(&b));
        if actual.as_deref() != expected.as_str() {
            report.mismatched.push(name.clone());
        }
    }
    Ok(report)
}
