//! `ncgw` command line: argument parsing, dispatch, JSON reports and CSV tables.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::clifford::build_gammas;
use crate::distance::{connes_distance_with, DistanceError, DistanceValue, OptimizerConfig};
use crate::fermionic::{certify_decomposition, FermionError, GaugeField, Mode, ModeSpace};
use crate::finite_triple::io::parse_triple;
use crate::finite_triple::{real_structure_form, solve_dirac_space, verify_axioms, FiniteTriple, TripleError};
use crate::gauge::{gauge_group, GaugeError};
use crate::linalg::{Tolerance, C64};
use crate::rng;
use crate::spectral_action::heat::{default_t_values, heat_trace_report, HeatError};
use crate::spectral_action::{
    closed_form_lagrangian_parts, compare_lagrangian, compare_slices, gilkey_coefficients, assemble, expansion_value,
    laplacian_s_coefficients, GilkeyOptions, ModelPoint, Moments, PointGeometry,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Pass threshold for the Lagrangian comparison and the Grassmann decomposition.
pub const CERTIFICATION_TOL: f64 = 1e-10;
/// Pass threshold for pairing antisymmetry and parity checks.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Relative tolerance for fitted heat-trace densities.
pub const HEAT_FIT_TOL: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "ncgw", version, about = "Finite spectral triple workbench")]
struct Cli {
    /// Numerical tolerance for triple checks (overrides the file value).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Write the tabular part of the result as CSV.
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every axiom of a triple file and detect its KO dimension.
    Verify { file: PathBuf },
    /// Solve for the space of admissible Dirac operators.
    SolveDirac { file: PathBuf },
    /// Dimensions of U(A), U(Ã_J) and the gauge group.
    GaugeGroup { file: PathBuf },
    /// Connes distance between two pure states of a commutative triple.
    Distance {
        file: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Compare the heat-kernel expansion with the closed-form Lagrangian on random draws.
    CheckLagrangian {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Display the Δs boundary terms (not certified).
        #[arg(long)]
        include_ds: bool,
    },
    /// Flat 4-torus heat trace with fitted densities.
    HeatTrace {
        #[arg(long, default_value_t = 2.0 * PI)]
        side: f64,
        #[arg(long, default_value_t = 30)]
        cut: usize,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Certify the decomposition of the fermionic action on a Fourier truncation.
    FermionicCheck {
        /// A mode count, or modes as `a,b,c,d;a,b,c,d;...`.
        #[arg(long, default_value = "1")]
        modes: String,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// `none`, `const:y1,y2,y3,y4` or `mode:q1,q2,q3,q4@a1,a2,a3,a4[;...]`.
        #[arg(long, default_value = "none")]
        gauge: String,
        #[arg(long, default_value_t = 2.0 * PI)]
        side: f64,
    },
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

impl Check {
    fn below(name: &str, residual: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: residual < limit,
            residual,
        }
    }

    fn flag(name: &str, pass: bool, residual: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Vec<String>,
    pub input_digest: String,
    pub checks: Vec<Check>,
    pub payload: Value,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Outcome of a subcommand before serialization.
struct Outcome {
    checks: Vec<Check>,
    payload: Value,
    csv: Option<String>,
    digest_input: Vec<u8>,
}

#[derive(Debug)]
enum Failure {
    /// Exit 2.
    Input(String),
}

impl From<TripleError> for Failure {
    fn from(e: TripleError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_triple(path: &PathBuf, tol: Option<f64>) -> Result<(FiniteTriple, Vec<u8>), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Failure::Input(format!("{} is not UTF-8", path.display())))?;
    let mut t = parse_triple(text)?;
    if let Some(eps) = tol {
        t = t.with_tol(Tolerance::new(eps).map_err(|e| Failure::Input(e.to_string()))?);
    }
    Ok((t, bytes))
}

/// Runs one invocation; `args` excludes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echo: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("ncgw")).chain(args)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    if let Some(t) = cli.tol {
        if Tolerance::new(t).is_err() {
            let _ = writeln!(err, "error: --tol must be positive and finite, got {t}");
            return 2;
        }
    }
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: echo,
        input_digest: hex::encode(Sha256::digest(&outcome.digest_input)),
        checks: outcome.checks,
        payload: outcome.payload,
    };
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, &text) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    if let Some(path) = &cli.csv {
        let Some(csv) = &outcome.csv else {
            let _ = writeln!(err, "error: this command has no tabular output for --csv");
            return 2;
        };
        if let Err(e) = std::fs::write(path, csv) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    let _ = out.write_all(text.as_bytes());
    match report.checks.iter().find(|c| !c.pass) {
        None => 0,
        Some(c) => {
            let _ = writeln!(err, "check failed: {} (residual {:e})", c.name, c.residual);
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Verify { file } => verify(file, cli.tol),
        Command::SolveDirac { file } => solve_dirac(file, cli.tol),
        Command::GaugeGroup { file } => gauge(file, cli.tol),
        Command::Distance { file, from, to } => distance(file, cli.tol, *from, *to, cli.seed),
        Command::CheckLagrangian { trials, include_ds } => check_lagrangian(*trials, cli.seed, *include_ds),
        Command::HeatTrace { side, cut, mass, t } => heat(*side, *cut, *mass, t),
        Command::FermionicCheck { modes, mass, gauge, side } => fermionic(modes, *mass, gauge, *side),
    }
}

fn verify(file: &PathBuf, tol: Option<f64>) -> Result<Outcome, Failure> {
    let (t, bytes) = read_triple(file, tol)?;
    let report = verify_axioms(&t);
    let checks = report
        .checks
        .iter()
        .map(|c| Check::flag(&c.name, c.pass, c.residual))
        .collect();
    Ok(Outcome {
        checks,
        payload: json!({
            "hilbert_dim": t.hilbert_dim(),
            "algebra_summands": t.algebra_summands(),
            "ko_dimension": report.ko_dimension,
        }),
        csv: None,
        digest_input: bytes,
    })
}

fn nonzero_pattern(m: &crate::linalg::CMatrix, eps: f64) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if m[(r, c)].norm() > eps {
                out.push([r, c]);
            }
        }
    }
    out
}

fn solve_dirac(file: &PathBuf, tol: Option<f64>) -> Result<Outcome, Failure> {
    let (t, bytes) = read_triple(file, tol)?;
    let mut checks = Vec::new();
    let mut payload = serde_json::Map::new();
    match real_structure_form(&t) {
        Ok(form) => {
            let residual = form.pattern_residual.max(form.symmetry_residual).max(form.unitarity_residual);
            checks.push(Check::below("real_structure_form", residual, t.tol().eps()));
            payload.insert("real_structure_form".into(), serde_json::to_value(&form).expect("serializable"));
        }
        Err(e) => {
            checks.push(Check::flag("real_structure_form", false, f64::INFINITY));
            payload.insert("real_structure_form_error".into(), Value::String(e.to_string()));
        }
    }
    let space = solve_dirac_space(&t)?;
    // Every basis element must give a triple that passes all axioms.
    let mut worst: f64 = 0.0;
    for d in &space.basis {
        let cand = t.with_dirac(Some(d.clone()))?;
        let rep = verify_axioms(&cand);
        if !rep.all_pass() {
            worst = f64::INFINITY;
        }
        for c in &rep.checks {
            worst = worst.max(c.residual);
        }
    }
    checks.push(Check::below("basis_axioms", worst, t.tol().eps()));
    let patterns: Vec<Vec<[usize; 2]>> = space.basis.iter().map(|d| nonzero_pattern(d, t.tol().eps())).collect();
    payload.insert("dimension".into(), json!(space.dim()));
    payload.insert("basis".into(), serde_json::to_value(&space.basis).expect("serializable"));
    payload.insert("patterns".into(), json!(patterns));
    Ok(Outcome {
        checks,
        payload: Value::Object(payload),
        csv: None,
        digest_input: bytes,
    })
}

fn gauge(file: &PathBuf, tol: Option<f64>) -> Result<Outcome, Failure> {
    let (t, bytes) = read_triple(file, tol)?;
    let info = gauge_group(&t).map_err(|e: GaugeError| Failure::Input(e.to_string()))?;
    let defect = (info.dim_u_a as f64) - (info.dim_u_tilde + info.dim_gauge) as f64;
    Ok(Outcome {
        checks: vec![Check::flag("exactness", info.exact(), defect.abs())],
        payload: serde_json::to_value(&info).expect("serializable"),
        csv: None,
        digest_input: bytes,
    })
}

fn distance(file: &PathBuf, tol: Option<f64>, from: usize, to: usize, seed: u64) -> Result<Outcome, Failure> {
    let (t, bytes) = read_triple(file, tol)?;
    let cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let mut checks = Vec::new();
    let payload = match connes_distance_with(&t, from, to, &cfg) {
        Ok(r) => {
            // The certificate must be feasible: ‖[D,a]‖ ≤ 1.
            let excess = (r.commutator_norm - 1.0).max(0.0);
            checks.push(Check::below("certificate_feasible", excess, 1e-9));
            if let DistanceValue::Finite(v) = r.value {
                let gap = (r.certificate[from] - r.certificate[to]).abs() - v;
                checks.push(Check::below("certificate_attains_value", gap.abs(), 1e-9 * v.max(1.0)));
            }
            serde_json::to_value(&r).expect("serializable")
        }
        Err(DistanceError::NumericalFailure { spread }) => {
            checks.push(Check::below("restart_agreement", spread, cfg.agreement));
            json!({ "value": Value::Null, "restart_spread": spread })
        }
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    Ok(Outcome {
        checks,
        payload,
        csv: None,
        digest_input: bytes,
    })
}

#[derive(Serialize)]
struct LagrangianDraw {
    rel_error: f64,
    higgs_rel_error: f64,
    gauge_rel_error: f64,
    expansion: f64,
    lagrangian: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    with_laplacian_s: Option<Value>,
}

fn check_lagrangian(trials: usize, seed: u64, include_ds: bool) -> Result<Outcome, Failure> {
    if trials == 0 {
        return Err(Failure::Input("--trials must be positive".into()));
    }
    let g = build_gammas().map_err(|e| Failure::Input(e.to_string()))?;
    let mut rng = rng::stream(seed, "lagrangian");
    let mut draws = Vec::with_capacity(trials);
    let mut csv = String::from("draw,rel_error,higgs_rel_error,gauge_rel_error\n");
    for k in 0..trials {
        let geom = PointGeometry::random(&mut rng);
        let model = ModelPoint::random(&mut rng);
        let m = Moments::random(&mut rng);
        let full = compare_lagrangian(&geom, &model, &m, &g);
        let slices = compare_slices(&geom, &model, &m, &g);
        let with_ds = include_ds.then(|| {
            let opts = GilkeyOptions {
                include_laplacian_s: true,
                laplacian_q: None,
            };
            let c = gilkey_coefficients(&assemble(&geom, &model, &g), &geom, &opts);
            let l = closed_form_lagrangian_parts(&geom, &model, &m, true).total() / (4.0 * PI * PI);
            json!({ "laplacian_s": geom.laplacian_s, "expansion": expansion_value(&c, &m), "lagrangian": l })
        });
        csv.push_str(&format!("{k},{},{},{}\n", full.rel_error, slices.higgs.rel_error, slices.gauge.rel_error));
        draws.push(LagrangianDraw {
            rel_error: full.rel_error,
            higgs_rel_error: slices.higgs.rel_error,
            gauge_rel_error: slices.gauge.rel_error,
            expansion: full.expansion,
            lagrangian: full.lagrangian,
            with_laplacian_s: with_ds,
        });
    }
    let max = |f: fn(&LagrangianDraw) -> f64| draws.iter().map(f).fold(0.0, f64::max);
    let (full, higgs, gauge) = (max(|d| d.rel_error), max(|d| d.higgs_rel_error), max(|d| d.gauge_rel_error));
    let mut payload = json!({
        "trials": trials,
        "seed": seed,
        "max_rel_error": full,
        "max_higgs_rel_error": higgs,
        "max_gauge_rel_error": gauge,
        "draws": draws,
    });
    if include_ds {
        let (spectral, closed) = laplacian_s_coefficients();
        payload["laplacian_s_coefficients"] = json!({ "expansion": spectral, "lagrangian": closed });
    }
    Ok(Outcome {
        checks: vec![
            Check::below("lagrangian", full, CERTIFICATION_TOL),
            Check::below("higgs_slice", higgs, CERTIFICATION_TOL),
            Check::below("gauge_slice", gauge, CERTIFICATION_TOL),
        ],
        payload,
        csv: Some(csv),
        digest_input: format!("check-lagrangian trials={trials} seed={seed} include_ds={include_ds}").into_bytes(),
    })
}

fn heat(side: f64, cut: usize, mass: f64, t: &[f64]) -> Result<Outcome, Failure> {
    if !mass.is_finite() {
        return Err(Failure::Input(format!("invalid mass {mass}")));
    }
    let ts = if t.is_empty() { default_t_values() } else { t.to_vec() };
    let d = C64::new(0.0, -mass);
    let digest_input = format!("heat-trace side={side} cut={cut} mass={mass} t={ts:?}").into_bytes();
    let report = match heat_trace_report(side, cut, d, &ts) {
        Ok(r) => r,
        Err(HeatError::Truncation { t, bound, required_cut }) => {
            return Ok(Outcome {
                checks: vec![Check::below("truncation_bound", bound, crate::spectral_action::heat::TRUNCATION_LIMIT)],
                payload: json!({ "t": t, "mode_cut": cut, "required_mode_cut": required_cut }),
                csv: None,
                digest_input,
            })
        }
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    let a0 = 1.0 / (PI * PI);
    let a2 = -mass * mass / (PI * PI);
    let a0_err = (report.fit.a0 - a0).abs() / a0;
    let a2_err = (report.fit.a2 - a2).abs() / a2.abs().max(a0);
    let bound = report.points.iter().map(|p| p.truncation_bound).fold(0.0, f64::max);
    let mut csv = String::from("t,trace,fitted_a0,fitted_a2\n");
    for p in &report.points {
        csv.push_str(&format!("{},{},{},{}\n", p.t, p.trace, report.fit.a0, report.fit.a2));
    }
    Ok(Outcome {
        checks: vec![
            Check::below("truncation_bound", bound, crate::spectral_action::heat::TRUNCATION_LIMIT),
            Check::below("a0_density", a0_err, HEAT_FIT_TOL),
            Check::below("a2_density", a2_err, HEAT_FIT_TOL),
        ],
        payload: json!({
            "report": report,
            "expected_a0": a0,
            "expected_a2": a2,
        }),
        csv: Some(csv),
        digest_input,
    })
}

pub fn parse_modes(spec: &str, side: f64) -> Result<ModeSpace, String> {
    let spec = spec.trim();
    if let Ok(n) = spec.parse::<usize>() {
        return ModeSpace::with_count(n, side).map_err(|e| e.to_string());
    }
    let modes = spec
        .split(';')
        .map(|m| parse_vector::<i64>(m).map_err(|e| format!("mode `{m}`: {e}")))
        .collect::<Result<Vec<Mode>, String>>()?;
    ModeSpace::new(modes, side).map_err(|e| e.to_string())
}

fn parse_vector<T: FromStr>(text: &str) -> Result<[T; 4], String>
where
    T::Err: std::fmt::Display,
{
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected 4 comma-separated entries, got {}", parts.len()));
    }
    let vals = parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<T>, String>>()?;
    vals.try_into().map_err(|_| "expected 4 entries".to_string())
}

pub fn parse_gauge(spec: &str) -> Result<GaugeField, String> {
    let spec = spec.trim();
    if spec == "none" {
        return Ok(GaugeField::None);
    }
    if let Some(rest) = spec.strip_prefix("const:") {
        return Ok(GaugeField::Constant(parse_vector::<f64>(rest)?));
    }
    if let Some(rest) = spec.strip_prefix("mode:") {
        let mut list = Vec::new();
        for item in rest.split(';') {
            let (q, a) = item.split_once('@').ok_or_else(|| format!("gauge mode `{item}` needs `q@amplitudes`"))?;
            list.push((parse_vector::<i64>(q)?, parse_vector::<C64>(a)?));
        }
        return Ok(GaugeField::Modes(list));
    }
    Err(format!("unknown gauge spec `{spec}`; use none, const:... or mode:..."))
}

fn fermionic(modes: &str, mass: f64, gauge: &str, side: f64) -> Result<Outcome, Failure> {
    let ms = parse_modes(modes, side).map_err(Failure::Input)?;
    let field = parse_gauge(gauge).map_err(Failure::Input)?;
    let cert = certify_decomposition(ms, &field, mass).map_err(|e: FermionError| Failure::Input(e.to_string()))?;
    let half_gap = (cert.unit_factor_deviation - cert.max_coeff).abs();
    let checks = vec![
        Check::below("decomposition", cert.deviation, CERTIFICATION_TOL),
        Check::below("pairing_antisymmetry", cert.symmetric_part, STRUCTURE_TOL),
        Check::below("half_factor", half_gap, CERTIFICATION_TOL),
        Check::below("hplus_projector", cert.projector_residual, STRUCTURE_TOL),
        Check::below("j_maps_plus_to_minus", cert.j_parity_residual, STRUCTURE_TOL),
        Check::below("dirac_maps_plus_to_minus", cert.operator_parity_residual, STRUCTURE_TOL),
        Check::below("dirac_self_adjoint", cert.self_adjoint_residual, STRUCTURE_TOL),
        Check::below("gauge_invariance", cert.gauge_invariance[0].max(cert.gauge_invariance[1]), STRUCTURE_TOL),
    ];
    Ok(Outcome {
        checks,
        payload: json!({
            "inner_product": "antilinear in the first argument",
            "certification": cert,
            "slot_order": ["chi_L", "chi_R", "psi_R", "psi_L"],
        }),
        csv: None,
        digest_input: format!("fermionic-check modes={modes} mass={mass} gauge={gauge} side={side}").into_bytes(),
    })
}
