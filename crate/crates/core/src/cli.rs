//! Command-line driver: one subcommand per experiment, one report per run.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::deformation::{self, DeformationParams, Family};
use crate::dilation;
use crate::error::{OilError, Result};
use crate::extension;
use crate::hardy::{self, Symbol, Window, WindowedOperator};
use crate::linalg::{self, numerical_rank};
use crate::report::{self, Format, Report};
use crate::spectral::{self, IdealSpec};

/// Residual tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for identities routed through dense factorizations.
pub const FACTORED_TOL: f64 = 1e-10;
/// Slack for the lower-bound inequalities.
pub const BOUND_TOL: f64 = 1e-9;
/// Relative singular-value cutoff used for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "oil", version, about = "Finite-section experiments on Toeplitz extensions and their deformations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// RNG seed; trial `i` uses `seed ^ i`.
    #[arg(long, env = "OIL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Report destination; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WindowArgs {
    /// Lowest Fourier mode of the window.
    #[arg(long, default_value_t = -40, allow_hyphen_values = true)]
    pub lo: i64,
    /// Highest Fourier mode of the window.
    #[arg(long, default_value_t = 40, allow_hyphen_values = true)]
    pub hi: i64,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Toeplitz splitting defect against its Hankel-product form.
    Defect {
        /// Symbol file for `a` (default `z + z̄`).
        #[arg(long)]
        symbol: Option<PathBuf>,
        /// Symbol file for `b` (default `ā`).
        #[arg(long)]
        symbol_b: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Singular values of `[P, M_a]` or of the Hankel operator.
    Spectrum {
        #[arg(long)]
        symbol: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Use the Hankel operator instead of the commutator.
        #[arg(long)]
        hankel: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Random Stinespring dilations and their block identities.
    StinespringCheck {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        kraus: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Interleaving isometries and the sum of extensions.
    SumDemo {
        #[arg(long, default_value_t = 32)]
        modes: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Inverse-extension identity and Toeplitz-pair evidence.
    InverseCheck {
        #[arg(long)]
        symbol: Option<PathBuf>,
        #[arg(long, default_value_t = -12, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, default_value_t = 60, allow_hyphen_values = true)]
        hi: i64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Shift coefficients, quadratic identity and defect expansion of `τ_T`.
    DeformationCheck {
        #[arg(long, default_value_t = 0.4)]
        eps: f64,
        #[arg(long, default_value_t = 256)]
        modes: usize,
        #[arg(long, default_value_t = Family::PaperFormula)]
        family: Family,
        #[command(flatten)]
        common: Common,
    },
    /// Lower bound `‖U*PzPU - (P+T)z(P+T)‖_p ≥ ‖T‖_p` over Haar unitaries.
    LemmaCheck {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.4)]
        eps: f64,
        #[arg(long, default_value_t = 128)]
        modes: usize,
        /// Ambient dimension (default modes + 2).
        #[arg(long)]
        ambient: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = Family::PaperFormula)]
        family: Family,
        #[command(flatten)]
        common: Common,
    },
    /// Summability sweep of the λ family over an ε grid.
    Sweep {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        eps_min: f64,
        #[arg(long)]
        eps_max: f64,
        /// Grid points `eps_min + i (eps_max - eps_min) / steps`, `i < steps`.
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = Family::PaperFormula)]
        family: Family,
        #[arg(long, default_value_t = 65536)]
        max_index: usize,
        /// Attach a small lower-bound run to each grid point.
        #[arg(long)]
        with_lemma: bool,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Defect { .. } => "defect",
            Command::Spectrum { .. } => "spectrum",
            Command::StinespringCheck { .. } => "stinespring-check",
            Command::SumDemo { .. } => "sum-demo",
            Command::InverseCheck { .. } => "inverse-check",
            Command::DeformationCheck { .. } => "deformation-check",
            Command::LemmaCheck { .. } => "lemma-check",
            Command::Sweep { .. } => "sweep",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Defect { common, .. }
            | Command::Spectrum { common, .. }
            | Command::StinespringCheck { common, .. }
            | Command::SumDemo { common, .. }
            | Command::InverseCheck { common, .. }
            | Command::DeformationCheck { common, .. }
            | Command::LemmaCheck { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}

/// What a run produced.
#[derive(Debug)]
pub enum Output {
    Report(Report),
    /// CSV text for spectrum exports, plus the report whose `pass` decides
    /// the exit status.
    Csv(String, Report),
}

impl Output {
    pub fn report(&self) -> &Report {
        match self {
            Output::Report(r) | Output::Csv(_, r) => r,
        }
    }
}

/// Failure of a run, mapped onto exit statuses.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad parameters, unreadable or malformed symbol files: exit 2.
    #[error("{0}")]
    Usage(OilError),
    /// I/O failure while writing the report: exit 1.
    #[error("{0}")]
    Output(OilError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Output(_) => 1,
        }
    }
}

fn default_symbol() -> Symbol {
    &Symbol::z() + &Symbol::z_bar()
}

fn load_or(path: &Option<PathBuf>, fallback: Symbol) -> Result<Symbol> {
    match path {
        Some(p) => report::load_symbol_file(p),
        None => Ok(fallback),
    }
}

fn params_of(cmd: &Command) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(cmd)?;
    // Unwrap the externally tagged enum to the field map.
    if let serde_json::Value::Object(map) = &mut v {
        if let Some((_, inner)) = map.iter_mut().next() {
            let mut inner = inner.take();
            if let Some(obj) = inner.as_object_mut() {
                if let Some(common) = obj.remove("common") {
                    if let Some(format) = common.get("format") {
                        obj.insert("format".into(), format.clone());
                    }
                }
            }
            return Ok(inner);
        }
    }
    Ok(v)
}

/// Runs one experiment and returns its report; does not write anything.
pub fn dispatch(cmd: &Command) -> std::result::Result<Output, RunError> {
    let seed = cmd.common().seed;
    let params = params_of(cmd).map_err(RunError::Usage)?;
    let mut report = Report::new(cmd.name(), params, seed);
    let csv = run(cmd, &mut report).map_err(RunError::Usage)?;
    Ok(match csv {
        Some(text) => Output::Csv(text, report),
        None => Output::Report(report),
    })
}

/// Dispatches and writes the report to `--out` (or returns the text for
/// stdout). Returns the exit status.
pub fn execute(cmd: &Command) -> std::result::Result<(i32, Option<String>), RunError> {
    let output = dispatch(cmd)?;
    let code = if output.report().pass { 0 } else { 1 };
    let text = match &output {
        Output::Report(r) => r.to_json().map_err(RunError::Output)?,
        Output::Csv(text, _) => text.clone(),
    };
    match &cmd.common().out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| RunError::Output(e.into()))?;
            Ok((code, None))
        }
        None => Ok((code, Some(text))),
    }
}

fn run(cmd: &Command, report: &mut Report) -> Result<Option<String>> {
    match cmd {
        Command::Defect { symbol, symbol_b, window, theta, .. } => {
            let a = load_or(symbol, default_symbol())?;
            let b = load_or(symbol_b, a.conjugate())?;
            run_defect(report, &a, &b, Window::new(window.lo, window.hi)?, *theta)?;
            Ok(None)
        }
        Command::Spectrum { symbol, window, p, hankel, common } => {
            let a = load_or(symbol, default_symbol())?;
            run_spectrum(report, &a, Window::new(window.lo, window.hi)?, *p, *hankel, common.format)
        }
        Command::StinespringCheck { dim, kraus, trials, pairs, p, common } => {
            run_stinespring(report, *dim, *kraus, *trials, *pairs, *p, common.seed)?;
            Ok(None)
        }
        Command::SumDemo { modes, trials, common } => {
            run_sum(report, *modes, *trials, common.seed)?;
            Ok(None)
        }
        Command::InverseCheck { symbol, lo, hi, p, .. } => {
            let a = load_or(symbol, default_symbol())?;
            run_inverse(report, &a, Window::new(*lo, *hi)?, *p)?;
            Ok(None)
        }
        Command::DeformationCheck { eps, modes, family, .. } => {
            run_deformation(report, *eps, *modes, *family)?;
            Ok(None)
        }
        Command::LemmaCheck { p, eps, modes, ambient, trials, family, common } => {
            let mut params = DeformationParams::new(*eps, *p, *family, *modes, common.seed);
            if let Some(m) = ambient {
                params.ambient = *m;
            }
            run_lemma(report, &params, *trials)?;
            Ok(None)
        }
        Command::Sweep { p, eps_min, eps_max, steps, family, max_index, with_lemma, common } => {
            let grid = sweep_grid(*eps_min, *eps_max, *steps)?;
            run_sweep(report, *p, &grid, *family, *max_index, *with_lemma, common.seed)?;
            Ok(None)
        }
    }
}

/// `steps` points `eps_min + i h`, `h = (eps_max - eps_min) / steps`.
pub fn sweep_grid(eps_min: f64, eps_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(eps_min < eps_max) {
        return Err(OilError::InvalidParameter("need eps_min < eps_max and steps >= 1".into()));
    }
    let h = (eps_max - eps_min) / steps as f64;
    Ok((0..steps).map(|i| eps_min + i as f64 * h).collect())
}

fn run_defect(report: &mut Report, a: &Symbol, b: &Symbol, w: Window, theta: f64) -> Result<()> {
    let d = hardy::splitting_defect(a, b, w)?;
    let hp = hardy::hankel_product(a, b, w);
    let hankel_residual = d.guard.norm(&(d.defect.entries() - hp.entries()));
    let rotation = hardy::rotation_equivariance_residual(a, theta, w);
    report.set_result("window", [w.lo(), w.hi()])?;
    report.set_result("guard", [d.guard.lo(), d.guard.hi()])?;
    report.set_result("defect_norm", d.defect_norm())?;
    report.check("hankel_product", hankel_residual, EXACT_TOL);
    report.check("adjoint_defect", d.adjoint_defect_norm(), EXACT_TOL);
    report.check("rotation", rotation, EXACT_TOL);
    if w.has_negative_modes() {
        let comm = hardy::projection_commutator(a, w)?;
        let rank = numerical_rank(comm.entries(), RANK_TOL);
        report.set_result("commutator_rank", rank)?;
        report.check_flag("commutator_rank_bound", rank <= 2 * a.bandwidth());
    }
    Ok(())
}

fn run_spectrum(report: &mut Report, a: &Symbol, w: Window, p: f64, hankel: bool, format: Format) -> Result<Option<String>> {
    let op = if hankel { hardy::hankel_operator(a, w)? } else { hardy::projection_commutator(a, w)? };
    let s = spectral::singular_values(&op)?;
    let n_max = prev_power_of_two(s.len());
    report.set_result("operator", op.label())?;
    report.set_result("schatten_norm", spectral::schatten_norm(&s, p)?)?;
    report.set_result("rank", numerical_rank(op.entries(), RANK_TOL))?;
    if n_max >= 4 {
        report.set_result("verdict", spectral::summability_classify(s.values(), &IdealSpec::Schatten(p), n_max)?)?;
    }
    report.set_result("singular_values", s.values())?;
    Ok(match format {
        Format::Csv => Some(report::spectrum_csv(&s)),
        Format::Json => None,
    })
}

fn prev_power_of_two(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

#[derive(Debug, Serialize)]
struct DilationTrial {
    seed: u64,
    compression: f64,
    homomorphism: f64,
    adjoint: f64,
    ekv1: f64,
    ekv2: f64,
    square_residual: f64,
    verdicts_match: bool,
}

/// RNG for the test matrices of trial `seed`, on a separate ChaCha stream
/// from the Kraus data.
pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn run_stinespring(report: &mut Report, dim: usize, kraus: usize, trials: usize, pairs: usize, p: f64, seed: u64) -> Result<()> {
    if dim == 0 || kraus == 0 || trials == 0 {
        return Err(OilError::InvalidParameter("dim, kraus and trials must be >= 1".into()));
    }
    if !(p > 0.0) {
        return Err(OilError::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed ^ i;
            let map = dilation::random_cp_contraction(dim, dim, kraus, s)?;
            let d = dilation::dilation_build(&map)?;
            let mut rng = trial_rng(s);
            let mut t = DilationTrial {
                seed: s,
                compression: 0.0,
                homomorphism: 0.0,
                adjoint: 0.0,
                ekv1: 0.0,
                ekv2: 0.0,
                square_residual: 0.0,
                verdicts_match: true,
            };
            for _ in 0..pairs.max(1) {
                let a = linalg::complex_gaussian(dim, dim, &mut rng);
                let b = linalg::complex_gaussian(dim, dim, &mut rng);
                t.compression = t.compression.max(d.compression_residual(&a)?);
                t.homomorphism = t.homomorphism.max(d.homomorphism_residual(&a, &b)?);
                t.adjoint = t.adjoint.max(d.adjoint_residual(&a)?);
                let h = linalg::random_hermitian(dim, &mut rng);
                let k = linalg::random_hermitian(dim, &mut rng);
                let (r1, r2) = dilation::defect_identity_residuals(&d, &h, &k)?;
                t.ekv1 = t.ekv1.max(r1);
                t.ekv2 = t.ekv2.max(r2);
                if dim >= 4 {
                    let eq = dilation::square_root_equivalence(&d, &h, p)?;
                    t.square_residual = t.square_residual.max(eq.square_residual.max(eq.paired_residual));
                    t.verdicts_match &= eq.defect_verdict.verdict == eq.commutator_verdict.verdict;
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let max = |f: fn(&DilationTrial) -> f64| results.iter().map(f).fold(0.0, f64::max);
    report.check("compression", max(|t| t.compression), FACTORED_TOL);
    report.check("homomorphism", max(|t| t.homomorphism), FACTORED_TOL);
    report.check("adjoint", max(|t| t.adjoint), EXACT_TOL);
    report.check("ekv1", max(|t| t.ekv1), FACTORED_TOL);
    report.check("ekv2", max(|t| t.ekv2), FACTORED_TOL);
    report.check("square_spectrum", max(|t| t.square_residual), FACTORED_TOL);
    report.check_flag("square_root_verdicts_match", results.iter().all(|t| t.verdicts_match));
    report.set_result("trials", &results)?;
    Ok(())
}

fn run_sum(report: &mut Report, modes: usize, trials: usize, seed: u64) -> Result<()> {
    let pair = extension::interleaving_isometries(modes)?;
    report.check("isometry_relations", pair.relation_defect(), 0.0);
    let w = Window::hardy(modes);
    let swap = extension::interleaving_swap(modes);
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ i);
            let a = WindowedOperator::new(w, linalg::complex_gaussian(modes, modes, &mut rng), "A")?;
            let b = WindowedOperator::new(w, linalg::complex_gaussian(modes, modes, &mut rng), "B")?;
            let ab = extension::extension_sum(&a, &b)?;
            let ba = extension::extension_sum(&b, &a)?;
            let s_ab = spectral::singular_values(&ab)?;
            let s_ba = spectral::singular_values(&ba)?;
            let mut merged = spectral::singular_values(&a)?.values().to_vec();
            merged.extend_from_slice(spectral::singular_values(&b)?.values());
            merged.sort_by(|x, y| y.total_cmp(x));
            let merge = max_abs_diff(s_ab.values(), &merged);
            let swap_res = linalg::op_norm(&(&swap * ab.entries() * swap.adjoint() - ba.entries()));
            let commute = max_abs_diff(s_ab.values(), s_ba.values());
            Ok([merge, swap_res, commute])
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |j: usize| per_trial.iter().map(|r| r[j]).fold(0.0, f64::max);
    report.check("spectrum_merge", col(0), FACTORED_TOL);
    report.check("swap_conjugation", col(1), FACTORED_TOL);
    report.check("swap_spectra", col(2), FACTORED_TOL);
    report.set_result("modes", modes)?;
    report.set_result("trials", trials)?;
    Ok(())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn run_inverse(report: &mut Report, a: &Symbol, w: Window, p: f64) -> Result<()> {
    let n_max = prev_power_of_two(w.dim());
    let rep = extension::toeplitz_invertibility_report(a, &IdealSpec::Schatten(p), w, n_max)?;
    report.check("r_u", rep.residuals.r_u, 0.0);
    report.check("r_p", rep.residuals.r_p, 0.0);
    report.check("r_id", rep.residuals.r_id, EXACT_TOL);
    report.set_result("commutator_verdict", &rep.commutator_verdict)?;
    report.set_result("complement_verdict", &rep.complement_verdict)?;
    report.set_result("commutator_spectrum", rep.commutator_spectrum.values())?;
    Ok(())
}

/// Window used by the defect-expansion check.
pub const EXPANSION_WINDOW: (i64, i64) = (-16, 80);

fn expansion_symbols() -> Vec<(&'static str, Symbol)> {
    vec![
        ("z", Symbol::z()),
        ("z+zbar", default_symbol()),
        ("z^2", Symbol::monomial(2, linalg::ONE)),
    ]
}

/// Max deviation of `τ_T(z)` from the shift coefficients on guarded modes,
/// together with the largest entry off the subdiagonal there.
pub fn shift_coefficient_residual(lambda: &[f64], modes: usize) -> Result<f64> {
    let w = Window::hardy(modes);
    let t = deformation::deformation_operator(lambda, w)?;
    let d = deformation::deformed_compression(&t, &Symbol::z(), w)?;
    let mut worst = 0.0f64;
    for j in d.guard.lo()..=d.guard.hi() {
        for k in d.guard.lo()..=d.guard.hi() {
            let expected = if j == k + 1 { deformation::shift_coefficient(lambda, k as usize) } else { 0.0 };
            worst = worst.max((d.operator.at(j, k) - linalg::c(expected)).norm());
        }
    }
    Ok(worst)
}

fn run_deformation(report: &mut Report, eps: f64, modes: usize, family: Family) -> Result<()> {
    if modes < 8 {
        return Err(OilError::InvalidParameter("need at least 8 modes".into()));
    }
    let lambda = deformation::lambda_sequence(eps, family, modes + 1)?;
    report.check("shift_coefficients", shift_coefficient_residual(&lambda, modes)?, EXACT_TOL);
    report.check(
        "quadratic_identity",
        deformation::quadratic_identity_residual(eps, Window::hardy(modes))?,
        EXACT_TOL,
    );
    let w = Window::new(EXPANSION_WINDOW.0, EXPANSION_WINDOW.1)?;
    let t = deformation::signed_deformation_from_order(eps, Window::new(0, w.hi())?)?;
    let mut worst = 0.0f64;
    let mut defects = serde_json::Map::new();
    for (na, a) in expansion_symbols() {
        for (nb, b) in expansion_symbols() {
            let d = deformation::deformation_defect(&t, &a, &b, w)?;
            worst = worst.max(d.residual);
            defects.insert(format!("{na}*{nb}"), json!(d.defect_norm));
        }
    }
    report.check("defect_expansion", worst, EXACT_TOL);
    report.set_result("defect_norms", defects)?;
    report.set_result("chopping_bound", deformation::chopping_asymptotic_bound(modes, modes)?)?;
    Ok(())
}

fn run_lemma(report: &mut Report, params: &DeformationParams, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(OilError::InvalidParameter("need at least one trial".into()));
    }
    let rep = deformation::lemma_lower_bound_report(params, trials)?;
    report.check_at_least("min_gap", rep.min_gap(), BOUND_TOL);
    report.check_at_least("norm_margin", rep.min_norm_margin(), BOUND_TOL);
    report.check("s_terms", rep.max_s_residual(), FACTORED_TOL);
    report.set_result("rhs_norm", rep.rhs_norm)?;
    let summary: Vec<_> = rep
        .trials
        .iter()
        .map(|t| json!({ "seed": t.seed, "min_gap": t.min_gap(), "lhs_norm": t.lhs_norm }))
        .collect();
    report.set_result("trials", summary)?;
    Ok(())
}

fn run_sweep(report: &mut Report, p: f64, grid: &[f64], family: Family, n_max: usize, with_lemma: bool, seed: u64) -> Result<()> {
    let rep = deformation::epsilon_sweep(p, grid, family, n_max, with_lemma, seed)?;
    let lambda_ok = grid.iter().all(|&eps| {
        deformation::lambda_sequence(eps, family, n_max)
            .map(|l| l.windows(2).all(|w| w[1] <= w[0]) && l.iter().all(|&v| v > 0.0 && v <= 1.0))
            .unwrap_or(false)
    });
    report.check_flag("lambda_monotone_in_unit_interval", lambda_ok);
    let rederivable = rep
        .points
        .iter()
        .all(|pt| pt.verdict_p.rederive() == pt.verdict_p.verdict && pt.verdict_2p.rederive() == pt.verdict_2p.verdict);
    report.check_flag("verdicts_rederivable", rederivable);
    if with_lemma {
        let ok = rep
            .points
            .iter()
            .filter_map(|pt| pt.lemma.as_ref())
            .all(|l| l.min_gap >= -BOUND_TOL && l.min_norm_margin >= -BOUND_TOL);
        report.check_flag("lemma_bounds", ok);
    }
    if family == Family::PaperFormula {
        report.set_result(
            "rate_note",
            "measured decay follows 2ε from the expansion 1 - (1 + k^{-2ε})^{-1/2} ≈ ½k^{-2ε}, \
             not the stated rate ε; compare decay_exponent with predicted_exponent and stated_exponent",
        )?;
    }
    report.set_result("sweep", &rep)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("oil").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn sweep_grid_half_open() {
        let g = sweep_grid(0.1, 1.0, 16).unwrap();
        assert_eq!(g.len(), 16);
        assert!((g[0] - 0.1).abs() < 1e-15);
        assert!(*g.last().unwrap() < 1.0);
        assert!(sweep_grid(0.5, 0.5, 3).is_err());
    }

    #[test]
    fn usage_errors_map_to_exit_two() {
        let cli = parse(&["lemma-check", "--p", "0"]);
        let err = dispatch(&cli.command).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(Cli::try_parse_from(["oil", "frobnicate"]).is_err());
    }

    #[test]
    fn params_flatten_common() {
        let cli = parse(&["sum-demo", "--modes", "4", "--trials", "2", "--seed", "7"]);
        let v = params_of(&cli.command).unwrap();
        assert_eq!(v["modes"], json!(4));
        assert_eq!(v["format"], json!("json"));
        assert!(v.get("common").is_none());
    }

    #[test]
    fn small_runs_pass() {
        for args in [
            vec!["sum-demo", "--modes", "6", "--trials", "3"],
            vec!["defect", "--lo", "-12", "--hi", "12"],
            vec!["inverse-check", "--lo", "-8", "--hi", "20"],
            vec!["stinespring-check", "--trials", "2", "--pairs", "3"],
            vec!["deformation-check", "--modes", "32"],
            vec!["lemma-check", "--modes", "12", "--trials", "3"],
            vec!["sweep", "--eps-min", "0.3", "--eps-max", "0.9", "--steps", "2", "--family", "power", "--max-index", "1024"],
        ] {
            let cli = parse(&args);
            let out = dispatch(&cli.command).unwrap();
            assert!(out.report().pass, "{args:?}: {:?}", out.report().residuals);
        }
    }

    #[test]
    fn spectrum_csv_output() {
        let cli = parse(&["spectrum", "--lo", "-6", "--hi", "6", "--format", "csv"]);
        match dispatch(&cli.command).unwrap() {
            Output::Csv(text, _) => {
                let first: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
                assert!(text.starts_with("k,sigma\n0,"));
                assert!((first - 1.0).abs() < 1e-14);
                assert_eq!(text.lines().count(), 14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
