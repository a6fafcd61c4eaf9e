use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use klkit::counterexamples::{
    analytic_brownian_spectrum, constant_spectrum, failing_family_on, passing_family_on, DEFAULT_BASE_NODES,
};
use klkit::diagnostics::{
    equicontinuity_report, necessity_residuals, NecessityResidual, ReportConfig, Verdict,
};
use klkit::eigensolve::{nystrom_decompose, DropTol};
use klkit::expansion::{gap_record, gap_schedule, partial_kernel, sup_gap, vn_sequence, GapRecord};
use klkit::io::{fmt_f64, to_json_string, write_matrix_csv};
use klkit::kernels::gram_matrix;
use klkit::sampling::{empirical_covariance, sample_paths};
use klkit::{Error, Grid, KernelSpec, Result, Spectrum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{
    CheckArgs, Command, CounterexampleArgs, DecomposeArgs, SampleArgs, SynthesizeArgs, VerifyBoundsArgs,
};

/// Margins of `verify-bounds` below this count as violations.
pub const BOUND_TOLERANCE: f64 = 1e-8;
const DEFAULT_GAP_PAIRS: usize = 20;

/// What a successful run reports through the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok | Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 4,
        }
    }
}

pub fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Decompose(a) => decompose(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Check(a) => check(a),
        Command::Counterexample(a) => counterexample(a),
        Command::Sample(a) => sample(a),
        Command::VerifyBounds(a) => verify_bounds(a),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
}

fn load_spectrum(path: Option<PathBuf>) -> Result<Spectrum> {
    let path = required(path, "spectrum")?;
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    Spectrum::from_json(&text).map_err(|e| match e {
        Error::Json(e) => Error::Format(format!("{}: {e}", path.display())),
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Write to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_matrix(path: Option<&Path>, nodes: &[f64], m: &DMatrix<f64>) -> Result<()> {
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, nodes, m)?;
    emit(path, &String::from_utf8(buf).expect("csv is ascii"))
}

fn decompose(args: DecomposeArgs) -> Result<Outcome> {
    let kernel = KernelSpec::from_name(&required(args.kernel, "kernel")?, args.ell, args.value)?;
    let grid = Grid::uniform(
        args.a.unwrap_or(0.0),
        args.b.unwrap_or(1.0),
        args.grid.unwrap_or(257),
    )?;
    let drop = match args.drop_tol {
        Some(t) => DropTol::Absolute(t),
        None => DropTol::default(),
    };
    let spectrum = nystrom_decompose(&kernel, &grid, args.terms.unwrap_or(10), drop)?;
    if let Some(path) = args.gram_out.as_deref() {
        emit_matrix(Some(path), grid.nodes(), &gram_matrix(&kernel, &grid))?;
    }
    emit(args.out.as_deref(), &spectrum.to_json()?)?;
    Ok(Outcome::Ok)
}

fn synthesize(args: SynthesizeArgs) -> Result<Outcome> {
    let s = load_spectrum(args.spectrum)?;
    let n = args.terms.unwrap_or(s.len());
    let k = partial_kernel(&s, n)?;
    emit_matrix(args.out.as_deref(), &k.nodes, &k.values)?;

    if let Some(path) = args.vn_out.as_deref() {
        let v = vn_sequence(&s, n)?;
        let mut text = String::from("x");
        for j in 1..=n {
            text.push_str(&format!(",v_{j}"));
        }
        text.push('\n');
        for (i, x) in v.nodes.iter().enumerate() {
            text.push_str(&fmt_f64(*x));
            for row in &v.rows {
                text.push(',');
                text.push_str(&fmt_f64(row[i]));
            }
            text.push('\n');
        }
        emit(Some(path), &text)?;
    }
    if let Some(path) = args.gaps_out.as_deref() {
        let gaps = gap_schedule(n, args.pairs.unwrap_or(DEFAULT_GAP_PAIRS))
            .into_iter()
            .map(|(n, m)| gap_record(&s, n, m))
            .collect::<Result<Vec<GapRecord>>>()?;
        emit(Some(path), &to_json_string(&gaps)?)?;
    }
    Ok(Outcome::Ok)
}

fn check(args: CheckArgs) -> Result<Outcome> {
    let s = load_spectrum(args.spectrum)?;
    let config = ReportConfig {
        ladder_depth: args.depth.unwrap_or(ReportConfig::default().ladder_depth),
        n_terms: args.terms,
        pass_threshold: args.pass_threshold,
        fail_threshold: args.fail_threshold,
    };
    let report = equicontinuity_report(&s, &config)?;
    if let Some(path) = args.moduli_csv.as_deref() {
        emit(Some(path), &report.to_csv())?;
    }
    emit(args.out.as_deref(), &report.to_json()?)?;

    let tail = report
        .tail_bound
        .map_or("none".to_string(), |t| format!("{t:.3e}"));
    eprintln!(
        "{}: envelope {:.3e} at delta {:.3e}, tail {tail}, pass below {:.3e}, fail from {:.3e}",
        report.verdict,
        report.envelope_min(),
        report.delta_min(),
        report.pass_threshold,
        report.fail_threshold,
    );
    if let Some(w) = report.witness {
        eprintln!("witness: n = {}, x = {}, y = {}", w.n, w.x, w.y);
    }
    Ok(match report.verdict {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
        Verdict::Inconclusive => Outcome::Inconclusive,
    })
}

fn counterexample(args: CounterexampleArgs) -> Result<Outcome> {
    let family = required(args.family, "family")?;
    let terms = args.terms.unwrap_or(12);
    let nodes = args.grid.unwrap_or(DEFAULT_BASE_NODES);
    if family != "constant" && (args.a.is_some() || args.b.is_some()) {
        return Err(Error::InvalidArgument(format!(
            "the {family} family lives on [0, 1]; --a/--b are for constant"
        )));
    }
    if family != "constant" && args.lambda.is_some() {
        return Err(Error::InvalidArgument(
            "--lambda is for the constant family".into(),
        ));
    }
    let unit = || Grid::uniform(0.0, 1.0, nodes);
    let s = match family.as_str() {
        "failing" => failing_family_on(terms, &unit()?)?,
        "passing" => passing_family_on(terms, &unit()?)?,
        "brownian" => analytic_brownian_spectrum(terms, &unit()?)?,
        "constant" => {
            let grid = Grid::uniform(args.a.unwrap_or(0.0), args.b.unwrap_or(1.0), nodes)?;
            constant_spectrum(&grid, args.lambda.unwrap_or(1.0))?
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown family `{other}` (expected failing, passing, brownian or constant)"
            )))
        }
    };
    emit(args.out.as_deref(), &s.to_json()?)?;
    Ok(Outcome::Ok)
}

fn sample(args: SampleArgs) -> Result<Outcome> {
    let s = load_spectrum(args.spectrum)?;
    let ensemble = sample_paths(
        &s,
        args.terms.unwrap_or(s.len()),
        args.paths.unwrap_or(1000),
        args.seed.unwrap_or(0),
    )?;
    emit(args.out.as_deref(), &ensemble.to_csv())?;
    if args.cov_out.is_some() || args.stderr_out.is_some() {
        let est = empirical_covariance(&ensemble)?;
        if let Some(path) = args.cov_out.as_deref() {
            emit_matrix(Some(path), &ensemble.nodes, &est.cov)?;
        }
        if let Some(path) = args.stderr_out.as_deref() {
            emit_matrix(Some(path), &ensemble.nodes, &est.stderr)?;
        }
    }
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct GapMargin {
    n: usize,
    m: usize,
    sup_gap: f64,
    vn_gap: f64,
    margin: f64,
}

#[derive(Serialize)]
struct BoundsReport {
    kernel: String,
    sup_norm: f64,
    sup_norm_estimated: bool,
    tolerance: f64,
    min_necessity_margin: f64,
    min_gap_margin: f64,
    ok: bool,
    necessity: Vec<NecessityResidual>,
    gaps: Vec<GapMargin>,
}

fn verify_bounds(args: VerifyBoundsArgs) -> Result<Outcome> {
    let s = load_spectrum(args.spectrum)?;
    let kernel = KernelSpec::from_name(&required(args.kernel, "kernel")?, args.ell, args.value)?;
    let n = args.terms.unwrap_or(s.len());
    let necessity = necessity_residuals(&s, &kernel, n)?;
    let gaps = gap_schedule(n, args.pairs.unwrap_or(DEFAULT_GAP_PAIRS))
        .into_iter()
        .map(|(n, m)| {
            let (sup, vn) = sup_gap(&s, n, m)?;
            Ok(GapMargin {
                n,
                m,
                sup_gap: sup,
                vn_gap: vn,
                margin: vn - sup,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let min_necessity_margin = necessity.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let min_gap_margin = gaps.iter().map(|g| g.margin).fold(f64::INFINITY, f64::min);
    let ok = min_necessity_margin >= -BOUND_TOLERANCE && min_gap_margin >= -BOUND_TOLERANCE;
    let report = BoundsReport {
        kernel: kernel.name().to_string(),
        sup_norm: necessity[0].sup_norm,
        sup_norm_estimated: necessity[0].sup_norm_estimated,
        tolerance: BOUND_TOLERANCE,
        min_necessity_margin,
        min_gap_margin,
        ok,
        necessity,
        gaps,
    };
    emit(args.out.as_deref(), &to_json_string(&report)?)?;
    if report.sup_norm_estimated {
        eprintln!("note: sup-norm of `{}` estimated from the grid", report.kernel);
    }
    eprintln!("smallest margins: increment bound {min_necessity_margin:.3e}, gaps {min_gap_margin:.3e}");
    Ok(if ok { Outcome::Ok } else { Outcome::Fail })
}
