//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use klkit::counterexamples::{analytic_brownian_spectrum, constant_spectrum, failing_family, passing_family};
use klkit::diagnostics::necessity_residuals;
use klkit::eigensolve::{eigen_residual, nystrom_decompose, DropTol};
use klkit::expansion::{gap_schedule, l1_gap, partial_kernel, sup_gap, vn_sequence};
use klkit::sampling::{empirical_covariance, sample_paths, z_scores};
use klkit::{Grid, KernelSpec, Spectrum};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn brownian_lambda(k: usize) -> f64 {
    let w = (k as f64 - 0.5) * PI;
    1.0 / (w * w)
}

/// `Σ_{j > n} 2 λ_j`: direct sum to 10⁶ plus the integral remainder.
fn brownian_tail(n: usize) -> f64 {
    const CUT: usize = 1_000_000;
    let head: f64 = (n + 1..=CUT).rev().map(|j| 2.0 * brownian_lambda(j)).sum();
    head + 2.0 / (PI * PI * CUT as f64)
}

fn catalog() -> [KernelSpec; 3] {
    [
        KernelSpec::brownian(),
        KernelSpec::exponential(0.3).unwrap(),
        KernelSpec::squared_exponential(0.2).unwrap(),
    ]
}

fn klkit(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_klkit"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("KLKIT_THREADS", t);
    }
    cmd.output().expect("klkit binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn eigen_oracle() -> Outcome {
    let grid = Grid::uniform(0.0, 1.0, 512).unwrap();
    let k = KernelSpec::brownian();
    let s = nystrom_decompose(&k, &grid, 10, DropTol::default()).map_err(|e| e.to_string())?;
    ensure(s.len() == 10, || format!("only {} pairs", s.len()))?;

    // the oracle pairs satisfy the integral equation under the same quadrature
    let nodes = grid.nodes();
    let w = grid.weights();
    for k in 1..=10 {
        let f = |x: f64| 2f64.sqrt() * ((k as f64 - 0.5) * PI * x).sin();
        let worst = nodes
            .iter()
            .map(|&x| {
                let integral: f64 = nodes.iter().zip(w).map(|(&y, w)| w * x.min(y) * f(y)).sum();
                (integral - brownian_lambda(k) * f(x)).abs()
            })
            .fold(0.0, f64::max);
        ensure(worst <= 1e-4, || format!("oracle pair {k} residual {worst:e}"))?;
    }

    let mut max_rel = 0.0f64;
    let mut max_res = 0.0f64;
    for (j, lambda) in s.lambdas().enumerate() {
        let rel = (lambda / brownian_lambda(j + 1) - 1.0).abs();
        let res = eigen_residual(&s, &k, j).map_err(|e| e.to_string())?;
        ensure(rel <= 0.01, || format!("λ_{} off by {rel:e}", j + 1))?;
        ensure(res <= 1e-4, || format!("residual of pair {} is {res:e}", j + 1))?;
        max_rel = max_rel.max(rel);
        max_res = max_res.max(res);
    }
    Ok(format!(
        "max rel err {max_rel:.2e} (≤ 1e-2), max residual {max_res:.2e} (≤ 1e-4)"
    ))
}

fn mercer_reconstruction() -> Outcome {
    let grid = Grid::uniform(0.0, 1.0, 257).unwrap();
    let s = analytic_brownian_spectrum(200, &grid).unwrap();
    let nodes = grid.nodes();
    let mut errors = Vec::new();
    for n in [25, 50, 100, 200] {
        let k = partial_kernel(&s, n).unwrap();
        let mut err = 0.0f64;
        for i in 0..nodes.len() {
            for j in 0..nodes.len() {
                err = err.max((k.values[(i, j)] - nodes[i].min(nodes[j])).abs());
            }
        }
        errors.push((n, err, brownian_tail(n)));
    }
    // equality holds at (1, 1); allow roundoff of the 200-term sum
    let (_, err, tail) = errors[3];
    ensure(err <= tail + 1e-13, || {
        format!("N = 200: error {err:e} > tail {tail:e}")
    })?;
    ensure(errors.windows(2).all(|w| w[1].1 < w[0].1), || {
        format!("not decreasing: {errors:?}")
    })?;
    Ok(format!(
        "N=200 error {err:.6e} vs tail {tail:.6e}; errors {}",
        errors
            .iter()
            .map(|e| format!("{:.2e}", e.1))
            .collect::<Vec<_>>()
            .join(" > ")
    ))
}

fn necessity() -> Outcome {
    let grid = Grid::uniform(0.0, 1.0, 257).unwrap();
    let mut summary = Vec::new();
    for k in catalog() {
        let s = nystrom_decompose(&k, &grid, 50, DropTol::default()).map_err(|e| e.to_string())?;
        let n = s.len().min(50);
        let worst = necessity_residuals(&s, &k, n)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min);
        ensure(worst >= -1e-8, || format!("{}: margin {worst:e}", k.name()))?;
        summary.push(format!("{} n≤{n} min margin {worst:.1e}", k.name()));
    }
    Ok(summary.join("; "))
}

fn suite() -> Vec<(&'static str, Spectrum)> {
    let unit = Grid::uniform(0.0, 1.0, 129).unwrap();
    let nystrom = |k: &KernelSpec| nystrom_decompose(k, &unit, 30, DropTol::default()).unwrap();
    let [b, e, se] = catalog();
    vec![
        ("brownian-sine", analytic_brownian_spectrum(60, &unit).unwrap()),
        ("nystrom-brownian", nystrom(&b)),
        ("nystrom-exponential", nystrom(&e)),
        ("nystrom-squared-exponential", nystrom(&se)),
        ("failing-tents", failing_family(12).unwrap()),
        ("passing-tents", passing_family(12).unwrap()),
        (
            "constant",
            constant_spectrum(&Grid::uniform(-1.0, 1.0, 33).unwrap(), 2.0).unwrap(),
        ),
    ]
}

fn uniform_cauchy() -> Outcome {
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for (name, s) in suite() {
        let schedule = gap_schedule(s.len(), 20);
        ensure(schedule.len() == 20, || {
            format!("{name}: schedule of {}", schedule.len())
        })?;
        for (n, m) in schedule {
            let (sup, vn) = sup_gap(&s, n, m).unwrap();
            ensure(sup <= vn + 1e-12, || {
                format!("{name} ({n}, {m}): {sup:e} > {vn:e}")
            })?;
            tightest = tightest.min(vn - sup);
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} (n, m) pairs over 7 spectra, smallest slack {tightest:.1e}"
    ))
}

fn l1_identity() -> Outcome {
    let grid = Grid::uniform(0.0, 1.0, 513).unwrap();
    let brownian = analytic_brownian_spectrum(40, &grid).unwrap();
    let constant = constant_spectrum(&grid, 0.8).unwrap();
    let mut worst = 0.0f64;
    for (name, s) in [("brownian-sine", &brownian), ("constant", &constant)] {
        for (n, m) in gap_schedule(s.len(), 20).into_iter().chain([(s.len(), 0)]) {
            let (quad, _) = l1_gap(s, n, m).unwrap();
            let exact: f64 = s.lambdas().skip(n.min(m)).take(n.max(m) - n.min(m)).sum();
            let err = (quad - exact).abs();
            ensure(err <= 1e-6, || format!("{name} ({n}, {m}): {quad} vs {exact}"))?;
            worst = worst.max(err);
        }
    }
    let (quad, _) = l1_gap(&brownian, 10, 5).unwrap();
    let exact: f64 = (6..=10).map(brownian_lambda).sum();
    ensure((quad - exact).abs() <= 1e-6, || {
        format!("(10, 5): {quad} vs {exact}")
    })?;
    Ok(format!(
        "max |quadrature − Σλ| = {worst:.2e} (≤ 1e-6) on 513 nodes"
    ))
}

fn separation() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    for grid in ["257", "513"] {
        let failing = dir.path().join(format!("failing-{grid}.json"));
        let passing = dir.path().join(format!("passing-{grid}.json"));
        for (family, path) in [("failing", &failing), ("passing", &passing)] {
            let out = klkit(
                &[
                    "counterexample",
                    "--family",
                    family,
                    "--terms",
                    "12",
                    "--grid",
                    grid,
                    "--out",
                    path.to_str().unwrap(),
                ],
                None,
            );
            ensure(exit_code(&out) == 0, || {
                String::from_utf8_lossy(&out.stderr).into_owned()
            })?;
        }

        let out = klkit(
            &["check", "--spectrum", failing.to_str().unwrap(), "--depth", "8"],
            None,
        );
        ensure(exit_code(&out) == 1, || {
            format!("failing family exit {} on {grid} nodes", exit_code(&out))
        })?;
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        let x = r["witness"]["x"].as_f64().unwrap_or(f64::NAN);
        ensure(x.abs() <= 0.25, || format!("witness x = {x}"))?;
        let min_env = r["envelope"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .fold(f64::INFINITY, f64::min);
        ensure(min_env >= 3.0 - 1e-9, || format!("envelope dips to {min_env}"))?;

        let out = klkit(
            &["check", "--spectrum", passing.to_str().unwrap(), "--depth", "36"],
            None,
        );
        ensure(exit_code(&out) == 0, || {
            format!("passing family exit {} on {grid} nodes", exit_code(&out))
        })?;
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        let env = r["envelope"]
            .as_array()
            .unwrap()
            .last()
            .unwrap()
            .as_f64()
            .unwrap();
        let tail = r["tail_bound"].as_f64().unwrap();
        let scale = r["scale"].as_f64().unwrap();
        ensure(env + tail <= 1e-3 * scale, || {
            format!("{env} + {tail} > 1e-3 · {scale}")
        })?;
        notes.push(format!(
            "{grid}: fail@x={x:.4} env≥{min_env:.9}, pass env+tail={:.5e}≤{:.5e}",
            env + tail,
            1e-3 * scale
        ));
    }
    Ok(notes.join("; "))
}

fn discontinuity_witness() -> Outcome {
    let s = failing_family(12).unwrap();
    let v = vn_sequence(&s, 12).unwrap();
    let diag = |x: f64| -> f64 {
        let i = s
            .grid()
            .nodes()
            .iter()
            .position(|&n| n == x)
            .expect("feature point is a node");
        v.row(12)[i]
    };
    let mut smallest_apex = 1.0;
    for n in 2..=13 {
        let apex = 0.5f64.powi(n) + 0.5 * 0.25f64.powi(n + 1);
        let k = diag(apex);
        ensure((k - 3.0).abs() <= 1e-12, || format!("K(a_{n}, a_{n}) = {k}"))?;
        smallest_apex = apex;
    }
    let origin = diag(0.0);
    ensure(origin.abs() <= 1e-12, || format!("K(0, 0) = {origin}"))?;
    Ok(format!(
        "K(a_n, a_n) = 3 for n = 2..13 (a_13 = {smallest_apex:.2e}), K(0, 0) = {origin}"
    ))
}

fn monotonicity() -> Outcome {
    let spectra = suite();
    let mut runner = TestRunner::new(Config {
        cases: 128,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (0..spectra.len(), 1usize..80, -6.0f64..6.0);
    runner
        .run(&strategy, |(which, keep, log_scale)| {
            let s = &spectra[which].1;
            let s = s
                .truncated(keep.min(s.len()))
                .unwrap()
                .scaled(10f64.powf(log_scale))
                .unwrap();
            let v = vn_sequence(&s, s.len()).unwrap();
            for w in v.rows.windows(2) {
                prop_assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
            }
            prop_assert!(v.rows.iter().flatten().all(|&x| x >= 0.0));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("128 random truncations/rescalings of 7 spectra, v_n non-decreasing at every node".into())
}

fn sampling() -> Outcome {
    let constant = constant_spectrum(&Grid::uniform(0.0, 1.0, 5).unwrap(), 1.0).unwrap();
    let e = sample_paths(&constant, 1, 100_000, 7).unwrap();
    let var = empirical_covariance(&e).unwrap().cov[(0, 0)];
    ensure((var - 1.0).abs() <= 0.0134, || format!("rank-one variance {var}"))?;

    let s = analytic_brownian_spectrum(100, &Grid::uniform(0.0, 1.0, 65).unwrap()).unwrap();
    let reference = partial_kernel(&s, 100).unwrap().values;
    let mut rates = Vec::new();
    for seed in 0..5 {
        let e = sample_paths(&s, 100, 20_000, seed).unwrap();
        let z = z_scores(&empirical_covariance(&e).unwrap(), &reference);
        rates.push(z.iter().filter(|&&z| z > 3.0).count() as f64 / z.len() as f64);
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    ensure(mean <= 0.01, || {
        format!("z > 3 in {:.2}% of entries", 100.0 * mean)
    })?;
    Ok(format!(
        "rank-one variance {var:.5} (|·−1| ≤ 0.0134); Brownian z>3 rate {:.3}% (≤ 1%)",
        100.0 * mean
    ))
}

fn round_trip() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let mut worst = 0.0f64;
    for (kernel, extra) in [("brownian", vec![]), ("exponential", vec!["--ell", "0.3"])] {
        let mut args = vec!["decompose", "--kernel", kernel, "--grid", "65", "--terms", "65"];
        args.extend(extra);
        let (spec, gram, kn) = (p("s.json"), p("g.csv"), p("k.csv"));
        args.extend(["--out", &spec, "--gram-out", &gram]);
        let out = klkit(&args, None);
        ensure(exit_code(&out) == 0, || {
            String::from_utf8_lossy(&out.stderr).into_owned()
        })?;
        let out = klkit(&["synthesize", "--spectrum", &spec, "--out", &kn], None);
        ensure(exit_code(&out) == 0, || {
            String::from_utf8_lossy(&out.stderr).into_owned()
        })?;
        let tail = serde_json::from_str::<Value>(&std::fs::read_to_string(&spec).unwrap()).unwrap()
            ["tail_bound"]
            .as_f64()
            .unwrap_or(0.0);
        let (g, k) = (read_csv(Path::new(&gram)), read_csv(Path::new(&kn)));
        let err = g
            .iter()
            .flatten()
            .zip(k.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(err <= tail + 1e-8, || format!("{kernel}: Gram error {err:e}"))?;
        worst = worst.max(err);
    }

    let spec = p("b.json");
    let out = klkit(
        &[
            "counterexample",
            "--family",
            "brownian",
            "--terms",
            "30",
            "--grid",
            "33",
            "--out",
            &spec,
        ],
        None,
    );
    ensure(exit_code(&out) == 0, || "counterexample failed".into())?;
    let sample = [
        "sample",
        "--spectrum",
        spec.as_str(),
        "--paths",
        "2000",
        "--seed",
        "42",
    ];
    let one = klkit(&sample, Some("1"));
    let four = klkit(&sample, Some("4"));
    let again = klkit(&sample, Some("4"));
    ensure(exit_code(&one) == 0 && !one.stdout.is_empty(), || {
        "sample failed".into()
    })?;
    ensure(one.stdout == four.stdout && four.stdout == again.stdout, || {
        "paths differ across thread counts".into()
    })?;
    Ok(format!(
        "Gram error {worst:.2e} (≤ tail + 1e-8); paths bitwise equal for KLKIT_THREADS = 1, 4"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("eigen-oracle accuracy", eigen_oracle),
        ("Mercer reconstruction", mercer_reconstruction),
        ("increment bound (necessity)", necessity),
        ("uniform-Cauchy bound", uniform_cauchy),
        ("L1 identity", l1_identity),
        ("criterion separates the tent families", separation),
        ("discontinuity witness", discontinuity_witness),
        ("monotonicity of v_n", monotonicity),
        ("sampling consistency", sampling),
        ("round trip and determinism", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.1}s]: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.1}s]: {reason}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
