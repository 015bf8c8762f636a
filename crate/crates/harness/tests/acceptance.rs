//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use nes_core::metrics::{igd, nof, qr, rr, sr, wilcoxon_signed_rank, ObjectiveImage};
use nes_core::suite::{ground_truth, load_suite, suite_entry};
use nes_core::transforms::{RepulsionConfig, RootArchive, DEFAULT_ZETA_CAP};
use nes_core::{expand_individual, parse_problem_file};
use nes_harness::oracle::oracle_roots;
use nes_harness::report::mean_igd_trace;
use nes_harness::{cell_seed, report_json, resolve_problem, run_cell, run_experiment};
use nes_harness::{Algorithm, ExperimentConfig, RunReport, RunSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 1/erf(0.1) to 30 digits.
const INV_ERF_TENTH: f64 = 8.891_819_947_451_958_570_680_400_324_97;

const FUNCTIONS: [&str; 7] = ["F1", "F2", "F3", "F4", "F5", "F6", "F7"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Cells<'a> = BTreeMap<(String, Algorithm), Vec<&'a RunReport>>;

fn group(reports: &[RunReport]) -> Cells<'_> {
    let mut cells: Cells = BTreeMap::new();
    for r in reports {
        cells.entry((r.problem.clone(), r.algorithm)).or_default().push(r);
    }
    cells
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_igd(runs: &[&RunReport]) -> f64 {
    mean(runs.iter().map(|r| r.indicators.igd.unwrap_or(f64::INFINITY)))
}

fn mean_nof(runs: &[&RunReport]) -> f64 {
    mean(runs.iter().map(|r| r.indicators.nof.unwrap_or(0) as f64))
}

fn runs<'a>(cells: &'a Cells, problem: &str, a: Algorithm) -> &'a [&'a RunReport] {
    cells.get(&(problem.to_string(), a)).map_or(&[], |v| v.as_slice())
}

fn table_reproduction(cells: &Cells) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["F1", "F2"] {
        let vr = runs(cells, name, Algorithm::VrMones);
        let mo = runs(cells, name, Algorithm::Mones);
        let every = vr.len() == 30 && vr.iter().all(|r| r.indicators.nof == Some(2));
        let (vi, mi) = (mean_igd(vr), mean_igd(mo));
        let slowest = [vr, mo]
            .iter()
            .map(|c| c.iter().map(|r| r.wall_seconds).sum::<f64>())
            .fold(0.0, f64::max);
        pass &= every && vi <= 1e-3 && mi <= 5e-3 && mo.len() == 30 && slowest < 60.0;
        parts.push(format!(
            "{name}: VR-MONES IGD {vi:.2e} NOF=2 in all runs {every}, MONES IGD {mi:.2e}, slowest cell {slowest:.1}s"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn indicator_ordering(cells: &Cells) -> Outcome {
    let mut better_igd = 0;
    let mut nof_ok = 0;
    for name in FUNCTIONS {
        let vr = runs(cells, name, Algorithm::VrMones);
        let mo = runs(cells, name, Algorithm::Mones);
        if vr.len() == 30 && mo.len() == 30 {
            better_igd += usize::from(mean_igd(vr) < mean_igd(mo));
            nof_ok += usize::from(mean_nof(vr) >= mean_nof(mo));
        }
    }
    outcome(
        better_igd >= 6 && nof_ok == 7,
        format!("lower mean IGD on {better_igd}/7, mean NOF not lower on {nof_ok}/7"),
    )
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn wilcoxon_exactness() -> Outcome {
    let text = match std::fs::read_to_string(fixture_path("mean_igd_f1_f7.csv")) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let pairs: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].trim().parse().unwrap(), f[1].trim().parse().unwrap())
        })
        .collect();
    match wilcoxon_signed_rank(&pairs) {
        Ok(w) => outcome(
            pairs.len() == 7 && w.r_plus == 28.0 && w.r_minus == 0.0 && w.p == 1.5625e-2,
            format!("R+ = {}, R- = {}, p = {:e}", w.r_plus, w.r_minus, w.p),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn multi_root_location(cells: &Cells) -> Outcome {
    let entry = suite_entry("EX9").unwrap();
    let fixture = ground_truth(&entry).unwrap();
    let oracle_agrees = match oracle_roots(&entry.file) {
        Ok((_, roots)) => {
            roots.len() == fixture.len()
                && fixture
                    .iter()
                    .all(|f| roots.iter().any(|r| r.iter().zip(f).all(|(a, b)| (a - b).abs() < 1e-9)))
        }
        Err(_) => false,
    };
    let dr = runs(cells, "EX9", Algorithm::DrJade);
    let good = dr
        .iter()
        .filter(|r| {
            let all_found = r.indicators.found == Some(fixture.len());
            let accurate = fixture.iter().all(|f| {
                r.roots
                    .iter()
                    .any(|root| root.x.iter().zip(f).all(|(a, b)| (a - b).abs() <= 1e-4))
            });
            all_found && accurate
        })
        .count();
    let budget_ok = dr.iter().all(|r| r.budget == 50_000 && r.evaluations <= 50_000);
    outcome(
        dr.len() == 30 && good >= 27 && oracle_agrees && budget_ok,
        format!(
            "all 9 roots within 1e-4 of the reference in {good}/{} runs, oracle reproduces reference {oracle_agrees}",
            dr.len()
        ),
    )
}

const SINGLE_BRANCH: &str = "\
[problem] name=branch vars=2
bounds: x1 in [0, 1]; x2 in [-1, 1]
eq1: x1 - 1 - x2
[reduction]
reduce x1 = 1 ± x2 eliminates eq1
[meta] nor=unknown nfes_max=1000
";

fn reduction_mechanics() -> Outcome {
    let mut failures = Vec::new();

    for name in ["F1", "F2", "F3", "F4"] {
        let e = suite_entry(name).unwrap();
        let (p, s) = (&e.file.problem, e.file.scheme.as_ref().unwrap());
        for r in ground_truth(&e).unwrap() {
            let back = expand_individual(p, s, &s.core_of(&r))
                .iter()
                .any(|c| c.full.iter().zip(&r).all(|(a, b)| (a - b).abs() < 1e-9));
            if !back {
                failures.push(format!("{name} root {r:?} lost through its core"));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for e in load_suite().unwrap() {
        let Some(s) = &e.file.scheme else { continue };
        let p = &e.file.problem;
        let bounds = s.core_bounds(p);
        let eliminated: Vec<usize> = s.eliminated_eqs().collect();
        let mut worst = 0.0f64;
        let mut feasible = 0;
        for k in 0..10_000 {
            // Half the draws shrink toward the centre so narrow feasible regions get sampled.
            let shrink = if k % 2 == 0 { 1.0 } else { rng.random_range(0.0..1.0) };
            let core: Vec<f64> = bounds
                .iter()
                .map(|b| {
                    let mid = 0.5 * (b.lower + b.upper);
                    mid + shrink * (rng.random_range(b.lower..=b.upper) - mid)
                })
                .collect();
            for c in expand_individual(p, s, &core).iter().filter(|c| c.feasible) {
                feasible += 1;
                for &i in &eliminated {
                    worst = worst.max(p.residual(i, &c.full).abs());
                }
            }
        }
        if feasible == 0 || worst >= 1e-9 {
            failures.push(format!("{}: {feasible} feasible, worst eliminated residual {worst:e}", e.name));
        }
    }

    let ex3 = suite_entry("EX3").unwrap();
    let (p, s) = (&ex3.file.problem, ex3.file.scheme.as_ref().unwrap());
    let c = expand_individual(p, s, &[0.0, 0.0]);
    if !(c.len() == 1 && c[0].full == [0.0, 0.0, 3.0] && c[0].feasible) {
        failures.push(format!("EX3 core (0, 0) gave {c:?}"));
    }
    let c = expand_individual(p, s, &[1.0, 1.0]);
    if !(c.len() == 1 && c[0].full == [1.0, 1.0, 5.0] && !c[0].feasible && c[0].clamped == [2]) {
        failures.push(format!("EX3 core (1, 1) gave {c:?}"));
    }
    let f6 = suite_entry("F6").unwrap();
    let c = expand_individual(&f6.file.problem, f6.file.scheme.as_ref().unwrap(), &[0.0, 1.0, 1.0]);
    if !(c.len() == 2 && c[0].full == [1.0, 0.0, 0.0, 1.0, 1.0, 0.0] && c[1].full[0] == -1.0) {
        failures.push(format!("F6 core (0, 1, 1) gave {c:?}"));
    }

    match parse_problem_file(SINGLE_BRANCH) {
        Ok(file) => {
            let c = expand_individual(&file.problem, file.scheme.as_ref().unwrap(), &[1.0]);
            if !(c.len() == 1 && c[0].full == [0.0, 1.0] && c[0].feasible) {
                failures.push(format!("1 ± x2 at x2 = 1 gave {c:?}"));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }

    let detail = if failures.is_empty() {
        "round trip, 10,000 cores per scheme, clamp and branch cases".to_string()
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn repulsion_algebra() -> Outcome {
    let cfg = RepulsionConfig::new(0.1, 200, 0.05, 2.0, DEFAULT_ZETA_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let empty = RootArchive::default();
    let identity = (0..1000).all(|_| {
        let x: Vec<f64> = (0..rng.random_range(1..8)).map(|_| rng.random_range(-10.0..10.0)).collect();
        let g = rng.random_range(0.0..1e3);
        let t = rng.random_range(0..=200);
        cfg.repulsion_value(g, &x, &empty, t).to_bits() == g.to_bits()
    });
    let ends = cfg.gamma_at(0) == Ok(2.0) && cfg.gamma_at(200) == Ok(0.05);
    let z = cfg.zeta(1.0, 2.0);
    outcome(
        identity && ends && (z - INV_ERF_TENTH).abs() < 1e-6,
        format!("identity on empty archive {identity}, radius endpoints {ends}, zeta(0.1, 1, 2) = {z:.12}"),
    )
}

fn brute(ip: &[ObjectiveImage], star: &[ObjectiveImage], eps: f64) -> (f64, usize) {
    let mut total = 0.0;
    let mut hits = 0;
    for s in star {
        let mut best = f64::INFINITY;
        for p in ip {
            let d = ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt();
            if d < best {
                best = d;
            }
        }
        total += best;
        if best <= eps {
            hits += 1;
        }
    }
    (total / star.len() as f64, hits)
}

fn indicator_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut draw = |n: usize| -> Vec<ObjectiveImage> {
        (0..n).map(|_| ObjectiveImage::new(rng.random_range(-1.0..1.0))).collect()
    };
    let mut exact = 0;
    for k in 0..200 {
        let ip = draw(1 + k % 37);
        let star = draw(1 + (k * 7) % 53);
        let eps = 0.001 + (k as f64) * 0.002;
        let (bi, bn) = brute(&ip, &star, eps);
        if igd(&ip, &star).map(f64::to_bits) == Ok(bi.to_bits()) && nof(&ip, &star, eps) == bn {
            exact += 1;
        }
    }
    let rr_v = rr(&[11, 11, 10], 11).unwrap();
    let sr_v = sr(&[true, true, false]).unwrap();
    let problem = parse_problem_file(
        "[problem] name=offset vars=2\nbounds: x1 in [-1, 1]; x2 in [-1, 1]\neq1: x1 - 0.001\neq2: x2 - 0.002\n[meta] nor=unknown nfes_max=1000\n",
    )
    .map(|f| f.problem);
    let qr_v = problem.map(|p| qr(&p, &[vec![0.0, 0.0]])).unwrap_or(f64::NAN);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-15 * b.abs();
    outcome(
        exact == 200 && close(rr_v, 32.0 / 33.0) && close(sr_v, 2.0 / 3.0) && close(qr_v, 5e-6),
        format!("{exact}/200 bit-exact, rr = {rr_v}, sr = {sr_v}, qr = {qr_v:e}"),
    )
}

fn convergence_shape(cells: &Cells) -> Outcome {
    let vr = mean_igd_trace(runs(cells, "F4", Algorithm::VrMones));
    let mo = mean_igd_trace(runs(cells, "F4", Algorithm::Mones));
    if vr.len() < 501 || mo.len() < 501 {
        return outcome(false, "traces shorter than 500 generations");
    }
    let (first, last, other) = (vr[1], vr[500], mo[500]);
    outcome(
        last * 10.0 <= first && last < other,
        format!("VR-MONES {first:.3e} -> {last:.3e}, MONES final {other:.3e}"),
    )
}

fn determinism() -> Outcome {
    let settings = RunSettings::default();
    let cases = [
        ("F1", Algorithm::Mones),
        ("F1", Algorithm::VrMones),
        ("EX9", Algorithm::DrJade),
        ("F1", Algorithm::VrDrJade),
    ];
    let mut same = 0;
    for (name, a) in cases {
        let spec = resolve_problem(name).unwrap();
        let seed = cell_seed(0, name, a, 3);
        let once = run_cell(&spec, a, 3, seed, &settings).map(|r| report_json(&r));
        let twice = run_cell(&spec, a, 3, seed, &settings).map(|r| report_json(&r));
        if matches!((&once, &twice), (Ok(x), Ok(y)) if x == y) {
            same += 1;
        }
    }
    outcome(same == cases.len(), format!("{same}/{} cells byte-identical", cases.len()))
}

fn main() -> ExitCode {
    // The grid needs the MONES pair on F1..F7 and DR-JADE on EX9.
    let parts = [
        (FUNCTIONS.to_vec(), vec![Algorithm::Mones, Algorithm::VrMones]),
        (vec!["EX9"], vec![Algorithm::DrJade]),
    ];
    let mut grid = Vec::new();
    let mut failed = 0;
    for (problems, algorithms) in parts {
        let cfg = ExperimentConfig {
            problems: problems.iter().map(|s| s.to_string()).collect(),
            algorithms,
            runs: 30,
            seed: 0,
            jobs: 1,
            ..ExperimentConfig::default()
        };
        match run_experiment(&cfg) {
            Ok(r) => {
                failed += r.failures.len();
                grid.extend(r.reports);
            }
            Err(e) => {
                eprintln!("experiment failed: {e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} cells failed");
    }
    let cells = group(&grid);

    let results = [
        table_reproduction(&cells),
        indicator_ordering(&cells),
        wilcoxon_exactness(),
        multi_root_location(&cells),
        reduction_mechanics(),
        repulsion_algebra(),
        indicator_oracles(),
        convergence_shape(&cells),
        determinism(),
    ];
    let mut all = true;
    for (i, r) in results.iter().enumerate() {
        all &= r.pass;
        println!("criterion {}: {} - {}", i + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
