//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

use cornerlab::baseline::{behrend_set, diagonal_lift};
use cornerlab::construction::{draw_direction, draw_offset};
use cornerlab::radius::{
    best_bin, exact_radius, sample_conditional_point, second_moment_check, select_radius_mc,
    NormSqDistribution, DEFAULT_GRID_POINTS, SECOND_MOMENT,
};
use cornerlab::rng::substream;
use cornerlab::torus::{check_psi_iso, in_slab, phi_step, wrap, GPoint, TorusValue, IDENTITY_TOL};
use cornerlab::{build_set, find_3ap, find_corner, is_corner_free, AnnulusSpec, GridSet};
use cornerlab_cli::commands::{build, verify_text, BuildOptions};
use cornerlab_cli::SetFile;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within_time(start: Instant, limit: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    ensure!(took < limit, "{detail}; took {took:.1?}, limit {limit:?}");
    Ok(format!("{detail} ({took:.1?})"))
}

/// Circular distance between two lifts.
fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

fn ac1_lemmas() -> Outcome {
    let start = Instant::now();
    const TRIALS: usize = 1_000_000;
    let mut rng = substream(1, 0xac1, 0);
    let mut unit = move || wrap(rng.random::<f64>()).unwrap();

    let mut psi_ok = 0;
    while psi_ok < TRIALS {
        let p = GPoint::new(unit(), unit());
        let (a, b) = (unit(), unit());
        if p.shift(a, b).in_s() && p.shift(b, a).in_s() {
            ensure!(check_psi_iso(p, a, b), "psi iso fails at {p:?} {a:?} {b:?}");
            let gap = (p.shift(a, b).psi() - p.shift(b, a).psi()).abs();
            ensure!(gap <= IDENTITY_TOL, "psi gap {gap}");
            psi_ok += 1;
        }
    }

    let mut phi_ok = 0;
    while phi_ok < TRIALS {
        let p = GPoint::new(unit(), unit());
        let a = unit();
        let right = p.shift(a, TorusValue::ZERO);
        let up = p.shift(TorusValue::ZERO, a);
        if !(right.in_s() && up.in_s()) {
            continue;
        }
        let step_r = right.phi() - p.phi();
        let step_u = p.phi() - up.phi();
        ensure!(
            (step_r - step_u).abs() <= IDENTITY_TOL,
            "phi steps {step_r} vs {step_u}"
        );
        let delta = phi_step(p, a).map_err(|e| e.to_string())?;
        ensure!(
            (delta - step_r).abs() <= IDENTITY_TOL,
            "Delta {delta} vs {step_r}"
        );
        ensure!(
            circ(wrap(delta).unwrap().lift(), a.lift()) <= IDENTITY_TOL,
            "wrap(Delta) != alpha"
        );
        ensure!(
            a.norm() <= delta.abs() + IDENTITY_TOL,
            "||alpha|| > |Delta|"
        );
        phi_ok += 1;
    }

    // theta = (3/4, 1/4), alpha = x in (1/4, 3/4)
    let p = GPoint::from_reals(0.75, 0.25).unwrap();
    for i in 1..1000 {
        let x = 0.25 + 0.5 * i as f64 / 1000.0;
        let a = wrap(x).unwrap();
        let step_r = p.shift(a, TorusValue::ZERO).phi() - p.phi();
        let step_u = p.phi() - p.shift(TorusValue::ZERO, a).phi();
        ensure!(
            (step_r - (x - 1.0)).abs() < 1e-12,
            "right step {step_r} != x - 1 at x={x}"
        );
        ensure!((step_u - x).abs() < 1e-12, "up step {step_u} != x at x={x}");
        ensure!(
            phi_step(p, a).is_err(),
            "precondition unexpectedly holds at x={x}"
        );
    }
    within_time(
        start,
        Duration::from_secs(30),
        format!(
            "{psi_ok} psi-iso + {phi_ok} phi-step trials, wrap-around mismatch x-1 vs x reproduced"
        ),
    )
}

fn ac2_small_steps() -> Outcome {
    let start = Instant::now();
    let n = 64usize;
    let dists: BTreeMap<usize, NormSqDistribution> = [2, 3]
        .into_iter()
        .map(|d| (d, NormSqDistribution::new(d, DEFAULT_GRID_POINTS).unwrap()))
        .collect();
    let mut corners = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..100u64 {
        let d = 2 + (trial % 2) as usize;
        let mut rng = substream(trial, 0xac2, 0);
        let delta = rng.random_range(0.05..0.3);
        let r = best_bin(&dists[&d], delta).r;
        let spec = AnnulusSpec::new(r, delta).unwrap();
        let theta = draw_direction(d, &mut rng);
        let mu = draw_offset(d, &mut rng);
        let a = build_set(n, &spec, &theta, &mu).unwrap();
        for (x, y) in a.iter() {
            for step in -(n as i64)..=n as i64 {
                if step == 0 || !a.contains(x + step, y) || !a.contains(x, y + step) {
                    continue;
                }
                corners += 1;
                let s: f64 = theta.0.iter().map(|t| t.scale(step).norm().powi(2)).sum();
                worst = worst.max(s - spec.threshold());
                ensure!(
                    s <= spec.threshold() + 1e-9,
                    "trial {trial}: corner ({x},{y},{step}) has sum {s} > 2 r delta = {}",
                    spec.threshold()
                );
            }
        }
    }
    ensure!(corners > 0, "no annulus corners were exercised");
    within_time(
        start,
        Duration::from_secs(60),
        format!("{corners} annulus corners, max(sum - 2 r delta) = {worst:.3e}"),
    )
}

#[derive(Debug, Clone)]
struct Run {
    n: usize,
    size: usize,
    volume: f64,
    trial_sizes: Vec<usize>,
}

fn ac3_corner_free(runs: &mut Vec<Run>) -> Outcome {
    let start = Instant::now();
    for n in [64, 128, 256, 512, 1024] {
        for d in 2..=6 {
            for seed in 0..3 {
                let mut o = BuildOptions::new(n);
                o.d = Some(d);
                o.seed = seed;
                let built = build(&o).map_err(|e| format!("n={n} d={d} seed={seed}: {e}"))?;
                let text = built.file.to_json();
                let back = SetFile::parse(&text).map_err(|e| e.to_string())?;
                ensure!(
                    back == built.file,
                    "file round trip changed n={n} d={d} seed={seed}"
                );
                let report = verify_text(&text).map_err(|e| e.to_string())?;
                ensure!(
                    report.witness.is_none(),
                    "corner {:?} at n={n} d={d} seed={seed}",
                    report.witness
                );
                let c = &built.construction;
                runs.push(Run {
                    n,
                    size: c.set.len(),
                    volume: c.estimate.volume,
                    trial_sizes: c.trial_sizes.clone(),
                });
            }
        }
    }
    within_time(
        start,
        Duration::from_secs(600),
        format!("{} builds, all corner-free", runs.len()),
    )
}

fn ac4_measures() -> Outcome {
    let start = Instant::now();
    let samples = 1_000_000u64;
    let mut rng = substream(4, 0xac4, 0);
    let hits = (0..samples)
        .filter(|_| in_slab(rng.random(), rng.random()))
        .count() as f64;
    let p = hits / samples as f64;
    let sigma = (0.75f64 * 0.25 / samples as f64).sqrt();
    ensure!(
        (p - 0.75).abs() <= 4.0 * sigma,
        "S-measure {p} vs 3/4 (sigma {sigma:.2e})"
    );

    // Var(phi^2) = E phi^4 - (5/24)^2 with E phi^4 from the trapezoidal density.
    let fourth = 2.0
        * (2.0 / 3.0 * 0.5f64.powi(5) / 5.0
            + 4.0 / 3.0 * ((1.0 - 0.5f64.powi(5)) / 5.0 - (1.0 - 0.5f64.powi(6)) / 6.0));
    let m = second_moment_check(samples, 4).map_err(|e| e.to_string())?;
    let sigma_m = ((fourth - SECOND_MOMENT * SECOND_MOMENT) / samples as f64).sqrt();
    ensure!(
        (m.mean - SECOND_MOMENT).abs() <= 4.0 * sigma_m,
        "second moment {} vs 5/24 (sigma {sigma_m:.2e})",
        m.mean
    );

    let floor = 1.0 - 2.0 * (-2.0f64).exp();
    let mut fracs = Vec::new();
    for d in [4usize, 8, 16] {
        let mut rng = substream(d as u64, 0xac4, 1);
        let trials = 200_000;
        let inside = (0..trials)
            .filter(|_| {
                let sq: f64 = (0..d)
                    .map(|_| sample_conditional_point(&mut rng).phi().powi(2))
                    .sum();
                (sq - 5.0 * d as f64 / 24.0).abs() <= (d as f64).sqrt()
            })
            .count() as f64
            / trials as f64;
        ensure!(
            inside >= floor,
            "D={d}: concentration mass {inside} < {floor}"
        );
        fracs.push(format!("D={d}:{inside:.4}"));
    }
    within_time(
        start,
        Duration::from_secs(120),
        format!(
            "S-measure {p:.5}, E[phi^2|S] {:.5} (5/24 = {SECOND_MOMENT:.5}), concentration {} >= {floor:.3}",
            m.mean,
            fracs.join(" ")
        ),
    )
}

fn ac5_radius_oracles() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (d, delta) in [(1usize, 0.5), (3, 0.1), (6, 0.05)] {
        let mc = select_radius_mc(d, delta, 1_000_000, 5).map_err(|e| e.to_string())?;
        let ex = exact_radius(d, delta, DEFAULT_GRID_POINTS).map_err(|e| e.to_string())?;
        let gap = (mc.conditional_mass - ex.conditional_mass).abs();
        ensure!(
            gap <= 3.0 * mc.std_error,
            "D={d} delta={delta}: mc {} (r={}) vs exact {} (r={}), 3 sigma = {:.2e}",
            mc.conditional_mass,
            mc.r,
            ex.conditional_mass,
            ex.r,
            3.0 * mc.std_error
        );
        notes.push(format!("D={d}: |gap|={:.2} sigma", gap / mc.std_error));
    }
    let ex = exact_radius(1, 0.5, DEFAULT_GRID_POINTS).map_err(|e| e.to_string())?;
    ensure!(
        (ex.conditional_mass - 2.0 / 3.0).abs() <= 1e-3,
        "D=1 exact {}",
        ex.conditional_mass
    );
    within_time(
        start,
        Duration::from_secs(120),
        format!(
            "{}; D=1 exact mass {:.6}",
            notes.join(", "),
            ex.conditional_mass
        ),
    )
}

fn ac6_size_law(runs: &[Run]) -> Outcome {
    ensure!(!runs.is_empty(), "no runs from the corner-freeness grid");
    let good = runs
        .iter()
        .filter(|r| r.size as f64 >= 0.5 * (r.n * r.n) as f64 * r.volume)
        .count();
    let frac = good as f64 / runs.len() as f64;
    ensure!(
        frac >= 0.9,
        "best-of-8 floor met in only {good}/{} runs",
        runs.len()
    );

    // Every single trial has mean N^2 Vol; pool the normalized sizes.
    let normalized: Vec<f64> = runs
        .iter()
        .flat_map(|r| {
            let expect = (r.n * r.n) as f64 * r.volume;
            r.trial_sizes.iter().map(move |&s| s as f64 / expect)
        })
        .collect();
    let k = normalized.len() as f64;
    let mean = normalized.iter().sum::<f64>() / k;
    let var = normalized.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let se = (var / k).sqrt();
    ensure!(
        (mean - 1.0).abs() <= 3.0 * se,
        "single-trial mean / (N^2 Vol) = {mean:.4}, standard error {se:.4}"
    );
    Ok(format!(
        "best-of-8 >= 0.5 N^2 Vol in {good}/{} runs; mean single trial / (N^2 Vol) = {mean:.4} +- {se:.4} over {} trials",
        runs.len(),
        normalized.len()
    ))
}

fn naive_corner_exists(s: &GridSet) -> bool {
    let n = s.side() as i64;
    (1..=n).any(|x| {
        (1..=n).any(|y| {
            (-n..=n)
                .any(|d| d != 0 && s.contains(x, y) && s.contains(x + d, y) && s.contains(x, y + d))
        })
    })
}

fn ac7_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = substream(7, 0xac7, 0);
    let mut with_corner = 0;
    for _ in 0..100 {
        let density: f64 = rng.random_range(0.02..0.5);
        let pts: Vec<(i64, i64)> = (1..=12)
            .flat_map(|x| (1..=12).map(move |y| (x, y)))
            .filter(|_| rng.random::<f64>() < density)
            .collect();
        let s = GridSet::from_points(12, pts).unwrap();
        let fast = find_corner(&s).is_some();
        ensure!(
            fast == naive_corner_exists(&s),
            "disagreement on {:?}",
            s.points_xy()
        );
        with_corner += fast as usize;
    }
    let mut with_ap = 0;
    for _ in 0..100 {
        let density: f64 = rng.random_range(0.02..0.3);
        let xs: BTreeSet<i64> = (1..=64).filter(|_| rng.random::<f64>() < density).collect();
        let v: Vec<i64> = xs.iter().copied().collect();
        let oracle = v.iter().any(|&a| {
            v.iter()
                .any(|&c| a < c && (a + c) % 2 == 0 && xs.contains(&((a + c) / 2)))
        });
        let fast = find_3ap(&v).is_some();
        ensure!(fast == oracle, "3-AP disagreement on {v:?}");
        with_ap += fast as usize;
    }
    within_time(
        start,
        Duration::from_secs(60),
        format!("100 grids ({with_corner} with corners), 100 sets ({with_ap} with 3-APs) agree"),
    )
}

fn ac8_baseline(runs: &[Run]) -> Outcome {
    let start = Instant::now();
    for m in 1..=512u64 {
        let s = behrend_set(m);
        ensure!(
            s.iter().all(|&v| v >= 1 && v as u64 <= m),
            "behrend({m}) leaves [1, m]"
        );
        ensure!(
            find_3ap(&s).is_none(),
            "behrend({m}) has a 3-AP: {:?}",
            find_3ap(&s)
        );
    }
    let mut table = Vec::new();
    for n in [64usize, 256, 1024] {
        let file = cornerlab_cli::commands::baseline_file(n).map_err(|e| e.to_string())?;
        let lifted = file.to_grid().map_err(|e| e.to_string())?;
        ensure!(
            is_corner_free(&lifted),
            "baseline lift at n={n} has a corner"
        );
        let torus = runs
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.size)
            .max()
            .unwrap_or(0);
        table.push(format!(
            "n={n}: behrend {:.4} vs torus {:.4}",
            lifted.len() as f64 / (n * n) as f64,
            torus as f64 / (n * n) as f64
        ));
    }
    let s = behrend_set(200);
    let offsets: Vec<i64> = s.iter().map(|v| v - 100).collect();
    ensure!(
        is_corner_free(&diagonal_lift(&offsets, 101).unwrap()),
        "direct lift has a corner"
    );
    within_time(
        start,
        Duration::from_secs(120),
        format!("densities {}", table.join("; ")),
    )
}

fn run_cli(threads: &str, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cornerlab"))
        .env("CORNERLAB_THREADS", threads)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(out.stdout)
}

fn ac9_determinism() -> Outcome {
    let start = Instant::now();
    let cases: [&[&str]; 4] = [
        &["build", "--n", "256", "--d", "4", "--seed", "2"],
        &[
            "build",
            "--n",
            "128",
            "--radius-mode",
            "exact",
            "--seed",
            "5",
        ],
        &["baseline", "--n", "200"],
        &[
            "sweep",
            "--n-list",
            "64,256",
            "--seeds",
            "2",
            "--with-baseline",
        ],
    ];
    let mut bytes = 0;
    for args in cases {
        let a = run_cli("1", args)?;
        let b = run_cli("4", args)?;
        let c = run_cli("4", args)?;
        ensure!(!a.is_empty(), "{args:?} wrote nothing");
        ensure!(
            a == b && b == c,
            "{args:?} differs across runs or thread counts"
        );
        bytes += a.len();
    }
    within_time(
        start,
        Duration::from_secs(300),
        format!(
            "{} commands byte-identical at 1 and 4 threads ({bytes} bytes)",
            cases.len()
        ),
    )
}

fn main() {
    let mut runs = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("AC1 lemma suite", ac1_lemmas()),
        ("AC2 annulus corners have small steps", ac2_small_steps()),
        ("AC3 corner-freeness grid", ac3_corner_free(&mut runs)),
        ("AC4 measure checks", ac4_measures()),
        ("AC5 radius oracles", ac5_radius_oracles()),
        ("AC6 size law", ac6_size_law(&runs)),
        ("AC7 oracle equivalence", ac7_oracles()),
        ("AC8 baseline", ac8_baseline(&runs)),
        ("AC9 determinism", ac9_determinism()),
    ];

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
