//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use cc_tunnel::matelem::{barrier_matrix_element, field_matrix_element};
use cc_tunnel::model::{channel_energy, integration_domain, Convention, ModelParams};
use cc_tunnel::odeint::IntegratorConfig;
use cc_tunnel::oracle::analytic_single_barrier;
use cc_tunnel::sweep::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn resonance(u: f64) -> ModelParams {
    ModelParams::new(1.0, 1.0, 5.0, 5.0, u)
}

fn sweep(plan: &SweepPlan) -> SweepResult {
    run_sweep(plan, &IntegratorConfig::default()).expect("valid plan")
}

fn reference_sweep(u: f64) -> SweepResult {
    sweep(&SweepPlan::energy_sweep(resonance(u), 1.0, 800))
}

/// Largest value over the samples and the interpolated peak vertices.
fn highest(x: &[f64], y: &[f64]) -> f64 {
    let vertices = find_peaks(x, y, 0.0).into_iter().map(|p| p.height);
    y.iter().copied().filter(|v| v.is_finite()).chain(vertices).fold(f64::NEG_INFINITY, f64::max)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct Sweeps {
    no_field: SweepResult,
    field: SweepResult,
}

fn criterion_1(s: &Sweeps) -> Verdict {
    let r = &s.no_field;
    let x = r.abscissae();
    let same = r.transmission(1, false);
    let peaks = find_peaks(&x, &same, DEFAULT_PROMINENCE);
    let full: Vec<String> = peaks.iter().filter(|p| p.height >= 0.99).map(|p| format!("{:.4}@{:.4}", p.height, p.position)).collect();
    let flip = r
        .series(|p| p.flip.iter().chain(&p.reflection_flip).fold(0.0, |m: f64, v| m.max(v.abs())))
        .into_iter()
        .fold(0.0, f64::max);
    check(
        full.len() >= 2 && flip <= 1e-12 && r.failures() == 0,
        format!("maxima >= 0.99: [{}]; max spin-flip {flip:.1e}", full.join(", ")),
    )
}

fn criterion_2(s: &Sweeps) -> Verdict {
    let r = &s.field;
    let a = peak_analysis(r, DEFAULT_PROMINENCE);
    let top = highest(&r.abscissae(), &r.total_transmission());
    let lowest_split = a.split_pairs.first().filter(|p| p.first == 0);
    let detail = match lowest_split {
        Some(p) => format!(
            "highest maximum {top:.5}; lowest resonance split into {:.5} / {:.5}",
            a.peaks[p.first].position, a.peaks[p.second].position
        ),
        None => format!("highest maximum {top:.5}; lowest resonance not split"),
    };
    check(top < 0.999 && lowest_split.is_some(), detail)
}

/// Window around the lowest resonance only.
fn zoom(u: f64) -> SweepResult {
    let plan = SweepPlan { start: 0.04, ..SweepPlan::energy_sweep(resonance(u), 0.1, 800) };
    sweep(&plan)
}

fn criterion_3() -> Verdict {
    let weak = zoom(0.005);
    let a = peak_analysis(&weak, DEFAULT_PROMINENCE);
    let split = a.split_pairs.first().is_some_and(|p| p.first == 0);
    let positions: Vec<String> = a.peaks.iter().map(|p| format!("{:.5}", p.position)).collect();
    let weaker = zoom(0.001);
    let top = highest(&weaker.abscissae(), &weaker.total_transmission());
    check(
        split && top < 1.0 - 1e-3,
        format!("u=0.005 maxima at [{}] (split: {split}); u=0.001 maximum {top:.5}", positions.join(", ")),
    )
}

fn criterion_4() -> Verdict {
    let u = 0.05;
    let r = sweep(&SweepPlan::energy_sweep(ModelParams::new(1.0, 15.0, 5.0, 3.0, u), 1.0, 800));
    let a = peak_analysis(&r, DEFAULT_PROMINENCE);
    match a.split_pairs.first() {
        Some(p) => {
            let rel = (p.separation - 2.0 * u).abs() / (2.0 * u);
            check(rel <= 0.2, format!("separation {:.5} vs 2u = {:.3} ({:.1}% off)", p.separation, 2.0 * u, 100.0 * rel))
        }
        None => Err("no split pair found".into()),
    }
}

fn criterion_5() -> Verdict {
    let p = ModelParams::new(1.0, 1.0, 7.0, 5.0, 0.05);
    let r = sweep(&SweepPlan::energy_sweep(p.clone(), 1.0, 800));
    let threshold = (channel_energy(&p, 2) - channel_energy(&p, 1)) / p.v0;
    let expected = 3.0 * PI * PI / 49.0;
    let spacing = 1.0 / 800.0;
    let Some(k) = r.points.iter().position(|pt| pt.summary.as_ref().is_ok_and(|s| s.same.len() >= 2)) else {
        return Err("channel 2 never opens".into());
    };
    let first_open = r.points[k].abscissa;
    let y = r.transmission(1, false);
    let jump = (y[k] - y[k - 1]).abs();
    let local: Vec<f64> = (k.saturating_sub(11)..k - 1).chain(k + 1..(k + 11).min(y.len() - 1)).map(|i| (y[i + 1] - y[i]).abs()).collect();
    let variation = median(local);
    check(
        (first_open - expected).abs() <= spacing && (threshold - expected).abs() < 1e-12 && jump > 10.0 * variation,
        format!(
            "threshold {threshold:.5} (3pi^2/49 = {expected:.5}), first open point {first_open:.5}; jump {jump:.4} vs local variation {variation:.2e}"
        ),
    )
}

/// Mean spacing of the zeros of the spin-flip share in `[0.1, 1]`.
fn flip_zero_spacing(b: f64) -> (f64, Vec<f64>) {
    let r = sweep(&SweepPlan::energy_sweep(ModelParams::new(1.0, b, 0.05, 0.05, 0.05), 1.0, 800));
    let x = r.abscissae();
    let share = r.series(|s| s.flip[0] / s.total_transmission);
    let zeros: Vec<f64> = oscillation_zeros(&x, &share, 0.05, 0.5).into_iter().filter(|&z| z >= 0.1).collect();
    let spacing = if zeros.len() >= 2 {
        (zeros[zeros.len() - 1] - zeros[0]) / (zeros.len() - 1) as f64
    } else {
        f64::NAN
    };
    (spacing, zeros)
}

fn criterion_6() -> Verdict {
    let (s100, z100) = flip_zero_spacing(100.0);
    let (s200, z200) = flip_zero_spacing(200.0);
    let ratio = s100 / s200;
    check(
        (ratio - 2.0).abs() <= 0.1,
        format!(
            "spacing ratio {ratio:.4} ({} zeros at b=100, {} at b=200; spacings {s100:.4} / {s200:.4})",
            z100.len(),
            z200.len()
        ),
    )
}

fn criterion_7(s: &Sweeps) -> Verdict {
    let worst = s.no_field.max_unitarity_defect().max(s.field.max_unitarity_defect());
    check(worst <= 1e-6, format!("max unitarity defect {worst:.2e}"))
}

fn criterion_8() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    // (l - d/2 > a), (l - d/2 < a), single-particle limit
    let mut sets = vec![
        ModelParams::new(1.0, 1.0, 5.0, 5.0, 0.05),
        ModelParams::new(1.0, 3.5, 5.0, 3.0, 0.05),
        ModelParams::new(1.0, 1.0, 0.05, 0.05, 0.05),
    ];
    for _ in 0..2 {
        let a = rng.gen_range(0.6..1.4);
        let d = rng.gen_range(3.0..6.0);
        sets.push(ModelParams::new(a, rng.gen_range(0.5..4.0), d, d / 2.0 + a + rng.gen_range(0.2..2.0), rng.gen_range(0.01..0.2)));
        let d = rng.gen_range(3.0..6.0);
        sets.push(ModelParams::new(a, rng.gen_range(0.5..4.0), d, d / 2.0 + rng.gen_range(0.0..0.8) * a, rng.gen_range(0.01..0.2)));
        let s = rng.gen_range(0.02..0.08);
        sets.push(ModelParams::new(a, rng.gen_range(0.5..20.0), s, s, rng.gen_range(0.01..0.2)));
    }
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for p in &sets {
        for c in [Convention::PaperCode, Convention::Derived] {
            let plan = SweepPlan {
                solver: SolverChoice::Both,
                ..SweepPlan::energy_sweep(p.clone().with_convention(c), 1.0, 20)
            };
            for pt in sweep(&plan).points {
                worst = worst.max(pt.oracle_deviation().unwrap_or(f64::INFINITY));
            }
            runs += 1;
        }
    }
    check(worst <= 1e-4, format!("max entrywise deviation {worst:.2e} over {runs} 20-point grids"))
}

fn criterion_9() -> Verdict {
    let r = sweep(&SweepPlan::energy_sweep(ModelParams::new(1.0, 1.0, 0.05, 0.05, 0.0), 1.0, 800));
    let mut worst: f64 = 0.0;
    for (x, t) in r.abscissae().into_iter().zip(r.total_transmission()) {
        if x >= 0.1 {
            let exact = analytic_single_barrier(x, 2.0, 2.0, 1.0, 1.0).unwrap();
            worst = worst.max((t - exact).abs());
        }
    }
    check(worst <= 1e-2, format!("max deviation from the rectangular barrier {worst:.2e}"))
}

fn criterion_10(s: &Sweeps) -> Verdict {
    let fine = run_sweep(&s.no_field.plan, &IntegratorConfig { max_step: 0.06, ..Default::default() }).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in s.no_field.points.iter().zip(&fine.points) {
        worst = worst.max(match (&a.record, &b.record) {
            (Ok(a), Ok(b)) => max_probability_deviation(a, b),
            _ => f64::INFINITY,
        });
    }
    check(worst <= 1e-6, format!("max change at max_step 0.06: {worst:.2e}"))
}

fn criterion_11() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed_0011);
    let samples = 10_000;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let convention = if rng.gen_bool(0.5) { Convention::PaperCode } else { Convention::Derived };
        let p = ModelParams {
            v0: 1.0,
            ..ModelParams::new(
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.0..20.0),
                rng.gen_range(0.05..8.0),
                rng.gen_range(0.0..8.0),
                1.0,
            )
            .with_convention(convention)
        };
        let x = rng.gen_range(-1.2..1.2) * integration_domain(&p).x_right;
        let (i, j) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
        let w = (barrier_matrix_element(i, j, x, &p) - common::barrier_by_quadrature(i, j, x, &p)).abs();
        let f = (field_matrix_element(i, j, x, &p) - common::field_by_quadrature(i, j, x, &p)).abs();
        worst = worst.max(w).max(f);
    }
    check(worst <= 1e-10, format!("max |closed form - quadrature| {worst:.2e} over {samples} samples"))
}

fn main() {
    let started = Instant::now();
    let sweeps = Sweeps {
        no_field: reference_sweep(0.0),
        field: reference_sweep(0.05),
    };
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, "spinless resonances reach full transmission", Box::new(|| criterion_1(&sweeps))),
        (2, "field keeps every maximum below 0.999 and splits the lowest", Box::new(|| criterion_2(&sweeps))),
        (3, "weak-field splitting", Box::new(criterion_3)),
        (4, "split-peak separation close to 2u", Box::new(criterion_4)),
        (5, "second-channel threshold and discontinuity", Box::new(criterion_5)),
        (6, "spin-flip period halves when b doubles", Box::new(criterion_6)),
        (7, "unitarity", Box::new(|| criterion_7(&sweeps))),
        (8, "amplitude equations agree with the transfer-matrix solver", Box::new(criterion_8)),
        (9, "single-particle limit", Box::new(criterion_9)),
        (10, "step-size convergence", Box::new(|| criterion_10(&sweeps))),
        (11, "matrix-element closed forms", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (n, name, run) in &criteria {
        let t = Instant::now();
        let verdict = run();
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS criterion {n}: {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n}: {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
