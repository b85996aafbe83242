//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the terminal.

use std::process::{Command, ExitCode};
use std::time::Instant;

use meanzero_core::extremal::{certify_equality, Extremal};
use meanzero_core::functional::{
    corollary1_bound, corollary2_bound, lemma1_monotonicity_check, perfetti_bound, theorem1_bound, weighted_integral,
    Quadrature,
};
use meanzero_core::sampling::{campaign, sample_indexed, CampaignOptions, SamplerConfig, Scheme};
use meanzero_core::search::{convergence_study, Strategy};
use meanzero_core::{Bounds, MonotoneWeight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn bounds(m: f64, big: f64) -> Bounds {
    Bounds::new(m, big).expect("valid bounds")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn constants() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in [
        bounds(-1.0, 1.0),
        bounds(-1.0, 2.0),
        bounds(-2.0, 3.0),
        bounds(-0.1, 5.0),
        bounds(-7.0, 0.3),
    ] {
        let h = b.peak();
        let p1 = corollary1_bound(&b, 1.0).map_err(|e| e.to_string())? / h;
        let p2 = corollary1_bound(&b, 2.0).map_err(|e| e.to_string())? / h;
        let e = corollary2_bound(&b) / h;
        for (got, want, what) in [
            (p1, 0.5, "p=1"),
            (p2, 1.0 / 3f64.sqrt(), "p=2"),
            (e, (-1f64).exp(), "1/e"),
        ] {
            let err = rel(got, want);
            worst = worst.max(err);
            ensure(err <= 1e-13, || format!("{what} coefficient {got} vs {want}"))?;
        }
    }
    Ok(format!(
        "coefficients 1/2, 1/sqrt(3), 1/e; worst relative error {worst:.1e}"
    ))
}

fn equality() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in [
        bounds(-1.0, 1.0),
        bounds(-1.0, 2.0),
        bounds(-2.0, 3.0),
        bounds(-0.1, 5.0),
    ] {
        let h = b.peak();
        let weights = [
            MonotoneWeight::power(0.5, h),
            MonotoneWeight::power(1.0, h),
            MonotoneWeight::power(2.0, h),
            MonotoneWeight::power(3.0, h),
            MonotoneWeight::shifted_log(0.0, h),
        ];
        for w in weights {
            let w = w.map_err(|e| e.to_string())?;
            let c = certify_equality(&b, &w).map_err(|e| e.to_string())?;
            worst = worst.max(c.gap_f0.abs()).max(c.gap_f1.abs());
            ensure(c.gap_f0.abs() <= 1e-10 && c.gap_f1.abs() <= 1e-10, || {
                format!(
                    "{w} on ({}, {}): gaps {} / {}",
                    b.lower(),
                    b.upper(),
                    c.gap_f0,
                    c.gap_f1
                )
            })?;
        }
    }
    Ok(format!("20 (bounds, weight) pairs, f0 and f1; worst gap {worst:.1e}"))
}

fn no_violation_campaign() -> Outcome {
    let b = bounds(-1.0, 2.0);
    let h = b.peak();
    let weights = [
        MonotoneWeight::power(1.0, h),
        MonotoneWeight::power(2.0, h),
        MonotoneWeight::shifted_log(0.01, h),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| e.to_string())?;
    let cfg = SamplerConfig::new(64, 20240601, Scheme::VertexJitter).map_err(|e| e.to_string())?;
    let run = |parallel| {
        campaign(
            &b,
            &weights,
            100_000,
            &cfg,
            CampaignOptions {
                include_extremals: false,
                parallel,
            },
        )
        .map_err(|e| e.to_string())
    };
    let start = Instant::now();
    let par = run(true)?;
    let par_time = start.elapsed();
    let ser = run(false)?;
    ensure(par == ser, || "parallel and serial aggregates differ".into())?;
    ensure(par.violations == 0, || {
        let bad: Vec<_> = par
            .checks
            .iter()
            .filter(|c| c.violations > 0)
            .map(|c| c.name.clone())
            .collect();
        format!("{} violations in {bad:?}", par.violations)
    })?;
    Ok(format!(
        "1e5 samples x {} checks, 0 violations, min slack {:.3e}, parallel == serial ({:.1}s)",
        par.checks.len(),
        par.min_slack,
        par_time.as_secs_f64()
    ))
}

fn sharpness() -> Outcome {
    let b = bounds(-1.0, 2.0);
    let w = MonotoneWeight::power(2.0, b.peak()).map_err(|e| e.to_string())?;
    let on = convergence_study(&b, &w, &[3, 6, 12], Strategy::VertexEnum).map_err(|e| e.to_string())?;
    let off = convergence_study(&b, &w, &[4, 8, 16], Strategy::VertexEnum).map_err(|e| e.to_string())?;
    for r in &on.rows {
        ensure(r.gap.abs() <= 1e-10, || format!("n={} on-grid gap {}", r.cells, r.gap))?;
    }
    for r in &off.rows {
        ensure(r.gap > 0.0, || {
            format!("n={} off-grid gap {} not positive", r.cells, r.gap)
        })?;
    }
    ensure(off.rows.windows(2).all(|p| p[1].gap < p[0].gap), || {
        "off-grid gaps not shrinking".into()
    })?;
    let last = off.rows.last().expect("three rows").gap;
    ensure(last <= 0.05 * 4.0 / 27.0, || {
        format!("n=16 gap {last} above 5% of 4/27")
    })?;
    for r in on.rows.iter().chain(&off.rows) {
        ensure(matches!(r.pattern, Some(Extremal::F0 | Extremal::F1)), || {
            format!("n={} maximizer is not a discretized extremal", r.cells)
        })?;
    }
    let gaps: Vec<String> = off.rows.iter().map(|r| format!("{:.2e}", r.gap)).collect();
    Ok(format!("on-grid gaps <= 1e-10; off-grid gaps {}", gaps.join(" > ")))
}

fn lemma() -> Outcome {
    let t = 1.0;
    let weights = [
        MonotoneWeight::power(0.5, t),
        MonotoneWeight::power(1.0, t),
        MonotoneWeight::power(2.0, t),
        MonotoneWeight::power(5.0, t),
        MonotoneWeight::shifted_log(0.0, t),
        MonotoneWeight::shifted_log(0.01, t),
        MonotoneWeight::shifted_log(1.0, t),
    ];
    for w in weights {
        let w = w.map_err(|e| e.to_string())?;
        let r = lemma1_monotonicity_check(&w, t, 100).map_err(|e| e.to_string())?;
        ensure(r.passed() && !r.constant_plateau, || {
            format!("{w}: {} violations", r.violations)
        })?;
    }
    let flat = MonotoneWeight::table(&[(0.0, 2.0), (1.0, 2.0)]).map_err(|e| e.to_string())?;
    let r = lemma1_monotonicity_check(&flat, t, 100).map_err(|e| e.to_string())?;
    ensure(r.passed() && r.constant_plateau, || {
        "constant table not reported as a passing plateau".into()
    })?;
    Ok("7 weights monotone on 100-point grids; constant table flagged as plateau".into())
}

fn dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..1000 {
        let m = -10f64.powf(rng.random_range(-3.0..3.0));
        let big = 10f64.powf(rng.random_range(-3.0..3.0));
        let b = bounds(m, big);
        let w = MonotoneWeight::power(2.0, b.peak()).map_err(|e| e.to_string())?;
        let ours = theorem1_bound(&b, &w).map_err(|e| e.to_string())?;
        let theirs = perfetti_bound(&b);
        ensure(ours <= theirs, || format!("({m}, {big}): {ours} > {theirs}"))?;
        min_ratio = min_ratio.min(theirs / ours);
    }
    Ok(format!(
        "1000 random (m, M); smallest perfetti/theorem1 ratio {min_ratio:.3}"
    ))
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let b = bounds(-rng.random_range(0.1..5.0), rng.random_range(0.1..5.0));
        let scheme = if i % 2 == 0 {
            Scheme::UniformProject
        } else {
            Scheme::VertexJitter
        };
        let cells = rng.random_range(2..48);
        let cfg = SamplerConfig::new(cells, 99, scheme).map_err(|e| e.to_string())?;
        let f = sample_indexed(&b, &cfg, i);
        let j = f.primitive();
        let p = rng.random_range(0.25..6.0);
        let w = MonotoneWeight::power(p, b.peak()).map_err(|e| e.to_string())?;
        let exact = weighted_integral(&j, &w, Quadrature::ClosedForm).map_err(|e| e.to_string())?;
        let adaptive = weighted_integral(&j, &w, Quadrature::Adaptive).map_err(|e| e.to_string())?;
        let err = if exact == 0.0 {
            adaptive.abs()
        } else {
            rel(adaptive, exact)
        };
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("function {i}, p = {p}: {adaptive} vs {exact}"))?;
    }
    Ok(format!(
        "100 random functions and exponents; worst relative difference {worst:.1e}"
    ))
}

fn determinism() -> Outcome {
    let args = [
        "verify",
        "--m",
        "-1",
        "--M",
        "2",
        "--phi",
        "pow:1",
        "--phi",
        "pow:2",
        "--phi",
        "log:0.01",
        "--samples",
        "5000",
        "--cells",
        "64",
        "--seed",
        "11",
    ];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_meanzero"))
            .args(args)
            .env_remove("MEANZERO_THREADS")
            .output()
            .map_err(|e| e.to_string())
    };
    let first = run()?;
    let second = run()?;
    ensure(first.status.success() && second.status.success(), || {
        format!("verify failed: {}", String::from_utf8_lossy(&first.stderr))
    })?;
    ensure(first.stdout == second.stdout, || "reports differ between runs".into())?;
    Ok(format!(
        "two verify runs, {} identical report bytes",
        first.stdout.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("constant reproduction", constants),
        ("equality attainment", equality),
        ("no-violation campaign", no_violation_campaign),
        ("sharpness convergence", sharpness),
        ("lemma monotonicity", lemma),
        ("dominance over perfetti", dominance),
        ("quadrature oracle agreement", oracle_agreement),
        ("report determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
