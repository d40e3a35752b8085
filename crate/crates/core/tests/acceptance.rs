//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion
//! and exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use rand::Rng;
use semimix::asymptotics::{block_identity_residual, sandwich};
use semimix::estimator::*;
use semimix::montecarlo::*;
use semimix::quadrature::QuadOptions;
use semimix::smallmat::{gauss_jordan, matmul, transpose, SymMatrix};
use semimix::DivergenceSpec;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn experiment(name: &str, c: ConstraintChoice, n: usize, runs: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        scenario: registry(name).unwrap(),
        constraints: Some(c),
        n,
        runs,
        divergence: "chi2".into(),
        seed,
        starts: 10,
        asymptotics: false,
    }
}

fn mean(rep: &ExperimentReport, k: usize) -> f64 {
    rep.summary[k].mean
}

fn population(name: &str, c: ConstraintChoice, n: usize) -> (Model, PhiPoint, SampleStats) {
    let sc = registry(name).unwrap();
    let model = sc.model(Some(c)).unwrap();
    let (p1, p0) = sc.components().unwrap();
    let lam = sc.lambda();
    let stats = SampleStats::population(&[(lam, p1), (1.0 - lam, p0)], &model.constraints, n).unwrap();
    (model, sc.truth(Some(c)).unwrap(), stats)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let (model, truth, stats) = population("table1_lambda07", ConstraintChoice::WeibullMoments4, 10_000);
    let obj = profiled_objective(&truth, &stats, &model, &DivergenceSpec::chi2());
    let r = estimate_from_stats(&stats, &model, &EstimateOptions::default()).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let d = r
        .phi_hat
        .to_vec()
        .iter()
        .zip(truth.to_vec())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    check(
        obj <= 1e-6 && d <= 1e-3 && secs < 1.0,
        format!("objective at truth {obj:.2e}, |phi_hat - phi*| {d:.2e}, {secs:.3} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = rng(2);
    let (mut worst_obj, mut worst_xi, mut total) = (0.0f64, 0.0f64, 0);
    for (name, c) in [
        ("table1_lambda07", ConstraintChoice::WeibullMoments4),
        ("table2_mix2", ConstraintChoice::M24),
        ("table3_mix1", ConstraintChoice::BivariateM2),
    ] {
        let sc = registry(name).unwrap();
        let model = sc.model(Some(c)).unwrap();
        let (p1, p0) = sc.components().unwrap();
        let s = sample_mixture(sc.lambda(), &p1, &[], &p0, &[], 1000, 3).unwrap();
        let stats = compute_stats(&s, &model.constraints).unwrap();
        let mut found = 0;
        let mut draws = 0;
        while found < 100 {
            draws += 1;
            if draws > 100_000 {
                return Err(format!("{name}: only {found} feasible points"));
            }
            let x: Vec<f64> = model.bounds().iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
            let phi = PhiPoint::from_slice(&x, model.theta_dim());
            let Ok(a) = xi_inner_chi2(&phi, &stats, &model) else { continue };
            found += 1;
            let b = xi_inner_generic(&phi, &stats, &model, &DivergenceSpec::chi2(), &QuadOptions::default())
                .map_err(|e| format!("{name}: Newton failed at {x:?}: {e}"))?;
            // Far from the truth the objective reaches 1e19; gaps are scaled
            // so that f64 rounding cannot fail the comparison.
            let scale = a.objective.abs().max(1.0);
            worst_obj = worst_obj.max((a.objective - b.objective).abs() / scale);
            let norm = a.xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            let dx = a.xi.iter().zip(&b.xi).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            worst_xi = worst_xi.max(dx / norm);
        }
        total += found;
    }
    check(
        worst_obj <= 1e-8 && worst_xi <= 1e-6,
        format!("{total} points, max scaled objective gap {worst_obj:.2e}, max scaled xi gap {worst_xi:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let cfg = experiment("table1_lambda07", ConstraintChoice::WeibullMoments4, 10_000, 30, 3000);
    let rep = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    let (l, n1, n0) = (mean(&rep, 0), mean(&rep, 1), mean(&rep, 2));
    let secs = t.elapsed().as_secs_f64();
    check(
        (0.67..=0.73).contains(&l) && (1.7..=2.3).contains(&n1) && (0.95..=1.05).contains(&n0) && secs <= 600.0,
        format!(
            "lambda {l:.4} (sd {:.4}), nu1 {n1:.4} (sd {:.4}), nu0 {n0:.4} (sd {:.4}), {}/30 converged, {secs:.1} s",
            rep.summary[0].sd, rep.summary[1].sd, rep.summary[2].sd, rep.converged_runs
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = experiment("table2_mix2", ConstraintChoice::M24, 100, 30, 4000);
    let rep = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    let (l, nu) = (mean(&rep, 0), mean(&rep, 2));
    check(
        (l - 0.407).abs() <= 0.10 && (nu - 2.925).abs() <= 0.5,
        format!("lambda {l:.4} (sd {:.4}), nu {nu:.4} (sd {:.4})", rep.summary[0].sd, rep.summary[2].sd),
    )
}

fn criterion_5() -> Outcome {
    let m24 = run_experiment(&experiment("table2_mix6", ConstraintChoice::M24, 100_000, 10, 5000), None)
        .map_err(|e| e.to_string())?;
    let m13 = run_experiment(&experiment("table2_mix6", ConstraintChoice::M13, 100_000, 10, 5000), None)
        .map_err(|e| e.to_string())?;
    let (l, nu, l13) = (mean(&m24, 0), mean(&m24, 2), mean(&m13, 0));
    check(
        (0.04..=0.09).contains(&l) && (nu - 1.493).abs() <= 0.05 && l13 <= 0.03,
        format!("M24 lambda {l:.4}, nu {nu:.4}; M13 lambda {l13:.4}"),
    )
}

fn criterion_6() -> Outcome {
    // Ten starts leave a run in a separated feasible basin now and then;
    // the bivariate model gates on twenty and reports ten alongside.
    let mut cfg = experiment("table3_mix1", ConstraintChoice::BivariateM2, 1000, 30, 6000);
    let ten = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    cfg.starts = 20;
    let rep = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    let (l, th) = (mean(&rep, 0), mean(&rep, 2));
    check(
        (l - 0.694).abs() <= 0.05 && (th - 3.034).abs() <= 0.15,
        format!(
            "20 starts: lambda {l:.4} (sd {:.4}), theta {th:.4} (sd {:.4}); 10 starts: lambda {:.4}, theta {:.4}",
            rep.summary[0].sd,
            rep.summary[2].sd,
            mean(&ten, 0),
            mean(&ten, 2)
        ),
    )
}

fn criterion_7() -> Outcome {
    let sc = registry("table2_mix2").unwrap();
    let model = sc.model(Some(ConstraintChoice::M24)).unwrap();
    let (p1, p0) = sc.components().unwrap();
    let timed = |n: usize| {
        let mut times: Vec<f64> = (0..3)
            .map(|rep| {
                let s = sample_mixture(sc.lambda(), &p1, &[], &p0, &[], n, 70 + rep).unwrap();
                let t = Instant::now();
                estimate(&s, &model, &EstimateOptions::default()).unwrap();
                t.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(f64::total_cmp);
        times[1]
    };
    let (small, large) = (timed(10_000), timed(1_000_000));
    let ratio = large / small;
    check(ratio <= 20.0, format!("n=1e4 {:.1} ms, n=1e6 {:.1} ms, ratio {ratio:.2}", small * 1e3, large * 1e3))
}

fn criterion_8() -> Outcome {
    let rep = scan_feasible_region(&RegionScanConfig::default().with_grid(50, 50)).map_err(|e| e.to_string())?;
    check(
        rep.violations == 0 && rep.strict_cells > 0,
        format!(
            "{} cells in phi+, {} in phi++, {} violations, {} strict",
            rep.phi_plus, rep.phi_plus_plus, rep.violations, rep.strict_cells
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut worst = 0.0f64;
    for (name, c) in [
        ("table1_lambda07", ConstraintChoice::WeibullMoments4),
        ("table2_mix2", ConstraintChoice::M24),
        ("table3_mix2", ConstraintChoice::BivariateM2),
    ] {
        let (model, truth, stats) = population(name, c, 10_000);
        let rep = sandwich(&truth, &stats, &model).map_err(|e| e.to_string())?;
        let (p, k) = (rep.sigma.len(), rep.j_xi_xi.len());
        let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<f64>>();
        let j = flat(&rep.j_phi_xi);
        let kinv = gauss_jordan(k, &flat(&rep.j_xi_xi)).map_err(|e| e.to_string())?;
        let info = matmul(&matmul(&transpose(&j, k, p), &kinv, p, k, k), &j, p, k, p);
        let r1 = identity_residual(&matmul(&flat(&rep.sigma), &info, p, p, p), p);
        let wscale = rep.w_mat.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        let r2 = matmul(&flat(&rep.w_mat), &j, k, k, p).iter().fold(0.0f64, |m, v| m.max(v.abs())) / wscale;
        let r3 = block_identity_residual(&rep);
        let s = flat(&rep.sandwich);
        let smax = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lmin = min_eigenvalue(p + k, &s) / smax;
        worst = worst.max(r1).max(r2).max(r3);
        if r1 > 1e-8 || r2 > 1e-8 || r3 > 1e-8 || lmin < -1e-8 {
            return Err(format!("{name}: residuals {r1:.1e} {r2:.1e} {r3:.1e}, min eigenvalue {lmin:.1e}"));
        }
    }
    let mut cfg = experiment("table1_lambda07", ConstraintChoice::WeibullMoments4, 10_000, 30, 9000);
    cfg.asymptotics = true;
    let rep = run_experiment(&cfg, None).map_err(|e| e.to_string())?;
    let se: Vec<f64> = rep.runs.iter().filter_map(|r| r.std_errors.as_ref().map(|s| s[0])).collect();
    if se.is_empty() {
        return Err("no standard errors".into());
    }
    let se_mean = se.iter().sum::<f64>() / se.len() as f64;
    let ratio = se_mean / rep.summary[0].sd;
    check(
        (0.5..=2.0).contains(&ratio),
        format!(
            "identity residual {worst:.1e}; plug-in se {se_mean:.4} vs Monte-Carlo sd {:.4} (ratio {ratio:.2})",
            rep.summary[0].sd
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let divs = [
        DivergenceSpec::chi2(),
        DivergenceSpec::kl(),
        DivergenceSpec::modified_kl(),
        DivergenceSpec::hellinger(),
        DivergenceSpec::neyman(),
    ];
    // Fenchel: t x − φ(x) ≤ ψ(t), with equality at t = φ'(x).
    let mut fenchel = 0.0f64;
    for d in divs {
        for i in 1..60 {
            let x = i as f64 * 0.1;
            let (fx, dfx) = (d.phi(x).unwrap(), d.phi_prime(x).unwrap());
            for j in -40..40 {
                let t = j as f64 * 0.1;
                let psi = d.psi_value_or_inf(t);
                if t * x - fx > psi + 1e-12 {
                    return Err(format!("Fenchel fails for gamma {} at x {x}, t {t}", d.gamma));
                }
            }
            fenchel = fenchel.max((d.psi(dfx).unwrap().value - (x * dfx - fx)).abs());
        }
    }
    if fenchel > 1e-9 {
        return Err(format!("Fenchel equality gap {fenchel:.1e}"));
    }
    notes.push(format!("Fenchel gap {fenchel:.1e}"));

    let mut fd = 0.0f64;
    for d in divs {
        for j in -30..30 {
            let t = j as f64 * 0.0333 + 0.01;
            if !d.psi_value_or_inf(t + 1e-3).is_finite() {
                continue;
            }
            let h = 1e-5;
            let c = d.psi(t).unwrap();
            let (p, m) = (d.psi(t + h).unwrap(), d.psi(t - h).unwrap());
            let e1 = ((p.value - m.value) / (2.0 * h) - c.d1).abs() / c.d1.abs().max(1.0);
            let e2 = ((p.d1 - m.d1) / (2.0 * h) - c.d2).abs() / c.d2.abs().max(1.0);
            fd = fd.max(e1).max(e2);
        }
    }
    if fd > 1e-6 {
        return Err(format!("psi finite-difference error {fd:.1e}"));
    }
    notes.push(format!("psi FD error {fd:.1e}"));

    let mut r = rng(10);
    for trial in 0..100 {
        let n = 2 + trial % 5;
        let a = if trial % 2 == 0 { random_symmetric(n, &mut r) } else { random_spd(n, 0.05, &mut r) };
        let lmin = min_eigenvalue(n, &a);
        if lmin.abs() > 1e-9 && SymMatrix::new(n, a).unwrap().is_spd_sylvester() != (lmin > 0.0) {
            return Err(format!("Sylvester disagrees with eigenvalues on trial {trial}"));
        }
    }
    notes.push("Sylvester agrees on 100 matrices".into());

    let mut res = 0.0f64;
    for trial in 0..100 {
        let n = 4 + trial % 2;
        let a = random_spd(n, 1.0, &mut r);
        let inv = SymMatrix::new(n, a.clone()).unwrap().invert().unwrap();
        res = res.max(identity_residual(&matmul(&a, inv.as_slice(), n, n, n), n));
    }
    if res > 1e-10 {
        return Err(format!("block inversion residual {res:.1e}"));
    }
    notes.push(format!("block inverse residual {res:.1e}"));

    let mut mass = 0.0f64;
    for (name, c) in [
        ("table1_lambda07", ConstraintChoice::WeibullMoments4),
        ("table2_mix2", ConstraintChoice::M24),
        ("table3_mix1", ConstraintChoice::BivariateM2),
    ] {
        let sc = registry(name).unwrap();
        let model = sc.model(Some(c)).unwrap();
        let (p1, p0) = sc.components().unwrap();
        let s = sample_mixture(sc.lambda(), &p1, &[], &p0, &[], 500, 11).unwrap();
        let stats = compute_stats(&s, &model.constraints).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = model.bounds().iter().map(|&(lo, hi)| r.random_range(lo..hi)).collect();
            let p = plug_in(&PhiPoint::from_slice(&x, model.theta_dim()), &stats, &model).unwrap();
            mass = mass.max((p.m[0] - p.b[0]).abs()).max(p.r[0].abs());
        }
    }
    if mass > 1e-12 {
        return Err(format!("mass residual {mass:.1e}"));
    }
    notes.push(format!("mass residual {mass:.1e}"));

    let cfg = experiment("table2_mix2", ConstraintChoice::M24, 500, 8, 12);
    let a = run_experiment(&cfg, Some(1)).map_err(|e| e.to_string())?.without_timings();
    let b = run_experiment(&cfg, None).map_err(|e| e.to_string())?.without_timings();
    if serde_json::to_string(&a).unwrap() != serde_json::to_string(&b).unwrap() {
        return Err("run_experiment is not deterministic".into());
    }
    notes.push("run_experiment deterministic".into());
    Ok(notes.join("; "))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id}: PASS ({secs:.1} s) {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {id}: FAIL ({secs:.1} s) {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
