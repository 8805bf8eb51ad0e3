//! Desk-scale acceptance suite. Every criterion prints one PASS/FAIL line
//! (run with `--nocapture` to see them) and then asserts.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use whitney::bounds::{compare_thm2, derive_constants, in_region_v, lambda_bound_check, ring_locator_check};
use whitney::bump::{alpha_jet, pn_poly, recip_derivs, theta_jet, Hump};
use whitney::combinatorics::{bell_number, binomial, composition_bound, cor14_lower, factorial, factorial_sandwich, faa_di_bruno};
use whitney::taylor::{parse, sup_norm_with, sup_norms_by_order, Expr, Jet, TaylorError, DEFAULT_SAMPLES};
use whitney::transforms::{bounded_pipeline, mobius_inverse, halfline_inverse, DomainMap, PipelineOptions};
use whitney::weierstrass::{lambda_for_eps, transform_jet, windowed, Supported, SupportedFn};
use whitney::whitney::verify::grid;
use whitney::whitney::{build_approximant, ledger_check, verify, Approximant, Case, Mode, ProblemSpec};

fn report(id: u32, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let timely = elapsed <= limit;
    let verdict = if ok && timely { "PASS" } else { "FAIL" };
    println!("criterion {id} ({name}): {verdict} in {:.2?} (limit {limit:?}) {detail}", elapsed);
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(timely, "criterion {id} exceeded its time budget: {elapsed:?}");
}

fn desk(mode: Mode, rho: &str, stages: usize) -> Approximant {
    let p = |s: &str| parse(s).unwrap();
    let spec = ProblemSpec::new(p("sin(t)"), p("1/(2*(1+t))"), p(rho), None, Case::R, std::f64::consts::SQRT_2);
    build_approximant(&spec, stages, mode).unwrap()
}

#[test]
fn criterion_01_bump_certification() {
    let t0 = Instant::now();
    let mut ok = true;
    let mut fact = BigInt::one();
    for n in 1..=25usize {
        fact *= n;
        ok &= pn_poly(n).max_abs() <= BigInt::from(2).pow(n as u32 - 1) * &fact;
    }
    let theta = sup_norms_by_order(|t, k| Ok::<_, TaylorError>(theta_jet(t, k)), (0.0, 1.0), 10, 8193).unwrap();
    let mut worst_theta = f64::NEG_INFINITY;
    for n in 1..=10usize {
        let nf = n as f64;
        let gap = theta[n].lower().ln() - 3.0 * nf * nf.ln();
        worst_theta = worst_theta.max(gap);
    }
    let alpha = sup_norms_by_order(|t, k| Ok::<_, TaylorError>(alpha_jet(t, k)), (0.0, 1.0), 8, 8193).unwrap();
    let mut worst_alpha = f64::NEG_INFINITY;
    for n in 1..=8usize {
        let nf = n as f64;
        let gap = alpha[n].lower().ln() - ((7.0 * nf + 4.0) * 2f64.ln() + 9.0 * nf * nf.ln());
        worst_alpha = worst_alpha.max(gap);
    }
    ok &= worst_theta <= 0.0 && worst_alpha <= 0.0;
    let detail = format!("worst log-gap theta {worst_theta:.3}, alpha {worst_alpha:.3}");
    report(1, "bump certification", ok, t0.elapsed(), Duration::from_secs(10), &detail);
}

#[test]
fn criterion_02_reciprocal_identity() {
    let t0 = Instant::now();
    let phi = parse("2+sin(t)").unwrap();
    let mut worst: f64 = 0.0;
    for t in grid(0.0, 2.0 * std::f64::consts::PI, 101) {
        let j = phi.jet(t, 8).unwrap();
        // Independent route: jet division 1/φ.
        let oracle = Jet::constant(t, 1.0, 8).div_jet(&j).unwrap();
        for n in 1..=8 {
            let v = recip_derivs(&j, n).unwrap();
            let scale = oracle[n].abs().max(1e-3 * oracle.max_abs());
            worst = worst.max((v - oracle[n]).abs() / scale);
        }
    }
    report(2, "reciprocal identity", worst <= 1e-8, t0.elapsed(), Duration::from_secs(5), &format!("worst relative error {worst:.2e}"));
}

fn random_inner(rng: &mut ChaCha8Rng) -> String {
    let a: f64 = rng.gen_range(0.3..1.5);
    let b: f64 = rng.gen_range(-1.0..1.0);
    match rng.gen_range(0..5) {
        0 => format!("sin({a}*t+{b})"),
        1 => format!("{a}*t^2+{b}*t"),
        2 => format!("exp(-{a}*t)"),
        3 => format!("cos({a}*t)+{b}"),
        _ => format!("t/(2+{a}*t^2)"),
    }
}

fn random_outer(rng: &mut ChaCha8Rng) -> String {
    let a: f64 = rng.gen_range(0.3..1.5);
    match rng.gen_range(0..5) {
        0 => format!("exp({a}*t)"),
        1 => format!("sin({a}*t)"),
        2 => format!("t^3-{a}*t"),
        3 => "1/(3+t^2)".to_string(),
        _ => format!("cos(t)*exp(-{a}*t^2)"),
    }
}

#[test]
fn criterion_03_faa_di_bruno() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_rel: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..50 {
        let inner = parse(&random_inner(&mut rng)).unwrap();
        let outer = parse(&random_outer(&mut rng)).unwrap();
        let composed = outer.substitute(&inner);
        let t: f64 = rng.gen_range(-1.0..1.0);
        let n = 8;
        let f = inner.jet(t, n).unwrap();
        let g = outer.jet(f[0], n).unwrap();
        let oracle = composed.jet(t, n).unwrap();
        let big_f = (1..=n).map(|k| f[k].abs()).fold(1.0, f64::max);
        let big_g = (0..=n).map(|m| g[m].abs()).fold(0.0, f64::max);
        for k in 0..=n {
            let v = faa_di_bruno(&g, &f, k).unwrap();
            let scale = oracle[k].abs().max(1e-6 * oracle.max_abs()).max(1e-300);
            worst_rel = worst_rel.max((v - oracle[k]).abs() / scale);
            if k >= 1 && v.abs() > composition_bound(big_f, big_g, k).unwrap() {
                violations += 1;
            }
        }
    }
    let ok = worst_rel <= 1e-9 && violations == 0;
    report(3, "Faa di Bruno", ok, t0.elapsed(), Duration::from_secs(10), &format!("worst relative error {worst_rel:.2e}, bound violations {violations}"));
}

#[test]
fn criterion_04_weierstrass_approximation() {
    let t0 = Instant::now();
    let hump = Hump::new(0.0, 1.0, 2.0, 3.0).unwrap();
    let f = windowed(parse("t^3").unwrap(), hump);
    let pts = grid(-3.0, 6.0, 2001);
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    for m in 0..=2usize {
        let nm = sup_norm_with(|t, k| f.jet(t, k), (0.0, 3.0), m, DEFAULT_SAMPLES).unwrap().inflated();
        let nm1 = sup_norm_with(|t, k| f.jet(t, k), (0.0, 3.0), m + 1, DEFAULT_SAMPLES).unwrap().inflated();
        for eps in [1e-1, 1e-2] {
            let lambda = 1.01 * lambda_for_eps(nm, nm1, eps).unwrap();
            let mut dev: f64 = 0.0;
            for &t in &pts {
                let w = transform_jet(&f, lambda, t, m).unwrap();
                let h = f.jet(t, m).unwrap();
                for k in 0..=m {
                    dev = dev.max((w[k] - h[k]).abs());
                }
            }
            ok &= dev <= eps;
            worst_ratio = worst_ratio.max(dev / eps);
        }
    }
    let mut worst_mass: f64 = 0.0;
    for e in 0..=12 {
        let lambda = 10f64.powi(e);
        let one = SupportedFn::new(|t, k| Ok(Jet::constant(t, 1.0, k)), (-1e3, 1e3));
        worst_mass = worst_mass.max((transform_jet(&one, lambda, 0.3, 0).unwrap()[0] - 1.0).abs());
    }
    ok &= worst_mass <= 1e-10;
    let detail = format!("worst deviation/eps {worst_ratio:.2e}, kernel mass error {worst_mass:.2e}");
    report(4, "Weierstrass approximation", ok, t0.elapsed(), Duration::from_secs(30), &detail);
}

#[test]
fn criterion_05_desk_run() {
    let t0 = Instant::now();
    let practical = desk(Mode::Practical, "1", 4);
    let (lo, hi) = practical.scheme.k_interval(2);
    let r1 = verify(&practical, &grid(lo, hi, 401)).unwrap();
    let orders_ok = r1.rows.iter().any(|r| r.k == 1) && r1.rows.iter().all(|r| r.k <= 1);
    let certified = desk(Mode::Certified, "0", 3);
    let (lo, hi) = certified.scheme.k_interval(1);
    let r2 = verify(&certified, &grid(lo, hi, 401)).unwrap();
    let ok = r1.pass && r2.pass && orders_ok && r1.worst_margin > 0.0;
    let detail = format!("practical margin {:.3e}, certified margin {:.3e}", r1.worst_margin, r2.worst_margin);
    report(5, "desk run", ok, t0.elapsed(), Duration::from_secs(300), &detail);
}

#[test]
fn criterion_06_ledger_inequalities() {
    let t0 = Instant::now();
    let ap = desk(Mode::Certified, "0", 3);
    let check = ledger_check(&ap).unwrap();
    let names = ["delta-halving", "telescoping", "support", "residual", "tail-term"];
    let covered = names.iter().all(|n| check.items.iter().any(|i| i.name == *n));
    let failed: Vec<String> = check.items.iter().filter(|i| !i.pass).map(|i| format!("{}@{}", i.name, i.n)).collect();
    let ok = check.pass && covered;
    report(6, "ledger inequalities", ok, t0.elapsed(), Duration::from_secs(300), &format!("{} items, failed {:?}", check.items.len(), failed));
}

#[test]
fn criterion_07_growth_envelope() {
    let t0 = Instant::now();
    let ap = desk(Mode::Certified, "0", 3);
    let consts = derive_constants(&ap).unwrap();
    let report_env = compare_thm2(&ap, &consts, &[0.5, 1.0, 1.5, 2.0], 64).unwrap();
    let stage_checks = lambda_bound_check(&ap, &consts).unwrap();
    let ok = report_env.pass && !stage_checks.is_empty() && stage_checks.iter().all(|c| c.pass);
    let worst = report_env.rows.iter().map(|r| r.margin.ln_abs).fold(f64::INFINITY, f64::min);
    report(7, "growth envelope", ok, t0.elapsed(), Duration::from_secs(300), &format!("D = {}, smallest ln margin {worst:.3}", consts.big_d));
}

#[test]
fn criterion_08_half_line() {
    let t0 = Instant::now();
    let p = |s: &str| parse(s).unwrap();
    let delta = 0.5f64.sqrt();
    let spec = ProblemSpec::new(p("1/(1+t)"), p("1/(2*(1+t))"), p("0"), None, Case::Rpos, delta);
    let ap = build_approximant(&spec, 3, Mode::Practical).unwrap();
    let (lo, hi) = ap.scheme.k_interval(1);
    let r = verify(&ap, &grid(lo, hi, 401)).unwrap();
    let alpha = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut hits, mut holds) = (0, 0);
    while hits < 200 {
        let z = Complex64::new(rng.gen_range(0.0..5.0), rng.gen_range(-5.0..5.0));
        if !(in_region_v(z, alpha) && z.norm() <= 5.0) {
            continue;
        }
        hits += 1;
        if ring_locator_check(z, &ap.scheme).unwrap().holds {
            holds += 1;
        }
    }
    let ok = r.pass && holds == hits;
    report(8, "half-line", ok, t0.elapsed(), Duration::from_secs(300), &format!("verify margin {:.3e}, ring bound {holds}/{hits}", r.worst_margin));
}

#[test]
fn criterion_09_domain_chain() {
    let t0 = Instant::now();
    let p = |s: &str| parse(s).unwrap();
    let g = bounded_pipeline(&p("exp(t)"), &p("0.1"), &p("1"), (-1.0, 1.0), PipelineOptions::default()).unwrap();
    let r = g.verify(&grid(-0.9, 0.9, 201)).unwrap();
    let orders_ok = r.rows.iter().filter(|row| row.k == 1).count() == 201;

    let mut worst_rt: f64 = 0.0;
    for t in grid(-0.999, 0.999, 2001) {
        let s = 2.0 * t / (1.0 - t * t);
        worst_rt = worst_rt.max((mobius_inverse(s) - t).abs());
    }
    for t in grid(0.001, 1000.0, 2001) {
        let s = t - 1.0 / t;
        worst_rt = worst_rt.max((halfline_inverse(s) - t).abs() / t.max(1.0));
    }

    let mut worst_jet: f64 = 0.0;
    for (map, pts) in [(DomainMap::mobius(), grid(-0.95, 0.95, 41)), (DomainMap::half_line(), grid(0.05, 20.0, 41))] {
        let e: Expr = map.forward_expr();
        for t in pts {
            let closed = map.forward_jet(t, 6).unwrap();
            let oracle = e.jet(t, 6).unwrap();
            for k in 0..=6 {
                worst_jet = worst_jet.max((closed[k] - oracle[k]).abs() / oracle[k].abs().max(1.0));
            }
        }
    }
    let ok = r.pass && orders_ok && worst_rt <= 1e-12 && worst_jet <= 1e-10;
    let detail = format!("margin {:.3e}, round trip {worst_rt:.2e}, derivative forms {worst_jet:.2e}", r.worst_margin);
    report(9, "domain chain", ok, t0.elapsed(), Duration::from_secs(300), &detail);
}

#[test]
fn criterion_10_combinatorics() {
    let t0 = Instant::now();
    let mut ok = true;
    for n in 0..=30u64 {
        for l in 0..=n {
            let sum = (l..=n).fold(BigUint::zero(), |a, k| a + binomial(k, l));
            ok &= sum == binomial(n + 1, l + 1);
        }
    }
    for n in 1..=12usize {
        ok &= bell_number(n) <= BigUint::from(n).pow(n as u32);
    }
    for n in 1..=50usize {
        let (lo, hi) = factorial_sandwich(n);
        let f = factorial(n as u64).to_f64().unwrap();
        ok &= lo <= f * (1.0 + 1e-12) && f <= hi * (1.0 + 1e-12);
    }
    // Brute force: min over integers n ≤ ρ of t^n / n!.
    let mut cor_ok = true;
    for i in 1..=20 {
        let t = 0.25 * i as f64;
        for j in 0..=20 {
            let rho = std::f64::consts::E * t + 0.5 * j as f64;
            let brute = (0..=rho.floor() as i32).map(|n| t.powi(n) / (1..=n).map(|k| k as f64).product::<f64>()).fold(f64::INFINITY, f64::min);
            cor_ok &= cor14_lower(t, rho).unwrap() <= brute;
        }
    }
    ok &= cor_ok;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut sqrt_ok = true;
    for _ in 0..1000 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        sqrt_ok &= (a + b).sqrt() + c.sqrt() <= a.sqrt() + (2.0 * (b + c)).sqrt() + 1e-12;
    }
    ok &= sqrt_ok;
    report(10, "combinatorics", ok, t0.elapsed(), Duration::from_secs(5), &format!("lower-bound check {cor_ok}, square-root inequality {sqrt_ok}"));
}
