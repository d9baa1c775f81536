//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p lp-sobolev --test acceptance`.

use std::time::Instant;

use rand::Rng;

use lp_sobolev::geometry::{lp_surface_measure, Polytope, Vec3};
use lp_sobolev::harness::checks::*;
use lp_sobolev::harness::generate::{radial_pwa, random_polytope, random_pwa, random_sl, rng};
use lp_sobolev::harness::suite::{ball_proxy, run_suite};
use lp_sobolev::harness::{CheckKind, CheckResult};
use lp_sobolev::pwa::{compose_linear, lp_star_norm};
use lp_sobolev::rearrange::{symmetric_rearrangement, DEFAULT_GRID};
use lp_sobolev::sphere::{affine_energy, polar_volume_polytope, sphere_measure, ConstantMode};
use lp_sobolev::{par, solve, solve_normalized, SolverConfig, SphericalQuadrature};

struct Outcome {
    pass: bool,
    detail: String,
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn no_errors(results: &[CheckResult]) -> Result<(), String> {
    match results.iter().find(|r| r.error.is_some()) {
        Some(r) => Err(format!("{}: {:?}", r.check, r.error)),
        None => Ok(()),
    }
}

fn p_off_n<R: Rng>(r: &mut R, dim: usize) -> f64 {
    loop {
        let p = r.gen_range(1.2..4.0);
        if (p - dim as f64).abs() > 0.05 {
            return p;
        }
    }
}

fn cone_round_trip() -> Outcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    for dim in [2, 3] {
        let mut r = rng(1000 + dim as u64);
        for _ in 0..100 {
            let k = random_polytope(&mut r, dim).unwrap();
            for p in [1.5, 3.0] {
                if p != dim as f64 {
                    cases.push((k.clone(), p));
                }
            }
        }
    }
    let results = par::map(&cases, |(k, p)| check_cone_round_trip(k, *p));
    let secs = start.elapsed().as_secs_f64();
    let worst = max(results.iter().map(|r| r.lhs));
    Outcome {
        pass: no_errors(&results).is_ok() && worst <= 1e-6 && secs < 60.0,
        detail: format!("{} cases, max err/diam {worst:.2e} (≤ 1e-6), {secs:.1} s (< 60 s)", cases.len()),
    }
}

fn solver_residual() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2000);
    let cases: Vec<(Polytope, f64, Vec<f64>, Vec<f64>)> = (0..100)
        .map(|i| {
            let dim = 2 + i % 2;
            let k = random_polytope(&mut r, dim).unwrap();
            let p = p_off_n(&mut r, dim);
            let m = k.num_facets();
            let a = (0..m).map(|_| r.gen_range(0.3..3.0)).collect();
            let b = (0..m).map(|_| r.gen_range(0.3..3.0)).collect();
            (k, p, a, b)
        })
        .collect();
    let rows = par::map(&cases, |(k, p, a, b)| {
        let mu = lp_surface_measure(k, *p);
        let run = |h: &Vec<f64>| {
            solve(&mu, &SolverConfig { initial: Some(h.clone()), ..SolverConfig::new(*p) })
        };
        match (run(a), run(b)) {
            (Ok((pa, ta)), Ok((pb, tb))) => Ok((
                ta.final_residual.max(tb.final_residual),
                relative_support_error(&pa, &pb),
                relative_support_error(&pa, k),
            )),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        }
    });
    let secs = start.elapsed().as_secs_f64();
    if let Some(Err(e)) = rows.iter().find(|x| x.is_err()) {
        return Outcome { pass: false, detail: e.clone() };
    }
    let rows: Vec<(f64, f64, f64)> = rows.into_iter().map(Result::unwrap).collect();
    let res = max(rows.iter().map(|x| x.0));
    let agree = max(rows.iter().map(|x| x.1));
    let recover = max(rows.iter().map(|x| x.2));
    Outcome {
        pass: res <= 1e-8 && agree <= 1e-6 && recover <= 1e-6 && secs < 120.0,
        detail: format!(
            "100 cases, residual {res:.2e} (≤ 1e-8), start agreement {agree:.2e} (≤ 1e-6), recovery {recover:.2e}, {secs:.1} s (< 120 s)"
        ),
    }
}

fn normalized_solver() -> Outcome {
    let mut r = rng(3000);
    let cases: Vec<Polytope> = (0..50).map(|i| random_polytope(&mut r, 2 + i % 2).unwrap()).collect();
    let errs = par::map(&cases, |k| {
        let n = k.dim() as f64;
        let mu = lp_surface_measure(k, n).scaled(1.0 / k.volume());
        solve_normalized(&mu, &SolverConfig::new(n)).map(|(q, _)| relative_support_error(&q, k))
    });
    if let Some(Err(e)) = errs.iter().find(|x| x.is_err()) {
        return Outcome { pass: false, detail: e.to_string() };
    }
    let worst = max(errs.into_iter().map(Result::unwrap));
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("50 cases, max err/diam {worst:.2e} (≤ 1e-6)"),
    }
}

fn valuation() -> Outcome {
    let mut r = rng(4000);
    let cases: Vec<_> = (0..50)
        .map(|_| {
            let f = random_pwa(&mut r, 2, 3, Vec3::zeros(), 1.0).unwrap();
            let shift = Vec3::new(r.gen_range(-0.9..0.9), r.gen_range(-0.9..0.9), 0.0);
            let half = r.gen_range(0.6..1.2);
            let g = random_pwa(&mut r, 2, 3, shift, half).unwrap();
            (f, g, r.gen_range(1.2..4.0))
        })
        .collect();
    let results = par::map(&cases, |(f, g, p)| check_valuation(f, g, *p));
    if let Err(e) = no_errors(&results) {
        return Outcome { pass: false, detail: e };
    }
    let atoms = max(results.iter().map(|r| r.lhs));
    let bodies = max(results.iter().map(|r| r.extra["body_error"]));
    Outcome {
        pass: atoms <= 1e-9 && bodies <= 1e-6,
        detail: format!("50 pairs, atom discrepancy {atoms:.2e} (≤ 1e-9), Blaschke-sum bodies {bodies:.2e} (≤ 1e-6)"),
    }
}

fn sl_equivariance() -> Outcome {
    let mut r = rng(5000);
    let cases: Vec<_> = (0..50)
        .map(|_| {
            let f = random_pwa(&mut r, 2, 3, Vec3::zeros(), 1.0).unwrap();
            (f, random_sl(&mut r, 2), p_off_n(&mut r, 2))
        })
        .collect();
    let results = par::map(&cases, |(f, phi, p)| check_sl_equivariance(f, phi, *p));
    if let Err(e) = no_errors(&results) {
        return Outcome { pass: false, detail: e };
    }
    let support = max(results.iter().map(|r| r.extra["support_error"]));
    let volume = max(results.iter().map(|r| r.extra["volume_error"]));
    Outcome {
        pass: results.iter().all(|r| r.pass),
        detail: format!("50 maps, support error {support:.2e}, volume error {volume:.2e} (≤ 1e-5)"),
    }
}

fn minkowski() -> Outcome {
    let mut r = rng(6000);
    let pairs: Vec<_> = (0..200)
        .map(|i| {
            let dim = 2 + i % 2;
            let k = random_polytope(&mut r, dim).unwrap();
            let l = random_polytope(&mut r, dim).unwrap();
            (k, l, r.gen_range(1.1..5.0))
        })
        .collect();
    let random = par::map(&pairs, |(k, l, p)| check_minkowski_ineq(k, l, *p));
    let equal = par::map(&pairs[..50], |(k, _, p)| check_minkowski_ineq(k, &k.scaled(0.4 + *p), *p));
    let violations = random.iter().filter(|r| r.is_violation()).count();
    let min_ratio = random.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let eq_dev = max(equal.iter().map(|r| (r.ratio - 1.0).abs()));
    let flags = equal.iter().all(|r| r.equality) && random.iter().all(|r| !r.equality);
    Outcome {
        pass: violations == 0 && no_errors(&random).is_ok() && eq_dev <= 1e-9 && flags,
        detail: format!(
            "200 pairs, {violations} violations (min ratio {min_ratio:.6}), L = tK |ratio - 1| {eq_dev:.2e} (≤ 1e-9), equality flags {}",
            if flags { "exact" } else { "wrong" }
        ),
    }
}

fn petty() -> Outcome {
    let start = Instant::now();
    let q2 = SphericalQuadrature::build(2, 4).unwrap();
    let q3 = SphericalQuadrature::build(3, 4).unwrap();
    let mut r = rng(7000);
    let cases: Vec<_> = (0..100)
        .map(|i| {
            let dim = 2 + i % 2;
            let k = random_polytope(&mut r, dim).unwrap();
            let p = if i % 10 == 0 { dim as f64 } else { r.gen_range(1.2..4.0) };
            (k, p, r.gen_range(0.0..=1.0))
        })
        .collect();
    let quad = |k: &Polytope| if k.dim() == 2 { &q2 } else { &q3 };
    let random = par::map(&cases, |(k, p, lambda)| check_petty(k, *p, *lambda, quad(k)));
    let mut balls = Vec::new();
    for dim in [2, 3] {
        let ball = ball_proxy(dim).unwrap();
        let mut rr = rng(7100 + dim as u64);
        for i in 0..4 {
            let k = if i == 0 { ball.clone() } else { ball.transform(&random_sl(&mut rr, dim)).unwrap() };
            for p in [1.5, 2.5, dim as f64, 4.0] {
                balls.push((k.clone(), p, rr.gen_range(0.0..=1.0)));
            }
        }
    }
    let proxies = par::map(&balls, |(k, p, lambda)| check_petty(k, *p, *lambda, quad(k)));
    let secs = start.elapsed().as_secs_f64();
    let violations = random.iter().filter(|r| r.is_violation()).count();
    let max_ratio = random.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let ball_dev = max(proxies.iter().map(|r| (r.ratio - 1.0).abs()));
    Outcome {
        pass: violations == 0
            && no_errors(&random).is_ok()
            && no_errors(&proxies).is_ok()
            && ball_dev <= 1e-2
            && secs < 300.0,
        detail: format!(
            "100 random (K, p, λ), {violations} violations (max ratio {max_ratio:.4}), {} ball proxies |ratio - 1| {ball_dev:.2e} (≤ 1e-2), level 4, {secs:.1} s (< 300 s)",
            proxies.len()
        ),
    }
}

fn symmetral_structure() -> Outcome {
    let mut r = rng(8000);
    let cases: Vec<_> = (0..20)
        .map(|i| {
            let dim = if i < 14 { 2 } else { 3 };
            let cells = if dim == 2 { 3 } else { 2 };
            let f = random_pwa(&mut r, dim, cells, Vec3::zeros(), 1.0).unwrap();
            let k = random_polytope(&mut r, dim).unwrap();
            let l = random_polytope(&mut r, dim).unwrap();
            (f, k, l, p_off_n(&mut r, dim))
        })
        .collect();
    let results = par::map(&cases, |(f, k, l, p)| check_symmetral_body(f, k, l, *p));
    if let Err(e) = no_errors(&results) {
        return Outcome { pass: false, detail: e };
    }
    let shape = max(results.iter().map(|r| r.extra["shape_error"]));
    let measure = max(results.iter().map(|r| r.extra["measure_error"]));
    let volume = max(results.iter().map(|r| r.extra["volume_error"]));
    Outcome {
        pass: results.iter().all(|r| r.pass),
        detail: format!(
            "20 (f, K) pairs, dilate of K̃ {shape:.2e}, measure identity {measure:.2e}, volume independence of K {volume:.2e} (all ≤ 1e-4)"
        ),
    }
}

fn polya_szego() -> Outcome {
    let q2 = SphericalQuadrature::build(2, 4).unwrap();
    let q3 = SphericalQuadrature::build(3, 3).unwrap();
    let quad = |d: usize| if d == 2 { &q2 } else { &q3 };
    let mut r = rng(9000);
    let cases: Vec<_> = (0..100)
        .map(|i| {
            let dim = if i % 4 == 3 { 3 } else { 2 };
            let cells = if dim == 2 { 3 } else { 2 };
            let f = random_pwa(&mut r, dim, cells, Vec3::zeros(), 1.0).unwrap();
            let p = if i % 5 == 0 { dim as f64 } else { r.gen_range(1.2..4.0) };
            (f, p, r.gen_range(0.0..=1.0))
        })
        .collect();
    let random = par::map(&cases, |(f, p, lambda)| check_polya_szego(f, *p, *lambda, quad(f.dim())));
    let at_n = cases.iter().filter(|c| c.1 == c.0.dim() as f64).count();
    let violations = random.iter().filter(|r| r.is_violation()).count();
    let min_ratio = random.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);

    // radial equality family: cones and bumps on fine polygons
    let mut radial = Vec::new();
    for (k, p) in [(0, 1.5), (1, 2.0), (2, 3.0), (3, 4.0)] {
        let radii: Vec<f64> = (0..=4).map(|j| j as f64 / 4.0).collect();
        let values: Vec<f64> = radii.iter().map(|s| (1.0 - s).powi(k % 2 + 1)).collect();
        radial.push((radial_pwa(2, &radii, &values, 1024).unwrap(), p, 0.25 * k as f64));
    }
    let equal = par::map(&radial, |(f, p, lambda)| check_polya_szego(f, *p, *lambda, &q2));
    let eq_dev = max(equal.iter().map(|r| (r.ratio - 1.0).abs()));

    // calibration self-consistency on random profiles: Ω(f) against the
    // exact ‖∇f‖_p of the same mesh
    let mut rr = rng(9100);
    let family: Vec<_> = (0..8)
        .map(|_| {
            let m = rr.gen_range(3..=6);
            let mut radii = vec![0.0];
            for _ in 0..m {
                radii.push(radii.last().unwrap() + rr.gen_range(0.1..0.5));
            }
            let mut values = vec![0.0; m + 1];
            for j in (0..m).rev() {
                values[j] = values[j + 1] + rr.gen_range(0.05..1.0);
            }
            let f = radial_pwa(2, &radii, &values, 2048).unwrap();
            (f, rr.gen_range(1.2..5.0), rr.gen_range(0.0..=1.0))
        })
        .collect();
    let calib = par::map(&family, |(f, p, lambda)| {
        radial_calibration(f, *p, *lambda, &q2).map(|c| (c - 1.0).abs()).unwrap_or(f64::INFINITY)
    });
    let cal_dev = max(calib);
    Outcome {
        pass: violations == 0
            && no_errors(&random).is_ok()
            && no_errors(&equal).is_ok()
            && eq_dev <= 1e-3
            && cal_dev <= 1e-4,
        detail: format!(
            "100 random (f, p, λ) ({at_n} at p = n), {violations} violations (min ratio {min_ratio:.4}), radial |ratio - 1| {eq_dev:.2e} (≤ 1e-3), calibration {cal_dev:.2e} (≤ 1e-4)"
        ),
    }
}

fn sobolev() -> Outcome {
    // the default corpora of the three Sobolev-type checks
    let mut results = Vec::new();
    for corpus in lp_sobolev::harness::SuiteSpec::default_suite().corpora {
        let checks: Vec<CheckKind> = corpus
            .checks
            .iter()
            .copied()
            .filter(|c| matches!(c, CheckKind::SobolevBody | CheckKind::AffineSobolev | CheckKind::Morrey))
            .collect();
        results.extend(run_suite(&corpus, &checks).unwrap());
    }
    let violations = results.iter().filter(|r| r.is_violation()).count();
    let errors = results.iter().filter(|r| r.error.is_some()).count();

    let q2 = SphericalQuadrature::build(2, 4).unwrap();
    let q3 = SphericalQuadrature::build(3, 5).unwrap();
    let mut r = rng(10_000);
    let mut scale_dev: f64 = 0.0;
    let mut sl_dev: f64 = 0.0;
    for i in 0..6 {
        let dim = 2 + i % 2;
        let q = if dim == 2 { &q2 } else { &q3 };
        let f = random_pwa(&mut r, dim, if dim == 2 { 3 } else { 2 }, Vec3::zeros(), 1.0).unwrap();
        let phi = random_sl(&mut r, dim);
        let t = r.gen_range(0.2..5.0);
        let g = compose_linear(&f, &phi).unwrap();
        let lambda = r.gen_range(0.0..=1.0);
        let n = dim as f64;
        let below = r.gen_range(1.1..n - 0.1);
        let above = r.gen_range(n + 0.1..5.0);
        let ratio = |h: &lp_sobolev::PwaFunction, which: usize| match which {
            0 => check_sobolev_body_ineq(h, below).ratio,
            1 => check_general_affine_sobolev(h, below, lambda, q).ratio,
            _ => check_morrey(h, above, lambda, q).ratio,
        };
        for which in 0..3 {
            let base = ratio(&f, which);
            scale_dev = scale_dev.max((ratio(&f.scaled(t), which) / base - 1.0).abs());
            sl_dev = sl_dev.max((ratio(&g, which) / base - 1.0).abs());
        }
    }
    Outcome {
        pass: violations == 0 && errors == 0 && scale_dev <= 1e-12 && sl_dev <= 1e-4,
        detail: format!(
            "{} default-corpus results, {violations} violations, {errors} errors; scaling {scale_dev:.2e} (≤ 1e-12), SL(n) {sl_dev:.2e} (≤ 1e-4, 3D quadrature level 5)",
            results.len()
        ),
    }
}

fn infrastructure() -> Outcome {
    let mut moment: f64 = 0.0;
    for (dim, level) in [(2, 4), (3, 4)] {
        let q = SphericalQuadrature::build(dim, level).unwrap();
        let area = sphere_measure(dim);
        for a in 0..dim {
            for b in 0..dim {
                let got = q.integrate(|u| u.vec()[a] * u.vec()[b]);
                let want = if a == b { area / dim as f64 } else { 0.0 };
                moment = moment.max((got - want).abs());
            }
        }
    }
    let q2 = SphericalQuadrature::build(2, 4).unwrap();
    let square = polar_volume_polytope(&Polytope::cube(2, 1.0).unwrap(), &q2).unwrap();
    let mut r = rng(11_000);
    let mut equi: f64 = 0.0;
    for i in 0..6 {
        let dim = 2 + i % 2;
        let f = random_pwa(&mut r, dim, if dim == 2 { 4 } else { 2 }, Vec3::zeros(), 1.0).unwrap();
        let star = symmetric_rearrangement(&f, DEFAULT_GRID).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let a = lp_star_norm(&f, q).unwrap();
            equi = equi.max((star.lp_norm(q) / a - 1.0).abs());
        }
    }
    let energy_ok = affine_energy(
        &radial_pwa(2, &[0.0, 1.0], &[1.0, 0.0], 64).unwrap(),
        0.5,
        2.0,
        &q2,
        ConstantMode::Calibrated,
    )
    .is_ok();
    Outcome {
        pass: moment <= 1e-6 && (square - 2.0).abs() <= 1e-3 && equi <= 1e-4 && energy_ok,
        detail: format!(
            "second moments {moment:.2e} (≤ 1e-6), polar square {square:.6} (2 ± 1e-3), equimeasurability {equi:.2e} (≤ 1e-4)"
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("cone round trip", cone_round_trip),
        ("solver residual and uniqueness", solver_residual),
        ("normalized solver", normalized_solver),
        ("valuation identity", valuation),
        ("SL(n) equivariance", sl_equivariance),
        ("L_p Minkowski inequality", minkowski),
        ("Petty projection inequality", petty),
        ("convex symmetral structure", symmetral_structure),
        ("affine Pólya–Szegő", polya_szego),
        ("Sobolev-type inequalities", sobolev),
        ("numerical infrastructure", infrastructure),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {:>2} {name}: {} [{:.1} s]",
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
        failed += !out.pass as usize;
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
