use approx::assert_relative_eq;

use super::*;
use crate::harness::generate::{probe_directions, random_polytope, rng};

fn axis_measure(w: f64) -> DiscreteSphereMeasure {
    let dirs = [
        Direction::axis(0),
        Direction::axis(0).neg(),
        Direction::axis(1),
        Direction::axis(1).neg(),
    ];
    DiscreteSphereMeasure::from_pairs(2, dirs.into_iter().map(|u| (u, w))).unwrap()
}

fn assert_square(poly: &Polytope, s: f64) {
    assert_eq!(poly.num_facets(), 4);
    for h in poly.offsets() {
        assert_relative_eq!(*h, s, max_relative = 1e-8);
    }
}

#[test]
fn hemisphere_examples() {
    assert!(hemisphere_check(&axis_measure(1.0)).unwrap());
    let two = DiscreteSphereMeasure::from_pairs(
        2,
        [(Direction::axis(0), 1.0), (Direction::axis(1), 1.0)],
    )
    .unwrap();
    assert!(!hemisphere_check(&two).unwrap());
    let three = DiscreteSphereMeasure::from_pairs(
        2,
        [
            (Direction::axis(0), 1.0),
            (Direction::axis(1), 1.0),
            (Direction::new(Vec3::new(-1.0, -1.0, 0.0)).unwrap(), 1.0),
        ],
    )
    .unwrap();
    assert!(hemisphere_check(&three).unwrap());
    let empty = DiscreteSphereMeasure::new(2, []).unwrap();
    assert!(matches!(hemisphere_check(&empty), Err(Error::EmptyMeasure)));
}

#[test]
fn square_examples() {
    let (poly, trace) = solve(&axis_measure(2.0), &SolverConfig::new(3.0)).unwrap();
    assert_square(&poly, 1.0);
    assert!(trace.final_residual <= 1e-8);
    let (poly, _) = solve(&axis_measure(4.0), &SolverConfig::new(3.0)).unwrap();
    assert_square(&poly, 0.5);
}

#[test]
fn normalized_square_examples() {
    let (poly, _) = solve_normalized(&axis_measure(0.5), &SolverConfig::new(2.0)).unwrap();
    assert_square(&poly, 1.0);
    let (poly, _) = solve_normalized(&axis_measure(2.0), &SolverConfig::new(2.0)).unwrap();
    assert_square(&poly, 0.5);
}

#[test]
fn rejects_bad_input() {
    let two = DiscreteSphereMeasure::from_pairs(
        2,
        [(Direction::axis(0), 1.0), (Direction::axis(1), 1.0)],
    )
    .unwrap();
    assert!(matches!(
        solve(&two, &SolverConfig::new(3.0)),
        Err(Error::HemisphereViolation)
    ));
    assert!(matches!(
        solve(&axis_measure(1.0), &SolverConfig::new(2.0)),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        solve(&axis_measure(1.0), &SolverConfig::new(0.5)),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn max_iters_reports_not_converged_with_trace() {
    let mu = DiscreteSphereMeasure::from_pairs(
        2,
        [
            (Direction::planar(0.1), 1.0),
            (Direction::planar(2.0), 3.0),
            (Direction::planar(4.0), 0.5),
        ],
    )
    .unwrap();
    let cfg = SolverConfig {
        max_iters: 1,
        ..SolverConfig::new(3.0)
    };
    match solve(&mu, &cfg) {
        Err(Error::NotConverged { trace, iterations, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(trace.objective.len(), 2);
            assert_eq!(trace.terminated_by, Termination::MaxIters);
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn round_trip_random_polytopes() {
    let mut r = rng(7);
    for dim in [2, 3] {
        let probes = probe_directions(dim, 200);
        for &p in &[1.5, 2.5, 4.0] {
            for _ in 0..4 {
                let poly = random_polytope(&mut r, dim).unwrap();
                let mu = lp_surface_measure(&poly, p);
                let (got, trace) = solve(&mu, &SolverConfig::new(p)).unwrap();
                assert!(trace.final_residual <= 1e-8);
                assert!(trace.max_relative_increase() <= 1e-12, "objective increased");
                let err = got.support_distance(&poly, &probes);
                assert!(err <= 1e-6 * poly.diameter(), "dim {dim} p {p} err {err}");
            }
        }
    }
}

#[test]
fn normalized_round_trip() {
    let mut r = rng(11);
    for dim in [2, 3] {
        let probes = probe_directions(dim, 200);
        for _ in 0..4 {
            let poly = random_polytope(&mut r, dim).unwrap();
            let n = dim as f64;
            let mu = lp_surface_measure(&poly, n).scaled(1.0 / poly.volume());
            let (got, _) = solve_normalized(&mu, &SolverConfig::new(n)).unwrap();
            let err = got.support_distance(&poly, &probes);
            assert!(err <= 1e-6 * poly.diameter(), "dim {dim} err {err}");
        }
    }
}

#[test]
fn uniqueness_from_random_start() {
    let mut r = rng(3);
    let poly = random_polytope(&mut r, 3).unwrap();
    let mu = lp_surface_measure(&poly, 2.0);
    let a = solve(&mu, &SolverConfig::new(2.0)).unwrap().0;
    let init: Vec<f64> = (0..mu.len()).map(|i| 0.3 + (i as f64 * 0.77).sin().abs()).collect();
    let cfg = SolverConfig {
        initial: Some(init),
        ..SolverConfig::new(2.0)
    };
    let b = solve(&mu, &cfg).unwrap().0;
    assert!(a.support_distance(&b, &probe_directions(3, 100)) <= 1e-6 * a.diameter());
}

#[test]
fn scaling_covariance() {
    let mut r = rng(5);
    let poly = random_polytope(&mut r, 2).unwrap();
    let p = 3.0;
    let mu = lp_surface_measure(&poly, p);
    let t: f64 = 2.0;
    let a = solve(&mu, &SolverConfig::new(p)).unwrap().0;
    let b = solve(&mu.scaled(t.powf(2.0 - p)), &SolverConfig::new(p)).unwrap().0;
    let probes = probe_directions(2, 100);
    assert!(b.support_distance(&a.scaled(t), &probes) <= 1e-8 * b.diameter());
}

#[test]
fn blaschke_sum_of_square_with_itself() {
    let k = Polytope::cube(2, 1.0).unwrap();
    let sum = blaschke_sum(&k, &k, &SolverConfig::new(3.0)).unwrap();
    assert_square(&sum, 0.5);
    let got = lp_surface_measure(&sum, 3.0);
    for atom in got.atoms() {
        assert_relative_eq!(atom.w, 4.0, max_relative = 1e-8);
    }
}

#[test]
fn blaschke_sum_commutes() {
    let mut r = rng(9);
    let k = random_polytope(&mut r, 2).unwrap();
    let l = random_polytope(&mut r, 2).unwrap();
    let cfg = SolverConfig::new(3.0);
    let a = blaschke_sum(&k, &l, &cfg).unwrap();
    let b = blaschke_sum(&l, &k, &cfg).unwrap();
    assert!(a.support_distance(&b, &probe_directions(2, 100)) <= 1e-8 * a.diameter());
    let target = lp_surface_measure(&k, 3.0).add(&lp_surface_measure(&l, 3.0)).unwrap();
    assert!(lp_surface_measure(&a, 3.0).max_relative_discrepancy(&target) <= 1e-8);
}
