use proptest::prelude::*;

use lp_sobolev::harness::generate::{random_polytope, random_pwa, rng};
use lp_sobolev::harness::{run_suite, CorpusSpec, Generator, SuiteReport, SuiteSpec};
use lp_sobolev::io::{load_function, load_measure, load_polytope, save_function, save_measure, save_polytope};
use lp_sobolev::{lp_surface_measure, Vec3};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn artifacts_reload_identically(seed in any::<u64>(), n in 2usize..=3, p in 1.0f64..5.0) {
        let dir = tempfile::tempdir().unwrap();
        let mut r = rng(seed);
        let k = random_polytope(&mut r, n).unwrap();
        let mu = lp_surface_measure(&k, p);
        let f = random_pwa(&mut r, n, 2, Vec3::zeros(), 1.0).unwrap();

        let path = dir.path().join("k.json");
        save_polytope(&path, &k).unwrap();
        let k2 = load_polytope(&path).unwrap();
        prop_assert_eq!(k.offsets(), k2.offsets());
        prop_assert_eq!(k.volume(), k2.volume());

        let path = dir.path().join("mu.json");
        save_measure(&path, &mu).unwrap();
        prop_assert_eq!(mu.max_relative_discrepancy(&load_measure(&path).unwrap()), 0.0);

        let path = dir.path().join("f.json");
        save_function(&path, &f).unwrap();
        let f2 = load_function(&path).unwrap();
        prop_assert_eq!(f.values(), f2.values());
        prop_assert_eq!(f.gradient_norm(p), f2.gradient_norm(p));
    }
}

#[test]
fn suite_output_is_deterministic_and_round_trips() {
    let corpus = CorpusSpec::new(2, 6, 99, Generator::RandomPwa);
    let checks = corpus.checks.clone();
    let a = SuiteReport::new(run_suite(&corpus, &checks).unwrap());
    let b = SuiteReport::new(run_suite(&corpus, &checks).unwrap());
    assert_eq!(a.to_json(false).unwrap(), b.to_json(false).unwrap());
    assert_eq!(a.to_csv(), b.to_csv());

    let spec = SuiteSpec { corpora: vec![corpus] };
    let text = serde_json::to_string(&spec).unwrap();
    let back: SuiteSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
