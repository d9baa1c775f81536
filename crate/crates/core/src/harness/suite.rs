//! Seeded corpora and suite runs.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::checks::*;
use super::generate::{radial_pwa, random_polytope, random_pwa, random_sl, rng, shaped_radial_pwa};
use crate::error::{Error, Result};
use crate::geometry::{icosphere, lp_surface_measure, Atom, DiscreteSphereMeasure, Direction, LinearMap, Polytope, Vec3};
use crate::par;
use crate::pwa::{cone_function, PwaFunction};
use crate::sphere::SphericalQuadrature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Independent random polytopes; functions are their cone functions.
    RandomPolytope,
    /// Random functions on jittered Kuhn meshes.
    RandomPwa,
    /// Cone functions with `L = tK` (equality cases).
    ConeFamily,
    /// Radial functions with random decreasing profiles.
    RadialFamily,
    /// Polytopal balls and their linear images.
    BallProxy,
    /// Measures concentrated in a closed hemisphere.
    Adversarial,
}

fn default_level() -> usize {
    4
}

fn default_cells() -> usize {
    3
}

fn default_p_range() -> [f64; 2] {
    [1.2, 4.0]
}

fn default_lambda_range() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub generator: Generator,
    #[serde(default = "default_p_range")]
    pub p_range: [f64; 2],
    #[serde(default = "default_lambda_range")]
    pub lambda_range: [f64; 2],
    /// Spherical quadrature level.
    #[serde(default = "default_level")]
    pub level: usize,
    /// Mesh cells per side for `random-pwa`.
    #[serde(default = "default_cells")]
    pub cells: usize,
    /// Check names; empty means none.
    #[serde(default)]
    pub checks: Vec<CheckKind>,
}

impl CorpusSpec {
    pub fn new(dim: usize, count: usize, seed: u64, generator: Generator) -> Self {
        CorpusSpec {
            dim,
            count,
            seed,
            generator,
            p_range: default_p_range(),
            lambda_range: default_lambda_range(),
            level: default_level(),
            cells: default_cells(),
            checks: Vec::new(),
        }
    }

    pub fn with_checks(mut self, checks: &[CheckKind]) -> Self {
        self.checks = checks.to_vec();
        self
    }

    pub fn with_p_range(mut self, lo: f64, hi: f64) -> Self {
        self.p_range = [lo, hi];
        self
    }

    pub fn with_level(mut self, level: usize) -> Self {
        self.level = level;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        let [lo, hi] = self.p_range;
        if !(lo > 1.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("p range [{lo}, {hi}] must satisfy 1 < lo <= hi < ∞")));
        }
        let [a, b] = self.lambda_range;
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::InvalidParameter(format!("λ range [{a}, {b}] must lie in [0, 1]")));
        }
        if self.cells < 2 {
            return Err(Error::InvalidParameter("need at least 2 cells per side".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub corpora: Vec<CorpusSpec>,
}

impl SuiteSpec {
    /// The shipped default suite: every check on every generator family it
    /// applies to, sized for a desk run.
    pub fn default_suite() -> Self {
        use CheckKind::*;
        let mut corpora = Vec::new();
        for dim in [2, 3] {
            let s = dim as u64 * 100;
            corpora.push(
                CorpusSpec::new(dim, 20, s + 1, Generator::RandomPolytope)
                    .with_checks(&[Minkowski, Petty, ConeRoundTrip, SolverRoundTrip, SobolevBody, AffineSobolev]),
            );
            corpora.push(CorpusSpec::new(dim, 5, s + 2, Generator::ConeFamily).with_checks(&[Minkowski, ConeRoundTrip]));
            corpora.push(CorpusSpec::new(dim, 4, s + 3, Generator::BallProxy).with_checks(&[Petty]));
            corpora.push(
                CorpusSpec::new(dim, 4, s + 4, Generator::RadialFamily)
                    .with_checks(&[PolyaSzego, SobolevBody, AffineSobolev, Morrey]),
            );
            corpora.push(CorpusSpec::new(dim, 2, s + 5, Generator::Adversarial).with_checks(&[SolverRoundTrip]));
        }
        corpora.push(
            CorpusSpec::new(2, 20, 211, Generator::RandomPwa).with_checks(&[
                PolyaSzego,
                AffineSobolev,
                SobolevBody,
                Morrey,
                MoserTrudinger,
                Valuation,
                SlEquivariance,
                SymmetralBody,
                SymmetralEnergy,
                SymmetralContainment,
            ]),
        );
        let mut pwa3 = CorpusSpec::new(3, 6, 311, Generator::RandomPwa).with_checks(&[
            PolyaSzego,
            AffineSobolev,
            SobolevBody,
            SlEquivariance,
            SymmetralEnergy,
        ]);
        pwa3.cells = 2;
        pwa3.level = 3;
        corpora.push(pwa3);
        SuiteSpec { corpora }
    }
}

/// Inputs drawn for one corpus index; each check reads what it needs.
#[derive(Clone, Debug)]
pub struct Instance {
    pub k: Option<Polytope>,
    pub l: Option<Polytope>,
    pub f: Option<PwaFunction>,
    pub g: Option<PwaFunction>,
    pub phi: Option<LinearMap>,
    pub measure: Option<DiscreteSphereMeasure>,
}

fn mix(seed: u64, index: u64, salt: u64) -> u64 {
    // splitmix64 over the three words
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Polytopal ball: a regular 64-gon, or the body circumscribed about the
/// level-3 icosphere, scaled to the volume of the unit ball.
pub fn ball_proxy(dim: usize) -> Result<Polytope> {
    let k = if dim == 2 {
        Polytope::regular_polygon(64, 1.0, 0.0)?
    } else {
        let (v, _) = icosphere(3);
        let normals: Vec<Direction> = v.iter().map(|x| Direction::new(*x)).collect::<Result<_>>()?;
        Polytope::circumscribed(3, &normals)?
    };
    let w = crate::special::omega(dim as f64);
    Ok(k.scaled((w / k.volume()).powf(1.0 / dim as f64)))
}

fn random_profile<R: Rng>(r: &mut R) -> (Vec<f64>, Vec<f64>) {
    let m = r.gen_range(2..=4);
    let mut radii = vec![0.0];
    let mut acc = 0.0;
    for _ in 0..m {
        acc += r.gen_range(0.2..1.0);
        radii.push(acc);
    }
    let mut values = vec![0.0; m + 1];
    let mut v = 0.0;
    for k in (0..m).rev() {
        v += r.gen_range(0.1..1.0);
        values[k] = v;
    }
    (radii, values)
}

/// Hemisphere-degenerate measure: all atoms satisfy `u·e_0 >= 0`.
fn degenerate_measure<R: Rng>(r: &mut R, dim: usize) -> Result<DiscreteSphereMeasure> {
    let m = r.gen_range(3..=8);
    let atoms = (0..m)
        .map(|_| {
            let mut v = Vec3::zeros();
            v[0] = r.gen_range(0.0..1.0);
            for i in 1..dim {
                v[i] = r.gen_range(-1.0..1.0);
            }
            Ok(Atom {
                u: Direction::new(v)?,
                w: r.gen_range(0.5..2.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteSphereMeasure::new(dim, atoms)
}

pub fn generate_instance(spec: &CorpusSpec, index: usize) -> Result<Instance> {
    let mut r = rng(mix(spec.seed, index as u64, 0));
    let dim = spec.dim;
    let mut inst = Instance {
        k: None,
        l: None,
        f: None,
        g: None,
        phi: None,
        measure: None,
    };
    match spec.generator {
        Generator::RandomPolytope => {
            let k = random_polytope(&mut r, dim)?;
            let l = random_polytope(&mut r, dim)?;
            inst.f = Some(cone_function(&k));
            inst.g = Some(cone_function(&l));
            inst.k = Some(k);
            inst.l = Some(l);
        }
        Generator::ConeFamily => {
            let k = random_polytope(&mut r, dim)?;
            let t = r.gen_range(0.3..3.0);
            inst.f = Some(cone_function(&k));
            inst.g = Some(cone_function(&k).scaled(t));
            inst.l = Some(k.scaled(t));
            inst.k = Some(k);
        }
        Generator::RandomPwa => {
            let f = random_pwa(&mut r, dim, spec.cells, Vec3::zeros(), 1.0)?;
            let mut shift = Vec3::zeros();
            for i in 0..dim {
                shift[i] = r.gen_range(-0.8..0.8);
            }
            inst.g = Some(random_pwa(&mut r, dim, spec.cells, shift, 1.0)?);
            inst.f = Some(f);
            inst.k = Some(random_polytope(&mut r, dim)?);
            inst.l = Some(random_polytope(&mut r, dim)?);
        }
        Generator::RadialFamily => {
            let (radii, values) = random_profile(&mut r);
            let f = radial_pwa(dim, &radii, &values, if dim == 2 { 128 } else { 3 })?;
            let k = random_polytope(&mut r, dim)?;
            let (radii, values) = random_profile(&mut r);
            inst.g = Some(shaped_radial_pwa(&k, &radii, &values)?);
            inst.f = Some(f);
            inst.k = Some(k);
            inst.l = Some(random_polytope(&mut r, dim)?);
        }
        Generator::BallProxy => {
            let ball = ball_proxy(dim)?;
            // index 0 is the ball itself, the rest are ellipsoids
            let k = if index == 0 { ball.clone() } else { ball.transform(&random_sl(&mut r, dim))? };
            inst.f = Some(cone_function(&k));
            inst.l = Some(ball);
            inst.k = Some(k);
        }
        Generator::Adversarial => {
            inst.measure = Some(degenerate_measure(&mut r, dim)?);
        }
    }
    if inst.phi.is_none() && spec.generator != Generator::Adversarial {
        inst.phi = Some(random_sl(&mut r, dim));
    }
    Ok(inst)
}

/// Draws `p` uniformly from the intersection of the corpus range with the
/// check's domain; where `p = n` is admissible and in range it is chosen with
/// probability 1/4.
pub fn draw_p<R: Rng>(r: &mut R, kind: CheckKind, dim: usize, range: [f64; 2]) -> Result<f64> {
    let n = dim as f64;
    let (lo, hi, at_n) = kind.p_domain(dim);
    let n_in_range = at_n && range[0] <= n && n <= range[1];
    let a = range[0].max(lo);
    let b = range[1].min(hi);
    let open_ok = a < b;
    if n_in_range && (!open_ok || r.gen_bool(0.25)) {
        return Ok(n);
    }
    if !open_ok {
        return Err(Error::InvalidParameter(format!(
            "p range [{}, {}] misses the domain of {} in dimension {dim}",
            range[0],
            range[1],
            kind.name()
        )));
    }
    // stay off the open endpoints and off p = n where it is excluded
    let margin = 1e-3 * (b - a);
    loop {
        let p = r.gen_range(a + margin..b - margin);
        if at_n || (p - n).abs() > 1e-3 {
            return Ok(p);
        }
    }
}

fn missing(kind: CheckKind, what: &str) -> Error {
    Error::InvalidParameter(format!("the generator provides no {what} for {}", kind.name()))
}

fn error_result(kind: CheckKind, key: &str, e: &Error) -> CheckResult {
    CheckResult {
        check: kind.name().to_string(),
        digest: digest(&[kind.name().into(), key.into()]),
        lhs: 0.0,
        rhs: 0.0,
        ratio: 0.0,
        pass: false,
        tolerance: 0.0,
        theorem_backed: kind.theorem_backed(),
        equality: false,
        extra: BTreeMap::new(),
        error: Some(ErrorEntry::from(e)),
        runtime_ms: None,
    }
}

fn run_one(spec: &CorpusSpec, kind: CheckKind, index: usize, q: &SphericalQuadrature) -> CheckResult {
    let key = format!("{:?}/{}/{}/{}", spec.generator, spec.dim, spec.seed, index);
    let attempt = || -> Result<CheckResult> {
        let inst = generate_instance(spec, index)?;
        let mut r = rng(mix(spec.seed, index as u64, 1 + kind as u64));
        let p = draw_p(&mut r, kind, spec.dim, spec.p_range)?;
        let lambda = r.gen_range(spec.lambda_range[0]..=spec.lambda_range[1]);
        let k = || inst.k.as_ref().ok_or_else(|| missing(kind, "polytope"));
        let l = || inst.l.as_ref().ok_or_else(|| missing(kind, "second polytope"));
        let f = || inst.f.as_ref().ok_or_else(|| missing(kind, "function"));
        let g = || inst.g.as_ref().ok_or_else(|| missing(kind, "second function"));
        Ok(match kind {
            CheckKind::Minkowski => check_minkowski_ineq(k()?, l()?, p),
            CheckKind::Petty => check_petty(k()?, p, lambda, q),
            CheckKind::SobolevBody => check_sobolev_body_ineq(f()?, p),
            CheckKind::AffineSobolev => check_general_affine_sobolev(f()?, p, lambda, q),
            CheckKind::PolyaSzego => {
                let h = if spec.generator == Generator::RadialFamily && index % 2 == 1 { g()? } else { f()? };
                check_polya_szego(h, p, lambda, q)
            }
            CheckKind::Valuation => check_valuation(f()?, g()?, p),
            CheckKind::Morrey => check_morrey(f()?, p, lambda, q),
            CheckKind::MoserTrudinger => check_moser_trudinger(f()?, lambda, q),
            CheckKind::ConeRoundTrip => check_cone_round_trip(k()?, p),
            CheckKind::SolverRoundTrip => match (&inst.measure, &inst.k) {
                (Some(mu), _) => check_solver_round_trip(mu, None, p, None),
                (None, Some(k)) => {
                    let start: Vec<f64> = (0..k.num_facets()).map(|_| r.gen_range(0.5..2.0)).collect();
                    check_solver_round_trip(&lp_surface_measure(k, p), Some(k), p, Some(start))
                }
                (None, None) => return Err(missing(kind, "measure")),
            },
            CheckKind::SlEquivariance => {
                check_sl_equivariance(f()?, inst.phi.as_ref().ok_or_else(|| missing(kind, "map"))?, p)
            }
            CheckKind::SymmetralBody => check_symmetral_body(f()?, k()?, l()?, p),
            CheckKind::SymmetralEnergy => check_symmetral_energy(f()?, k()?, p),
            CheckKind::SymmetralContainment => check_symmetral_containment(f()?, p),
        })
    };
    attempt().unwrap_or_else(|e| error_result(kind, &key, &e))
}

/// Runs `checks` over the corpus described by `spec`. Results are in canonical
/// order (check name, digest) whatever the execution order; per-check errors
/// are recorded and the run continues.
pub fn run_suite(spec: &CorpusSpec, checks: &[CheckKind]) -> Result<Vec<CheckResult>> {
    spec.validate()?;
    if checks.is_empty() || spec.count == 0 {
        return Ok(Vec::new());
    }
    let q = SphericalQuadrature::build(spec.dim, spec.level)?;
    let jobs: Vec<(CheckKind, usize)> = checks
        .iter()
        .flat_map(|&c| (0..spec.count).map(move |i| (c, i)))
        .collect();
    let mut results = par::map(&jobs, |&(c, i)| run_one(spec, c, i, &q));
    sort_canonical(&mut results);
    Ok(results)
}

/// Runs every corpus of a suite with its own check list.
pub fn run_suite_spec(suite: &SuiteSpec) -> Result<Vec<CheckResult>> {
    let mut all = Vec::new();
    for corpus in &suite.corpora {
        all.extend(run_suite(corpus, &corpus.checks)?);
    }
    sort_canonical(&mut all);
    Ok(all)
}

pub fn sort_canonical(results: &mut [CheckResult]) {
    results.sort_by(|a, b| a.check.cmp(&b.check).then_with(|| a.digest.cmp(&b.digest)));
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub total: usize,
    pub passed: usize,
    pub violations: usize,
    pub errors: usize,
    pub equality_cases: usize,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub summary: BTreeMap<String, CheckSummary>,
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn new(results: Vec<CheckResult>) -> Self {
        let mut summary: BTreeMap<String, CheckSummary> = BTreeMap::new();
        for r in &results {
            let s = summary.entry(r.check.clone()).or_default();
            s.total += 1;
            if r.error.is_some() {
                s.errors += 1;
                continue;
            }
            s.passed += r.pass as usize;
            s.violations += r.is_violation() as usize;
            s.equality_cases += r.equality as usize;
            s.min_ratio = Some(s.min_ratio.map_or(r.ratio, |m| m.min(r.ratio)));
            s.max_ratio = Some(s.max_ratio.map_or(r.ratio, |m| m.max(r.ratio)));
        }
        SuiteReport { summary, results }
    }

    pub fn violations(&self) -> usize {
        self.results.iter().filter(|r| r.is_violation()).count()
    }

    pub fn errors(&self) -> usize {
        self.results.iter().filter(|r| r.error.is_some()).count()
    }

    /// Wall-clock times vary between runs, so they are dropped unless asked
    /// for; without them the JSON is byte-identical for a fixed spec.
    pub fn to_json(&self, with_runtime: bool) -> Result<String> {
        let mut copy = self.clone();
        if !with_runtime {
            for r in copy.results.iter_mut() {
                r.runtime_ms = None;
            }
        }
        crate::io::to_json(&copy)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,digest,lhs,rhs,ratio,pass\n");
        for r in &self.results {
            out.push_str(&format!("{},{},{:?},{:?},{:?},{}\n", r.check, r.digest, r.lhs, r.rhs, r.ratio, r.pass));
        }
        out
    }

    /// Histogram of ratios per check over `bins` equal-width bins spanning the
    /// observed range, as CSV `check,bin_lo,bin_hi,count`.
    pub fn ratio_histogram_csv(&self, bins: usize) -> String {
        let mut out = String::from("check,bin_lo,bin_hi,count\n");
        let bins = bins.max(1);
        for (name, s) in &self.summary {
            let (Some(lo), Some(hi)) = (s.min_ratio, s.max_ratio) else { continue };
            let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
            let mut counts = vec![0usize; bins];
            for r in self.results.iter().filter(|r| &r.check == name && r.error.is_none()) {
                let k = (((r.ratio - lo) / width) as usize).min(bins - 1);
                counts[k] += 1;
            }
            for (k, c) in counts.iter().enumerate() {
                let a = lo + k as f64 * width;
                out.push_str(&format!("{name},{a:?},{:?},{c}\n", a + width));
            }
        }
        out
    }
}
