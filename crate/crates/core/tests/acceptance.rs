//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use htype_core::curvature::{ricci_contraction, PlaneClass};
use htype_core::geodesics::hamiltonian;
use htype_core::{
    algebra_from_composition, catalog, classify_plane, composition_from_algebra,
    curvature_endomorphism, geodesic_closed_form, integrate_hamiltonian, omega,
    scalar_curvature, scalar_product, search_composition_2d, sectional_curvature, theta2, verify_composition,
    CatalogName, CompositionMap, HTypeAlgebra, Matrix, Plane, Regime, SearchOutcome,
    TangentElement, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances pinned by the acceptance criteria.
const COMPOSITION_REL_TOL: f64 = 1e-10;
const ROUND_TRIP_TOL: f64 = 1e-12;
const CLIFFORD_TOL: f64 = 1e-12;
const SEARCH_FLOOR: f64 = 0.1;
const SEARCH_FOUND: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-6;
const STRAIGHT_TOL: f64 = 1e-10;
const QUARTIC_TOL: f64 = 1e-9;
const HAMILTONIAN_TOL: f64 = 1e-8;
const CURVATURE_TOL: f64 = 1e-10;
const RICCI_TOL: f64 = 1e-10;

const RK4_DT: f64 = 1e-4;
const PAIRS: usize = 10_000;
const PER_REGIME: usize = 32;
const PLANES: usize = 256;
const TUPLES: usize = 256;
const RESTARTS: usize = 1000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

fn algebras() -> &'static Vec<(HTypeAlgebra, CompositionMap)> {
    static ALL: OnceLock<Vec<(HTypeAlgebra, CompositionMap)>> = OnceLock::new();
    ALL.get_or_init(|| {
        CatalogName::ALL
            .iter()
            .flat_map(|name| (1..=2).map(move |n| catalog(name.as_str(), n).expect("catalog")))
            .collect()
    })
}

fn jh(alg: &HTypeAlgebra) -> Matrix {
    alg.h().gram()
}

fn composition_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    for name in ["heis_split", "quat", "quat_split"] {
        let (_, map) = catalog(name, 1).unwrap();
        let (phi, lambda) = (map.phi(), map.lambda());
        for _ in 0..PAIRS {
            let u = random_vec(&mut rng, map.u().dim());
            let h = random_vec(&mut rng, map.h().dim());
            let lhs = phi.eval(&map.apply(&u, &h).unwrap());
            let rhs = lambda.eval(&u) * phi.eval(&h);
            let scale = u.norm_squared() * h.norm_squared();
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        passed: worst <= COMPOSITION_REL_TOL && elapsed < Duration::from_secs(1),
        detail: format!(
            "max relative residual {worst:.2e} over {} pairs (μ_-1, quaternionic a=b=1 and a=1,b=-1) in {:.3} s",
            3 * PAIRS,
            elapsed.as_secs_f64()
        ),
    }
}

fn round_trip() -> Outcome {
    let mut worst = 0.0f64;
    let mut verified = true;
    for (alg, _) in algebras() {
        let map = composition_from_algebra(alg, 1).unwrap();
        verified &= verify_composition(&map, PAIRS, COMPOSITION_REL_TOL);
        let back = algebra_from_composition(&map).unwrap();
        for (a, b) in alg.slices().iter().zip(back.slices()) {
            worst = worst.max((a - b).amax());
        }
    }
    Outcome {
        passed: verified && worst <= ROUND_TRIP_TOL,
        detail: format!(
            "{} algebras, compositions verified: {verified}, max |ΔB| {worst:.2e}",
            algebras().len()
        ),
    }
}

fn clifford_identities() -> Outcome {
    let mut rng = rng(3);
    let mut failing = Vec::new();
    let mut worst_all = 0.0f64;
    for (alg, _) in algebras() {
        let j = jh(alg);
        let mut worst = 0.0f64;
        for alpha in 0..alg.m() {
            let eps = alg.v().sign(alpha);
            let a = alg.a_matrix(alpha);
            worst = worst.max((&a * &a + &j * eps).amax());
            let jb = &j * alg.slice(alpha);
            worst = worst.max((&jb * &jb + &j * eps).amax());
            for beta in alpha + 1..alg.m() {
                let jb2 = &j * alg.slice(beta);
                worst = worst.max((&jb * &jb2 + &jb2 * &jb).amax());
            }
        }
        for _ in 0..100 {
            let theta = random_vec(&mut rng, alg.m());
            let k = &j * omega(alg, &theta).unwrap();
            let t2 = theta2(alg, &theta).unwrap();
            worst = worst.max((&k * &k + &j * t2).amax());
        }
        if worst > CLIFFORD_TOL {
            failing.push(format!("{} ({worst:.2e})", alg.label()));
        }
        worst_all = worst_all.max(worst);
    }
    Outcome {
        passed: failing.is_empty(),
        detail: if failing.is_empty() {
            format!("max residual {worst_all:.2e} on {} algebras", algebras().len())
        } else {
            format!(
                "J_H-weighted squares fail on {}; the squares hold with I in place of J_H (see validator)",
                failing.join(", ")
            )
        },
    }
}

fn nonexistence_probe() -> Outcome {
    let seed = 2024;
    let split_definite = search_composition_2d(1, 0, RESTARTS, seed).unwrap();
    let split_split = search_composition_2d(1, 1, RESTARTS, seed).unwrap();
    let definite = search_composition_2d(0, 0, RESTARTS, seed).unwrap();
    let (infeasible_ok, floor, fired) = match &split_definite {
        SearchOutcome::Infeasible { residual_floor, obstruction, .. } => {
            (*residual_floor >= SEARCH_FLOOR, *residual_floor, obstruction.is_some())
        }
        SearchOutcome::Found { residual, .. } => (false, *residual, false),
    };
    let found_ok = |o: &SearchOutcome| o.is_found() && o.residual() <= SEARCH_FOUND;
    Outcome {
        passed: infeasible_ok && fired && found_ok(&split_split) && found_ok(&definite),
        detail: format!(
            "(1,0): {} floor {floor:.3} obstruction {fired}; (1,1): {} {:.1e}; (0,0): {} {:.1e}; {RESTARTS} restarts",
            split_definite.verdict().verdict,
            split_split.verdict().verdict,
            split_split.residual(),
            definite.verdict().verdict,
            definite.residual()
        ),
    }
}

#[derive(Default)]
struct OracleSummary {
    runs: usize,
    sup_error: f64,
    straight_error: f64,
    quartic_literal: f64,
    quartic_corrected: f64,
    null_runs: usize,
    hamiltonian_drift: f64,
    elapsed: Duration,
}

fn null_theta(rng: &mut ChaCha8Rng, alg: &HTypeAlgebra) -> Option<Vector> {
    // Needs a negative and a positive vertical direction.
    let nu = alg.v().index();
    if nu == 0 || nu == alg.m() {
        return None;
    }
    let mut theta = random_vec(rng, alg.m());
    let neg: f64 = (0..nu).map(|a| theta[a] * theta[a]).sum();
    let pos: f64 = (nu..alg.m()).map(|a| theta[a] * theta[a]).sum();
    let scale = (neg / pos).sqrt();
    for a in nu..alg.m() {
        theta[a] *= scale;
    }
    Some(theta)
}

fn non_null_theta(rng: &mut ChaCha8Rng, alg: &HTypeAlgebra) -> Vector {
    loop {
        let theta = random_vec(rng, alg.m());
        if theta2(alg, &theta).unwrap().abs() >= 0.05 {
            return theta;
        }
    }
}

fn oracle() -> &'static OracleSummary {
    static SUMMARY: OnceLock<OracleSummary> = OnceLock::new();
    SUMMARY.get_or_init(|| {
        let start = Instant::now();
        let mut summary = OracleSummary::default();
        let mut rng = rng(5);
        let stride = (0.01 / RK4_DT).round() as usize;
        let s_values: Vec<f64> = (1..=100).map(|k| k as f64 * 0.01).collect();
        for (alg, _) in algebras() {
            for reg in [Regime::ZeroTheta, Regime::NullTheta, Regime::NonNull] {
                for _ in 0..PER_REGIME {
                    let theta = match reg {
                        Regime::ZeroTheta => Vector::zeros(alg.m()),
                        Regime::NullTheta => match null_theta(&mut rng, alg) {
                            Some(t) => t,
                            None => break,
                        },
                        Regime::NonNull => non_null_theta(&mut rng, alg),
                    };
                    let v0 = random_vec(&mut rng, alg.n());
                    let closed = geodesic_closed_form(alg, &v0, &theta, &s_values).unwrap();
                    assert_eq!(closed.regime, reg);
                    let rk4 = integrate_hamiltonian(alg, &v0, &theta, 1.0, RK4_DT).unwrap();
                    summary.runs += 1;
                    for (k, sample) in closed.samples.iter().enumerate() {
                        let other = &rk4.samples[k * stride];
                        debug_assert!((other.s - sample.s).abs() < 1e-12);
                        let err = (&sample.point.x - &other.point.x)
                            .amax()
                            .max((&sample.point.t - &other.point.t).amax());
                        summary.sup_error = summary.sup_error.max(err);
                    }
                    let h0 = hamiltonian(alg, &rk4.samples[0].point, &rk4.samples[0].covector).unwrap();
                    for sample in &rk4.samples {
                        let h = hamiltonian(alg, &sample.point, &sample.covector).unwrap();
                        summary.hamiltonian_drift = summary.hamiltonian_drift.max((h - h0).abs());
                    }
                    match reg {
                        Regime::ZeroTheta => {
                            for tr in [&closed, &rk4] {
                                for sample in &tr.samples {
                                    let line = (&sample.point.x - &v0 * sample.s).amax();
                                    let err = line.max(sample.point.t.amax());
                                    summary.straight_error = summary.straight_error.max(err);
                                }
                            }
                        }
                        Regime::NullTheta => {
                            summary.null_runs += 1;
                            let om = omega(alg, &theta).unwrap();
                            let j = jh(alg);
                            let ov = &om * &v0;
                            let w = &j * &ov;
                            for sample in &closed.samples {
                                let s = sample.s;
                                for alpha in 0..alg.m() {
                                    let b = alg.slice(alpha);
                                    let bov = b * &ov;
                                    let literal = s * s / 4.0 * v0.dot(&(b * &v0))
                                        - s.powi(3) / 12.0 * scalar_product(alg.h(), &v0, &bov).unwrap()
                                        + s.powi(4) / 16.0 * ov.dot(&bov);
                                    let corrected = -s.powi(3) / 12.0 * v0.dot(&(b * &w))
                                        + s.powi(4) / 16.0 * w.dot(&(b * &w));
                                    let q = sample.point.t[alpha];
                                    summary.quartic_literal = summary.quartic_literal.max((literal - q).abs());
                                    summary.quartic_corrected =
                                        summary.quartic_corrected.max((corrected - q).abs());
                                }
                            }
                        }
                        Regime::NonNull => {}
                    }
                }
            }
        }
        summary.elapsed = start.elapsed();
        summary
    })
}

fn geodesic_oracle() -> Outcome {
    let s = oracle();
    let passed = s.sup_error <= ORACLE_TOL
        && s.straight_error <= STRAIGHT_TOL
        && s.quartic_literal <= QUARTIC_TOL
        && s.elapsed < Duration::from_secs(30);
    Outcome {
        passed,
        detail: format!(
            "{} trajectories, sup |closed - RK4| {:.2e}, straight-line error {:.2e}, \
             null-θ quartic vs quadrature {:.2e} as printed / {:.2e} corrected ({} null runs), {:.1} s",
            s.runs,
            s.sup_error,
            s.straight_error,
            s.quartic_literal,
            s.quartic_corrected,
            s.null_runs,
            s.elapsed.as_secs_f64()
        ),
    }
}

fn hamiltonian_conservation() -> Outcome {
    let s = oracle();
    Outcome {
        passed: s.hamiltonian_drift <= HAMILTONIAN_TOL,
        detail: format!("max |H(s) - H(0)| {:.2e} over {} RK4 trajectories", s.hamiltonian_drift, s.runs),
    }
}

fn well_conditioned(plane: &Plane) -> bool {
    let e = |t: &TangentElement| t.h.norm_squared() + t.v.norm_squared();
    plane.discriminant.abs() >= 1e-2 * e(&plane.a) * e(&plane.b)
}

fn sectional_constants() -> Outcome {
    let mut rng = rng(7);
    let (mut mixed, mut vertical, mut stable, mut abelian) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut n_mixed, mut n_vert, mut n_stable, mut n_ab) = (0, 0, 0, 0);
    let mut misclassified = 0;
    for (alg, _) in algebras() {
        let hz = |rng: &mut ChaCha8Rng| TangentElement::horizontal(alg, random_vec(rng, alg.n()));
        let vt = |rng: &mut ChaCha8Rng| TangentElement::vertical(alg, random_vec(rng, alg.m()));
        let mut count = 0;
        while count < PLANES {
            let p = Plane::new(alg, hz(&mut rng), vt(&mut rng)).unwrap();
            if !well_conditioned(&p) {
                continue;
            }
            count += 1;
            n_mixed += 1;
            misclassified += usize::from(classify_plane(alg, &p).class != PlaneClass::Mixed);
            mixed = mixed.max((sectional_curvature(alg, &p).unwrap() + 0.25).abs());
        }
        if alg.m() >= 2 {
            let mut count = 0;
            while count < PLANES {
                let p = Plane::new(alg, vt(&mut rng), vt(&mut rng)).unwrap();
                if !well_conditioned(&p) {
                    continue;
                }
                count += 1;
                n_vert += 1;
                vertical = vertical.max(sectional_curvature(alg, &p).unwrap().abs());
            }
        }
        let mut count = 0;
        while count < PLANES {
            let h = random_vec(&mut rng, alg.n());
            let v = random_vec(&mut rng, alg.m());
            if scalar_product(alg.v(), &v, &v).unwrap().abs() < 0.1 {
                continue;
            }
            let h2 = alg.mu(&v, &h).unwrap();
            let p = Plane::new(alg, TangentElement::horizontal(alg, h), TangentElement::horizontal(alg, h2)).unwrap();
            if !well_conditioned(&p) {
                continue;
            }
            count += 1;
            n_stable += 1;
            misclassified += usize::from(classify_plane(alg, &p).class != PlaneClass::Stable);
            stable = stable.max((sectional_curvature(alg, &p).unwrap() - 0.75).abs());
        }
        // Abelian planes need ker ad_h to exceed span{h}.
        if alg.n() > alg.m() + 2 {
            let mut count = 0;
            let mut attempts = 0;
            while count < PLANES && attempts < 100 * PLANES {
                attempts += 1;
                let h = random_vec(&mut rng, alg.n());
                let ad = alg.ad_matrix(&h).unwrap();
                let svd = {
                    let mut padded = Matrix::zeros(alg.n(), alg.n());
                    padded.view_mut((0, 0), (alg.m(), alg.n())).copy_from(&ad);
                    padded.svd(false, true)
                };
                let v_t = svd.v_t.unwrap();
                let kernel: Vec<Vector> = (0..alg.n())
                    .filter(|&k| svd.singular_values[k] <= 1e-10 * svd.singular_values.max())
                    .map(|k| v_t.row(k).transpose())
                    .collect();
                let mut h2 = Vector::zeros(alg.n());
                for k in &kernel {
                    h2 += k * rng.random_range(-1.0..=1.0);
                }
                let p = Plane::new(alg, TangentElement::horizontal(alg, h), TangentElement::horizontal(alg, h2)).unwrap();
                if !well_conditioned(&p) {
                    continue;
                }
                count += 1;
                n_ab += 1;
                misclassified += usize::from(classify_plane(alg, &p).class != PlaneClass::Abelian);
                abelian = abelian.max(sectional_curvature(alg, &p).unwrap().abs());
            }
        }
    }
    let worst = mixed.max(vertical).max(stable).max(abelian);
    Outcome {
        passed: worst <= CURVATURE_TOL && misclassified == 0 && n_ab > 0,
        detail: format!(
            "mixed {n_mixed} planes |k+1/4| {mixed:.1e}; vertical {n_vert} |k| {vertical:.1e}; \
             stable {n_stable} |k-3/4| {stable:.1e}; abelian {n_ab} |k| {abelian:.1e}; misclassified {misclassified}"
        ),
    }
}

fn ricci_closed_form() -> Outcome {
    let mut block_failures = Vec::new();
    let mut scalar_failures = Vec::new();
    let mut listed_ok = true;
    let mut discrepancies_reported = true;
    for (alg, _) in algebras() {
        let (n, m) = (alg.n(), alg.m());
        let sum_v = alg.v().sign_sum();
        let sum_h = alg.h().sign_sum();
        let printed = Matrix::from_fn(n + m, n + m, |a, b| match (a == b, a < n) {
            (false, _) => 0.0,
            (true, true) => -0.5 * sum_v * alg.h().sign(a),
            (true, false) => 0.25 * sum_h * alg.v().sign(a - n),
        });
        let direct = ricci_contraction(alg);
        let dev = (&direct - &printed).amax();
        if dev > RICCI_TOL {
            block_failures.push(format!("{} ({dev:.2})", alg.label()));
        }
        let sc = scalar_curvature(alg).unwrap();
        if (sc.trace - sc.formula).abs() > RICCI_TOL {
            scalar_failures.push(format!("{} (trace {}, formula {})", alg.label(), sc.trace, sc.formula));
        }
        let (name, k) = alg.label().split_once(':').unwrap();
        let k: f64 = k.parse().unwrap();
        match name {
            "heis" => listed_ok &= sc.trace == -k / 2.0,
            "quat" => listed_ok &= sc.trace == -3.0 * k,
            _ => discrepancies_reported &= !sc.consistent && sc.listed == Some(-0.25),
        }
    }
    Outcome {
        passed: block_failures.is_empty() && scalar_failures.is_empty() && listed_ok && discrepancies_reported,
        detail: format!(
            "printed blocks fail on [{}]; trace != formula on [{}]; S = -n/2, -3n exact: {listed_ok}; \
             split discrepancy reported: {discrepancies_reported}",
            block_failures.join(", "),
            scalar_failures.join(", ")
        ),
    }
}

fn curvature_symmetries() -> Outcome {
    let mut rng = rng(9);
    let mut worst = 0.0f64;
    for (alg, _) in algebras() {
        let t = |rng: &mut ChaCha8Rng| TangentElement::new(random_vec(rng, alg.n()), random_vec(rng, alg.m()));
        let r = |x: &TangentElement, y: &TangentElement, z: &TangentElement| {
            curvature_endomorphism(alg, x, y, z).unwrap()
        };
        for _ in 0..TUPLES {
            let (x, y, z, w) = (t(&mut rng), t(&mut rng), t(&mut rng), t(&mut rng));
            let rxyz = r(&x, &y, &z);
            worst = worst.max(rxyz.add(&r(&y, &x, &z)).max_abs());
            let lhs = rxyz.inner(alg, &w);
            worst = worst.max((lhs + r(&x, &y, &w).inner(alg, &z)).abs());
            worst = worst.max((lhs - r(&z, &w, &x).inner(alg, &y)).abs());
            let bianchi = rxyz.add(&r(&y, &z, &x)).add(&r(&z, &x, &y));
            worst = worst.max(bianchi.max_abs());
        }
    }
    Outcome {
        passed: worst <= CURVATURE_TOL,
        detail: format!("max residual {worst:.2e} over {TUPLES} tuples on {} algebras", algebras().len()),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("composition identities", composition_identities),
        ("algebra/composition round trip", round_trip),
        ("Clifford identities", clifford_identities),
        ("composition nonexistence probe", nonexistence_probe),
        ("geodesic oracle agreement", geodesic_oracle),
        ("Hamiltonian conservation", hamiltonian_conservation),
        ("sectional curvature constants", sectional_constants),
        ("Ricci closed form", ricci_closed_form),
        ("curvature symmetries", curvature_symmetries),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {}", k + 1, out.detail);
        failed += usize::from(!out.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
