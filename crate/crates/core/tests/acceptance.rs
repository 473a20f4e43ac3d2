//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphere_hardy::functionals::{
    evaluate, evaluate_on_sphere, evaluate_radial, ibp_identity_i, ibp_identity_j, pointwise_bound_check, GridSpec,
    Grids, Inequality,
};
use sphere_hardy::functions::{radial_corpus, smooth_corpus, RadialProfile, TestFunction};
use sphere_hardy::geometry::{
    geodesic_distance, geodesic_distance_embedded, laplace_beltrami_fd, lindqvist_check, metric_scale_factors,
    surface_gradient_fd, AngularPoint, RadialFunction, RadialPoint,
};
use sphere_hardy::quadrature::{gamma_half, Grading, PolarRuleSpec, RadialGrid, SphereGrid, SphereGridSpec};
use sphere_hardy::sharpness::{counterexample_search, search_grid_spec, sweep, Resolution};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn random_point(n: usize, rng: &mut impl Rng) -> AngularPoint {
    let mut theta: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..PI)).collect();
    theta.push(rng.random_range(0.0..2.0 * PI));
    AngularPoint::new(theta).unwrap()
}

/// Uniformly drawn chart angles, kept where every scale factor is at least
/// 0.2 and the distance to `pole` lies in `[0.1, π - 0.1]`.
fn interior_point(pole: &AngularPoint, rng: &mut impl Rng) -> AngularPoint {
    loop {
        let p = random_point(pole.dim(), rng);
        let d = geodesic_distance(&p, pole);
        let conditioned = metric_scale_factors(&p).is_ok_and(|h| h.iter().all(|&v| v >= 0.2));
        if conditioned && d > 0.1 && d < PI - 0.1 {
            return p;
        }
    }
}

fn distance_samples(seed: u64) -> Vec<(AngularPoint, AngularPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 2..=5 {
        for _ in 0..3 {
            let pole = random_point(n, &mut rng);
            for _ in 0..100 {
                out.push((interior_point(&pole, &mut rng), pole.clone()));
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (x, pole) in distance_samples(1) {
        let g = surface_gradient_fd(|q| geodesic_distance(q, &pole), &x, 1e-4).map_err(|e| e.to_string())?;
        worst = worst.max((g.norm() - 1.0).abs());
    }
    check(worst < 1e-6, format!("1200 points, max | |grad d| - 1 | = {worst:.2e} (tol 1e-6)"))
}

fn laplacian_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (x, pole) in distance_samples(2) {
        let n = x.dim() as f64;
        let d = geodesic_distance(&x, &pole);
        let cot = d.cos() / d.sin();
        let lap = laplace_beltrami_fd(|q| geodesic_distance(q, &pole), &x, 1e-4).map_err(|e| e.to_string())?;
        worst = worst.max((lap - (n - 1.0) * cot).abs() / (1.0 + cot.abs()));
    }
    check(worst < 1e-5, format!("1200 points, max |lap d - (n-1) cot d| / (1 + |cot d|) = {worst:.2e} (tol 1e-5)"))
}

fn quadrature_normalization() -> Outcome {
    let mut area_err: f64 = 0.0;
    let mut corpus_err: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=5 {
        let exact = 2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n + 1);
        let grid = SphereGrid::new(n, SphereGridSpec::default_for(n)).map_err(|e| e.to_string())?;
        let area = grid.integrate(|_| 1.0).map_err(|e| e.to_string())?;
        area_err = area_err.max(rel(area, exact));

        // radial integrands are constant on the inner spheres, so a coarse
        // inner rule loses nothing
        let pole = random_point(n, &mut rng);
        let spec = SphereGridSpec { angular_nodes: 12, ..SphereGridSpec::default_for(n) };
        let centred = SphereGrid::new(n, spec).map_err(|e| e.to_string())?.centered_at(&pole);
        let pole_x = pole.embed().x;
        let radial = RadialGrid::new(n, PolarRuleSpec::graded()).map_err(|e| e.to_string())?;
        for g in radial_corpus() {
            let product = centred
                .integrate(|node| g.value(&RadialPoint::new(geodesic_distance_embedded(node.x, &pole_x))))
                .map_err(|e| e.to_string())?;
            let reduced = radial.integrate(|at| g.value(at)).map_err(|e| e.to_string())?;
            // relative to ∫|g|, since several profiles integrate to zero
            let scale = radial.integrate(|at| g.value(at).abs()).map_err(|e| e.to_string())?;
            corpus_err = corpus_err.max((product - reduced).abs() / scale);
        }
    }
    check(
        area_err < 1e-10 && corpus_err < 1e-7,
        format!("n = 2..5: area rel err {area_err:.1e} (tol 1e-10), product vs radial err / integral of |g| {corpus_err:.1e} (tol 1e-7)"),
    )
}

fn spot_values() -> Outcome {
    let ineq = Inequality::subcritical(3, 2.0).unwrap();
    let grid = RadialGrid::new(3, PolarRuleSpec::graded()).unwrap();
    let r = evaluate_radial(&ineq, &RadialProfile::sin(), &grid).map_err(|e| e.to_string())?;
    let pi2 = PI * PI;
    let errs = [
        rel(r.terms.grad, pi2 / 2.0),
        rel(r.terms.middle, 1.5 * pi2),
        rel(r.terms.singular, pi2 / 2.0),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    check(
        worst < 1e-7,
        format!(
            "A = {:.10}, B = {:.10}, C = {:.10}, max rel err {worst:.1e} (tol 1e-7)",
            r.terms.grad, r.terms.middle, r.terms.singular
        ),
    )
}

fn inequality_deficits() -> Outcome {
    let cases = [
        Inequality::subcritical(3, 2.0),
        Inequality::subcritical(4, 2.0),
        Inequality::subcritical(4, 3.0),
        Inequality::subcritical(5, 2.0),
        Inequality::critical(2),
        Inequality::critical(3),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_rel = f64::INFINITY;
    let mut worst_gap = f64::INFINITY;
    let mut count = 0;
    for ineq in cases {
        let ineq = ineq.unwrap();
        let grids = Grids::new(ineq.n, GridSpec::for_corpus(&ineq, None, true)).map_err(|e| e.to_string())?;
        let pole = random_point(ineq.n, &mut rng);
        for f in smooth_corpus(ineq.n, 50, 1000).map_err(|e| e.to_string())? {
            let r = evaluate(&ineq, &TestFunction::smooth(f, pole.clone()), &grids).map_err(|e| e.to_string())?;
            worst_rel = worst_rel.min(r.relative_deficit());
            if let Some(q) = r.quotient {
                worst_gap = worst_gap.min(q - ineq.constant());
            }
            count += 1;
        }
    }
    check(
        worst_rel >= -1e-7 && worst_gap >= -1e-7,
        format!("{count} reports, min deficit/(A+B+C) = {worst_rel:.3e} (tol -1e-7), min Q - constant = {worst_gap:.3e}"),
    )
}

fn ibp_identities() -> Outcome {
    let mut worst_i: f64 = 0.0;
    let mut worst_j: f64 = 0.0;
    for (n, p) in [(3, 2.0), (4, 2.0), (4, 3.0), (5, 2.0)] {
        let grid = RadialGrid::new(n, PolarRuleSpec { nodes: 64, grading: Grading::Geometric { levels: 40 } }).unwrap();
        for u in radial_corpus() {
            worst_i = worst_i.max(ibp_identity_i(&u, n, p, &grid).map_err(|e| e.to_string())?.relative_error());
        }
    }
    for n in [2, 3] {
        let spec = PolarRuleSpec { nodes: 64, grading: Grading::Logarithmic { levels: 20, log_levels: 40 } };
        let grid = RadialGrid::new(n, spec).unwrap();
        for u in radial_corpus() {
            worst_j = worst_j.max(ibp_identity_j(&u, n, &grid).map_err(|e| e.to_string())?.relative_error());
        }
    }
    check(
        worst_i < 1e-6 && worst_j < 1e-6,
        format!("max rel err: I {worst_i:.1e}, J {worst_j:.1e} (tol 1e-6)"),
    )
}

fn pointwise_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = [
        (3, 2.0, RadialProfile::constant(1.0)),
        (3, 2.0, RadialProfile::sin()),
        (4, 3.0, RadialProfile::CosPolynomial { coefficients: vec![1.0, 1.0] }),
        (5, 2.0, RadialProfile::ExpCos { rate: 1.5 }),
        (5, 4.0, RadialProfile::product(vec![RadialProfile::sin(), RadialProfile::cos()])),
    ];
    let mut violations = 0;
    for (n, p, psi) in cases {
        let pole = random_point(n, &mut rng);
        let sample: Vec<AngularPoint> = (0..1000).map(|_| random_point(n, &mut rng)).collect();
        violations += pointwise_bound_check(n, p, &psi, &pole, &sample);
    }
    check(violations == 0, format!("5 x 1000 points, {violations} violations"))
}

fn sharpness_trend() -> Outcome {
    let cases: [(Inequality, &[f64]); 6] = [
        (Inequality::subcritical(3, 2.0).unwrap(), &[1.0, 0.3, 0.1, 0.03, 0.01]),
        (Inequality::critical(2).unwrap(), &[0.4, 0.2, 0.1, 0.05]),
        (Inequality::subcritical(4, 2.0).unwrap(), &[1.0, 0.1, 0.01, 0.001]),
        (Inequality::subcritical(4, 3.0).unwrap(), &[1.0, 0.1, 0.01, 0.001]),
        (Inequality::subcritical(5, 2.0).unwrap(), &[1.0, 0.1, 0.01, 0.001]),
        (Inequality::critical(3).unwrap(), &[0.4, 0.2, 0.1, 0.05]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (ineq, eps) in cases {
        let r = sweep(&ineq, eps, Resolution::AUTO).map_err(|e| e.to_string())?;
        ok &= r.passes();
        parts.push(format!(
            "{}(n={}, p={}) Q = {:.5} vs {:.5} ({:+.1}%)",
            r.kind,
            r.n,
            r.p,
            r.final_quotient(),
            r.target,
            100.0 * (r.final_quotient() / r.target - 1.0)
        ));
    }
    check(ok, parts.join("; "))
}

fn homogeneity_and_pole_invariance() -> Outcome {
    let mut worst_h: f64 = 0.0;
    for ineq in [Inequality::subcritical(3, 2.0).unwrap(), Inequality::critical(2).unwrap()] {
        let grid = RadialGrid::new(ineq.n, GridSpec::for_inequality(&ineq).radial).unwrap();
        for u in radial_corpus() {
            let q = evaluate_radial(&ineq, &u, &grid).map_err(|e| e.to_string())?.quotient.unwrap();
            for c in [2.0, -3.0, 1e-4] {
                let qc = evaluate_radial(&ineq, &u.clone().scaled(c), &grid)
                    .map_err(|e| e.to_string())?
                    .quotient
                    .unwrap();
                worst_h = worst_h.max(rel(q, qc));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_phi: f64 = 0.0;
    let ineq = Inequality::subcritical(3, 2.0).unwrap();
    let grid = SphereGrid::new(3, SphereGridSpec { polar: PolarRuleSpec::graded(), angular_nodes: 16 }).unwrap();
    for g in radial_corpus() {
        let (a, b) = (random_point(3, &mut rng), random_point(3, &mut rng));
        let ra = evaluate_on_sphere(&ineq, &TestFunction::radial(g.clone(), a), &grid).map_err(|e| e.to_string())?;
        let rb = evaluate_on_sphere(&ineq, &TestFunction::radial(g, b), &grid).map_err(|e| e.to_string())?;
        for (x, y) in [
            (ra.terms.grad, rb.terms.grad),
            (ra.terms.middle, rb.terms.middle),
            (ra.terms.singular, rb.terms.singular),
        ] {
            worst_phi = worst_phi.max(rel(x, y));
        }
    }
    check(
        worst_h < 1e-10 && worst_phi < 1e-7,
        format!("homogeneity rel err {worst_h:.1e} (tol 1e-10), pole invariance rel err {worst_phi:.1e} (tol 1e-7)"),
    )
}

fn claimed_search() -> Outcome {
    let grid = SphereGrid::new(3, search_grid_spec()).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [2.0, 1.5] {
        let a = counterexample_search(3, p, 200, 0, &grid).map_err(|e| e.to_string())?;
        let b = counterexample_search(3, p, 200, 0, &grid).map_err(|e| e.to_string())?;
        ok &= a == b && a.trace.len() == 200;
        parts.push(format!(
            "p = {p}: min deficit/(A+B+C) = {:.4e}, baseline deficit {:.6}{}",
            a.min_relative_deficit,
            a.baseline.deficit,
            if a.candidate { " CANDIDATE" } else { "" }
        ));
    }
    check(ok, format!("deterministic; {}", parts.join("; ")))
}

fn basic_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    for i in 0..100_000 {
        let dim = rng.random_range(1..=6);
        let p = 1.0 + rng.random_range(1e-9..=5.0);
        // spread the relative size of x and y over many orders of magnitude
        let sx = 10f64.powf(rng.random_range(-6.0..6.0));
        let mut x: Vec<f64> = (0..dim).map(|_| sx * rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if i % 1000 == 0 {
            x.iter_mut().for_each(|v| *v = 0.0);
        }
        if !lindqvist_check(&x, &y, p) {
            violations += 1;
        }
    }
    check(violations == 0, format!("100000 draws, {violations} violations"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("gradient of the distance has unit norm", gradient_identity),
        ("Laplacian of the distance is (n-1) cot d", laplacian_identity),
        ("quadrature normalization", quadrature_normalization),
        ("closed-form spot values", spot_values),
        ("inequality deficits on the smooth corpus", inequality_deficits),
        ("integration-by-parts identities", ibp_identities),
        ("pointwise gradient bound", pointwise_bound),
        ("sharpness trend", sharpness_trend),
        ("homogeneity and pole invariance", homogeneity_and_pole_invariance),
        ("claimed inequality search (exploratory)", claimed_search),
        ("basic vector inequality", basic_inequality),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{status}] criterion {:>2}: {name}: {detail} [{secs:.1}s]", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
