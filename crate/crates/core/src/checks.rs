//! Randomized checks of the geometric identities, the two integration by
//! parts identities and the basic vector inequality.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functionals::{ibp_identity_i, ibp_identity_j};
use crate::functions::radial_corpus;
use crate::geometry::{
    geodesic_distance, laplace_beltrami_fd, lindqvist_check, metric_scale_factors, surface_gradient_fd, AngularPoint,
};
use crate::quadrature::{Grading, PolarRuleSpec, RadialGrid};

/// Smallest chart scale factor accepted at a finite-difference sample point.
/// Rounding in `f` is amplified by `1 / h_k²` in the second differences.
pub const MIN_SCALE_FACTOR: f64 = 0.2;

/// Smallest distance from `±Φ` at a finite-difference sample point.
pub const MIN_POLE_DISTANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub n: Option<usize>,
    pub samples: usize,
    /// Largest observed error, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: &str, n: Option<usize>, samples: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            n,
            samples,
            worst,
            tolerance,
            passed: worst < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    pub dims: Vec<usize>,
    /// Finite-difference step.
    pub h: f64,
    pub seed: u64,
    /// Poles per dimension.
    pub poles: usize,
    /// Sample points per pole.
    pub points: usize,
    pub lindqvist_draws: usize,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 5],
            h: 1e-4,
            seed: 0,
            poles: 3,
            points: 100,
            lindqvist_draws: 100_000,
        }
    }
}

/// A uniformly random point of the chart domain.
pub fn random_point(n: usize, rng: &mut impl Rng) -> AngularPoint {
    let mut theta: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..PI)).collect();
    theta.push(rng.random_range(0.0..2.0 * PI));
    AngularPoint::new(theta).expect("angles drawn inside their ranges")
}

/// A random point with every scale factor at least [`MIN_SCALE_FACTOR`] and
/// distance from `pole` in `[MIN_POLE_DISTANCE, π - MIN_POLE_DISTANCE]`.
pub fn random_interior_point(pole: &AngularPoint, rng: &mut impl Rng) -> AngularPoint {
    loop {
        let p = random_point(pole.dim(), rng);
        let d = geodesic_distance(&p, pole);
        let conditioned = metric_scale_factors(&p).is_ok_and(|h| h.iter().all(|&v| v >= MIN_SCALE_FACTOR));
        if conditioned && d > MIN_POLE_DISTANCE && d < PI - MIN_POLE_DISTANCE {
            return p;
        }
    }
}

/// Finite-difference checks of `|∇d| = 1`, `Δd = (n-1) cot d` and
/// `⟨∇ sin^{1-n} d, ∇d⟩ = -Δd / sin^{n-1} d` on `S^n`.
pub fn distance_checks(n: usize, cfg: &IdentityConfig) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(n as u64);
    let nf = n as f64;
    let (mut grad, mut lap, mut inv) = (0.0f64, 0.0f64, 0.0f64);
    let mut samples = 0;
    for _ in 0..cfg.poles {
        let pole = random_point(n, &mut rng);
        let dist = |q: &AngularPoint| geodesic_distance(q, &pole);
        for _ in 0..cfg.points {
            let x = random_interior_point(&pole, &mut rng);
            let d = dist(&x);
            let cot = d.cos() / d.sin();
            let g = surface_gradient_fd(dist, &x, cfg.h)?;
            grad = grad.max((g.norm() - 1.0).abs());
            let l = laplace_beltrami_fd(dist, &x, cfg.h)?;
            lap = lap.max((l - (nf - 1.0) * cot).abs() / (1.0 + cot.abs()));
            let a = surface_gradient_fd(|q| dist(q).sin().powf(1.0 - nf), &x, cfg.h)?;
            let lhs: f64 = a.components.iter().zip(&g.components).map(|(u, v)| u * v).sum();
            // both sides vanish with cot d, so the scale is that of the Laplacian check
            let weight = d.sin().powf(1.0 - nf);
            inv = inv.max((lhs + l * weight).abs() / ((1.0 + cot.abs()) * weight));
            samples += 1;
        }
    }
    Ok(vec![
        CheckOutcome::new("distance gradient norm", Some(n), samples, grad, 1e-6),
        CheckOutcome::new("distance Laplacian", Some(n), samples, lap, 1e-5),
        CheckOutcome::new("inverse sine power identity", Some(n), samples, inv, 1e-5),
    ])
}

/// Both integration by parts identities over the radial corpus: `I` for
/// every integer `2 ≤ p < n`, `J` for `p = n`.
pub fn ibp_checks(n: usize) -> Result<Vec<CheckOutcome>> {
    let corpus = radial_corpus();
    let mut out = Vec::new();
    if n >= 3 {
        let grid = RadialGrid::new(n, PolarRuleSpec { nodes: 64, grading: Grading::Geometric { levels: 40 } })?;
        let mut worst = 0.0f64;
        let mut samples = 0;
        for p in 2..n {
            for u in &corpus {
                worst = worst.max(ibp_identity_i(u, n, p as f64, &grid)?.relative_error());
                samples += 1;
            }
        }
        out.push(CheckOutcome::new("integration by parts I", Some(n), samples, worst, 1e-6));
    }
    let spec = PolarRuleSpec {
        nodes: 64,
        grading: Grading::Logarithmic { levels: 20, log_levels: 40 },
    };
    let grid = RadialGrid::new(n, spec)?;
    let mut worst = 0.0f64;
    for u in &corpus {
        worst = worst.max(ibp_identity_j(u, n, &grid)?.relative_error());
    }
    out.push(CheckOutcome::new("integration by parts J", Some(n), corpus.len(), worst, 1e-6));
    Ok(out)
}

/// Random draws of `|x+y|^p ≥ |x|^p + p|x|^{p-2}⟨x,y⟩` with `p ∈ (1, 6]`,
/// dimensions 1 to 6 and `|x| / |y|` spread over twelve orders of magnitude.
pub fn lindqvist_draws(draws: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for i in 0..draws {
        let dim = rng.random_range(1..=6);
        let p = 1.0 + rng.random_range(1e-9..=5.0);
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
    CheckOutcome {
        name: "basic vector inequality violations".into(),
        n: None,
        samples: draws,
        worst: violations as f64,
        tolerance: 1.0,
        passed: violations == 0,
    }
}

/// Every check above for each dimension in `cfg.dims`.
pub fn identity_suite(cfg: &IdentityConfig) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for &n in &cfg.dims {
        out.extend(distance_checks(n, cfg)?);
        out.extend(ibp_checks(n)?);
    }
    out.push(lindqvist_draws(cfg.lindqvist_draws, cfg.seed));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let cfg = IdentityConfig { points: 20, lindqvist_draws: 1000, ..Default::default() };
        let outcomes = identity_suite(&cfg).unwrap();
        assert_eq!(outcomes.len(), 4 * 3 + 3 * 2 + 1 + 1);
        for o in &outcomes {
            assert!(o.passed, "{o:?}");
        }
    }

    #[test]
    fn interior_points_are_well_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pole = random_point(5, &mut rng);
        for _ in 0..100 {
            let p = random_interior_point(&pole, &mut rng);
            assert!(metric_scale_factors(&p).unwrap().iter().all(|&h| h >= MIN_SCALE_FACTOR));
        }
    }
}
