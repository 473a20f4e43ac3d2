//! Gauss–Legendre rules on the sphere.
//!
//! Two integrators are provided. [`SphereGrid`] is a tensor-product rule over
//! all `n` angles of a (possibly rotated) chart, with the surface density
//! `Π sin^{n-j} θ_j` folded into the weights. [`RadialGrid`] integrates
//! functions of the distance `d` from a reference point alone, using
//! `dσ = ω_{n-1} sin^{n-1} d dd`.
//!
//! Both share a [`PolarRule`] for the distance (or first) angle. Its weights
//! are for the measure `dd / sin d`; integrands are multiplied by `sin^n d`
//! before summation. Integrands that are singular at the endpoints can be
//! handed over already multiplied ("scaled"), which keeps nodes where
//! `sin d` underflows usable.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{embed_angles, rotate_to_pole, AngularPoint, RadialPoint, Rotation};

/// A one-dimensional rule on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl Grid1D {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        pairwise_sum(&terms)
    }
}

/// `n`-point Gauss–Legendre rule mapped to `(a, b)`.
///
/// Nodes are the roots of `P_n`, found by Newton iteration from the
/// Tricomi initial guesses.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Grid1D {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    assert!(a < b, "empty interval ({a}, {b})");
    let mut reference = vec![(0.0, 0.0); n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        reference[n - 1 - i] = (x, w);
        reference[i] = (-x, w);
    }
    if n % 2 == 1 {
        reference[n / 2].0 = 0.0;
    }
    let mid = 0.5 * (a + b);
    let half_width = 0.5 * (b - a);
    let (nodes, weights) = reference
        .into_iter()
        .map(|(x, w)| (mid + half_width * x, half_width * w))
        .unzip();
    Grid1D { nodes, weights, interval: (a, b) }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// `Γ(k/2)` for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    let (mut value, mut arg) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = k as f64 / 2.0;
    while arg < target {
        value *= arg;
        arg += 1.0;
    }
    value
}

/// Surface area of `S^n`: `2 π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n + 1)
}

/// Recursive pairwise summation in index order; independent of thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

fn pairwise_sum_arrays<const K: usize>(values: &[[f64; K]]) -> [f64; K] {
    if values.len() <= 16 {
        let mut acc = [0.0; K];
        for v in values {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        return acc;
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    let (a, b) = (pairwise_sum_arrays(lo), pairwise_sum_arrays(hi));
    std::array::from_fn(|i| a[i] + b[i])
}

/// How the distance axis is subdivided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    /// A single Gauss rule on `(0, π)`.
    None,
    /// Panels halving toward both endpoints: `[π/4, π/2], [π/8, π/4], …`,
    /// `levels` of them per side plus an innermost panel touching the endpoint.
    Geometric { levels: usize },
    /// As `Geometric`, but below the innermost breakpoint `δ` the variable
    /// `s = 1 / log(e / sin d)` is used, with `log_levels` halving panels in
    /// `s`. This resolves integrands with logarithmic endpoint behaviour such
    /// as `1 / (d log²(1/d))`.
    Logarithmic { levels: usize, log_levels: usize },
}

/// Construction parameters of a [`PolarRule`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarRuleSpec {
    /// Nodes per panel (the whole rule when ungraded).
    pub nodes: usize,
    pub grading: Grading,
}

impl PolarRuleSpec {
    pub fn plain(nodes: usize) -> Self {
        Self { nodes, grading: Grading::None }
    }

    /// Geometric grading with ratio 1/2, 20 levels, 16 nodes per panel.
    pub fn graded() -> Self {
        Self {
            nodes: 16,
            grading: Grading::Geometric { levels: 20 },
        }
    }

    pub fn log_graded(levels: usize, log_levels: usize) -> Self {
        Self {
            nodes: 16,
            grading: Grading::Logarithmic { levels, log_levels },
        }
    }

    pub fn is_graded(&self) -> bool {
        !matches!(self.grading, Grading::None)
    }

    pub fn build(&self) -> PolarRule {
        PolarRule::new(*self)
    }
}

/// A rule for `∫_0^π F(d) dd / sin d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarRule {
    spec: PolarRuleSpec,
    points: Vec<RadialPoint>,
    weights: Vec<f64>,
}

impl PolarRule {
    pub fn new(spec: PolarRuleSpec) -> Self {
        assert!(spec.nodes >= 1);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut push = |p: RadialPoint, w: f64| {
            points.push(p);
            weights.push(w);
        };
        match spec.grading {
            Grading::None => {
                let g = gauss_legendre(spec.nodes, 0.0, PI);
                for (&d, &w) in g.nodes.iter().zip(&g.weights) {
                    let p = RadialPoint::new(d);
                    push(p, w / p.sin);
                }
            }
            Grading::Geometric { levels } => {
                for (lo, hi) in halving_panels(FRAC_PI_2, levels) {
                    add_distance_panel(spec.nodes, lo, hi, &mut push);
                }
            }
            Grading::Logarithmic { levels, log_levels } => {
                let panels = halving_panels(FRAC_PI_2, levels);
                let delta = panels.last().map(|p| p.1).unwrap_or(FRAC_PI_2);
                for &(lo, hi) in &panels[..panels.len() - 1] {
                    add_distance_panel(spec.nodes, lo, hi, &mut push);
                }
                let s_delta = 1.0 / (1.0 - delta.sin().ln());
                for (lo, hi) in halving_panels(s_delta, log_levels) {
                    let g = gauss_legendre(spec.nodes, lo, hi);
                    for (&s, &w) in g.nodes.iter().zip(&g.weights) {
                        let ln_sin = 1.0 - 1.0 / s;
                        for near_antipode in [false, true] {
                            let p = RadialPoint::from_log_sin(ln_sin, near_antipode);
                            // dd / sin d = ds / (s² |cos d|)
                            push(p, w / s / s / p.cos.abs());
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| points[i].d.total_cmp(&points[j].d));
        Self {
            spec,
            points: order.iter().map(|&i| points[i]).collect(),
            weights: order.iter().map(|&i| weights[i]).collect(),
        }
    }

    pub fn spec(&self) -> PolarRuleSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[RadialPoint] {
        &self.points
    }

    /// Weights for the measure `dd / sin d`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `[b/2, b], [b/4, b/2], …` (`levels` panels) and the innermost `[0, b/2^levels]`.
fn halving_panels(b: f64, levels: usize) -> Vec<(f64, f64)> {
    let mut panels = Vec::with_capacity(levels + 1);
    let mut hi = b;
    for _ in 0..levels {
        panels.push((0.5 * hi, hi));
        hi *= 0.5;
    }
    panels.push((0.0, hi));
    panels
}

/// Adds the panel `[lo, hi] ⊂ (0, π/2]` and its mirror image about `π/2`.
fn add_distance_panel(nodes: usize, lo: f64, hi: f64, push: &mut impl FnMut(RadialPoint, f64)) {
    let g = gauss_legendre(nodes, lo, hi);
    for (&d, &w) in g.nodes.iter().zip(&g.weights) {
        let left = RadialPoint::new(d);
        push(left, w / left.sin);
        let right = RadialPoint::mirrored(d);
        push(right, w / right.sin);
    }
}

fn check_finite<const K: usize>(values: &[f64; K], at: impl FnOnce() -> String) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(at()))
    }
}

/// Reduced rule for functions of the distance from a reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: usize,
    rule: PolarRule,
    /// Area of `S^{n-1}`.
    shell: f64,
}

impl RadialGrid {
    pub fn new(n: usize, spec: PolarRuleSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension { got: n, min: 2 });
        }
        Ok(Self {
            n,
            rule: spec.build(),
            shell: sphere_area(n - 1),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> &PolarRule {
        &self.rule
    }

    pub fn spec(&self) -> PolarRuleSpec {
        self.rule.spec
    }

    /// Nodes with their weights for `dσ`, i.e. `ω_{n-1} sin^{n-1}(d_i) · (rule weight)`.
    pub fn measure_weights(&self) -> Vec<f64> {
        self.rule
            .points
            .iter()
            .zip(&self.rule.weights)
            .map(|(p, w)| self.shell * p.sin.powi(self.n as i32) * w)
            .collect()
    }

    /// `∫_{S^n} g(d) dσ` for a density `g` that is finite at every node.
    pub fn integrate<G: Fn(&RadialPoint) -> f64>(&self, g: G) -> Result<f64> {
        let n = self.n as i32;
        self.integrate_scaled(|p| g(p) * p.sin.powi(n))
    }

    /// `∫_{S^n} g(d) dσ`, where the closure returns `g(d) · sin^n d`.
    pub fn integrate_scaled<F: Fn(&RadialPoint) -> f64>(&self, f: F) -> Result<f64> {
        Ok(self.integrate_scaled_many(|p| [f(p)])?[0])
    }

    /// Several scaled integrands in one pass.
    pub fn integrate_scaled_many<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(&RadialPoint) -> [f64; K],
    {
        let mut terms = Vec::with_capacity(self.rule.len());
        for (p, &w) in self.rule.points.iter().zip(&self.rule.weights) {
            let v = f(p);
            check_finite(&v, || format!("d = {:e} (sin d = {:e})", p.d, p.sin))?;
            terms.push(v.map(|x| x * w * self.shell));
        }
        Ok(pairwise_sum_arrays(&terms))
    }
}

/// Resolution of a [`SphereGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereGridSpec {
    pub polar: PolarRuleSpec,
    /// Gauss nodes for each of `θ_2, …, θ_n`.
    pub angular_nodes: usize,
}

impl SphereGridSpec {
    /// `N` nodes on every angle: 64 for `n ≤ 3`, 32 above.
    pub fn default_for(n: usize) -> Self {
        let nodes = if n <= 3 { 64 } else { 32 };
        Self {
            polar: PolarRuleSpec::plain(nodes),
            angular_nodes: nodes,
        }
    }
}

/// A quadrature node of a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct SphereNode<'a> {
    /// Embedded coordinates after the grid's orientation is applied.
    pub x: &'a [f64],
    /// Distance from the grid pole, with the trigonometric data of `θ_1`.
    pub polar: &'a RadialPoint,
}

/// Tensor-product Gauss–Legendre rule on `S^n`.
///
/// The chart's first angle runs along [`PolarRule`]; the others use plain Gauss
/// rules on `(0, π)` and, for `θ_n`, `(0, 2π)`. An orientation maps chart
/// coordinates to world coordinates, so the chart pole (where `θ_1 = 0`)
/// can be placed at any point.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    n: usize,
    spec: SphereGridSpec,
    polar: PolarRule,
    /// Embedded `S^{n-1}` points of the remaining angles.
    inner_points: Vec<Vec<f64>>,
    /// Product of `sin^{n-j} θ_j · w_j` over the remaining angles.
    inner_weights: Vec<f64>,
    chart_to_world: Rotation,
}

impl SphereGrid {
    pub fn new(n: usize, spec: SphereGridSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension { got: n, min: 2 });
        }
        let angle_rules: Vec<Grid1D> = (2..=n)
            .map(|j| {
                let hi = if j == n { TAU } else { PI };
                gauss_legendre(spec.angular_nodes, 0.0, hi)
            })
            .collect();
        let count = angle_rules.iter().map(|g| g.nodes.len()).product();
        let mut inner_points = Vec::with_capacity(count);
        let mut inner_weights = Vec::with_capacity(count);
        let mut index = vec![0usize; angle_rules.len()];
        let mut angles = vec![0.0; angle_rules.len()];
        for _ in 0..count {
            let mut w = 1.0;
            for (k, rule) in angle_rules.iter().enumerate() {
                let t = rule.nodes[index[k]];
                angles[k] = t;
                // θ_j for j = k + 2 carries density sin^{n-j}
                w *= rule.weights[index[k]] * t.sin().powi((n - k - 2) as i32);
            }
            inner_points.push(embed_angles(&angles));
            inner_weights.push(w);
            for k in (0..index.len()).rev() {
                index[k] += 1;
                if index[k] < angle_rules[k].nodes.len() {
                    break;
                }
                index[k] = 0;
            }
        }
        Ok(Self {
            n,
            spec,
            polar: spec.polar.build(),
            inner_points,
            inner_weights,
            chart_to_world: Rotation::identity(n + 1),
        })
    }

    /// The same grid with its pole moved to `phi`.
    pub fn centered_at(&self, phi: &AngularPoint) -> Self {
        assert_eq!(phi.dim(), self.n);
        self.with_orientation(rotate_to_pole(phi).transpose())
    }

    /// The same grid with world coordinates `x = R · y` for chart coordinates `y`.
    pub fn with_orientation(&self, chart_to_world: Rotation) -> Self {
        assert_eq!(chart_to_world.dim(), self.n + 1);
        Self {
            chart_to_world,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> SphereGridSpec {
        self.spec
    }

    /// World coordinates of the grid pole.
    pub fn pole(&self) -> Vec<f64> {
        let mut e1 = vec![0.0; self.n + 1];
        e1[0] = 1.0;
        self.chart_to_world.apply(&e1)
    }

    pub fn node_count(&self) -> usize {
        self.polar.len() * self.inner_points.len()
    }

    /// `∫_{S^n} f dσ` for an integrand finite at every node.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&SphereNode) -> f64 + Sync,
    {
        let n = self.n as i32;
        Ok(self.integrate_scaled_many(|node| [f(node) * node.polar.sin.powi(n)])?[0])
    }

    /// `∫_{S^n} f dσ` where the closure returns `f · sin^n θ_1`.
    pub fn integrate_scaled<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&SphereNode) -> f64 + Sync,
    {
        Ok(self.integrate_scaled_many(|node| [f(node)])?[0])
    }

    /// Several scaled integrands in one pass. Rows of constant `θ_1` are
    /// evaluated in parallel and combined by a fixed pairwise tree.
    pub fn integrate_scaled_many<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(&SphereNode) -> [f64; K] + Sync,
    {
        let rows: Result<Vec<[f64; K]>> = self
            .polar
            .points
            .par_iter()
            .zip(self.polar.weights.par_iter())
            .map(|(polar, &w)| {
                let mut chart = vec![0.0; self.n + 1];
                let mut world = vec![0.0; self.n + 1];
                chart[0] = polar.cos;
                let mut row = Vec::with_capacity(self.inner_points.len());
                for (z, &wz) in self.inner_points.iter().zip(&self.inner_weights) {
                    for (c, zi) in chart[1..].iter_mut().zip(z) {
                        *c = polar.sin * zi;
                    }
                    self.chart_to_world.apply_into(&chart, &mut world);
                    let v = f(&SphereNode { x: &world, polar });
                    check_finite(&v, || format!("x = {world:?}, d = {:e}", polar.d))?;
                    row.push(v.map(|t| t * wz));
                }
                let s = pairwise_sum_arrays(&row);
                Ok(s.map(|t| t * w))
            })
            .collect();
        Ok(pairwise_sum_arrays(&rows?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn small_gauss_rules() {
        let g = gauss_legendre(1, -1.0, 1.0);
        assert_eq!(g.nodes, vec![0.0]);
        assert_abs_diff_eq!(g.weights[0], 2.0, epsilon = 1e-15);
        let g = gauss_legendre(2, -1.0, 1.0);
        assert_abs_diff_eq!(g.nodes[0], -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.weights[1], 1.0, epsilon = 1e-15);
        let g = gauss_legendre(3, -1.0, 1.0);
        assert_abs_diff_eq!(g.integrate(|t| t.powi(4)), 0.4, epsilon = 1e-14);
    }

    #[test]
    fn gauss_exactness_degree() {
        for n in [1, 4, 7, 16, 33, 64] {
            let g = gauss_legendre(n, 0.5, 2.0);
            assert_relative_eq!(g.weights.iter().sum::<f64>(), 1.5, epsilon = 1e-13);
            assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(g.nodes[0] > 0.5 && g.nodes[n - 1] < 2.0);
            let k = 2 * n - 1;
            let exact = (2f64.powi(k as i32 + 1) - 0.5f64.powi(k as i32 + 1)) / (k as f64 + 1.0);
            assert_relative_eq!(g.integrate(|t| t.powi(k as i32)), exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn large_rules_sum_to_length() {
        let g = gauss_legendre(512, 0.0, PI);
        assert_relative_eq!(g.weights.iter().sum::<f64>(), PI, max_relative = 1e-13);
        assert!(g.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn areas() {
        assert_relative_eq!(sphere_area(1), TAU, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(2), 12.566370614359172, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 19.739208802178716, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4), 26.318945069571623, max_relative = 1e-15);
    }

    #[test]
    fn radial_closed_forms_on_s3() {
        let grid = RadialGrid::new(3, PolarRuleSpec::plain(64)).unwrap();
        assert_relative_eq!(grid.integrate(|_| 1.0).unwrap(), 2.0 * PI * PI, max_relative = 1e-10);
        let cot2 = grid.integrate(|p| (p.cos / p.sin).powi(2)).unwrap();
        assert_relative_eq!(cot2, 2.0 * PI * PI, max_relative = 1e-8);
        let sin2 = grid.integrate(|p| p.sin * p.sin).unwrap();
        assert_relative_eq!(sin2, 1.5 * PI * PI, max_relative = 1e-10);
    }

    #[test]
    fn graded_rules_cover_the_interval() {
        for spec in [
            PolarRuleSpec::plain(40),
            PolarRuleSpec::graded(),
            PolarRuleSpec::log_graded(8, 30),
        ] {
            let rule = spec.build();
            // ∫_0^π sin d · (dd / sin d) = π
            let total: f64 = rule.points().iter().zip(rule.weights()).map(|(p, w)| p.sin * w).sum();
            assert_relative_eq!(total, PI, max_relative = 1e-12);
            assert!(rule.points().windows(2).all(|w| w[0].d <= w[1].d));
        }
    }

    #[test]
    fn log_grading_resolves_log_tails() {
        // ∫_0^{π/2} cot d / L² dd = [1/L] = 1, with L = log(e / sin d)
        let rule = PolarRuleSpec::log_graded(4, 60).build();
        let total: f64 = rule
            .points()
            .iter()
            .zip(rule.weights())
            .filter(|(p, _)| p.d < FRAC_PI_2)
            .map(|(p, w)| w * p.cos / (p.log_factor * p.log_factor))
            .sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        let geometric = PolarRuleSpec::graded().build();
        let coarse: f64 = geometric
            .points()
            .iter()
            .zip(geometric.weights())
            .filter(|(p, _)| p.d < FRAC_PI_2)
            .map(|(p, w)| w * p.cos / (p.log_factor * p.log_factor))
            .sum();
        assert!((coarse - 1.0).abs() > 1e-3);
    }

    #[test]
    fn non_finite_values_abort() {
        let grid = RadialGrid::new(2, PolarRuleSpec::plain(8)).unwrap();
        let err = grid.integrate(|p| if p.d > 2.0 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        let sphere = SphereGrid::new(2, SphereGridSpec { polar: PolarRuleSpec::plain(4), angular_nodes: 4 }).unwrap();
        assert!(sphere.integrate(|node| 1.0 / (node.x[0] - node.x[0])).is_err());
    }

    #[test]
    fn sphere_grid_integrates_area() {
        let grid = SphereGrid::new(2, SphereGridSpec::default_for(2)).unwrap();
        assert_relative_eq!(grid.integrate(|_| 1.0).unwrap(), 4.0 * PI, max_relative = 1e-12);
        assert_eq!(grid.node_count(), 64 * 64);
    }
}
