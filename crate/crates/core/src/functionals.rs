//! The three Hardy-type functionals and the identities used to derive them.
//!
//! With `λ = (n-p)/p`, `μ = (n-1)/n` and `L = log(e / sin d)`:
//!
//! | kind        | B                                   | C                          | lhs                  | rhs       |
//! |-------------|-------------------------------------|----------------------------|----------------------|-----------|
//! | subcritical | `∫ |u|^p / |tan d|^{p-2}`           | `∫ |u|^p / |tan d|^p`      | `A + (p-1)λ^{p-1} B` | `λ^p C`   |
//! | critical    | `∫ |u|^n / (|tan d|^{n-2} L^{n-1})` | `∫ |u|^n / (|tan d|^n L^n)`| `A + (n-1)μ^{n-1} B` | `μ^n C`   |
//! | claimed     | `∫ |u|^p / sin^{p-2} d`             | as subcritical             | `A + λ^{p-1} B`      | `λ^p C`   |
//!
//! where `A = ∫ |∇u|^p` (with `p = n` in the critical case).
//!
//! Every integrand is evaluated in "scaled" form, multiplied by `sin^n d`,
//! which keeps it finite at quadrature nodes where `sin d` underflows.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{RadialProfile, TestFunction};
use crate::geometry::{distance_gradient, dot, AngularPoint, RadialFunction, RadialPoint};
use crate::quadrature::{
    Grading, PolarRuleSpec, RadialGrid, SphereGrid, SphereGridSpec, SphereNode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    Subcritical,
    Critical,
    Claimed,
}

impl std::fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Subcritical => "subcritical",
            Self::Critical => "critical",
            Self::Claimed => "claimed",
        })
    }
}

impl std::str::FromStr for InequalityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subcritical" => Ok(Self::Subcritical),
            "critical" => Ok(Self::Critical),
            "claimed" => Ok(Self::Claimed),
            other => Err(Error::Parameter(format!("unknown inequality kind {other:?}"))),
        }
    }
}

/// An inequality kind with validated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub kind: InequalityKind,
    pub n: usize,
    pub p: f64,
}

impl Inequality {
    /// Validates `n` and `p` for `kind`. For the critical kind `p` must equal `n`.
    pub fn new(kind: InequalityKind, n: usize, p: f64) -> Result<Self> {
        let nf = n as f64;
        let ok = match kind {
            InequalityKind::Subcritical => n >= 3 && p >= 2.0 && p < nf,
            InequalityKind::Claimed => n >= 3 && p > 1.0 && p < nf,
            InequalityKind::Critical => n >= 2 && p == nf,
        };
        if !ok {
            return Err(Error::Parameter(format!("invalid parameters for {kind} inequality: n = {n}, p = {p}")));
        }
        Ok(Self { kind, n, p })
    }

    pub fn subcritical(n: usize, p: f64) -> Result<Self> {
        Self::new(InequalityKind::Subcritical, n, p)
    }

    pub fn critical(n: usize) -> Result<Self> {
        Self::new(InequalityKind::Critical, n, n as f64)
    }

    pub fn claimed(n: usize, p: f64) -> Result<Self> {
        Self::new(InequalityKind::Claimed, n, p)
    }

    /// `λ = (n-p)/p`, or `μ = (n-1)/n` for the critical kind.
    pub fn base(&self) -> f64 {
        let n = self.n as f64;
        match self.kind {
            InequalityKind::Critical => (n - 1.0) / n,
            _ => (n - self.p) / self.p,
        }
    }

    /// Coefficient of the middle term `B`.
    pub fn middle_coefficient(&self) -> f64 {
        let b = self.base();
        match self.kind {
            InequalityKind::Subcritical => (self.p - 1.0) * b.powf(self.p - 1.0),
            InequalityKind::Critical => (self.n as f64 - 1.0) * b.powf(self.p - 1.0),
            InequalityKind::Claimed => b.powf(self.p - 1.0),
        }
    }

    /// Constant in front of `C`: `λ^p` or `μ^n`. The quotient `Q = lhs / C`
    /// is bounded below by it.
    pub fn constant(&self) -> f64 {
        self.base().powf(self.p)
    }

    /// Scaled integrands `[A, B, C] · sin^n d` at a node where `u` has
    /// value `u` and `|∇u| · sin d = grad_sin`.
    pub fn scaled_terms(&self, u: f64, grad_sin: f64, at: &RadialPoint) -> [f64; 3] {
        let (n, p) = (self.n as f64, self.p);
        let (s, c) = (at.sin, at.cos.abs());
        let (u, g) = (u.abs(), grad_sin.abs());
        match self.kind {
            InequalityKind::Critical => {
                let l = at.log_factor;
                let ratio = (u / l).powf(n);
                [
                    g.powf(n),
                    ratio * l * c.powf(n - 2.0) * s * s,
                    ratio * c.powf(n),
                ]
            }
            InequalityKind::Subcritical | InequalityKind::Claimed => {
                let up = u.powf(p);
                let rest = s.powf(n - p);
                let b = match self.kind {
                    InequalityKind::Claimed => up * rest * s * s,
                    _ => up * c.powf(p - 2.0) * rest * s * s,
                };
                [g.powf(p) * rest, b, up * c.powf(p) * rest]
            }
        }
    }
}

/// The three integrals of an inequality instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    #[serde(rename = "A")]
    pub grad: f64,
    #[serde(rename = "B")]
    pub middle: f64,
    #[serde(rename = "C")]
    pub singular: f64,
}

impl Terms {
    pub fn sum(&self) -> f64 {
        self.grad + self.middle + self.singular
    }
}

/// Quadrature resolution recorded in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    /// Gauss nodes per polar panel.
    #[serde(rename = "N")]
    pub nodes: usize,
    pub grading: Grading,
    /// Nodes per remaining angle; absent for the radial rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    pub n: usize,
    pub p: f64,
    pub terms: Terms,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    /// `lhs / C`, absent when `C = 0`.
    pub quotient: Option<f64>,
    pub grid: GridInfo,
    pub u_spec: TestFunction,
}

impl InequalityReport {
    fn new(ineq: &Inequality, terms: Terms, grid: GridInfo, u_spec: TestFunction) -> Self {
        let lhs = terms.grad + ineq.middle_coefficient() * terms.middle;
        let rhs = ineq.constant() * terms.singular;
        Self {
            kind: ineq.kind,
            n: ineq.n,
            p: ineq.p,
            terms,
            lhs,
            rhs,
            deficit: lhs - rhs,
            quotient: (terms.singular > 0.0).then(|| lhs / terms.singular),
            grid,
            u_spec,
        }
    }

    /// `A + B + C`, the scale for deficit tolerances.
    pub fn scale(&self) -> f64 {
        self.terms.sum()
    }

    pub fn relative_deficit(&self) -> f64 {
        let scale = self.scale();
        if scale > 0.0 {
            self.deficit / scale
        } else {
            0.0
        }
    }

    /// `deficit ≥ -tol · (A + B + C)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.deficit >= -tol * self.scale()
    }

    /// Recomputes the report with the constant `C` multiplied by `factor`.
    pub fn with_rhs_scale(&self, factor: f64) -> Self {
        let rhs = self.rhs * factor;
        Self { rhs, deficit: self.lhs - rhs, ..self.clone() }
    }
}

/// Resolutions of the 1-D radial rule and of the product rule on `S^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radial: PolarRuleSpec,
    pub sphere: SphereGridSpec,
}

impl GridSpec {
    /// Graded radial rule (log-graded for the critical kind) and the default
    /// product rule, with its polar axis graded the same way.
    pub fn for_inequality(ineq: &Inequality) -> Self {
        let radial = match ineq.kind {
            InequalityKind::Critical => PolarRuleSpec::log_graded(20, 40),
            _ => PolarRuleSpec::graded(),
        };
        let mut sphere = SphereGridSpec::default_for(ineq.n);
        sphere.polar = radial;
        Self { radial, sphere }
    }

    /// Lighter rules for batches of polynomial test functions: `nodes`
    /// (default 8) per polar panel over 8 levels, and 16, 12 or 8 angular
    /// nodes for `n ≤ 3`, `4`, `≥ 5`. Ungraded, `nodes` defaults to 64.
    pub fn for_corpus(ineq: &Inequality, nodes: Option<usize>, graded: bool) -> Self {
        let angular_nodes = nodes.unwrap_or(match ineq.n {
            2 | 3 => 16,
            4 => 12,
            _ => 8,
        });
        let polar = if graded {
            let grading = match ineq.kind {
                InequalityKind::Critical => Grading::Logarithmic { levels: 8, log_levels: 20 },
                _ => Grading::Geometric { levels: 8 },
            };
            PolarRuleSpec { nodes: nodes.unwrap_or(8), grading }
        } else {
            PolarRuleSpec::plain(nodes.unwrap_or(64))
        };
        Self {
            radial: polar,
            sphere: SphereGridSpec { polar, angular_nodes },
        }
    }
}

/// Built quadrature rules for one dimension. The product rule is built on
/// first use.
#[derive(Debug)]
pub struct Grids {
    spec: GridSpec,
    radial: RadialGrid,
    sphere: OnceLock<SphereGrid>,
}

impl Grids {
    pub fn new(n: usize, spec: GridSpec) -> Result<Self> {
        Ok(Self {
            spec,
            radial: RadialGrid::new(n, spec.radial)?,
            sphere: OnceLock::new(),
        })
    }

    pub fn for_inequality(ineq: &Inequality) -> Result<Self> {
        Self::new(ineq.n, GridSpec::for_inequality(ineq))
    }

    pub fn dim(&self) -> usize {
        self.radial.dim()
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn radial(&self) -> &RadialGrid {
        &self.radial
    }

    pub fn sphere(&self) -> &SphereGrid {
        self.sphere.get_or_init(|| {
            SphereGrid::new(self.radial.dim(), self.spec.sphere).expect("dimension checked by the radial grid")
        })
    }
}

fn check_dim(ineq: &Inequality, dim: usize) -> Result<()> {
    if dim == ineq.n {
        Ok(())
    } else {
        Err(Error::Parameter(format!("test function lives on S^{dim}, inequality on S^{}", ineq.n)))
    }
}

/// Evaluates an inequality for `u`: radial functions on the radial rule,
/// everything else on the product rule centred at the pole of `u`.
pub fn evaluate(ineq: &Inequality, u: &TestFunction, grids: &Grids) -> Result<InequalityReport> {
    check_dim(ineq, u.dim())?;
    check_dim(ineq, grids.dim())?;
    match u {
        TestFunction::Radial { profile, .. } => {
            let terms = radial_terms(ineq, profile, grids.radial())?;
            Ok(InequalityReport::new(ineq, terms, radial_info(grids.radial()), u.clone()))
        }
        TestFunction::Smooth { .. } => evaluate_on_sphere(ineq, u, grids.sphere()),
    }
}

/// Evaluates a radial profile about the north pole on the radial rule.
pub fn evaluate_radial(ineq: &Inequality, profile: &RadialProfile, grid: &RadialGrid) -> Result<InequalityReport> {
    check_dim(ineq, grid.dim())?;
    let terms = radial_terms(ineq, profile, grid)?;
    let u = TestFunction::radial(profile.clone(), AngularPoint::north_pole(ineq.n));
    Ok(InequalityReport::new(ineq, terms, radial_info(grid), u))
}

fn radial_info(grid: &RadialGrid) -> GridInfo {
    let spec = grid.spec();
    GridInfo { nodes: spec.nodes, grading: spec.grading, angular_nodes: None }
}

fn radial_terms(ineq: &Inequality, profile: &RadialProfile, grid: &RadialGrid) -> Result<Terms> {
    let [a, b, c] = grid.integrate_scaled_many(|at| ineq.scaled_terms(profile.value(at), profile.sin_derivative(at), at))?;
    Ok(Terms { grad: a, middle: b, singular: c })
}

/// Distance data of `x` from `pole`, accurate near both endpoints.
fn radial_point_from(x: &[f64], pole: &[f64], fallback: &RadialPoint) -> RadialPoint {
    let cos = dot(x, pole);
    let sin = x
        .iter()
        .zip(pole)
        .map(|(xi, pi)| (xi - cos * pi).powi(2))
        .sum::<f64>()
        .sqrt();
    if sin == 0.0 {
        return *fallback;
    }
    RadialPoint {
        d: sin.atan2(cos),
        sin,
        cos,
        log_factor: 1.0 - sin.ln(),
    }
}

/// Evaluates `u` on the product rule. The grid is re-centred at the pole of
/// `u` unless it already sits there; radial functions then get their
/// distance from the embedded coordinates of each node.
pub fn evaluate_on_sphere(ineq: &Inequality, u: &TestFunction, grid: &SphereGrid) -> Result<InequalityReport> {
    check_dim(ineq, u.dim())?;
    check_dim(ineq, grid.dim())?;
    let pole = u.pole().embed().x;
    let centred;
    let grid = if grid.pole().iter().zip(&pole).all(|(a, b)| (a - b).abs() < 1e-15) {
        grid
    } else {
        centred = grid.centered_at(u.pole());
        &centred
    };
    let [a, b, c] = match u {
        TestFunction::Radial { profile, .. } => grid.integrate_scaled_many(|node: &SphereNode| {
            let at = radial_point_from(node.x, &pole, node.polar);
            ineq.scaled_terms(profile.value(&at), profile.sin_derivative(&at), &at)
        })?,
        TestFunction::Smooth { function, .. } => grid.integrate_scaled_many(|node: &SphereNode| {
            let (value, grad) = function.value_and_gradient_norm(node.x);
            ineq.scaled_terms(value, grad * node.polar.sin, node.polar)
        })?,
    };
    let spec = grid.spec();
    let info = GridInfo {
        nodes: spec.polar.nodes,
        grading: spec.polar.grading,
        angular_nodes: Some(spec.angular_nodes),
    };
    Ok(InequalityReport::new(ineq, Terms { grad: a, middle: b, singular: c }, info, u.clone()))
}

/// Both sides of an integral identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityPair {
    pub direct: f64,
    pub closed_form: f64,
}

impl IdentityPair {
    pub fn relative_error(&self) -> f64 {
        let scale = self.direct.abs().max(self.closed_form.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.direct - self.closed_form).abs() / scale
        }
    }
}

/// `I = ∫ |cos d|^{p-2} ⟨∇ sin^{2-n} d, ∇(|u|^p sin^{n-p} d)⟩ dσ` computed from
/// the radial gradients, against `-(n-2)(p-1) ∫ |u|^p / |tan d|^{p-2} dσ`.
pub fn ibp_identity_i(u: &RadialProfile, n: usize, p: f64, grid: &RadialGrid) -> Result<IdentityPair> {
    Inequality::subcritical(n, p)?;
    if grid.dim() != n {
        return Err(Error::Parameter(format!("grid is for S^{}, identity for S^{n}", grid.dim())));
    }
    let nf = n as f64;
    let [direct, closed_form] = grid.integrate_scaled_many(|at| {
        let (s, c) = (at.sin, at.cos);
        let v = u.value(at);
        let vs = u.sin_derivative(at);
        let up = v.abs().powf(p);
        let cp = c.abs().powf(p - 2.0);
        let rest = s.powf(nf - p);
        // ∇ sin^{2-n} = (2-n) sin^{1-n} cos ∇d
        // ∇(|u|^p sin^{n-p}) = (p |u|^{p-2} u u' sin^{n-p} + (n-p) |u|^p sin^{n-p-1} cos) ∇d
        let inner = p * v.abs().powf(p - 2.0) * v * vs * rest + (nf - p) * up * rest * c;
        [
            (2.0 - nf) * cp * c * inner,
            -(nf - 2.0) * (p - 1.0) * up * cp * rest * s * s,
        ]
    })?;
    Ok(IdentityPair { direct, closed_form })
}

/// `J = ∫ |cos d|^{n-2} cos d / sin^{n-1} d · ⟨∇d, ∇|ψ|^n⟩ dσ` with
/// `ψ = u / L^{(n-1)/n}`, against `(n-1) ∫ |u|^n / (L^{n-1} |tan d|^{n-2}) dσ`.
///
/// The two agree when `|ψ|^n → 0` at `d = 0` and `d = π`; otherwise `direct`
/// picks up the boundary flux `-|S^{n-1}| (|ψ(0)|^n + |ψ(π)|^n)`.
pub fn ibp_identity_j(u: &RadialProfile, n: usize, grid: &RadialGrid) -> Result<IdentityPair> {
    Inequality::critical(n)?;
    if grid.dim() != n {
        return Err(Error::Parameter(format!("grid is for S^{}, identity for S^{n}", grid.dim())));
    }
    let nf = n as f64;
    let mu = (nf - 1.0) / nf;
    let [direct, closed_form] = grid.integrate_scaled_many(|at| {
        let (s, c) = (at.sin, at.cos);
        let l = at.log_factor;
        let v = u.value(at);
        let psi = v * l.powf(-mu);
        // sin d · ψ' with L' = -cot d
        let psi_s = u.sin_derivative(at) * l.powf(-mu) + mu * v * l.powf(-mu - 1.0) * c;
        let cn = c.abs().powf(nf - 2.0);
        [
            cn * c * nf * psi.abs().powf(nf - 2.0) * psi * psi_s,
            (nf - 1.0) * (v.abs() / l).powf(nf) * l * cn * s * s,
        ]
    })?;
    Ok(IdentityPair { direct, closed_form })
}

/// Checks the pointwise lower bound for `|∇u|^p`, `u = φ^α ψ`, `φ = sin d`,
/// `α = -(n-p)/p`, with `ψ` radial about `pole`:
///
/// `|∇u|^p ≥ |α|^p φ^{αp-p} |ψ|^p |∇φ|^p
///     + α|α|^{p-2}/(αp-p+2) · |∇φ|^{p-2} ⟨∇φ^{αp-p+2}, ∇|ψ|^p⟩`.
///
/// Gradients are assembled as ambient vectors. Returns the number of sample
/// points where the left side falls below the right by more than
/// `1e-10 · scale`; sample points at `±pole` are skipped.
pub fn pointwise_bound_check(n: usize, p: f64, psi: &RadialProfile, pole: &AngularPoint, sample: &[AngularPoint]) -> usize {
    let nf = n as f64;
    let alpha = -(nf - p) / p;
    let k = alpha * p - p + 2.0;
    let pole = pole.embed().x;
    let mut violations = 0;
    for point in sample {
        let x = point.embed().x;
        let (d, grad_d) = distance_gradient(&x, &pole);
        if !(d > 0.0 && d < std::f64::consts::PI) || grad_d.iter().any(|g| !g.is_finite()) {
            continue;
        }
        let at = RadialPoint::new(d);
        let phi = at.sin;
        let grad_phi: Vec<f64> = grad_d.iter().map(|g| at.cos * g).collect();
        let (v, dv) = (psi.value(&at), psi.derivative(&at));
        let grad_psi: Vec<f64> = grad_d.iter().map(|g| dv * g).collect();

        let grad_u: Vec<f64> = grad_phi
            .iter()
            .zip(&grad_psi)
            .map(|(gp, gs)| alpha * phi.powf(alpha - 1.0) * v * gp + phi.powf(alpha) * gs)
            .collect();
        let lhs = dot(&grad_u, &grad_u).sqrt().powf(p);

        let norm_phi = dot(&grad_phi, &grad_phi).sqrt();
        let first = alpha.abs().powf(p) * phi.powf(alpha * p - p) * v.abs().powf(p) * norm_phi.powf(p);
        let grad_phi_k: Vec<f64> = grad_phi.iter().map(|g| k * phi.powf(k - 1.0) * g).collect();
        let grad_psi_p: Vec<f64> = grad_psi.iter().map(|g| p * v.abs().powf(p - 2.0) * v * g).collect();
        let second = alpha * alpha.abs().powf(p - 2.0) / k * norm_phi.powf(p - 2.0) * dot(&grad_phi_k, &grad_psi_p);

        let scale = lhs.abs() + first.abs() + second.abs();
        if lhs < first + second - 1e-10 * scale {
            violations += 1;
        }
    }
    violations
}
