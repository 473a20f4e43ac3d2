//! Spherical coordinates on the unit sphere `S^n ⊂ R^{n+1}`.
//!
//! A point is described by `n` angles `θ_1..θ_n` with `θ_1..θ_{n-1} ∈ [0, π]`
//! and `θ_n ∈ [0, 2π)`. The embedding is
//!
//! ```text
//! x_1     = cos θ_1
//! x_m     = sin θ_1 ⋯ sin θ_{m-1} cos θ_m      (2 ≤ m ≤ n)
//! x_{n+1} = sin θ_1 ⋯ sin θ_n
//! ```
//!
//! The orthonormal frame `θ̂_k` has metric scale factors
//! `h_k = sin θ_1 ⋯ sin θ_{k-1}`, so the surface gradient has components
//! `(1/h_k) ∂f/∂θ_k` and the Laplace–Beltrami operator is the nested
//! divergence
//!
//! ```text
//! Δf = Σ_k 1/(h_k² sin^{n-k} θ_k) ∂_k ( sin^{n-k} θ_k ∂_k f ).
//! ```

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scale factors below this value are treated as a chart singularity.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Central-difference step used by the finite-difference operators.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// A point of `S^n` in spherical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AngularPoint {
    theta: Vec<f64>,
}

impl AngularPoint {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        let n = theta.len();
        if n < 2 {
            return Err(Error::Dimension { got: n, min: 2 });
        }
        for (index, &value) in theta.iter().enumerate() {
            let ok = if index + 1 < n {
                (0.0..=PI).contains(&value)
            } else {
                (0.0..TAU).contains(&value)
            };
            if !ok {
                return Err(Error::AngleOutOfRange { index: index + 1, value });
            }
        }
        Ok(Self { theta })
    }

    /// The point `(1, 0, …, 0)`.
    pub fn north_pole(n: usize) -> Self {
        assert!(n >= 2, "sphere dimension must be at least 2");
        Self { theta: vec![0.0; n] }
    }

    /// Recovers angles from a unit vector in `R^{n+1}`.
    pub fn from_embedded(x: &[f64]) -> Result<Self> {
        let n = x.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::Dimension { got: n, min: 2 });
        }
        let mut theta = vec![0.0; n];
        // tail[m] = |(x_m, …, x_{n+1})|
        let mut tail = vec![0.0; n + 2];
        for m in (0..=n).rev() {
            tail[m] = x[m].hypot(tail[m + 1]);
        }
        for m in 0..n - 1 {
            theta[m] = tail[m + 1].atan2(x[m]);
        }
        theta[n - 1] = x[n].atan2(x[n - 1]).rem_euclid(TAU);
        if theta[n - 1] >= TAU {
            theta[n - 1] = 0.0;
        }
        Self::new(theta)
    }

    /// Builds a point without range checks; angles are only used through
    /// sines and cosines, so small excursions from finite differences are harmless.
    pub(crate) fn from_raw(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    pub fn embed(&self) -> EmbeddedPoint {
        EmbeddedPoint { x: embed_angles(&self.theta) }
    }

    /// The antipodal point `-x`.
    pub fn antipode(&self) -> Self {
        let x: Vec<f64> = self.embed().x.iter().map(|v| -v).collect();
        Self::from_embedded(&x).expect("antipode of a valid point is valid")
    }
}

impl TryFrom<Vec<f64>> for AngularPoint {
    type Error = Error;

    fn try_from(theta: Vec<f64>) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<AngularPoint> for Vec<f64> {
    fn from(p: AngularPoint) -> Self {
        p.theta
    }
}

/// A unit vector in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoint {
    pub x: Vec<f64>,
}

impl EmbeddedPoint {
    pub fn norm(&self) -> f64 {
        dot(&self.x, &self.x).sqrt()
    }
}

/// Components of a tangent vector in the orthonormal frame `θ̂_1..θ̂_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        dot(&self.components, &self.components).sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub(crate) fn embed_angles(theta: &[f64]) -> Vec<f64> {
    let n = theta.len();
    let mut x = Vec::with_capacity(n + 1);
    let mut sines = 1.0;
    for &t in theta {
        x.push(sines * t.cos());
        sines *= t.sin();
    }
    x.push(sines);
    x
}

/// Partial derivatives `∂x_m/∂θ_k`, returned as `jac[k][m]`.
pub fn embedding_jacobian(p: &AngularPoint) -> Vec<Vec<f64>> {
    let theta = p.angles();
    let n = theta.len();
    let (sin, cos): (Vec<f64>, Vec<f64>) = theta.iter().map(|t| t.sin_cos()).unzip();
    (0..n)
        .map(|k| {
            (0..=n)
                .map(|m| {
                    if k > m {
                        return 0.0;
                    }
                    // x_m = Π_{j<m} sin θ_j · (cos θ_m, or 1 when m = n)
                    let mut v = 1.0;
                    for j in 0..m.min(n) {
                        v *= if j == k { cos[j] } else { sin[j] };
                    }
                    if m < n {
                        v *= if m == k { -sin[m] } else { cos[m] };
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Great-circle distance between two points of the same sphere.
pub fn geodesic_distance(p: &AngularPoint, q: &AngularPoint) -> f64 {
    assert_eq!(p.dim(), q.dim(), "points live on different spheres");
    geodesic_distance_embedded(&p.embed().x, &q.embed().x)
}

/// `arccos ⟨x, y⟩`, with the inner product clamped to `[-1, 1]`.
pub fn geodesic_distance_embedded(x: &[f64], y: &[f64]) -> f64 {
    dot(x, y).clamp(-1.0, 1.0).acos()
}

/// `(h_1, …, h_n) = (1, sin θ_1, sin θ_1 sin θ_2, …)`.
pub fn metric_scale_factors(p: &AngularPoint) -> Result<Vec<f64>> {
    let factors = scale_factors_unchecked(p.angles());
    if let Some((index, &value)) = factors
        .iter()
        .enumerate()
        .find(|(_, h)| h.abs() < DEGENERACY_THRESHOLD)
    {
        return Err(Error::Degenerate {
            index: index + 1,
            value,
            point: p.angles().to_vec(),
        });
    }
    Ok(factors)
}

fn scale_factors_unchecked(theta: &[f64]) -> Vec<f64> {
    let mut h = Vec::with_capacity(theta.len());
    let mut acc = 1.0;
    for t in theta {
        h.push(acc);
        acc *= t.sin();
    }
    h
}

fn check_fd_domain(p: &AngularPoint, h: f64) -> Result<Vec<f64>> {
    let n = p.dim();
    for (j, &t) in p.angles()[..n - 1].iter().enumerate() {
        if t < h || t > PI - h {
            return Err(Error::Degenerate {
                index: j + 2,
                value: t.sin(),
                point: p.angles().to_vec(),
            });
        }
    }
    metric_scale_factors(p)
}

fn shifted(p: &AngularPoint, k: usize, delta: f64) -> AngularPoint {
    let mut theta = p.angles().to_vec();
    theta[k] += delta;
    if k + 1 == theta.len() {
        theta[k] = theta[k].rem_euclid(TAU);
    }
    AngularPoint::from_raw(theta)
}

/// Surface gradient by central differences in each angle.
pub fn surface_gradient_fd<F>(f: F, p: &AngularPoint, h: f64) -> Result<TangentVector>
where
    F: Fn(&AngularPoint) -> f64,
{
    let scale = check_fd_domain(p, h)?;
    let components = (0..p.dim())
        .map(|k| (f(&shifted(p, k, h)) - f(&shifted(p, k, -h))) / (2.0 * h) / scale[k])
        .collect();
    Ok(TangentVector { components })
}

/// Laplace–Beltrami operator of `S^n` by finite differences.
///
/// Each nested term `∂_k(sin^{n-k} θ_k ∂_k f) / sin^{n-k} θ_k` is expanded as
/// `f_kk + (n-k) cot θ_k f_k` and evaluated with 3-point stencils.
pub fn laplace_beltrami_fd<F>(f: F, p: &AngularPoint, h: f64) -> Result<f64>
where
    F: Fn(&AngularPoint) -> f64,
{
    let scale = check_fd_domain(p, h)?;
    let n = p.dim();
    let f0 = f(p);
    let mut total = 0.0;
    for (k, hk) in scale.iter().enumerate() {
        let fp = f(&shifted(p, k, h));
        let fm = f(&shifted(p, k, -h));
        let second = (fp - 2.0 * f0 + fm) / (h * h);
        let first = (fp - fm) / (2.0 * h);
        let weight_exponent = (n - 1 - k) as f64;
        let drift = if weight_exponent > 0.0 {
            let t = p.angles()[k];
            weight_exponent * t.cos() / t.sin() * first
        } else {
            0.0
        };
        total += (second + drift) / (hk * hk);
    }
    Ok(total)
}

/// A point described by its distance `d` from a reference point.
///
/// Besides `d` it carries `sin d`, `cos d` and `log(e / sin d)` computed
/// directly, so that points extremely close to the reference point or its
/// antipode (where `sin d` underflows) still carry a finite logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub d: f64,
    pub sin: f64,
    pub cos: f64,
    /// `log(e / sin d)`, always `≥ 1`.
    pub log_factor: f64,
}

impl RadialPoint {
    pub fn new(d: f64) -> Self {
        let (sin, cos) = d.sin_cos();
        Self {
            d,
            sin,
            cos,
            log_factor: 1.0 - sin.ln(),
        }
    }

    /// The point at distance `π - δ` computed from the small offset `δ`.
    pub fn mirrored(delta: f64) -> Self {
        let (sin, cos) = delta.sin_cos();
        Self {
            d: PI - delta,
            sin,
            cos: -cos,
            log_factor: 1.0 - sin.ln(),
        }
    }

    /// The point with `ln sin d = ln_sin` near `d = 0`, or near `d = π` when
    /// `near_antipode` is set. `sin` may underflow to zero.
    pub fn from_log_sin(ln_sin: f64, near_antipode: bool) -> Self {
        let sin = ln_sin.exp();
        let offset = sin.asin();
        let cos = ((1.0 - sin) * (1.0 + sin)).sqrt();
        let (d, cos) = if near_antipode {
            (PI - offset, -cos)
        } else {
            (offset, cos)
        };
        Self {
            d,
            sin,
            cos,
            log_factor: 1.0 - ln_sin,
        }
    }
}

/// A function of the distance `d ∈ (0, π)` with analytic derivatives.
pub trait RadialFunction {
    fn value(&self, at: &RadialPoint) -> f64;
    fn derivative(&self, at: &RadialPoint) -> f64;
    fn second_derivative(&self, at: &RadialPoint) -> f64;

    /// `sin d · g'(d)`, finite wherever `g` has at most a logarithmic
    /// singularity. Used in integrands that carry the surface measure.
    fn sin_derivative(&self, at: &RadialPoint) -> f64 {
        at.sin * self.derivative(at)
    }
}

fn check_radial_domain(d: f64) -> Result<()> {
    if d > 0.0 && d < PI {
        Ok(())
    } else {
        Err(Error::RadialDomain(d))
    }
}

/// `|∇(g∘d)| = |g'(d)|`, because `|∇d| = 1` away from the reference point and its antipode.
pub fn radial_gradient_norm<G: RadialFunction + ?Sized>(g: &G, d: f64) -> Result<f64> {
    check_radial_domain(d)?;
    Ok(g.derivative(&RadialPoint::new(d)).abs())
}

/// `Δ(g∘d) = g''(d) + (n-1) cot d · g'(d)`, using `Δd = (n-1) cot d`.
pub fn radial_laplacian<G: RadialFunction + ?Sized>(g: &G, n: usize, d: f64) -> Result<f64> {
    check_radial_domain(d)?;
    let at = RadialPoint::new(d);
    Ok(g.second_derivative(&at) + (n as f64 - 1.0) * at.cos / at.sin * g.derivative(&at))
}

/// Ambient gradient of `d(·, pole)` at `x`: `(x cos d − pole) / sin d`.
pub(crate) fn distance_gradient(x: &[f64], pole: &[f64]) -> (f64, Vec<f64>) {
    let c = dot(x, pole).clamp(-1.0, 1.0);
    let s = (1.0 - c * c).sqrt();
    let grad = x.iter().zip(pole).map(|(xi, pi)| (xi * c - pi) / s).collect();
    (c.acos(), grad)
}

/// An orthogonal transform of `R^{n+1}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    dim: usize,
    m: Vec<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = 1.0;
        }
        Self { dim, m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.m[row * self.dim + col]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(x, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (row, o) in self.m.chunks_exact(self.dim).zip(out.iter_mut()) {
            *o = dot(row, x);
        }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[j * d + i] = self.m[i * d + j];
            }
        }
        Self { dim: d, m }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Rotation) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.m[i * d + k];
                for j in 0..d {
                    m[i * d + j] += a * other.m[k * d + j];
                }
            }
        }
        Self { dim: d, m }
    }

    /// `max |RᵀR − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let prod = self.transpose().compose(self);
        let id = Rotation::identity(self.dim);
        prod.m
            .iter()
            .zip(&id.m)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Householder reflection sending `embed(phi)` to the north pole `(1, 0, …, 0)`.
pub fn rotate_to_pole(phi: &AngularPoint) -> Rotation {
    let x = phi.embed().x;
    let dim = x.len();
    let mut v = x;
    v[0] -= 1.0;
    let vv = dot(&v, &v);
    let mut r = Rotation::identity(dim);
    if vv < 1e-30 {
        return r;
    }
    for i in 0..dim {
        for j in 0..dim {
            r.m[i * dim + j] -= 2.0 * v[i] * v[j] / vv;
        }
    }
    r
}

/// `|x + y|^p ≥ |x|^p + p |x|^{p-2} ⟨x, y⟩` for `p > 1`, up to `1e-12`
/// relative slack. The middle term is taken as zero when `x = 0`.
pub fn lindqvist_check(x: &[f64], y: &[f64], p: f64) -> bool {
    assert_eq!(x.len(), y.len());
    assert!(p > 1.0, "exponent must exceed 1");
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let lhs = dot(&sum, &sum).sqrt().powf(p);
    let nx = dot(x, x).sqrt();
    let base = nx.powf(p);
    let middle = if nx == 0.0 {
        0.0
    } else {
        p * nx.powf(p - 2.0) * dot(x, y)
    };
    let rhs = base + middle;
    let scale = lhs.abs() + base.abs() + middle.abs();
    lhs - rhs >= -1e-12 * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn pt(theta: &[f64]) -> AngularPoint {
        AngularPoint::new(theta.to_vec()).unwrap()
    }

    #[test]
    fn embedding_spot_values() {
        assert_eq!(pt(&[0.0, 0.0]).embed().x, vec![1.0, 0.0, 0.0]);
        let x = pt(&[FRAC_PI_2, 0.0]).embed().x;
        assert_abs_diff_eq!(x[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-16);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-16);
        let x = pt(&[FRAC_PI_2; 3]).embed().x;
        for (a, b) in x.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(AngularPoint::new(vec![0.1]).is_err());
        assert!(AngularPoint::new(vec![-0.1, 0.0]).is_err());
        assert!(AngularPoint::new(vec![0.1, TAU]).is_err());
        assert!(AngularPoint::new(vec![PI, 0.0, 3.0]).is_ok());
    }

    #[test]
    fn distance_spot_values() {
        let a = pt(&[0.0, 0.0]);
        assert_eq!(geodesic_distance(&a, &a), 0.0);
        assert_abs_diff_eq!(geodesic_distance(&a, &pt(&[PI, 0.0])), PI);
        assert_abs_diff_eq!(
            geodesic_distance(&a, &pt(&[FRAC_PI_2, 1.3])),
            FRAC_PI_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn scale_factor_spot_values() {
        let h = metric_scale_factors(&pt(&[FRAC_PI_2, 0.4])).unwrap();
        assert_abs_diff_eq!(h[0], 1.0);
        assert_abs_diff_eq!(h[1], 1.0);
        let h = metric_scale_factors(&pt(&[FRAC_PI_2, PI / 6.0, 2.0])).unwrap();
        assert_abs_diff_eq!(h[2], 0.5, epsilon = 1e-15);
        assert!(matches!(
            metric_scale_factors(&pt(&[0.0, 1.0])),
            Err(Error::Degenerate { index: 2, .. })
        ));
    }

    #[test]
    fn gradient_of_first_coordinate() {
        let p = pt(&[1.1, 0.7, 2.0]);
        let g = surface_gradient_fd(|q| q.embed().x[0], &p, DEFAULT_FD_STEP).unwrap();
        assert_abs_diff_eq!(g.components[0], -(1.1f64).sin(), epsilon = 1e-8);
        assert_abs_diff_eq!(g.components[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.components[2], 0.0, epsilon = 1e-12);
        let zero = surface_gradient_fd(|_| 3.5, &p, DEFAULT_FD_STEP).unwrap();
        assert_eq!(zero.norm(), 0.0);
    }

    #[test]
    fn fd_rejects_points_near_chart_poles() {
        let p = pt(&[1e-5, 1.0]);
        assert!(surface_gradient_fd(|q| q.embed().x[0], &p, 1e-4).is_err());
        assert!(laplace_beltrami_fd(|q| q.embed().x[0], &p, 1e-4).is_err());
    }

    #[test]
    fn laplacian_of_degree_one_harmonic() {
        let p = pt(&[0.9, 4.0]);
        let lap = laplace_beltrami_fd(|q| q.embed().x[0], &p, DEFAULT_FD_STEP).unwrap();
        assert_abs_diff_eq!(lap, -2.0 * (0.9f64).cos(), epsilon = 1e-5);
        let c = laplace_beltrami_fd(|_| 1.25, &p, DEFAULT_FD_STEP).unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn householder_sends_phi_to_pole() {
        let pole = AngularPoint::north_pole(3);
        let r = rotate_to_pole(&pole);
        assert_eq!(r, Rotation::identity(4));
        let phi = pt(&[2.0, 0.3, 5.0]);
        let r = rotate_to_pole(&phi);
        let y = r.apply(&phi.embed().x);
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-12);
        for v in &y[1..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        assert!(r.orthogonality_defect() < 1e-12);
    }

    #[test]
    fn lindqvist_spot_cases() {
        assert!(lindqvist_check(&[0.3, -1.0], &[0.0, 0.0], 3.0));
        assert!(lindqvist_check(&[1.0, 0.0], &[-1.0, 0.0], 2.0));
        assert!(lindqvist_check(&[0.0, 0.0], &[1.0, 2.0], 1.5));
    }

    #[test]
    fn inverse_chart_round_trip() {
        let p = pt(&[0.4, 2.9, 1.0, 6.0]);
        let q = AngularPoint::from_embedded(&p.embed().x).unwrap();
        for (a, b) in p.angles().iter().zip(q.angles()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let p = pt(&[0.7, 1.9, 2.5]);
        let jac = embedding_jacobian(&p);
        let h = 1e-6;
        for (k, row) in jac.iter().enumerate() {
            let xp = shifted(&p, k, h).embed().x;
            let xm = shifted(&p, k, -h).embed().x;
            for m in 0..4 {
                assert_abs_diff_eq!(row[m], (xp[m] - xm[m]) / (2.0 * h), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn radial_operators_need_interior_distance() {
        struct Sine;
        impl RadialFunction for Sine {
            fn value(&self, at: &RadialPoint) -> f64 {
                at.sin
            }
            fn derivative(&self, at: &RadialPoint) -> f64 {
                at.cos
            }
            fn second_derivative(&self, at: &RadialPoint) -> f64 {
                -at.sin
            }
        }
        assert_abs_diff_eq!(radial_gradient_norm(&Sine, PI / 3.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(radial_gradient_norm(&Sine, 0.0).is_err());
        assert!(radial_laplacian(&Sine, 3, PI).is_err());
    }

    #[test]
    fn log_sin_points_stay_finite() {
        let p = RadialPoint::from_log_sin(-5000.0, false);
        assert_eq!(p.sin, 0.0);
        assert_eq!(p.cos, 1.0);
        assert_eq!(p.log_factor, 5001.0);
        let q = RadialPoint::from_log_sin(-2.0, true);
        assert_abs_diff_eq!(q.sin, (-2.0f64).exp(), epsilon = 1e-16);
        assert!(q.cos < 0.0);
        assert_abs_diff_eq!(q.d, PI - q.sin.asin(), epsilon = 1e-15);
    }
}
