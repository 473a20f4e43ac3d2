//! Test functions on `S^n`: radial profiles `g(d)`, the optimizing families
//! used to probe sharp constants, and random polynomials in the embedding
//! coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    dot, embedding_jacobian, geodesic_distance_embedded, AngularPoint, RadialFunction, RadialPoint,
};

/// How a profile behaves as `d → 0` or `d → π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointBehavior {
    Finite,
    /// Behaves like `sin^exponent d` with a negative exponent.
    PowerSingular { exponent: f64 },
    /// Grows like a power of `log(e / sin d)`.
    LogSingular,
}

/// A function `g(d)` of the distance with analytic derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    Constant { value: f64 },
    /// `sin^exponent d`
    SinPower { exponent: f64 },
    /// `Σ_k c_k cos^k d`
    CosPolynomial { coefficients: Vec<f64> },
    /// `exp(rate · cos d)`
    ExpCos { rate: f64 },
    /// `(sin d + shift)^exponent`
    ShiftedSinPower { shift: f64, exponent: f64 },
    /// `log(e / sin d)^exponent`
    LogPower { exponent: f64 },
    Product { factors: Vec<RadialProfile> },
    Scaled { factor: f64, profile: Box<RadialProfile> },
}

struct Jet {
    value: f64,
    first: f64,
    second: f64,
    /// `sin d · first`, evaluated without forming `first` where it blows up.
    sin_first: f64,
}

impl RadialProfile {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn sin() -> Self {
        Self::SinPower { exponent: 1.0 }
    }

    pub fn cos() -> Self {
        Self::CosPolynomial { coefficients: vec![0.0, 1.0] }
    }

    pub fn product(factors: Vec<RadialProfile>) -> Self {
        Self::Product { factors }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::Scaled { factor, profile: Box::new(self) }
    }

    pub fn endpoint_behavior(&self) -> EndpointBehavior {
        use EndpointBehavior::*;
        match self {
            Self::SinPower { exponent } if *exponent < 0.0 => PowerSingular { exponent: *exponent },
            Self::LogPower { exponent } if *exponent != 0.0 => LogSingular,
            Self::Product { factors } => {
                let mut total = 0.0;
                let mut log = false;
                for f in factors {
                    match f.endpoint_behavior() {
                        Finite => {}
                        PowerSingular { exponent } => total += exponent,
                        LogSingular => log = true,
                    }
                }
                if total < 0.0 {
                    PowerSingular { exponent: total }
                } else if log {
                    LogSingular
                } else {
                    Finite
                }
            }
            Self::Scaled { profile, .. } => profile.endpoint_behavior(),
            _ => Finite,
        }
    }

    fn jet(&self, at: &RadialPoint) -> Jet {
        let (s, c) = (at.sin, at.cos);
        match self {
            Self::Constant { value } => Jet { value: *value, first: 0.0, second: 0.0, sin_first: 0.0 },
            Self::SinPower { exponent: a } => {
                let v = s.powf(*a);
                Jet {
                    value: v,
                    first: a * s.powf(a - 1.0) * c,
                    second: a * (a - 1.0) * s.powf(a - 2.0) * c * c - a * v,
                    sin_first: a * v * c,
                }
            }
            Self::CosPolynomial { coefficients } => {
                let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
                for &coef in coefficients.iter().rev() {
                    ddp = ddp * c + 2.0 * dp;
                    dp = dp * c + p;
                    p = p * c + coef;
                }
                Jet {
                    value: p,
                    first: -s * dp,
                    second: s * s * ddp - c * dp,
                    sin_first: -s * s * dp,
                }
            }
            Self::ExpCos { rate: r } => {
                let v = (r * c).exp();
                Jet {
                    value: v,
                    first: -r * s * v,
                    second: (r * r * s * s - r * c) * v,
                    sin_first: -r * s * s * v,
                }
            }
            Self::ShiftedSinPower { shift, exponent: a } => {
                let base = s + shift;
                let v = base.powf(*a);
                let d1 = a * base.powf(a - 1.0);
                Jet {
                    value: v,
                    first: d1 * c,
                    second: a * (a - 1.0) * base.powf(a - 2.0) * c * c - d1 * s,
                    sin_first: d1 * c * s,
                }
            }
            Self::LogPower { exponent: a } => {
                let l = at.log_factor;
                let v = l.powf(*a);
                let cot = c / s;
                let la1 = a * l.powf(a - 1.0);
                Jet {
                    value: v,
                    first: -la1 * cot,
                    second: a * (a - 1.0) * l.powf(a - 2.0) * cot * cot + la1 / (s * s),
                    sin_first: -la1 * c,
                }
            }
            Self::Product { factors } => {
                let jets: Vec<Jet> = factors.iter().map(|f| f.jet(at)).collect();
                let others = |skip: &[usize]| -> f64 {
                    jets.iter()
                        .enumerate()
                        .filter(|(k, _)| !skip.contains(k))
                        .map(|(_, j)| j.value)
                        .product()
                };
                let mut out = Jet {
                    value: others(&[]),
                    first: 0.0,
                    second: 0.0,
                    sin_first: 0.0,
                };
                for (i, ji) in jets.iter().enumerate() {
                    let rest = others(&[i]);
                    out.first += ji.first * rest;
                    out.sin_first += ji.sin_first * rest;
                    out.second += ji.second * rest;
                    for (j, jj) in jets.iter().enumerate().skip(i + 1) {
                        out.second += 2.0 * ji.first * jj.first * others(&[i, j]);
                    }
                }
                out
            }
            Self::Scaled { factor, profile } => {
                let j = profile.jet(at);
                Jet {
                    value: factor * j.value,
                    first: factor * j.first,
                    second: factor * j.second,
                    sin_first: factor * j.sin_first,
                }
            }
        }
    }
}

impl RadialFunction for RadialProfile {
    fn value(&self, at: &RadialPoint) -> f64 {
        self.jet(at).value
    }

    fn derivative(&self, at: &RadialPoint) -> f64 {
        self.jet(at).first
    }

    fn second_derivative(&self, at: &RadialPoint) -> f64 {
        self.jet(at).second
    }

    fn sin_derivative(&self, at: &RadialPoint) -> f64 {
        self.jet(at).sin_first
    }
}

/// A small corpus of bounded radial profiles.
pub fn radial_corpus() -> Vec<RadialProfile> {
    use RadialProfile as P;
    vec![
        P::constant(1.0),
        P::cos(),
        P::CosPolynomial { coefficients: vec![1.0, 1.0] },
        P::sin(),
        P::SinPower { exponent: 2.0 },
        P::CosPolynomial { coefficients: vec![0.0, 0.0, 1.0] },
        P::ExpCos { rate: 1.0 },
        P::product(vec![P::sin(), P::cos()]),
        P::CosPolynomial { coefficients: vec![0.5, -1.0, 0.0, 2.0] },
        P::product(vec![P::ExpCos { rate: -0.5 }, P::SinPower { exponent: 2.0 }]).scaled(3.0),
    ]
}

/// A radial profile composed with the distance from a pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialOnSphere {
    pub profile: RadialProfile,
    pub pole: AngularPoint,
}

/// `Θ ↦ g(d(Θ, phi))`.
pub fn compose_radial(g: RadialProfile, phi: AngularPoint) -> RadialOnSphere {
    RadialOnSphere { profile: g, pole: phi }
}

impl RadialOnSphere {
    pub fn value(&self, p: &AngularPoint) -> Result<f64> {
        self.value_embedded(&p.embed().x)
    }

    /// Fails at `±pole` unless the profile is finite there.
    pub fn value_embedded(&self, x: &[f64]) -> Result<f64> {
        let d = geodesic_distance_embedded(x, &self.pole.embed().x);
        let v = self.profile.value(&RadialPoint::new(d));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("profile at d = {d}")))
        }
    }
}

/// Subcritical family `u_ε(d) = (sin d + ε)^{-(n-p)/p}` for `2 ≤ p < n`.
pub fn subcritical_family(n: usize, p: f64, eps: f64) -> Result<RadialProfile> {
    if n < 3 || !(2.0..n as f64).contains(&p) {
        return Err(Error::Parameter(format!("subcritical family needs n ≥ 3 and 2 ≤ p < n, got n = {n}, p = {p}")));
    }
    check_eps(eps)?;
    Ok(RadialProfile::ShiftedSinPower {
        shift: eps,
        exponent: -(n as f64 - p) / p,
    })
}

/// Critical family `u_ε(d) = log(e / sin d)^{(n-1)/n - ε}`.
pub fn critical_family(n: usize, eps: f64) -> Result<RadialProfile> {
    if n < 2 {
        return Err(Error::Dimension { got: n, min: 2 });
    }
    check_eps(eps)?;
    let nf = n as f64;
    Ok(RadialProfile::LogPower { exponent: (nf - 1.0) / nf - eps })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("family parameter must lie in (0, 1], got {eps}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Subcritical,
    Critical,
}

/// One member `u_ε` of an optimizing family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizingFamily {
    pub kind: FamilyKind,
    pub n: usize,
    pub p: f64,
    pub eps: f64,
}

impl OptimizingFamily {
    pub fn profile(&self) -> Result<RadialProfile> {
        match self.kind {
            FamilyKind::Subcritical => subcritical_family(self.n, self.p, self.eps),
            FamilyKind::Critical => critical_family(self.n, self.eps),
        }
    }
}

/// Highest polynomial degree accepted by [`random_smooth`].
pub const MAX_DEGREE: usize = 4;

/// Serialized form of [`SmoothTestFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothSpec {
    pub n: usize,
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Coefficients in graded-lexicographic monomial order.
    pub coefficients: Vec<f64>,
}

/// A polynomial in the embedding coordinates `x_1..x_{n+1}`, restricted to `S^n`.
///
/// Polynomials in `x` are smooth across every chart singularity, which is
/// why the corpus is built this way rather than from trigonometric
/// polynomials in the angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SmoothSpec", into = "SmoothSpec")]
pub struct SmoothTestFunction {
    n: usize,
    degree: usize,
    seed: Option<u64>,
    coefficients: Vec<f64>,
    /// Sparse monomials: `(variable, power)` pairs.
    monomials: Vec<Vec<(usize, u32)>>,
}

/// Exponent vectors of total degree ≤ `degree` in `vars` variables, by degree
/// then lexicographically.
fn monomial_exponents(vars: usize, degree: usize) -> Vec<Vec<u32>> {
    fn fill(vars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            fill(vars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree as u32 {
        fill(vars, total, &mut Vec::new(), &mut out);
    }
    out
}

impl SmoothTestFunction {
    pub fn from_coefficients(n: usize, degree: usize, coefficients: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension { got: n, min: 2 });
        }
        if degree > MAX_DEGREE {
            return Err(Error::Parameter(format!("degree {degree} exceeds {MAX_DEGREE}")));
        }
        let exps = monomial_exponents(n + 1, degree);
        if exps.len() != coefficients.len() {
            return Err(Error::Parameter(format!(
                "degree {degree} on S^{n} needs {} coefficients, got {}",
                exps.len(),
                coefficients.len()
            )));
        }
        let monomials = exps
            .iter()
            .map(|e| e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(v, &k)| (v, k)).collect())
            .collect();
        Ok(Self { n, degree, seed: None, coefficients, monomials })
    }

    /// Number of coefficients for a given sphere dimension and degree.
    pub fn coefficient_count(n: usize, degree: usize) -> usize {
        monomial_exponents(n + 1, degree).len()
    }

    /// The constant function `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::from_coefficients(n, 0, vec![value])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coefficients.iter_mut().for_each(|c| *c *= factor);
        out
    }

    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> Self {
        assert_eq!(coefficients.len(), self.coefficients.len());
        Self { coefficients, seed: None, ..self.clone() }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.monomials
            .iter()
            .zip(&self.coefficients)
            .map(|(m, c)| c * m.iter().map(|&(v, k)| x[v].powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Value and Euclidean gradient in `R^{n+1}`.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        with_powers(x, self.degree, |powers| {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let pw = |v: usize, k: u32| powers[v * (MAX_DEGREE + 1) + k as usize];
            let mut value = 0.0;
            for (m, &c) in self.monomials.iter().zip(&self.coefficients) {
                let mut term = c;
                for &(v, k) in m {
                    term *= pw(v, k);
                }
                value += term;
                for (i, &(v, k)) in m.iter().enumerate() {
                    let mut t = c * k as f64 * pw(v, k - 1);
                    for (j, &(w, l)) in m.iter().enumerate() {
                        if j != i {
                            t *= pw(w, l);
                        }
                    }
                    grad[v] += t;
                }
            }
            value
        })
    }

    /// Surface gradient at a unit vector `x`: the tangential projection
    /// `∇P − ⟨x, ∇P⟩ x` of the Euclidean gradient.
    pub fn surface_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; x.len()];
        self.value_and_gradient(x, &mut grad);
        let radial = dot(x, &grad);
        grad.iter().zip(x).map(|(g, xi)| g - radial * xi).collect()
    }

    /// Value and `|∇_{S^n} u|` at a unit vector.
    pub fn value_and_gradient_norm(&self, x: &[f64]) -> (f64, f64) {
        let mut stack = [0.0; 8];
        let mut heap = Vec::new();
        let grad: &mut [f64] = if x.len() <= stack.len() {
            &mut stack[..x.len()]
        } else {
            heap.resize(x.len(), 0.0);
            &mut heap
        };
        let value = self.value_and_gradient(x, grad);
        let grad = &*grad;
        let radial = dot(x, grad);
        let norm2 = (dot(grad, grad) - radial * radial).max(0.0);
        (value, norm2.sqrt())
    }

    pub fn value_at(&self, p: &AngularPoint) -> f64 {
        self.value(&p.embed().x)
    }

    /// `∂u/∂θ_k` by the chain rule through the embedding.
    pub fn angular_partials(&self, p: &AngularPoint) -> Vec<f64> {
        let x = p.embed().x;
        let mut grad = vec![0.0; x.len()];
        self.value_and_gradient(&x, &mut grad);
        embedding_jacobian(p).iter().map(|row| dot(row, &grad)).collect()
    }
}

/// Runs `f` on the table `x[v]^k`, `k ≤ MAX_DEGREE`, stored at `v · (MAX_DEGREE + 1) + k`.
fn with_powers<T>(x: &[f64], degree: usize, f: impl FnOnce(&[f64]) -> T) -> T {
    const STACK_VARS: usize = 8;
    let len = x.len() * (MAX_DEGREE + 1);
    let mut stack = [0.0; STACK_VARS * (MAX_DEGREE + 1)];
    let mut heap = Vec::new();
    let table: &mut [f64] = if x.len() <= STACK_VARS {
        &mut stack[..len]
    } else {
        heap.resize(len, 0.0);
        &mut heap
    };
    for (v, &xv) in x.iter().enumerate() {
        let row = &mut table[v * (MAX_DEGREE + 1)..(v + 1) * (MAX_DEGREE + 1)];
        row[0] = 1.0;
        for k in 1..=degree {
            row[k] = row[k - 1] * xv;
        }
    }
    f(table)
}

impl TryFrom<SmoothSpec> for SmoothTestFunction {
    type Error = Error;

    fn try_from(spec: SmoothSpec) -> Result<Self> {
        let mut f = Self::from_coefficients(spec.n, spec.degree, spec.coefficients)?;
        f.seed = spec.seed;
        Ok(f)
    }
}

impl From<SmoothTestFunction> for SmoothSpec {
    fn from(f: SmoothTestFunction) -> Self {
        Self {
            n: f.n,
            degree: f.degree,
            seed: f.seed,
            coefficients: f.coefficients,
        }
    }
}

/// Random polynomial of degree `degree` with coefficients uniform on `(-1, 1)`.
pub fn random_smooth(n: usize, degree: usize, seed: u64) -> Result<SmoothTestFunction> {
    let count = if degree <= MAX_DEGREE && n >= 2 {
        SmoothTestFunction::coefficient_count(n, degree)
    } else {
        0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients = (0..count).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut f = SmoothTestFunction::from_coefficients(n, degree, coefficients)?;
    f.seed = Some(seed);
    Ok(f)
}

/// `size` random polynomials with degrees cycling through 1, 2, 3 and seeds
/// `base_seed, base_seed + 1, …`.
pub fn smooth_corpus(n: usize, size: usize, base_seed: u64) -> Result<Vec<SmoothTestFunction>> {
    (0..size)
        .map(|i| random_smooth(n, 1 + i % 3, base_seed + i as u64))
        .collect()
}

/// A test function `u` on `S^n` together with the pole `Φ` of the distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Radial { profile: RadialProfile, pole: AngularPoint },
    Smooth { function: SmoothTestFunction, pole: AngularPoint },
}

impl TestFunction {
    pub fn radial(profile: RadialProfile, pole: AngularPoint) -> Self {
        Self::Radial { profile, pole }
    }

    pub fn smooth(function: SmoothTestFunction, pole: AngularPoint) -> Self {
        Self::Smooth { function, pole }
    }

    pub fn pole(&self) -> &AngularPoint {
        match self {
            Self::Radial { pole, .. } | Self::Smooth { pole, .. } => pole,
        }
    }

    pub fn dim(&self) -> usize {
        self.pole().dim()
    }

    /// `c · u`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::Radial { profile, pole } => Self::Radial {
                profile: profile.clone().scaled(factor),
                pole: pole.clone(),
            },
            Self::Smooth { function, pole } => Self::Smooth {
                function: function.scaled(factor),
                pole: pole.clone(),
            },
        }
    }
}
