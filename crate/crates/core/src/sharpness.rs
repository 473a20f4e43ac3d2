//! Probes of the sharp constants: sweeps along the optimizing families, a
//! golden-section search over the family parameter, and a random search for
//! counterexamples to the claimed inequality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{evaluate_on_sphere, evaluate_radial, Inequality, InequalityKind, InequalityReport};
use crate::functions::{critical_family, random_smooth, subcritical_family, RadialProfile, SmoothTestFunction, TestFunction};
use crate::geometry::AngularPoint;
use crate::quadrature::{Grading, PolarRuleSpec, RadialGrid, SphereGrid, SphereGridSpec};

/// Fraction above the target allowed for the last quotient of a sweep.
pub const SHARPNESS_BAND: f64 = 0.3;

/// Slack for the lower bound `Q ≥ target`.
pub const LOWER_BOUND_SLACK: f64 = 1e-7;

/// Descent steps between restarts of [`counterexample_search`].
pub const STEPS_PER_RESTART: usize = 50;

/// Relative deficit below which a search result is flagged.
pub const CANDIDATE_THRESHOLD: f64 = -1e-5;

/// Radial rule used for a family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    /// `nodes` per panel with 20 geometric levels for the subcritical family.
    /// For the critical family, logarithmic grading deep enough for the
    /// `L^{-1-nε}` tail of `C`.
    Graded { nodes: usize },
    Fixed(PolarRuleSpec),
}

impl Resolution {
    pub const AUTO: Self = Self::Graded { nodes: 16 };

    pub fn rule_for(&self, ineq: &Inequality, eps: f64) -> PolarRuleSpec {
        match *self {
            Self::Fixed(spec) => spec,
            Self::Graded { nodes } => {
                let grading = match ineq.kind {
                    InequalityKind::Critical => {
                        // the tail beyond the last panel is about 2^{-levels · nε}
                        let levels = (40.0 / (ineq.n as f64 * eps)).ceil().clamp(40.0, 1000.0);
                        Grading::Logarithmic { levels: 20, log_levels: levels as usize }
                    }
                    _ => Grading::Geometric { levels: 20 },
                };
                PolarRuleSpec { nodes, grading }
            }
        }
    }
}

/// The member `u_ε` of the optimizing family matching `ineq`.
pub fn family_member(ineq: &Inequality, eps: f64) -> Result<RadialProfile> {
    match ineq.kind {
        InequalityKind::Subcritical => subcritical_family(ineq.n, ineq.p, eps),
        InequalityKind::Critical => critical_family(ineq.n, eps),
        InequalityKind::Claimed => Err(Error::Parameter("no optimizing family for the claimed inequality".into())),
    }
}

/// Report for `u_ε`.
pub fn family_report(ineq: &Inequality, eps: f64, resolution: Resolution) -> Result<InequalityReport> {
    let u = family_member(ineq, eps)?;
    let grid = RadialGrid::new(ineq.n, resolution.rule_for(ineq, eps))?;
    evaluate_radial(ineq, &u, &grid).map_err(|e| Error::NonFinite(format!("eps = {eps}: {e}")))
}

fn quotient_of(report: &InequalityReport) -> Result<f64> {
    report
        .quotient
        .ok_or_else(|| Error::NonFinite("quotient undefined: singular term vanished".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: InequalityKind,
    pub n: usize,
    pub p: f64,
    pub eps: Vec<f64>,
    pub quotients: Vec<f64>,
    /// `B / C` for each `ε`.
    pub middle_ratios: Vec<f64>,
    /// `λ^p` or `μ^n`.
    pub target: f64,
    pub best: f64,
    /// Quotients nonincreasing as `ε` decreases.
    pub monotone: bool,
    /// Factor applied to the middle coefficient in `quotients`.
    #[serde(default = "unit")]
    pub middle_scale: f64,
}

fn unit() -> f64 {
    1.0
}

fn is_monotone(quotients: &[f64]) -> bool {
    quotients.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

impl SweepResult {
    pub fn final_quotient(&self) -> f64 {
        *self.quotients.last().expect("sweeps are nonempty")
    }

    /// Every quotient is at least `target - LOWER_BOUND_SLACK`.
    pub fn respects_lower_bound(&self) -> bool {
        self.quotients.iter().all(|&q| q >= self.target - LOWER_BOUND_SLACK)
    }

    /// Final quotient at most `(1 + band) · target`.
    pub fn within_band(&self, band: f64) -> bool {
        self.final_quotient() <= (1.0 + band) * self.target
    }

    /// Monotone, above the target and ending within [`SHARPNESS_BAND`].
    /// A single-point sweep has no trend and passes on the lower bound alone.
    pub fn passes(&self) -> bool {
        let trend = self.eps.len() < 2 || (self.monotone && self.within_band(SHARPNESS_BAND));
        trend && self.respects_lower_bound()
    }

    /// The same sweep with the middle coefficient multiplied by `factor`,
    /// computed from the stored `B / C`. With `factor < 1` a quotient below
    /// the target shows the weakened inequality failing along the family.
    pub fn with_middle_scale(&self, factor: f64) -> Result<Self> {
        let coefficient = Inequality::new(self.kind, self.n, self.p)?.middle_coefficient();
        let shift = (factor - self.middle_scale) * coefficient;
        let quotients: Vec<f64> = self.quotients.iter().zip(&self.middle_ratios).map(|(q, r)| q + shift * r).collect();
        Ok(Self {
            best: quotients.iter().copied().fold(f64::INFINITY, f64::min),
            monotone: is_monotone(&quotients),
            quotients,
            middle_scale: factor,
            ..self.clone()
        })
    }

    /// `eps,quotient` with a header line.
    pub fn to_csv(&self) -> String {
        two_column_csv("eps", "quotient", self.eps.iter().zip(&self.quotients).map(|(&e, &q)| (e, q)))
    }
}

fn two_column_csv(a: &str, b: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{a},{b}\n");
    for (x, y) in rows {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

/// `ε` values spaced evenly in `log ε` from `eps_max` down to `eps_min`.
pub fn log_spaced(eps_max: f64, eps_min: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![eps_max];
    }
    let (a, b) = (eps_max.ln(), eps_min.ln());
    (0..steps)
        .map(|i| (a + (b - a) * i as f64 / (steps - 1) as f64).exp())
        .collect()
}

/// Evaluates `Q(u_ε)` along a decreasing list of `ε`.
pub fn sweep(ineq: &Inequality, eps: &[f64], resolution: Resolution) -> Result<SweepResult> {
    if eps.is_empty() {
        return Err(Error::Parameter("empty parameter list".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("parameter list must be strictly decreasing".into()));
    }
    for &e in eps {
        family_member(ineq, e)?;
    }
    let reports: Vec<InequalityReport> = eps
        .par_iter()
        .map(|&e| family_report(ineq, e, resolution))
        .collect::<Result<_>>()?;
    let quotients: Vec<f64> = reports.iter().map(quotient_of).collect::<Result<_>>()?;
    let middle_ratios = reports.iter().map(|r| r.terms.middle / r.terms.singular).collect();
    let monotone = is_monotone(&quotients);
    Ok(SweepResult {
        kind: ineq.kind,
        n: ineq.n,
        p: ineq.p,
        eps: eps.to_vec(),
        best: quotients.iter().copied().fold(f64::INFINITY, f64::min),
        quotients,
        middle_ratios,
        target: ineq.constant(),
        monotone,
        middle_scale: 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub eps: f64,
    pub quotient: f64,
    /// Every `(ε, Q)` evaluated, in order.
    pub evaluations: Vec<(f64, f64)>,
}

impl Minimum {
    pub fn to_csv(&self) -> String {
        two_column_csv("eps", "quotient", self.evaluations.iter().copied())
    }
}

/// Golden-section search for the smallest `Q(u_ε)` over `log ε ∈ [log lo, log hi]`,
/// stopped once the bracket is within a relative `1e-3` in `ε`. Returns the
/// best point evaluated, bracket ends included.
pub fn minimize_quotient(ineq: &Inequality, lo: f64, hi: f64, resolution: Resolution) -> Result<Minimum> {
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::Parameter(format!("need 0 < eps_lo < eps_hi, got [{lo}, {hi}]")));
    }
    let mut evaluations = Vec::new();
    let mut q = |t: f64| -> Result<f64> {
        let e = t.exp();
        let value = quotient_of(&family_report(ineq, e, resolution)?)?;
        evaluations.push((e, value));
        Ok(value)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    q(a)?;
    q(b)?;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut qc, mut qd) = (q(c)?, q(d)?);
    while b - a > 1e-3f64.ln_1p() {
        if qc <= qd {
            b = d;
            d = c;
            qd = qc;
            c = b - inv_phi * (b - a);
            qc = q(c)?;
        } else {
            a = c;
            c = d;
            qc = qd;
            d = a + inv_phi * (b - a);
            qd = q(d)?;
        }
    }
    let (eps, quotient) = evaluations
        .iter()
        .copied()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("at least four evaluations");
    Ok(Minimum { eps, quotient, evaluations })
}

/// Product rule used by [`counterexample_search`] when none is given.
pub fn search_grid_spec() -> SphereGridSpec {
    SphereGridSpec {
        polar: PolarRuleSpec {
            nodes: 12,
            grading: Grading::Geometric { levels: 8 },
        },
        angular_nodes: 12,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub restart: usize,
    pub deficit: f64,
    /// `deficit / (A + B + C)`, the quantity minimized.
    pub relative_deficit: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub iterations: usize,
    /// Smallest relative deficit in the trace.
    pub min_relative_deficit: f64,
    pub argmin: SmoothTestFunction,
    pub argmin_report: InequalityReport,
    /// Report for `u ≡ 1`.
    pub baseline: InequalityReport,
    /// Set when the minimum is below [`CANDIDATE_THRESHOLD`].
    pub candidate: bool,
    pub trace: Vec<TraceEntry>,
}

impl SearchResult {
    /// `iteration,relative_deficit` with a header line.
    pub fn to_csv(&self) -> String {
        two_column_csv(
            "iteration",
            "relative_deficit",
            self.trace.iter().map(|t| (t.iteration as f64, t.relative_deficit)),
        )
    }
}

/// Random-restart descent on the claimed inequality's relative deficit over
/// polynomial test functions.
///
/// Each restart runs [`STEPS_PER_RESTART`] steps. Restart 0 starts from
/// `u ≡ 1` as a degree-2 polynomial; restart `r > 0` starts from a random
/// polynomial of degree `1 + r mod 3` drawn from stream `r` of the seed.
/// A step adds Gaussian noise to every coefficient and halves the step size
/// whenever the proposal is rejected.
pub fn counterexample_search(n: usize, p: f64, iterations: usize, seed: u64, grid: &SphereGrid) -> Result<SearchResult> {
    let ineq = Inequality::claimed(n, p)?;
    if iterations == 0 {
        return Err(Error::Parameter("iterations must be at least 1".into()));
    }
    if grid.dim() != n {
        return Err(Error::Parameter(format!("grid is for S^{}, search for S^{n}", grid.dim())));
    }
    let pole = AngularPoint::north_pole(n);
    let report = |f: &SmoothTestFunction| evaluate_on_sphere(&ineq, &TestFunction::smooth(f.clone(), pole.clone()), grid);

    let baseline = report(&SmoothTestFunction::constant(n, 1.0)?)?;
    let mut trace = Vec::with_capacity(iterations);
    let mut best: Option<(SmoothTestFunction, InequalityReport)> = None;
    let mut current = SmoothTestFunction::constant(n, 1.0)?;
    let mut current_value = f64::INFINITY;
    let mut step = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for iteration in 0..iterations {
        let restart = iteration / STEPS_PER_RESTART;
        let (candidate, fresh) = if iteration % STEPS_PER_RESTART == 0 {
            rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            step = 0.5;
            let start = if restart == 0 {
                let mut c = vec![0.0; SmoothTestFunction::coefficient_count(n, 2)];
                c[0] = 1.0;
                SmoothTestFunction::from_coefficients(n, 2, c)?
            } else {
                random_smooth(n, 1 + restart % 3, rng.random())?
            };
            (start, true)
        } else {
            let normal = Normal::new(0.0, step).map_err(|e| Error::Parameter(e.to_string()))?;
            let coefficients = current.coefficients().iter().map(|c| c + normal.sample(&mut rng)).collect();
            (current.with_coefficients(coefficients), false)
        };
        let r = report(&candidate)?;
        let value = r.relative_deficit();
        let accepted = fresh || value < current_value;
        if accepted {
            current = candidate.clone();
            current_value = value;
        } else {
            step *= 0.5;
        }
        trace.push(TraceEntry {
            iteration,
            restart,
            deficit: r.deficit,
            relative_deficit: value,
            accepted,
        });
        if best.as_ref().is_none_or(|(_, b)| value < b.relative_deficit()) {
            best = Some((candidate, r));
        }
    }
    let (argmin, argmin_report) = best.expect("at least one iteration");
    let min_relative_deficit = argmin_report.relative_deficit();
    Ok(SearchResult {
        n,
        p,
        seed,
        iterations,
        min_relative_deficit,
        argmin,
        argmin_report,
        baseline,
        candidate: min_relative_deficit < CANDIDATE_THRESHOLD,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn subcritical_sweep_matches_oracle() {
        let ineq = Inequality::subcritical(3, 2.0).unwrap();
        let eps = [1.0, 0.3, 0.1, 0.03, 0.01];
        let r = sweep(&ineq, &eps, Resolution::AUTO).unwrap();
        let oracle = [0.39599, 0.33983, 0.30735, 0.28841, 0.27896];
        for (q, o) in r.quotients.iter().zip(oracle) {
            assert_relative_eq!(*q, o, max_relative = 2e-5);
        }
        assert!(r.monotone && r.passes());
        assert_eq!(r.best, r.final_quotient());
    }

    #[test]
    fn critical_two_dimensional_sweep_is_exact() {
        // for n = 2 the family has Q(ε) = 1/4 + ε² and B/C = 2ε
        let ineq = Inequality::critical(2).unwrap();
        let eps = [0.4, 0.2, 0.1, 0.05];
        let r = sweep(&ineq, &eps, Resolution::AUTO).unwrap();
        for ((q, ratio), e) in r.quotients.iter().zip(&r.middle_ratios).zip(eps) {
            assert_relative_eq!(*q, 0.25 + e * e, max_relative = 1e-6);
            assert_relative_eq!(*ratio, 2.0 * e, max_relative = 1e-6);
        }
        assert!(r.passes());
    }

    #[test]
    fn deep_logarithmic_grading_stays_finite() {
        // 1000 halvings in s put nodes at s ~ 1e-300
        let ineq = Inequality::critical(2).unwrap();
        let r = sweep(&ineq, &[0.02, 0.01], Resolution::AUTO).unwrap();
        assert_relative_eq!(r.quotients[0], 0.2504, max_relative = 1e-6);
        assert_relative_eq!(r.quotients[1], 0.2501, max_relative = 1e-5);
        let m = minimize_quotient(&Inequality::critical(3).unwrap(), 0.01, 0.5, Resolution::AUTO).unwrap();
        assert!(m.quotient.is_finite() && m.eps < 0.011);
    }

    #[test]
    fn middle_scale_shifts_quotients() {
        let ineq = Inequality::critical(2).unwrap();
        let r = sweep(&ineq, &[0.4, 0.1], Resolution::AUTO).unwrap();
        assert_eq!(r.with_middle_scale(1.0).unwrap(), r);
        // Q = 1/4 + ε² and B/C = 2ε with middle coefficient 1/2, so dropping
        // the middle term leaves 1/4 + ε² - ε, below 1/4
        let bare = r.with_middle_scale(0.0).unwrap();
        assert_relative_eq!(bare.quotients[1], 0.25 + 0.01 - 0.1, max_relative = 1e-6);
        assert!(!bare.respects_lower_bound());
        assert_relative_eq!(bare.with_middle_scale(1.0).unwrap().quotients[0], r.quotients[0], max_relative = 1e-12);
    }

    #[test]
    fn single_point_sweep_passes() {
        let ineq = Inequality::subcritical(4, 2.0).unwrap();
        let r = sweep(&ineq, &[0.5], Resolution::AUTO).unwrap();
        assert_eq!(r.quotients.len(), 1);
        assert!(r.monotone && r.passes());
    }

    #[test]
    fn sweep_rejects_bad_lists() {
        let ineq = Inequality::subcritical(3, 2.0).unwrap();
        assert!(sweep(&ineq, &[], Resolution::AUTO).is_err());
        assert!(sweep(&ineq, &[0.1, 0.2], Resolution::AUTO).is_err());
        assert!(sweep(&ineq, &[2.0, 0.1], Resolution::AUTO).is_err());
        assert!(sweep(&Inequality::claimed(3, 2.0).unwrap(), &[0.1], Resolution::AUTO).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let ineq = Inequality::subcritical(3, 2.0).unwrap();
        let csv = sweep(&ineq, &[1.0, 0.1], Resolution::AUTO).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "eps,quotient");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,0.39"));
    }

    #[test]
    fn log_spacing() {
        let e = log_spaced(1.0, 1e-3, 4);
        assert_eq!(e.len(), 4);
        assert_relative_eq!(e[1], 0.1, max_relative = 1e-12);
        assert_relative_eq!(e[3], 1e-3, max_relative = 1e-12);
        assert_eq!(log_spaced(0.3, 0.1, 1), vec![0.3]);
    }

    #[test]
    fn minimizer_beats_bracket_ends() {
        let ineq = Inequality::subcritical(3, 2.0).unwrap();
        let m = minimize_quotient(&ineq, 1e-3, 1.0, Resolution::AUTO).unwrap();
        let ends = [m.evaluations[0].1, m.evaluations[1].1];
        assert!(m.quotient <= ends[0] && m.quotient <= ends[1]);
        assert!(m.quotient >= ineq.constant() - LOWER_BOUND_SLACK);
        assert_eq!(m, minimize_quotient(&ineq, 1e-3, 1.0, Resolution::AUTO).unwrap());
        assert!(minimize_quotient(&ineq, 1.0, 0.5, Resolution::AUTO).is_err());
    }

    #[test]
    fn search_is_reproducible() {
        let grid = SphereGrid::new(3, search_grid_spec()).unwrap();
        let a = counterexample_search(3, 2.0, 60, 7, &grid).unwrap();
        let b = counterexample_search(3, 2.0, 60, 7, &grid).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.trace.len(), 60);
        let min = a.trace.iter().map(|t| t.relative_deficit).fold(f64::INFINITY, f64::min);
        assert_eq!(a.min_relative_deficit, min);
        assert_relative_eq!(a.baseline.deficit, PI * PI / 2.0, max_relative = 1e-10);
        assert_relative_eq!(a.trace[0].deficit, PI * PI / 2.0, max_relative = 1e-10);
        assert!(a.min_relative_deficit <= a.trace[0].relative_deficit);
        assert!(counterexample_search(3, 3.0, 1, 0, &grid).is_err());
        assert!(counterexample_search(3, 2.0, 0, 0, &grid).is_err());
    }
}
