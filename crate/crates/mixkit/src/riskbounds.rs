//! Value-at-Risk aggregation under dependence uncertainty: the tail-average
//! upper bound, rearrangement estimates of worst/best VaR on discretized
//! tail grids, comonotone sums, and convex-order comparison.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::criteria;
use crate::distributions::{normal, DiscreteDistribution, DistributionSpec};
use crate::error::{Budget, Error};
use crate::numeric::{rat_int, rat_to_f64, ratjson, Rational, Tolerance};
use crate::rearrange::{local_search, MatrixInstance, ObjectiveKind};
use crate::verdict::Status;

/// The tail-average bound together with its exact value when every marginal
/// admits an exact tail integral.
#[derive(Debug, Clone)]
pub struct PhiBound {
    pub value: f64,
    pub exact: Option<Rational>,
}

/// Integral of the quantile function over (p, 1], per marginal.
fn tail_integral(spec: &DistributionSpec, p: &Rational) -> Result<(f64, Option<Rational>), Error> {
    match spec {
        DistributionSpec::Uniform { a, b } => {
            let one = Rational::one();
            let v = a * (&one - p) + (b - a) * (&one - p * p) / rat_int(2);
            Ok((rat_to_f64(&v), Some(v)))
        }
        DistributionSpec::Discrete(d) => {
            let mut cum = Rational::zero();
            let mut total = Rational::zero();
            for (point, w) in d.points().iter().zip(d.weights()) {
                let prev = cum.clone();
                cum += w;
                // overlap of (prev, cum] with (p, 1]
                let lo = if &prev > p { prev } else { p.clone() };
                if cum > lo {
                    total += point * (&cum - lo);
                }
            }
            Ok((rat_to_f64(&total), Some(total)))
        }
        DistributionSpec::Normal { mu, sigma } => {
            let pf = rat_to_f64(p);
            let z = normal::inv_cdf(pf);
            let v = rat_to_f64(mu) * (1.0 - pf) + rat_to_f64(sigma) * normal::pdf(z);
            Ok((v, None))
        }
        DistributionSpec::QuantileTable { q: qs, x: xs, .. } => {
            let v = table_integral(qs, xs, p, &Rational::one());
            Ok((rat_to_f64(&v), Some(v)))
        }
        other => Err(Error::NoQuantile {
            spec: other.kind(),
            detail: ": tail integral unavailable".into(),
        }),
    }
}

/// Exact integral of the piecewise-linear quantile interpolant over [lo, hi],
/// with constant extension beyond the grid.
fn table_integral(qs: &[Rational], xs: &[Rational], lo: &Rational, hi: &Rational) -> Rational {
    let interp = |q: &Rational| -> Rational {
        if q <= &qs[0] {
            return xs[0].clone();
        }
        if q >= qs.last().expect("nonempty") {
            return xs.last().expect("nonempty").clone();
        }
        let idx = qs.partition_point(|g| g < q);
        let (q0, q1) = (&qs[idx - 1], &qs[idx]);
        let (x0, x1) = (&xs[idx - 1], &xs[idx]);
        x0 + (q - q0) / (q1 - q0) * (x1 - x0)
    };
    // breakpoints of the interpolant clipped to [lo, hi]
    let mut knots = vec![lo.clone()];
    for q in qs {
        if q > lo && q < hi {
            knots.push(q.clone());
        }
    }
    knots.push(hi.clone());
    let mut total = Rational::zero();
    for w in knots.windows(2) {
        let (c, d) = (&w[0], &w[1]);
        total += (d - c) * (interp(c) + interp(d)) / rat_int(2);
    }
    total
}

/// The upper bound Phi(p) = (1/(1-p)) * sum_i int_p^1 VaR_q(F_i) dq on the
/// worst-case VaR over all dependence structures.
pub fn phi_upper_bound(specs: &[DistributionSpec], p: &Rational) -> Result<PhiBound, Error> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    if p <= &Rational::zero() || p >= &Rational::one() {
        return Err(Error::BadProbability(p.to_string()));
    }
    let mut float_total = 0.0f64;
    let mut exact_total = Some(Rational::zero());
    for spec in specs {
        let (v, exact) = tail_integral(spec, p)?;
        float_total += v;
        exact_total = match (exact_total, exact) {
            (Some(acc), Some(e)) => Some(acc + e),
            _ => None,
        };
    }
    let width = Rational::one() - p;
    let exact = exact_total.map(|t| t / &width);
    let value = match &exact {
        Some(r) => rat_to_f64(r),
        None => float_total / rat_to_f64(&width),
    };
    Ok(PhiBound { value, exact })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Worst,
    Best,
    Both,
}

/// Risk-bound report: the Phi bound, rearrangement estimates, sharpness
/// flags from the tail mixability checks, and the discretization error.
#[derive(Debug, Clone, Serialize)]
pub struct RiskBoundReport {
    pub p: f64,
    pub phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_exact: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wvar_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bvar_estimate: Option<f64>,
    /// Upper-tail conditional marginals certified jointly mixable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sharp: Option<bool>,
    /// Mirror flag for the lower window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sharp_lower: Option<bool>,
    pub n_points: usize,
    /// Midpoint-rule error allowance: half the largest grid gap, summed
    /// over marginals.
    pub epsilon: f64,
    pub restarts: usize,
    pub seed: u64,
    pub diagnostics: Vec<String>,
}

/// Joint-mixability status of the window-conditional marginals. Marginals
/// whose conditional law leaves the spec language fall back to the support
/// screen: a window law unbounded on exactly one side refutes mixability.
fn window_jm_status(
    specs: &[DistributionSpec],
    p: &Rational,
    upper: bool,
    budget: &Budget,
    tol: Tolerance,
) -> (Status, String) {
    let mut window_specs = Vec::with_capacity(specs.len());
    let mut representable = true;
    for spec in specs {
        let w = if upper {
            spec.tail_spec(p)
        } else {
            spec.lower_spec(p)
        };
        match w {
            Ok(s) => window_specs.push(s),
            Err(_) => {
                representable = false;
                break;
            }
        }
    }
    if representable {
        match criteria::decide(&window_specs, None, budget, tol) {
            Ok(v) => {
                let detail = format!("window mixability: {:?} ({})", v.status, v.reason);
                return (v.status, detail);
            }
            Err(e) => return (Status::Unknown, format!("window check failed: {e}")),
        }
    }
    // window laws are always bounded on the window side; unboundedness on
    // the far side alone refutes mixability via the infinity-norm screen
    let refuted = specs.iter().any(|s| {
        let sup = s.essential_support();
        if upper {
            sup.hi.is_none()
        } else {
            sup.lo.is_none()
        }
    });
    if refuted {
        (
            Status::NotMixable,
            "window law unbounded on one side only; infinity-norm screen refutes mixability"
                .into(),
        )
    } else {
        (
            Status::Unknown,
            "window law not representable in the spec language".into(),
        )
    }
}

fn quantile_grid(
    spec: &DistributionSpec,
    n_points: usize,
    lo: &Rational,
    hi: &Rational,
) -> Result<Vec<f64>, Error> {
    let width = hi - lo;
    let two_n = rat_int(2 * n_points as i64);
    (1..=n_points)
        .map(|k| {
            let q = lo + &width * rat_int(2 * k as i64 - 1) / &two_n;
            spec.quantile(&q).map(|r| rat_to_f64(&r))
        })
        .collect()
}

fn mesh_sum(grids: &[Vec<f64>]) -> f64 {
    grids
        .iter()
        .map(|g| {
            g.windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0f64, f64::max)
                / 2.0
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn estimate_side(
    specs: &[DistributionSpec],
    p: &Rational,
    n_points: usize,
    restarts: usize,
    seed: u64,
    upper: bool,
    budget: &Budget,
    tol: Tolerance,
) -> Result<(f64, f64, Status, String), Error> {
    let (lo, hi) = if upper {
        (p.clone(), Rational::one())
    } else {
        (Rational::zero(), p.clone())
    };
    let grids: Vec<Vec<f64>> = specs
        .iter()
        .map(|s| quantile_grid(s, n_points, &lo, &hi))
        .collect::<Result<_, _>>()?;
    let epsilon = mesh_sum(&grids);
    let columns: Vec<Vec<f64>> = if upper {
        // maximize the minimum row sum: negate and minimize the maximum
        grids
            .iter()
            .map(|g| g.iter().map(|v| -v).collect())
            .collect()
    } else {
        grids.clone()
    };
    let instance = MatrixInstance::from_columns(columns)?;
    let solved = local_search(&instance, ObjectiveKind::Minimax, restarts, seed, tol)?;
    let estimate = if upper { -solved.value } else { solved.value };
    let (status, detail) = window_jm_status(specs, p, upper, budget, tol);
    Ok((estimate, epsilon, status, detail))
}

/// Rearrangement estimate of the worst-case VaR at level `p` on an N-point
/// midpoint grid of the upper tails, with the sharpness flag set when the
/// tail-conditional marginals are certified jointly mixable.
pub fn wvar_estimate(
    specs: &[DistributionSpec],
    p: &Rational,
    n_points: usize,
    restarts: usize,
    seed: u64,
    budget: &Budget,
    tol: Tolerance,
) -> Result<RiskBoundReport, Error> {
    var_bounds(specs, p, n_points, restarts, seed, Side::Worst, budget, tol)
}

/// Mirror estimate of the best-case VaR on the lower window (0, p].
pub fn bvar_estimate(
    specs: &[DistributionSpec],
    p: &Rational,
    n_points: usize,
    restarts: usize,
    seed: u64,
    budget: &Budget,
    tol: Tolerance,
) -> Result<RiskBoundReport, Error> {
    var_bounds(specs, p, n_points, restarts, seed, Side::Best, budget, tol)
}

#[allow(clippy::too_many_arguments)]
pub fn var_bounds(
    specs: &[DistributionSpec],
    p: &Rational,
    n_points: usize,
    restarts: usize,
    seed: u64,
    side: Side,
    budget: &Budget,
    tol: Tolerance,
) -> Result<RiskBoundReport, Error> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    if p <= &Rational::zero() || p >= &Rational::one() {
        return Err(Error::BadProbability(p.to_string()));
    }
    let phi = phi_upper_bound(specs, p)?;
    let mut report = RiskBoundReport {
        p: rat_to_f64(p),
        phi: phi.value,
        phi_exact: phi.exact.as_ref().map(ratjson::to_value),
        wvar_estimate: None,
        bvar_estimate: None,
        sharp: None,
        sharp_lower: None,
        n_points,
        epsilon: 0.0,
        restarts,
        seed,
        diagnostics: Vec::new(),
    };

    // a single marginal aggregates to itself: VaR_p exactly, no grid error
    if specs.len() == 1 {
        let v = rat_to_f64(&specs[0].quantile(p)?);
        let (status, detail) = window_jm_status(specs, p, true, budget, tol);
        if matches!(side, Side::Worst | Side::Both) {
            report.wvar_estimate = Some(v);
            report.sharp = Some(status == Status::Mixable);
            report.diagnostics.push(detail);
        }
        if matches!(side, Side::Best | Side::Both) {
            report.bvar_estimate = Some(v);
            let (status, detail) = window_jm_status(specs, p, false, budget, tol);
            report.sharp_lower = Some(status == Status::Mixable);
            report.diagnostics.push(detail);
        }
        return Ok(report);
    }

    if n_points < 2 {
        return Err(Error::BadParameter(
            "tail discretization needs N >= 2".into(),
        ));
    }

    if matches!(side, Side::Worst | Side::Both) {
        let (estimate, eps, status, detail) =
            estimate_side(specs, p, n_points, restarts, seed, true, budget, tol)?;
        report.wvar_estimate = Some(estimate);
        report.epsilon = eps;
        report.sharp = Some(status == Status::Mixable);
        report.diagnostics.push(format!("upper {detail}"));
        if status != Status::Mixable {
            report
                .diagnostics
                .push("estimate is a lower bound of the supremum; bound not attained-verified".into());
        }
    }
    if matches!(side, Side::Best | Side::Both) {
        let (estimate, eps, status, detail) =
            estimate_side(specs, p, n_points, restarts, seed, false, budget, tol)?;
        report.bvar_estimate = Some(estimate);
        if report.epsilon == 0.0 {
            report.epsilon = eps;
        }
        report.sharp_lower = Some(status == Status::Mixable);
        report.diagnostics.push(format!("lower {detail}"));
    }
    Ok(report)
}

/// Law of the comonotone sum F_1^{-1}(U) + ... + F_n^{-1}(U) on a common
/// N-point midpoint grid: the convex-order largest aggregate.
pub fn comonotone_sum(
    specs: &[DistributionSpec],
    n_points: usize,
) -> Result<DiscreteDistribution, Error> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    if n_points == 0 {
        return Err(Error::BadParameter("grid needs N >= 1".into()));
    }
    let two_n = rat_int(2 * n_points as i64);
    let mut points = Vec::with_capacity(n_points);
    for k in 1..=n_points {
        let q = rat_int(2 * k as i64 - 1) / &two_n;
        let mut total = Rational::zero();
        for spec in specs {
            total += spec.quantile(&q)?;
        }
        points.push(total);
    }
    let w = Rational::one() / rat_int(n_points as i64);
    DiscreteDistribution::new(points, vec![w; n_points])
}

/// Expected shortfall of the sum below a threshold: E[(S - t)_+], exact.
pub fn stop_loss(d: &DiscreteDistribution, t: &Rational) -> Rational {
    d.points()
        .iter()
        .zip(d.weights())
        .map(|(x, w)| {
            let diff = x - t;
            if diff > Rational::zero() {
                diff * w
            } else {
                Rational::zero()
            }
        })
        .sum()
}

/// Stop-loss transform sampled at the law's own support points.
#[derive(Debug, Clone, Serialize)]
pub struct StopLossCurve {
    pub thresholds: Vec<serde_json::Value>,
    pub values: Vec<serde_json::Value>,
}

pub fn stop_loss_curve(d: &DiscreteDistribution) -> StopLossCurve {
    let thresholds: Vec<&Rational> = d.points().iter().collect();
    StopLossCurve {
        thresholds: thresholds.iter().map(|t| ratjson::to_value(t)).collect(),
        values: thresholds
            .iter()
            .map(|t| ratjson::to_value(&stop_loss(d, t)))
            .collect(),
    }
}

/// Convex-order test for finite discrete laws: equal means plus stop-loss
/// dominance at every merged support point. Exact where the data is exact;
/// dyadic float-derived values get the tolerance.
pub fn convex_order_leq(
    s1: &DiscreteDistribution,
    s2: &DiscreteDistribution,
    tol: Tolerance,
) -> bool {
    let m1 = s1.mean();
    let m2 = s2.mean();
    if m1 != m2 && !tol.approx_eq(rat_to_f64(&m1), rat_to_f64(&m2)) {
        return false;
    }
    let mut grid: Vec<Rational> = s1
        .points()
        .iter()
        .chain(s2.points())
        .cloned()
        .collect();
    grid.sort();
    grid.dedup();
    for t in &grid {
        let lhs = stop_loss(s1, t);
        let rhs = stop_loss(s2, t);
        if lhs > rhs && !tol.leq(rat_to_f64(&lhs), rat_to_f64(&rhs)) {
            return false;
        }
    }
    true
}
