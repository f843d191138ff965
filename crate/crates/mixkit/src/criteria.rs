//! Analytic mixability conditions and the decision dispatcher.
//!
//! The monotone-density, joint-monotone, and elliptical conditions are
//! if-and-only-if characterizations; the symmetric-unimodal, concave, and
//! density-floor conditions are sufficient only; the mean/support and norm
//! checks are necessary screens. The dispatcher runs them in a fixed order
//! so verdicts are reproducible.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::distributions::{Direction, DiscreteDistribution, DistributionSpec, SupportInterval};
use crate::error::{Budget, Error};
use crate::lpcert;
use crate::numeric::{rat_int, rat_to_f64, Rational, Tolerance};
use crate::verdict::{Certificate, Status, Verdict};

pub use crate::verdict::{Certificate as VerdictCertificate, Status as VerdictStatus};

/// Mean condition for n-fold complete mixability on a bounded support:
/// a + (b-a)/n <= mu <= b - (b-a)/n. Necessary for any F; exact.
pub fn mean_condition(support: &SupportInterval, mu: &Rational, n: usize) -> Result<bool, Error> {
    let (Some(a), Some(b)) = (&support.lo, &support.hi) else {
        return Err(Error::UnboundedSupport);
    };
    if n == 0 {
        return Err(Error::BadParameter("n must be at least 1".into()));
    }
    let margin = (b - a) / rat_int(n as i64);
    Ok(&(a + &margin) <= mu && mu <= &(b - &margin))
}

fn monotone_params(spec: &DistributionSpec) -> Option<(Rational, Rational, Rational, Option<Direction>)> {
    match spec {
        DistributionSpec::MonotoneDensity { a, b, mean, direction } => {
            Some((a.clone(), b.clone(), mean.clone(), Some(*direction)))
        }
        // a uniform density is monotone in both directions
        DistributionSpec::Uniform { a, b } => {
            let mean = (a + b) / rat_int(2);
            Some((a.clone(), b.clone(), mean, None))
        }
        _ => None,
    }
}

/// Complete mixability of a monotone density: holds exactly when the mean
/// condition does.
pub fn cm_monotone_density(spec: &DistributionSpec, n: usize) -> Result<Verdict, Error> {
    let Some((a, b, mean, _)) = monotone_params(spec) else {
        return Err(Error::BadParameter(format!(
            "monotone-density criterion needs a monotone or uniform spec, got {}",
            spec.kind()
        )));
    };
    let support = SupportInterval::bounded(a, b);
    if mean_condition(&support, &mean, n)? {
        Ok(Verdict::mixable("monotone_mean_iff"))
    } else {
        Ok(Verdict::not_mixable("monotone_mean_iff"))
    }
}

/// Concave density on a bounded interval: completely mixable for n >= 3.
/// The condition says nothing for n = 2, so that stays Unknown.
pub fn cm_concave_density(spec: &DistributionSpec, n: usize) -> Result<Verdict, Error> {
    let DistributionSpec::ConcaveDensity { .. } = spec else {
        return Err(Error::BadParameter(format!(
            "concave criterion needs a concave spec, got {}",
            spec.kind()
        )));
    };
    if n >= 3 {
        Ok(Verdict::mixable("concave_density"))
    } else {
        Ok(Verdict::unknown("concave_density_needs_n3"))
    }
}

/// Density bounded below by 3/(n(b-a)): sufficient for n-mixability.
pub fn cm_density_floor(spec: &DistributionSpec, n: usize) -> Result<Verdict, Error> {
    let DistributionSpec::BoundedBelowDensity { a, b, density_floor, .. } = spec else {
        return Err(Error::BadParameter(format!(
            "density-floor criterion needs a floor spec, got {}",
            spec.kind()
        )));
    };
    if a >= b {
        return Err(Error::BadInterval {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    let threshold = rat_int(3) / (rat_int(n as i64) * (b - a));
    if *density_floor >= threshold {
        Ok(Verdict::mixable("density_floor"))
    } else {
        Ok(Verdict::unknown("density_floor_below_threshold"))
    }
}

/// Joint mixability of monotone densities sharing a direction:
/// sum a_i + max span <= sum mu_i <= sum b_i - max span, exactly.
/// Uniform marginals are monotone in either direction.
pub fn jm_monotone_densities(specs: &[DistributionSpec]) -> Result<Verdict, Error> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    let mut common: Option<Direction> = None;
    let mut params = Vec::with_capacity(specs.len());
    for spec in specs {
        let Some((a, b, mean, dir)) = monotone_params(spec) else {
            return Err(Error::BadParameter(format!(
                "joint monotone criterion needs monotone or uniform specs, got {}",
                spec.kind()
            )));
        };
        if let Some(d) = dir {
            match common {
                None => common = Some(d),
                Some(c) if c != d => return Err(Error::MixedDirections),
                _ => {}
            }
        }
        params.push((a, b, mean));
    }
    let sum_a: Rational = params.iter().map(|(a, _, _)| a.clone()).sum();
    let sum_b: Rational = params.iter().map(|(_, b, _)| b.clone()).sum();
    let sum_mu: Rational = params.iter().map(|(_, _, m)| m.clone()).sum();
    let max_span = params
        .iter()
        .map(|(a, b, _)| b - a)
        .max()
        .expect("nonempty");
    if &sum_a + &max_span <= sum_mu && sum_mu <= &sum_b - &max_span {
        Ok(Verdict::mixable("joint_monotone_iff"))
    } else {
        Ok(Verdict::not_mixable("joint_monotone_iff"))
    }
}

/// Joint mixability within one elliptical family:
/// sum of scales at least twice the largest scale, exactly.
pub fn jm_elliptical(specs: &[DistributionSpec]) -> Result<Verdict, Error> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    let mut tag: Option<&str> = None;
    let mut sigmas = Vec::with_capacity(specs.len());
    for spec in specs {
        let (sigma, generator) = match spec {
            DistributionSpec::Normal { sigma, .. } => (sigma, "normal"),
            DistributionSpec::Elliptical { sigma, generator, .. } => (sigma, generator.as_str()),
            other => {
                return Err(Error::BadParameter(format!(
                    "elliptical criterion needs normal or elliptical specs, got {}",
                    other.kind()
                )))
            }
        };
        match tag {
            None => tag = Some(generator),
            Some(t) if t != generator => {
                return Err(Error::GeneratorMismatch(t.into(), generator.into()))
            }
            _ => {}
        }
        sigmas.push(sigma.clone());
    }
    let total: Rational = sigmas.iter().cloned().sum();
    let max = sigmas.iter().max().expect("nonempty").clone();
    if total >= rat_int(2) * &max {
        Ok(Verdict::mixable("elliptical_variance_iff"))
    } else {
        Ok(Verdict::not_mixable("elliptical_variance_iff"))
    }
}

/// Order of an L^p norm, p in [1, infinity].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOrder(f64);

impl NormOrder {
    pub fn p(p: f64) -> Result<Self, Error> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::BadParameter(format!("norm order must be >= 1, got {p}")));
        }
        Ok(NormOrder(p))
    }

    pub fn inf() -> Self {
        NormOrder(f64::INFINITY)
    }

    pub fn is_inf(&self) -> bool {
        self.0.is_infinite()
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// The default grid: {1, 1.5, 2, 3, infinity}.
    pub fn default_grid() -> Vec<NormOrder> {
        vec![
            NormOrder(1.0),
            NormOrder(1.5),
            NormOrder(2.0),
            NormOrder(3.0),
            NormOrder::inf(),
        ]
    }
}

impl Serialize for NormOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_inf() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl std::fmt::Display for NormOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Norm value: exact rational for p in {1, inf}, floating otherwise.
#[derive(Debug, Clone)]
enum NormVal {
    Exact(Rational),
    Approx(f64),
}

impl NormVal {
    fn zero_like(exact: bool) -> Self {
        if exact {
            NormVal::Exact(Rational::zero())
        } else {
            NormVal::Approx(0.0)
        }
    }

    fn add(&self, other: &NormVal) -> NormVal {
        match (self, other) {
            (NormVal::Exact(a), NormVal::Exact(b)) => NormVal::Exact(a + b),
            _ => NormVal::Approx(self.to_f64() + other.to_f64()),
        }
    }

    fn scale(&self, c: usize) -> NormVal {
        match self {
            NormVal::Exact(a) => NormVal::Exact(a * rat_int(c as i64)),
            NormVal::Approx(a) => NormVal::Approx(a * c as f64),
        }
    }

    fn to_f64(&self) -> f64 {
        match self {
            NormVal::Exact(a) => rat_to_f64(a),
            NormVal::Approx(a) => *a,
        }
    }

    /// Strict violation test: lhs > rhs, exactly when both sides are exact
    /// and beyond the tolerance otherwise.
    fn exceeds(&self, rhs: &NormVal, tol: Tolerance) -> bool {
        match (self, rhs) {
            (NormVal::Exact(a), NormVal::Exact(b)) => a > b,
            _ => self.to_f64() > rhs.to_f64() + tol.0,
        }
    }

    fn is_exact(&self) -> bool {
        matches!(self, NormVal::Exact(_))
    }
}

/// L^p norm of the positive or negative part of (X - c) for discrete X.
fn part_norm(d: &DiscreteDistribution, c: &Rational, p: NormOrder, positive: bool) -> NormVal {
    let part = |x: &Rational| -> Rational {
        let diff = if positive { x - c } else { c - x };
        if diff.is_positive() {
            diff
        } else {
            Rational::zero()
        }
    };
    if p.is_inf() {
        // support is sorted: the extreme point determines the sup
        let v = if positive {
            part(d.max())
        } else {
            part(d.min())
        };
        NormVal::Exact(v)
    } else if p.value() == 1.0 {
        let v: Rational = d
            .points()
            .iter()
            .zip(d.weights())
            .map(|(x, w)| part(x) * w)
            .sum();
        NormVal::Exact(v)
    } else {
        let pv = p.value();
        let sum: f64 = d
            .points()
            .iter()
            .zip(d.weights())
            .map(|(x, w)| rat_to_f64(&part(x)).powf(pv) * rat_to_f64(w))
            .sum();
        NormVal::Approx(sum.powf(1.0 / pv))
    }
}

/// A single violated norm inequality, re-checkable from the inputs.
#[derive(Debug, Clone, Serialize)]
pub struct NormViolation {
    /// Index of the isolated marginal for the heterogeneous form; absent
    /// for the homogeneous (t, s) form.
    pub marginal: Option<usize>,
    pub p: NormOrder,
    /// The split (mu_1, ..., mu_n) in force, serialized exactly.
    pub split: Vec<serde_json::Value>,
    /// Threshold t of the homogeneous form, when applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<serde_json::Value>,
    /// "plus" checks the positive part on the left; "minus" the mirror.
    pub side: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// True when both sides were compared in exact arithmetic.
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormCheckReport {
    pub violations: Vec<NormViolation>,
    pub p_grid: Vec<NormOrder>,
    pub splits: Vec<Vec<serde_json::Value>>,
    pub t_grid: Vec<serde_json::Value>,
    pub homogeneous: bool,
}

impl NormCheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Optional knobs for [`norm_check`]; `Default` gives the standard
/// configuration (mean split, p grid {1, 1.5, 2, 3, inf}, pooled support
/// thresholds).
#[derive(Debug, Clone, Default)]
pub struct NormCheckParams {
    pub p_grid: Option<Vec<NormOrder>>,
    pub splits: Option<Vec<Vec<Rational>>>,
    pub t_grid: Option<Vec<Rational>>,
}

/// Evaluates the law-determined-norm necessary conditions on every
/// (marginal, order, split) combination, plus the homogeneous (t, s) form
/// when all marginals coincide. Any violation refutes joint mixability with
/// center `k`.
pub fn norm_check(
    discretes: &[DiscreteDistribution],
    k: &Rational,
    params: &NormCheckParams,
    tol: Tolerance,
) -> Result<NormCheckReport, Error> {
    if discretes.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    let n = discretes.len();
    let p_grid = params
        .p_grid
        .clone()
        .unwrap_or_else(NormOrder::default_grid);

    let splits = match &params.splits {
        Some(s) => {
            for split in s {
                if split.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "split of length {} for {} marginals",
                        split.len(),
                        n
                    )));
                }
                let total: Rational = split.iter().cloned().sum();
                if &total != k {
                    return Err(Error::SplitSum {
                        expected: k.to_string(),
                        got: total.to_string(),
                    });
                }
            }
            s.clone()
        }
        None => {
            // default split: means, shifted equally so the total matches k
            let means: Vec<Rational> = discretes.iter().map(|d| d.mean()).collect();
            let shift = (k - means.iter().cloned().sum::<Rational>()) / rat_int(n as i64);
            vec![means.into_iter().map(|m| m + &shift).collect()]
        }
    };

    let homogeneous = n >= 2 && discretes.windows(2).all(|w| w[0] == w[1]);
    let t_grid: Vec<Rational> = if homogeneous {
        params.t_grid.clone().unwrap_or_else(|| {
            let mut pooled: Vec<Rational> = discretes
                .iter()
                .flat_map(|d| d.points().iter().cloned())
                .collect();
            pooled.sort();
            pooled.dedup();
            pooled
        })
    } else {
        Vec::new()
    };

    let mut violations = Vec::new();
    for split in &splits {
        for &p in &p_grid {
            // cache part norms per marginal for this (split, p)
            let plus: Vec<NormVal> = discretes
                .iter()
                .zip(split)
                .map(|(d, mu)| part_norm(d, mu, p, true))
                .collect();
            let minus: Vec<NormVal> = discretes
                .iter()
                .zip(split)
                .map(|(d, mu)| part_norm(d, mu, p, false))
                .collect();
            for i in 0..n {
                let exact = plus.iter().all(NormVal::is_exact);
                let rhs_minus = (0..n)
                    .filter(|&j| j != i)
                    .fold(NormVal::zero_like(exact), |acc, j| acc.add(&minus[j]));
                let rhs_plus = (0..n)
                    .filter(|&j| j != i)
                    .fold(NormVal::zero_like(exact), |acc, j| acc.add(&plus[j]));
                for (side, lhs, rhs) in [
                    ("plus", &plus[i], &rhs_minus),
                    ("minus", &minus[i], &rhs_plus),
                ] {
                    if lhs.exceeds(rhs, tol) {
                        violations.push(NormViolation {
                            marginal: Some(i),
                            p,
                            split: split.iter().map(crate::numeric::ratjson::to_value).collect(),
                            t: None,
                            side,
                            lhs: lhs.to_f64(),
                            rhs: rhs.to_f64(),
                            exact: lhs.is_exact() && rhs.is_exact(),
                        });
                    }
                }
            }
        }
    }

    if homogeneous && n >= 2 {
        let d = &discretes[0];
        let mu = k / rat_int(n as i64);
        for t in &t_grid {
            let s = (rat_int(n as i64) * &mu - t) / rat_int(n as i64 - 1);
            for &p in &p_grid {
                let lhs_plus = part_norm(d, t, p, true);
                let rhs_plus = part_norm(d, &s, p, false).scale(n - 1);
                let lhs_minus = part_norm(d, t, p, false);
                let rhs_minus = part_norm(d, &s, p, true).scale(n - 1);
                for (side, lhs, rhs) in [
                    ("plus", &lhs_plus, &rhs_plus),
                    ("minus", &lhs_minus, &rhs_minus),
                ] {
                    if lhs.exceeds(rhs, tol) {
                        violations.push(NormViolation {
                            marginal: None,
                            p,
                            split: Vec::new(),
                            t: Some(crate::numeric::ratjson::to_value(t)),
                            side,
                            lhs: lhs.to_f64(),
                            rhs: rhs.to_f64(),
                            exact: lhs.is_exact() && rhs.is_exact(),
                        });
                    }
                }
            }
        }
    }

    Ok(NormCheckReport {
        violations,
        p_grid,
        splits: splits
            .iter()
            .map(|s| s.iter().map(crate::numeric::ratjson::to_value).collect())
            .collect(),
        t_grid: t_grid.iter().map(crate::numeric::ratjson::to_value).collect(),
        homogeneous,
    })
}

/// Extended value for the support screen: finite or plus-infinity.
enum Ext {
    Fin(Rational),
    PosInf,
}

impl Ext {
    fn exceeds(&self, other: &Ext) -> bool {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => a > b,
            (Ext::PosInf, Ext::Fin(_)) => true,
            _ => false,
        }
    }
}

/// Support/mean screen: the infinity-norm inequality evaluated from spec
/// parameters alone. For each i it requires
/// b_i - mu_i <= sum_{j != i} (mu_j - a_j) and the mirror; a violation
/// refutes joint mixability. Handles unbounded supports in extended
/// arithmetic, so a tuple bounded on one side only is always refuted.
fn support_mean_screen(specs: &[DistributionSpec]) -> Result<Option<usize>, Error> {
    let n = specs.len();
    let mut upper = Vec::with_capacity(n); // b_i - mu_i
    let mut lower = Vec::with_capacity(n); // mu_i - a_i
    for spec in specs {
        let mu = spec.mean()?;
        let sup = spec.essential_support();
        upper.push(match &sup.hi {
            Some(b) => Ext::Fin(b - &mu),
            None => Ext::PosInf,
        });
        lower.push(match &sup.lo {
            Some(a) => Ext::Fin(&mu - a),
            None => Ext::PosInf,
        });
    }
    let sum_except = |vals: &[Ext], skip: usize| -> Ext {
        let mut acc = Rational::zero();
        for (j, v) in vals.iter().enumerate() {
            if j == skip {
                continue;
            }
            match v {
                Ext::Fin(x) => acc += x,
                Ext::PosInf => return Ext::PosInf,
            }
        }
        Ext::Fin(acc)
    };
    for i in 0..n {
        if upper[i].exceeds(&sum_except(&lower, i)) || lower[i].exceeds(&sum_except(&upper, i)) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Decides mixability of the given marginals: one spec plus `n` asks about
/// n-fold complete mixability; a list of specs asks about joint mixability.
/// The first decisive answer wins, in a fixed order: exact discrete path,
/// then the iff conditions, then sufficient conditions, then necessary
/// screens. Budget overruns downgrade gracefully to later stages.
pub fn decide(
    specs: &[DistributionSpec],
    n: Option<usize>,
    budget: &Budget,
    tol: Tolerance,
) -> Result<Verdict, Error> {
    decide_with_norms(specs, n, budget, tol, &NormCheckParams::default())
}

/// [`decide`] with custom norm-check grids for the necessary screens.
pub fn decide_with_norms(
    specs: &[DistributionSpec],
    n: Option<usize>,
    budget: &Budget,
    tol: Tolerance,
    norms: &NormCheckParams,
) -> Result<Verdict, Error> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    let marginals: Vec<DistributionSpec> = match (specs.len(), n) {
        (1, Some(copies)) => {
            if copies == 0 {
                return Err(Error::BadParameter("n must be at least 1".into()));
            }
            vec![specs[0].clone(); copies]
        }
        (_, None) => specs.to_vec(),
        (len, Some(copies)) if copies == len => specs.to_vec(),
        (len, Some(copies)) => {
            return Err(Error::BadParameter(format!(
                "got {len} specs but n={copies}; pass one spec with --n, or n specs"
            )))
        }
    };
    let n = marginals.len();
    let homogeneous = marginals.windows(2).all(|w| w[0] == w[1]);
    let mut diagnostics: Vec<String> = Vec::new();

    // exact discrete path
    if marginals.iter().all(|s| matches!(s, DistributionSpec::Discrete(_))) {
        let discretes: Vec<DiscreteDistribution> = marginals
            .iter()
            .map(|s| match s {
                DistributionSpec::Discrete(d) => d.clone(),
                _ => unreachable!(),
            })
            .collect();
        match lpcert::jm_lp_decide(&discretes, None, budget) {
            Ok(v) => return Ok(v),
            Err(e) if e.is_budget() => {
                diagnostics.push(format!("exact path skipped: {e}"));
                // necessary norm screen still applies to the discrete data
                let k: Rational = discretes.iter().map(|d| d.mean()).sum();
                let report = norm_check(&discretes, &k, norms, tol)?;
                if !report.passed() {
                    let v = &report.violations[0];
                    return Ok(Verdict::not_mixable("norm_check_violation").with_diagnostic(
                        format!(
                            "p={} side={} lhs={} rhs={}",
                            v.p, v.side, v.lhs, v.rhs
                        ),
                    ));
                }
                diagnostics.push("norm screen passed".into());
            }
            Err(e) => return Err(e),
        }
    }

    // iff conditions
    if homogeneous && monotone_params(&marginals[0]).is_some() {
        return cm_monotone_density(&marginals[0], n).map(|v| attach_diags(v, &diagnostics));
    }
    if marginals.iter().all(|s| monotone_params(s).is_some()) {
        match jm_monotone_densities(&marginals) {
            Ok(v) => return Ok(attach_diags(v, &diagnostics)),
            Err(Error::MixedDirections) => {
                diagnostics.push("monotone densities with mixed directions: joint criterion inapplicable".into());
            }
            Err(e) => return Err(e),
        }
    }
    if marginals.iter().all(|s| {
        matches!(
            s,
            DistributionSpec::Normal { .. } | DistributionSpec::Elliptical { .. }
        )
    }) {
        match jm_elliptical(&marginals) {
            Ok(mut v) => {
                if v.status == Status::Mixable {
                    if let Some(cert) = gaussian_certificate(&marginals) {
                        v = v.with_certificate(cert);
                    }
                }
                return Ok(attach_diags(v, &diagnostics));
            }
            Err(Error::GeneratorMismatch(a, b)) => {
                diagnostics.push(format!("elliptical generators differ ({a} vs {b}); criterion inapplicable"));
            }
            Err(e) => return Err(e),
        }
    }

    // sufficient conditions
    if homogeneous && n >= 2 && marginals[0].is_symmetric_unimodal() {
        return Ok(attach_diags(Verdict::mixable("symmetric_unimodal"), &diagnostics));
    }
    if homogeneous {
        if let DistributionSpec::ConcaveDensity { .. } = &marginals[0] {
            let v = cm_concave_density(&marginals[0], n)?;
            if v.status == Status::Mixable {
                return Ok(attach_diags(v, &diagnostics));
            }
            diagnostics.push("concave condition needs n >= 3".into());
        }
        if let DistributionSpec::BoundedBelowDensity { .. } = &marginals[0] {
            let v = cm_density_floor(&marginals[0], n)?;
            if v.status == Status::Mixable {
                return Ok(attach_diags(v, &diagnostics));
            }
            diagnostics.push("density floor below 3/(n(b-a))".into());
        }
    }

    // necessary screens
    match support_mean_screen(&marginals) {
        Ok(Some(i)) => {
            let reason = if homogeneous && marginals[0].essential_support().is_bounded() {
                "mean_condition_violated"
            } else {
                "inf_norm_support_screen"
            };
            return Ok(Verdict::not_mixable(reason)
                .with_diagnostic(format!("support/mean inequality fails at marginal {i}")));
        }
        Ok(None) => {}
        Err(e) => diagnostics.push(format!("support screen skipped: {e}")),
    }

    let mut v = Verdict::unknown("no_condition_applies");
    for d in diagnostics {
        v = v.with_diagnostic(d);
    }
    Ok(v)
}

fn attach_diags(mut v: Verdict, diags: &[String]) -> Verdict {
    for d in diags {
        v = v.with_diagnostic(d.clone());
    }
    v
}

fn gaussian_certificate(specs: &[DistributionSpec]) -> Option<Certificate> {
    let mut mus = Vec::with_capacity(specs.len());
    let mut sigmas = Vec::with_capacity(specs.len());
    for s in specs {
        match s {
            DistributionSpec::Normal { mu, sigma } => {
                mus.push(rat_to_f64(mu));
                sigmas.push(rat_to_f64(sigma));
            }
            DistributionSpec::Elliptical { mu, sigma, generator } if generator == "normal" => {
                mus.push(rat_to_f64(mu));
                sigmas.push(rat_to_f64(sigma));
            }
            _ => return None,
        }
    }
    if sigmas.iter().all(|&s| s == 0.0) {
        return None;
    }
    match crate::construct::gaussian_joint_mix(&mus, &sigmas) {
        Ok(crate::construct::GaussianOutcome::Certificate(cert)) => {
            Some(Certificate::Gaussian(cert))
        }
        _ => None,
    }
}
