//! Marginal distribution specs: discrete tables, parametric families, and
//! quantile tables, with exact-rational quantiles wherever the family allows.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numeric::{rat_from_f64, rat_int, rat_to_f64, Rational};

/// A finitely supported distribution: strictly increasing support points
/// with positive weights summing to one. Stored exactly; values that enter
/// as floats are converted to their dyadic rational value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscreteDistribution {
    #[serde(with = "crate::numeric::ratjson::vec")]
    points: Vec<Rational>,
    #[serde(with = "crate::numeric::ratjson::vec")]
    weights: Vec<Rational>,
}

// Deserialization enforces the schema rule that weights sum exactly to one
// (the constructor renormalizes, which would mask file errors).
impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Raw {
            #[serde(with = "crate::numeric::ratjson::vec")]
            points: Vec<Rational>,
            #[serde(with = "crate::numeric::ratjson::vec")]
            weights: Vec<Rational>,
        }
        let raw = Raw::deserialize(d)?;
        let total: Rational = raw.weights.iter().cloned().sum();
        if !total.is_one() {
            return Err(D::Error::custom(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        DiscreteDistribution::new(raw.points, raw.weights).map_err(D::Error::custom)
    }
}

impl DiscreteDistribution {
    /// Builds a discrete distribution: sorts points, merges duplicates
    /// (adding weights), and normalizes the total mass to one.
    pub fn new(points: Vec<Rational>, weights: Vec<Rational>) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::EmptyInput("points"));
        }
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: weights.len(),
            });
        }
        for w in &weights {
            if !w.is_positive() {
                return Err(Error::NonPositiveWeight(w.to_string()));
            }
        }
        let mut pairs: Vec<(Rational, Rational)> = points.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            match merged.last_mut() {
                Some((lp, lw)) if *lp == p => *lw += w,
                _ => merged.push((p, w)),
            }
        }
        let total: Rational = merged.iter().map(|(_, w)| w.clone()).sum();
        let (points, weights) = merged
            .into_iter()
            .map(|(p, w)| (p, w / &total))
            .unzip();
        Ok(DiscreteDistribution { points, weights })
    }

    pub fn from_f64(points: &[f64], weights: &[f64]) -> Result<Self, Error> {
        let ps = points.iter().map(|&x| rat_from_f64(x)).collect::<Result<_, _>>()?;
        let ws = weights.iter().map(|&w| rat_from_f64(w)).collect::<Result<_, _>>()?;
        Self::new(ps, ws)
    }

    /// Point mass at `c`.
    pub fn point_mass(c: Rational) -> Self {
        DiscreteDistribution {
            points: vec![c],
            weights: vec![Rational::one()],
        }
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least one point
    }

    pub fn is_point_mass(&self) -> bool {
        self.points.len() == 1
    }

    pub fn mean(&self) -> Rational {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| p * w)
            .sum()
    }

    pub fn min(&self) -> &Rational {
        self.points.first().expect("nonempty")
    }

    pub fn max(&self) -> &Rational {
        self.points.last().expect("nonempty")
    }

    /// Left-continuous inverse cdf: the smallest support point whose
    /// cumulative weight reaches `q`.
    pub fn quantile(&self, q: &Rational) -> Result<Rational, Error> {
        check_probability(q)?;
        let mut cum = Rational::zero();
        for (p, w) in self.points.iter().zip(&self.weights) {
            cum += w;
            if cum >= *q {
                return Ok(p.clone());
            }
        }
        // cum sums to exactly 1 >= q, so we only get here through rounding
        // in callers that bypassed check_probability; return the maximum.
        Ok(self.max().clone())
    }

    pub fn points_f64(&self) -> Vec<f64> {
        self.points.iter().map(rat_to_f64).collect()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(rat_to_f64).collect()
    }

    /// True when all weights are equal (each 1/m).
    pub fn has_equal_weights(&self) -> bool {
        let m = rat_int(self.len() as i64);
        self.weights.iter().all(|w| w * &m == Rational::one())
    }

    /// Least common denominator of the weights.
    pub fn weight_denominator(&self) -> num_bigint::BigInt {
        let mut lcm = num_bigint::BigInt::one();
        for w in &self.weights {
            lcm = num_integer::lcm(lcm, w.denom().clone());
        }
        lcm
    }

    /// Expands to a list of points each carrying weight 1/M, where M is the
    /// least common denominator of the weights. Fails if M exceeds `budget`.
    pub fn equal_weight_points(&self, budget: u64) -> Result<Vec<Rational>, Error> {
        let lcm = self.weight_denominator();
        let m = lcm
            .to_u64()
            .filter(|&m| m <= budget)
            .ok_or(Error::BudgetExceeded {
                what: "weight expansion",
                needed: lcm.to_u128().unwrap_or(u128::MAX),
                budget: budget as u128,
            })?;
        self.replicate_to(m)
    }

    /// Expands to exactly `m` points, each with weight 1/m; every weight
    /// times m must be an integer.
    pub fn replicate_to(&self, m: u64) -> Result<Vec<Rational>, Error> {
        let m_rat = rat_int(m as i64);
        let mut out = Vec::with_capacity(m as usize);
        for (p, w) in self.points.iter().zip(&self.weights) {
            let scaled = w * &m_rat;
            if !scaled.is_integer() {
                return Err(Error::BadParameter(format!(
                    "weight {w} does not expand to denominator {m}"
                )));
            }
            let count = scaled
                .to_integer()
                .to_u64()
                .ok_or(Error::BadParameter(format!("weight {w} overflows expansion")))?;
            for _ in 0..count {
                out.push(p.clone());
            }
        }
        debug_assert_eq!(out.len() as u64, m);
        Ok(out)
    }

    /// Conditional law of F^{-1}(W) for W uniform on (p,1]: the upper tail
    /// beyond level `p`, with boundary mass split exactly.
    pub fn tail_conditional(&self, p: &Rational) -> Result<Self, Error> {
        self.window_conditional(p, &Rational::one())
    }

    /// Conditional law of F^{-1}(W) for W uniform on (0,p].
    pub fn lower_conditional(&self, p: &Rational) -> Result<Self, Error> {
        self.window_conditional(&Rational::zero(), p)
    }

    fn window_conditional(&self, lo: &Rational, hi: &Rational) -> Result<Self, Error> {
        if lo >= hi || lo < &Rational::zero() || hi > &Rational::one() {
            return Err(Error::BadProbability(format!("window ({lo},{hi}]")));
        }
        let width = hi - lo;
        let mut cum = Rational::zero();
        let mut pts = Vec::new();
        let mut ws = Vec::new();
        for (p, w) in self.points.iter().zip(&self.weights) {
            let prev = cum.clone();
            cum += w;
            // overlap of (prev, cum] with (lo, hi]
            let a = if &prev > lo { prev } else { lo.clone() };
            let b = if &cum < hi { cum.clone() } else { hi.clone() };
            if b > a {
                pts.push(p.clone());
                ws.push((b - a) / &width);
            }
        }
        DiscreteDistribution::new(pts, ws)
    }
}

/// Closed support interval; `None` bounds are infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportInterval {
    #[serde(with = "crate::numeric::ratjson::opt")]
    pub lo: Option<Rational>,
    #[serde(with = "crate::numeric::ratjson::opt")]
    pub hi: Option<Rational>,
}

impl SupportInterval {
    pub fn bounded(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        SupportInterval {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn width(&self) -> Option<Rational> {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Tagged description of a marginal law. Analytic families carry only the
/// parameters the mixability criteria consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistributionSpec {
    Discrete(DiscreteDistribution),
    Uniform {
        #[serde(with = "crate::numeric::ratjson")]
        a: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        b: Rational,
    },
    #[serde(rename = "monotone")]
    MonotoneDensity {
        #[serde(with = "crate::numeric::ratjson")]
        a: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        b: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        mean: Rational,
        direction: Direction,
    },
    #[serde(rename = "concave")]
    ConcaveDensity {
        #[serde(with = "crate::numeric::ratjson")]
        a: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        b: Rational,
        #[serde(default)]
        symmetric_unimodal: bool,
    },
    #[serde(rename = "floor")]
    BoundedBelowDensity {
        #[serde(with = "crate::numeric::ratjson")]
        a: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        b: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        density_floor: Rational,
        #[serde(default)]
        symmetric_unimodal: bool,
    },
    Elliptical {
        #[serde(with = "crate::numeric::ratjson")]
        mu: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        sigma: Rational,
        generator: String,
    },
    Normal {
        #[serde(with = "crate::numeric::ratjson")]
        mu: Rational,
        #[serde(with = "crate::numeric::ratjson")]
        sigma: Rational,
    },
    QuantileTable {
        #[serde(with = "crate::numeric::ratjson::vec")]
        q: Vec<Rational>,
        #[serde(with = "crate::numeric::ratjson::vec")]
        x: Vec<Rational>,
        #[serde(default)]
        symmetric_unimodal: bool,
    },
}

fn check_probability(q: &Rational) -> Result<(), Error> {
    if q <= &Rational::zero() || q > &Rational::one() {
        return Err(Error::BadProbability(q.to_string()));
    }
    Ok(())
}

impl DistributionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DistributionSpec::Discrete(_) => "discrete",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::MonotoneDensity { .. } => "monotone",
            DistributionSpec::ConcaveDensity { .. } => "concave",
            DistributionSpec::BoundedBelowDensity { .. } => "floor",
            DistributionSpec::Elliptical { .. } => "elliptical",
            DistributionSpec::Normal { .. } => "normal",
            DistributionSpec::QuantileTable { .. } => "quantile_table",
        }
    }

    /// True when quantiles of this spec are exact rationals.
    pub fn is_exact(&self) -> bool {
        !matches!(
            self,
            DistributionSpec::Normal { .. } | DistributionSpec::Elliptical { .. }
        )
    }

    pub fn has_computable_quantile(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Discrete(_)
                | DistributionSpec::Uniform { .. }
                | DistributionSpec::QuantileTable { .. }
                | DistributionSpec::Normal { .. }
        )
    }

    /// Left-continuous inverse distribution function at level `q` in (0,1].
    pub fn quantile(&self, q: &Rational) -> Result<Rational, Error> {
        check_probability(q)?;
        match self {
            DistributionSpec::Discrete(d) => d.quantile(q),
            DistributionSpec::Uniform { a, b } => Ok(a + q * (b - a)),
            DistributionSpec::Normal { mu, sigma } => {
                if sigma.is_zero() {
                    return Ok(mu.clone());
                }
                if q.is_one() {
                    return Err(Error::NoQuantile {
                        spec: "normal",
                        detail: ": q=1 is unbounded".into(),
                    });
                }
                let z = normal::inv_cdf(rat_to_f64(q));
                rat_from_f64(rat_to_f64(mu) + rat_to_f64(sigma) * z)
            }
            DistributionSpec::QuantileTable { q: qs, x: xs, .. } => {
                Ok(interp_table(qs, xs, q))
            }
            other => Err(Error::NoQuantile {
                spec: other.kind(),
                detail: ": supply a quantile_table to evaluate quantiles".into(),
            }),
        }
    }

    pub fn mean(&self) -> Result<Rational, Error> {
        match self {
            DistributionSpec::Discrete(d) => Ok(d.mean()),
            DistributionSpec::Uniform { a, b } => Ok((a + b) / rat_int(2)),
            DistributionSpec::MonotoneDensity { mean, .. } => Ok(mean.clone()),
            DistributionSpec::Normal { mu, .. } => Ok(mu.clone()),
            DistributionSpec::Elliptical { mu, .. } => Ok(mu.clone()),
            DistributionSpec::QuantileTable { q: qs, x: xs, .. } => {
                // Trapezoid on the table, constant extension to the ends.
                let mut total = &xs[0] * &qs[0];
                for i in 0..qs.len() - 1 {
                    total += (&qs[i + 1] - &qs[i]) * (&xs[i] + &xs[i + 1]) / rat_int(2);
                }
                total += xs.last().expect("nonempty") * (Rational::one() - qs.last().expect("nonempty"));
                Ok(total)
            }
            other => Err(Error::NoMean { spec: other.kind() }),
        }
    }

    pub fn essential_support(&self) -> SupportInterval {
        match self {
            DistributionSpec::Discrete(d) => {
                SupportInterval::bounded(d.min().clone(), d.max().clone())
            }
            DistributionSpec::Uniform { a, b }
            | DistributionSpec::ConcaveDensity { a, b, .. }
            | DistributionSpec::BoundedBelowDensity { a, b, .. }
            | DistributionSpec::MonotoneDensity { a, b, .. } => {
                SupportInterval::bounded(a.clone(), b.clone())
            }
            DistributionSpec::Normal { mu, sigma }
            | DistributionSpec::Elliptical { mu, sigma, .. } => {
                if sigma.is_zero() {
                    SupportInterval::bounded(mu.clone(), mu.clone())
                } else {
                    SupportInterval { lo: None, hi: None }
                }
            }
            DistributionSpec::QuantileTable { x: xs, .. } => SupportInterval::bounded(
                xs.first().expect("nonempty").clone(),
                xs.last().expect("nonempty").clone(),
            ),
        }
    }

    /// Discretizes on the window `(lo, hi]` of probability levels using the
    /// midpoint rule: N equally weighted points at q_k = lo + (hi-lo)(2k-1)/(2N).
    pub fn discretize(
        &self,
        n: usize,
        window: (&Rational, &Rational),
    ) -> Result<DiscreteDistribution, Error> {
        let (lo, hi) = window;
        if n == 0 {
            return Err(Error::BadParameter("discretization needs N >= 1".into()));
        }
        if lo < &Rational::zero() || hi > &Rational::one() || lo >= hi {
            return Err(Error::BadProbability(format!("window ({lo},{hi}]")));
        }
        let width = hi - lo;
        let two_n = rat_int(2 * n as i64);
        let mut pts = Vec::with_capacity(n);
        for k in 1..=n {
            let q = lo + &width * rat_int(2 * k as i64 - 1) / &two_n;
            pts.push(self.quantile(&q)?);
        }
        let w = Rational::one() / rat_int(n as i64);
        DiscreteDistribution::new(pts, vec![w; n])
    }

    pub fn is_symmetric_unimodal(&self) -> bool {
        match self {
            DistributionSpec::Uniform { .. } | DistributionSpec::Normal { .. } => true,
            DistributionSpec::Elliptical { .. } => true,
            DistributionSpec::ConcaveDensity {
                symmetric_unimodal, ..
            }
            | DistributionSpec::BoundedBelowDensity {
                symmetric_unimodal, ..
            }
            | DistributionSpec::QuantileTable {
                symmetric_unimodal, ..
            } => *symmetric_unimodal,
            _ => false,
        }
    }

    /// Conditional law of F^{-1}(W), W ~ U(p,1], where the family is closed
    /// under upper-tail conditioning. Families whose tails leave the spec
    /// language (normal, elliptical, density-only specs) return an error and
    /// are handled by the support screens instead.
    pub fn tail_spec(&self, p: &Rational) -> Result<DistributionSpec, Error> {
        if p < &Rational::zero() || p >= &Rational::one() {
            return Err(Error::BadProbability(p.to_string()));
        }
        match self {
            DistributionSpec::Uniform { a, b } => Ok(DistributionSpec::Uniform {
                a: a + p * (b - a),
                b: b.clone(),
            }),
            DistributionSpec::Discrete(d) => Ok(DistributionSpec::Discrete(d.tail_conditional(p)?)),
            DistributionSpec::QuantileTable { q: qs, x: xs, .. } => {
                let (q, x) = remap_table(qs, xs, p, &Rational::one());
                Ok(DistributionSpec::QuantileTable {
                    q,
                    x,
                    symmetric_unimodal: false,
                })
            }
            other => Err(Error::NoQuantile {
                spec: other.kind(),
                detail: ": tail law not representable".into(),
            }),
        }
    }

    /// Validates the spec parameters: interval orientation, scale signs,
    /// grid monotonicity, and a density-floor that still integrates to one.
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            DistributionSpec::Discrete(_) => Ok(()), // constructor-enforced
            DistributionSpec::Uniform { a, b } | DistributionSpec::ConcaveDensity { a, b, .. } => {
                if a >= b {
                    return Err(Error::BadInterval {
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
                Ok(())
            }
            DistributionSpec::MonotoneDensity { a, b, mean, .. } => {
                if a >= b {
                    return Err(Error::BadInterval {
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
                if mean <= a || mean >= b {
                    return Err(Error::BadParameter(format!(
                        "mean {mean} must lie inside ({a},{b})"
                    )));
                }
                Ok(())
            }
            DistributionSpec::BoundedBelowDensity {
                a,
                b,
                density_floor,
                ..
            } => {
                if a >= b {
                    return Err(Error::BadInterval {
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
                if density_floor.is_negative() {
                    return Err(Error::BadParameter(format!(
                        "density_floor {density_floor} must be >= 0"
                    )));
                }
                if density_floor * (b - a) > Rational::one() {
                    return Err(Error::BadParameter(
                        "density_floor too large: no density integrates to 1".into(),
                    ));
                }
                Ok(())
            }
            DistributionSpec::Normal { sigma, .. } => {
                if sigma.is_negative() {
                    return Err(Error::BadParameter(format!("sigma {sigma} must be >= 0")));
                }
                Ok(())
            }
            DistributionSpec::Elliptical { sigma, generator, .. } => {
                if sigma.is_negative() {
                    return Err(Error::BadParameter(format!("sigma {sigma} must be >= 0")));
                }
                if generator.is_empty() {
                    return Err(Error::BadParameter("generator tag must be nonempty".into()));
                }
                Ok(())
            }
            DistributionSpec::QuantileTable { q, x, .. } => {
                if q.is_empty() || q.len() != x.len() {
                    return Err(Error::LengthMismatch {
                        left: q.len(),
                        right: x.len(),
                    });
                }
                for w in q.windows(2) {
                    if w[0] >= w[1] {
                        return Err(Error::BadParameter(
                            "q grid must be strictly increasing".into(),
                        ));
                    }
                }
                if q[0] < Rational::zero() || q.last().expect("nonempty") > &Rational::one() {
                    return Err(Error::BadParameter("q grid must lie in [0,1]".into()));
                }
                for w in x.windows(2) {
                    if w[0] > w[1] {
                        return Err(Error::BadParameter(
                            "x values must be nondecreasing in q".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Conditional law of F^{-1}(W), W ~ U(0,p]; mirror of
    /// [`DistributionSpec::tail_spec`].
    pub fn lower_spec(&self, p: &Rational) -> Result<DistributionSpec, Error> {
        if p <= &Rational::zero() || p > &Rational::one() {
            return Err(Error::BadProbability(p.to_string()));
        }
        match self {
            DistributionSpec::Uniform { a, b } => Ok(DistributionSpec::Uniform {
                a: a.clone(),
                b: a + p * (b - a),
            }),
            DistributionSpec::Discrete(d) => Ok(DistributionSpec::Discrete(d.lower_conditional(p)?)),
            DistributionSpec::QuantileTable { q: qs, x: xs, .. } => {
                let (q, x) = remap_table(qs, xs, &Rational::zero(), p);
                Ok(DistributionSpec::QuantileTable {
                    q,
                    x,
                    symmetric_unimodal: false,
                })
            }
            other => Err(Error::NoQuantile {
                spec: other.kind(),
                detail: ": tail law not representable".into(),
            }),
        }
    }
}

/// Piecewise-linear interpolation of a quantile table, constant beyond the
/// grid ends.
fn interp_table(qs: &[Rational], xs: &[Rational], q: &Rational) -> Rational {
    if q <= &qs[0] {
        return xs[0].clone();
    }
    if q >= qs.last().expect("nonempty") {
        return xs.last().expect("nonempty").clone();
    }
    let idx = qs.partition_point(|g| g < q);
    // qs[idx-1] < q <= qs[idx]
    let (q0, q1) = (&qs[idx - 1], &qs[idx]);
    let (x0, x1) = (&xs[idx - 1], &xs[idx]);
    x0 + (q - q0) / (q1 - q0) * (x1 - x0)
}

/// Restricts a quantile table to the window `(lo, hi]` and rescales levels
/// back to (0,1].
fn remap_table(
    qs: &[Rational],
    xs: &[Rational],
    lo: &Rational,
    hi: &Rational,
) -> (Vec<Rational>, Vec<Rational>) {
    let width = hi - lo;
    let mut q_out = vec![Rational::zero()];
    let mut x_out = vec![interp_table(qs, xs, &if lo.is_zero() {
        qs[0].clone()
    } else {
        lo.clone()
    })];
    for (q, x) in qs.iter().zip(xs) {
        if q > lo && q < hi {
            q_out.push((q - lo) / &width);
            x_out.push(x.clone());
        }
    }
    q_out.push(Rational::one());
    x_out.push(interp_table(qs, xs, hi));
    (q_out, x_out)
}

/// Standard normal pdf and inverse cdf.
pub mod normal {
    /// Density of N(0,1).
    pub fn pdf(z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    /// Inverse cdf of N(0,1) via Acklam's rational approximation
    /// (relative error below 1.2e-9 over (0,1)).
    #[allow(clippy::excessive_precision)] // published coefficients verbatim
    pub fn inv_cdf(p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "p in (0,1)");
        const A: [f64; 6] = [
            -3.969683028665376e+01,
            2.209460984245205e+02,
            -2.759285104469687e+02,
            1.383577518672690e+02,
            -3.066479806614716e+01,
            2.506628277459239e+00,
        ];
        const B: [f64; 5] = [
            -5.447609879822406e+01,
            1.615858368580409e+02,
            -1.556989798598866e+02,
            6.680131188771972e+01,
            -1.328068155288572e+01,
        ];
        const C: [f64; 6] = [
            -7.784894002430293e-03,
            -3.223964580411365e-01,
            -2.400758277161838e+00,
            -2.549732539343734e+00,
            4.374664141464968e+00,
            2.938163982698783e+00,
        ];
        const D: [f64; 4] = [
            7.784695709041462e-03,
            3.224671290700398e-01,
            2.445134137142996e+00,
            3.754408661907416e+00,
        ];
        const P_LOW: f64 = 0.02425;

        if p < P_LOW {
            let q = (-2.0 * p.ln()).sqrt();
            (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
        } else if p <= 1.0 - P_LOW {
            let q = p - 0.5;
            let r = q * q;
            (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
                / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
        } else {
            let q = (-2.0 * (1.0 - p).ln()).sqrt();
            -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use proptest::prelude::*;

    fn uniform01() -> DistributionSpec {
        DistributionSpec::Uniform {
            a: rat_int(0),
            b: rat_int(1),
        }
    }

    fn coin() -> DiscreteDistribution {
        DiscreteDistribution::new(vec![rat_int(0), rat_int(1)], vec![rat(1, 2), rat(1, 2)]).unwrap()
    }

    #[test]
    fn make_discrete_sorts() {
        let d =
            DiscreteDistribution::new(vec![rat_int(1), rat_int(0)], vec![rat(1, 2), rat(1, 2)])
                .unwrap();
        assert_eq!(d.points(), &[rat_int(0), rat_int(1)]);
        assert_eq!(d.weights(), &[rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn make_discrete_merges_duplicates() {
        let d = DiscreteDistribution::new(
            vec![rat_int(0), rat_int(0), rat_int(1)],
            vec![rat(1, 4), rat(1, 4), rat(1, 2)],
        )
        .unwrap();
        assert_eq!(d.points(), &[rat_int(0), rat_int(1)]);
        assert_eq!(d.weights(), &[rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn make_discrete_renormalizes() {
        let d = DiscreteDistribution::new(vec![rat_int(0)], vec![rat(2, 5)]).unwrap();
        assert_eq!(d.weights(), &[rat_int(1)]);
    }

    #[test]
    fn make_discrete_rejects_bad_input() {
        assert!(DiscreteDistribution::new(vec![], vec![]).is_err());
        assert!(
            DiscreteDistribution::new(vec![rat_int(0)], vec![rat_int(0)]).is_err(),
            "zero weight"
        );
        assert!(DiscreteDistribution::from_f64(&[f64::NAN], &[1.0]).is_err());
        assert!(DiscreteDistribution::from_f64(&[f64::INFINITY], &[1.0]).is_err());
    }

    #[test]
    fn uniform_quantile_is_identity() {
        assert_eq!(uniform01().quantile(&rat(1, 4)).unwrap(), rat(1, 4));
    }

    #[test]
    fn discrete_quantile_left_continuous_at_jump() {
        // At q = 1/2 the left-continuous inverse returns the lower point.
        assert_eq!(coin().quantile(&rat(1, 2)).unwrap(), rat_int(0));
        assert_eq!(coin().quantile(&rat(501, 1000)).unwrap(), rat_int(1));
    }

    /// Independent oracle: standard normal cdf by composite Simpson
    /// quadrature of the density, inverted by bisection.
    fn normal_quantile_oracle(p: f64) -> f64 {
        fn cdf(z: f64) -> f64 {
            // integrate pdf over [0, z] with Simpson, 40_000 panels
            let n = 40_000;
            let h = z / n as f64;
            let mut s = normal::pdf(0.0) + normal::pdf(z);
            for i in 1..n {
                let x = i as f64 * h;
                s += normal::pdf(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            0.5 + s * h / 3.0
        }
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn normal_quantile_against_quadrature_oracle() {
        let spec = DistributionSpec::Normal {
            mu: rat_int(0),
            sigma: rat_int(1),
        };
        let got = rat_to_f64(&spec.quantile(&rat(975, 1000)).unwrap());
        let want = normal_quantile_oracle(0.975);
        assert!((want - 1.959964).abs() < 1e-5, "oracle sanity: {want}");
        assert!((got - want).abs() < 1e-5, "got {got}, oracle {want}");
        for p in [0.001, 0.1, 0.25, 0.5, 0.9, 0.999] {
            let got = normal::inv_cdf(p);
            let want = normal_quantile_oracle(p);
            assert!((got - want).abs() < 1e-6, "p={p}: got {got}, oracle {want}");
        }
    }

    #[test]
    fn means_are_exact() {
        assert_eq!(uniform01().mean().unwrap(), rat(1, 2));
        let d = DiscreteDistribution::new(
            vec![rat_int(0), rat_int(1), rat_int(2)],
            vec![rat(1, 4), rat(1, 2), rat(1, 4)],
        )
        .unwrap();
        assert_eq!(DistributionSpec::Discrete(d).mean().unwrap(), rat_int(1));
    }

    #[test]
    fn quantile_table_mean_matches_analytic() {
        // U[0,1] table on 101 equispaced levels
        let qs: Vec<Rational> = (0..=100).map(|k| rat(k, 100)).collect();
        let xs = qs.clone();
        let spec = DistributionSpec::QuantileTable {
            q: qs,
            x: xs,
            symmetric_unimodal: false,
        };
        let m = rat_to_f64(&spec.mean().unwrap());
        assert!((m - 0.5).abs() < 1e-3);
    }

    #[test]
    fn supports() {
        let u = DistributionSpec::Uniform {
            a: rat_int(2),
            b: rat_int(5),
        };
        let s = u.essential_support();
        assert_eq!(s.lo, Some(rat_int(2)));
        assert_eq!(s.hi, Some(rat_int(5)));
        assert!(s.is_bounded());

        let n = DistributionSpec::Normal {
            mu: rat_int(0),
            sigma: rat_int(1),
        };
        assert!(!n.essential_support().is_bounded());

        let d = DiscreteDistribution::new(vec![rat_int(0), rat_int(3)], vec![rat(1, 2), rat(1, 2)])
            .unwrap();
        let s = DistributionSpec::Discrete(d).essential_support();
        assert_eq!(s.width(), Some(rat_int(3)));
    }

    #[test]
    fn discretize_uniform_midpoints() {
        let d = uniform01()
            .discretize(4, (&Rational::zero(), &Rational::one()))
            .unwrap();
        assert_eq!(
            d.points(),
            &[rat(1, 8), rat(3, 8), rat(5, 8), rat(7, 8)]
        );
        assert!(d.weights().iter().all(|w| *w == rat(1, 4)));
    }

    #[test]
    fn discretize_point_mass_merges() {
        let pm = DistributionSpec::Discrete(DiscreteDistribution::point_mass(rat_int(7)));
        let d = pm
            .discretize(3, (&Rational::zero(), &Rational::one()))
            .unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.weights(), &[rat_int(1)]);
    }

    #[test]
    fn discretize_tail_window_mean() {
        let d = uniform01()
            .discretize(1000, (&rat(9, 10), &Rational::one()))
            .unwrap();
        // midpoint rule is exact for a linear quantile
        assert_eq!(d.mean(), rat(19, 20));
    }

    #[test]
    fn tail_specs() {
        let t = uniform01().tail_spec(&rat(1, 2)).unwrap();
        assert_eq!(
            t,
            DistributionSpec::Uniform {
                a: rat(1, 2),
                b: rat_int(1)
            }
        );
        let tails = coin().tail_conditional(&rat(1, 2)).unwrap();
        assert_eq!(tails.points(), &[rat_int(1)]);
        // boundary-splitting: condition coin on (1/4, 1]
        let t = coin().tail_conditional(&rat(1, 4)).unwrap();
        assert_eq!(t.weights(), &[rat(1, 3), rat(2, 3)]);
        // lower windows mirror
        let lo = coin().lower_conditional(&rat(1, 2)).unwrap();
        assert_eq!(lo.points(), &[rat_int(0)]);
        let lower = uniform01().lower_spec(&rat(3, 10)).unwrap();
        assert_eq!(
            lower,
            DistributionSpec::Uniform {
                a: rat_int(0),
                b: rat(3, 10)
            }
        );
    }

    #[test]
    fn quantile_rejects_bad_levels() {
        assert!(uniform01().quantile(&rat_int(0)).is_err());
        assert!(uniform01().quantile(&rat(3, 2)).is_err());
        let m = DistributionSpec::MonotoneDensity {
            a: rat_int(0),
            b: rat_int(1),
            mean: rat(1, 4),
            direction: Direction::Decreasing,
        };
        assert!(m.quantile(&rat(1, 2)).is_err());
        assert!(m.mean().is_ok());
    }

    #[test]
    fn equal_weight_expansion() {
        let binom = DiscreteDistribution::new(
            vec![rat_int(0), rat_int(1), rat_int(2)],
            vec![rat(1, 4), rat(1, 2), rat(1, 4)],
        )
        .unwrap();
        let pts = binom.equal_weight_points(100).unwrap();
        assert_eq!(pts, vec![rat_int(0), rat_int(1), rat_int(1), rat_int(2)]);
        assert!(binom.equal_weight_points(3).is_err());
    }

    #[test]
    fn quantile_grid_monotone_for_continuous_specs() {
        let specs = vec![
            uniform01(),
            DistributionSpec::Normal { mu: rat_int(1), sigma: rat(1, 2) },
            DistributionSpec::QuantileTable {
                q: vec![rat(1, 10), rat(1, 2), rat(9, 10)],
                x: vec![rat_int(-1), rat_int(0), rat_int(2)],
                symmetric_unimodal: false,
            },
        ];
        for spec in &specs {
            let mut last: Option<Rational> = None;
            // q = 1 is unbounded for the normal, so stop one step short there
            let top = if matches!(spec, DistributionSpec::Normal { .. }) { 999 } else { 1000 };
            for k in 1..=top {
                let v = spec.quantile(&rat(k, 1000)).unwrap();
                if let Some(prev) = &last {
                    assert!(&v >= prev, "{} quantile dipped at q={k}/1000", spec.kind());
                }
                last = Some(v);
            }
        }
    }

    proptest! {
        #[test]
        fn quantile_nondecreasing_and_left_continuous(
            points in proptest::collection::vec(-50i64..50, 1..6),
            weights in proptest::collection::vec(1i64..5, 6),
        ) {
            let pts: Vec<Rational> = points.iter().map(|&p| rat_int(p)).collect();
            let ws: Vec<Rational> = weights[..pts.len()].iter().map(|&w| rat_int(w)).collect();
            let d = DiscreteDistribution::new(pts, ws).unwrap();
            let mut last = d.quantile(&rat(1, 1000)).unwrap();
            for k in 2..=1000i64 {
                let q = rat(k, 1000);
                let v = d.quantile(&q).unwrap();
                prop_assert!(v >= last);
                last = v;
            }
            // left-continuity at every jump: the cumulative boundary itself
            // still maps to the lower point, and anything above it jumps
            let mut cum = Rational::zero();
            for (point, w) in d.points().iter().zip(d.weights()) {
                let prev = cum.clone();
                cum += w;
                prop_assert_eq!(&d.quantile(&cum).unwrap(), point);
                let inside = (&prev + &cum) / rat_int(2);
                if inside > Rational::zero() {
                    prop_assert_eq!(&d.quantile(&inside).unwrap(), point);
                }
            }
        }

        #[test]
        fn make_discrete_idempotent(points in proptest::collection::vec(-20i64..20, 1..8),
                                    weights in proptest::collection::vec(1i64..9, 8)) {
            let pts: Vec<Rational> = points.iter().map(|&p| rat_int(p)).collect();
            let ws: Vec<Rational> = weights[..pts.len()].iter().map(|&w| rat_int(w)).collect();
            let d = DiscreteDistribution::new(pts, ws).unwrap();
            let again = DiscreteDistribution::new(d.points().to_vec(), d.weights().to_vec()).unwrap();
            prop_assert_eq!(d, again);
        }

        #[test]
        fn discretize_mean_error_bound(a in -10i64..10, width in 1i64..20, n in 1usize..200) {
            let spec = DistributionSpec::Uniform { a: rat_int(a), b: rat_int(a + width) };
            let d = spec.discretize(n, (&Rational::zero(), &Rational::one())).unwrap();
            let err = (d.mean() - spec.mean().unwrap()).abs();
            let bound = rat_int(width) / rat_int(2 * n as i64);
            prop_assert!(err <= bound);
        }

        #[test]
        fn discretized_support_contained(n in 1usize..50) {
            let spec = DistributionSpec::Normal { mu: rat_int(0), sigma: rat_int(1) };
            let d = spec.discretize(n, (&Rational::zero(), &Rational::one())).unwrap();
            // normal support is all of R, so containment is trivial; check the
            // bounded case too
            let u = DistributionSpec::Uniform { a: rat_int(-1), b: rat_int(1) };
            let du = u.discretize(n, (&Rational::zero(), &Rational::one())).unwrap();
            prop_assert!(du.min() >= &rat_int(-1) && du.max() <= &rat_int(1));
            prop_assert!(!d.points().is_empty());
        }
    }
}
