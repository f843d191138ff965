//! Exact joint-mixability decisions for finite discrete marginals.
//!
//! Feasibility of the transport polytope restricted to the constant-sum
//! hyperplane is decided by a phase-1 simplex over arbitrary-precision
//! rationals. A feasible basis yields an explicit joint pmf; an infeasible
//! one yields separating functions extracted from the final multipliers.
//! Both certificate kinds re-validate by direct enumeration.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Budget, Error};
use crate::numeric::{rat_int, ratjson, Rational};
use crate::verdict::{Certificate, Verdict};

/// An explicit joint probability table supported on the hyperplane
/// x_1 + ... + x_n = K with the prescribed margins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointPmf {
    /// Support vectors (x_1, ..., x_n); each sums exactly to the center.
    pub support: Vec<Vec<serde_json::Value>>,
    /// Matching masses, nonnegative and summing to one.
    pub masses: Vec<serde_json::Value>,
    #[serde(with = "ratjson")]
    pub center: Rational,
}

impl JointPmf {
    fn from_parts(support: Vec<Vec<Rational>>, masses: Vec<Rational>, center: Rational) -> Self {
        JointPmf {
            support: support
                .iter()
                .map(|v| v.iter().map(ratjson::to_value).collect())
                .collect(),
            masses: masses.iter().map(ratjson::to_value).collect(),
            center,
        }
    }

    pub fn support_rational(&self) -> Result<Vec<Vec<Rational>>, Error> {
        self.support
            .iter()
            .map(|v| v.iter().map(ratjson::from_value).collect())
            .collect()
    }

    pub fn masses_rational(&self) -> Result<Vec<Rational>, Error> {
        self.masses.iter().map(ratjson::from_value).collect()
    }
}

/// Separating functions f_1, ..., f_n witnessing non-mixability: their sum
/// is at least 1 everywhere on the support-restricted hyperplane while the
/// sum of their integrals stays below 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualCertificate {
    /// One table per marginal: pairs (support point, f_i value).
    pub tables: Vec<Vec<DualEntry>>,
    #[serde(with = "ratjson")]
    pub center: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualEntry {
    #[serde(with = "ratjson")]
    pub x: Rational,
    #[serde(with = "ratjson")]
    pub f: Rational,
}

impl DualCertificate {
    fn value_at(&self, i: usize, x: &Rational) -> Option<&Rational> {
        self.tables[i]
            .iter()
            .find(|e| &e.x == x)
            .map(|e| &e.f)
    }
}

/// Enumerates index tuples into the supports whose point values sum to `k`.
/// Supports are sorted, so partial sums prune the search.
fn hyperplane_grid(
    supports: &[&[Rational]],
    k: &Rational,
    budget: u64,
) -> Result<Vec<Vec<usize>>, Error> {
    let n = supports.len();
    let mut min_rest = vec![Rational::zero(); n + 1];
    let mut max_rest = vec![Rational::zero(); n + 1];
    for i in (0..n).rev() {
        min_rest[i] = &min_rest[i + 1] + supports[i].first().expect("nonempty");
        max_rest[i] = &max_rest[i + 1] + supports[i].last().expect("nonempty");
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut idx = vec![0usize; n];

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        supports: &[&[Rational]],
        k: &Rational,
        budget: u64,
        min_rest: &[Rational],
        max_rest: &[Rational],
        depth: usize,
        partial: Rational,
        idx: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<(), Error> {
        if depth == supports.len() {
            if partial == *k {
                if out.len() as u64 >= budget {
                    return Err(Error::BudgetExceeded {
                        what: "hyperplane grid",
                        needed: out.len() as u128 + 1,
                        budget: budget as u128,
                    });
                }
                out.push(idx.clone());
            }
            return Ok(());
        }
        for (j, x) in supports[depth].iter().enumerate() {
            let next = &partial + x;
            // remaining coordinates can still reach k?
            let lo = &next + &min_rest[depth + 1];
            let hi = &next + &max_rest[depth + 1];
            if &lo > k {
                break; // support sorted ascending: later points only larger
            }
            if &hi < k {
                continue;
            }
            idx[depth] = j;
            dfs(
                supports, k, budget, min_rest, max_rest, depth + 1, next, idx, out,
            )?;
        }
        Ok(())
    }

    dfs(
        supports,
        k,
        budget,
        &min_rest,
        &max_rest,
        0,
        Rational::zero(),
        &mut idx,
        &mut out,
    )?;
    Ok(out)
}

/// Phase-1 simplex over exact rationals with Bland's rule. Returns either a
/// feasible basic solution or the final simplex multipliers (Farkas
/// certificate of infeasibility).
enum Phase1 {
    Feasible(Vec<Rational>),
    Infeasible { multipliers: Vec<Rational> },
}

#[allow(clippy::needless_range_loop)] // index juggling mirrors the tableau layout
fn phase1_simplex(a: &[Vec<Rational>], b: &[Rational]) -> Phase1 {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let width = cols + rows + 1; // original + artificial + rhs
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(rows + 1);
    for (r, row) in a.iter().enumerate() {
        let mut tr = Vec::with_capacity(width);
        tr.extend(row.iter().cloned());
        for j in 0..rows {
            tr.push(if j == r { Rational::one() } else { Rational::zero() });
        }
        tr.push(b[r].clone());
        t.push(tr);
    }
    // reduced-cost row: c - sum of constraint rows (artificials are basic)
    let mut cost = vec![Rational::zero(); width];
    for j in 0..rows {
        cost[cols + j] = Rational::one();
    }
    for r in 0..rows {
        for j in 0..width {
            let v = &cost[j] - &t[r][j];
            cost[j] = v;
        }
    }
    t.push(cost);

    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    loop {
        // Bland: entering = smallest column with negative reduced cost
        let entering = (0..cols + rows).find(|&j| t[rows][j] < Rational::zero());
        let Some(e) = entering else { break };
        // ratio test, ties to smallest row index (Bland)
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..rows {
            if t[r][e] > Rational::zero() {
                let ratio = &t[r][width - 1] / &t[r][e];
                match &leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, best)) => {
                        if ratio < *best || (ratio == *best && basis[r] < basis[*lr]) {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((lr, _)) = leave else {
            // phase-1 objective is bounded below by 0, so this cannot happen
            unreachable!("phase-1 objective unbounded");
        };
        // pivot on (lr, e)
        let piv = t[lr][e].clone();
        for v in t[lr].iter_mut() {
            *v /= &piv;
        }
        for r in 0..=rows {
            if r == lr {
                continue;
            }
            if t[r][e].is_zero() {
                continue;
            }
            let factor = t[r][e].clone();
            for j in 0..width {
                let delta = &factor * &t[lr][j];
                t[r][j] -= delta;
            }
        }
        basis[lr] = e;
    }

    let objective = -t[rows][width - 1].clone();
    if objective.is_zero() {
        let mut x = vec![Rational::zero(); cols];
        for (r, &bv) in basis.iter().enumerate() {
            if bv < cols {
                x[bv] = t[r][width - 1].clone();
            }
        }
        Phase1::Feasible(x)
    } else {
        // y_r = 1 - reduced cost of artificial column r
        let multipliers = (0..rows)
            .map(|r| Rational::one() - &t[rows][cols + r])
            .collect();
        Phase1::Infeasible { multipliers }
    }
}

/// Decides joint mixability of finite discrete marginals exactly. The
/// center defaults to the sum of means; overriding it asks whether a joint
/// mix with that particular center exists.
pub fn jm_lp_decide(
    discretes: &[DiscreteDistribution],
    center: Option<Rational>,
    budget: &Budget,
) -> Result<Verdict, Error> {
    if discretes.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    let n = discretes.len();
    let k = center.unwrap_or_else(|| discretes.iter().map(|d| d.mean()).sum());
    let supports: Vec<&[Rational]> = discretes.iter().map(|d| d.points()).collect();
    let grid = hyperplane_grid(&supports, &k, budget.grid_cells)?;

    if grid.is_empty() {
        // No candidate support at all: the zero functions separate, since
        // the pointwise condition is vacuous and the integrals are zero.
        let cert = DualCertificate {
            tables: discretes
                .iter()
                .map(|d| {
                    d.points()
                        .iter()
                        .map(|x| DualEntry {
                            x: x.clone(),
                            f: Rational::zero(),
                        })
                        .collect()
                })
                .collect(),
            center: k.clone(),
        };
        verify_dual(discretes, &cert, &k, budget)?;
        return Ok(Verdict::not_mixable("lp_empty_hyperplane")
            .with_certificate(Certificate::Dual(cert)));
    }

    // margin constraints: one row per (marginal, support point)
    let row_offsets: Vec<usize> = {
        let mut offs = Vec::with_capacity(n);
        let mut acc = 0usize;
        for d in discretes {
            offs.push(acc);
            acc += d.len();
        }
        offs
    };
    let rows: usize = discretes.iter().map(|d| d.len()).sum();
    let cells = (rows as u64).saturating_mul(grid.len() as u64 + rows as u64);
    if cells > budget.grid_cells.saturating_mul(64) {
        return Err(Error::BudgetExceeded {
            what: "lp tableau",
            needed: cells as u128,
            budget: budget.grid_cells.saturating_mul(64) as u128,
        });
    }

    let mut a = vec![vec![Rational::zero(); grid.len()]; rows];
    for (col, tuple) in grid.iter().enumerate() {
        for (i, &pt_idx) in tuple.iter().enumerate() {
            a[row_offsets[i] + pt_idx][col] = Rational::one();
        }
    }
    let b: Vec<Rational> = discretes
        .iter()
        .flat_map(|d| d.weights().iter().cloned())
        .collect();

    match phase1_simplex(&a, &b) {
        Phase1::Feasible(x) => {
            let mut support = Vec::new();
            let mut masses = Vec::new();
            for (col, tuple) in grid.iter().enumerate() {
                if x[col].is_zero() {
                    continue;
                }
                let point: Vec<Rational> = tuple
                    .iter()
                    .enumerate()
                    .map(|(i, &pt_idx)| discretes[i].points()[pt_idx].clone())
                    .collect();
                support.push(point);
                masses.push(x[col].clone());
            }
            let pmf = JointPmf::from_parts(support, masses, k.clone());
            verify_primal(discretes, &pmf)?;
            Ok(Verdict::mixable("lp_feasible").with_certificate(Certificate::JointPmf(pmf)))
        }
        Phase1::Infeasible { multipliers } => {
            // f_i(v) = 1/n - y_(i,v): pointwise sums exceed 1 on the grid
            // while the integrals fall short of 1 by the phase-1 optimum.
            let n_rat = rat_int(n as i64);
            let tables: Vec<Vec<DualEntry>> = discretes
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    d.points()
                        .iter()
                        .enumerate()
                        .map(|(pt_idx, x)| DualEntry {
                            x: x.clone(),
                            f: Rational::one() / &n_rat
                                - &multipliers[row_offsets[i] + pt_idx],
                        })
                        .collect()
                })
                .collect();
            let cert = DualCertificate {
                tables,
                center: k.clone(),
            };
            verify_dual(discretes, &cert, &k, budget)?;
            Ok(Verdict::not_mixable("lp_infeasible").with_certificate(Certificate::Dual(cert)))
        }
    }
}

/// Re-validates a joint pmf: every support vector on the hyperplane, masses
/// nonnegative, and margins reproduced exactly.
pub fn verify_primal(discretes: &[DiscreteDistribution], pmf: &JointPmf) -> Result<(), Error> {
    let support = pmf.support_rational()?;
    let masses = pmf.masses_rational()?;
    if support.len() != masses.len() {
        return Err(Error::InvalidCertificate(
            "support and mass counts differ".into(),
        ));
    }
    let n = discretes.len();
    for (pt, mass) in support.iter().zip(&masses) {
        if pt.len() != n {
            return Err(Error::InvalidCertificate(format!(
                "support vector of length {} for {} marginals",
                pt.len(),
                n
            )));
        }
        if mass < &Rational::zero() {
            return Err(Error::InvalidCertificate(format!("negative mass {mass}")));
        }
        let total: Rational = pt.iter().sum();
        if total != pmf.center {
            return Err(Error::InvalidCertificate(format!(
                "support point sums to {total}, center is {}",
                pmf.center
            )));
        }
    }
    for (i, d) in discretes.iter().enumerate() {
        for (point, weight) in d.points().iter().zip(d.weights()) {
            let margin: Rational = support
                .iter()
                .zip(&masses)
                .filter(|(pt, _)| &pt[i] == point)
                .map(|(_, m)| m.clone())
                .sum();
            if &margin != weight {
                return Err(Error::InvalidCertificate(format!(
                    "margin {i} at {point}: mass {margin} vs weight {weight}"
                )));
            }
        }
        // no stray mass off the support of F_i
        let stray: Rational = support
            .iter()
            .zip(&masses)
            .filter(|(pt, _)| !d.points().contains(&pt[i]))
            .map(|(_, m)| m.clone())
            .sum();
        if !stray.is_zero() {
            return Err(Error::InvalidCertificate(format!(
                "marginal {i} has off-support mass {stray}"
            )));
        }
    }
    Ok(())
}

/// Re-validates a dual certificate by exhaustive enumeration of the
/// support-restricted hyperplane: sum of f_i at least 1 pointwise, sum of
/// integrals strictly below 1.
pub fn verify_dual(
    discretes: &[DiscreteDistribution],
    cert: &DualCertificate,
    center: &Rational,
    budget: &Budget,
) -> Result<(), Error> {
    if cert.tables.len() != discretes.len() {
        return Err(Error::InvalidCertificate("table count mismatch".into()));
    }
    for (i, d) in discretes.iter().enumerate() {
        for point in d.points() {
            if cert.value_at(i, point).is_none() {
                return Err(Error::InvalidCertificate(format!(
                    "f_{i} undefined at support point {point}"
                )));
            }
        }
    }
    let supports: Vec<&[Rational]> = discretes.iter().map(|d| d.points()).collect();
    let grid = hyperplane_grid(&supports, center, budget.grid_cells)?;
    for tuple in &grid {
        let total: Rational = tuple
            .iter()
            .enumerate()
            .map(|(i, &pt_idx)| {
                cert.value_at(i, &discretes[i].points()[pt_idx])
                    .expect("checked above")
                    .clone()
            })
            .sum();
        if total < Rational::one() {
            return Err(Error::InvalidCertificate(format!(
                "pointwise sum {total} below 1 on the hyperplane"
            )));
        }
    }
    let integral: Rational = discretes
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.points()
                .iter()
                .zip(d.weights())
                .map(|(x, w)| cert.value_at(i, x).expect("checked above") * w)
                .sum::<Rational>()
        })
        .sum();
    if integral >= Rational::one() {
        return Err(Error::InvalidCertificate(format!(
            "integral sum {integral} not below 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};
    use crate::verdict::Status;
    use proptest::prelude::*;

    fn bernoulli(p: Rational) -> DiscreteDistribution {
        DiscreteDistribution::new(
            vec![rat_int(0), rat_int(1)],
            vec![Rational::one() - &p, p],
        )
        .unwrap()
    }

    fn uniform_support(vals: &[i64]) -> DiscreteDistribution {
        let pts: Vec<Rational> = vals.iter().map(|&v| rat_int(v)).collect();
        let w = rat(1, vals.len() as i64);
        DiscreteDistribution::new(pts, vec![w; vals.len()]).unwrap()
    }

    #[test]
    fn fair_coin_pair_is_mixable() {
        let d = bernoulli(rat(1, 2));
        let v = jm_lp_decide(&[d.clone(), d.clone()], None, &Budget::default()).unwrap();
        assert_eq!(v.status, Status::Mixable);
        match v.certificate.as_deref() {
            Some(Certificate::JointPmf(pmf)) => {
                assert_eq!(pmf.center, rat_int(1));
                verify_primal(&[d.clone(), d], pmf).unwrap();
                let masses = pmf.masses_rational().unwrap();
                assert_eq!(masses, vec![rat(1, 2), rat(1, 2)]);
            }
            other => panic!("expected pmf, got {other:?}"),
        }
    }

    #[test]
    fn biased_coin_pair_has_empty_hyperplane() {
        let d = bernoulli(rat(1, 3));
        let v = jm_lp_decide(&[d.clone(), d.clone()], None, &Budget::default()).unwrap();
        assert_eq!(v.status, Status::NotMixable);
        assert_eq!(v.reason, "lp_empty_hyperplane");
        match v.certificate.as_deref() {
            Some(Certificate::Dual(cert)) => {
                verify_dual(&[d.clone(), d], cert, &rat(2, 3), &Budget::default()).unwrap();
                for table in &cert.tables {
                    for e in table {
                        assert!(e.f.is_zero());
                    }
                }
            }
            other => panic!("expected dual certificate, got {other:?}"),
        }
    }

    #[test]
    fn three_point_uniform_triple() {
        let d = uniform_support(&[0, 1, 2]);
        // the constant-sum slice of {0,1,2}^3 at 3 has exactly 7 cells
        let supports: Vec<&[Rational]> = vec![d.points(), d.points(), d.points()];
        let grid = hyperplane_grid(&supports, &rat_int(3), 1000).unwrap();
        assert_eq!(grid.len(), 7);
        let v = jm_lp_decide(&[d.clone(), d.clone(), d], None, &Budget::default()).unwrap();
        assert_eq!(v.status, Status::Mixable);
    }

    #[test]
    fn infeasible_with_nonempty_grid_yields_separating_dual() {
        // margins on {0,1} and {0,2} with heavy upper mass; center forced to 1
        let a = bernoulli(rat(3, 4));
        let b = uniform_support(&[0, 2]);
        let v = jm_lp_decide(&[a.clone(), b.clone()], Some(rat_int(1)), &Budget::default()).unwrap();
        // grid contains (1,0) only; margins cannot be met by one atom
        assert_eq!(v.status, Status::NotMixable);
        assert_eq!(v.reason, "lp_infeasible");
        match v.certificate.as_deref() {
            Some(Certificate::Dual(cert)) => {
                verify_dual(&[a, b], cert, &rat_int(1), &Budget::default()).unwrap();
            }
            other => panic!("expected dual certificate, got {other:?}"),
        }
    }

    #[test]
    fn verify_primal_rejects_bad_tables() {
        let d = bernoulli(rat(1, 2));
        let good = JointPmf::from_parts(
            vec![vec![rat_int(0), rat_int(1)], vec![rat_int(1), rat_int(0)]],
            vec![rat(1, 2), rat(1, 2)],
            rat_int(1),
        );
        verify_primal(&[d.clone(), d.clone()], &good).unwrap();

        let skewed = JointPmf::from_parts(
            vec![vec![rat_int(0), rat_int(1)], vec![rat_int(1), rat_int(0)]],
            vec![rat(3, 5), rat(2, 5)],
            rat_int(1),
        );
        assert!(verify_primal(&[d.clone(), d.clone()], &skewed).is_err());

        let off_plane = JointPmf::from_parts(
            vec![vec![rat_int(1), rat_int(1)]],
            vec![Rational::one()],
            rat_int(1),
        );
        assert!(verify_primal(&[d.clone(), d], &off_plane).is_err());
    }

    #[test]
    fn verify_dual_boundary_cases() {
        let d = bernoulli(rat(1, 2));
        // f_i = 1/n everywhere: integral equals 1, must be rejected
        let flat = DualCertificate {
            tables: (0..2)
                .map(|_| {
                    vec![
                        DualEntry { x: rat_int(0), f: rat(1, 2) },
                        DualEntry { x: rat_int(1), f: rat(1, 2) },
                    ]
                })
                .collect(),
            center: rat_int(1),
        };
        assert!(verify_dual(&[d.clone(), d.clone()], &flat, &rat_int(1), &Budget::default()).is_err());
        // any certificate against a mixable instance must fail
        let zero = DualCertificate {
            tables: (0..2)
                .map(|_| {
                    vec![
                        DualEntry { x: rat_int(0), f: Rational::zero() },
                        DualEntry { x: rat_int(1), f: Rational::zero() },
                    ]
                })
                .collect(),
            center: rat_int(1),
        };
        assert!(verify_dual(&[d.clone(), d], &zero, &rat_int(1), &Budget::default()).is_err());
    }

    #[test]
    fn grid_budget_respected() {
        let d = uniform_support(&[0, 1, 2, 3]);
        let tight = Budget {
            grid_cells: 2,
            ..Budget::default()
        };
        // integer center 4 has many grid points on {0..3}^3
        assert!(matches!(
            jm_lp_decide(&[d.clone(), d.clone(), d], Some(rat_int(4)), &tight),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    proptest! {
        /// Exactly one of the two certificate kinds is produced, and it
        /// verifies (the finite form of the duality equivalence).
        #[test]
        fn mutual_exclusion(seed in 0u64..300) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2usize..4);
            let discretes: Vec<DiscreteDistribution> = (0..n).map(|_| {
                let support_size = rng.gen_range(1usize..4);
                let pts: Vec<Rational> = {
                    let mut s = std::collections::BTreeSet::new();
                    while s.len() < support_size {
                        s.insert(rng.gen_range(-3i64..4));
                    }
                    s.into_iter().map(rat_int).collect()
                };
                let ws: Vec<Rational> = (0..pts.len()).map(|_| rat_int(rng.gen_range(1i64..4))).collect();
                DiscreteDistribution::new(pts, ws).unwrap()
            }).collect();
            let v = jm_lp_decide(&discretes, None, &Budget::default()).unwrap();
            let k: Rational = discretes.iter().map(|d| d.mean()).sum();
            match (v.status, v.certificate.as_deref()) {
                (Status::Mixable, Some(Certificate::JointPmf(pmf))) => {
                    verify_primal(&discretes, pmf).unwrap();
                }
                (Status::NotMixable, Some(Certificate::Dual(cert))) => {
                    verify_dual(&discretes, cert, &k, &Budget::default()).unwrap();
                }
                other => panic!("unexpected outcome {other:?}"),
            }
        }

        /// Affine maps x -> cx + d carry verdicts and centers along.
        #[test]
        fn scale_shift_equivariance(seed in 0u64..150, c in 1i64..4, d in -3i64..4) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2usize..4);
            let discretes: Vec<DiscreteDistribution> = (0..n).map(|_| {
                let size = rng.gen_range(1usize..4);
                let pts: Vec<Rational> = {
                    let mut s = std::collections::BTreeSet::new();
                    while s.len() < size {
                        s.insert(rng.gen_range(-2i64..3));
                    }
                    s.into_iter().map(rat_int).collect()
                };
                let ws = vec![rat(1, size as i64); size];
                DiscreteDistribution::new(pts, ws).unwrap()
            }).collect();
            let mapped: Vec<DiscreteDistribution> = discretes.iter().map(|dist| {
                let pts = dist.points().iter().map(|x| x * rat_int(c) + rat_int(d)).collect();
                DiscreteDistribution::new(pts, dist.weights().to_vec()).unwrap()
            }).collect();
            let v1 = jm_lp_decide(&discretes, None, &Budget::default()).unwrap();
            let v2 = jm_lp_decide(&mapped, None, &Budget::default()).unwrap();
            prop_assert_eq!(v1.status, v2.status);
        }
    }
}
