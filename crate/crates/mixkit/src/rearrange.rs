//! The min-max arrangement problem: given an m-by-n array, pick a
//! permutation per column so the row sums are as flat as possible.
//! Exhaustive enumeration serves as the oracle for small instances; a
//! counter-monotone column sweep with random restarts handles the rest.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Budget, Error};
use crate::numeric::{Entry, Rational, Tolerance};
use crate::verdict::{Certificate, Verdict};

/// An m-by-n array of finite values; column j holds the m candidate values
/// for production step j.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixInstance<E: Entry> {
    values: Vec<Vec<E>>, // row-major
    m: usize,
    n: usize,
}

impl<E: Entry> MatrixInstance<E> {
    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self, Error> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyInput("matrix"));
        }
        let n = rows[0].len();
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "ragged matrix: row of length {} vs {}",
                    r.len(),
                    n
                )));
            }
            for v in r {
                if !v.is_finite_entry() {
                    return Err(Error::NonFinite(v.to_f64()));
                }
            }
        }
        let m = rows.len();
        Ok(MatrixInstance { values: rows, m, n })
    }

    pub fn from_columns(cols: Vec<Vec<E>>) -> Result<Self, Error> {
        if cols.is_empty() || cols[0].is_empty() {
            return Err(Error::EmptyInput("matrix"));
        }
        let m = cols[0].len();
        let n = cols.len();
        let mut rows = vec![Vec::with_capacity(n); m];
        for col in &cols {
            if col.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "ragged columns: {} vs {}",
                    col.len(),
                    m
                )));
            }
            for (i, v) in col.iter().enumerate() {
                rows[i].push(v.clone());
            }
        }
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.values[i][j]
    }

    pub fn row_data(&self) -> &[Vec<E>] {
        &self.values
    }

    /// Grand total divided by the number of rows: the universal lower bound
    /// on the minimax objective.
    pub fn lower_bound(&self) -> E {
        let mut total = E::zero();
        for row in &self.values {
            for v in row {
                total = total.add(v);
            }
        }
        total.div_count(self.m)
    }
}

/// One permutation per column, mapping output row -> source row. Canonical
/// form fixes the first permutation to the identity; row sums depend only on
/// the relative alignment, so this loses nothing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Arrangement {
    perms: Vec<Vec<usize>>,
}

impl Arrangement {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self, Error> {
        if perms.is_empty() {
            return Err(Error::EmptyInput("arrangement"));
        }
        let m = perms[0].len();
        for p in &perms {
            if p.len() != m || !is_permutation(p) {
                return Err(Error::DimensionMismatch(
                    "each column needs a permutation of 0..m".into(),
                ));
            }
        }
        Ok(Arrangement { perms })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Arrangement {
            perms: vec![(0..m).collect(); n],
        }
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn cols(&self) -> usize {
        self.perms.len()
    }

    pub fn rows(&self) -> usize {
        self.perms[0].len()
    }

    /// Relabels output rows so the first column's permutation is the
    /// identity. The multiset of row sums is unchanged.
    pub fn canonical(&self) -> Self {
        let m = self.rows();
        let first = &self.perms[0];
        let mut inv = vec![0usize; m];
        for (out_row, &src) in first.iter().enumerate() {
            inv[src] = out_row;
        }
        // new output row i corresponds to old output row inv[i]
        let perms = self
            .perms
            .iter()
            .map(|p| (0..m).map(|i| p[inv[i]]).collect())
            .collect();
        Arrangement { perms }
    }

    pub fn is_canonical(&self) -> bool {
        self.perms[0].iter().enumerate().all(|(i, &v)| i == v)
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

// JSON uses 1-based permutations to match the usual S_m convention.
impl Serialize for Arrangement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let one_based: Vec<Vec<usize>> = self
            .perms
            .iter()
            .map(|p| p.iter().map(|v| v + 1).collect())
            .collect();
        one_based.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Arrangement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let one_based = Vec::<Vec<usize>>::deserialize(d)?;
        let perms: Vec<Vec<usize>> = one_based
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&v| v.checked_sub(1).ok_or_else(|| D::Error::custom("permutations are 1-based")))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        Arrangement::new(perms).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Minimax,
    Range,
    Variance,
}

impl ObjectiveKind {
    fn value<E: Entry>(&self, row_sums: &[E]) -> E {
        let max = row_sums
            .iter()
            .max_by(|a, b| a.order(b))
            .expect("nonempty");
        match self {
            ObjectiveKind::Minimax => max.clone(),
            ObjectiveKind::Range => {
                let min = row_sums
                    .iter()
                    .min_by(|a, b| a.order(b))
                    .expect("nonempty");
                max.sub(min)
            }
            ObjectiveKind::Variance => {
                let m = row_sums.len();
                let mean = row_sums
                    .iter()
                    .fold(E::zero(), |acc, v| acc.add(v))
                    .div_count(m);
                row_sums
                    .iter()
                    .map(|v| {
                        let d = v.sub(&mean);
                        d.mul(&d)
                    })
                    .fold(E::zero(), |acc, v| acc.add(&v))
                    .div_count(m)
            }
        }
    }
}

/// Solver output: the achieved objective, the arrangement in canonical form,
/// its row sums, the averaging lower bound, and whether the row sums are all
/// equal (an exact mix).
#[derive(Debug, Clone)]
pub struct SolveResult<E: Entry> {
    pub objective: ObjectiveKind,
    pub value: E,
    pub arrangement: Arrangement,
    pub row_sums: Vec<E>,
    pub lower_bound: E,
    pub exact_mix: bool,
    /// Objective value after each sweep, per restart (heuristic only).
    pub sweep_trace: Vec<Vec<f64>>,
}

fn row_sums_for<E: Entry>(instance: &MatrixInstance<E>, arrangement: &Arrangement) -> Vec<E> {
    let m = instance.rows();
    let mut sums = vec![E::zero(); m];
    for (j, perm) in arrangement.perms().iter().enumerate() {
        for (i, sum) in sums.iter_mut().enumerate() {
            *sum = sum.add(instance.get(perm[i], j));
        }
    }
    sums
}

fn exact_mix_flag<E: Entry>(row_sums: &[E], tol: Tolerance) -> bool {
    row_sums.windows(2).all(|w| w[0].matches(&w[1], tol))
}

fn build_result<E: Entry>(
    instance: &MatrixInstance<E>,
    arrangement: Arrangement,
    objective: ObjectiveKind,
    tol: Tolerance,
    sweep_trace: Vec<Vec<f64>>,
) -> SolveResult<E> {
    let canonical = arrangement.canonical();
    let row_sums = row_sums_for(instance, &canonical);
    let value = objective.value(&row_sums);
    let exact_mix = exact_mix_flag(&row_sums, tol);
    SolveResult {
        objective,
        value,
        arrangement: canonical,
        row_sums,
        lower_bound: instance.lower_bound(),
        exact_mix,
        sweep_trace,
    }
}

/// Recomputes row sums and the objective for a given arrangement.
pub fn evaluate<E: Entry>(
    instance: &MatrixInstance<E>,
    arrangement: &Arrangement,
    objective: ObjectiveKind,
    tol: Tolerance,
) -> Result<SolveResult<E>, Error> {
    if arrangement.cols() != instance.cols() || arrangement.rows() != instance.rows() {
        return Err(Error::DimensionMismatch(format!(
            "arrangement is {}x{}, matrix is {}x{}",
            arrangement.rows(),
            arrangement.cols(),
            instance.rows(),
            instance.cols()
        )));
    }
    Ok(build_result(
        instance,
        arrangement.clone(),
        objective,
        tol,
        Vec::new(),
    ))
}

fn factorial_pow(m: usize, e: usize) -> Option<u128> {
    let mut fact: u128 = 1;
    for k in 2..=m as u128 {
        fact = fact.checked_mul(k)?;
    }
    let mut out: u128 = 1;
    for _ in 0..e {
        out = out.checked_mul(fact)?;
    }
    Some(out)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive search over all canonical arrangements. Globally optimal;
/// ties break to the lexicographically smallest canonical arrangement.
pub fn brute_force<E: Entry>(
    instance: &MatrixInstance<E>,
    objective: ObjectiveKind,
    budget: &Budget,
    tol: Tolerance,
) -> Result<SolveResult<E>, Error> {
    let (m, n) = (instance.rows(), instance.cols());
    let leaves = factorial_pow(m, n.saturating_sub(1)).unwrap_or(u128::MAX);
    if leaves > budget.brute_leaves as u128 {
        return Err(Error::BudgetExceeded {
            what: "brute-force enumeration",
            needed: leaves,
            budget: budget.brute_leaves as u128,
        });
    }

    // first column fixed to identity
    let mut sums: Vec<E> = (0..m).map(|i| instance.get(i, 0).clone()).collect();
    let mut perms: Vec<Vec<usize>> = vec![(0..m).collect(); n];
    let mut best: Option<(E, Vec<Vec<usize>>)> = None;

    fn dfs<E: Entry>(
        instance: &MatrixInstance<E>,
        objective: ObjectiveKind,
        j: usize,
        sums: &mut Vec<E>,
        perms: &mut Vec<Vec<usize>>,
        best: &mut Option<(E, Vec<Vec<usize>>)>,
    ) {
        let (m, n) = (instance.rows(), instance.cols());
        if j == n {
            let value = objective.value(sums);
            let better = match best {
                None => true,
                Some((bv, _)) => value.order(bv) == Ordering::Less,
            };
            if better {
                *best = Some((value, perms.clone()));
            }
            return;
        }
        let mut perm: Vec<usize> = (0..m).collect();
        loop {
            for i in 0..m {
                sums[i] = sums[i].add(instance.get(perm[i], j));
            }
            perms[j] = perm.clone();
            dfs(instance, objective, j + 1, sums, perms, best);
            for i in 0..m {
                sums[i] = sums[i].sub(instance.get(perm[i], j));
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }

    dfs(instance, objective, 1, &mut sums, &mut perms, &mut best);
    let (_, perms) = best.expect("at least one arrangement");
    Ok(build_result(
        instance,
        Arrangement { perms },
        objective,
        tol,
        Vec::new(),
    ))
}

/// One counter-monotone pass over column `j`: pair the largest column value
/// with the smallest partial row sum. Ties break by row index, so the result
/// is deterministic.
fn resort_column<E: Entry>(
    instance: &MatrixInstance<E>,
    perms: &mut [Vec<usize>],
    sums: &mut [E],
    j: usize,
) {
    let m = instance.rows();
    let mut rests: Vec<(E, usize)> = (0..m)
        .map(|i| (sums[i].sub(instance.get(perms[j][i], j)), i))
        .collect();
    // ascending rest, ties by output row index
    rests.sort_by(|a, b| a.0.order(&b.0).then(a.1.cmp(&b.1)));
    let mut values: Vec<(E, usize)> = (0..m)
        .map(|src| (instance.get(src, j).clone(), src))
        .collect();
    // descending value, ties by source row index
    values.sort_by(|a, b| b.0.order(&a.0).then(a.1.cmp(&b.1)));
    for ((rest, out_row), (value, src)) in rests.into_iter().zip(values) {
        perms[j][out_row] = src;
        sums[out_row] = rest.add(&value);
    }
}

/// Sweeps until a full pass stops improving. Improvement is judged on
/// (objective, row-sum variance): a pass that flattens the sums without
/// moving the objective still counts, which carries the search across
/// minimax plateaus. Each pass never increases the objective.
fn sweep_to_stall<E: Entry>(
    instance: &MatrixInstance<E>,
    perms: &mut [Vec<usize>],
    sums: &mut [E],
    objective: ObjectiveKind,
) -> (E, E) {
    let n = instance.cols();
    let mut current = objective.value(sums);
    let mut current_tie = ObjectiveKind::Variance.value(sums);
    loop {
        for j in 0..n {
            resort_column(instance, perms, sums, j);
        }
        let after = objective.value(sums);
        let after_tie = ObjectiveKind::Variance.value(sums);
        let improved = match after.order(&current) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => after_tie.order(&current_tie) == Ordering::Less,
        };
        if improved {
            current = after;
            current_tie = after_tie;
        } else {
            return (current, current_tie);
        }
    }
}

/// Nothing can beat this value, so kicking further is pointless: the
/// averaging bound for the minimax objective, zero for range and variance.
fn at_optimum<E: Entry>(objective: ObjectiveKind, value: &E, lower: &E, tol: Tolerance) -> bool {
    match objective {
        ObjectiveKind::Minimax => value.matches(lower, tol),
        ObjectiveKind::Range | ObjectiveKind::Variance => value.matches(&E::zero(), tol),
    }
}

/// Number of perturb-and-resweep rounds per restart.
const KICKS_PER_RESTART: usize = 48;

/// Iterated counter-monotone sweeps from `restarts` random starting
/// shuffles; deterministic for a fixed seed. Each sweep never increases the
/// objective (it re-sorts every column against the partial sums, pairing
/// the largest value with the smallest rest). A stalled sweep gets a small
/// random kick (one column pair-swap from the restart's own stream) and
/// re-sweeps, keeping the best state seen; the best restart wins, with ties
/// broken toward the lexicographically smallest canonical arrangement.
pub fn local_search<E: Entry>(
    instance: &MatrixInstance<E>,
    objective: ObjectiveKind,
    restarts: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<SolveResult<E>, Error> {
    let (m, n) = (instance.rows(), instance.cols());
    if restarts == 0 {
        return Err(Error::BadParameter("restarts must be at least 1".into()));
    }
    if m == 1 || n == 1 {
        return evaluate(instance, &Arrangement::identity(m, n), objective, tol);
    }
    let lower = instance.lower_bound();

    let mut best: Option<SolveResult<E>> = None;
    let mut traces: Vec<Vec<f64>> = Vec::with_capacity(restarts);
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let mut perms: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let mut p: Vec<usize> = (0..m).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let mut sums = row_sums_for(
            instance,
            &Arrangement {
                perms: perms.clone(),
            },
        );
        let (mut best_val, mut best_tie) = sweep_to_stall(instance, &mut perms, &mut sums, objective);
        let mut best_perms = perms.clone();
        let mut best_sums = sums.clone();
        // trace holds the accepted stall values; it is nonincreasing
        let mut trace = vec![best_val.to_f64()];
        for kick in 0..KICKS_PER_RESTART {
            if at_optimum(objective, &best_val, &lower, tol) {
                break;
            }
            perms.clone_from(&best_perms);
            sums.clone_from(&best_sums);
            // kick: transpose random assignments, growing more aggressive
            // the longer the restart stays stuck in one basin
            let strength = 1 + kick % 8;
            for _ in 0..strength {
                let j = rng.gen_range(0..n);
                let a = rng.gen_range(0..m);
                let b = rng.gen_range(0..m);
                if a != b {
                    let delta_a = instance
                        .get(perms[j][b], j)
                        .sub(instance.get(perms[j][a], j));
                    sums[a] = sums[a].add(&delta_a);
                    sums[b] = sums[b].sub(&delta_a);
                    perms[j].swap(a, b);
                }
            }
            let (val, tie) = sweep_to_stall(instance, &mut perms, &mut sums, objective);
            // strict improvements advance the trace; states of equal quality
            // are still adopted, letting the walk drift across plateaus
            let (improved, sideways) = match (val.order(&best_val), tie.order(&best_tie)) {
                (Ordering::Less, _) => (true, false),
                (Ordering::Equal, Ordering::Less) => (true, false),
                (Ordering::Equal, Ordering::Equal) => (false, true),
                _ => (false, false),
            };
            if improved || sideways {
                best_val = val;
                best_tie = tie;
                best_perms.clone_from(&perms);
                best_sums.clone_from(&sums);
                if improved {
                    trace.push(best_val.to_f64());
                }
            }
        }
        traces.push(trace);
        let candidate = build_result(
            instance,
            Arrangement { perms: best_perms },
            objective,
            tol,
            Vec::new(),
        );
        let replace = match &best {
            None => true,
            Some(b) => match candidate.value.order(&b.value) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => candidate.arrangement < b.arrangement,
            },
        };
        if replace {
            best = Some(candidate);
        }
    }
    let mut result = best.expect("restarts >= 1");
    result.sweep_trace = traces;
    Ok(result)
}

/// A certificate of joint mixability in matrix form: the instance whose
/// columns list the marginal support points, plus an arrangement whose row
/// sums are all equal to the joint center.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrangementCertificate {
    /// Row-major matrix; column j lists the expanded points of marginal j.
    pub matrix: Vec<Vec<serde_json::Value>>,
    pub perms: Arrangement,
    #[serde(with = "crate::numeric::ratjson")]
    pub center: Rational,
}

impl ArrangementCertificate {
    pub fn new(instance: &MatrixInstance<Rational>, perms: Arrangement, center: Rational) -> Self {
        let matrix = instance
            .row_data()
            .iter()
            .map(|row| row.iter().map(crate::numeric::ratjson::to_value).collect())
            .collect();
        ArrangementCertificate {
            matrix,
            perms,
            center,
        }
    }

    pub fn instance(&self) -> Result<MatrixInstance<Rational>, Error> {
        let rows = self
            .matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(crate::numeric::ratjson::from_value)
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        MatrixInstance::from_rows(rows)
    }

    /// Recomputes row sums and checks they all equal the stated center.
    pub fn verify(&self) -> Result<(), Error> {
        let instance = self.instance()?;
        if self.perms.cols() != instance.cols() || self.perms.rows() != instance.rows() {
            return Err(Error::InvalidCertificate("arrangement shape mismatch".into()));
        }
        let sums = row_sums_for(&instance, &self.perms);
        for s in &sums {
            if *s != self.center {
                return Err(Error::InvalidCertificate(format!(
                    "row sum {s} differs from center {}",
                    self.center
                )));
            }
        }
        Ok(())
    }
}

/// Decides joint mixability of equal-weight discrete marginals through the
/// matrix arrangement problem. Non-uniform rational weights are expanded to
/// a common denominator first.
pub fn jm_from_matrix(
    discretes: &[DiscreteDistribution],
    budget: &Budget,
    tol: Tolerance,
) -> Result<Verdict, Error> {
    let (instance, center) = matrix_of(discretes, budget)?;
    let lower = instance.lower_bound();
    debug_assert_eq!(lower, center);

    match brute_force(&instance, ObjectiveKind::Minimax, budget, tol) {
        Ok(result) => {
            if result.exact_mix && result.value == lower {
                let cert = ArrangementCertificate::new(&instance, result.arrangement, center);
                Ok(Verdict::mixable("exact_arrangement")
                    .with_certificate(Certificate::Arrangement(cert)))
            } else {
                Ok(Verdict::not_mixable("arrangement_gap").with_diagnostic(format!(
                    "brute force optimum {} exceeds lower bound {}",
                    result.value, lower
                )))
            }
        }
        Err(e) if e.is_budget() => {
            let result = local_search(&instance, ObjectiveKind::Minimax, 64, 7, tol)?;
            if result.exact_mix && result.value == lower {
                let cert = ArrangementCertificate::new(&instance, result.arrangement, center);
                Ok(Verdict::mixable("exact_arrangement")
                    .with_certificate(Certificate::Arrangement(cert)))
            } else {
                Ok(Verdict::unknown("heuristic_inconclusive").with_diagnostic(
                    "local search found no exact mix; instance too large for enumeration",
                ))
            }
        }
        Err(e) => Err(e),
    }
}

/// Builds the matrix whose column j lists marginal j's support points, each
/// replicated to the common weight denominator.
pub fn matrix_of(
    discretes: &[DiscreteDistribution],
    budget: &Budget,
) -> Result<(MatrixInstance<Rational>, Rational), Error> {
    if discretes.is_empty() {
        return Err(Error::EmptyInput("marginals"));
    }
    // all marginals expand to one common denominator so columns align
    let mut lcm = num_bigint::BigInt::from(1);
    for d in discretes {
        lcm = num_integer::lcm(lcm, d.weight_denominator());
    }
    use num_traits::ToPrimitive;
    let m = lcm.to_u64().filter(|&m| m <= budget.expansion_rows).ok_or(
        Error::BudgetExceeded {
            what: "weight expansion",
            needed: lcm.to_u128().unwrap_or(u128::MAX),
            budget: budget.expansion_rows as u128,
        },
    )?;
    let columns: Vec<Vec<Rational>> = discretes
        .iter()
        .map(|d| d.replicate_to(m))
        .collect::<Result<_, _>>()?;
    let center: Rational = discretes.iter().map(|d| d.mean()).sum();
    Ok((MatrixInstance::from_columns(columns)?, center))
}
