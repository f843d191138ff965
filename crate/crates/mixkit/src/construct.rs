//! Constructive mixability: decomposing discrete laws into equal-mean
//! uniform blocks, peeling integer joint mixes into one-hot layers, building
//! Gaussian joint mixes, and sampling from any certificate.

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Budget, Error};
use crate::numeric::{rat_from_f64, rat_int, rat_to_f64, ratjson, Rational, Tolerance};
use crate::rearrange::{self};
use crate::verdict::{Certificate, Verdict};

/// A finite mixture of discrete uniform blocks, all with the same mean.
/// Re-marginalizing the mixture reproduces the decomposed law exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformBlockMixture {
    #[serde(with = "ratjson")]
    pub center: Rational,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Block {
    /// The n coordinates of the block vector.
    pub values: Vec<serde_json::Value>,
    pub weight: serde_json::Value,
}

impl Block {
    pub fn values_rational(&self) -> Result<Vec<Rational>, Error> {
        self.values.iter().map(ratjson::from_value).collect()
    }

    pub fn weight_rational(&self) -> Result<Rational, Error> {
        ratjson::from_value(&self.weight)
    }
}

impl UniformBlockMixture {
    /// Checks the mixture invariants: positive weights summing to one and
    /// every block averaging exactly to the center.
    pub fn verify(&self) -> Result<(), Error> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidCertificate("no blocks".into()));
        }
        let n = self.blocks[0].values.len();
        let mut total = Rational::zero();
        for block in &self.blocks {
            let values = block.values_rational()?;
            let weight = block.weight_rational()?;
            if values.len() != n || n == 0 {
                return Err(Error::InvalidCertificate("ragged blocks".into()));
            }
            if weight <= Rational::zero() {
                return Err(Error::InvalidCertificate(format!(
                    "nonpositive block weight {weight}"
                )));
            }
            let mean: Rational = values.iter().sum::<Rational>() / rat_int(n as i64);
            if mean != self.center {
                return Err(Error::InvalidCertificate(format!(
                    "block mean {mean} differs from center {}",
                    self.center
                )));
            }
            total += weight;
        }
        if !total.is_one() {
            return Err(Error::InvalidCertificate(format!(
                "block weights sum to {total}"
            )));
        }
        Ok(())
    }

    /// The marginal law induced by the mixture: each block contributes its
    /// coordinates with weight w/n.
    pub fn remarginalize(&self) -> Result<DiscreteDistribution, Error> {
        let n = self.blocks[0].values.len();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for block in &self.blocks {
            let w = block.weight_rational()? / rat_int(n as i64);
            for v in block.values_rational()? {
                points.push(v);
                weights.push(w.clone());
            }
        }
        DiscreteDistribution::new(points, weights)
    }
}

/// Decomposes a discrete law into equal-mean uniform blocks by expanding the
/// weights to a common denominator and solving the n-identical-column
/// arrangement problem. Exhaustive failure refutes mixability; heuristic
/// failure is inconclusive.
pub fn discrete_cm_decompose(
    d: &DiscreteDistribution,
    n: usize,
    budget: &Budget,
    tol: Tolerance,
) -> Result<Verdict, Error> {
    if n == 0 {
        return Err(Error::BadParameter("n must be at least 1".into()));
    }
    let copies = vec![d.clone(); n];
    let verdict = rearrange::jm_from_matrix(&copies, budget, tol)?;
    let Some(cert) = verdict.certificate.as_deref() else {
        return Ok(verdict);
    };
    let Certificate::Arrangement(arr_cert) = cert else {
        return Ok(verdict);
    };

    let instance = arr_cert.instance()?;
    let m = instance.rows();
    let mu = d.mean();
    let mut merged: std::collections::BTreeMap<Vec<Rational>, u64> = Default::default();
    for i in 0..m {
        let mut block: Vec<Rational> = (0..n)
            .map(|j| instance.get(arr_cert.perms.perms()[j][i], j).clone())
            .collect();
        block.sort();
        *merged.entry(block).or_insert(0) += 1;
    }
    let blocks: Vec<Block> = merged
        .into_iter()
        .map(|(values, count)| Block {
            values: values.iter().map(ratjson::to_value).collect(),
            weight: ratjson::to_value(&Rational::new(count.into(), (m as u64).into())),
        })
        .collect();
    let mixture = UniformBlockMixture {
        center: mu,
        blocks,
    };
    mixture.verify()?;
    if mixture.remarginalize()? != *d {
        return Err(Error::InvalidCertificate(
            "block mixture does not reproduce the input law".into(),
        ));
    }
    Ok(Verdict::mixable("block_decomposition")
        .with_certificate(Certificate::BlockMixture(mixture)))
}

/// One-hot layers of an integer joint mix: layer k, row r is the unit vector
/// marking which coordinate absorbs the k-th unit of mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinaryLayerList {
    pub coords: usize,
    pub rows: usize,
    /// `layers[k][r]` is a 0/1 vector with exactly one 1.
    pub layers: Vec<Vec<Vec<u8>>>,
}

impl BinaryLayerList {
    pub fn verify(&self) -> Result<(), Error> {
        for layer in &self.layers {
            if layer.len() != self.rows {
                return Err(Error::InvalidCertificate("layer row count mismatch".into()));
            }
            for v in layer {
                if v.len() != self.coords {
                    return Err(Error::InvalidCertificate("layer width mismatch".into()));
                }
                let ones = v.iter().filter(|&&b| b == 1).count();
                let zeros = v.iter().filter(|&&b| b == 0).count();
                if ones != 1 || ones + zeros != v.len() {
                    return Err(Error::InvalidCertificate(
                        "layer vector is not one-hot".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Peels a table of nonnegative-integer realizations with constant row sum N
/// into N one-hot layers: coordinate i gets the k-th unit when the running
/// prefix sum first reaches k there.
pub fn binary_decompose(rows: &[Vec<u64>]) -> Result<BinaryLayerList, Error> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::EmptyInput("realization table"));
    }
    let coords = rows[0].len();
    let total: u64 = rows[0].iter().sum();
    for row in rows {
        if row.len() != coords {
            return Err(Error::DimensionMismatch("ragged realization table".into()));
        }
        let s: u64 = row.iter().sum();
        if s != total {
            return Err(Error::BadParameter(format!(
                "row sums differ: {s} vs {total}; not a joint mix"
            )));
        }
    }
    let mut layers = vec![vec![vec![0u8; coords]; rows.len()]; total as usize];
    for (r, row) in rows.iter().enumerate() {
        let mut prefix = 0u64;
        for (i, &x) in row.iter().enumerate() {
            // units prefix+1 ..= prefix+x land on coordinate i
            for k in prefix..prefix + x {
                layers[k as usize][r][i] = 1;
            }
            prefix += x;
        }
    }
    let out = BinaryLayerList {
        coords,
        rows: rows.len(),
        layers,
    };
    debug_assert!(out.verify().is_ok());
    Ok(out)
}

/// Coordinate-wise sum of the layers; inverse of [`binary_decompose`].
pub fn binary_compose(layers: &BinaryLayerList) -> Result<Vec<Vec<u64>>, Error> {
    layers.verify()?;
    let mut rows = vec![vec![0u64; layers.coords]; layers.rows];
    for layer in &layers.layers {
        for (r, v) in layer.iter().enumerate() {
            for (i, &b) in v.iter().enumerate() {
                rows[r][i] += b as u64;
            }
        }
    }
    Ok(rows)
}

/// A Gaussian joint-mix witness: a correlation matrix R with unit diagonal,
/// positive semidefinite up to 1e-10, and sigma' R sigma at most
/// 1e-10 (sum sigma)^2, so the weighted sum of coordinates is constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianMixCertificate {
    pub mus: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub corr: Vec<Vec<f64>>,
}

pub const GAUSSIAN_EIG_TOL: f64 = 1e-10;

impl GaussianMixCertificate {
    pub fn center(&self) -> f64 {
        self.mus.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.sigmas.len()
    }

    fn corr_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.corr[i][j])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.corr_matrix());
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sigma_quadratic_form(&self) -> f64 {
        let n = self.dim();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.sigmas[i] * self.sigmas[j] * self.corr[i][j];
            }
        }
        total
    }

    pub fn verify(&self) -> Result<(), Error> {
        let n = self.dim();
        if self.mus.len() != n || self.corr.len() != n {
            return Err(Error::InvalidCertificate("dimension mismatch".into()));
        }
        for row in &self.corr {
            if row.len() != n {
                return Err(Error::InvalidCertificate("ragged correlation matrix".into()));
            }
        }
        for i in 0..n {
            if (self.corr[i][i] - 1.0).abs() > GAUSSIAN_EIG_TOL {
                return Err(Error::InvalidCertificate(format!(
                    "diagonal entry {} differs from 1",
                    self.corr[i][i]
                )));
            }
            for j in 0..n {
                if (self.corr[i][j] - self.corr[j][i]).abs() > GAUSSIAN_EIG_TOL {
                    return Err(Error::InvalidCertificate("asymmetric matrix".into()));
                }
            }
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -GAUSSIAN_EIG_TOL {
            return Err(Error::InvalidCertificate(format!(
                "minimum eigenvalue {min_eig} below -1e-10"
            )));
        }
        let total_sigma: f64 = self.sigmas.iter().sum();
        if self.sigma_quadratic_form() > GAUSSIAN_EIG_TOL * total_sigma * total_sigma {
            return Err(Error::InvalidCertificate(format!(
                "sigma'Rsigma = {} too large",
                self.sigma_quadratic_form()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum GaussianOutcome {
    Certificate(GaussianMixCertificate),
    NotMixable,
    /// Projections failed to converge within the iteration cap.
    Unknown(String),
}

/// Splits the scales into three polygon sides, each at most half the total,
/// and returns a unit direction in the plane for every coordinate so that
/// the sigma-weighted directions cancel. Feasibility (sum >= 2 max) is
/// exactly the closing condition.
fn polygon_directions(sigmas: &[f64]) -> Vec<(f64, f64)> {
    let n = sigmas.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigmas[j].total_cmp(&sigmas[i]).then(i.cmp(&j)));

    let mut group = vec![0usize; n]; // 0 = A, 1 = B, 2 = C
    let mut sums = [0.0f64; 3];
    group[order[0]] = 0;
    sums[0] = sigmas[order[0]];
    for &idx in &order[1..] {
        let g = if sums[1] <= sums[2] { 1 } else { 2 };
        group[idx] = g;
        sums[g] += sigmas[idx];
    }
    let (a, b, c) = (sums[0], sums[1], sums[2]);

    // triangle with directed sides a*uA + b*uB + c*uC = 0
    let u_a = (1.0, 0.0);
    let (u_b, u_c) = if b == 0.0 || c == 0.0 {
        // at most one nonempty remainder group (n <= 2): feasibility forces
        // the remaining side to match A, so antithetic directions close it
        ((-1.0, 0.0), (-1.0, 0.0))
    } else {
        // P0 = origin, P1 = (a, 0); find P2 with |P1P2| = b, |P2P0| = c
        let x = (a * a + c * c - b * b) / (2.0 * a);
        let y = (c * c - x * x).max(0.0).sqrt();
        let u_b = ((x - a) / b, y / b);
        let u_c = (-x / c, -y / c);
        (u_b, u_c)
    };
    let dirs = [u_a, u_b, u_c];
    (0..n).map(|i| dirs[group[i]]).collect()
}

fn affine_project(m: &DMatrix<f64>, sigmas: &[f64]) -> DMatrix<f64> {
    let n = sigmas.len();
    let sq_sum: f64 = sigmas.iter().map(|s| s * s).sum();
    let quart_sum: f64 = sigmas.iter().map(|s| s.powi(4)).sum();
    let denom = sq_sum * sq_sum - quart_sum;
    let sigma_m_sigma: f64 = (0..n)
        .map(|i| (0..n).map(|j| sigmas[i] * sigmas[j] * m[(i, j)]).sum::<f64>())
        .sum();
    let diag_term: f64 = (0..n).map(|i| (m[(i, i)] - 1.0) * sigmas[i] * sigmas[i]).sum();
    let beta = if denom > 0.0 {
        (sigma_m_sigma - diag_term) / denom
    } else {
        0.0
    };
    let mut out = m.clone();
    let alphas: Vec<f64> = (0..n)
        .map(|i| m[(i, i)] - 1.0 - beta * sigmas[i] * sigmas[i])
        .collect();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] -= beta * sigmas[i] * sigmas[j];
        }
        out[(i, i)] -= alphas[i];
        out[(i, i)] = 1.0; // pin the diagonal exactly
    }
    // symmetrize away floating dust
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn psd_project(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let clamped = nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0)),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose()
}

const GAUSSIAN_PROJECTION_CAP: usize = 10_000;

/// Builds a correlation matrix turning independent N(mu_i, sigma_i^2)
/// coordinates into a joint mix, via alternating projections between the
/// affine constraint set and the PSD cone, seeded with a closed-polygon
/// direction matrix so boundary-feasible scale vectors converge too.
pub fn gaussian_joint_mix(mus: &[f64], sigmas: &[f64]) -> Result<GaussianOutcome, Error> {
    if sigmas.is_empty() {
        return Err(Error::EmptyInput("sigmas"));
    }
    if mus.len() != sigmas.len() {
        return Err(Error::LengthMismatch {
            left: mus.len(),
            right: sigmas.len(),
        });
    }
    for &s in sigmas {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::BadParameter(format!("sigma must be >= 0, got {s}")));
        }
    }
    for &m in mus {
        if !m.is_finite() {
            return Err(Error::NonFinite(m));
        }
    }
    let total: f64 = sigmas.iter().sum();
    if total == 0.0 {
        return Err(Error::BadParameter("sigmas must not all be zero".into()));
    }
    let max = sigmas.iter().cloned().fold(0.0, f64::max);
    if total < 2.0 * max {
        return Ok(GaussianOutcome::NotMixable);
    }

    let n = sigmas.len();
    let dirs = polygon_directions(sigmas);
    let mut m = DMatrix::from_fn(n, n, |i, j| {
        dirs[i].0 * dirs[j].0 + dirs[i].1 * dirs[j].1
    });
    for iter in 0..GAUSSIAN_PROJECTION_CAP {
        let projected = affine_project(&m, sigmas);
        let cert = GaussianMixCertificate {
            mus: mus.to_vec(),
            sigmas: sigmas.to_vec(),
            corr: (0..n)
                .map(|i| (0..n).map(|j| projected[(i, j)]).collect())
                .collect(),
        };
        let min_eig = cert.min_eigenvalue();
        let quad = cert.sigma_quadratic_form();
        if min_eig >= -GAUSSIAN_EIG_TOL && quad <= GAUSSIAN_EIG_TOL * total * total {
            return Ok(GaussianOutcome::Certificate(cert));
        }
        if iter + 1 == GAUSSIAN_PROJECTION_CAP {
            return Ok(GaussianOutcome::Unknown(format!(
                "projections stalled: min eig {min_eig}, quadratic form {quad}"
            )));
        }
        m = psd_project(&projected);
    }
    unreachable!("loop returns");
}

/// Sample table: exact rationals for discrete certificates, floats for
/// Gaussian ones. Discrete rows sum to the center exactly.
#[derive(Debug, Clone)]
pub enum SampleValues {
    Exact(Vec<Vec<Rational>>),
    Float(Vec<Vec<f64>>),
}

impl SampleValues {
    pub fn len(&self) -> usize {
        match self {
            SampleValues::Exact(v) => v.len(),
            SampleValues::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row_f64(&self, r: usize) -> Vec<f64> {
        match self {
            SampleValues::Exact(v) => v[r].iter().map(rat_to_f64).collect(),
            SampleValues::Float(v) => v[r].clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginalKsFlag {
    pub marginal: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct Samples {
    pub values: SampleValues,
    pub coords: usize,
    /// Kolmogorov-Smirnov distance of each empirical marginal to the
    /// certificate-implied law, flagged (not asserted) beyond 2/sqrt(count).
    pub ks: Vec<MarginalKsFlag>,
}

/// Draws i.i.d. rows from the joint mix a certificate describes. The
/// certificate is validated first; discrete rows sum to the center exactly.
pub fn sample_joint_mix(
    cert: &Certificate,
    count: usize,
    seed: u64,
) -> Result<Samples, Error> {
    if count == 0 {
        return Err(Error::BadParameter("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cert {
        Certificate::Arrangement(arr) => {
            arr.verify()?;
            let instance = arr.instance()?;
            let (m, n) = (instance.rows(), instance.cols());
            let rows: Vec<Vec<Rational>> = (0..count)
                .map(|_| {
                    let u = rng.gen_range(0..m);
                    (0..n)
                        .map(|j| instance.get(arr.perms.perms()[j][u], j).clone())
                        .collect()
                })
                .collect();
            let marginals: Vec<DiscreteDistribution> = (0..n)
                .map(|j| {
                    let pts: Vec<Rational> = (0..m).map(|i| instance.get(i, j).clone()).collect();
                    DiscreteDistribution::new(pts.clone(), vec![rat_int(1); pts.len()])
                })
                .collect::<Result<_, _>>()?;
            let ks = discrete_ks(&rows, &marginals);
            Ok(Samples {
                values: SampleValues::Exact(rows),
                coords: n,
                ks,
            })
        }
        Certificate::JointPmf(pmf) => {
            let support = pmf.support_rational()?;
            let masses = pmf.masses_rational()?;
            if support.is_empty() {
                return Err(Error::InvalidCertificate("empty joint pmf".into()));
            }
            let total: Rational = masses.iter().cloned().sum();
            if !total.is_one() || masses.iter().any(|m| m < &Rational::zero()) {
                return Err(Error::InvalidCertificate("masses must be a probability vector".into()));
            }
            let n = support[0].len();
            for pt in &support {
                if pt.len() != n || pt.iter().sum::<Rational>() != pmf.center {
                    return Err(Error::InvalidCertificate("support point off the hyperplane".into()));
                }
            }
            let rows: Vec<Vec<Rational>> = (0..count)
                .map(|_| {
                    let u = rat_from_f64(rng.gen::<f64>()).expect("finite");
                    let mut cum = Rational::zero();
                    for (pt, mass) in support.iter().zip(&masses) {
                        cum += mass;
                        if cum > u {
                            return pt.clone();
                        }
                    }
                    support.last().expect("nonempty").clone()
                })
                .collect();
            let marginals: Vec<DiscreteDistribution> = (0..n)
                .map(|i| {
                    let pts: Vec<Rational> = support.iter().map(|pt| pt[i].clone()).collect();
                    DiscreteDistribution::new(pts, masses.clone())
                })
                .collect::<Result<_, _>>()?;
            let ks = discrete_ks(&rows, &marginals);
            Ok(Samples {
                values: SampleValues::Exact(rows),
                coords: n,
                ks,
            })
        }
        Certificate::BlockMixture(mixture) => {
            mixture.verify()?;
            let n = mixture.blocks[0].values.len();
            let blocks: Vec<(Vec<Rational>, Rational)> = mixture
                .blocks
                .iter()
                .map(|b| Ok((b.values_rational()?, b.weight_rational()?)))
                .collect::<Result<_, Error>>()?;
            let rows: Vec<Vec<Rational>> = (0..count)
                .map(|_| {
                    let u = rat_from_f64(rng.gen::<f64>()).expect("finite");
                    let mut cum = Rational::zero();
                    let mut chosen = &blocks[blocks.len() - 1].0;
                    for (values, weight) in &blocks {
                        cum += weight;
                        if cum > u {
                            chosen = values;
                            break;
                        }
                    }
                    // exchangeable coupling: uniform shuffle within the block
                    let mut row = chosen.clone();
                    for i in (1..row.len()).rev() {
                        let j = rng.gen_range(0..=i);
                        row.swap(i, j);
                    }
                    row
                })
                .collect();
            let marginal = mixture.remarginalize()?;
            let marginals = vec![marginal; n];
            let ks = discrete_ks(&rows, &marginals);
            Ok(Samples {
                values: SampleValues::Exact(rows),
                coords: n,
                ks,
            })
        }
        Certificate::Gaussian(cert) => {
            cert.verify()?;
            let n = cert.dim();
            // Deflate the sigma direction out of the correlation before
            // factorizing, so row sums are constant to machine precision.
            let sigma = nalgebra::DVector::from_column_slice(&cert.sigmas);
            let norm_sq = sigma.dot(&sigma);
            let p = DMatrix::identity(n, n) - &sigma * sigma.transpose() / norm_sq;
            let deflated = &p * cert.corr_matrix() * &p;
            let eig = nalgebra::SymmetricEigen::new(deflated);
            // Eigenvalues that are zero in exact arithmetic come back as
            // rounding dust; square-rooting that dust would leak O(1e-8)
            // noise into the constant-sum direction, so threshold first.
            let max_eig = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let floor = 1e-12 * max_eig.max(1.0);
            let root = nalgebra::DVector::from_iterator(
                n,
                eig.eigenvalues.iter().map(|&l| if l < floor { 0.0 } else { l.sqrt() }),
            );
            // re-project so every factor column is orthogonal to sigma
            let l = &p * (&eig.eigenvectors * DMatrix::from_diagonal(&root));
            let mut rows = Vec::with_capacity(count);
            for _ in 0..count {
                let xi = nalgebra::DVector::from_iterator(n, (0..n).map(|_| box_muller(&mut rng)));
                let z = &l * xi;
                let row: Vec<f64> = (0..n)
                    .map(|i| cert.mus[i] + cert.sigmas[i] * z[i])
                    .collect();
                rows.push(row);
            }
            let ks = gaussian_ks(&rows, cert);
            Ok(Samples {
                values: SampleValues::Float(rows),
                coords: n,
                ks,
            })
        }
        Certificate::Dual(_) => Err(Error::InvalidCertificate(
            "dual certificates witness non-mixability; nothing to sample".into(),
        )),
    }
}

fn box_muller<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn discrete_ks(rows: &[Vec<Rational>], marginals: &[DiscreteDistribution]) -> Vec<MarginalKsFlag> {
    let count = rows.len();
    let threshold = 2.0 / (count as f64).sqrt();
    marginals
        .iter()
        .enumerate()
        .map(|(i, marginal)| {
            let mut stat = 0.0f64;
            let mut cum = Rational::zero();
            for (point, weight) in marginal.points().iter().zip(marginal.weights()) {
                cum += weight;
                let emp = rows.iter().filter(|r| &r[i] <= point).count() as f64 / count as f64;
                stat = stat.max((emp - rat_to_f64(&cum)).abs());
            }
            MarginalKsFlag {
                marginal: i,
                statistic: stat,
                threshold,
                flagged: stat > threshold,
            }
        })
        .collect()
}

fn gaussian_ks(rows: &[Vec<f64>], cert: &GaussianMixCertificate) -> Vec<MarginalKsFlag> {
    let count = rows.len();
    let threshold = 2.0 / (count as f64).sqrt();
    (0..cert.dim())
        .map(|i| {
            let mut xs: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            xs.sort_by(f64::total_cmp);
            let mut stat = 0.0f64;
            for (k, &x) in xs.iter().enumerate() {
                let f = if cert.sigmas[i] == 0.0 {
                    if x >= cert.mus[i] {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    normal_cdf((x - cert.mus[i]) / cert.sigmas[i])
                };
                let hi = (k + 1) as f64 / count as f64;
                let lo = k as f64 / count as f64;
                stat = stat.max((f - lo).abs()).max((hi - f).abs());
            }
            MarginalKsFlag {
                marginal: i,
                statistic: stat,
                threshold,
                flagged: stat > threshold,
            }
        })
        .collect()
}

/// Standard normal cdf, accurate to about 1e-7 (diagnostics only).
fn normal_cdf(z: f64) -> f64 {
    // Abramowitz & Stegun 7.1.26 on the half-line
    let x = z.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let erf = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    let phi = 0.5 * (1.0 + erf);
    if z >= 0.0 {
        phi
    } else {
        1.0 - phi
    }
}
