//! Command dispatch and machine-readable reports with stable exit codes.

use serde::Serialize;
use sha2::{Digest, Sha256};

use mixkit::construct::{self, GaussianOutcome, SampleValues};
use mixkit::criteria::{self, NormCheckParams};
use mixkit::distributions::{DiscreteDistribution, DistributionSpec};
use mixkit::error::{Budget, Error};
use mixkit::lpcert;
use mixkit::numeric::{parse_decimal, ratjson, Entry, Tolerance};
use mixkit::rearrange::{self, ObjectiveKind, SolveResult};
use mixkit::riskbounds;
use mixkit::verdict::{Certificate, Status, Verdict};

use crate::io;
use crate::{Cli, Command};

#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 3,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::BudgetExceeded { .. } => 4,
            Error::BadParameter(_) | Error::BadProbability(_) => 3,
            _ => 5,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

#[derive(Serialize)]
struct Report {
    command: String,
    version: &'static str,
    digest: String,
    seed: u64,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
    result: serde_json::Value,
}

fn digest_bytes(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Mixable => 0,
        Status::NotMixable => 1,
        Status::Unknown => 2,
    }
}

fn all_discrete(specs: &[DistributionSpec]) -> Option<Vec<DiscreteDistribution>> {
    specs
        .iter()
        .map(|s| match s {
            DistributionSpec::Discrete(d) => Some(d.clone()),
            _ => None,
        })
        .collect()
}

/// Re-validates an emitted certificate through the matching verifier.
fn verify_verdict(
    verdict: &Verdict,
    specs: Option<&[DistributionSpec]>,
    budget: &Budget,
) -> Result<(), Error> {
    let Some(cert) = verdict.certificate.as_deref() else {
        return Ok(());
    };
    match cert {
        Certificate::Arrangement(c) => c.verify(),
        Certificate::Gaussian(c) => c.verify(),
        Certificate::BlockMixture(m) => m.verify(),
        Certificate::JointPmf(pmf) => {
            let discretes = specs
                .and_then(all_discrete)
                .ok_or_else(|| Error::InvalidCertificate("no marginals to verify against".into()))?;
            lpcert::verify_primal(&discretes, pmf)
        }
        Certificate::Dual(d) => {
            let discretes = specs
                .and_then(all_discrete)
                .ok_or_else(|| Error::InvalidCertificate("no marginals to verify against".into()))?;
            lpcert::verify_dual(&discretes, d, &d.center, budget)
        }
    }
}

fn solve_result_json<E: Entry>(r: &SolveResult<E>, exact: bool) -> serde_json::Value {
    let objective = match r.objective {
        ObjectiveKind::Minimax => "minimax",
        ObjectiveKind::Range => "range",
        ObjectiveKind::Variance => "variance",
    };
    let mut out = serde_json::json!({
        "objective": objective,
        "T": r.value.to_f64(),
        "lower_bound": r.lower_bound.to_f64(),
        "exact_mix": r.exact_mix,
        "row_sums": r.row_sums.iter().map(Entry::to_f64).collect::<Vec<f64>>(),
        "perms": serde_json::to_value(&r.arrangement).expect("serializable"),
    });
    if exact {
        // exact mirrors for rational solves
        if let Some(t) = r.value.to_exact() {
            out["T_exact"] = ratjson::to_value(&t);
        }
        if let Some(lb) = r.lower_bound.to_exact() {
            out["lower_bound_exact"] = ratjson::to_value(&lb);
        }
    }
    out
}

fn spec_mode(specs: &[DistributionSpec], force_float: bool) -> &'static str {
    if !force_float && specs.iter().all(DistributionSpec::is_exact) {
        "rational"
    } else {
        "float"
    }
}

fn require_exact(specs: &[DistributionSpec]) -> Result<(), CliError> {
    if let Some(bad) = specs.iter().find(|s| !s.is_exact()) {
        return Err(CliError::usage(format!(
            "--rational requested but a {} spec has no exact quantiles",
            bad.kind()
        )));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let started = std::time::Instant::now();
    let tol = cli.global.tolerance();
    let budget = cli.global.budget();
    let seed = cli.global.seed;

    let (result, digest, mode, code) = dispatch(cli, tol, &budget, seed)?;

    let report = Report {
        command: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
        version: env!("CARGO_PKG_VERSION"),
        digest,
        seed,
        mode,
        timing_ms: cli.global.timing.then(|| started.elapsed().as_millis()),
        result,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(code)
}

type Dispatched = (serde_json::Value, String, &'static str, u8);

fn dispatch(cli: &Cli, tol: Tolerance, budget: &Budget, seed: u64) -> Result<Dispatched, CliError> {
    match &cli.command {
        Command::Check { specs, n, p_grid, t_grid } => {
            let (specs, bytes) = io::parse_spec_file(specs)?;
            if cli.global.rational {
                require_exact(&specs)?;
            }
            let norms = NormCheckParams {
                p_grid: p_grid.as_deref().map(io::parse_norm_list).transpose()?,
                t_grid: t_grid.as_deref().map(io::parse_rational_list).transpose()?,
                splits: None,
            };
            let verdict = criteria::decide_with_norms(&specs, *n, budget, tol, &norms)?;
            if cli.global.verify {
                verify_verdict(&verdict, Some(&specs), budget)?;
            }
            let code = status_code(verdict.status);
            Ok((
                serde_json::to_value(&verdict).expect("serializable"),
                digest_bytes(&bytes),
                spec_mode(&specs, cli.global.float),
                code,
            ))
        }
        Command::Solve { matrix, objective, restarts, exact } => {
            let (rows, bytes) = io::parse_matrix_file(matrix)?;
            let objective: ObjectiveKind = (*objective).into();
            let result = if *exact {
                let instance = rearrange::MatrixInstance::from_rows(rows)?;
                let solved = rearrange::local_search(&instance, objective, *restarts, seed, tol)?;
                solve_result_json(&solved, true)
            } else {
                let instance = io::to_f64_instance(&rows)?;
                let solved = rearrange::local_search(&instance, objective, *restarts, seed, tol)?;
                solve_result_json(&solved, false)
            };
            let mode = if *exact { "rational" } else { "float" };
            Ok((result, digest_bytes(&bytes), mode, 0))
        }
        Command::Oracle { matrix, objective } => {
            let (rows, bytes) = io::parse_matrix_file(matrix)?;
            let instance = rearrange::MatrixInstance::from_rows(rows)?;
            let solved = rearrange::brute_force(&instance, (*objective).into(), budget, tol)?;
            Ok((
                solve_result_json(&solved, true),
                digest_bytes(&bytes),
                "rational",
                0,
            ))
        }
        Command::DecideLp { specs, k } => {
            let (specs, bytes) = io::parse_spec_file(specs)?;
            let Some(discretes) = all_discrete(&specs) else {
                return Err(CliError::usage(
                    "decide-lp needs finite discrete marginals; use `check` for analytic specs",
                ));
            };
            let center = k.as_deref().map(parse_decimal).transpose()?;
            let verdict = lpcert::jm_lp_decide(&discretes, center, budget)?;
            if cli.global.verify {
                verify_verdict(&verdict, Some(&specs), budget)?;
            }
            let code = status_code(verdict.status);
            Ok((
                serde_json::to_value(&verdict).expect("serializable"),
                digest_bytes(&bytes),
                "rational",
                code,
            ))
        }
        Command::Decompose { specs, n } => {
            let (specs, bytes) = io::parse_spec_file(specs)?;
            let [DistributionSpec::Discrete(d)] = specs.as_slice() else {
                return Err(CliError::usage(
                    "decompose needs exactly one discrete marginal",
                ));
            };
            let verdict = construct::discrete_cm_decompose(d, *n, budget, tol)?;
            if cli.global.verify {
                verify_verdict(&verdict, Some(&specs), budget)?;
            }
            let code = status_code(verdict.status);
            Ok((
                serde_json::to_value(&verdict).expect("serializable"),
                digest_bytes(&bytes),
                "rational",
                code,
            ))
        }
        Command::GaussianMix { sigmas, mus } => {
            let sigmas = io::parse_f64_list(sigmas)?;
            let mus = match mus {
                Some(m) => io::parse_f64_list(m)?,
                None => vec![0.0; sigmas.len()],
            };
            let digest = digest_bytes(format!("sigmas={sigmas:?};mus={mus:?}").as_bytes());
            let verdict = match construct::gaussian_joint_mix(&mus, &sigmas)? {
                GaussianOutcome::Certificate(cert) => {
                    cert.verify()?;
                    Verdict::mixable("gaussian_projection")
                        .with_certificate(Certificate::Gaussian(cert))
                }
                GaussianOutcome::NotMixable => Verdict::not_mixable("elliptical_variance_iff"),
                GaussianOutcome::Unknown(diag) => {
                    Verdict::unknown("projection_stalled").with_diagnostic(diag)
                }
            };
            let code = status_code(verdict.status);
            Ok((
                serde_json::to_value(&verdict).expect("serializable"),
                digest,
                "float",
                code,
            ))
        }
        Command::Sample { cert, count, out } => {
            let bytes = std::fs::read(cert)
                .map_err(|e| Error::Schema(format!("cannot read {cert}: {e}")))?;
            let value: serde_json::Value = serde_json::from_slice(&bytes)
                .map_err(|e| Error::Schema(format!("certificate: {e}")))?;
            let cert_value = value.get("certificate").cloned().unwrap_or(value);
            let certificate: Certificate = serde_json::from_value(cert_value)
                .map_err(|e| Error::Schema(format!("certificate: {e}")))?;
            let samples = construct::sample_joint_mix(&certificate, *count, seed)?;
            let mut result = serde_json::json!({
                "count": count,
                "coords": samples.coords,
                "ks": serde_json::to_value(&samples.ks).expect("serializable"),
            });
            match out {
                Some(path) => {
                    write_samples_csv(path, &samples)?;
                    result["out"] = serde_json::Value::from(path.clone());
                }
                None => {
                    let rows: Vec<Vec<f64>> = (0..samples.values.len())
                        .map(|r| samples.values.row_f64(r))
                        .collect();
                    result["samples"] = serde_json::to_value(rows).expect("serializable");
                }
            }
            let mode = match samples.values {
                SampleValues::Exact(_) => "rational",
                SampleValues::Float(_) => "float",
            };
            Ok((result, digest_bytes(&bytes), mode, 0))
        }
        Command::VarBounds { specs, p, n_points, restarts, side } => {
            let (specs, bytes) = io::parse_spec_file(specs)?;
            let p = parse_decimal(p)?;
            let report = riskbounds::var_bounds(
                &specs,
                &p,
                *n_points,
                *restarts,
                seed,
                (*side).into(),
                budget,
                tol,
            )?;
            Ok((
                serde_json::to_value(&report).expect("serializable"),
                digest_bytes(&bytes),
                spec_mode(&specs, cli.global.float),
                0,
            ))
        }
    }
}

// build in memory, then write-and-rename so readers never see partial files
fn write_samples_csv(path: &str, samples: &construct::Samples) -> Result<(), Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (1..=samples.coords).map(|i| format!("x{i}")).collect();
    writer
        .write_record(&header)
        .map_err(|e| Error::Schema(format!("csv write: {e}")))?;
    for r in 0..samples.values.len() {
        let row: Vec<String> = samples
            .values
            .row_f64(r)
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        writer
            .write_record(&row)
            .map_err(|e| Error::Schema(format!("csv write: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Schema(format!("csv write: {e}")))?;
    let tmp = format!("{path}.tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::Schema(format!("cannot write {tmp}: {e}")))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::Schema(format!("cannot move {tmp} into place: {e}")))?;
    Ok(())
}
