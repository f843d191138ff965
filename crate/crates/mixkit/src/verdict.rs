//! Three-valued mixability verdicts with machine-checkable certificates.

use serde::{Deserialize, Serialize};

use crate::construct::{GaussianMixCertificate, UniformBlockMixture};
use crate::lpcert::{DualCertificate, JointPmf};
use crate::rearrange::ArrangementCertificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Mixable,
    NotMixable,
    Unknown,
}

/// Constructive or refuting evidence attached to a verdict. Every variant
/// re-validates through the corresponding verifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    JointPmf(JointPmf),
    Dual(DualCertificate),
    Arrangement(ArrangementCertificate),
    BlockMixture(UniformBlockMixture),
    Gaussian(GaussianMixCertificate),
}

/// Outcome of a mixability decision. `Mixable` only ever comes from a
/// sufficient condition or a constructive witness; `NotMixable` only from a
/// violated necessary condition or a dual witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    /// Stable identifier of the condition that decided the instance.
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Box<Certificate>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

impl Verdict {
    pub fn mixable(reason: &str) -> Self {
        Verdict {
            status: Status::Mixable,
            reason: reason.to_string(),
            certificate: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn not_mixable(reason: &str) -> Self {
        Verdict {
            status: Status::NotMixable,
            reason: reason.to_string(),
            certificate: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn unknown(reason: &str) -> Self {
        Verdict {
            status: Status::Unknown,
            reason: reason.to_string(),
            certificate: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn with_certificate(mut self, cert: Certificate) -> Self {
        self.certificate = Some(Box::new(cert));
        self
    }

    pub fn with_diagnostic(mut self, d: impl Into<String>) -> Self {
        self.diagnostics.push(d.into());
        self
    }
}
