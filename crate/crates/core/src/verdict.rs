use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of a sufficient test. A test that fails proves nothing, so
/// there is no "unschedulable" outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Schedulable,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Hyperbolic product bound.
    Hyperbolic,
    /// Total-utilization bound.
    Capacity,
    /// Logarithmic utilization bound.
    LogUtilization,
    /// Per-task coefficient bound.
    General,
    /// Direct evaluation of the k-point inequality.
    KPoint,
    /// Pseudo-polynomial time-demand analysis.
    Tda,
    /// TDMA closed form with the segmented service curve.
    TdmaSegmented,
    /// TDMA closed form with the bounded-delay service curve.
    TdmaBoundedDelay,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Hyperbolic => "hyperbolic",
            TestKind::Capacity => "capacity",
            TestKind::LogUtilization => "log_utilization",
            TestKind::General => "general",
            TestKind::KPoint => "kpoint",
            TestKind::Tda => "tda",
            TestKind::TdmaSegmented => "tdma_segmented",
            TestKind::TdmaBoundedDelay => "tdma_bounded_delay",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The test point at which a point-wise test was satisfied (or came
/// closest). `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub time: f64,
}

/// Result of one test, together with the two sides of the deciding
/// inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub test: TestKind,
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

impl TestVerdict {
    pub(crate) fn closed_form(test: TestKind, lhs: f64, rhs: f64) -> Self {
        let verdict = if lhs <= rhs {
            Verdict::Schedulable
        } else {
            Verdict::Unknown
        };
        TestVerdict {
            test,
            verdict,
            lhs,
            rhs,
            witness: None,
        }
    }

    pub fn unknown(test: TestKind) -> Self {
        TestVerdict {
            test,
            verdict: Verdict::Unknown,
            lhs: f64::INFINITY,
            rhs: 0.0,
            witness: None,
        }
    }

    pub fn is_schedulable(&self) -> bool {
        self.verdict == Verdict::Schedulable
    }

    /// `rhs - lhs`; non-negative exactly when the test accepted.
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}
