//! End-to-end analysis of one task: reduce the service curve, pick the
//! derivation that matches the interference model, run every polynomial
//! test on the derived parameters, and run the exact oracle on the
//! original problem.

use serde::{Deserialize, Serialize};

use crate::bounds::{capacity_test, evaluate_kpoint, general_test, hyperbolic_test, log_utilization_test, KPointParams};
use crate::derive::{
    derive_constant_inflation, derive_independent_jitter, derive_uniform_jitter,
    derive_uniform_jitter_refined, inflation_closed_forms, SplitRule,
};
use crate::numeric::snap_integer;
use crate::oracle::{tda_accepts, GeneralizedTest};
use crate::presets::{build_problem, Preset, PresetConfig};
use crate::service::{reduce_bounded_delay, reduce_segmented, ServiceCurve};
use crate::task::{AnalysisProblem, JitterModel, Task};
use crate::{Error, Result, TestVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    None,
    Segmented,
    BoundedDelay,
    /// Bounded-delay service starts at or after the deadline.
    EmptyWindow,
    /// Exact TDMA supply has no polynomial reduction.
    OracleOnly,
}

impl Reduction {
    pub fn name(self) -> &'static str {
        match self {
            Reduction::None => "none",
            Reduction::Segmented => "segmented",
            Reduction::BoundedDelay => "bounded_delay",
            Reduction::EmptyWindow => "empty_window",
            Reduction::OracleOnly => "oracle_only",
        }
    }
}

/// Replaces a non-identity service curve by the equivalent
/// constant-inflation problem. `None` means no polynomial test applies.
pub fn reduce(problem: &AnalysisProblem) -> Result<(Reduction, Option<AnalysisProblem>)> {
    problem.validate()?;
    match problem.service {
        ServiceCurve::Identity => Ok((Reduction::None, Some(problem.clone()))),
        ServiceCurve::Segmented { .. } => Ok((Reduction::Segmented, Some(reduce_segmented(problem)?))),
        ServiceCurve::BoundedDelay { .. } => match reduce_bounded_delay(problem)? {
            Some(p) => Ok((Reduction::BoundedDelay, Some(p))),
            None => Ok((Reduction::EmptyWindow, None)),
        },
        ServiceCurve::ExactTdma { .. } => Ok((Reduction::OracleOnly, None)),
    }
}

/// Derives k-point parameters for an identity-service problem, choosing
/// the derivation from its jitter model. Uniform jitter yields two
/// parameter sets (plain and refined split); an integral `delta` is plain
/// constant inflation with `b = delta`.
pub fn derive_params(problem: &AnalysisProblem) -> Result<Vec<KPointParams>> {
    match problem.jitter {
        JitterModel::None => Ok(vec![derive_constant_inflation(problem)?]),
        JitterModel::Uniform { delta } => {
            if let Some(whole) = snap_integer(delta) {
                if problem.inflation > 0.0 {
                    return Err(Error::InflationWithJitter(problem.inflation));
                }
                let mut inflated = problem.clone();
                inflated.jitter = JitterModel::None;
                inflated.inflation = whole;
                Ok(vec![derive_constant_inflation(&inflated)?])
            } else {
                Ok(vec![
                    derive_uniform_jitter(problem, delta)?,
                    derive_uniform_jitter_refined(problem, delta)?,
                ])
            }
        }
        JitterModel::Independent => Ok(vec![derive_independent_jitter(problem)?]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationReport {
    pub rule: SplitRule,
    pub params: KPointParams,
    pub verdicts: Vec<TestVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub reduction: Reduction,
    pub derivations: Vec<DerivationReport>,
    pub tda: TestVerdict,
}

impl ProblemReport {
    /// Every verdict with a display name: the plain test name for the
    /// first derivation, suffixed with `_refined` for the refined jitter
    /// split, and `tda` last.
    pub fn named_verdicts(&self) -> Vec<(String, &TestVerdict)> {
        let mut out = Vec::new();
        for d in &self.derivations {
            let suffix = if d.rule == SplitRule::JitterCeilingRefined {
                "_refined"
            } else {
                ""
            };
            for v in &d.verdicts {
                out.push((format!("{}{suffix}", v.test.name()), v));
            }
        }
        out.push(("tda".to_string(), &self.tda));
        out
    }

    /// True if some polynomial test accepted while the oracle did not.
    pub fn soundness_violation(&self) -> bool {
        !self.tda.is_schedulable()
            && self
                .derivations
                .iter()
                .flat_map(|d| &d.verdicts)
                .any(TestVerdict::is_schedulable)
    }
}

fn run_tests(params: &KPointParams, rule: SplitRule, reduced: &AnalysisProblem) -> Result<Vec<TestVerdict>> {
    let (alpha, beta) = params.uniform_bounds();
    let (hyperbolic, log) = if rule == SplitRule::PeriodVsDeadline {
        // the integral-delta route carries its inflation in the params' caps
        let b = params.caps.map_or(reduced.inflation, |c| c.alpha / reduced.sigma - 1.0);
        let b = snap_integer(b).unwrap_or(b);
        inflation_closed_forms(params, reduced.sigma, b)
    } else {
        (hyperbolic_test(params, alpha, beta)?, log_utilization_test(params, alpha, beta)?)
    };
    Ok(vec![
        hyperbolic,
        log,
        capacity_test(params, alpha, beta)?,
        general_test(params)?,
        evaluate_kpoint(params)?,
    ])
}

/// Runs every applicable test on `problem`.
pub fn analyze(problem: &AnalysisProblem) -> Result<ProblemReport> {
    let tda = tda_accepts(&GeneralizedTest::from_problem(problem)?);
    let (reduction, reduced) = reduce(problem)?;
    let mut derivations = Vec::new();
    if let Some(reduced) = reduced {
        for params in derive_params(&reduced)? {
            let rule = params.split.as_ref().map(|s| s.rule).expect("derived params carry a split");
            let verdicts = run_tests(&params, rule, &reduced)?;
            derivations.push(DerivationReport { rule, params, verdicts });
        }
    }
    Ok(ProblemReport {
        reduction,
        derivations,
        tda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task_id: String,
    pub report: ProblemReport,
}

/// Analyzes every task of a priority-ordered task set under `preset`.
pub fn analyze_taskset(tasks: &[Task], preset: Preset, config: &PresetConfig) -> Result<Vec<TaskReport>> {
    if tasks.is_empty() {
        return Err(Error::EmptyTaskSet);
    }
    (0..tasks.len())
        .map(|k| {
            let problem = build_problem(preset, config, tasks, k)?;
            Ok(TaskReport {
                task_id: tasks[k].id().to_string(),
                report: analyze(&problem)?,
            })
        })
        .collect()
}
