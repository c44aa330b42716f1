//! Pseudo-polynomial time-demand analysis.
//!
//! Evaluates the original (unreduced) test
//!
//! ```text
//! exists 0 < t <= horizon :  C + sum_i sigma_i * (ceil((t + J_i) / T_i) + b_i) * C_i <= A(t)
//! ```
//!
//! at every point where it can change from false to true. This is the
//! ground truth for all polynomial tests in the crate. Acceptance is
//! granted an absolute slack of [`ORACLE_TOLERANCE`] so that the oracle
//! errs towards accepting; the polynomial tests get no slack.

use serde::{Deserialize, Serialize};

use crate::numeric::{ceil_ratio, floor_ratio, ORACLE_TOLERANCE};
use crate::service::ServiceCurve;
use crate::task::{AnalysisProblem, JitterModel, Task};
use crate::{Error, Result, TestKind, TestVerdict, Verdict, Witness};

/// Interference of one higher-priority task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandTerm {
    pub wcet: f64,
    pub period: f64,
    pub jitter: f64,
    pub inflation: f64,
    pub sigma: f64,
}

impl DemandTerm {
    pub fn plain(wcet: f64, period: f64) -> Self {
        DemandTerm {
            wcet,
            period,
            jitter: 0.0,
            inflation: 0.0,
            sigma: 1.0,
        }
    }

    /// `sigma * (ceil((t + J) / T) + b) * C`
    pub fn demand(&self, t: f64) -> f64 {
        self.sigma * (ceil_ratio(t + self.jitter, self.period) * self.wcet + self.inflation * self.wcet)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedTest {
    pub c_k_eff: f64,
    pub terms: Vec<DemandTerm>,
    pub service: ServiceCurve,
    pub horizon: f64,
}

impl GeneralizedTest {
    /// The exact test an [`AnalysisProblem`] stands for, before any
    /// reduction or parameter derivation.
    pub fn from_problem(problem: &AnalysisProblem) -> Result<Self> {
        problem.validate()?;
        let jitter_of = |task: &Task| -> Result<f64> {
            match problem.jitter {
                JitterModel::None => Ok(0.0),
                JitterModel::Uniform { delta } => Ok(delta * task.period()),
                JitterModel::Independent => task
                    .jitter()
                    .ok_or_else(|| Error::MissingJitter(task.id().to_string())),
            }
        };
        let terms = problem
            .hp
            .iter()
            .map(|task| {
                Ok(DemandTerm {
                    wcet: task.wcet(),
                    period: task.period(),
                    jitter: jitter_of(task)?,
                    inflation: problem.inflation_of(task),
                    sigma: problem.sigma,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let test = GeneralizedTest {
            c_k_eff: problem.base_wcet(),
            terms,
            service: problem.service,
            horizon: problem.task_k.deadline(),
        };
        test.validate()?;
        Ok(test)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidProblem(msg));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return invalid(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.c_k_eff.is_finite() && self.c_k_eff >= 0.0) {
            return invalid(format!("C_k must be non-negative, got {}", self.c_k_eff));
        }
        for term in &self.terms {
            let ok = term.wcet.is_finite()
                && term.wcet >= 0.0
                && term.period.is_finite()
                && term.period > 0.0
                && term.jitter.is_finite()
                && term.jitter >= 0.0
                && term.inflation.is_finite()
                && term.inflation >= 0.0
                && term.sigma.is_finite()
                && term.sigma > 0.0;
            if !ok {
                return invalid(format!("invalid demand term {term:?}"));
            }
        }
        self.service.validate()
    }

    /// Total demand of the task under analysis plus interference in a window of length `t`.
    pub fn demand(&self, t: f64) -> f64 {
        self.c_k_eff + self.terms.iter().map(|term| term.demand(t)).sum::<f64>()
    }

    /// Points `m T_i - J_i` in `(0, horizon]`, the cycle boundaries of
    /// periodic service curves, and the horizon itself; ascending, without
    /// duplicates.
    ///
    /// Each interference term is a left-continuous step function that jumps
    /// right after `m T_i - J_i`, and every supported service curve is
    /// non-decreasing between cycle boundaries, so the slack
    /// `A(t) - demand(t)` is maximal on each piece at these right ends.
    pub fn candidate_points(&self) -> Vec<f64> {
        let horizon = self.horizon;
        let mut points = Vec::new();
        for term in &self.terms {
            let first = (floor_ratio(term.jitter, term.period) + 1.0).max(1.0);
            let mut m = first;
            loop {
                let p = m * term.period - term.jitter;
                if p > horizon {
                    break;
                }
                if p > 0.0 {
                    points.push(p);
                }
                m += 1.0;
            }
        }
        if let Some(cycle) = self.service.cycle() {
            let mut m = 1.0;
            while m * cycle <= horizon {
                points.push(m * cycle);
                m += 1.0;
            }
        }
        points.push(horizon);
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

/// Candidate points of `test`; see [`GeneralizedTest::candidate_points`].
pub fn candidate_points(test: &GeneralizedTest) -> Vec<f64> {
    test.candidate_points()
}

/// Exact time-demand analysis. Accepts at the first candidate point `t`
/// with `demand(t) <= A(t) + ORACLE_TOLERANCE`.
pub fn tda_accepts(test: &GeneralizedTest) -> TestVerdict {
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for (i, t) in test.candidate_points().into_iter().enumerate() {
        let demand = test.demand(t);
        let supply = test.service.value_unchecked(t);
        if demand <= supply + ORACLE_TOLERANCE {
            return TestVerdict {
                test: TestKind::Tda,
                verdict: Verdict::Schedulable,
                lhs: demand,
                rhs: supply,
                witness: Some(Witness { index: i + 1, time: t }),
            };
        }
        if best.is_none_or(|(_, _, d, s)| supply - demand > s - d) {
            best = Some((i, t, demand, supply));
        }
    }
    let (i, t, demand, supply) = best.expect("horizon is always a candidate");
    TestVerdict {
        test: TestKind::Tda,
        verdict: Verdict::Unknown,
        lhs: demand,
        rhs: supply,
        witness: Some(Witness { index: i + 1, time: t }),
    }
}

/// Outcome of the response-time iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseTime {
    Converged(f64),
    /// The iterate exceeded the horizon.
    Diverged,
}

/// Least fixed point of `R = C_k + sum_i ceil(R / T_i) C_i`, iterated from
/// `R = C_k`. Plain uniprocessor interference only.
pub fn wcrt_fixed_point(c_k: f64, hp: &[Task], horizon: f64) -> ResponseTime {
    let mut r = c_k;
    loop {
        if r > horizon + ORACLE_TOLERANCE {
            return ResponseTime::Diverged;
        }
        let next = c_k
            + hp.iter()
                .map(|t| ceil_ratio(r, t.period()) * t.wcet())
                .sum::<f64>();
        if (next - r).abs() <= ORACLE_TOLERANCE {
            return ResponseTime::Converged(next);
        }
        r = next;
    }
}
