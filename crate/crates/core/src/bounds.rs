//! k-point effective tests and the closed-form conditions that follow from
//! them.
//!
//! A k-point test for task `k` checks whether for some `j in 1..=k`
//!
//! ```text
//! C_k + sum_{i<k} alpha_i * t_i * U_i + sum_{i<j} beta_i * t_i * U_i <= t_j
//! ```
//!
//! Given uniform bounds `alpha >= alpha_i` and `beta >= beta_i`, the
//! hyperbolic, capacity and logarithmic bounds below are sufficient for
//! that condition; [`general_test`] uses the per-task coefficients
//! directly.

use serde::{Deserialize, Serialize};

use crate::derive::SplitRecord;
use crate::{Error, Result, TestKind, TestVerdict, Verdict, Witness};

/// Test point and coefficients contributed by one higher-priority task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPointEntry {
    pub task_id: String,
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub utilization: f64,
}

impl KPointEntry {
    pub fn new(task_id: impl Into<String>, t: f64, alpha: f64, beta: f64, utilization: f64) -> Self {
        KPointEntry {
            task_id: task_id.into(),
            t,
            alpha,
            beta,
            utilization,
        }
    }
}

/// Upper bounds on every `alpha_i` and `beta_i` guaranteed by a derivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCaps {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPointParams {
    pub t_k: f64,
    /// `C_k` after absorbing the constant interference of hp2 tasks.
    pub c_k_eff: f64,
    /// Sorted by non-decreasing `t`.
    pub entries: Vec<KPointEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<CoefficientCaps>,
}

impl KPointParams {
    pub fn new(t_k: f64, c_k_eff: f64, entries: Vec<KPointEntry>) -> Self {
        KPointParams {
            t_k,
            c_k_eff,
            entries,
            split: None,
            caps: None,
        }
    }

    /// Number of test points, including `t_k`.
    pub fn k(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn hp2_ids(&self) -> &[String] {
        self.split.as_ref().map_or(&[], |s| s.hp2.as_slice())
    }

    pub fn total_utilization(&self) -> f64 {
        self.entries.iter().map(|e| e.utilization).sum()
    }

    /// `C_k_eff / t_k`
    pub fn wcet_ratio(&self) -> f64 {
        self.c_k_eff / self.t_k
    }

    /// Smallest uniform `(alpha, beta)` admissible for the closed-form bounds:
    /// the derivation's caps if recorded, otherwise the per-task maxima.
    /// With no entries any positive pair works; `(1, 1)` is returned.
    pub fn uniform_bounds(&self) -> (f64, f64) {
        if let Some(caps) = self.caps {
            return (caps.alpha, caps.beta);
        }
        if self.entries.is_empty() {
            return (1.0, 1.0);
        }
        let alpha = self.entries.iter().map(|e| e.alpha).fold(f64::MIN, f64::max);
        let beta = self.entries.iter().map(|e| e.beta).fold(f64::MIN, f64::max);
        (alpha, beta)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.t_k.is_finite() && self.t_k > 0.0) {
            return invalid(format!("t_k must be positive, got {}", self.t_k));
        }
        if !(self.c_k_eff.is_finite() && self.c_k_eff > 0.0) {
            return invalid(format!("C_k must be positive, got {}", self.c_k_eff));
        }
        let mut prev = 0.0;
        for e in &self.entries {
            for (name, v) in [("alpha", e.alpha), ("beta", e.beta), ("U", e.utilization)] {
                if !(v.is_finite() && v > 0.0) {
                    return invalid(format!("{name} of `{}` must be positive, got {v}", e.task_id));
                }
            }
            if !(e.t.is_finite() && e.t > 0.0) {
                return invalid(format!("t of `{}` must be positive, got {}", e.task_id, e.t));
            }
            if e.t < prev {
                return Err(Error::IndexOrderViolated(format!(
                    "t of `{}` = {} precedes {prev}",
                    e.task_id, e.t
                )));
            }
            prev = e.t;
        }
        if prev > self.t_k {
            return Err(Error::IndexOrderViolated(format!(
                "last test point {prev} exceeds t_k = {}",
                self.t_k
            )));
        }
        Ok(())
    }

    /// Left-hand side of the k-point inequality at every test point, in
    /// index order; the last element belongs to `t_k`.
    pub fn point_demands(&self) -> Vec<(f64, f64)> {
        let base = self.c_k_eff
            + self
                .entries
                .iter()
                .map(|e| e.alpha * e.t * e.utilization)
                .sum::<f64>();
        let mut points = Vec::with_capacity(self.k());
        let mut carry = 0.0;
        for e in &self.entries {
            points.push((e.t, base + carry));
            carry += e.beta * e.t * e.utilization;
        }
        points.push((self.t_k, base + carry));
        points
    }
}

/// Evaluates the k-point inequality at each of the `k` test points and
/// accepts at the first point that satisfies it.
pub fn evaluate_kpoint(params: &KPointParams) -> Result<TestVerdict> {
    params.validate()?;
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, (t, lhs)) in params.point_demands().into_iter().enumerate() {
        if lhs <= t {
            return Ok(TestVerdict {
                test: TestKind::KPoint,
                verdict: Verdict::Schedulable,
                lhs,
                rhs: t,
                witness: Some(Witness { index: j + 1, time: t }),
            });
        }
        if best.is_none_or(|(_, bt, bl)| t - lhs > bt - bl) {
            best = Some((j, t, lhs));
        }
    }
    let (j, t, lhs) = best.expect("at least the t_k point exists");
    Ok(TestVerdict {
        test: TestKind::KPoint,
        verdict: Verdict::Unknown,
        lhs,
        rhs: t,
        witness: Some(Witness { index: j + 1, time: t }),
    })
}

fn check_uniform(params: &KPointParams, alpha: f64, beta: f64) -> Result<()> {
    params.validate()?;
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(Error::UniformBoundViolated(format!(
            "alpha and beta must be positive, got {alpha}, {beta}"
        )));
    }
    for e in &params.entries {
        if e.alpha > alpha || e.beta > beta {
            return Err(Error::UniformBoundViolated(format!(
                "`{}` has alpha = {}, beta = {} above uniform bounds {alpha}, {beta}",
                e.task_id, e.alpha, e.beta
            )));
        }
    }
    Ok(())
}

/// Right-hand side of the hyperbolic bound:
/// `(alpha/beta + 1) / prod_j (beta * U_j + 1) - alpha/beta`.
pub fn hyperbolic_bound(utilizations: impl IntoIterator<Item = f64>, alpha: f64, beta: f64) -> f64 {
    let ratio = alpha / beta;
    let product: f64 = utilizations.into_iter().map(|u| beta * u + 1.0).product();
    (ratio + 1.0) / product - ratio
}

/// Accepts if `C_k / t_k` does not exceed [`hyperbolic_bound`].
pub fn hyperbolic_test(params: &KPointParams, alpha: f64, beta: f64) -> Result<TestVerdict> {
    check_uniform(params, alpha, beta)?;
    let rhs = hyperbolic_bound(params.entries.iter().map(|e| e.utilization), alpha, beta);
    Ok(TestVerdict::closed_form(
        TestKind::Hyperbolic,
        params.wcet_ratio(),
        rhs,
    ))
}

/// Total-utilization bound for `k` test points:
/// `[(k-1)((alpha+beta)^(1/k) - 1) + ((alpha+beta)^(1/k) - alpha)] / beta`.
///
/// The root is evaluated as `exp_m1(ln(alpha+beta) / k)` so that the bound
/// stays accurate for very large `k`.
pub fn capacity_bound(k: usize, alpha: f64, beta: f64) -> f64 {
    let k = k as f64;
    let root_minus_one = ((alpha + beta).ln() / k).exp_m1();
    ((k - 1.0) * root_minus_one + (root_minus_one + 1.0 - alpha)) / beta
}

/// Accepts if `C_k / t_k + sum U_i` does not exceed [`capacity_bound`].
pub fn capacity_test(params: &KPointParams, alpha: f64, beta: f64) -> Result<TestVerdict> {
    check_uniform(params, alpha, beta)?;
    let lhs = params.wcet_ratio() + params.total_utilization();
    Ok(TestVerdict::closed_form(
        TestKind::Capacity,
        lhs,
        capacity_bound(params.k(), alpha, beta),
    ))
}

/// Accepts if `beta * sum U_i <= ln((alpha/beta + 1) / (C_k/t_k + alpha/beta))`.
pub fn log_utilization_test(params: &KPointParams, alpha: f64, beta: f64) -> Result<TestVerdict> {
    check_uniform(params, alpha, beta)?;
    let ratio = alpha / beta;
    let denom = params.wcet_ratio() + ratio;
    let arg = (ratio + 1.0) / denom;
    if !(denom > 0.0 && arg.is_finite() && arg > 0.0) {
        return Err(Error::DegenerateRatio(format!(
            "ln argument ({ratio} + 1) / {denom} is not positive"
        )));
    }
    Ok(TestVerdict::closed_form(
        TestKind::LogUtilization,
        beta * params.total_utilization(),
        arg.ln(),
    ))
}

/// Per-task bound, evaluated in stored entry order:
/// `C_k/t_k <= 1 - sum_i U_i (alpha_i + beta_i) / prod_{j >= i} (beta_j U_j + 1)`.
pub fn general_test(params: &KPointParams) -> Result<TestVerdict> {
    params.validate()?;
    let mut suffix = 1.0;
    let mut sum = 0.0;
    for e in params.entries.iter().rev() {
        suffix *= e.beta * e.utilization + 1.0;
        sum += e.utilization * (e.alpha + e.beta) / suffix;
    }
    Ok(TestVerdict::closed_form(
        TestKind::General,
        params.wcet_ratio(),
        1.0 - sum,
    ))
}
