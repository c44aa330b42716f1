//! Lower service curves `A(t)` and the reductions of service-bounded tests
//! to the constant-inflation form.

use serde::{Deserialize, Serialize};

use crate::numeric::{ceil_ratio, floor_ratio};
use crate::task::{AnalysisProblem, Task};
use crate::{Error, Result};

/// Id given to the virtual higher-priority task that models the unavailable
/// part of each TDMA cycle.
pub const VIRTUAL_TASK_ID: &str = "tdma-virtual";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ServiceCurve {
    /// Full processor: `A(t) = t`.
    #[default]
    Identity,
    /// `A(t) = t - ceil(t / T_cycle) * (T_cycle - sigma * C_slot)`.
    /// Left unclamped: the curve dips below zero right after each cycle boundary.
    Segmented { t_cycle: f64, c_slot: f64, sigma: f64 },
    /// `A(t) = max(0, gamma * (t - t_delay))`.
    BoundedDelay { gamma: f64, t_delay: f64 },
    /// Exact TDMA supply; only the oracle evaluates it.
    ExactTdma { t_cycle: f64, c_slot: f64 },
}

impl ServiceCurve {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidService(msg));
        let pos = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            ServiceCurve::Identity => Ok(()),
            ServiceCurve::Segmented {
                t_cycle,
                c_slot,
                sigma,
            } => {
                if !(pos(t_cycle) && pos(c_slot) && pos(sigma)) {
                    bad(format!(
                        "segmented curve needs positive T_cycle, C_slot, sigma; got {t_cycle}, {c_slot}, {sigma}"
                    ))
                } else if t_cycle - sigma * c_slot < 0.0 {
                    bad(format!(
                        "segmented curve needs T_cycle >= sigma * C_slot; got {t_cycle} < {sigma} * {c_slot}"
                    ))
                } else {
                    Ok(())
                }
            }
            ServiceCurve::BoundedDelay { gamma, t_delay } => {
                if !(pos(gamma) && gamma <= 1.0) {
                    bad(format!("gamma must lie in (0, 1], got {gamma}"))
                } else if !(t_delay.is_finite() && t_delay >= 0.0) {
                    bad(format!("t_delay must be non-negative, got {t_delay}"))
                } else {
                    Ok(())
                }
            }
            ServiceCurve::ExactTdma { t_cycle, c_slot } => {
                if !(pos(t_cycle) && pos(c_slot) && c_slot <= t_cycle) {
                    bad(format!(
                        "TDMA needs 0 < C_slot <= T_cycle; got C_slot = {c_slot}, T_cycle = {t_cycle}"
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Minimum service in any window of length `t`.
    pub fn service_value(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(self.value_unchecked(t))
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        match *self {
            ServiceCurve::Identity => t,
            ServiceCurve::Segmented {
                t_cycle,
                c_slot,
                sigma,
            } => t - ceil_ratio(t, t_cycle) * (t_cycle - sigma * c_slot),
            ServiceCurve::BoundedDelay { gamma, t_delay } => (gamma * (t - t_delay)).max(0.0),
            ServiceCurve::ExactTdma { t_cycle, c_slot } => {
                let whole = floor_ratio(t, t_cycle) * c_slot;
                let partial = t - ceil_ratio(t, t_cycle) * (t_cycle - c_slot);
                whole.max(partial)
            }
        }
    }

    /// Cycle length for curves whose supply resets periodically.
    pub fn cycle(&self) -> Option<f64> {
        match *self {
            ServiceCurve::Segmented { t_cycle, .. } | ServiceCurve::ExactTdma { t_cycle, .. } => {
                Some(t_cycle)
            }
            _ => None,
        }
    }
}

/// Replaces a segmented service curve by a virtual higher-priority task
/// with period `T_cycle` and execution time `(T_cycle - sigma_s * C_slot) / sigma`,
/// so that `sigma` times its demand is exactly the service lost per cycle.
///
/// If `C_k - sigma * b * C_virtual > 0` the virtual task is inflated like
/// every other task and `C_k` is reduced by the same amount; otherwise the
/// virtual task is added without inflation.
pub fn reduce_segmented(problem: &AnalysisProblem) -> Result<AnalysisProblem> {
    problem.validate()?;
    let ServiceCurve::Segmented {
        t_cycle,
        c_slot,
        sigma: sigma_s,
    } = problem.service
    else {
        return Err(Error::InvalidService(format!(
            "reduce_segmented needs a segmented curve, got {:?}",
            problem.service
        )));
    };

    let sigma = problem.sigma;
    let lost = t_cycle - sigma_s * c_slot;
    if lost < 0.0 {
        return Err(Error::InvalidService(format!(
            "T_cycle / sigma - C_slot is negative ({t_cycle}, {c_slot})"
        )));
    }
    let mut reduced = problem.clone();
    reduced.service = ServiceCurve::Identity;
    if lost == 0.0 {
        // the slot covers the whole cycle
        return Ok(reduced);
    }
    let virtual_wcet = lost / sigma;

    let mut id = VIRTUAL_TASK_ID.to_string();
    while id == problem.task_k.id() || problem.hp.iter().any(|t| t.id() == id) {
        id.push('\'');
    }
    let virtual_task = Task::new(id.clone(), virtual_wcet, t_cycle, t_cycle)?;

    let b = problem.inflation;
    let reduced_wcet = problem.task_k.wcet() - sigma * b * virtual_wcet;
    if b > 0.0 && reduced_wcet > 0.0 {
        reduced.task_k = reduced.task_k.with_wcet(reduced_wcet)?;
    } else if b > 0.0 {
        reduced.uninflated.push(id);
    }
    // the virtual task has the shortest window of all; put it first
    reduced.hp.insert(0, virtual_task);
    reduced.validate()?;
    Ok(reduced)
}

/// Rewrites a bounded-delay test as a constant-inflation test with
/// `C_k' = (C_k + gamma * t_delay) / gamma` and `sigma' = sigma / gamma`.
///
/// Returns `None` when `t_delay >= D_k`: no window inside the deadline
/// receives any service, so nothing can be concluded.
pub fn reduce_bounded_delay(problem: &AnalysisProblem) -> Result<Option<AnalysisProblem>> {
    problem.validate()?;
    let ServiceCurve::BoundedDelay { gamma, t_delay } = problem.service else {
        return Err(Error::InvalidService(format!(
            "reduce_bounded_delay needs a bounded-delay curve, got {:?}",
            problem.service
        )));
    };
    if t_delay >= problem.task_k.deadline() {
        return Ok(None);
    }
    let mut reduced = problem.clone();
    reduced.service = ServiceCurve::Identity;
    reduced.task_k = reduced
        .task_k
        .with_wcet((problem.task_k.wcet() + gamma * t_delay) / gamma)?;
    reduced.extra_wcet = problem.extra_wcet / gamma;
    reduced.sigma = problem.sigma / gamma;
    reduced.validate()?;
    Ok(Some(reduced))
}
