//! Named platform scenarios, each mapped onto an [`AnalysisProblem`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::service::ServiceCurve;
use crate::task::{classify, AnalysisProblem, DeadlineClass, JitterModel, Task};
use crate::{Error, Result, TestKind, TestVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    UniPreemptive,
    UniNonpreemptive,
    Bursty,
    MpGlobal,
    MpPartitioned,
    TdmaSegmented,
    TdmaBoundedDelay,
    SelfSuspendingUni,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::UniPreemptive,
        Preset::UniNonpreemptive,
        Preset::Bursty,
        Preset::MpGlobal,
        Preset::MpPartitioned,
        Preset::TdmaSegmented,
        Preset::TdmaBoundedDelay,
        Preset::SelfSuspendingUni,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::UniPreemptive => "uni_preemptive",
            Preset::UniNonpreemptive => "uni_nonpreemptive",
            Preset::Bursty => "bursty",
            Preset::MpGlobal => "mp_global",
            Preset::MpPartitioned => "mp_partitioned",
            Preset::TdmaSegmented => "tdma_segmented",
            Preset::TdmaBoundedDelay => "tdma_bounded_delay",
            Preset::SelfSuspendingUni => "self_suspending_uni",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset `{s}`")))
    }
}

/// Scenario parameters. Unset fields fall back to the preset's defaults;
/// set fields override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PresetConfig {
    /// Processor count `M`.
    pub processors: Option<u32>,
    pub sigma: Option<f64>,
    /// Inflation `b`; required by `bursty`.
    pub inflation: Option<f64>,
    /// Uniform jitter ratio.
    pub delta: Option<f64>,
    pub t_cycle: Option<f64>,
    pub c_slot: Option<f64>,
    pub gamma: Option<f64>,
    pub t_delay: Option<f64>,
    /// Overrides the suspension time of the task under analysis.
    pub suspension: Option<f64>,
    /// Extra execution added to the task under analysis (e.g. an
    /// equivalent-WCET adjustment for DAG tasks).
    pub extra_wcet: Option<f64>,
}

fn require<T>(value: Option<T>, preset: Preset, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::MissingConfig {
        preset: preset.name().to_string(),
        field: field.to_string(),
    })
}

fn positive(value: f64, field: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidConfig(format!("{field} must be positive, got {value}")))
    }
}

/// Builds the problem for task `k_index` of a priority-ordered task set.
///
/// The suspension time of the analyzed task always counts as execution.
/// The self-suspending scenario additionally models every higher-priority
/// task with jitter `T_i - C_i` and needs an implicit-deadline task under
/// analysis.
pub fn build_problem(preset: Preset, config: &PresetConfig, tasks: &[Task], k_index: usize) -> Result<AnalysisProblem> {
    if k_index >= tasks.len() {
        return Err(Error::TaskIndex {
            index: k_index,
            len: tasks.len(),
        });
    }
    let task_k = tasks[k_index].clone();
    let hp = tasks[..k_index].to_vec();
    let lower = &tasks[k_index + 1..];

    let (default_sigma, default_b) = match preset {
        Preset::MpGlobal | Preset::MpPartitioned => {
            let m = require(config.processors, preset, "M")?;
            if m == 0 {
                return Err(Error::InvalidConfig("M must be at least 1".into()));
            }
            let b = if preset == Preset::MpGlobal { 1.0 } else { 0.0 };
            (1.0 / f64::from(m), b)
        }
        Preset::Bursty => (1.0, require(config.inflation, preset, "b_burst")?),
        _ => (1.0, 0.0),
    };
    let sigma = positive(config.sigma.unwrap_or(default_sigma), "sigma")?;
    let b = config.inflation.unwrap_or(default_b);

    let suspension = config.suspension.unwrap_or(task_k.suspension());
    let mut extra = suspension + config.extra_wcet.unwrap_or(0.0);
    if preset == Preset::UniNonpreemptive {
        extra += lower.iter().map(Task::wcet).fold(0.0, f64::max);
    }

    let mut problem = AnalysisProblem::new(task_k.clone(), hp)?
        .with_sigma(sigma)?
        .with_inflation(b)?
        .with_extra_wcet(extra)?;
    if let Some(delta) = config.delta {
        problem = problem.with_jitter(JitterModel::Uniform { delta })?;
    }

    match preset {
        Preset::TdmaSegmented => {
            let t_cycle = require(config.t_cycle, preset, "T_cycle")?;
            let c_slot = require(config.c_slot, preset, "C_slot")?;
            problem = problem.with_service(ServiceCurve::Segmented { t_cycle, c_slot, sigma })?;
        }
        Preset::TdmaBoundedDelay => {
            let (gamma, t_delay) = match (config.gamma, config.t_delay) {
                (Some(g), Some(d)) => (g, d),
                (g, d) => {
                    let t_cycle = require(config.t_cycle, preset, "T_cycle")?;
                    let c_slot = require(config.c_slot, preset, "C_slot")?;
                    (g.unwrap_or(c_slot / t_cycle), d.unwrap_or(t_cycle - c_slot))
                }
            };
            problem = problem.with_service(ServiceCurve::BoundedDelay { gamma, t_delay })?;
        }
        Preset::SelfSuspendingUni => {
            if config.delta.is_some() || b != 0.0 {
                return Err(Error::InvalidConfig(
                    "self_suspending_uni fixes the jitter model; delta and b do not apply".into(),
                ));
            }
            if task_k.deadline() != task_k.period() {
                return Err(Error::ImplicitDeadlineRequired(task_k.id().to_string()));
            }
            problem.hp = problem
                .hp
                .into_iter()
                .map(|t| {
                    let j = t.period() - t.wcet();
                    t.with_jitter(j.max(0.0))
                })
                .collect::<Result<_>>()?;
            problem = problem.with_jitter(JitterModel::Independent)?;
        }
        _ => {}
    }
    Ok(problem)
}

/// Closed-form TDMA tests for rate-monotonic implicit-deadline task sets
/// with bandwidth `gamma = C_slot / T_cycle`.
///
/// The first verdict uses the segmented supply: the hyperbolic form
/// `prod_{i<=k}(U_i + 1) <= 2 / (2 - gamma)` when `T_cycle < T_k`, otherwise
/// `prod_{i<k}(U_i + 1) <= 2 / (1 + U_k + (T_cycle / T_k)(1 - gamma))`.
/// The second uses the bounded-delay supply with `t_delay = T_cycle - C_slot`:
/// `((C_k + gamma t_delay) / (gamma T_k) + 1) prod_{i<k}(U_i / gamma + 1) <= 2`.
pub fn tdma_rm_closed_forms(
    tasks: &[Task],
    k_index: usize,
    t_cycle: f64,
    c_slot: f64,
) -> Result<(TestVerdict, TestVerdict)> {
    if k_index >= tasks.len() {
        return Err(Error::TaskIndex {
            index: k_index,
            len: tasks.len(),
        });
    }
    if classify(tasks)? != DeadlineClass::Implicit {
        return Err(Error::ImplicitDeadlineRequired(
            "TDMA closed forms need implicit deadlines".into(),
        ));
    }
    ServiceCurve::ExactTdma { t_cycle, c_slot }.validate()?;
    let gamma = c_slot / t_cycle;
    let task_k = &tasks[k_index];
    let hp = &tasks[..k_index];
    let (t_k, u_k) = (task_k.period(), task_k.utilization());
    let hp_product: f64 = hp.iter().map(|t| t.utilization() + 1.0).product();

    let segmented = if t_cycle < t_k {
        TestVerdict::closed_form(TestKind::TdmaSegmented, hp_product * (u_k + 1.0), 2.0 / (2.0 - gamma))
    } else {
        TestVerdict::closed_form(
            TestKind::TdmaSegmented,
            hp_product,
            2.0 / (1.0 + u_k + (t_cycle / t_k) * (1.0 - gamma)),
        )
    };

    let t_delay = t_cycle - c_slot;
    let lhs = ((task_k.wcet() + gamma * t_delay) / (gamma * t_k) + 1.0)
        * hp.iter().map(|t| t.utilization() / gamma + 1.0).product::<f64>();
    let bounded = TestVerdict::closed_form(TestKind::TdmaBoundedDelay, lhs, 2.0);
    Ok((segmented, bounded))
}

/// Total-utilization bound `k ((2 / (2 - gamma))^(1/k) - 1)` implied by the
/// segmented hyperbolic form for `k` tasks; tends to `ln(2 / (2 - gamma))`.
pub fn tdma_utilization_bound(k: usize, gamma: f64) -> f64 {
    let k = k as f64;
    k * ((2.0 / (2.0 - gamma)).ln() / k).exp_m1()
}
