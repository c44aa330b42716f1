//! Sporadic tasks, task sets and the problem handed to the derivations.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::service::ServiceCurve;
use crate::{Error, Result};

/// One sporadic task.
///
/// Fields are private so that the invariants checked on construction
/// (`C, T, D > 0`, `S >= 0`, `J >= 0`, all finite) cannot be broken later.
/// The utilization is always derived from `C / T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TaskRecord", into = "TaskRecord")]
pub struct Task {
    id: String,
    wcet: f64,
    period: f64,
    deadline: f64,
    suspension: f64,
    jitter: Option<f64>,
}

impl Task {
    pub fn new(id: impl Into<String>, wcet: f64, period: f64, deadline: f64) -> Result<Self> {
        let id = id.into();
        check_positive(&id, "C", wcet)?;
        check_positive(&id, "T", period)?;
        check_positive(&id, "D", deadline)?;
        Ok(Task {
            id,
            wcet,
            period,
            deadline,
            suspension: 0.0,
            jitter: None,
        })
    }

    /// Implicit-deadline task (`D = T`).
    pub fn implicit(id: impl Into<String>, wcet: f64, period: f64) -> Result<Self> {
        Task::new(id, wcet, period, period)
    }

    pub fn with_suspension(mut self, suspension: f64) -> Result<Self> {
        check_non_negative(&self.id, "S", suspension)?;
        self.suspension = suspension;
        Ok(self)
    }

    pub fn with_jitter(mut self, jitter: f64) -> Result<Self> {
        check_non_negative(&self.id, "J", jitter)?;
        self.jitter = Some(jitter);
        Ok(self)
    }

    pub fn with_wcet(mut self, wcet: f64) -> Result<Self> {
        check_positive(&self.id, "C", wcet)?;
        self.wcet = wcet;
        Ok(self)
    }

    pub fn with_deadline(mut self, deadline: f64) -> Result<Self> {
        check_positive(&self.id, "D", deadline)?;
        self.deadline = deadline;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn wcet(&self) -> f64 {
        self.wcet
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn suspension(&self) -> f64 {
        self.suspension
    }

    pub fn jitter(&self) -> Option<f64> {
        self.jitter
    }

    pub fn utilization(&self) -> f64 {
        self.wcet / self.period
    }
}

fn check_positive(id: &str, field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTask {
            id: id.to_string(),
            reason: format!("{field} must be positive and finite, got {value}"),
        })
    }
}

fn check_non_negative(id: &str, field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTask {
            id: id.to_string(),
            reason: format!("{field} must be non-negative and finite, got {value}"),
        })
    }
}

/// Wire form of a task: `{"id", "C", "T", "D"?, "S"?, "J"?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaskRecord {
    id: String,
    #[serde(rename = "C")]
    wcet: f64,
    #[serde(rename = "T")]
    period: f64,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    deadline: Option<f64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    suspension: Option<f64>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    jitter: Option<f64>,
}

impl TryFrom<TaskRecord> for Task {
    type Error = Error;

    fn try_from(rec: TaskRecord) -> Result<Self> {
        let mut task = Task::new(rec.id, rec.wcet, rec.period, rec.deadline.unwrap_or(rec.period))?;
        if let Some(s) = rec.suspension {
            task = task.with_suspension(s)?;
        }
        if let Some(j) = rec.jitter {
            task = task.with_jitter(j)?;
        }
        Ok(task)
    }
}

impl From<Task> for TaskRecord {
    fn from(task: Task) -> Self {
        TaskRecord {
            id: task.id,
            wcet: task.wcet,
            period: task.period,
            deadline: Some(task.deadline),
            suspension: (task.suspension > 0.0).then_some(task.suspension),
            jitter: task.jitter,
        }
    }
}

/// `{"tasks": [...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
}

impl TaskSet {
    pub fn from_json(s: &str) -> Result<Self> {
        let set: TaskSet = serde_json::from_str(s)?;
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("task sets always serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadlineClass {
    Implicit,
    Constrained,
    Arbitrary,
}

pub fn classify(tasks: &[Task]) -> Result<DeadlineClass> {
    if tasks.is_empty() {
        return Err(Error::EmptyTaskSet);
    }
    if tasks.iter().all(|t| t.deadline == t.period) {
        Ok(DeadlineClass::Implicit)
    } else if tasks.iter().all(|t| t.deadline <= t.period) {
        Ok(DeadlineClass::Constrained)
    } else {
        Ok(DeadlineClass::Arbitrary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityPolicy {
    RateMonotonic,
    DeadlineMonotonic,
    AsGiven,
}

/// Orders tasks from highest to lowest priority. Equal keys are broken by
/// smaller `C`, then by id, so the result does not depend on input order.
pub fn assign_priorities(tasks: &[Task], policy: PriorityPolicy) -> Vec<Task> {
    let mut ordered = tasks.to_vec();
    let key: fn(&Task) -> f64 = match policy {
        PriorityPolicy::AsGiven => return ordered,
        PriorityPolicy::RateMonotonic => Task::period,
        PriorityPolicy::DeadlineMonotonic => Task::deadline,
    };
    ordered.sort_by(|a, b| {
        key(a)
            .total_cmp(&key(b))
            .then_with(|| a.wcet.total_cmp(&b.wcet))
            .then_with(|| a.id.cmp(&b.id))
    });
    ordered
}

/// How higher-priority releases are shifted in the analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum JitterModel {
    #[default]
    None,
    /// Every higher-priority task `i` has jitter `delta * T_i`.
    Uniform { delta: f64 },
    /// Every higher-priority task carries its own `J_i`.
    Independent,
}

/// The task under analysis, its higher-priority tasks (highest first) and
/// the platform parameters of the test
///
/// ```text
/// exists 0 < t <= D_k :  C_k + extra + sum_i sigma * (ceil((t + J_i) / T_i) + b_i) * C_i <= A(t)
/// ```
///
/// where `b_i = b` unless the task is listed in `uninflated`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisProblem {
    pub task_k: Task,
    pub hp: Vec<Task>,
    pub sigma: f64,
    pub inflation: f64,
    pub service: ServiceCurve,
    /// Added to `C_k`: blocking, suspension, or an equivalent-WCET adjustment.
    pub extra_wcet: f64,
    pub jitter: JitterModel,
    /// Higher-priority tasks exempt from the inflation term.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub uninflated: Vec<String>,
}

impl AnalysisProblem {
    /// Plain uniprocessor problem: `sigma = 1`, `b = 0`, full service.
    pub fn new(task_k: Task, hp: Vec<Task>) -> Result<Self> {
        let problem = AnalysisProblem {
            task_k,
            hp,
            sigma: 1.0,
            inflation: 0.0,
            service: ServiceCurve::Identity,
            extra_wcet: 0.0,
            jitter: JitterModel::None,
            uninflated: Vec::new(),
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self.sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_inflation(mut self, b: f64) -> Result<Self> {
        self.inflation = b;
        self.validate()?;
        Ok(self)
    }

    pub fn with_service(mut self, service: ServiceCurve) -> Result<Self> {
        self.service = service;
        self.validate()?;
        Ok(self)
    }

    pub fn with_extra_wcet(mut self, extra: f64) -> Result<Self> {
        self.extra_wcet = extra;
        self.validate()?;
        Ok(self)
    }

    pub fn with_jitter(mut self, jitter: JitterModel) -> Result<Self> {
        self.jitter = jitter;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidProblem(msg));
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return invalid(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.inflation.is_finite() && self.inflation >= 0.0) {
            return invalid(format!("b must be non-negative, got {}", self.inflation));
        }
        if !(self.extra_wcet.is_finite() && self.extra_wcet >= 0.0) {
            return invalid(format!("extra C_k must be non-negative, got {}", self.extra_wcet));
        }
        if let JitterModel::Uniform { delta } = self.jitter {
            if !(delta.is_finite() && delta >= 0.0) {
                return invalid(format!("delta must be non-negative, got {delta}"));
            }
        }
        let mut seen = HashSet::with_capacity(self.hp.len());
        for t in &self.hp {
            if t.id == self.task_k.id {
                return invalid(format!("task `{}` appears in its own hp set", t.id));
            }
            if !seen.insert(t.id.as_str()) {
                return invalid(format!("duplicate hp task `{}`", t.id));
            }
        }
        self.service.validate()
    }

    /// `C_k` plus the configured add-on.
    pub fn base_wcet(&self) -> f64 {
        self.task_k.wcet + self.extra_wcet
    }

    pub fn inflation_of(&self, task: &Task) -> f64 {
        if self.uninflated.iter().any(|id| id == &task.id) {
            0.0
        } else {
            self.inflation
        }
    }
}

/// Orders by `(key, T, id)`; used for stable test-point indexing.
pub(crate) fn cmp_time_period_id(a: (f64, &Task), b: (f64, &Task)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| a.1.period.total_cmp(&b.1.period))
        .then_with(|| a.1.id.cmp(&b.1.id))
}
