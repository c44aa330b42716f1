//! Reproducible random task sets on a rational time grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numeric::{floor_snapped, snap_integer};
use crate::task::Task;
use crate::{Error, Result};

const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DeadlineModel {
    Implicit,
    /// `D = C + f (T - C)` with `f` uniform in `[min_factor, max_factor]`.
    Constrained { min_factor: f64, max_factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub total_utilization: f64,
    pub period_range: (f64, f64),
    pub deadline_model: DeadlineModel,
    pub grid: f64,
    pub seed: u64,
}

impl GenSpec {
    /// Implicit deadlines on a `1e-3` grid.
    pub fn new(n: usize, total_utilization: f64, period_range: (f64, f64), seed: u64) -> Self {
        GenSpec {
            n,
            total_utilization,
            period_range,
            deadline_model: DeadlineModel::Implicit,
            grid: 1e-3,
            seed,
        }
    }

    pub fn with_deadline_model(mut self, model: DeadlineModel) -> Self {
        self.deadline_model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleSpec(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        let u = self.total_utilization;
        if !(u.is_finite() && u > 0.0 && u <= self.n as f64) {
            return bad(format!("total utilization must be in (0, n], got {u}"));
        }
        let (lo, hi) = self.period_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return bad(format!("invalid period range ({lo}, {hi})"));
        }
        if !(self.grid.is_finite() && self.grid > 0.0 && self.grid <= lo) {
            return bad(format!("grid step {} must be in (0, T_min]", self.grid));
        }
        if let DeadlineModel::Constrained { min_factor, max_factor } = self.deadline_model {
            if !(0.0 <= min_factor && min_factor <= max_factor && max_factor <= 1.0) {
                return bad(format!("deadline factors must satisfy 0 <= min <= max <= 1, got [{min_factor}, {max_factor}]"));
            }
        }
        Ok(())
    }
}

/// Grid arithmetic in integer ticks so that every produced value is
/// `ticks / ticks_per_unit` with both operands exact.
struct Grid {
    per_unit: f64,
}

impl Grid {
    fn new(step: f64) -> Self {
        let inv = 1.0 / step;
        Grid {
            per_unit: snap_integer(inv).unwrap_or(inv),
        }
    }

    fn ticks_down(&self, x: f64) -> f64 {
        floor_snapped(x * self.per_unit)
    }

    fn ticks_nearest(&self, x: f64) -> f64 {
        (x * self.per_unit).round()
    }

    fn value(&self, ticks: f64) -> f64 {
        ticks / self.per_unit
    }
}

/// UUniFast: `n` utilizations summing to `total`, uniformly distributed
/// over the simplex.
pub fn uunifast(rng: &mut impl Rng, n: usize, total: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut remaining = total;
    for i in 1..n {
        let next = remaining * rng.gen::<f64>().powf(1.0 / (n - i) as f64);
        out.push(remaining - next);
        remaining = next;
    }
    out.push(remaining);
    out
}

/// Generates `spec.n` tasks named `t0, t1, ...`.
///
/// Utilizations come from UUniFast, discarding draws with a task above 1
/// or below one grid step of execution. Periods are log-uniform and
/// snapped to the grid; `C` is snapped down, so the realized total
/// utilization never exceeds the requested one.
pub fn generate(spec: &GenSpec) -> Result<Vec<Task>> {
    spec.validate()?;
    let grid = Grid::new(spec.grid);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.period_range;
    let lo_ticks = (lo * grid.per_unit - 1e-9).ceil().max(1.0);
    let hi_ticks = grid.ticks_down(hi).max(lo_ticks);

    for _ in 0..MAX_ATTEMPTS {
        let utils = uunifast(&mut rng, spec.n, spec.total_utilization);
        if utils.iter().any(|&u| u > 1.0) {
            continue;
        }
        let periods: Vec<f64> = (0..spec.n)
            .map(|_| {
                let raw = if lo < hi {
                    rng.gen_range(lo.ln()..=hi.ln()).exp()
                } else {
                    lo
                };
                grid.ticks_nearest(raw).clamp(lo_ticks, hi_ticks)
            })
            .collect();
        let wcets: Vec<f64> = utils
            .iter()
            .zip(&periods)
            .map(|(&u, &t)| floor_snapped(u * t).min(t))
            .collect();
        if wcets.iter().any(|&c| c < 1.0) {
            continue;
        }
        let mut tasks = Vec::with_capacity(spec.n);
        for (i, (&c, &t)) in wcets.iter().zip(&periods).enumerate() {
            let d = match spec.deadline_model {
                DeadlineModel::Implicit => t,
                DeadlineModel::Constrained { min_factor, max_factor } => {
                    let f = if min_factor < max_factor {
                        rng.gen_range(min_factor..=max_factor)
                    } else {
                        min_factor
                    };
                    (c + f * (t - c)).round().clamp(c, t)
                }
            };
            tasks.push(Task::new(format!("t{i}"), grid.value(c), grid.value(t), grid.value(d))?);
        }
        return Ok(tasks);
    }
    Err(Error::InfeasibleSpec(format!(
        "no task set with U = {} fits the grid after {MAX_ATTEMPTS} attempts",
        spec.total_utilization
    )))
}
