//! Instance generators and independent reference computations shared by
//! the integration suites. Nothing here calls the library's demand or
//! service code; ceilings use a plain `f64::ceil` with a fixed slack.

#![allow(dead_code)]

use k2u::bounds::KPointParams;
use k2u::service::ServiceCurve;
use k2u::task::{assign_priorities, AnalysisProblem, JitterModel, PriorityPolicy, Task};
use k2u::taskgen::{generate, DeadlineModel, GenSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAJORIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Class {
    Inflation { sigma: f64, b: f64 },
    UniformJitter,
    IndependentJitter,
    Segmented,
    BoundedDelay,
    ExactTdma,
}

impl Class {
    pub fn label(&self) -> String {
        match self {
            Class::Inflation { sigma, b } => format!("inflation sigma={sigma} b={b}"),
            Class::UniformJitter => "uniform jitter".into(),
            Class::IndependentJitter => "independent jitter".into(),
            Class::Segmented => "segmented TDMA".into(),
            Class::BoundedDelay => "bounded-delay TDMA".into(),
            Class::ExactTdma => "exact TDMA".into(),
        }
    }
}

pub fn dominance_classes() -> Vec<Class> {
    let mut classes = Vec::new();
    for sigma in [1.0, 0.5, 0.25] {
        for b in [0.0, 1.0] {
            classes.push(Class::Inflation { sigma, b });
        }
    }
    classes.extend([
        Class::UniformJitter,
        Class::IndependentJitter,
        Class::Segmented,
        Class::BoundedDelay,
    ]);
    classes
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A value on the `1e-3` grid drawn uniformly from `[lo, hi]`.
pub fn grid_value(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let a = (lo * 1000.0).ceil() as i64;
    let b = (hi * 1000.0).floor() as i64;
    rng.gen_range(a..=b.max(a)) as f64 / 1000.0
}

/// Deadline-monotonic task set of `n` tasks with total utilization up to `u_max`.
pub fn random_tasks(rng: &mut impl Rng, n: usize, u_max: f64) -> Vec<Task> {
    loop {
        let total = rng.gen_range(0.05..=u_max.min(0.9 * n as f64).max(0.06));
        let model = if rng.gen_bool(0.5) {
            DeadlineModel::Implicit
        } else {
            DeadlineModel::Constrained {
                min_factor: 0.3,
                max_factor: 1.0,
            }
        };
        let spec = GenSpec::new(n, total, (1.0, 50.0), rng.gen()).with_deadline_model(model);
        if let Ok(tasks) = generate(&spec) {
            return assign_priorities(&tasks, PriorityPolicy::DeadlineMonotonic);
        }
    }
}

fn sigma_of(rng: &mut impl Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        0.5
    }
}

/// A random problem of the given class: a random task of a random DM task
/// set is analyzed against all tasks before it.
pub fn random_problem(rng: &mut impl Rng, class: Class) -> AnalysisProblem {
    let n = rng.gen_range(1..=8);
    let (sigma, b) = match class {
        Class::Inflation { sigma, b } => (sigma, b),
        Class::Segmented | Class::BoundedDelay => (sigma_of(rng), if rng.gen_bool(0.5) { 0.0 } else { 1.0 }),
        _ => (sigma_of(rng), 0.0),
    };
    let u_max = match class {
        Class::Segmented | Class::BoundedDelay | Class::ExactTdma => 0.8 / sigma,
        _ => 1.1 / sigma,
    };
    let tasks = random_tasks(rng, n, u_max);
    let k = rng.gen_range(0..n);
    let mut hp = tasks[..k].to_vec();
    let task_k = tasks[k].clone();
    let d_k = task_k.deadline();

    if class == Class::IndependentJitter {
        hp = hp
            .into_iter()
            .map(|t| {
                let period = t.period();
                let j = match rng.gen_range(0..10) {
                    0..=2 => 0.0,
                    3 | 4 => rng.gen_range(1..=2) as f64 * period,
                    _ => grid_value(rng, 0.0, 2.0 * period),
                };
                t.with_jitter(j).unwrap()
            })
            .collect();
    }

    let extra = if rng.gen_bool(0.2) { grid_value(rng, 0.0, 0.2 * d_k) } else { 0.0 };
    let mut problem = AnalysisProblem::new(task_k, hp)
        .unwrap()
        .with_sigma(sigma)
        .unwrap()
        .with_inflation(b)
        .unwrap()
        .with_extra_wcet(extra)
        .unwrap();

    match class {
        Class::Inflation { .. } => {}
        Class::UniformJitter => {
            let mut k = rng.gen_range(1..2000);
            if k % 1000 == 0 {
                k += 1;
            }
            problem = problem.with_jitter(JitterModel::Uniform { delta: k as f64 / 1000.0 }).unwrap();
        }
        Class::IndependentJitter => {
            problem = problem.with_jitter(JitterModel::Independent).unwrap();
        }
        Class::Segmented => {
            let t_cycle = grid_value(rng, 0.5, 20.0);
            let c_slot = grid_value(rng, 0.1 * t_cycle, t_cycle);
            problem = problem
                .with_service(ServiceCurve::Segmented { t_cycle, c_slot, sigma })
                .unwrap();
        }
        Class::BoundedDelay => {
            let (gamma, t_delay) = if rng.gen_bool(0.5) {
                let t_cycle = grid_value(rng, 0.5, 20.0);
                let c_slot = grid_value(rng, 0.1 * t_cycle, t_cycle);
                (c_slot / t_cycle, t_cycle - c_slot)
            } else {
                (grid_value(rng, 0.1, 1.0), grid_value(rng, 0.0, 0.5 * d_k))
            };
            problem = problem
                .with_service(ServiceCurve::BoundedDelay { gamma, t_delay })
                .unwrap();
        }
        Class::ExactTdma => {
            let t_cycle = grid_value(rng, 0.5, 20.0);
            let c_slot = grid_value(rng, 0.1 * t_cycle, t_cycle);
            problem = problem.with_service(ServiceCurve::ExactTdma { t_cycle, c_slot }).unwrap();
        }
    }
    problem
}

/// `ceil` that ignores an overshoot of `1e-9`, so that quotients like
/// `(g T - J + J) / T` count as `g`.
pub fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9).ceil()
}

fn jitter_of(problem: &AnalysisProblem, task: &Task) -> f64 {
    match problem.jitter {
        JitterModel::None => 0.0,
        JitterModel::Uniform { delta } => delta * task.period(),
        JitterModel::Independent => task.jitter().expect("independent jitter needs J"),
    }
}

/// Exact demand of an identity-service problem over a window of length `t`.
pub fn reference_demand(problem: &AnalysisProblem, t: f64) -> f64 {
    let interference: f64 = problem
        .hp
        .iter()
        .map(|task| {
            let b = if problem.uninflated.iter().any(|id| id == task.id()) {
                0.0
            } else {
                problem.inflation
            };
            let jobs = ceil_tol((t + jitter_of(problem, task)) / task.period());
            problem.sigma * (jobs + b) * task.wcet()
        })
        .sum();
    problem.task_k.wcet() + problem.extra_wcet + interference
}

/// Plain-ceil demand used by the dense-grid oracle.
pub fn grid_demand(problem: &AnalysisProblem, t: f64) -> f64 {
    let interference: f64 = problem
        .hp
        .iter()
        .map(|task| {
            let jobs = ((t + jitter_of(problem, task)) / task.period()).ceil();
            problem.sigma * (jobs + problem.inflation) * task.wcet()
        })
        .sum();
    problem.task_k.wcet() + problem.extra_wcet + interference
}

pub fn reference_supply(curve: &ServiceCurve, t: f64) -> f64 {
    match *curve {
        ServiceCurve::Identity => t,
        ServiceCurve::Segmented {
            t_cycle,
            c_slot,
            sigma,
        } => t - (t / t_cycle).ceil() * (t_cycle - sigma * c_slot),
        ServiceCurve::BoundedDelay { gamma, t_delay } => (gamma * (t - t_delay)).max(0.0),
        ServiceCurve::ExactTdma { t_cycle, c_slot } => {
            let whole = (t / t_cycle).floor() * c_slot;
            let partial = t - (t / t_cycle).ceil() * (t_cycle - c_slot);
            whole.max(partial)
        }
    }
}

/// Brute-force time-demand analysis on `steps` evenly spaced points of
/// `(0, D_k]`, with no tolerance.
pub fn dense_grid_accepts(problem: &AnalysisProblem, steps: usize) -> bool {
    let horizon = problem.task_k.deadline();
    (1..=steps).any(|i| {
        let t = horizon * i as f64 / steps as f64;
        grid_demand(problem, t) <= reference_supply(&problem.service, t)
    })
}

/// k-point left-hand side at every test point, computed from the entries.
pub fn kpoint_lhs(params: &KPointParams) -> Vec<(f64, f64)> {
    let base: f64 = params.c_k_eff + params.entries.iter().map(|e| e.alpha * e.t * e.utilization).sum::<f64>();
    let mut out = Vec::new();
    let mut carry = 0.0;
    for e in &params.entries {
        out.push((e.t, base + carry));
        carry += e.beta * e.t * e.utilization;
    }
    out.push((params.t_k, base + carry));
    out
}

/// Test points where the k-point left-hand side falls below the exact
/// demand of `reduced` (the identity-service problem the parameters were
/// derived from). Returns `(t, exact, lhs)` for each violation.
pub fn majorization_violations(reduced: &AnalysisProblem, params: &KPointParams) -> Vec<(f64, f64, f64)> {
    kpoint_lhs(params)
        .into_iter()
        .filter_map(|(t, lhs)| {
            let exact = reference_demand(reduced, t);
            (exact > lhs + MAJORIZATION_TOL * lhs.abs().max(1.0)).then_some((t, exact, lhs))
        })
        .collect()
}
