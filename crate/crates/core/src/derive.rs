//! Automatic construction of k-point parameters.
//!
//! Each derivation splits the higher-priority tasks in two groups. Tasks in
//! hp2 cannot release another job inside the analysis window `(0, D_k]`,
//! so their interference is a constant that is folded into `C_k`. Every
//! task in hp1 gets a test point at its last release before `D_k`, and the
//! coefficients `alpha_i`, `beta_i` are chosen so that the k-point
//! inequality upper-bounds the real demand at each test point. Test points
//! are indexed by non-decreasing time, ties broken by `(T_i, id)`.

use serde::{Deserialize, Serialize};

use crate::bounds::{CoefficientCaps, KPointEntry, KPointParams};
use crate::numeric::{ceil_ratio, floor_ratio, is_integral};
use crate::service::ServiceCurve;
use crate::task::{cmp_time_period_id, AnalysisProblem, JitterModel, Task};
use crate::{Error, Result, TestKind, TestVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// hp2 = tasks with `T_i >= D_k`.
    #[serde(rename = "period_vs_Dk")]
    PeriodVsDeadline,
    /// hp2 = tasks with `ceil((D_k + delta T_i) / T_i) = ceil(delta)`.
    JitterCeiling,
    /// hp2 = tasks with `ceil((D_k + delta T_i) / T_i) <= ceil(delta) + 1`.
    JitterCeilingRefined,
    /// hp2 = tasks whose job count does not grow over `(0, D_k]`.
    IndependentJitter,
}

impl SplitRule {
    pub fn name(self) -> &'static str {
        match self {
            SplitRule::PeriodVsDeadline => "period_vs_Dk",
            SplitRule::JitterCeiling => "jitter_ceiling",
            SplitRule::JitterCeilingRefined => "jitter_ceiling_refined",
            SplitRule::IndependentJitter => "independent_jitter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    /// In test-point order.
    pub hp1: Vec<String>,
    /// In priority order.
    pub hp2: Vec<String>,
    pub rule: SplitRule,
}

struct Point<'a> {
    t: f64,
    task: &'a Task,
    alpha: f64,
    beta: f64,
}

fn check_derivable(problem: &AnalysisProblem) -> Result<()> {
    problem.validate()?;
    if problem.service != ServiceCurve::Identity {
        return Err(Error::UnreducedService);
    }
    let task = &problem.task_k;
    if task.deadline() > task.period() {
        return Err(Error::ConstrainedDeadlineRequired {
            deadline: task.deadline(),
            period: task.period(),
        });
    }
    Ok(())
}

fn finish(
    problem: &AnalysisProblem,
    c_k_eff: f64,
    mut points: Vec<Point<'_>>,
    hp2: Vec<String>,
    rule: SplitRule,
    caps: Option<CoefficientCaps>,
) -> Result<KPointParams> {
    if !(c_k_eff.is_finite() && c_k_eff > 0.0) {
        return Err(Error::NonPositiveWcet(c_k_eff));
    }
    points.sort_by(|a, b| cmp_time_period_id((a.t, a.task), (b.t, b.task)));
    let hp1 = points.iter().map(|p| p.task.id().to_string()).collect();
    let entries = points
        .into_iter()
        .map(|p| KPointEntry::new(p.task.id(), p.t, p.alpha, p.beta, p.task.utilization()))
        .collect();
    let params = KPointParams {
        t_k: problem.task_k.deadline(),
        c_k_eff,
        entries,
        split: Some(SplitRecord { hp1, hp2, rule }),
        caps,
    };
    params.validate()?;
    Ok(params)
}

/// Parameters for the constant-inflation test
/// `C_k + sum_i sigma * (ceil(t / T_i) + b) * C_i <= t`.
///
/// hp2 holds the tasks with `T_i >= D_k`, each adding `sigma (1 + b) C_i`.
/// For the others `g_i = ceil(D_k / T_i) - 1`, `t_i = g_i T_i`,
/// `alpha_i = sigma (g_i + b) / g_i` and `beta_i = sigma / g_i`, bounded by
/// `sigma (1 + b)` and `sigma`.
pub fn derive_constant_inflation(problem: &AnalysisProblem) -> Result<KPointParams> {
    check_derivable(problem)?;
    if problem.jitter != JitterModel::None {
        return Err(Error::InvalidProblem(
            "problem declares arrival jitter; use a jitter derivation".into(),
        ));
    }
    let d_k = problem.task_k.deadline();
    let sigma = problem.sigma;
    let mut c_k_eff = problem.base_wcet();
    let mut points = Vec::new();
    let mut hp2 = Vec::new();
    for task in &problem.hp {
        let b = problem.inflation_of(task);
        let releases = ceil_ratio(d_k, task.period());
        if releases <= 1.0 {
            c_k_eff += sigma * (1.0 + b) * task.wcet();
            hp2.push(task.id().to_string());
        } else {
            let g = releases - 1.0;
            points.push(Point {
                t: (g * task.period()).min(d_k),
                task,
                alpha: sigma * ((g + b) / g),
                beta: sigma / g,
            });
        }
    }
    let caps = CoefficientCaps {
        alpha: sigma * (1.0 + problem.inflation),
        beta: sigma,
    };
    finish(problem, c_k_eff, points, hp2, SplitRule::PeriodVsDeadline, Some(caps))
}

/// Hyperbolic and logarithmic bounds for constant inflation:
///
/// ```text
/// (C_k'/D_k + 1 + b) * prod_{hp1} (sigma U_i + 1) <= 2 + b
/// sigma * sum_{hp1} U_i <= ln((2 + b) / (C_k'/D_k + 1 + b))
/// ```
pub fn inflation_bound_tests(problem: &AnalysisProblem) -> Result<(TestVerdict, TestVerdict)> {
    let params = derive_constant_inflation(problem)?;
    Ok(inflation_closed_forms(&params, problem.sigma, problem.inflation))
}

/// The two closed forms of [`inflation_bound_tests`] on already derived parameters.
pub fn inflation_closed_forms(params: &KPointParams, sigma: f64, b: f64) -> (TestVerdict, TestVerdict) {
    let ratio = params.c_k_eff / params.t_k;
    let product: f64 = params
        .entries
        .iter()
        .map(|e| sigma * e.utilization + 1.0)
        .product();
    let hyperbolic = TestVerdict::closed_form(TestKind::Hyperbolic, (ratio + 1.0 + b) * product, 2.0 + b);
    let log = TestVerdict::closed_form(
        TestKind::LogUtilization,
        sigma * params.total_utilization(),
        ((2.0 + b) / (ratio + 1.0 + b)).ln(),
    );
    (hyperbolic, log)
}

fn check_jitter_inputs(problem: &AnalysisProblem) -> Result<()> {
    check_derivable(problem)?;
    if problem.inflation > 0.0 {
        return Err(Error::InflationWithJitter(problem.inflation));
    }
    Ok(())
}

fn check_delta(problem: &AnalysisProblem, delta: f64) -> Result<()> {
    check_jitter_inputs(problem)?;
    if problem.jitter == JitterModel::Independent {
        return Err(Error::InvalidProblem(
            "problem declares independent jitter; use derive_independent_jitter".into(),
        ));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidProblem(format!("delta must be non-negative, got {delta}")));
    }
    if is_integral(delta) {
        return Err(Error::IntegralJitter(delta));
    }
    Ok(())
}

/// Parameters for the uniform-jitter test
/// `C_k + sum_i sigma * ceil((t + delta T_i) / T_i) * C_i <= t` with
/// non-integral `delta`.
///
/// hp2 holds the tasks with `ceil((D_k + delta T_i) / T_i) = ceil(delta)`,
/// each adding `sigma ceil(delta) C_i`. For the others
/// `g_i = floor((D_k + delta T_i) / T_i)`, `t_i = (g_i - delta) T_i`,
/// `alpha_i = sigma g_i / (g_i - delta)`, `beta_i = sigma / (g_i - delta)`.
pub fn derive_uniform_jitter(problem: &AnalysisProblem, delta: f64) -> Result<KPointParams> {
    check_delta(problem, delta)?;
    uniform_jitter(problem, delta, false)
}

/// Like [`derive_uniform_jitter`] but moves every task whose job count at
/// `D_k` is at most `ceil(delta) + 1` into hp2 (adding
/// `sigma ceil((D_k + delta T_i) / T_i) C_i`), which keeps the coefficients
/// bounded when `delta` is just below an integer.
pub fn derive_uniform_jitter_refined(problem: &AnalysisProblem, delta: f64) -> Result<KPointParams> {
    check_delta(problem, delta)?;
    uniform_jitter(problem, delta, true)
}

fn uniform_jitter(problem: &AnalysisProblem, delta: f64, refined: bool) -> Result<KPointParams> {
    let d_k = problem.task_k.deadline();
    let sigma = problem.sigma;
    let ceil_delta = delta.ceil();
    let limit = if refined { ceil_delta + 1.0 } else { ceil_delta };
    let mut c_k_eff = problem.base_wcet();
    let mut points = Vec::new();
    let mut hp2 = Vec::new();
    for task in &problem.hp {
        let period = task.period();
        let shifted = d_k + delta * period;
        let releases = ceil_ratio(shifted, period);
        if releases <= limit {
            let count = if refined { releases } else { ceil_delta };
            c_k_eff += sigma * count * task.wcet();
            hp2.push(task.id().to_string());
        } else {
            let g = floor_ratio(shifted, period);
            points.push(Point {
                t: ((g - delta) * period).min(d_k),
                task,
                alpha: sigma * (g / (g - delta)),
                beta: sigma / (g - delta),
            });
        }
    }
    let caps = CoefficientCaps {
        alpha: sigma * (limit / (limit - delta)),
        beta: sigma / (limit - delta),
    };
    let rule = if refined {
        SplitRule::JitterCeilingRefined
    } else {
        SplitRule::JitterCeiling
    };
    finish(problem, c_k_eff, points, hp2, rule, Some(caps))
}

/// Parameters for the independent-jitter test
/// `C_k + sum_i sigma * ceil((t + J_i) / T_i) * C_i <= t`.
///
/// A task goes to hp2 when its job count `ceil((t + J_i) / T_i)` is the
/// same just after 0 and at `D_k`; it then adds
/// `sigma ceil((D_k + J_i) / T_i) C_i`. For the others
/// `g_i = floor((D_k + J_i) / T_i)`, `t_i = g_i T_i - J_i`,
/// `alpha_i = sigma g_i / (g_i - J_i/T_i)`, `beta_i = sigma / (g_i - J_i/T_i)`.
///
/// When `J_i / T_i` is an integer the interference of that task is plain
/// constant inflation by `J_i / T_i`, and it is treated exactly like the
/// constant-inflation derivation does: `g_i = ceil((D_k + J_i) / T_i) - 1`,
/// so the test point stays strictly before `D_k` and `t_i` is never zero.
pub fn derive_independent_jitter(problem: &AnalysisProblem) -> Result<KPointParams> {
    check_jitter_inputs(problem)?;
    let d_k = problem.task_k.deadline();
    let sigma = problem.sigma;
    let mut c_k_eff = problem.base_wcet();
    let mut points = Vec::new();
    let mut hp2 = Vec::new();
    for task in &problem.hp {
        let jitter = task
            .jitter()
            .ok_or_else(|| Error::MissingJitter(task.id().to_string()))?;
        let period = task.period();
        let releases = ceil_ratio(d_k + jitter, period);
        let initial = floor_ratio(jitter, period) + 1.0;
        if releases <= initial {
            c_k_eff += sigma * releases * task.wcet();
            hp2.push(task.id().to_string());
        } else {
            let ratio = jitter / period;
            let g = if is_integral(ratio) {
                releases - 1.0
            } else {
                floor_ratio(d_k + jitter, period)
            };
            points.push(Point {
                t: (g * period - jitter).min(d_k),
                task,
                alpha: sigma * (g / (g - ratio)),
                beta: sigma / (g - ratio),
            });
        }
    }
    finish(problem, c_k_eff, points, hp2, SplitRule::IndependentJitter, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(c_k: f64, d_k: f64, hp: Vec<Task>) -> AnalysisProblem {
        let k = Task::new("k", c_k, d_k.max(20.0), d_k).unwrap();
        AnalysisProblem::new(k, hp).unwrap()
    }

    fn hp(c: f64, t: f64) -> Task {
        Task::implicit("h", c, t).unwrap()
    }

    #[test]
    fn inflation_basic() {
        let p = derive_constant_inflation(&problem(1.0, 10.0, vec![hp(1.0, 4.0)])).unwrap();
        let e = &p.entries[0];
        assert_eq!((e.t, e.alpha, e.beta), (8.0, 1.0, 0.5));
        assert_eq!(p.t_k, 10.0);
        assert_eq!(p.c_k_eff, 1.0);
    }

    #[test]
    fn inflation_global_multiprocessor() {
        let pr = problem(1.0, 10.0, vec![hp(1.0, 4.0)])
            .with_sigma(0.25)
            .unwrap()
            .with_inflation(1.0)
            .unwrap();
        let p = derive_constant_inflation(&pr).unwrap();
        let e = &p.entries[0];
        assert_eq!((e.t, e.alpha, e.beta), (8.0, 0.375, 0.125));
        assert_eq!(p.caps, Some(CoefficientCaps { alpha: 0.5, beta: 0.25 }));
    }

    #[test]
    fn inflation_absorbs_long_periods() {
        let p = derive_constant_inflation(&problem(1.0, 10.0, vec![hp(1.0, 12.0)])).unwrap();
        assert!(p.entries.is_empty());
        assert_eq!(p.c_k_eff, 2.0);
        assert_eq!(p.hp2_ids(), ["h".to_string()]);
    }

    #[test]
    fn period_equal_to_deadline_is_hp2() {
        let p = derive_constant_inflation(&problem(1.0, 10.0, vec![hp(1.0, 10.0)])).unwrap();
        assert!(p.entries.is_empty());
        assert_eq!(p.c_k_eff, 2.0);
    }

    #[test]
    fn arbitrary_deadline_rejected() {
        let k = Task::new("k", 1.0, 4.0, 5.0).unwrap();
        let pr = AnalysisProblem::new(k, vec![]).unwrap();
        assert!(matches!(
            derive_constant_inflation(&pr),
            Err(Error::ConstrainedDeadlineRequired { .. })
        ));
    }

    #[test]
    fn unreduced_service_rejected() {
        let pr = problem(1.0, 10.0, vec![])
            .with_service(ServiceCurve::BoundedDelay {
                gamma: 0.5,
                t_delay: 1.0,
            })
            .unwrap();
        assert_eq!(derive_constant_inflation(&pr), Err(Error::UnreducedService));
    }

    #[test]
    fn inflation_bounds_uniprocessor() {
        let k = Task::implicit("k", 0.5, 3.0).unwrap();
        let pr = AnalysisProblem::new(k, vec![hp(1.0, 2.0)]).unwrap();
        let (hyp, log) = inflation_bound_tests(&pr).unwrap();
        assert!(hyp.is_schedulable());
        assert!((hyp.lhs - 1.75).abs() < 1e-12);
        assert_eq!(hyp.rhs, 2.0);
        assert!(log.is_schedulable());
        assert!((log.rhs - (2.0f64 / (7.0 / 6.0)).ln()).abs() < 1e-12);
    }

    #[test]
    fn inflation_bounds_global() {
        let k = Task::implicit("k", 1.0, 4.0).unwrap();
        let pr = AnalysisProblem::new(k, vec![hp(1.0, 2.0)])
            .unwrap()
            .with_sigma(0.5)
            .unwrap()
            .with_inflation(1.0)
            .unwrap();
        let (hyp, _) = inflation_bound_tests(&pr).unwrap();
        assert!(hyp.is_schedulable());
        assert!((hyp.lhs - 2.8125).abs() < 1e-12);
        assert_eq!(hyp.rhs, 3.0);
    }

    #[test]
    fn uniform_jitter_basic() {
        let p = derive_uniform_jitter(&problem(1.0, 10.0, vec![hp(1.0, 4.0)]), 0.5).unwrap();
        let e = &p.entries[0];
        assert_eq!(e.t, 10.0);
        assert!((e.alpha - 1.2).abs() < 1e-12);
        assert!((e.beta - 0.4).abs() < 1e-12);
        assert_eq!(p.caps, Some(CoefficientCaps { alpha: 2.0, beta: 2.0 }));
    }

    #[test]
    fn uniform_jitter_absorbs_single_release() {
        let p = derive_uniform_jitter(&problem(1.0, 10.0, vec![hp(1.0, 20.0)]), 0.5).unwrap();
        assert!(p.entries.is_empty());
        assert_eq!(p.c_k_eff, 2.0);
    }

    #[test]
    fn uniform_jitter_integral_delta_rejected() {
        let pr = problem(1.0, 10.0, vec![hp(1.0, 4.0)]);
        assert_eq!(derive_uniform_jitter(&pr, 1.0), Err(Error::IntegralJitter(1.0)));
        assert_eq!(derive_uniform_jitter(&pr, 0.0), Err(Error::IntegralJitter(0.0)));
        let inflated = pr.with_inflation(1.0).unwrap();
        assert_eq!(derive_uniform_jitter(&inflated, 0.5), Err(Error::InflationWithJitter(1.0)));
    }

    #[test]
    fn refined_caps_near_integer_delta() {
        let pr = problem(1.0, 10.0, vec![hp(1.0, 4.0)]);
        let plain = derive_uniform_jitter(&pr, 0.99).unwrap().caps.unwrap();
        assert!((plain.alpha - 100.0).abs() < 1e-9);
        assert!((plain.beta - 100.0).abs() < 1e-9);
        let refined = derive_uniform_jitter_refined(&pr, 0.99).unwrap().caps.unwrap();
        assert!((refined.alpha - 2.0 / 1.01).abs() < 1e-12);
        assert!((refined.beta - 1.0 / 1.01).abs() < 1e-12);
    }

    #[test]
    fn refined_split() {
        let stays = derive_uniform_jitter_refined(&problem(1.0, 10.0, vec![hp(1.0, 4.0)]), 0.5).unwrap();
        assert_eq!(stays.entries.len(), 1);
        assert_eq!(stays.entries[0].t, 10.0);

        let moved = derive_uniform_jitter_refined(&problem(1.0, 10.0, vec![hp(1.5, 8.0)]), 0.5).unwrap();
        assert!(moved.entries.is_empty());
        assert_eq!(moved.c_k_eff, 1.0 + 2.0 * 1.5);
    }

    #[test]
    fn independent_jitter_basic() {
        let h = hp(1.0, 4.0).with_jitter(2.0).unwrap();
        let p = derive_independent_jitter(&problem(1.0, 10.0, vec![h])).unwrap();
        let e = &p.entries[0];
        assert_eq!(e.t, 10.0);
        assert!((e.alpha - 1.2).abs() < 1e-12);
        assert!((e.beta - 0.4).abs() < 1e-12);
    }

    #[test]
    fn independent_jitter_self_suspension_shape() {
        let h = hp(1.0, 4.0).with_jitter(3.0).unwrap();
        let p = derive_independent_jitter(&problem(1.0, 10.0, vec![h])).unwrap();
        assert_eq!(p.entries[0].t, 9.0);
        assert!((p.entries[0].alpha - 3.0 / 2.25).abs() < 1e-12);
    }

    #[test]
    fn independent_jitter_zero_matches_inflation() {
        let hps = vec![
            Task::implicit("a", 1.0, 4.0).unwrap().with_jitter(0.0).unwrap(),
            Task::implicit("b", 1.0, 5.0).unwrap().with_jitter(0.0).unwrap(),
            Task::implicit("c", 1.0, 12.0).unwrap().with_jitter(0.0).unwrap(),
        ];
        let pr = problem(1.0, 10.0, hps);
        let mut jit = derive_independent_jitter(&pr).unwrap();
        let inf = derive_constant_inflation(&pr).unwrap();
        assert_eq!(jit.entries, inf.entries);
        assert_eq!(jit.c_k_eff, inf.c_k_eff);
        // divisor period: test point before D_k, not at it
        assert_eq!(jit.entries[0].t, 5.0);
        jit.caps = inf.caps;
        jit.split.as_mut().unwrap().rule = SplitRule::PeriodVsDeadline;
        assert_eq!(jit, inf);
    }

    #[test]
    fn independent_jitter_requires_jitter() {
        let pr = problem(1.0, 10.0, vec![hp(1.0, 4.0)]);
        assert_eq!(derive_independent_jitter(&pr), Err(Error::MissingJitter("h".into())));
    }

    #[test]
    fn entries_sorted_with_ties_by_period_then_id() {
        let hps = vec![
            Task::implicit("z", 1.0, 4.0).unwrap(),
            Task::implicit("y", 0.5, 4.0).unwrap(),
            Task::implicit("x", 1.0, 8.0).unwrap(),
            Task::implicit("w", 1.0, 3.0).unwrap(),
        ];
        let p = derive_constant_inflation(&problem(1.0, 17.0, hps)).unwrap();
        let order: Vec<_> = p.entries.iter().map(|e| (e.task_id.as_str(), e.t)).collect();
        assert_eq!(order, [("w", 15.0), ("y", 16.0), ("z", 16.0), ("x", 16.0)]);
    }
}
