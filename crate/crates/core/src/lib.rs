/*!
# k2u

Polynomial-time schedulability tests for fixed-priority scheduling built
on *k-point effective tests*: a task is checked at only `k` time points
`t_1 <= ... <= t_k`, with per-task linear coefficients `alpha_i` and
`beta_i` describing how much interference a higher-priority task can add
at those points.

The crate derives these points and coefficients automatically for three
families of pseudo-polynomial tests:

* **constant inflation**: each higher-priority task contributes
  `sigma * (ceil(t / T_i) + b) * C_i` (uniprocessor, non-preemptive,
  bursty, global and partitioned multiprocessor);
* **bounded-delay service**: the right-hand side is a service curve
  `A(t)` instead of `t` (TDMA, linear supply with delay), reduced to the
  constant-inflation form;
* **arrival jitter**: higher-priority releases are shifted by a jitter
  term, either uniform (`delta * T_i`) or per task (`J_i`), which also
  covers self-suspending tasks.

From the derived parameters the closed-form hyperbolic, utilization and
logarithmic bounds follow directly ([`bounds`]). Every polynomial test is
a sufficient condition, so a failed test yields [`Verdict::Unknown`],
never "unschedulable".

The pseudo-polynomial time-demand analysis in [`oracle`] evaluates the
original (unreduced) tests exactly and serves as ground truth: whenever a
polynomial test accepts, the oracle must accept as well.
*/

pub mod analysis;
pub mod bounds;
pub mod derive;
mod error;
pub mod numeric;
pub mod oracle;
pub mod presets;
pub mod service;
pub mod task;
pub mod taskgen;
mod verdict;

pub use error::{Error, Result};
pub use verdict::{TestKind, TestVerdict, Verdict, Witness};
