//! Intersectional fair top-k selection.
//!
//! Pick `k` candidates from a pool partitioned into intersectional classes,
//! maximizing total selected utility `B` minus `lambda` times the summed
//! absolute gap `D` between each class's selection rate and the target rate
//! `p`.
//!
//! Solvers:
//! - [`dp::solve_dp`]: exact dynamic program over class quotas.
//! - [`greedy::solve_greedy_naive`] / [`greedy::solve_greedy_merged`]: greedy
//!   marginal-gain admission, rescanning or heap-merged.
//! - [`lp::solve_lp_relaxation`] + [`lp::round_lp`]: continuous relaxation
//!   (upper bound) and a feasible rounding.
//! - [`oracle`]: brute-force references for testing.
//!
//! [`experiments`] runs lambda sweeps and writes CSV/SVG reports;
//! [`ingest`] loads coded CSV data and generates seeded synthetic pools.
//!
//! ```
//! use fairtopk::model::{build_instance, Candidate, PolicyParams};
//! use fairtopk::dp::solve_dp;
//!
//! let c = |id: &str, s: f64, class: &str| Candidate::new(id, s, vec![class.into()]);
//! let pool = build_instance(vec![
//!     c("a1", 10.0, "a"), c("a2", 5.0, "a"),
//!     c("b1", 4.0, "b"), c("b2", 3.0, "b"),
//! ])?;
//! let params = PolicyParams::from_quota(pool.total_candidates(), 2, 2.0)?;
//! let best = solve_dp(&pool, &params)?;
//! assert_eq!(best.selection.counts, vec![1, 1]);
//! assert_eq!(best.breakdown.total, 14.0);
//! # Ok::<(), fairtopk::Error>(())
//! ```

// validation writes `!(x > 0.0)` so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dp;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod greedy;
pub mod ingest;
pub mod lp;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod plot;
pub mod solve;

pub use error::{Error, Result};
pub use model::{build_instance, Candidate, Instance, ObjectiveBreakdown, PolicyParams, Selection};
pub use solve::{solve, SolverKind};
