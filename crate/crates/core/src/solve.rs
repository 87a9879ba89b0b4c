//! Uniform entry point over the solvers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dp::solve_dp;
use crate::error::{Error, Result};
use crate::greedy::{solve_greedy_merged, solve_greedy_naive};
use crate::lp::{round_lp, solve_lp_relaxation};
use crate::model::{Instance, ObjectiveBreakdown, PolicyParams, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Dp,
    Greedy,
    GreedyMerged,
    /// Rounded continuous relaxation.
    Lp,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Dp,
        SolverKind::Greedy,
        SolverKind::GreedyMerged,
        SolverKind::Lp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Dp => "dp",
            SolverKind::Greedy => "greedy",
            SolverKind::GreedyMerged => "greedy-merged",
            SolverKind::Lp => "lp",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown solver `{s}` (dp, greedy, greedy-merged, lp)")))
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub selection: Selection,
    pub breakdown: ObjectiveBreakdown,
    /// Relaxed objective, for the LP solver only.
    pub relaxed_total: Option<f64>,
}

pub fn solve(instance: &Instance, params: &PolicyParams, solver: SolverKind) -> Result<Solved> {
    Ok(match solver {
        SolverKind::Dp => {
            let s = solve_dp(instance, params)?;
            Solved {
                selection: s.selection,
                breakdown: s.breakdown,
                relaxed_total: None,
            }
        }
        SolverKind::Greedy => {
            let s = solve_greedy_naive(instance, params)?;
            Solved {
                selection: s.selection,
                breakdown: s.breakdown,
                relaxed_total: None,
            }
        }
        SolverKind::GreedyMerged => {
            let s = solve_greedy_merged(instance, params)?;
            Solved {
                selection: s.selection,
                breakdown: s.breakdown,
                relaxed_total: None,
            }
        }
        SolverKind::Lp => {
            let relaxed = solve_lp_relaxation(instance, params)?;
            let rounded = round_lp(&relaxed.fractional, instance, params)?;
            Solved {
                selection: rounded.selection,
                breakdown: rounded.breakdown,
                relaxed_total: Some(relaxed.relaxed_total),
            }
        }
    })
}

/// Plain-text summary: header lines then a per-class CSV table.
pub fn write_summary<W: std::io::Write>(
    instance: &Instance,
    params: &PolicyParams,
    solver: SolverKind,
    solved: &Solved,
    mut out: W,
) -> Result<()> {
    let b = &solved.breakdown;
    writeln!(out, "solver: {solver}")?;
    writeln!(out, "n: {}", instance.total_candidates())?;
    writeln!(out, "k: {}", params.quota)?;
    writeln!(out, "p: {}", params.selection_rate)?;
    writeln!(out, "lambda: {}", params.tradeoff)?;
    writeln!(out, "J: {}", b.total)?;
    writeln!(out, "B: {}", b.utility)?;
    writeln!(out, "D: {}", b.discrepancy)?;
    if let Some(relaxed) = solved.relaxed_total {
        writeln!(out, "relaxed_J: {relaxed}")?;
        writeln!(out, "gap: {}", relaxed - b.total)?;
    }
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["class_label", "size", "admitted", "rate", "utility", "discrepancy"])?;
    for (i, class) in instance.classes().iter().enumerate() {
        let c = solved.selection.counts[i];
        w.write_record([
            class.label().to_string(),
            class.size().to_string(),
            c.to_string(),
            (c as f64 / class.size() as f64).to_string(),
            b.per_class_utility[i].to_string(),
            b.per_class_discrepancy[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `id,class_label,score` for every admitted candidate.
pub fn write_selection_csv<W: std::io::Write>(instance: &Instance, selection: &Selection, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "class_label", "score"])?;
    for (class, &c) in instance.classes().iter().zip(&selection.counts) {
        for m in &class.members()[..c] {
            w.write_record([m.id.as_str(), class.label(), &m.score.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
