//! Exact solver: dynamic program over (classes seen, seats filled).
//!
//! `value[i][j]` is the best objective over classes `0..i` admitting exactly
//! `j` candidates in total; every class in `0..i` contributes its penalty
//! whether or not it admits anyone. `value[0][0] = 0` and `value[0][j] = -inf`
//! for `j > 0`, so a finite cell always spends its whole budget.

use std::io::Write;

use crate::error::Result;
use crate::model::{Instance, ObjectiveBreakdown, PolicyParams, Selection};
use crate::objective::{evaluate, prefix_table};

#[derive(Debug, Clone, PartialEq)]
pub struct DpTable {
    /// `(|C| + 1) x (k + 1)` values.
    pub value: Vec<Vec<f64>>,
    /// Number admitted from class `i - 1` in the argmax of `value[i][j]`.
    pub choice: Vec<Vec<usize>>,
    /// Inner-maximization terms scanned.
    pub cell_updates: u64,
}

impl DpTable {
    pub fn optimum(&self) -> f64 {
        *self.value.last().and_then(|r| r.last()).expect("table has at least one cell")
    }

    /// Writes `value` as CSV: one row per class prefix, one column per budget.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.value[0].len() - 1;
        let mut header = vec!["classes".to_string()];
        header.extend((0..=k).map(|j| j.to_string()));
        w.write_record(&header)?;
        for (i, row) in self.value.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    pub selection: Selection,
    pub breakdown: ObjectiveBreakdown,
    pub table: DpTable,
}

pub fn solve_dp(instance: &Instance, params: &PolicyParams) -> Result<DpSolution> {
    params.check_against(instance)?;
    let k = params.quota;
    let contrib = prefix_table(instance, params);
    let classes = instance.num_classes();

    let mut value = Vec::with_capacity(classes + 1);
    let mut choice = Vec::with_capacity(classes + 1);
    let mut first = vec![f64::NEG_INFINITY; k + 1];
    first[0] = 0.0;
    value.push(first);
    choice.push(vec![0; k + 1]);

    let mut cell_updates = 0u64;
    for i in 1..=classes {
        let row_contrib = contrib.row(i - 1);
        let cap = instance.class(i - 1).size();
        let prev = &value[i - 1];
        let mut row = vec![f64::NEG_INFINITY; k + 1];
        let mut arg = vec![0usize; k + 1];
        for j in 0..=k {
            let upper = j.min(cap);
            let mut best = f64::NEG_INFINITY;
            let mut best_m = 0;
            for m in 0..=upper {
                let before = prev[j - m];
                if before == f64::NEG_INFINITY {
                    continue;
                }
                let v = row_contrib[m] + before;
                // strict: smallest m wins ties
                if v > best {
                    best = v;
                    best_m = m;
                }
            }
            cell_updates += upper as u64 + 1;
            row[j] = best;
            arg[j] = best_m;
        }
        value.push(row);
        choice.push(arg);
    }

    let mut counts = vec![0; classes];
    let mut j = k;
    for i in (1..=classes).rev() {
        let m = choice[i][j];
        counts[i - 1] = m;
        j -= m;
    }
    debug_assert_eq!(j, 0);

    let selection = Selection::new(counts);
    let breakdown = evaluate(instance, params, &selection)?;
    Ok(DpSolution {
        selection,
        breakdown,
        table: DpTable {
            value,
            choice,
            cell_updates,
        },
    })
}
