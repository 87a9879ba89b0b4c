//! The fairness-penalized objective `J = B - lambda * D` and the per-class
//! prefix contribution table every solver is built on.

use crate::error::{Error, Result};
use crate::model::{Instance, ObjectiveBreakdown, PolicyParams, Selection};

/// `|admitted / size - p|`.
#[inline]
pub fn class_discrepancy(admitted: usize, size: usize, rate: f64) -> f64 {
    (admitted as f64 / size as f64 - rate).abs()
}

/// Scores `selection` from scratch.
pub fn evaluate(
    instance: &Instance,
    params: &PolicyParams,
    selection: &Selection,
) -> Result<ObjectiveBreakdown> {
    selection.validate(instance)?;
    let mut per_class_utility = Vec::with_capacity(instance.num_classes());
    let mut per_class_discrepancy = Vec::with_capacity(instance.num_classes());
    for (class, &count) in instance.classes().iter().zip(&selection.counts) {
        let mut b = 0.0;
        for &u in &class.utilities()[..count] {
            b += u;
        }
        per_class_utility.push(b);
        per_class_discrepancy.push(class_discrepancy(count, class.size(), params.selection_rate));
    }
    let utility: f64 = per_class_utility.iter().sum();
    let discrepancy: f64 = per_class_discrepancy.iter().sum();
    Ok(ObjectiveBreakdown {
        total: utility - params.tradeoff * discrepancy,
        utility,
        discrepancy,
        tradeoff: params.tradeoff,
        per_class_utility,
        per_class_discrepancy,
    })
}

/// `table[i][j]`: contribution of class `i` when its top `j` members are
/// admitted, for `j = 0..=n_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixContribution {
    pub table: Vec<Vec<f64>>,
}

impl PrefixContribution {
    pub fn row(&self, class: usize) -> &[f64] {
        &self.table[class]
    }

    pub fn get(&self, class: usize, admitted: usize) -> f64 {
        self.table[class][admitted]
    }

    /// `sum_i table[i][counts[i]]`.
    pub fn total(&self, selection: &Selection) -> f64 {
        self.table
            .iter()
            .zip(&selection.counts)
            .map(|(row, &c)| row[c])
            .sum()
    }
}

pub fn prefix_table(instance: &Instance, params: &PolicyParams) -> PrefixContribution {
    let table = instance
        .classes()
        .iter()
        .map(|class| {
            (0..=class.size())
                .map(|j| {
                    class.prefix_utility(j)
                        - params.tradeoff * class_discrepancy(j, class.size(), params.selection_rate)
                })
                .collect()
        })
        .collect();
    PrefixContribution { table }
}

/// Change in `J` from admitting the next member of a class that currently
/// admits `admitted`. Callers guarantee `admitted < size`.
#[inline]
pub(crate) fn gain_at(utilities: &[f64], admitted: usize, params: &PolicyParams) -> f64 {
    let n = utilities.len();
    let p = params.selection_rate;
    utilities[admitted]
        - params.tradeoff * (class_discrepancy(admitted + 1, n, p) - class_discrepancy(admitted, n, p))
}

/// `J(selection + one more from class_index) - J(selection)`.
pub fn marginal_gain(
    instance: &Instance,
    params: &PolicyParams,
    selection: &Selection,
    class_index: usize,
) -> Result<f64> {
    selection.validate(instance)?;
    let class = instance
        .classes()
        .get(class_index)
        .ok_or_else(|| Error::InvalidParams(format!("class index {class_index} out of range")))?;
    let admitted = selection.counts[class_index];
    if admitted >= class.size() {
        return Err(Error::ClassExhausted {
            index: class_index,
            label: class.label().to_string(),
        });
    }
    Ok(gain_at(class.utilities(), admitted, params))
}
