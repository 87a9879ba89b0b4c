//! Greedy heuristics. Each step admits the candidate whose admission raises
//! `J` the most. Admitting anyone but a class's best unadmitted member is
//! dominated, so only class frontiers are considered.
//!
//! [`solve_greedy_naive`] rescans every frontier per step; [`solve_greedy_merged`]
//! precomputes each class's gain sequence and merges them through a heap of
//! class heads. Both apply the same rule and return the same selection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::model::{Instance, ObjectiveBreakdown, PolicyParams, Selection};
use crate::objective::{evaluate, gain_at};

#[derive(Debug, Clone)]
pub struct GreedySolution {
    pub selection: Selection,
    pub breakdown: ObjectiveBreakdown,
    /// Marginal-gain evaluations plus heap operations.
    pub op_count: u64,
}

pub fn solve_greedy_naive(instance: &Instance, params: &PolicyParams) -> Result<GreedySolution> {
    params.check_against(instance)?;
    let mut counts = vec![0usize; instance.num_classes()];
    let mut op_count = 0u64;
    for _ in 0..params.quota {
        let mut best: Option<(usize, f64)> = None;
        for (i, class) in instance.classes().iter().enumerate() {
            if counts[i] >= class.size() {
                continue;
            }
            let g = gain_at(class.utilities(), counts[i], params);
            op_count += 1;
            // strict: lowest class index wins ties
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((i, g));
            }
        }
        let (i, _) = best.expect("quota <= n leaves a frontier every step");
        counts[i] += 1;
    }
    finish(instance, params, counts, op_count)
}

#[derive(Debug, Clone, Copy)]
struct Head {
    gain: f64,
    class: usize,
}

impl PartialEq for Head {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Head {}

impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Head {
    // max-heap: larger gain first, then lower class index
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.class.cmp(&self.class))
    }
}

pub fn solve_greedy_merged(instance: &Instance, params: &PolicyParams) -> Result<GreedySolution> {
    params.check_against(instance)?;
    let k = params.quota;
    let mut counts = vec![0usize; instance.num_classes()];
    if k == 0 {
        return finish(instance, params, counts, 0);
    }
    let mut op_count = 0u64;

    let gains: Vec<Vec<f64>> = instance
        .classes()
        .iter()
        .map(|class| {
            let depth = class.size().min(k);
            op_count += depth as u64;
            (0..depth)
                .map(|j| gain_at(class.utilities(), j, params))
                .collect()
        })
        .collect();

    // Gains within a class need not be sorted, so the heap only ever holds
    // each class's current head.
    let mut heap = BinaryHeap::with_capacity(gains.len());
    for (class, seq) in gains.iter().enumerate() {
        if let Some(&gain) = seq.first() {
            heap.push(Head { gain, class });
            op_count += 1;
        }
    }
    for _ in 0..k {
        let Head { class, .. } = heap.pop().expect("quota <= n leaves a head every step");
        op_count += 1;
        counts[class] += 1;
        if let Some(&gain) = gains[class].get(counts[class]) {
            heap.push(Head { gain, class });
            op_count += 1;
        }
    }
    finish(instance, params, counts, op_count)
}

fn finish(
    instance: &Instance,
    params: &PolicyParams,
    counts: Vec<usize>,
    op_count: u64,
) -> Result<GreedySolution> {
    let selection = Selection::new(counts);
    let breakdown = evaluate(instance, params, &selection)?;
    Ok(GreedySolution {
        selection,
        breakdown,
        op_count,
    })
}
