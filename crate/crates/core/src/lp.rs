//! Continuous relaxation of the selection problem and its rounding.
//!
//! With per-candidate decisions relaxed to `[0, 1]`, an optimal relaxed
//! solution fills each class from the top, so the relaxation reduces to
//! choosing a fractional mass `t_i` per class maximizing
//! `sum_i P_i(t_i) - lambda * |t_i / n_i - p|` subject to `sum_i t_i = k`,
//! where `P_i` interpolates the class's utility prefix sums linearly. Each
//! term is concave and piecewise linear with breakpoints at the integers and
//! at `p * n_i`, so extending the steepest remaining segment first is exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::model::{Instance, IntersectionalClass, ObjectiveBreakdown, PolicyParams, Selection};
use crate::objective::{evaluate, gain_at};

const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSelection {
    pub amounts: Vec<f64>,
}

impl FractionalSelection {
    pub fn total(&self) -> f64 {
        self.amounts.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub fractional: FractionalSelection,
    pub relaxed_total: f64,
}

#[derive(Debug, Clone)]
pub struct RoundedSolution {
    pub selection: Selection,
    pub breakdown: ObjectiveBreakdown,
    /// `relaxed_total - breakdown.total`.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
}

fn kink(class: &IntersectionalClass, rate: f64) -> f64 {
    let k = rate * class.size() as f64;
    if (k - k.round()).abs() < SNAP {
        k.round()
    } else {
        k
    }
}

/// Linear pieces of one class's continuous contribution, in order of `t`.
/// Slopes are non-increasing.
pub fn segments(class: &IntersectionalClass, params: &PolicyParams) -> Vec<Segment> {
    let n = class.size() as f64;
    let kink = kink(class, params.selection_rate);
    let below = params.tradeoff / n;
    let mut out = Vec::with_capacity(class.size() + 1);
    for (j, &u) in class.utilities().iter().enumerate() {
        let (lo, hi) = (j as f64, j as f64 + 1.0);
        if lo < kink && kink < hi {
            out.push(Segment {
                start: lo,
                end: kink,
                slope: u + below,
            });
            out.push(Segment {
                start: kink,
                end: hi,
                slope: u - below,
            });
        } else if hi <= kink {
            out.push(Segment {
                start: lo,
                end: hi,
                slope: u + below,
            });
        } else {
            out.push(Segment {
                start: lo,
                end: hi,
                slope: u - below,
            });
        }
    }
    out
}

/// `P_i(t) - lambda * |t / n_i - p|` for `t` in `[0, n_i]`.
pub fn continuous_contribution(class: &IntersectionalClass, params: &PolicyParams, t: f64) -> f64 {
    let n = class.size();
    let t = t.clamp(0.0, n as f64);
    let whole = (t.floor() as usize).min(n);
    let frac = t - whole as f64;
    let mut p = class.prefix_utility(whole);
    if whole < n {
        p += frac * class.utilities()[whole];
    }
    p - params.tradeoff * (t / n as f64 - params.selection_rate).abs()
}

pub fn relaxed_objective(instance: &Instance, params: &PolicyParams, frac: &FractionalSelection) -> f64 {
    instance
        .classes()
        .iter()
        .zip(&frac.amounts)
        .map(|(c, &t)| continuous_contribution(c, params, t))
        .sum()
}

#[derive(Clone, Copy)]
struct Head {
    slope: f64,
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
    fn cmp(&self, other: &Self) -> Ordering {
        self.slope
            .total_cmp(&other.slope)
            .then_with(|| other.class.cmp(&self.class))
    }
}

pub fn solve_lp_relaxation(instance: &Instance, params: &PolicyParams) -> Result<LpSolution> {
    params.check_against(instance)?;
    let segs: Vec<Vec<Segment>> = instance.classes().iter().map(|c| segments(c, params)).collect();
    let mut amounts = vec![0.0; segs.len()];
    let mut next = vec![0usize; segs.len()];
    let mut heap: BinaryHeap<Head> = segs
        .iter()
        .enumerate()
        .filter_map(|(class, s)| s.first().map(|seg| Head { slope: seg.slope, class }))
        .collect();

    let mut remaining = params.quota as f64;
    while remaining > 0.0 {
        let Some(Head { class, .. }) = heap.pop() else {
            break;
        };
        let seg = segs[class][next[class]];
        let len = seg.end - seg.start;
        if remaining < len - SNAP {
            amounts[class] = seg.start + remaining;
            break;
        }
        amounts[class] = seg.end;
        remaining -= len;
        if remaining.abs() < SNAP {
            break;
        }
        next[class] += 1;
        if let Some(s) = segs[class].get(next[class]) {
            heap.push(Head { slope: s.slope, class });
        }
    }

    let fractional = FractionalSelection { amounts };
    let relaxed_total = relaxed_objective(instance, params, &fractional);
    Ok(LpSolution {
        fractional,
        relaxed_total,
    })
}

/// Floors every amount and hands the leftover seats to the classes with the
/// largest fractional parts (ties: larger marginal gain, then lower index).
pub fn round_lp(
    fractional: &FractionalSelection,
    instance: &Instance,
    params: &PolicyParams,
) -> Result<RoundedSolution> {
    let snapped: Vec<f64> = fractional
        .amounts
        .iter()
        .map(|&a| if (a - a.round()).abs() < SNAP { a.round() } else { a })
        .collect();
    let mut counts: Vec<usize> = snapped.iter().map(|a| a.floor().max(0.0) as usize).collect();
    for (c, class) in counts.iter_mut().zip(instance.classes()) {
        *c = (*c).min(class.size());
    }
    let placed: usize = counts.iter().sum();
    let leftover = params.quota.saturating_sub(placed);

    let mut order: Vec<(usize, f64, f64)> = counts
        .iter()
        .enumerate()
        .filter(|&(i, &c)| c < instance.class(i).size())
        .map(|(i, &c)| {
            let frac = snapped[i] - c as f64;
            let gain = gain_at(instance.class(i).utilities(), c, params);
            (i, frac, gain)
        })
        .collect();
    order.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| b.2.total_cmp(&a.2))
            .then_with(|| a.0.cmp(&b.0))
    });
    for &(i, _, _) in order.iter().take(leftover) {
        counts[i] += 1;
    }

    let selection = Selection::new(counts);
    let breakdown = evaluate(instance, params, &selection)?;
    let relaxed = relaxed_objective(instance, params, fractional);
    Ok(RoundedSolution {
        gap: relaxed - breakdown.total,
        selection,
        breakdown,
    })
}

/// Optimality certificate for a relaxed solution: a multiplier interval
/// `[low, high]` such that every class below capacity has right slope
/// `<= low` and every class above zero has left slope `>= high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub multiplier_low: f64,
    pub multiplier_high: f64,
    pub satisfied: bool,
}

fn slopes_at(segs: &[Segment], t: f64) -> (Option<f64>, Option<f64>) {
    let mut left = None;
    let mut right = None;
    for s in segs {
        if (s.end - t).abs() < SNAP {
            left = Some(s.slope);
        } else if (s.start - t).abs() < SNAP {
            right = Some(s.slope);
        } else if s.start < t && t < s.end {
            left = Some(s.slope);
            right = Some(s.slope);
        }
    }
    (left, right)
}

pub fn kkt_check(
    instance: &Instance,
    params: &PolicyParams,
    fractional: &FractionalSelection,
    tolerance: f64,
) -> KktReport {
    let mut low = f64::NEG_INFINITY;
    let mut high = f64::INFINITY;
    for (class, &t) in instance.classes().iter().zip(&fractional.amounts) {
        let segs = segments(class, params);
        let (left, right) = slopes_at(&segs, t);
        if let Some(r) = right {
            low = low.max(r);
        }
        if let Some(l) = left {
            high = high.min(l);
        }
    }
    KktReport {
        multiplier_low: low,
        multiplier_high: high,
        satisfied: low <= high + tolerance,
    }
}
