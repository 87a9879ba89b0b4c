//! Exhaustive reference solvers. Correctness anchors for the fast solvers;
//! not meant for anything beyond desk-sized instances.

use crate::error::{Error, Result};
use crate::model::{Instance, PolicyParams, Selection};
use crate::objective::evaluate;

pub const MAX_COMPOSITIONS: u128 = 10_000_000;
pub const MAX_SUBSET_POOL: usize = 20;

/// `prod_i (min(n_i, k) + 1)`, saturating.
pub fn composition_bound(instance: &Instance, k: usize) -> u128 {
    instance
        .sizes()
        .iter()
        .fold(1u128, |acc, &n| acc.saturating_mul(n.min(k) as u128 + 1))
}

/// Visits every count vector with `counts[i] <= sizes[i]` summing to `k`, in
/// lexicographic order.
fn for_each_composition<F: FnMut(&[usize])>(sizes: &[usize], k: usize, mut visit: F) {
    let mut suffix = vec![0usize; sizes.len() + 1];
    for i in (0..sizes.len()).rev() {
        suffix[i] = suffix[i + 1] + sizes[i];
    }
    let mut counts = vec![0usize; sizes.len()];
    fn rec<F: FnMut(&[usize])>(
        i: usize,
        remaining: usize,
        sizes: &[usize],
        suffix: &[usize],
        counts: &mut Vec<usize>,
        visit: &mut F,
    ) {
        if i == sizes.len() {
            if remaining == 0 {
                visit(counts);
            }
            return;
        }
        let lo = remaining.saturating_sub(suffix[i + 1]);
        let hi = sizes[i].min(remaining);
        for c in lo..=hi {
            counts[i] = c;
            rec(i + 1, remaining - c, sizes, suffix, counts, visit);
        }
        counts[i] = 0;
    }
    if k <= suffix[0] {
        rec(0, k, sizes, &suffix, &mut counts, &mut visit);
    }
}

fn guard(instance: &Instance, params: &PolicyParams) -> Result<()> {
    params.check_against(instance)?;
    let compositions = composition_bound(instance, params.quota);
    if compositions > MAX_COMPOSITIONS {
        return Err(Error::OracleTooLarge {
            compositions,
            limit: MAX_COMPOSITIONS,
        });
    }
    Ok(())
}

/// Best count vector by exhaustive enumeration; ties go to the
/// lexicographically smallest vector.
pub fn oracle_counts(instance: &Instance, params: &PolicyParams) -> Result<(Selection, f64)> {
    guard(instance, params)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut failure = None;
    for_each_composition(&instance.sizes(), params.quota, |counts| {
        match evaluate(instance, params, &Selection::new(counts.to_vec())) {
            Ok(b) => {
                if best.as_ref().is_none_or(|(_, j)| b.total > *j) {
                    best = Some((counts.to_vec(), b.total));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (counts, j) = best.expect("k <= n admits at least one composition");
    Ok((Selection::new(counts), j))
}

/// Count vector with the smallest total discrepancy, ignoring utility.
pub fn oracle_min_discrepancy(instance: &Instance, params: &PolicyParams) -> Result<(Selection, f64)> {
    guard(instance, params)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_composition(&instance.sizes(), params.quota, |counts| {
        let d: f64 = counts
            .iter()
            .zip(instance.classes())
            .map(|(&c, class)| (c as f64 / class.size() as f64 - params.selection_rate).abs())
            .sum();
        if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
            best = Some((counts.to_vec(), d));
        }
    });
    let (counts, d) = best.expect("k <= n admits at least one composition");
    Ok((Selection::new(counts), d))
}

/// Best subset of `k` candidates over all `C(n, k)` subsets, scored on the
/// per-candidate decision vector. Returns the decisions class by class in
/// member order.
pub fn oracle_subsets(instance: &Instance, params: &PolicyParams) -> Result<(Vec<Vec<bool>>, f64)> {
    params.check_against(instance)?;
    let n = instance.total_candidates();
    if n > MAX_SUBSET_POOL {
        return Err(Error::SubsetOracleTooLarge {
            n,
            limit: MAX_SUBSET_POOL,
        });
    }
    let mut scores = Vec::with_capacity(n);
    let mut owner = Vec::with_capacity(n);
    for (i, class) in instance.classes().iter().enumerate() {
        for &u in class.utilities() {
            scores.push(u);
            owner.push(i);
        }
    }
    let sizes = instance.sizes();
    let k = params.quota;

    let score_mask = |mask: u32| -> f64 {
        let mut b = 0.0;
        let mut per_class = vec![0usize; sizes.len()];
        for bit in 0..n {
            if mask & (1 << bit) != 0 {
                b += scores[bit];
                per_class[owner[bit]] += 1;
            }
        }
        let d: f64 = per_class
            .iter()
            .zip(&sizes)
            .map(|(&c, &s)| (c as f64 / s as f64 - params.selection_rate).abs())
            .sum();
        b - params.tradeoff * d
    };

    let mut best_mask = 0u32;
    let mut best = f64::NEG_INFINITY;
    if k == 0 {
        best = score_mask(0);
    } else {
        // Gosper's hack: masks with exactly k bits set, increasing.
        let limit = 1u64 << n;
        let mut mask: u64 = (1u64 << k) - 1;
        while mask < limit {
            let j = score_mask(mask as u32);
            if j > best {
                best = j;
                best_mask = mask as u32;
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            mask = (((r ^ mask) >> 2) / c) | r;
        }
    }

    let mut bits: Vec<Vec<bool>> = sizes.iter().map(|&s| vec![false; s]).collect();
    let mut cursor = 0;
    for row in bits.iter_mut() {
        for bit in row.iter_mut() {
            *bit = best_mask & (1 << cursor) != 0;
            cursor += 1;
        }
    }
    Ok((bits, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Candidate};

    fn inst(classes: &[(&str, &[f64])]) -> Instance {
        let mut cands = Vec::new();
        for (label, scores) in classes {
            for (j, &s) in scores.iter().enumerate() {
                cands.push(Candidate::new(format!("{label}{j}"), s, vec![label.to_string()]));
            }
        }
        build_instance(cands).unwrap()
    }

    #[test]
    fn compositions_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_composition(&[2, 2], 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        let mut none = 0;
        for_each_composition(&[1, 1], 3, |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn worked_instance() {
        let i = inst(&[("a", &[10.0, 5.0]), ("b", &[4.0, 3.0])]);
        let p = PolicyParams {
            selection_rate: 0.5,
            quota: 2,
            tradeoff: 2.0,
        };
        let (sel, j) = oracle_counts(&i, &p).unwrap();
        assert_eq!(sel.counts, vec![1, 1]);
        assert_eq!(j, 14.0);
        let (bits, js) = oracle_subsets(&i, &p).unwrap();
        assert_eq!(js, 14.0);
        assert_eq!(bits, vec![vec![true, false], vec![true, false]]);
    }

    #[test]
    fn extremes() {
        let i = inst(&[("a", &[10.0, 5.0]), ("b", &[4.0, 3.0, 1.0])]);
        let zero = PolicyParams {
            selection_rate: 0.4,
            quota: 0,
            tradeoff: 3.0,
        };
        let (sel, j) = oracle_counts(&i, &zero).unwrap();
        assert_eq!(sel.counts, vec![0, 0]);
        assert!((j - (-3.0 * 2.0 * 0.4)).abs() < 1e-12);
        let all = PolicyParams {
            selection_rate: 0.4,
            quota: 5,
            tradeoff: 1.0,
        };
        let (sel, _) = oracle_counts(&i, &all).unwrap();
        assert_eq!(sel.counts, vec![2, 3]);
        let b = evaluate(&i, &all, &sel).unwrap();
        assert!((b.discrepancy - 2.0 * 0.6).abs() < 1e-12);
        let (bits, js) = oracle_subsets(&i, &all).unwrap();
        assert!(bits.iter().flatten().all(|&b| b));
        assert_eq!(js, b.total);
    }

    #[test]
    fn ties_still_leave_a_prefix_optimum() {
        let i = inst(&[("a", &[5.0, 5.0, 5.0]), ("b", &[5.0, 4.0])]);
        let p = PolicyParams::from_quota(5, 2, 1.0).unwrap();
        let (_, js) = oracle_subsets(&i, &p).unwrap();
        let (_, jc) = oracle_counts(&i, &p).unwrap();
        assert_eq!(js, jc);
    }

    #[test]
    fn guards() {
        let big: Vec<f64> = (0..21).map(|x| x as f64).collect();
        let i = inst(&[("a", &big)]);
        let p = PolicyParams::from_quota(21, 3, 0.0).unwrap();
        assert!(matches!(
            oracle_subsets(&i, &p),
            Err(Error::SubsetOracleTooLarge { n: 21, .. })
        ));
        let wide: Vec<(String, Vec<f64>)> =
            (0..8).map(|c| (format!("c{c}"), vec![1.0; 10])).collect();
        let refs: Vec<(&str, &[f64])> = wide.iter().map(|(l, s)| (l.as_str(), s.as_slice())).collect();
        let i = inst(&refs);
        let p = PolicyParams::from_quota(80, 40, 0.0).unwrap();
        assert!(matches!(oracle_counts(&i, &p), Err(Error::OracleTooLarge { .. })));
    }
}
