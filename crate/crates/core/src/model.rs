//! Problem data: candidates, intersectional classes, instances, policy
//! parameters and solutions.
//!
//! An [`Instance`] is immutable once built. Classes are ordered by label and
//! members within each class are sorted by non-increasing score with ties
//! broken by ascending id, so solvers can work on per-class prefixes only.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub score: f64,
    pub attributes: Vec<String>,
}

impl Candidate {
    pub fn new(id: impl Into<String>, score: f64, attributes: Vec<String>) -> Self {
        Candidate {
            id: id.into(),
            score,
            attributes,
        }
    }

    /// Default class key: the attribute codes concatenated in order ("1Aa").
    pub fn class_label(&self) -> String {
        self.attributes.concat()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionalClass {
    label: String,
    members: Vec<Candidate>,
    utilities: Vec<f64>,
    prefix: Vec<f64>,
}

impl IntersectionalClass {
    fn from_members(label: String, mut members: Vec<Candidate>) -> Self {
        members.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        let utilities: Vec<f64> = members.iter().map(|c| c.score).collect();
        let mut prefix = Vec::with_capacity(utilities.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for &u in &utilities {
            acc += u;
            prefix.push(acc);
        }
        IntersectionalClass {
            label,
            members,
            utilities,
            prefix,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Candidate] {
        &self.members
    }

    /// Scores aligned with [`members`](Self::members), non-increasing.
    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    /// `prefix_utility(j)` is the summed utility of the top `j` members.
    pub fn prefix_utility(&self, j: usize) -> f64 {
        self.prefix[j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    classes: Vec<IntersectionalClass>,
    total_candidates: usize,
}

impl Instance {
    pub fn classes(&self) -> &[IntersectionalClass] {
        &self.classes
    }

    pub fn class(&self, index: usize) -> &IntersectionalClass {
        &self.classes[index]
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn total_candidates(&self) -> usize {
        self.total_candidates
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.size()).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.label()).collect()
    }

    pub fn max_score(&self) -> f64 {
        self.classes
            .iter()
            .filter_map(|c| c.utilities.first().copied())
            .fold(0.0, f64::max)
    }

    /// All candidates, class by class in class order.
    pub fn candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.classes.iter().flat_map(|c| c.members.iter())
    }

    /// Drops every class with fewer than `min_size` members. Returns the
    /// reduced instance and the labels of the removed classes.
    pub fn filter_small_classes(&self, min_size: usize) -> Result<(Instance, Vec<String>)> {
        if min_size == 0 {
            return Err(Error::InvalidParams("min_size must be at least 1".into()));
        }
        let (kept, removed): (Vec<_>, Vec<_>) = self
            .classes
            .iter()
            .cloned()
            .partition(|c| c.size() >= min_size);
        if kept.is_empty() {
            return Err(Error::NoClassesRemain { min_size });
        }
        let total_candidates = kept.iter().map(|c| c.size()).sum();
        Ok((
            Instance {
                classes: kept,
                total_candidates,
            },
            removed.into_iter().map(|c| c.label).collect(),
        ))
    }
}

/// Groups candidates into classes keyed by their concatenated attribute codes.
pub fn build_instance(candidates: Vec<Candidate>) -> Result<Instance> {
    build_instance_with(candidates, Candidate::class_label)
}

/// Groups candidates into classes using `class_key`. Classes are ordered by
/// key.
pub fn build_instance_with<F>(candidates: Vec<Candidate>, class_key: F) -> Result<Instance>
where
    F: Fn(&Candidate) -> String,
{
    let arity = match candidates.first() {
        Some(c) => c.attributes.len(),
        None => return Err(Error::EmptyInstance),
    };
    let mut seen = HashSet::with_capacity(candidates.len());
    let mut groups: BTreeMap<String, Vec<Candidate>> = BTreeMap::new();
    let total_candidates = candidates.len();
    for c in candidates {
        if !c.score.is_finite() || c.score < 0.0 {
            return Err(Error::InvalidScore {
                id: c.id,
                score: c.score,
            });
        }
        if c.attributes.len() != arity {
            return Err(Error::AttributeArity {
                id: c.id,
                expected: arity,
                found: c.attributes.len(),
            });
        }
        if !seen.insert(c.id.clone()) {
            return Err(Error::DuplicateId(c.id));
        }
        groups.entry(class_key(&c)).or_default().push(c);
    }
    let classes = groups
        .into_iter()
        .map(|(label, members)| IntersectionalClass::from_members(label, members))
        .collect();
    Ok(Instance {
        classes,
        total_candidates,
    })
}

/// Selection rate `p`, quota `k` and trade-off weight `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub selection_rate: f64,
    pub quota: usize,
    pub tradeoff: f64,
}

// Absorbs representation error in products such as 0.29 * 100.
const FLOOR_SLACK: f64 = 1e-9;

impl PolicyParams {
    /// `k = floor(p * n)`; `p` is kept as given.
    pub fn from_rate(n: usize, selection_rate: f64, tradeoff: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&selection_rate) {
            return Err(Error::InvalidParams(format!(
                "selection rate {selection_rate} is outside [0, 1]"
            )));
        }
        check_tradeoff(tradeoff)?;
        let quota = ((selection_rate * n as f64) + FLOOR_SLACK).floor() as usize;
        Ok(PolicyParams {
            selection_rate,
            quota: quota.min(n),
            tradeoff,
        })
    }

    /// `p = k / n`.
    pub fn from_quota(n: usize, quota: usize, tradeoff: f64) -> Result<Self> {
        if quota > n {
            return Err(Error::QuotaExceedsPool { k: quota, n });
        }
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        check_tradeoff(tradeoff)?;
        Ok(PolicyParams {
            selection_rate: quota as f64 / n as f64,
            quota,
            tradeoff,
        })
    }

    pub fn with_tradeoff(self, tradeoff: f64) -> Self {
        PolicyParams { tradeoff, ..self }
    }

    pub(crate) fn check_against(&self, instance: &Instance) -> Result<()> {
        if self.quota > instance.total_candidates() {
            return Err(Error::QuotaExceedsPool {
                k: self.quota,
                n: instance.total_candidates(),
            });
        }
        Ok(())
    }
}

fn check_tradeoff(tradeoff: f64) -> Result<()> {
    if !tradeoff.is_finite() || tradeoff < 0.0 {
        return Err(Error::InvalidParams(format!(
            "trade-off weight {tradeoff} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Per-class admitted counts. Class `i` admits its top `counts[i]` members.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Selection {
    pub counts: Vec<usize>,
}

impl Selection {
    pub fn new(counts: Vec<usize>) -> Self {
        Selection { counts }
    }

    pub fn empty(num_classes: usize) -> Self {
        Selection {
            counts: vec![0; num_classes],
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Checks length and per-class bounds against `instance`.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.counts.len() != instance.num_classes() {
            return Err(Error::SelectionLength {
                expected: instance.num_classes(),
                found: self.counts.len(),
            });
        }
        for (index, (&count, class)) in self.counts.iter().zip(instance.classes()).enumerate() {
            if count > class.size() {
                return Err(Error::Infeasible {
                    index,
                    label: class.label().to_string(),
                    count,
                    size: class.size(),
                });
            }
        }
        Ok(())
    }

    /// Admitted candidates in class order, best first within each class.
    pub fn selected<'a>(&'a self, instance: &'a Instance) -> impl Iterator<Item = &'a Candidate> {
        instance
            .classes()
            .iter()
            .zip(&self.counts)
            .flat_map(|(class, &c)| class.members()[..c].iter())
    }

    /// Per-candidate decision vector, class by class.
    pub fn to_bits(&self, instance: &Instance) -> Vec<Vec<bool>> {
        instance
            .classes()
            .iter()
            .zip(&self.counts)
            .map(|(class, &c)| (0..class.size()).map(|j| j < c).collect())
            .collect()
    }
}

/// `J = B - lambda * D` with its per-class parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveBreakdown {
    pub total: f64,
    pub utility: f64,
    pub discrepancy: f64,
    pub tradeoff: f64,
    pub per_class_utility: Vec<f64>,
    pub per_class_discrepancy: Vec<f64>,
}
