//! Linear constraints `w·m <= k`, transition gains, admissibility predicates
//! and the legal/admissible marking sets of single constraints and of
//! disjunctions.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{Marking, OrdinaryNet, TransitionId};
use crate::reach::{reach_all, ExploreLimits, ReachError, ReachGraph};

/// Largest weight a constraint may carry. Keeps gains and dot products far
/// from integer overflow.
pub const MAX_WEIGHT: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("constraint has {found} weights but the net has {expected} places")]
    Length { expected: usize, found: usize },
    #[error("weight {0} exceeds the supported maximum")]
    WeightTooLarge(u64),
}

/// The constraint `weights · m <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinearConstraint {
    weights: Vec<u64>,
    bound: i64,
}

impl LinearConstraint {
    pub fn new(weights: Vec<u64>, bound: i64) -> Result<Self, ConstraintError> {
        if let Some(&w) = weights.iter().find(|&&w| w > MAX_WEIGHT) {
            return Err(ConstraintError::WeightTooLarge(w));
        }
        Ok(Self { weights, bound })
    }

    /// Checks the weight vector length against `net`.
    pub fn for_net(
        net: &OrdinaryNet,
        weights: Vec<u64>,
        bound: i64,
    ) -> Result<Self, ConstraintError> {
        if weights.len() != net.place_count() {
            return Err(ConstraintError::Length {
                expected: net.place_count(),
                found: weights.len(),
            });
        }
        Self::new(weights, bound)
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, p: crate::net::PlaceId) -> u64 {
        self.weights[p.0]
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub(crate) fn with_weight(&self, index: usize, value: u64) -> Self {
        let mut weights = self.weights.clone();
        weights[index] = value;
        Self {
            weights,
            bound: self.bound,
        }
    }

    pub fn dot(&self, m: &Marking) -> i128 {
        self.weights
            .iter()
            .zip(&m.0)
            .map(|(&w, &c)| i128::from(w) * i128::from(c))
            .sum()
    }

    pub fn is_satisfied(&self, m: &Marking) -> bool {
        self.dot(m) <= i128::from(self.bound)
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ";{})", self.bound)
    }
}

/// A finite set of constraints read as their disjunction.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintSet(BTreeSet<LinearConstraint>);

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(c: LinearConstraint) -> Self {
        Self(BTreeSet::from([c]))
    }

    pub fn insert(&mut self, c: LinearConstraint) -> bool {
        self.0.insert(c)
    }

    pub fn extend(&mut self, other: ConstraintSet) {
        self.0.extend(other.0);
    }

    pub fn contains(&self, c: &LinearConstraint) -> bool {
        self.0.contains(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LinearConstraint> + '_ {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &ConstraintSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<LinearConstraint> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = LinearConstraint>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl IntoIterator for ConstraintSet {
    type Item = LinearConstraint;
    type IntoIter = std::collections::btree_set::IntoIter<LinearConstraint>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// One gain per transition, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct GainVector(pub Vec<i64>);

impl GainVector {
    pub fn get(&self, t: TransitionId) -> i64 {
        self.0[t.0]
    }
}

/// Change of `w·m` when `t` fires: sum of weights over the postset minus the
/// sum over the preset.
pub fn gain_at(net: &OrdinaryNet, c: &LinearConstraint, t: TransitionId) -> i64 {
    let post: i64 = net.postset(t).iter().map(|p| c.weight(*p) as i64).sum();
    let pre: i64 = net.preset(t).iter().map(|p| c.weight(*p) as i64).sum();
    post - pre
}

pub fn transition_gain(net: &OrdinaryNet, c: &LinearConstraint) -> GainVector {
    GainVector(
        net.transition_ids()
            .into_iter()
            .map(|t| gain_at(net, c, t))
            .collect(),
    )
}

/// No uncontrollable transition can increase `w·m`.
pub fn is_admissible(net: &OrdinaryNet, c: &LinearConstraint) -> bool {
    net.uncontrollable()
        .into_iter()
        .all(|t| gain_at(net, c, t) <= 0)
}

/// Every positive-gain uncontrollable transition has an input place whose
/// weight exceeds the bound.
pub fn is_weakly_admissible(net: &OrdinaryNet, c: &LinearConstraint) -> bool {
    net.uncontrollable().into_iter().all(|t| {
        gain_at(net, c, t) <= 0
            || net
                .preset(t)
                .iter()
                .any(|p| i128::from(c.weight(*p)) > i128::from(c.bound()))
    })
}

/// Legal markings of an already explored reachability graph.
pub fn legal_in(graph: &ReachGraph, c: &LinearConstraint) -> BTreeSet<Marking> {
    graph
        .nodes()
        .iter()
        .filter(|m| c.is_satisfied(m))
        .cloned()
        .collect()
}

/// Admissible markings of a complete reachability graph of the full net.
///
/// Illegality is propagated backwards along uncontrollable edges; whatever
/// is not reached is admissible.
pub fn admissible_in(
    net: &OrdinaryNet,
    graph: &ReachGraph,
    c: &LinearConstraint,
) -> BTreeSet<Marking> {
    let n = graph.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in graph.edges() {
        if net.is_uncontrollable(e.transition) {
            preds[e.target].push(e.source);
        }
    }
    let mut bad = vec![false; n];
    let mut queue = VecDeque::new();
    for (i, m) in graph.nodes().iter().enumerate() {
        if !c.is_satisfied(m) {
            bad[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for &p in &preds[i] {
            if !bad[p] {
                bad[p] = true;
                queue.push_back(p);
            }
        }
    }
    graph
        .nodes()
        .iter()
        .zip(bad)
        .filter(|(_, b)| !b)
        .map(|(m, _)| m.clone())
        .collect()
}

pub fn legal_set(
    net: &OrdinaryNet,
    m0: &Marking,
    c: &LinearConstraint,
    limits: ExploreLimits,
) -> Result<BTreeSet<Marking>, ReachError> {
    Ok(legal_in(&reach_all(net, m0, limits)?, c))
}

pub fn admissible_set(
    net: &OrdinaryNet,
    m0: &Marking,
    c: &LinearConstraint,
    limits: ExploreLimits,
) -> Result<BTreeSet<Marking>, ReachError> {
    let graph = reach_all(net, m0, limits)?;
    Ok(admissible_in(net, &graph, c))
}

fn union_of<F>(w: &ConstraintSet, f: F) -> BTreeSet<Marking>
where
    F: Fn(&LinearConstraint) -> BTreeSet<Marking> + Sync,
{
    let members: Vec<&LinearConstraint> = w.iter().collect();
    members
        .par_iter()
        .map(|c| f(c))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn disjunction_legal_in(graph: &ReachGraph, w: &ConstraintSet) -> BTreeSet<Marking> {
    union_of(w, |c| legal_in(graph, c))
}

pub fn disjunction_admissible_in(
    net: &OrdinaryNet,
    graph: &ReachGraph,
    w: &ConstraintSet,
) -> BTreeSet<Marking> {
    union_of(w, |c| admissible_in(net, graph, c))
}

pub fn disjunction_legal(
    net: &OrdinaryNet,
    m0: &Marking,
    w: &ConstraintSet,
    limits: ExploreLimits,
) -> Result<BTreeSet<Marking>, ReachError> {
    Ok(disjunction_legal_in(&reach_all(net, m0, limits)?, w))
}

pub fn disjunction_admissible(
    net: &OrdinaryNet,
    m0: &Marking,
    w: &ConstraintSet,
    limits: ExploreLimits,
) -> Result<BTreeSet<Marking>, ReachError> {
    let graph = reach_all(net, m0, limits)?;
    Ok(disjunction_admissible_in(net, &graph, w))
}

/// The initial marking already violates the constraint.
pub fn is_zero_syntactic(c: &LinearConstraint, m0: &Marking) -> bool {
    !c.is_satisfied(m0)
}

/// No reachable marking is admissible.
pub fn is_zero_semantic(
    net: &OrdinaryNet,
    m0: &Marking,
    c: &LinearConstraint,
    limits: ExploreLimits,
) -> Result<bool, ReachError> {
    Ok(admissible_set(net, m0, c, limits)?.is_empty())
}
