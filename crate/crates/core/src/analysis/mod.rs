//! Equivalence verdicts between admissible-marking sets and the
//! order-sensitivity analysis of the transformation.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::constraint::{admissible_in, gain_at, ConstraintSet, LinearConstraint};
use crate::net::{Marking, OrdinaryNet, TransitionId};
use crate::reach::{reach_all, ExploreLimits, ReachError, ReachGraph};
use crate::transform::{apply_sequence_bounded, TransformError, ZeroMode};

pub mod hunt;
pub mod paper;

pub const DEFAULT_WITNESS_CAP: usize = 10;
pub const DEFAULT_PERMUTATION_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("{count} positive-gain uncontrollable transitions exceed the permutation cap of {cap}")]
    PermutationCapExceeded { count: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Side {
    pub label: String,
    pub markings: BTreeSet<Marking>,
}

/// Outcome of comparing two admissible-marking sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub left: Side,
    pub right: Side,
    pub equal: bool,
    /// Symmetric difference, sorted, truncated to the witness cap.
    pub witnesses: Vec<Marking>,
    pub difference_size: usize,
    pub mode: ZeroMode,
}

impl Verdict {
    pub fn compare(left: Side, right: Side, mode: ZeroMode, witness_cap: usize) -> Self {
        let difference: Vec<Marking> = left
            .markings
            .symmetric_difference(&right.markings)
            .cloned()
            .collect();
        Self {
            equal: difference.is_empty(),
            difference_size: difference.len(),
            witnesses: difference.into_iter().take(witness_cap).collect(),
            left,
            right,
            mode,
        }
    }

    /// Every witness lies in exactly one side and `equal` matches the sides.
    pub fn recheck(&self) -> bool {
        let one_side = self
            .witnesses
            .iter()
            .all(|m| self.left.markings.contains(m) != self.right.markings.contains(m));
        one_side
            && self.equal == self.witnesses.is_empty()
            && self.equal == (self.left.markings == self.right.markings)
    }
}

/// Shared exploration of one net from one initial marking, with cached
/// per-constraint admissible sets.
pub struct Explored<'a> {
    pub net: &'a OrdinaryNet,
    pub m0: &'a Marking,
    pub graph: ReachGraph,
    cache: HashMap<LinearConstraint, BTreeSet<Marking>>,
}

impl<'a> Explored<'a> {
    pub fn new(
        net: &'a OrdinaryNet,
        m0: &'a Marking,
        limits: ExploreLimits,
    ) -> Result<Self, ReachError> {
        Ok(Self {
            net,
            m0,
            graph: reach_all(net, m0, limits)?,
            cache: HashMap::new(),
        })
    }

    pub fn admissible(&mut self, c: &LinearConstraint) -> &BTreeSet<Marking> {
        if !self.cache.contains_key(c) {
            let set = admissible_in(self.net, &self.graph, c);
            self.cache.insert(c.clone(), set);
        }
        &self.cache[c]
    }

    /// Members that survive zero pruning under `mode`.
    pub fn prune(&mut self, w: &ConstraintSet, mode: ZeroMode) -> ConstraintSet {
        w.iter()
            .filter(|c| match mode {
                ZeroMode::Syntactic => c.is_satisfied(self.m0),
                ZeroMode::Semantic => !self.admissible(c).is_empty(),
            })
            .cloned()
            .collect()
    }

    /// Admissible set of the disjunction after zero pruning.
    pub fn disjunction(&mut self, w: &ConstraintSet, mode: ZeroMode) -> BTreeSet<Marking> {
        let pruned = self.prune(w, mode);
        let mut out = BTreeSet::new();
        for c in pruned.iter() {
            out.extend(self.admissible(c).iter().cloned());
        }
        out
    }
}

/// Compares the admissible set of `c` with that of the disjunction `w`.
///
/// Zero pruning is applied to both sides, so a constraint that is itself a
/// zero constraint compares as the empty disjunction.
pub fn equivalence_check(
    net: &OrdinaryNet,
    m0: &Marking,
    c: &LinearConstraint,
    w: &ConstraintSet,
    limits: ExploreLimits,
    mode: ZeroMode,
    witness_cap: usize,
) -> Result<Verdict, ReachError> {
    let mut ex = Explored::new(net, m0, limits)?;
    let left = ex.disjunction(&ConstraintSet::singleton(c.clone()), mode);
    let right = ex.disjunction(w, mode);
    Ok(Verdict::compare(
        Side {
            label: format!("A{c}"),
            markings: left,
        },
        Side {
            label: format!("A∨{w}"),
            markings: right,
        },
        mode,
        witness_cap,
    ))
}

/// Compares the admissible sets of two disjunctions.
pub fn compare_disjunctions(
    net: &OrdinaryNet,
    m0: &Marking,
    left: &ConstraintSet,
    right: &ConstraintSet,
    limits: ExploreLimits,
    mode: ZeroMode,
    witness_cap: usize,
) -> Result<Verdict, ReachError> {
    let mut ex = Explored::new(net, m0, limits)?;
    let l = ex.disjunction(left, mode);
    let r = ex.disjunction(right, mode);
    Ok(Verdict::compare(
        Side {
            label: format!("A∨{left}"),
            markings: l,
        },
        Side {
            label: format!("A∨{right}"),
            markings: r,
        },
        mode,
        witness_cap,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderOptions {
    pub mode: ZeroMode,
    pub witness_cap: usize,
    pub permutation_cap: usize,
    pub max_members: usize,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self {
            mode: ZeroMode::Syntactic,
            witness_cap: DEFAULT_WITNESS_CAP,
            permutation_cap: DEFAULT_PERMUTATION_CAP,
            max_members: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderOutcome {
    pub order: Vec<TransitionId>,
    pub final_set: ConstraintSet,
    pub pruned: ConstraintSet,
    /// Index into [`OrderReport::classes`].
    pub class: usize,
}

/// Result of transforming one constraint along every permutation of its
/// positive-gain uncontrollable transitions.
///
/// Orders are grouped into classes of identical admissible sets, so the
/// pairwise verdict matrix is `cell(i, j)` over class representatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub constraint: LinearConstraint,
    pub mode: ZeroMode,
    pub witness_cap: usize,
    pub transitions: Vec<TransitionId>,
    pub original: BTreeSet<Marking>,
    pub orders: Vec<OrderOutcome>,
    pub classes: Vec<BTreeSet<Marking>>,
}

impl OrderReport {
    fn label(&self, net: &OrdinaryNet, i: usize) -> String {
        let names = self.orders[i]
            .order
            .iter()
            .map(|t| net.transition(*t).name.as_str())
            .join(",");
        format!("order [{names}]")
    }

    pub fn cell(&self, net: &OrdinaryNet, i: usize, j: usize) -> Verdict {
        Verdict::compare(
            Side {
                label: self.label(net, i),
                markings: self.classes[self.orders[i].class].clone(),
            },
            Side {
                label: self.label(net, j),
                markings: self.classes[self.orders[j].class].clone(),
            },
            self.mode,
            self.witness_cap,
        )
    }

    pub fn versus_original(&self, net: &OrdinaryNet, i: usize) -> Verdict {
        Verdict::compare(
            Side {
                label: format!("A{}", self.constraint),
                markings: self.original.clone(),
            },
            Side {
                label: self.label(net, i),
                markings: self.classes[self.orders[i].class].clone(),
            },
            self.mode,
            self.witness_cap,
        )
    }

    pub fn orders_agree(&self) -> bool {
        self.classes.len() <= 1
    }

    /// Orders whose output is not equivalent to the original constraint.
    pub fn inequivalent_orders(&self) -> Vec<usize> {
        (0..self.orders.len())
            .filter(|&i| self.classes[self.orders[i].class] != self.original)
            .collect()
    }

    pub fn inequivalence_found(&self) -> bool {
        !self.orders_agree() || !self.inequivalent_orders().is_empty()
    }

    /// First pair of orders with different admissible sets.
    pub fn first_disagreement(&self) -> Option<(usize, usize)> {
        let n = self.orders.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| self.orders[i].class != self.orders[j].class)
    }
}

/// Uncontrollable transitions with positive gain under `c`, in declaration
/// order.
pub fn positive_gain_transitions(net: &OrdinaryNet, c: &LinearConstraint) -> Vec<TransitionId> {
    net.uncontrollable()
        .into_iter()
        .filter(|&t| gain_at(net, c, t) > 0)
        .collect()
}

pub fn order_sensitivity(
    net: &OrdinaryNet,
    m0: &Marking,
    c: &LinearConstraint,
    limits: ExploreLimits,
    options: OrderOptions,
) -> Result<OrderReport, AnalysisError> {
    let mut ex = Explored::new(net, m0, limits)?;
    order_sensitivity_in(&mut ex, c, options)
}

pub fn order_sensitivity_in(
    ex: &mut Explored<'_>,
    c: &LinearConstraint,
    options: OrderOptions,
) -> Result<OrderReport, AnalysisError> {
    let transitions = positive_gain_transitions(ex.net, c);
    if transitions.len() > options.permutation_cap {
        return Err(AnalysisError::PermutationCapExceeded {
            count: transitions.len(),
            cap: options.permutation_cap,
        });
    }
    let original = ex.disjunction(&ConstraintSet::singleton(c.clone()), options.mode);
    let mut classes: Vec<BTreeSet<Marking>> = Vec::new();
    let mut orders = Vec::new();
    for order in transitions.iter().copied().permutations(transitions.len()) {
        let trace = apply_sequence_bounded(ex.net, c, &order, options.max_members)?;
        let final_set = trace.final_set().clone();
        let pruned = ex.prune(&final_set, options.mode);
        let admissible = ex.disjunction(&final_set, options.mode);
        let class = match classes.iter().position(|s| *s == admissible) {
            Some(i) => i,
            None => {
                classes.push(admissible);
                classes.len() - 1
            }
        };
        orders.push(OrderOutcome {
            order,
            final_set,
            pruned,
            class,
        });
    }
    Ok(OrderReport {
        constraint: c.clone(),
        mode: options.mode,
        witness_cap: options.witness_cap,
        transitions,
        original,
        orders,
        classes,
    })
}
