//! The constraint transformation calculus at uncontrollable transitions.
//!
//! `rho` raises the weight of one input place of a positive-gain transition
//! by the transition's gain, `cws` collects one such image per input place,
//! `varrho` extends `cws` with the identity for non-positive gains, and
//! `varrho_set` lifts it to constraint sets. Sequences and the iterated
//! transformation to weak admissibility are built on top, with a full trace.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::constraint::{
    gain_at, is_weakly_admissible, is_zero_semantic, is_zero_syntactic, ConstraintSet,
    LinearConstraint, MAX_WEIGHT,
};
use crate::net::{Marking, OrdinaryNet, PlaceId, TransitionId};
use crate::reach::{reach_all, ExploreLimits, ReachError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("transition `{0}` is controllable")]
    NotUncontrollable(String),
    #[error("transition `{transition}` has gain {gain}, the complement weight set needs a positive gain")]
    GainNotPositive { transition: String, gain: i64 },
    #[error("weight of `{place}` would become {value}")]
    NegativeWeight { place: String, value: i64 },
    #[error("weight of `{place}` would exceed the supported maximum")]
    WeightOverflow { place: String },
    #[error("constraint set grew beyond {limit} members")]
    MemberCapExceeded { limit: usize },
    #[error("no weakly admissible set after {rounds} sweeps{}", if *.cycle { " (cycle detected)" } else { "" })]
    NonConvergence {
        rounds: usize,
        cycle: bool,
        last: ConstraintSet,
        trace: Box<TransformTrace>,
    },
}

/// One application of `rho`, or of the identity branch when `place` is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformStep {
    pub input: LinearConstraint,
    pub transition: TransitionId,
    pub place: Option<PlaceId>,
    pub outputs: ConstraintSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub transition: TransitionId,
    pub before: ConstraintSet,
    pub after: ConstraintSet,
    pub steps: Vec<TransformStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformTrace {
    pub initial: ConstraintSet,
    pub entries: Vec<TraceEntry>,
}

impl TransformTrace {
    fn new(initial: ConstraintSet) -> Self {
        Self {
            initial,
            entries: Vec::new(),
        }
    }

    pub fn final_set(&self) -> &ConstraintSet {
        self.entries
            .last()
            .map(|e| &e.after)
            .unwrap_or(&self.initial)
    }

    pub fn step_count(&self) -> usize {
        self.entries.iter().map(|e| e.steps.len()).sum()
    }
}

fn require_uncontrollable(net: &OrdinaryNet, t: TransitionId) -> Result<(), TransformError> {
    if net.is_uncontrollable(t) {
        Ok(())
    } else {
        Err(TransformError::NotUncontrollable(
            net.transition(t).name.clone(),
        ))
    }
}

/// Weight of `p` raised by the current gain of `t`, when `p` is an input
/// place of `t`; any other `p` leaves the constraint unchanged.
pub fn rho(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    t: TransitionId,
    p: PlaceId,
) -> Result<LinearConstraint, TransformError> {
    require_uncontrollable(net, t)?;
    if !net.preset(t).contains(&p) {
        return Ok(c.clone());
    }
    let value = c.weight(p) as i64 + gain_at(net, c, t);
    if value < 0 {
        return Err(TransformError::NegativeWeight {
            place: net.place_name(p).to_string(),
            value,
        });
    }
    if value as u64 > MAX_WEIGHT {
        return Err(TransformError::WeightOverflow {
            place: net.place_name(p).to_string(),
        });
    }
    Ok(c.with_weight(p.0, value as u64))
}

fn cws_steps(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    t: TransitionId,
) -> Result<Vec<TransformStep>, TransformError> {
    net.preset(t)
        .iter()
        .map(|&p| {
            Ok(TransformStep {
                input: c.clone(),
                transition: t,
                place: Some(p),
                outputs: ConstraintSet::singleton(rho(net, c, t, p)?),
            })
        })
        .collect()
}

/// Complement weight set of a positive-gain uncontrollable transition.
pub fn cws(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    t: TransitionId,
) -> Result<ConstraintSet, TransformError> {
    require_uncontrollable(net, t)?;
    let gain = gain_at(net, c, t);
    if gain <= 0 {
        return Err(TransformError::GainNotPositive {
            transition: net.transition(t).name.clone(),
            gain,
        });
    }
    Ok(cws_steps(net, c, t)?
        .into_iter()
        .flat_map(|s| s.outputs)
        .collect())
}

fn varrho_steps(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    t: TransitionId,
) -> Result<Vec<TransformStep>, TransformError> {
    require_uncontrollable(net, t)?;
    if gain_at(net, c, t) <= 0 {
        return Ok(vec![TransformStep {
            input: c.clone(),
            transition: t,
            place: None,
            outputs: ConstraintSet::singleton(c.clone()),
        }]);
    }
    cws_steps(net, c, t)
}

/// `{c}` when the gain of `t` is not positive, the complement weight set
/// otherwise.
pub fn varrho(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    t: TransitionId,
) -> Result<ConstraintSet, TransformError> {
    Ok(varrho_steps(net, c, t)?
        .into_iter()
        .flat_map(|s| s.outputs)
        .collect())
}

fn varrho_set_entry(
    net: &OrdinaryNet,
    w: &ConstraintSet,
    t: TransitionId,
) -> Result<TraceEntry, TransformError> {
    require_uncontrollable(net, t)?;
    let mut steps = Vec::new();
    let mut after = ConstraintSet::new();
    for c in w.iter() {
        for step in varrho_steps(net, c, t)? {
            after.extend(step.outputs.clone());
            steps.push(step);
        }
    }
    Ok(TraceEntry {
        transition: t,
        before: w.clone(),
        after,
        steps,
    })
}

/// Member-wise union of `varrho`.
pub fn varrho_set(
    net: &OrdinaryNet,
    w: &ConstraintSet,
    t: TransitionId,
) -> Result<ConstraintSet, TransformError> {
    Ok(varrho_set_entry(net, w, t)?.after)
}

/// Applies `varrho_set` along `order`, starting from `{c}`.
pub fn apply_sequence(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    order: &[TransitionId],
) -> Result<TransformTrace, TransformError> {
    apply_sequence_bounded(net, c, order, usize::MAX)
}

/// [`apply_sequence`] that fails once an intermediate set exceeds
/// `max_members`.
pub fn apply_sequence_bounded(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    order: &[TransitionId],
    max_members: usize,
) -> Result<TransformTrace, TransformError> {
    let mut trace = TransformTrace::new(ConstraintSet::singleton(c.clone()));
    for &t in order {
        let entry = varrho_set_entry(net, trace.final_set(), t)?;
        if entry.after.len() > max_members {
            return Err(TransformError::MemberCapExceeded { limit: max_members });
        }
        trace.entries.push(entry);
    }
    Ok(trace)
}

/// Order in which a sweep visits the uncontrollable transitions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SweepPolicy {
    #[default]
    DeclarationOrder,
    Reverse,
    Explicit(Vec<TransitionId>),
}

impl SweepPolicy {
    pub fn order(&self, net: &OrdinaryNet) -> Result<Vec<TransitionId>, TransformError> {
        match self {
            SweepPolicy::DeclarationOrder => Ok(net.uncontrollable()),
            SweepPolicy::Reverse => {
                let mut order = net.uncontrollable();
                order.reverse();
                Ok(order)
            }
            SweepPolicy::Explicit(order) => {
                for &t in order {
                    require_uncontrollable(net, t)?;
                }
                Ok(order.clone())
            }
        }
    }
}

pub const DEFAULT_MAX_ROUNDS: usize = 100;
/// Member cap used by [`transform_to_weak_admissible`]. Sets can grow
/// geometrically under repeated cws, so some cap is always applied.
pub const DEFAULT_MAX_MEMBERS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakAdmissibleOutcome {
    pub trace: TransformTrace,
    pub sweeps: usize,
}

impl WeakAdmissibleOutcome {
    pub fn final_set(&self) -> &ConstraintSet {
        self.trace.final_set()
    }
}

/// Sweeps over the uncontrollable transitions until every member of the set
/// is weakly admissible.
///
/// A transition is applied during a sweep only if some member that is not yet
/// weakly admissible has a positive gain at it. Fails after `max_rounds`
/// sweeps, or earlier when a sweep ends on a set already seen at the end of a
/// previous sweep. Fails with `MemberCapExceeded` once the set holds more
/// than [`DEFAULT_MAX_MEMBERS`] constraints.
pub fn transform_to_weak_admissible(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    policy: &SweepPolicy,
    max_rounds: usize,
) -> Result<WeakAdmissibleOutcome, TransformError> {
    transform_to_weak_admissible_bounded(net, c, policy, max_rounds, DEFAULT_MAX_MEMBERS)
}

pub fn transform_to_weak_admissible_bounded(
    net: &OrdinaryNet,
    c: &LinearConstraint,
    policy: &SweepPolicy,
    max_rounds: usize,
    max_members: usize,
) -> Result<WeakAdmissibleOutcome, TransformError> {
    let order = policy.order(net)?;
    let mut trace = TransformTrace::new(ConstraintSet::singleton(c.clone()));
    let mut seen: HashSet<ConstraintSet> = HashSet::from([trace.initial.clone()]);
    let done = |w: &ConstraintSet| w.iter().all(|c| is_weakly_admissible(net, c));

    for round in 1..=max_rounds.max(1) {
        for &t in &order {
            let current = trace.final_set();
            let triggered = current
                .iter()
                .any(|c| !is_weakly_admissible(net, c) && gain_at(net, c, t) > 0);
            if !triggered {
                continue;
            }
            let entry = varrho_set_entry(net, current, t)?;
            if entry.after.len() > max_members {
                return Err(TransformError::MemberCapExceeded { limit: max_members });
            }
            trace.entries.push(entry);
        }
        let current = trace.final_set().clone();
        if done(&current) {
            return Ok(WeakAdmissibleOutcome {
                trace,
                sweeps: round,
            });
        }
        if !seen.insert(current.clone()) {
            return Err(TransformError::NonConvergence {
                rounds: round,
                cycle: true,
                last: current,
                trace: Box::new(trace),
            });
        }
    }
    Err(TransformError::NonConvergence {
        rounds: max_rounds,
        cycle: false,
        last: trace.final_set().clone(),
        trace: Box::new(trace),
    })
}

/// How zero constraints are recognised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroMode {
    /// The initial marking violates the constraint.
    #[default]
    Syntactic,
    /// The admissible-marking set is empty.
    Semantic,
}

impl std::fmt::Display for ZeroMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ZeroMode::Syntactic => "syntactic",
            ZeroMode::Semantic => "semantic",
        })
    }
}

/// Removes the members classified as zero constraints.
pub fn prune_zero(
    w: &ConstraintSet,
    m0: &Marking,
    mode: ZeroMode,
    net: &OrdinaryNet,
    limits: ExploreLimits,
) -> Result<ConstraintSet, ReachError> {
    match mode {
        ZeroMode::Syntactic => Ok(w
            .iter()
            .filter(|c| !is_zero_syntactic(c, m0))
            .cloned()
            .collect()),
        ZeroMode::Semantic => {
            // One exploration shared by all members.
            let graph = reach_all(net, m0, limits)?;
            Ok(w
                .iter()
                .filter(|c| !crate::constraint::admissible_in(net, &graph, c).is_empty())
                .cloned()
                .collect())
        }
    }
}

/// The initial-marking and the emptiness-based zero rules classify `c` differently.
pub fn zero_rules_disagree(
    net: &OrdinaryNet,
    m0: &Marking,
    c: &LinearConstraint,
    limits: ExploreLimits,
) -> Result<bool, ReachError> {
    Ok(is_zero_syntactic(c, m0) != is_zero_semantic(net, m0, c, limits)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::fixture;
    use crate::net::{NetSpec, TransitionSpec};

    fn lc(w: &[u64]) -> LinearConstraint {
        LinearConstraint::new(w.to_vec(), 3).unwrap()
    }

    fn set(ws: &[&[u64]]) -> ConstraintSet {
        ws.iter().map(|w| lc(w)).collect()
    }

    const W: &[u64] = &[1, 0, 0, 1, 1];
    const W1: &[u64] = &[1, 2, 0, 1, 1];
    const W2: &[u64] = &[1, 0, 2, 1, 1];
    const W3: &[u64] = &[1, 2, 1, 1, 1];
    const W4: &[u64] = &[1, 0, 1, 1, 1];
    const W5: &[u64] = &[1, 0, 2, 1, 1];
    const W6: &[u64] = &[1, 1, 1, 1, 1];

    struct Fig1 {
        net: OrdinaryNet,
    }

    impl Fig1 {
        fn new() -> Self {
            Self {
                net: fixture::fig1_net(),
            }
        }
        fn t(&self, name: &str) -> TransitionId {
            self.net.transition_id(name).unwrap()
        }
        fn p(&self, name: &str) -> PlaceId {
            self.net.place_id(name).unwrap()
        }
    }

    #[test]
    fn rho_examples() {
        let f = Fig1::new();
        assert_eq!(rho(&f.net, &lc(W), f.t("t1"), f.p("p2")).unwrap(), lc(W1));
        assert_eq!(rho(&f.net, &lc(W), f.t("t2"), f.p("p3")).unwrap(), lc(W4));
        assert_eq!(rho(&f.net, &lc(W), f.t("t2"), f.p("p1")).unwrap(), lc(W));
    }

    #[test]
    fn rho_rejects_controllable() {
        let net = NetSpec {
            places: vec!["a".into(), "b".into()],
            transitions: vec![TransitionSpec::new("c", true, &["a"], &["b"])],
        }
        .build()
        .unwrap();
        let c = LinearConstraint::new(vec![0, 1], 0).unwrap();
        assert_eq!(
            rho(&net, &c, TransitionId(0), PlaceId(0)),
            Err(TransformError::NotUncontrollable("c".into()))
        );
        assert!(varrho(&net, &c, TransitionId(0)).is_err());
    }

    #[test]
    fn rho_negative_weight() {
        let f = Fig1::new();
        let c = lc(&[0, 0, 1, 0, 0]);
        assert_eq!(rho(&f.net, &c, f.t("t2"), f.p("p3")).unwrap(), lc(&[0; 5]));
        // Gain of t1 is -2 here.
        let c = lc(&[0, 1, 1, 0, 0]);
        assert_eq!(
            rho(&f.net, &c, f.t("t1"), f.p("p2")),
            Err(TransformError::NegativeWeight {
                place: "p2".into(),
                value: -1
            })
        );
    }

    #[test]
    fn cws_examples() {
        let f = Fig1::new();
        assert_eq!(cws(&f.net, &lc(W), f.t("t1")).unwrap(), set(&[W1, W2]));
        assert_eq!(cws(&f.net, &lc(W4), f.t("t1")).unwrap(), set(&[W5, W6]));
        assert_eq!(cws(&f.net, &lc(W), f.t("t2")).unwrap(), set(&[W4]));
        assert!(matches!(
            cws(&f.net, &lc(W), f.t("t3")),
            Err(TransformError::GainNotPositive { gain: 0, .. })
        ));
    }

    #[test]
    fn varrho_examples() {
        let f = Fig1::new();
        assert_eq!(varrho(&f.net, &lc(W2), f.t("t2")).unwrap(), set(&[W2]));
        assert_eq!(varrho(&f.net, &lc(W1), f.t("t2")).unwrap(), set(&[W3]));
        for t in ["t1", "t2", "t3", "t4"] {
            assert_eq!(varrho(&f.net, &lc(W6), f.t(t)).unwrap(), set(&[W6]));
        }
    }

    #[test]
    fn varrho_set_examples() {
        let f = Fig1::new();
        assert_eq!(
            varrho_set(&f.net, &set(&[W1, W2]), f.t("t2")).unwrap(),
            set(&[W3, W2])
        );
        assert_eq!(
            varrho_set(&f.net, &set(&[W4]), f.t("t1")).unwrap(),
            set(&[W5, W6])
        );
        assert!(varrho_set(&f.net, &ConstraintSet::new(), f.t("t1"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn sequences() {
        let f = Fig1::new();
        let case1 = apply_sequence(&f.net, &lc(W), &[f.t("t1"), f.t("t2")]).unwrap();
        assert_eq!(case1.entries[0].after, set(&[W1, W2]));
        assert_eq!(case1.final_set(), &set(&[W3, W2]));
        let case2 = apply_sequence(&f.net, &lc(W), &[f.t("t2"), f.t("t1")]).unwrap();
        assert_eq!(case2.entries[0].after, set(&[W4]));
        assert_eq!(case2.final_set(), &set(&[W2, W6]));
        assert_eq!(case2.final_set().len(), 2);
        let empty = apply_sequence(&f.net, &lc(W), &[]).unwrap();
        assert_eq!(empty.final_set(), &set(&[W]));
        assert_ne!(case1.final_set(), case2.final_set());
    }

    #[test]
    fn trace_records_identity_steps() {
        let f = Fig1::new();
        let trace = apply_sequence(&f.net, &lc(W), &[f.t("t1"), f.t("t2")]).unwrap();
        let second = &trace.entries[1];
        let identity: Vec<_> = second.steps.iter().filter(|s| s.place.is_none()).collect();
        assert_eq!(identity.len(), 1);
        assert_eq!(identity[0].input, lc(W2));
        for step in trace.entries.iter().flat_map(|e| &e.steps) {
            if let Some(p) = step.place {
                assert!(f.net.preset(step.transition).contains(&p));
            }
        }
    }

    #[test]
    fn member_cap() {
        let f = Fig1::new();
        assert_eq!(
            apply_sequence_bounded(&f.net, &lc(W), &[f.t("t1")], 1),
            Err(TransformError::MemberCapExceeded { limit: 1 })
        );
    }

    #[test]
    fn weak_admissible_declaration_order() {
        let f = Fig1::new();
        let out = transform_to_weak_admissible(
            &f.net,
            &lc(W),
            &SweepPolicy::DeclarationOrder,
            DEFAULT_MAX_ROUNDS,
        )
        .unwrap();
        assert_eq!(out.final_set(), &set(&[W3, W2]));
        assert_eq!(out.sweeps, 1);
        let applied: Vec<_> = out.trace.entries.iter().map(|e| e.transition).collect();
        assert_eq!(applied, [f.t("t1"), f.t("t2")]);
    }

    #[test]
    fn weak_admissible_explicit_and_reverse() {
        let f = Fig1::new();
        let explicit = SweepPolicy::Explicit(vec![f.t("t2"), f.t("t1")]);
        let out = transform_to_weak_admissible(&f.net, &lc(W), &explicit, 10).unwrap();
        assert_eq!(out.final_set(), &set(&[W5, W6]));
        let out =
            transform_to_weak_admissible(&f.net, &lc(W), &SweepPolicy::Reverse, 10).unwrap();
        assert_eq!(out.final_set(), &set(&[W5, W6]));
    }

    #[test]
    fn already_weakly_admissible() {
        let f = Fig1::new();
        let out =
            transform_to_weak_admissible(&f.net, &lc(W6), &SweepPolicy::DeclarationOrder, 5)
                .unwrap();
        assert_eq!(out.final_set(), &set(&[W6]));
        assert_eq!(out.sweeps, 1);
        assert_eq!(out.trace.step_count(), 0);
    }

    #[test]
    fn non_convergence_reports_last_set() {
        let f = Fig1::new();
        // Only t2 is ever visited, so the t1 gain of the Case-2 intermediate
        // stays positive.
        let only_t2 = SweepPolicy::Explicit(vec![f.t("t2")]);
        match transform_to_weak_admissible(&f.net, &lc(W), &only_t2, 10) {
            Err(TransformError::NonConvergence { cycle, last, .. }) => {
                assert!(cycle);
                assert_eq!(last, set(&[W4]));
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn prune_examples() {
        let f = Fig1::new();
        let m0 = fixture::fig1_initial_marking();
        let limits = ExploreLimits::default();
        let case1 = set(&[W3, W2]);
        let case2 = set(&[W5, W6]);
        assert!(prune_zero(&case1, &m0, ZeroMode::Syntactic, &f.net, limits)
            .unwrap()
            .is_empty());
        assert_eq!(
            prune_zero(&case2, &m0, ZeroMode::Syntactic, &f.net, limits).unwrap(),
            set(&[W6])
        );
        let plain = set(&[W6]);
        assert_eq!(
            prune_zero(&plain, &m0, ZeroMode::Semantic, &f.net, limits).unwrap(),
            plain
        );
        assert!(zero_rules_disagree(&f.net, &m0, &lc(W2), limits).unwrap());
        assert!(!zero_rules_disagree(&f.net, &m0, &lc(W6), limits).unwrap());
    }
}
