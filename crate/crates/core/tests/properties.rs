mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use gmec_transform::analysis::{compare_disjunctions, equivalence_check, DEFAULT_WITNESS_CAP};
use gmec_transform::constraint::{
    admissible_in, disjunction_admissible_in, gain_at, is_admissible, is_weakly_admissible,
    is_zero_syntactic, legal_in,
};
use gmec_transform::net::{NetSpec, TransitionSpec};
use gmec_transform::reach::{reach, reach_all};
use gmec_transform::transform::{
    prune_zero, rho, transform_to_weak_admissible_bounded, varrho, varrho_set, SweepPolicy,
    TransformError, ZeroMode,
};
use gmec_transform::{
    ConstraintSet, ExploreLimits, LinearConstraint, Marking, OrdinaryNet, PlaceId, TransitionId,
};

#[derive(Debug, Clone)]
struct Case {
    net: OrdinaryNet,
    m0: Marking,
    c: LinearConstraint,
}

fn limits() -> ExploreLimits {
    ExploreLimits {
        max_markings: 3_000,
        max_tokens_per_place: 50,
    }
}

/// Nets with 1..=5 places and 1..=5 transitions, arbitrary arcs (possibly
/// empty pre/post sets and self-loops).
fn case() -> impl Strategy<Value = Case> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(np, nt)| {
        let arcs = proptest::collection::vec(
            (
                proptest::collection::vec(any::<bool>(), np),
                proptest::collection::vec(any::<bool>(), np),
                any::<bool>(),
            ),
            nt,
        );
        let marking = proptest::collection::vec(0u32..=3, np);
        let weights = proptest::collection::vec(0u64..=4, np);
        (arcs, marking, weights, -1i64..=8).prop_map(move |(arcs, m, w, k)| {
            let places: Vec<String> = (0..np).map(|i| format!("p{i}")).collect();
            let pick = |mask: &[bool]| -> Vec<String> {
                places
                    .iter()
                    .zip(mask)
                    .filter(|(_, &b)| b)
                    .map(|(p, _)| p.clone())
                    .collect()
            };
            let transitions = arcs
                .iter()
                .enumerate()
                .map(|(i, (pre, post, ctrl))| TransitionSpec {
                    name: format!("t{i}"),
                    controllable: *ctrl,
                    pre: pick(pre),
                    post: pick(post),
                })
                .collect();
            let net = NetSpec {
                places: places.clone(),
                transitions,
            }
            .build()
            .unwrap();
            Case {
                net,
                m0: Marking(m),
                c: LinearConstraint::new(w, k).unwrap(),
            }
        })
    })
}

/// Cases whose full reachability set is finite and small.
fn bounded_case() -> impl Strategy<Value = Case> {
    case().prop_filter("bounded", |c| reach_all(&c.net, &c.m0, limits()).is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn firing_adds_the_incidence_column(c in case()) {
        for t in c.net.transition_ids() {
            if let Ok(next) = c.net.fire(t, &c.m0) {
                let col = c.net.incidence_column(t);
                for ((after, before), delta) in next.0.iter().zip(&c.m0.0).zip(&col) {
                    prop_assert_eq!(i64::from(*after), i64::from(*before) + delta);
                }
            }
        }
    }

    #[test]
    fn set_inclusions_and_gain_consistency(c in bounded_case()) {
        let g = reach_all(&c.net, &c.m0, limits()).unwrap();
        let r = g.marking_set();
        let l = legal_in(&g, &c.c);
        let a = admissible_in(&c.net, &g, &c.c);
        prop_assert!(a.is_subset(&l));
        prop_assert!(l.is_subset(&r));
        for e in g.edges() {
            let delta = c.c.dot(&g.nodes()[e.target]) - c.c.dot(&g.nodes()[e.source]);
            prop_assert_eq!(delta, i128::from(gain_at(&c.net, &c.c, e.transition)));
        }
        if is_admissible(&c.net, &c.c) || is_weakly_admissible(&c.net, &c.c) {
            prop_assert_eq!(&a, &l);
        }
        if is_zero_syntactic(&c.c, &c.m0) {
            prop_assert!(!a.contains(&c.m0));
        }
    }

    #[test]
    fn backward_closure_matches_forward_oracle(c in bounded_case()) {
        let g = reach_all(&c.net, &c.m0, limits()).unwrap();
        if let Some(oracle) = common::naive_admissible(&c.net, &c.m0, &c.c) {
            prop_assert_eq!(admissible_in(&c.net, &g, &c.c), oracle);
        }
    }

    #[test]
    fn reach_is_monotone_in_allowed_transitions(c in bounded_case(), mask in proptest::collection::vec(any::<bool>(), 5)) {
        let all = c.net.transition_ids();
        let subset: Vec<TransitionId> = all.iter().copied().filter(|t| mask[t.0]).collect();
        let big = reach(&c.net, &c.m0, &all, limits()).unwrap();
        let small = reach(&c.net, &c.m0, &subset, limits()).unwrap();
        prop_assert!(small.marking_set().is_subset(&big.marking_set()));
        let again = reach(&c.net, &c.m0, &all, limits()).unwrap();
        prop_assert_eq!(big.nodes(), again.nodes());
        prop_assert_eq!(big.edges(), again.edges());
        prop_assert_eq!(Some(big.marking_set()), common::reachable(&c.net, &c.m0));
    }

    #[test]
    fn rho_properties(c in case()) {
        for t in c.net.uncontrollable() {
            let gain = gain_at(&c.net, &c.c, t);
            for p in (0..c.net.place_count()).map(PlaceId) {
                let out = rho(&c.net, &c.c, t, p);
                if !c.net.preset(t).contains(&p) {
                    prop_assert_eq!(out.unwrap(), c.c.clone());
                    continue;
                }
                if gain <= 0 {
                    continue;
                }
                let out = out.unwrap();
                prop_assert_eq!(out.bound(), c.c.bound());
                for q in 0..c.net.place_count() {
                    let expected = if q == p.0 { c.c.weights()[q] + gain as u64 } else { c.c.weights()[q] };
                    prop_assert_eq!(out.weights()[q], expected);
                }
                let after = gain_at(&c.net, &out, t);
                if c.net.postset(t).contains(&p) {
                    prop_assert_eq!(after, gain);
                } else {
                    prop_assert_eq!(after, 0);
                }
            }
        }
    }

    #[test]
    fn varrho_identity_and_set_lift(c in case(), extra in proptest::collection::vec(0u64..=4, 5)) {
        let other = LinearConstraint::new(
            extra[..c.net.place_count()].to_vec(),
            c.c.bound(),
        ).unwrap();
        let w: ConstraintSet = [c.c.clone(), other.clone()].into_iter().collect();
        for t in c.net.uncontrollable() {
            if gain_at(&c.net, &c.c, t) <= 0 {
                prop_assert_eq!(varrho(&c.net, &c.c, t).unwrap(), ConstraintSet::singleton(c.c.clone()));
            }
            let lifted = varrho_set(&c.net, &w, t).unwrap();
            let mut union = varrho(&c.net, &c.c, t).unwrap();
            union.extend(varrho(&c.net, &other, t).unwrap());
            prop_assert_eq!(&lifted, &union);
            let single = varrho_set(&c.net, &ConstraintSet::singleton(c.c.clone()), t).unwrap();
            prop_assert!(single.is_subset(&lifted));
            prop_assert!(lifted.iter().all(|x| x.weights().len() == c.net.place_count()));
        }
        for t in c.net.transition_ids().into_iter().filter(|t| !c.net.is_uncontrollable(*t)) {
            prop_assert!(matches!(varrho(&c.net, &c.c, t), Err(TransformError::NotUncontrollable(_))));
        }
    }

    #[test]
    fn converged_transformations_are_weakly_admissible(c in case()) {
        match transform_to_weak_admissible_bounded(&c.net, &c.c, &SweepPolicy::DeclarationOrder, 20, 512) {
            Ok(out) => {
                for member in out.final_set().iter() {
                    prop_assert!(is_weakly_admissible(&c.net, member));
                }
                for e in &out.trace.entries {
                    prop_assert_eq!(&varrho_set(&c.net, &e.before, e.transition).unwrap(), &e.after);
                }
            }
            Err(
                TransformError::NonConvergence { .. }
                | TransformError::WeightOverflow { .. }
                | TransformError::MemberCapExceeded { .. },
            ) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn disjunction_monotone_and_pruning_sound(c in bounded_case(), extra in proptest::collection::vec(0u64..=4, 5)) {
        let g = reach_all(&c.net, &c.m0, limits()).unwrap();
        let other = LinearConstraint::new(extra[..c.net.place_count()].to_vec(), c.c.bound()).unwrap();
        let small = ConstraintSet::singleton(c.c.clone());
        let big: ConstraintSet = [c.c.clone(), other.clone()].into_iter().collect();
        let a_small = disjunction_admissible_in(&c.net, &g, &small);
        let a_big = disjunction_admissible_in(&c.net, &g, &big);
        prop_assert!(a_small.is_subset(&a_big));
        let union: BTreeSet<Marking> = admissible_in(&c.net, &g, &c.c)
            .union(&admissible_in(&c.net, &g, &other))
            .cloned()
            .collect();
        prop_assert_eq!(&a_big, &union);
        // Dropping constraints with empty admissible sets leaves the union unchanged.
        let pruned = prune_zero(&big, &c.m0, ZeroMode::Semantic, &c.net, limits()).unwrap();
        prop_assert_eq!(disjunction_admissible_in(&c.net, &g, &pruned), a_big);
    }

    #[test]
    fn verdicts_recheck(c in bounded_case(), extra in proptest::collection::vec(0u64..=4, 5)) {
        let other = LinearConstraint::new(extra[..c.net.place_count()].to_vec(), c.c.bound()).unwrap();
        let w = ConstraintSet::singleton(other.clone());
        for mode in [ZeroMode::Syntactic, ZeroMode::Semantic] {
            let v = equivalence_check(&c.net, &c.m0, &c.c, &w, limits(), mode, DEFAULT_WITNESS_CAP).unwrap();
            prop_assert!(v.recheck());
            let v = compare_disjunctions(&c.net, &c.m0, &w, &w, limits(), mode, DEFAULT_WITNESS_CAP).unwrap();
            prop_assert!(v.equal && v.recheck());
        }
    }
}
