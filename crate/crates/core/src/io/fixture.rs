//! Built-in five-place counterexample net.
//!
//! t1: {p2,p3} -> {p1,p4}, t2: {p3} -> {p5}, t3: {p4} -> {p5},
//! t4: {p5} -> {p1}; every transition is uncontrollable, m0 = (0,1,2,0,0),
//! and the constraint is (1,0,0,1,1)·m <= 3.

use crate::constraint::LinearConstraint;
use crate::net::{Marking, NetSpec, OrdinaryNet, TransitionSpec};

pub fn fig1_spec() -> NetSpec {
    NetSpec {
        places: ["p1", "p2", "p3", "p4", "p5"].map(String::from).to_vec(),
        transitions: vec![
            TransitionSpec::new("t1", false, &["p2", "p3"], &["p1", "p4"]),
            TransitionSpec::new("t2", false, &["p3"], &["p5"]),
            TransitionSpec::new("t3", false, &["p4"], &["p5"]),
            TransitionSpec::new("t4", false, &["p5"], &["p1"]),
        ],
    }
}

pub fn fig1_net() -> OrdinaryNet {
    fig1_spec().build().expect("fixture net is valid")
}

pub fn fig1_initial_marking() -> Marking {
    Marking(vec![0, 1, 2, 0, 0])
}

pub fn fig1_constraint() -> LinearConstraint {
    LinearConstraint::new(vec![1, 0, 0, 1, 1], 3).expect("fixture constraint is valid")
}

/// A net together with its initial marking and the constraint under study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperFixture {
    pub net: OrdinaryNet,
    pub m0: Marking,
    pub constraint: LinearConstraint,
}

impl PaperFixture {
    pub fn fig1() -> Self {
        Self {
            net: fig1_net(),
            m0: fig1_initial_marking(),
            constraint: fig1_constraint(),
        }
    }
}
