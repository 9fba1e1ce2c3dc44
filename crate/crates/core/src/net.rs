//! Ordinary Petri nets with controllability flags, markings and the token game.
//!
//! All arcs have weight one. Places and transitions are addressed by their
//! declaration index, which is also the index order of every vector in the
//! crate (markings, weight vectors, gain vectors).

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a place in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlaceId(pub usize);

/// Index of a transition in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransitionId(pub usize);

/// Structural problems found while validating a net description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("transition `{transition}` has an arc to undeclared place `{place}`")]
    DanglingArc { transition: String, place: String },
    #[error("transition `{transition}` lists place `{place}` twice in its {side} set")]
    DuplicateArc {
        transition: String,
        place: String,
        side: &'static str,
    },
    #[error("net declares no places")]
    NoPlaces,
    #[error("net declares no transitions")]
    NoTransitions,
}

/// Errors of the token game and of id lookups.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FireError {
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("marking has {found} entries but the net has {expected} places")]
    MarkingLength { expected: usize, found: usize },
}

/// Unvalidated, name-based transition record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub name: String,
    pub controllable: bool,
    pub pre: Vec<String>,
    pub post: Vec<String>,
}

impl TransitionSpec {
    pub fn new(name: &str, controllable: bool, pre: &[&str], post: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            controllable,
            pre: pre.iter().map(|s| s.to_string()).collect(),
            post: post.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Unvalidated, name-based net description, as read from a document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetSpec {
    pub places: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
}

impl NetSpec {
    /// Lists every structural violation; an empty list means the spec builds.
    pub fn validate(&self) -> Vec<NetError> {
        let mut errors = Vec::new();
        if self.places.is_empty() {
            errors.push(NetError::NoPlaces);
        }
        if self.transitions.is_empty() {
            errors.push(NetError::NoTransitions);
        }
        // Places and transitions share one namespace.
        let mut seen = HashSet::new();
        let names = self
            .places
            .iter()
            .chain(self.transitions.iter().map(|t| &t.name));
        for name in names {
            if !seen.insert(name.as_str()) {
                errors.push(NetError::DuplicateId(name.clone()));
            }
        }
        let places: HashSet<&str> = self.places.iter().map(String::as_str).collect();
        for t in &self.transitions {
            for (side, list) in [("pre", &t.pre), ("post", &t.post)] {
                let mut local = HashSet::new();
                for p in list {
                    if !places.contains(p.as_str()) {
                        errors.push(NetError::DanglingArc {
                            transition: t.name.clone(),
                            place: p.clone(),
                        });
                    } else if !local.insert(p.as_str()) {
                        errors.push(NetError::DuplicateArc {
                            transition: t.name.clone(),
                            place: p.clone(),
                            side,
                        });
                    }
                }
            }
        }
        errors
    }

    pub fn build(&self) -> Result<OrdinaryNet, Vec<NetError>> {
        let errors = self.validate();
        if !errors.is_empty() {
            return Err(errors);
        }
        let index = |name: &String| PlaceId(self.places.iter().position(|p| p == name).unwrap());
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                name: t.name.clone(),
                controllable: t.controllable,
                pre: t.pre.iter().map(index).collect(),
                post: t.post.iter().map(index).collect(),
            })
            .collect();
        Ok(OrdinaryNet {
            places: self.places.clone(),
            transitions,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub controllable: bool,
    pub pre: BTreeSet<PlaceId>,
    pub post: BTreeSet<PlaceId>,
}

/// A validated ordinary net. Only obtainable through [`NetSpec::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinaryNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
}

impl OrdinaryNet {
    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_names(&self) -> &[String] {
        &self.places
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (TransitionId, &Transition)> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (TransitionId(i), t))
    }

    pub fn transition_ids(&self) -> Vec<TransitionId> {
        (0..self.transitions.len()).map(TransitionId).collect()
    }

    /// Uncontrollable transitions in declaration order.
    pub fn uncontrollable(&self) -> Vec<TransitionId> {
        self.transitions()
            .filter(|(_, t)| !t.controllable)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn is_uncontrollable(&self, t: TransitionId) -> bool {
        !self.transitions[t.0].controllable
    }

    pub fn place_id(&self, name: &str) -> Result<PlaceId, FireError> {
        self.places
            .iter()
            .position(|p| p == name)
            .map(PlaceId)
            .ok_or_else(|| FireError::UnknownPlace(name.to_string()))
    }

    pub fn transition_id(&self, name: &str) -> Result<TransitionId, FireError> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .map(TransitionId)
            .ok_or_else(|| FireError::UnknownTransition(name.to_string()))
    }

    pub fn preset(&self, t: TransitionId) -> &BTreeSet<PlaceId> {
        &self.transitions[t.0].pre
    }

    pub fn postset(&self, t: TransitionId) -> &BTreeSet<PlaceId> {
        &self.transitions[t.0].post
    }

    /// Incidence entry `[p in t post] - [p in t pre]`.
    pub fn incidence_entry(&self, p: PlaceId, t: TransitionId) -> i64 {
        let tr = &self.transitions[t.0];
        i64::from(tr.post.contains(&p)) - i64::from(tr.pre.contains(&p))
    }

    /// Incidence matrix, rows are places and columns transitions.
    pub fn incidence(&self) -> Vec<Vec<i64>> {
        (0..self.places.len())
            .map(|p| {
                self.transition_ids()
                    .into_iter()
                    .map(|t| self.incidence_entry(PlaceId(p), t))
                    .collect()
            })
            .collect()
    }

    pub fn incidence_column(&self, t: TransitionId) -> Vec<i64> {
        (0..self.places.len())
            .map(|p| self.incidence_entry(PlaceId(p), t))
            .collect()
    }

    pub fn check_marking(&self, m: &Marking) -> Result<(), FireError> {
        if m.len() != self.places.len() {
            return Err(FireError::MarkingLength {
                expected: self.places.len(),
                found: m.len(),
            });
        }
        Ok(())
    }

    pub fn is_enabled(&self, t: TransitionId, m: &Marking) -> bool {
        self.transitions[t.0].pre.iter().all(|p| m.0[p.0] >= 1)
    }

    pub fn fire(&self, t: TransitionId, m: &Marking) -> Result<Marking, FireError> {
        self.check_marking(m)?;
        if !self.is_enabled(t, m) {
            return Err(FireError::NotEnabled(self.transitions[t.0].name.clone()));
        }
        Ok(self.fire_unchecked(t, m))
    }

    /// Fires an enabled transition without re-checking enabledness.
    pub(crate) fn fire_unchecked(&self, t: TransitionId, m: &Marking) -> Marking {
        let tr = &self.transitions[t.0];
        let mut next = m.clone();
        for p in &tr.pre {
            next.0[p.0] -= 1;
        }
        for p in &tr.post {
            next.0[p.0] += 1;
        }
        next
    }
}

/// Token counts per place, in net place order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Marking(pub Vec<u32>);

impl Marking {
    pub fn zeros(n: usize) -> Self {
        Marking(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    /// Componentwise `>=` with at least one strict `>`.
    pub fn strictly_dominates(&self, other: &Marking) -> bool {
        let ge = self.0.iter().zip(&other.0).all(|(a, b)| a >= b);
        ge && self.0 != other.0
    }
}

impl From<Vec<u32>> for Marking {
    fn from(v: Vec<u32>) -> Self {
        Marking(v)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::fixture;

    fn t(net: &OrdinaryNet, name: &str) -> TransitionId {
        net.transition_id(name).unwrap()
    }

    fn names(net: &OrdinaryNet, set: &BTreeSet<PlaceId>) -> Vec<String> {
        set.iter().map(|p| net.place_name(*p).to_string()).collect()
    }

    #[test]
    fn fig1_is_valid() {
        assert!(fixture::fig1_spec().validate().is_empty());
    }

    #[test]
    fn dangling_arc_is_reported() {
        let mut spec = fixture::fig1_spec();
        spec.transitions[0].post.push("p9".into());
        assert_eq!(
            spec.validate(),
            vec![NetError::DanglingArc {
                transition: "t1".into(),
                place: "p9".into()
            }]
        );
    }

    #[test]
    fn duplicate_transition_is_reported() {
        let mut spec = fixture::fig1_spec();
        spec.transitions[1].name = "t1".into();
        assert_eq!(spec.validate(), vec![NetError::DuplicateId("t1".into())]);
    }

    #[test]
    fn empty_net_lists_both_errors() {
        let errors = NetSpec::default().validate();
        assert_eq!(errors, vec![NetError::NoPlaces, NetError::NoTransitions]);
    }

    #[test]
    fn every_violation_is_listed() {
        let spec = NetSpec {
            places: vec!["p1".into(), "p1".into()],
            transitions: vec![TransitionSpec::new("t", false, &["p1", "p1"], &["q"])],
        };
        let errors = spec.validate();
        assert_eq!(errors.len(), 3, "{errors:?}");
        assert_eq!(spec.validate(), errors);
    }

    #[test]
    fn presets_and_postsets() {
        let net = fixture::fig1_net();
        assert_eq!(names(&net, net.preset(t(&net, "t1"))), ["p2", "p3"]);
        assert_eq!(names(&net, net.preset(t(&net, "t2"))), ["p3"]);
        assert_eq!(names(&net, net.postset(t(&net, "t2"))), ["p5"]);
        assert!(net.transition_id("t9").is_err());
    }

    #[test]
    fn incidence_columns() {
        let net = fixture::fig1_net();
        assert_eq!(net.incidence_column(t(&net, "t2")), vec![0, 0, -1, 0, 1]);
        assert_eq!(net.incidence_column(t(&net, "t1")), vec![1, -1, -1, 1, 0]);

        let isolated = NetSpec {
            places: vec!["a".into(), "b".into()],
            transitions: vec![TransitionSpec::new("t", true, &[], &[])],
        }
        .build()
        .unwrap();
        assert_eq!(isolated.incidence_column(TransitionId(0)), vec![0, 0]);
        assert_eq!(isolated.incidence(), vec![vec![0], vec![0]]);
    }

    #[test]
    fn firing_rule() {
        let net = fixture::fig1_net();
        let m0 = fixture::fig1_initial_marking();
        assert_eq!(
            net.fire(t(&net, "t1"), &m0).unwrap(),
            Marking(vec![1, 0, 1, 1, 0])
        );
        assert!(!net.is_enabled(t(&net, "t4"), &m0));
        assert_eq!(
            net.fire(t(&net, "t4"), &m0),
            Err(FireError::NotEnabled("t4".into()))
        );
        assert!(matches!(
            net.fire(t(&net, "t1"), &Marking(vec![1])),
            Err(FireError::MarkingLength { .. })
        ));
    }

    #[test]
    fn self_loop_keeps_count() {
        let net = NetSpec {
            places: vec!["a".into(), "b".into()],
            transitions: vec![TransitionSpec::new("t", false, &["a"], &["a", "b"])],
        }
        .build()
        .unwrap();
        let next = net.fire(TransitionId(0), &Marking(vec![1, 0])).unwrap();
        assert_eq!(next, Marking(vec![1, 1]));
        assert_eq!(net.incidence_entry(PlaceId(0), TransitionId(0)), 0);
    }

    #[test]
    fn domination() {
        let a = Marking(vec![1, 2]);
        assert!(Marking(vec![1, 3]).strictly_dominates(&a));
        assert!(!a.strictly_dominates(&a));
        assert!(!Marking(vec![2, 1]).strictly_dominates(&a));
    }
}
