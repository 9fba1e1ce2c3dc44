//! JSON net documents.
//!
//! ```json
//! {
//!   "version": 1,
//!   "places": ["p1", "p2"],
//!   "transitions": [
//!     { "name": "t1", "controllable": false, "pre": ["p1"], "post": ["p2"] }
//!   ],
//!   "initial_marking": { "p1": 1 },
//!   "constraints": [ { "weights": { "p2": 1 }, "k": 0 } ]
//! }
//! ```
//!
//! Marking entries and weights that are left out default to 0. Unknown
//! fields are rejected.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{LinearConstraint, MAX_WEIGHT};
use crate::net::{Marking, NetError, NetSpec, OrdinaryNet, TransitionSpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported document version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("invalid net: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Net(Vec<NetError>),
    #[error("{context} refers to undeclared place `{place}`")]
    UnknownPlace { context: String, place: String },
    #[error("constraint {constraint} gives place `{place}` the negative weight {value}")]
    NegativeWeight {
        constraint: usize,
        place: String,
        value: i64,
    },
    #[error("constraint {constraint} gives place `{place}` a weight above {MAX_WEIGHT}")]
    WeightTooLarge { constraint: usize, place: String },
    #[error("initial marking gives place `{place}` the invalid token count {value}")]
    BadTokenCount { place: String, value: i64 },
    #[error("constraint index {index} is out of range ({available} constraints in the document)")]
    NoConstraint { index: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub name: String,
    pub controllable: bool,
    pub pre: Vec<String>,
    pub post: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDoc {
    #[serde(default)]
    pub weights: IndexMap<String, i64>,
    pub k: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub version: u32,
    pub places: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
    #[serde(default)]
    pub initial_marking: IndexMap<String, i64>,
    #[serde(default)]
    pub constraints: Vec<ConstraintDoc>,
}

/// A validated document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetModel {
    pub net: OrdinaryNet,
    pub m0: Marking,
    pub constraints: Vec<LinearConstraint>,
}

impl NetModel {
    pub fn constraint(&self, index: usize) -> Result<&LinearConstraint, DocumentError> {
        self.constraints
            .get(index)
            .ok_or(DocumentError::NoConstraint {
                index,
                available: self.constraints.len(),
            })
    }
}

pub fn parse_net_document(text: &str) -> Result<NetModel, DocumentError> {
    let doc: NetDocument = serde_json::from_str(text).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.into_model()
}

impl NetDocument {
    pub fn into_model(self) -> Result<NetModel, DocumentError> {
        if self.version != FORMAT_VERSION {
            return Err(DocumentError::UnsupportedVersion(self.version));
        }
        let spec = NetSpec {
            places: self.places,
            transitions: self
                .transitions
                .into_iter()
                .map(|t| TransitionSpec {
                    name: t.name,
                    controllable: t.controllable,
                    pre: t.pre,
                    post: t.post,
                })
                .collect(),
        };
        let net = spec.build().map_err(DocumentError::Net)?;

        let mut m0 = Marking::zeros(net.place_count());
        for (place, &value) in &self.initial_marking {
            let p = net
                .place_id(place)
                .map_err(|_| DocumentError::UnknownPlace {
                    context: "initial marking".into(),
                    place: place.clone(),
                })?;
            m0.0[p.0] = u32::try_from(value).map_err(|_| DocumentError::BadTokenCount {
                place: place.clone(),
                value,
            })?;
        }

        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let mut weights = vec![0u64; net.place_count()];
            for (place, &value) in &c.weights {
                let p = net
                    .place_id(place)
                    .map_err(|_| DocumentError::UnknownPlace {
                        context: format!("constraint {i}"),
                        place: place.clone(),
                    })?;
                if value < 0 {
                    return Err(DocumentError::NegativeWeight {
                        constraint: i,
                        place: place.clone(),
                        value,
                    });
                }
                if value as u64 > MAX_WEIGHT {
                    return Err(DocumentError::WeightTooLarge {
                        constraint: i,
                        place: place.clone(),
                    });
                }
                weights[p.0] = value as u64;
            }
            let lc = LinearConstraint::for_net(&net, weights, c.k)
                .expect("weights are sized and range-checked above");
            constraints.push(lc);
        }
        Ok(NetModel {
            net,
            m0,
            constraints,
        })
    }

    pub fn from_model(model: &NetModel) -> Self {
        let net = &model.net;
        let names = net.place_names();
        NetDocument {
            version: FORMAT_VERSION,
            places: names.to_vec(),
            transitions: net
                .transitions()
                .map(|(_, t)| TransitionDoc {
                    name: t.name.clone(),
                    controllable: t.controllable,
                    pre: t.pre.iter().map(|p| names[p.0].clone()).collect(),
                    post: t.post.iter().map(|p| names[p.0].clone()).collect(),
                })
                .collect(),
            initial_marking: names
                .iter()
                .cloned()
                .zip(model.m0.0.iter().map(|&c| i64::from(c)))
                .collect(),
            constraints: model
                .constraints
                .iter()
                .map(|c| ConstraintDoc {
                    weights: names
                        .iter()
                        .cloned()
                        .zip(c.weights().iter().map(|&w| w as i64))
                        .collect(),
                    k: c.bound(),
                })
                .collect(),
        }
    }
}

pub fn emit_net_document(model: &NetModel) -> String {
    let mut text = serde_json::to_string_pretty(&NetDocument::from_model(model))
        .expect("documents always serialize");
    text.push('\n');
    text
}
