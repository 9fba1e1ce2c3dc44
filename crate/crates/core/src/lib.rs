//! Linear constraints on ordinary Petri nets with uncontrollable transitions.
//!
//! The crate computes reachability, legal and admissible marking sets,
//! implements the gain-based constraint transformation at uncontrollable
//! transitions, and checks whether transforming in different orders yields
//! equivalent disjunctions.
//!
//! ```
//! use gmec_transform::io::fixture;
//! use gmec_transform::transform::apply_sequence;
//!
//! let net = fixture::fig1_net();
//! let t1 = net.transition_id("t1").unwrap();
//! let t2 = net.transition_id("t2").unwrap();
//! let a = apply_sequence(&net, &fixture::fig1_constraint(), &[t1, t2]).unwrap();
//! let b = apply_sequence(&net, &fixture::fig1_constraint(), &[t2, t1]).unwrap();
//! assert_ne!(a.final_set(), b.final_set());
//! ```

pub mod analysis;
pub mod constraint;
pub mod io;
pub mod net;
pub mod reach;
pub mod transform;

pub use constraint::{ConstraintSet, LinearConstraint};
pub use net::{Marking, OrdinaryNet, PlaceId, TransitionId};
pub use reach::{ExploreLimits, ReachGraph};
