//! Seeded random search for further order-sensitivity counterexamples.
//!
//! Each trial draws an ordinary net, an initial marking and a constraint from
//! its own seed, derived from the master seed and the trial index. Trials run
//! in parallel but the report is assembled in trial order, so a master seed
//! always produces the same report.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{order_sensitivity_in, AnalysisError, Explored, OrderOptions};
use crate::constraint::{
    admissible_in, gain_at, is_admissible, is_weakly_admissible, legal_in, LinearConstraint,
};
use crate::io::document::{NetDocument, NetModel};
use crate::io::fixture::PaperFixture;
use crate::net::{Marking, NetSpec, OrdinaryNet, TransitionSpec};
use crate::reach::{ExploreLimits, ReachError};
use crate::transform::{
    transform_to_weak_admissible_bounded, SweepPolicy, TransformError, ZeroMode,
    DEFAULT_MAX_ROUNDS,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HuntConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_places: usize,
    pub max_transitions: usize,
    /// Cap on the total number of tokens in the initial marking.
    pub max_tokens: u32,
    /// Probability that a given place is an input (or output) of a transition.
    pub arc_density: f64,
    pub uncontrollable_fraction: f64,
    /// Fraction of transitions whose postset has the size of their preset.
    pub balanced_fraction: f64,
    pub weight_cap: u64,
    pub bound_cap: i64,
    pub max_markings: usize,
    pub max_tokens_per_place: u32,
    pub permutation_cap: usize,
    pub max_members: usize,
    pub max_rounds: usize,
    pub mode: ZeroMode,
    /// Use the built-in five-place net for trial 0.
    pub embed_fig1: bool,
}

impl Default for HuntConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            max_places: 6,
            max_transitions: 6,
            max_tokens: 6,
            arc_density: 0.35,
            uncontrollable_fraction: 0.7,
            balanced_fraction: 0.6,
            weight_cap: 3,
            bound_cap: 6,
            max_markings: 20_000,
            max_tokens_per_place: 255,
            permutation_cap: 6,
            max_members: 512,
            max_rounds: DEFAULT_MAX_ROUNDS,
            mode: ZeroMode::Syntactic,
            embed_fig1: false,
        }
    }
}

impl HuntConfig {
    pub fn validate(&self) -> Result<(), String> {
        let caps = [
            ("max_places", self.max_places),
            ("max_transitions", self.max_transitions),
            ("max_tokens", self.max_tokens as usize),
            ("weight_cap", self.weight_cap as usize),
            ("bound_cap", self.bound_cap.max(0) as usize),
            ("max_markings", self.max_markings),
            ("max_tokens_per_place", self.max_tokens_per_place as usize),
            ("permutation_cap", self.permutation_cap),
            ("max_members", self.max_members),
            ("max_rounds", self.max_rounds),
        ];
        for (name, value) in caps {
            if value < 1 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        for (name, value) in [
            ("arc_density", self.arc_density),
            ("uncontrollable_fraction", self.uncontrollable_fraction),
            ("balanced_fraction", self.balanced_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn limits(&self) -> ExploreLimits {
        ExploreLimits {
            max_markings: self.max_markings,
            max_tokens_per_place: self.max_tokens_per_place,
        }
    }

    fn order_options(&self) -> OrderOptions {
        OrderOptions {
            mode: self.mode,
            witness_cap: crate::analysis::DEFAULT_WITNESS_CAP,
            permutation_cap: self.permutation_cap,
            max_members: self.max_members,
        }
    }
}

/// Seed of trial `index`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    // splitmix64 finaliser over the pair.
    let mut z = master ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub net: OrdinaryNet,
    pub m0: Marking,
    pub constraint: LinearConstraint,
}

impl Instance {
    pub fn document(&self) -> NetDocument {
        NetDocument::from_model(&NetModel {
            net: self.net.clone(),
            m0: self.m0.clone(),
            constraints: vec![self.constraint.clone()],
        })
    }
}

fn pick_places<R: Rng>(rng: &mut R, places: &[String], density: f64) -> Vec<String> {
    let mut chosen: Vec<String> = places
        .iter()
        .filter(|_| rng.gen_bool(density))
        .cloned()
        .collect();
    if chosen.is_empty() {
        chosen.push(places.choose(rng).expect("at least one place").clone());
    }
    chosen
}

/// Draws an instance; every transition gets at least one input and one
/// output place.
pub fn random_instance<R: Rng>(rng: &mut R, config: &HuntConfig) -> Instance {
    let n_places = rng.gen_range(1..=config.max_places);
    let n_transitions = rng.gen_range(1..=config.max_transitions);
    let places: Vec<String> = (1..=n_places).map(|i| format!("p{i}")).collect();
    let transitions = (1..=n_transitions)
        .map(|i| {
            let pre = pick_places(rng, &places, config.arc_density);
            let post = if rng.gen_bool(config.balanced_fraction) {
                places
                    .choose_multiple(rng, pre.len())
                    .cloned()
                    .collect()
            } else {
                pick_places(rng, &places, config.arc_density)
            };
            TransitionSpec {
                name: format!("t{i}"),
                controllable: !rng.gen_bool(config.uncontrollable_fraction),
                pre,
                post,
            }
        })
        .collect();
    let net = NetSpec {
        places: places.clone(),
        transitions,
    }
    .build()
    .expect("generated nets are valid");

    let mut m0 = Marking::zeros(n_places);
    for _ in 0..rng.gen_range(0..=config.max_tokens) {
        m0.0[rng.gen_range(0..n_places)] += 1;
    }
    let weights = (0..n_places)
        .map(|_| rng.gen_range(0..=config.weight_cap))
        .collect();
    let bound = rng.gen_range(0..=config.bound_cap.max(0));
    let constraint = LinearConstraint::new(weights, bound).expect("weights are capped");
    Instance {
        net,
        m0,
        constraint,
    }
}

/// The instance trial `index` examines.
pub fn trial_instance(config: &HuntConfig, index: usize) -> Instance {
    if index == 0 && config.embed_fig1 {
        let fixture = PaperFixture::fig1();
        return Instance {
            net: fixture.net,
            m0: fixture.m0,
            constraint: fixture.constraint,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, index));
    random_instance(&mut rng, config)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialOutcome {
    SkippedUnbounded,
    SkippedCap { what: String },
    Error { message: String },
    Checked(TrialFindings),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialFindings {
    pub reachable: usize,
    pub admissible_at_generation: bool,
    pub positive_gain_transitions: Vec<String>,
    pub orders: usize,
    pub classes: usize,
    pub order_sensitive: bool,
    /// Orders whose output is not equivalent to the original constraint.
    pub inequivalent_orders: Vec<String>,
    /// Members of a converged transformation that are not weakly admissible.
    pub weak_admissibility_violations: Vec<String>,
    pub transform: String,
    /// A ⊆ L ⊆ R and edge/gain consistency failures. Any entry is a bug.
    pub invariant_violations: Vec<String>,
    /// Error of the order analysis, if it could not run.
    pub order_error: Option<String>,
}

impl TrialFindings {
    pub fn flagged(&self) -> bool {
        self.order_sensitive || !self.inequivalent_orders.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub outcome: TrialOutcome,
    /// Present for flagged trials, for replay outside the hunter.
    pub instance: Option<NetDocument>,
}

impl TrialRecord {
    pub fn flagged(&self) -> bool {
        matches!(&self.outcome, TrialOutcome::Checked(f) if f.flagged())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HuntSummary {
    pub trials: usize,
    pub checked: usize,
    pub skipped_unbounded: usize,
    pub skipped_cap: usize,
    pub errors: usize,
    pub order_error: usize,
    pub admissible_at_generation: usize,
    pub order_sensitive: usize,
    pub inequivalent: usize,
    pub flagged: usize,
    pub non_convergent: usize,
    pub weak_admissibility_violations: usize,
    pub invariant_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HuntReport {
    pub config: HuntConfig,
    pub summary: HuntSummary,
    pub trials: Vec<TrialRecord>,
}

impl HuntReport {
    pub fn flagged(&self) -> impl Iterator<Item = &TrialRecord> + '_ {
        self.trials.iter().filter(|t| t.flagged())
    }
}

fn names(net: &OrdinaryNet, ts: &[crate::net::TransitionId]) -> String {
    format!("[{}]", ts.iter().map(|t| &net.transition(*t).name).join(","))
}

/// Checks A ⊆ L ⊆ R and that every edge changes `w·m` by the gain.
fn invariant_violations(ex: &Explored<'_>, c: &LinearConstraint) -> Vec<String> {
    let mut out = Vec::new();
    let reach = ex.graph.marking_set();
    let legal = legal_in(&ex.graph, c);
    let admissible = admissible_in(ex.net, &ex.graph, c);
    if !admissible.is_subset(&legal) {
        out.push("admissible set is not contained in the legal set".into());
    }
    if !legal.is_subset(&reach) {
        out.push("legal set is not contained in the reachability set".into());
    }
    for e in ex.graph.edges() {
        let before = c.dot(&ex.graph.nodes()[e.source]);
        let after = c.dot(&ex.graph.nodes()[e.target]);
        if after - before != i128::from(gain_at(ex.net, c, e.transition)) {
            out.push(format!(
                "edge {} -{}-> {} breaks gain consistency",
                ex.graph.nodes()[e.source],
                ex.net.transition(e.transition).name,
                ex.graph.nodes()[e.target]
            ));
        }
    }
    out
}

pub fn run_trial(config: &HuntConfig, index: usize) -> TrialRecord {
    let seed = trial_seed(config.seed, index);
    let instance = trial_instance(config, index);
    let outcome = examine(config, &instance);
    let flagged = matches!(&outcome, TrialOutcome::Checked(f) if f.flagged());
    TrialRecord {
        index,
        seed,
        outcome,
        instance: flagged.then(|| instance.document()),
    }
}

fn examine(config: &HuntConfig, instance: &Instance) -> TrialOutcome {
    let net = &instance.net;
    let c = &instance.constraint;
    let mut ex = match Explored::new(net, &instance.m0, config.limits()) {
        Ok(ex) => ex,
        Err(ReachError::LikelyUnbounded { .. }) => return TrialOutcome::SkippedUnbounded,
        Err(ReachError::CapExceeded { what, .. }) => {
            return TrialOutcome::SkippedCap { what: what.into() }
        }
        Err(e) => {
            return TrialOutcome::Error {
                message: e.to_string(),
            }
        }
    };

    let invariant_violations = invariant_violations(&ex, c);

    let mut weak_admissibility_violations = Vec::new();
    let transform = match transform_to_weak_admissible_bounded(
        net,
        c,
        &SweepPolicy::DeclarationOrder,
        config.max_rounds,
        config.max_members,
    ) {
        Ok(out) => {
            for member in out.final_set().iter() {
                if !is_weakly_admissible(net, member) {
                    weak_admissibility_violations.push(member.to_string());
                }
            }
            format!("converged after {} sweeps", out.sweeps)
        }
        Err(e @ TransformError::NonConvergence { .. }) => format!("non-convergent: {e}"),
        Err(e) => format!("error: {e}"),
    };

    let mut findings = TrialFindings {
        reachable: ex.graph.len(),
        admissible_at_generation: is_admissible(net, c),
        positive_gain_transitions: Vec::new(),
        orders: 0,
        classes: 0,
        order_sensitive: false,
        inequivalent_orders: Vec::new(),
        weak_admissibility_violations,
        transform,
        invariant_violations,
        order_error: None,
    };
    match order_sensitivity_in(&mut ex, c, config.order_options()) {
        Ok(report) => {
            findings.positive_gain_transitions = report
                .transitions
                .iter()
                .map(|t| net.transition(*t).name.clone())
                .collect();
            findings.orders = report.orders.len();
            findings.classes = report.classes.len();
            findings.order_sensitive = !report.orders_agree();
            findings.inequivalent_orders = report
                .inequivalent_orders()
                .into_iter()
                .map(|i| names(net, &report.orders[i].order))
                .collect();
        }
        Err(e @ (AnalysisError::PermutationCapExceeded { .. } | AnalysisError::Transform(_))) => {
            findings.order_error = Some(e.to_string());
        }
        Err(e) => {
            return TrialOutcome::Error {
                message: e.to_string(),
            }
        }
    }
    TrialOutcome::Checked(findings)
}

pub fn hunt(config: &HuntConfig) -> HuntReport {
    let trials: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect();
    let mut summary = HuntSummary {
        trials: trials.len(),
        ..HuntSummary::default()
    };
    for t in &trials {
        match &t.outcome {
            TrialOutcome::SkippedUnbounded => summary.skipped_unbounded += 1,
            TrialOutcome::SkippedCap { .. } => summary.skipped_cap += 1,
            TrialOutcome::Error { .. } => summary.errors += 1,
            TrialOutcome::Checked(f) => {
                summary.checked += 1;
                summary.admissible_at_generation += usize::from(f.admissible_at_generation);
                summary.order_error += usize::from(f.order_error.is_some());
                summary.order_sensitive += usize::from(f.order_sensitive);
                summary.inequivalent += usize::from(!f.inequivalent_orders.is_empty());
                summary.flagged += usize::from(f.flagged());
                summary.non_convergent += usize::from(f.transform.starts_with("non-convergent"));
                summary.weak_admissibility_violations +=
                    usize::from(!f.weak_admissibility_violations.is_empty());
                summary.invariant_violations += usize::from(!f.invariant_violations.is_empty());
            }
        }
    }
    HuntReport {
        config: config.clone(),
        summary,
        trials,
    }
}
