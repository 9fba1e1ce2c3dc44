//! Brute-force oracles that share nothing with the library's exploration
//! code beyond the firing rule.

#![allow(dead_code)]

use std::collections::BTreeSet;

use gmec_transform::analysis::hunt::{random_instance, HuntConfig, Instance};
use gmec_transform::{LinearConstraint, Marking, OrdinaryNet, TransitionId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Depth-first closure of `m` under the transitions accepted by `allowed`.
/// Gives up (returns `None`) beyond `cap` markings.
pub fn closure(
    net: &OrdinaryNet,
    m: &Marking,
    allowed: impl Fn(TransitionId) -> bool,
    cap: usize,
) -> Option<BTreeSet<Marking>> {
    let mut seen = BTreeSet::from([m.clone()]);
    let mut stack = vec![m.clone()];
    while let Some(cur) = stack.pop() {
        for t in net.transition_ids() {
            if !allowed(t) {
                continue;
            }
            if let Ok(next) = net.fire(t, &cur) {
                if seen.insert(next.clone()) {
                    if seen.len() > cap {
                        return None;
                    }
                    stack.push(next);
                }
            }
        }
    }
    Some(seen)
}

pub fn reachable(net: &OrdinaryNet, m0: &Marking) -> Option<BTreeSet<Marking>> {
    closure(net, m0, |_| true, 50_000)
}

/// A = { m in R(m0) | every uncontrollable successor closure stays legal },
/// evaluated per node.
pub fn naive_admissible(
    net: &OrdinaryNet,
    m0: &Marking,
    c: &LinearConstraint,
) -> Option<BTreeSet<Marking>> {
    let reach = reachable(net, m0)?;
    let mut out = BTreeSet::new();
    for m in &reach {
        let uc = closure(net, m, |t| net.is_uncontrollable(t), 50_000)?;
        if uc.iter().all(|x| dot(c, x) <= i128::from(c.bound())) {
            out.insert(m.clone());
        }
    }
    Some(out)
}

pub fn dot(c: &LinearConstraint, m: &Marking) -> i128 {
    c.weights()
        .iter()
        .zip(&m.0)
        .map(|(&w, &x)| i128::from(w) * i128::from(x))
        .sum()
}

/// Acceptance-corpus instance parameters: at most 6 places, 6 transitions
/// and 6 initial tokens.
pub fn corpus_config() -> HuntConfig {
    HuntConfig {
        max_places: 6,
        max_transitions: 6,
        max_tokens: 6,
        ..HuntConfig::default()
    }
}

/// The first `count` bounded instances drawn from consecutive seeds.
pub fn bounded_corpus(count: usize) -> Vec<(u64, Instance)> {
    let config = corpus_config();
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, &config);
        if gmec_transform::reach::reach_all(&inst.net, &inst.m0, config.limits()).is_ok() {
            out.push((seed, inst));
        }
        seed += 1;
    }
    out
}
