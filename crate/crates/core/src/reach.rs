//! Breadth-first enumeration of reachable markings.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::net::{FireError, Marking, OrdinaryNet, TransitionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_markings: usize,
    pub max_tokens_per_place: u32,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        Self {
            max_markings: 100_000,
            max_tokens_per_place: 255,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error("state space exceeds the cap of {limit} ({what})")]
    CapExceeded {
        limit: usize,
        what: &'static str,
        partial: Box<ReachGraph>,
    },
    #[error("net is likely unbounded: {marking} strictly dominates its ancestor {ancestor}")]
    LikelyUnbounded { ancestor: Marking, marking: Marking },
    #[error("exploration limits must be at least 1")]
    BadLimits,
    #[error(transparent)]
    Net(#[from] FireError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub transition: TransitionId,
    pub target: usize,
}

/// Explicit marking graph. Nodes are stored in BFS discovery order; node 0 is
/// the root.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachGraph {
    nodes: Vec<Marking>,
    index: HashMap<Marking, usize>,
    edges: Vec<Edge>,
    complete: bool,
}

impl ReachGraph {
    pub fn root(&self) -> &Marking {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[Marking] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn node_index(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.index.contains_key(m)
    }

    pub fn marking_set(&self) -> BTreeSet<Marking> {
        self.nodes.iter().cloned().collect()
    }

    /// A firing sequence from the root to node `target`, following BFS edges.
    pub fn path_to(&self, target: usize) -> Option<Vec<TransitionId>> {
        let mut parent: Vec<Option<(usize, TransitionId)>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(n) = queue.pop_front() {
            if n == target {
                break;
            }
            for e in self.edges.iter().filter(|e| e.source == n) {
                if !seen[e.target] {
                    seen[e.target] = true;
                    parent[e.target] = Some((n, e.transition));
                    queue.push_back(e.target);
                }
            }
        }
        if !seen.get(target).copied().unwrap_or(false) {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = target;
        while let Some((p, t)) = parent[cur] {
            path.push(t);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

/// Closure of `m` under firings of the `allowed` transitions.
///
/// The frontier is FIFO and transitions are tried in declaration order, so
/// node and edge order are deterministic.
pub fn reach(
    net: &OrdinaryNet,
    m: &Marking,
    allowed: &[TransitionId],
    limits: ExploreLimits,
) -> Result<ReachGraph, ReachError> {
    if limits.max_markings < 1 || limits.max_tokens_per_place < 1 {
        return Err(ReachError::BadLimits);
    }
    net.check_marking(m)?;
    let mut mask = vec![false; net.transition_count()];
    for t in allowed {
        match mask.get_mut(t.0) {
            Some(slot) => *slot = true,
            None => return Err(FireError::UnknownTransition(format!("#{}", t.0)).into()),
        }
    }
    let order: Vec<TransitionId> = net
        .transition_ids()
        .into_iter()
        .filter(|t| mask[t.0])
        .collect();

    let mut graph = ReachGraph {
        nodes: vec![m.clone()],
        index: HashMap::from([(m.clone(), 0)]),
        edges: Vec::new(),
        complete: false,
    };
    if m.0.iter().any(|&c| c > limits.max_tokens_per_place) {
        return Err(token_cap(limits, graph));
    }
    // BFS tree parent of each node, for the ancestor domination check.
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut queue = VecDeque::from([0usize]);

    while let Some(src) = queue.pop_front() {
        for &t in &order {
            if !net.is_enabled(t, &graph.nodes[src]) {
                continue;
            }
            let next = net.fire_unchecked(t, &graph.nodes[src]);
            let target = match graph.index.get(&next) {
                Some(&i) => i,
                None => {
                    let mut anc = Some(src);
                    while let Some(a) = anc {
                        if next.strictly_dominates(&graph.nodes[a]) {
                            return Err(ReachError::LikelyUnbounded {
                                ancestor: graph.nodes[a].clone(),
                                marking: next,
                            });
                        }
                        anc = parent[a];
                    }
                    if next.0.iter().any(|&c| c > limits.max_tokens_per_place) {
                        return Err(token_cap(limits, graph));
                    }
                    if graph.nodes.len() >= limits.max_markings {
                        return Err(ReachError::CapExceeded {
                            limit: limits.max_markings,
                            what: "markings",
                            partial: Box::new(graph),
                        });
                    }
                    let i = graph.nodes.len();
                    graph.index.insert(next.clone(), i);
                    graph.nodes.push(next);
                    parent.push(Some(src));
                    queue.push_back(i);
                    i
                }
            };
            graph.edges.push(Edge {
                source: src,
                transition: t,
                target,
            });
        }
    }
    graph.complete = true;
    Ok(graph)
}

fn token_cap(limits: ExploreLimits, graph: ReachGraph) -> ReachError {
    ReachError::CapExceeded {
        limit: limits.max_tokens_per_place as usize,
        what: "tokens per place",
        partial: Box::new(graph),
    }
}

/// Full reachability set R(m).
pub fn reach_all(
    net: &OrdinaryNet,
    m: &Marking,
    limits: ExploreLimits,
) -> Result<ReachGraph, ReachError> {
    reach(net, m, &net.transition_ids(), limits)
}

/// Markings reachable from `m` by uncontrollable firings only.
pub fn uc_reach(
    net: &OrdinaryNet,
    m: &Marking,
    limits: ExploreLimits,
) -> Result<ReachGraph, ReachError> {
    reach(net, m, &net.uncontrollable(), limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::fixture;
    use crate::net::{NetSpec, TransitionSpec};

    #[test]
    fn fig1_has_fourteen_markings() {
        let net = fixture::fig1_net();
        let m0 = fixture::fig1_initial_marking();
        let g = reach_all(&net, &m0, ExploreLimits::default()).unwrap();
        assert!(g.is_complete());
        assert_eq!(g.len(), 14);
        assert!(g.contains(&Marking(vec![3, 0, 0, 0, 0])));
        assert!(g.contains(&Marking(vec![1, 0, 0, 1, 1])));
        assert!(g.nodes().iter().all(|m| m.total() == 3));
        let uc = uc_reach(&net, &m0, ExploreLimits::default()).unwrap();
        assert_eq!(uc.marking_set(), g.marking_set());
    }

    #[test]
    fn deadlock_and_single_firing() {
        let net = fixture::fig1_net();
        let limits = ExploreLimits::default();
        let dead = Marking(vec![3, 0, 0, 0, 0]);
        let g = uc_reach(&net, &dead, limits).unwrap();
        assert_eq!(g.nodes(), [dead]);
        assert!(g.edges().is_empty());
        let g = uc_reach(&net, &fixture::fig1_initial_marking(), limits).unwrap();
        assert!(g.contains(&Marking(vec![1, 0, 1, 1, 0])));
    }

    #[test]
    fn empty_allowed_set() {
        let net = fixture::fig1_net();
        let m0 = fixture::fig1_initial_marking();
        let g = reach(&net, &m0, &[], ExploreLimits::default()).unwrap();
        assert_eq!(g.nodes(), [m0]);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn controllable_only_net() {
        let net = NetSpec {
            places: vec!["a".into(), "b".into()],
            transitions: vec![TransitionSpec::new("t", true, &["a"], &["b"])],
        }
        .build()
        .unwrap();
        let m = Marking(vec![1, 0]);
        let g = uc_reach(&net, &m, ExploreLimits::default()).unwrap();
        assert_eq!(g.nodes(), [m]);
    }

    #[test]
    fn unbounded_net_fails_fast() {
        let net = NetSpec {
            places: vec!["a".into(), "b".into()],
            transitions: vec![TransitionSpec::new("t", false, &["a"], &["a", "b"])],
        }
        .build()
        .unwrap();
        let err = reach_all(&net, &Marking(vec![1, 0]), ExploreLimits::default()).unwrap_err();
        assert_eq!(
            err,
            ReachError::LikelyUnbounded {
                ancestor: Marking(vec![1, 0]),
                marking: Marking(vec![1, 1])
            }
        );
    }

    #[test]
    fn marking_cap_returns_partial_graph() {
        let net = fixture::fig1_net();
        let limits = ExploreLimits {
            max_markings: 5,
            ..ExploreLimits::default()
        };
        match reach_all(&net, &fixture::fig1_initial_marking(), limits) {
            Err(ReachError::CapExceeded { limit, partial, .. }) => {
                assert_eq!(limit, 5);
                assert_eq!(partial.len(), 5);
                assert!(!partial.is_complete());
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn token_cap() {
        let net = fixture::fig1_net();
        let limits = ExploreLimits {
            max_tokens_per_place: 2,
            ..ExploreLimits::default()
        };
        let err = reach_all(&net, &fixture::fig1_initial_marking(), limits).unwrap_err();
        assert!(matches!(
            err,
            ReachError::CapExceeded {
                what: "tokens per place",
                ..
            }
        ));
    }

    #[test]
    fn paths_replay() {
        let net = fixture::fig1_net();
        let g = reach_all(&net, &fixture::fig1_initial_marking(), ExploreLimits::default()).unwrap();
        for (i, target) in g.nodes().iter().enumerate() {
            let path = g.path_to(i).unwrap();
            let mut m = g.root().clone();
            for t in path {
                m = net.fire(t, &m).unwrap();
            }
            assert_eq!(&m, target);
        }
    }

    #[test]
    fn deterministic() {
        let net = fixture::fig1_net();
        let m0 = fixture::fig1_initial_marking();
        let a = reach_all(&net, &m0, ExploreLimits::default()).unwrap();
        let b = reach_all(&net, &m0, ExploreLimits::default()).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.edges(), b.edges());
    }
}
