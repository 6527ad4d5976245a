//! Concrete semantics: configurations, rendez-vous steps, and exact
//! reachability for a fixed population.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use crate::budget::SearchLimits;
use crate::model::{classify, Edge, LetterId, Polarity, Protocol, Role, StateId};

/// Multiset over the protocol states, stored densely by [`StateId`] index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    counts: Vec<u32>,
}

impl Configuration {
    pub fn zero(p: &Protocol) -> Self {
        Configuration {
            counts: vec![0; p.num_states()],
        }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Configuration { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, q: StateId) -> u32 {
        self.counts[q.index()]
    }

    pub fn set(&mut self, q: StateId, v: u32) {
        self.counts[q.index()] = v;
    }

    pub fn add(&mut self, q: StateId, v: u32) {
        self.counts[q.index()] += v;
    }

    /// Total number of entities, leader included.
    pub fn size(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Number of entities in process states.
    pub fn processes(&self, p: &Protocol) -> u32 {
        p.process_states().map(|q| self.get(q)).sum()
    }

    /// Exactly one leader entity when the protocol has a leader, none
    /// otherwise.
    pub fn is_valid_for(&self, p: &Protocol) -> bool {
        if self.counts.len() != p.num_states() {
            return false;
        }
        let leaders: u32 = p.leader_states().map(|q| self.get(q)).sum();
        leaders == u32::from(!p.is_leaderless())
    }

    /// Sparse `(state, count)` view, zero counts omitted.
    pub fn support(&self) -> impl Iterator<Item = (StateId, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (StateId(i as u32), c))
    }
}

/// `n` processes in the initial process state and the leader (if any) in its
/// initial state.
pub fn initial_config(p: &Protocol, n: u32) -> Configuration {
    let mut c = Configuration::zero(p);
    c.add(p.initial(), n);
    if let Some(l) = p.leader() {
        c.add(l.init, 1);
    }
    c
}

pub fn final_config(p: &Protocol, n: u32) -> Configuration {
    let mut c = Configuration::zero(p);
    c.add(p.final_state(), n);
    if let Some(l) = p.leader() {
        c.add(l.fin, 1);
    }
    c
}

/// One rendez-vous: an entity takes `send` (`!a`) while another takes `recv`
/// (`?a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub send: Edge,
    pub recv: Edge,
}

impl Step {
    pub fn letter(&self) -> LetterId {
        self.send.action.letter
    }

    /// Both edges well-formed for a rendez-vous and present in `p`.
    pub fn is_wellformed(&self, p: &Protocol) -> bool {
        self.send.action.polarity == Polarity::Send
            && self.recv.action.polarity == Polarity::Receive
            && self.send.action.letter == self.recv.action.letter
            && p.has_edge(&self.send)
            && p.has_edge(&self.recv)
    }

    pub fn is_enabled(&self, c: &Configuration) -> bool {
        let (a, b) = (self.send.src, self.recv.src);
        if a == b {
            c.get(a) >= 2
        } else {
            c.get(a) >= 1 && c.get(b) >= 1
        }
    }

    /// Successor configuration, or `None` when the step is not enabled.
    pub fn apply(&self, c: &Configuration) -> Option<Configuration> {
        if !self.is_enabled(c) {
            return None;
        }
        let mut next = c.clone();
        next.counts[self.send.src.index()] -= 1;
        next.counts[self.recv.src.index()] -= 1;
        next.counts[self.send.dst.index()] += 1;
        next.counts[self.recv.dst.index()] += 1;
        Some(next)
    }
}

/// All enabled rendez-vous from `c` with their successors, in the sorted
/// order of [`Protocol::rendezvous_pairs`].
pub fn enabled_steps(p: &Protocol, c: &Configuration) -> Vec<(Step, Configuration)> {
    p.rendezvous_pairs()
        .into_iter()
        .map(|(send, recv)| Step { send, recv })
        .filter_map(|s| s.apply(c).map(|next| (s, next)))
        .collect()
}

/// A replayable execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub start: Configuration,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("start configuration is not valid for the protocol")]
    InvalidStart,
    #[error("step {0} uses edges that are not a rendez-vous of the protocol")]
    Malformed(usize),
    #[error("step {0} not enabled")]
    NotEnabled(usize),
}

impl Trace {
    pub fn empty(start: Configuration) -> Self {
        Trace {
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Replays every step from `start` and returns the reached configuration.
    pub fn replay(&self, p: &Protocol) -> Result<Configuration, ReplayError> {
        if !self.start.is_valid_for(p) {
            return Err(ReplayError::InvalidStart);
        }
        let mut c = self.start.clone();
        for (k, s) in self.steps.iter().enumerate() {
            if !s.is_wellformed(p) {
                return Err(ReplayError::Malformed(k));
            }
            c = s.apply(&c).ok_or(ReplayError::NotEnabled(k))?;
        }
        Ok(c)
    }

    /// Population `n` if this trace starts from an initial configuration.
    pub fn population(&self, p: &Protocol) -> Option<u32> {
        let n = self.start.get(p.initial());
        (self.start == initial_config(p, n)).then_some(n)
    }

    /// Whether the trace is a witness `C_i^(n) ->* C_f^(n)` for some `n`,
    /// returning that `n`.
    pub fn witnesses(&self, p: &Protocol) -> Option<u32> {
        let n = self.population(p)?;
        (self.replay(p).ok()? == final_config(p, n)).then_some(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reachability {
    Witness(Trace),
    /// The whole finite configuration space was explored.
    NotReachable,
    BudgetExceeded,
}

impl Reachability {
    pub fn answer(&self) -> Answer {
        match self {
            Reachability::Witness(_) => Answer::Yes,
            Reachability::NotReachable => Answer::No,
            Reachability::BudgetExceeded => Answer::Unknown,
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match self {
            Reachability::Witness(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

/// Breadth-first search from `from` to `to`. Successors are expanded in
/// sorted step order, so the witness is the lexicographically least among
/// the shortest ones.
pub fn reachable(
    p: &Protocol,
    from: &Configuration,
    to: &Configuration,
    limits: &SearchLimits<'_>,
) -> Reachability {
    if from == to {
        return Reachability::Witness(Trace::empty(from.clone()));
    }
    if from.size() != to.size() {
        return Reachability::NotReachable;
    }
    let pairs: Vec<Step> = p
        .rendezvous_pairs()
        .into_iter()
        .map(|(send, recv)| Step { send, recv })
        .collect();

    // node index -> (parent index, step used)
    let mut parent: Vec<(u32, Option<Step>)> = vec![(0, None)];
    let mut index: HashMap<Configuration, u32> = HashMap::new();
    let mut nodes: Vec<Configuration> = vec![from.clone()];
    index.insert(from.clone(), 0);
    let mut queue = VecDeque::from([0u32]);
    let mut expanded = 0usize;

    while let Some(u) = queue.pop_front() {
        expanded += 1;
        if expanded % 1024 == 0 && limits.expired() {
            return Reachability::BudgetExceeded;
        }
        let cur = nodes[u as usize].clone();
        for s in &pairs {
            let Some(next) = s.apply(&cur) else { continue };
            if index.contains_key(&next) {
                continue;
            }
            let id = nodes.len() as u32;
            parent.push((u, Some(*s)));
            if &next == to {
                return Reachability::Witness(extract(from, &parent, id));
            }
            if nodes.len() >= limits.node_cap {
                return Reachability::BudgetExceeded;
            }
            index.insert(next.clone(), id);
            nodes.push(next);
            queue.push_back(id);
        }
    }
    Reachability::NotReachable
}

fn extract(from: &Configuration, parent: &[(u32, Option<Step>)], mut id: u32) -> Trace {
    let mut steps = Vec::new();
    while let (pid, Some(s)) = parent[id as usize] {
        steps.push(s);
        id = pid;
    }
    steps.reverse();
    Trace {
        start: from.clone(),
        steps,
    }
}

/// Exact answer to `C_i^(n) ->* C_f^(n)` unless the budget runs out.
pub fn reachable_final(p: &Protocol, n: u32, limits: &SearchLimits<'_>) -> Reachability {
    reachable(p, &initial_config(p, n), &final_config(p, n), limits)
}

/// Per-population results for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTable {
    pub entries: Vec<Reachability>,
}

impl WitnessTable {
    pub fn answer(&self, n: u32) -> Option<Answer> {
        self.entries.get(n as usize).map(Reachability::answer)
    }

    pub fn answers(&self) -> Vec<Answer> {
        self.entries.iter().map(Reachability::answer).collect()
    }

    pub fn n_max(&self) -> u32 {
        self.entries.len().saturating_sub(1) as u32
    }

    pub fn witness(&self, n: u32) -> Option<&Trace> {
        self.entries.get(n as usize).and_then(Reachability::trace)
    }
}

pub fn witness_table(p: &Protocol, n_max: u32, limits: &SearchLimits<'_>) -> WitnessTable {
    WitnessTable {
        entries: (0..=n_max).map(|n| reachable_final(p, n, limits)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PumpError {
    #[error("pair moves require a symmetric protocol")]
    NotSymmetric,
    #[error("pair moves only apply to process states")]
    NotProcessState,
    #[error("no symmetric path between the requested states")]
    NoPath,
    #[error("source state holds {have} entities, {need} required")]
    NotEnoughEntities { have: u32, need: u32 },
}

/// Shortest path of symmetric process edges `(q, a, q')` from `from` to `to`,
/// ties broken by (letter, destination) order.
pub fn pair_path(p: &Protocol, from: StateId, to: StateId) -> Option<Vec<(StateId, LetterId, StateId)>> {
    if from == to {
        return Some(Vec::new());
    }
    let n = p.num_process_states();
    let sym: Vec<&Edge> = p
        .edges()
        .iter()
        .filter(|e| {
            e.action.polarity == Polarity::Send
                && p.role(e.src) == Role::Process
                && p.has_edge(&Edge {
                    action: crate::model::Action {
                        polarity: Polarity::Receive,
                        letter: e.action.letter,
                    },
                    ..**e
                })
        })
        .collect();
    let mut adj: Vec<Vec<(LetterId, StateId)>> = vec![Vec::new(); n];
    for e in sym {
        adj[e.src.index()].push((e.action.letter, e.dst));
    }
    for a in &mut adj {
        a.sort();
    }
    let mut prev: Vec<Option<(StateId, LetterId)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from.index()] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &(a, v) in &adj[u.index()] {
            if seen[v.index()] {
                continue;
            }
            seen[v.index()] = true;
            prev[v.index()] = Some((u, a));
            if v == to {
                let mut path = Vec::new();
                let mut cur = to;
                while let Some((u, a)) = prev[cur.index()] {
                    path.push((u, a, cur));
                    cur = u;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Moves `2 * pairs` entities from `from` to `to`, two at a time, along the
/// symmetric path given by [`pair_path`]. Each hop is one rendez-vous in which
/// both entities take the same edge.
pub fn move_pairs(
    p: &Protocol,
    c: &Configuration,
    from: StateId,
    to: StateId,
    pairs: u32,
) -> Result<(Vec<Step>, Configuration), PumpError> {
    if !classify(p).symmetric {
        return Err(PumpError::NotSymmetric);
    }
    if p.role(from) != Role::Process || p.role(to) != Role::Process {
        return Err(PumpError::NotProcessState);
    }
    if c.get(from) < 2 * pairs {
        return Err(PumpError::NotEnoughEntities {
            have: c.get(from),
            need: 2 * pairs,
        });
    }
    let path = pair_path(p, from, to).ok_or(PumpError::NoPath)?;
    let mut steps = Vec::new();
    let mut cur = c.clone();
    for _ in 0..pairs {
        for &(u, a, v) in &path {
            let step = Step {
                send: Edge {
                    src: u,
                    action: crate::model::Action {
                        polarity: Polarity::Send,
                        letter: a,
                    },
                    dst: v,
                },
                recv: Edge {
                    src: u,
                    action: crate::model::Action {
                        polarity: Polarity::Receive,
                        letter: a,
                    },
                    dst: v,
                },
            };
            cur = step.apply(&cur).expect("pair hop is enabled by construction");
            steps.push(step);
        }
    }
    Ok((steps, cur))
}

/// Brings `2 * pairs` entities from the initial process state to `target`.
pub fn pump_pairs(
    p: &Protocol,
    c: &Configuration,
    target: StateId,
    pairs: u32,
) -> Result<(Vec<Step>, Configuration), PumpError> {
    move_pairs(p, c, p.initial(), target, pairs)
}

/// Brings `2 * pairs` entities from `source` to the final process state.
pub fn drain_pairs(
    p: &Protocol,
    c: &Configuration,
    source: StateId,
    pairs: u32,
) -> Result<(Vec<Step>, Configuration), PumpError> {
    move_pairs(p, c, source, p.final_state(), pairs)
}
