//! Parity abstraction for symmetric protocols: remember only the leader
//! state and whether each process state holds an even or odd number of
//! processes.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use crate::model::{classify, disconnected_process_states, Action, Edge, LetterId, Polarity, Protocol, Role, StateId};
use crate::semantics::{drain_pairs, final_config, initial_config, pump_pairs, Configuration, PumpError, Step, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    E,
    O,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::E => Parity::O,
            Parity::O => Parity::E,
        }
    }

    pub fn of(n: u32) -> Parity {
        if n % 2 == 0 {
            Parity::E
        } else {
            Parity::O
        }
    }
}

/// Which family of populations a check is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParityClass {
    Even,
    Odd,
}

impl ParityClass {
    pub fn of(n: u32) -> ParityClass {
        if n % 2 == 0 {
            ParityClass::Even
        } else {
            ParityClass::Odd
        }
    }
}

/// Abstract configuration. Bit `i` of `odd` is set when process state `i`
/// holds an odd number of processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EOConfig {
    pub leader: Option<StateId>,
    pub odd: u64,
}

impl EOConfig {
    pub fn parity(&self, q: StateId) -> Parity {
        if self.odd >> q.index() & 1 == 1 {
            Parity::O
        } else {
            Parity::E
        }
    }

    /// Abstraction of a concrete configuration. The leader component is the
    /// (unique) occupied leader state.
    pub fn of_config(p: &Protocol, c: &Configuration) -> EOConfig {
        let mut odd = 0u64;
        for q in p.process_states() {
            if c.get(q) % 2 == 1 {
                odd |= 1 << q.index();
            }
        }
        EOConfig {
            leader: p.leader_states().find(|&q| c.get(q) > 0),
            odd,
        }
    }

    /// Flips `q` and `q'` unless they coincide.
    fn moved(mut self, e: &SymEdge) -> EOConfig {
        if e.src != e.dst {
            self.odd ^= (1 << e.src.index()) | (1 << e.dst.index());
        }
        self
    }
}

/// A symmetric edge `(q, a, q')`: both `(q, !a, q')` and `(q, ?a, q')` exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymEdge {
    pub src: StateId,
    pub letter: LetterId,
    pub dst: StateId,
}

impl SymEdge {
    pub fn from_edge(e: &Edge) -> SymEdge {
        SymEdge {
            src: e.src,
            letter: e.action.letter,
            dst: e.dst,
        }
    }

    pub fn with_polarity(&self, polarity: Polarity) -> Edge {
        Edge {
            src: self.src,
            action: Action {
                polarity,
                letter: self.letter,
            },
            dst: self.dst,
        }
    }
}

/// Symmetric edges of `p`, sorted.
pub fn sym_edges(p: &Protocol) -> Vec<SymEdge> {
    p.edges()
        .iter()
        .filter(|e| e.action.polarity == Polarity::Send)
        .map(SymEdge::from_edge)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AbstractStep {
    pub e: SymEdge,
    pub e_prime: SymEdge,
}

/// A path of abstract steps together with every visited configuration
/// (`configs.len() == steps.len() + 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractPath {
    pub steps: Vec<AbstractStep>,
    pub configs: Vec<EOConfig>,
}

impl AbstractPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn start(&self) -> EOConfig {
        self.configs[0]
    }

    pub fn end(&self) -> EOConfig {
        *self.configs.last().expect("paths have a start")
    }

    /// Whether every snapshot follows from the previous by its step.
    pub fn is_consistent(&self, p: &Protocol) -> bool {
        self.configs.len() == self.steps.len() + 1
            && self.steps.iter().enumerate().all(|(i, s)| {
                eo_step_unchecked(p, &self.configs[i], &s.e, &s.e_prime) == Some(self.configs[i + 1])
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvenOddError {
    #[error("protocol is not symmetric")]
    NotSymmetric,
    #[error("protocol has process states off every path from the initial to the final state")]
    Disconnected(Vec<StateId>),
    #[error("protocol has a leader")]
    NotLeaderless,
    #[error("more than 64 process states")]
    TooManyStates,
    #[error("no abstract witness for the {0:?} class")]
    NoWitness(ParityClass),
    #[error("abstract path does not connect the {0:?} endpoints")]
    PathMismatch(ParityClass),
    #[error(transparent)]
    Pump(#[from] PumpError),
}

fn check_symmetric(p: &Protocol) -> Result<(), EvenOddError> {
    if p.num_process_states() > 64 {
        return Err(EvenOddError::TooManyStates);
    }
    if !classify(p).symmetric {
        return Err(EvenOddError::NotSymmetric);
    }
    Ok(())
}

fn check_connected(p: &Protocol) -> Result<(), EvenOddError> {
    let off = disconnected_process_states(p);
    if off.is_empty() {
        Ok(())
    } else {
        Err(EvenOddError::Disconnected(off))
    }
}

fn eo_step_unchecked(p: &Protocol, g: &EOConfig, e: &SymEdge, e2: &SymEdge) -> Option<EOConfig> {
    if e.letter != e2.letter || p.role(e2.src) != Role::Process {
        return None;
    }
    match p.role(e.src) {
        Role::Leader => {
            if g.leader != Some(e.src) {
                return None;
            }
            let mut next = g.moved(&e2);
            next.leader = Some(e.dst);
            Some(next)
        }
        Role::Process => Some(g.moved(e).moved(&e2)),
    }
}

/// One abstract step with edges `e` and `e'`: a leader edge plus a process
/// edge moves the leader and flips the process edge's endpoints; two process
/// edges flip both edges' endpoints in turn (so a shared endpoint flips
/// twice). `None` when the letters differ, the leader is elsewhere, or the
/// edges are not symmetric edges of `p`.
pub fn eo_step(p: &Protocol, g: &EOConfig, e: &SymEdge, e_prime: &SymEdge) -> Result<Option<EOConfig>, EvenOddError> {
    check_symmetric(p)?;
    let known = |s: &SymEdge| p.has_edge(&s.with_polarity(Polarity::Send));
    if !known(e) || !known(e_prime) {
        return Ok(None);
    }
    Ok(eo_step_unchecked(p, g, e, e_prime))
}

/// All abstract successors of `g`, in a fixed order.
fn successors(p: &Protocol, edges: &[SymEdge], g: &EOConfig) -> Vec<(AbstractStep, EOConfig)> {
    let mut out = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        match p.role(e.src) {
            Role::Leader => {
                if g.leader != Some(e.src) {
                    continue;
                }
                for e2 in edges {
                    if e2.letter == e.letter && p.role(e2.src) == Role::Process {
                        let mut next = g.moved(e2);
                        next.leader = Some(e.dst);
                        out.push((AbstractStep { e: *e, e_prime: *e2 }, next));
                    }
                }
            }
            Role::Process => {
                // The result is symmetric in (e, e'), so e <= e' suffices.
                for e2 in &edges[i..] {
                    if e2.letter == e.letter && p.role(e2.src) == Role::Process {
                        out.push((AbstractStep { e: *e, e_prime: *e2 }, g.moved(e).moved(e2)));
                    }
                }
            }
        }
    }
    out
}

/// Upper bound on the number of abstract configurations.
pub fn abstract_space_bound(p: &Protocol) -> u128 {
    (p.num_leader_states().max(1) as u128) << p.num_process_states().min(127)
}

/// Shortest abstract path from `from` to `to` (breadth-first).
pub fn eo_reach(p: &Protocol, from: &EOConfig, to: &EOConfig) -> Result<Option<AbstractPath>, EvenOddError> {
    check_symmetric(p)?;
    let edges = sym_edges(p);
    let mut seen: HashMap<EOConfig, (usize, Option<AbstractStep>)> = HashMap::new();
    let mut order = vec![*from];
    seen.insert(*from, (0, None));
    let mut queue = VecDeque::from([0usize]);
    let mut found = (from == to).then_some(0usize);
    while found.is_none() {
        let Some(u) = queue.pop_front() else { break };
        let g = order[u];
        for (step, next) in successors(p, &edges, &g) {
            if seen.contains_key(&next) {
                continue;
            }
            seen.insert(next, (u, Some(step)));
            order.push(next);
            if &next == to {
                found = Some(order.len() - 1);
                break;
            }
            queue.push_back(order.len() - 1);
        }
    }
    assert!(
        order.len() as u128 <= abstract_space_bound(p),
        "abstract search exceeded |Q_L| * 2^|Q_P|"
    );
    let Some(mut i) = found else { return Ok(None) };
    let mut steps = Vec::new();
    let mut configs = vec![order[i]];
    while let (parent, Some(step)) = seen[&order[i]] {
        steps.push(step);
        i = parent;
        configs.push(order[i]);
    }
    steps.reverse();
    configs.reverse();
    Ok(Some(AbstractPath { steps, configs }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoints {
    pub init_even: EOConfig,
    pub fin_even: EOConfig,
    pub init_odd: EOConfig,
    pub fin_odd: EOConfig,
}

impl Endpoints {
    pub fn for_class(&self, class: ParityClass) -> (EOConfig, EOConfig) {
        match class {
            ParityClass::Even => (self.init_even, self.fin_even),
            ParityClass::Odd => (self.init_odd, self.fin_odd),
        }
    }
}

/// All-even configurations, and the ones with a single odd count in the
/// initial (resp. final) process state; the leader sits in its initial
/// (resp. final) state.
pub fn abstract_endpoints(p: &Protocol) -> Endpoints {
    let li = p.leader().map(|l| l.init);
    let lf = p.leader().map(|l| l.fin);
    Endpoints {
        init_even: EOConfig { leader: li, odd: 0 },
        fin_even: EOConfig { leader: lf, odd: 0 },
        init_odd: EOConfig {
            leader: li,
            odd: 1 << p.initial().index(),
        },
        fin_odd: EOConfig {
            leader: lf,
            odd: 1 << p.final_state().index(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetricVerdict {
    /// Abstract witnesses for both classes. For leaderless protocols the
    /// even class is trivial and its path is empty.
    HasCutoff { even: AbstractPath, odd: AbstractPath },
    NoCutoff { failed: ParityClass },
}

/// Exact cut-off decision for symmetric protocols whose process states all
/// lie between the initial and final state.
pub fn decide_symmetric_cop(p: &Protocol) -> Result<SymmetricVerdict, EvenOddError> {
    check_symmetric(p)?;
    check_connected(p)?;
    let ends = abstract_endpoints(p);
    let mut paths = Vec::new();
    for class in [ParityClass::Even, ParityClass::Odd] {
        let (a, b) = ends.for_class(class);
        match eo_reach(p, &a, &b)? {
            Some(path) => paths.push(path),
            None => return Ok(SymmetricVerdict::NoCutoff { failed: class }),
        }
    }
    let odd = paths.pop().expect("two paths");
    let even = paths.pop().expect("two paths");
    Ok(SymmetricVerdict::HasCutoff { even, odd })
}

/// Shortest odd-class abstract witness of a leaderless symmetric protocol.
/// Such a witness, when one exists, has at most `|E|^2` steps; exceeding
/// that is an internal error.
pub fn short_witness(p: &Protocol) -> Result<AbstractPath, EvenOddError> {
    check_symmetric(p)?;
    if !p.is_leaderless() {
        return Err(EvenOddError::NotLeaderless);
    }
    let ends = abstract_endpoints(p);
    let path = eo_reach(p, &ends.init_odd, &ends.fin_odd)?.ok_or(EvenOddError::NoWitness(ParityClass::Odd))?;
    let e = p.edges().len();
    assert!(path.len() <= e * e, "abstract witness of length {} exceeds |E|^2 = {}", path.len(), e * e);
    Ok(path)
}

fn concrete_step(step: &AbstractStep) -> Step {
    Step {
        send: step.e.with_polarity(Polarity::Send),
        recv: step.e_prime.with_polarity(Polarity::Receive),
    }
}

/// Turns an abstract witness into a concrete one: start with the smallest
/// population of the class (2 or 1), replay the abstract steps, and whenever
/// a step lacks processes in a source state add a pair of processes to the
/// population and walk them there from the initial state. At the end, walk
/// every remaining pair to the final state. Returns the resulting
/// population and a replayable trace.
pub fn concretize(p: &Protocol, path: &AbstractPath, class: ParityClass) -> Result<(u32, Trace), EvenOddError> {
    check_symmetric(p)?;
    let ends = abstract_endpoints(p);
    let (a, b) = ends.for_class(class);
    if path.start() != a || path.end() != b || !path.is_consistent(p) {
        return Err(EvenOddError::PathMismatch(class));
    }
    let mut n: u32 = match class {
        ParityClass::Even => 2,
        ParityClass::Odd => 1,
    };
    let mut cur = initial_config(p, n);
    let mut steps: Vec<Step> = Vec::new();
    for (i, s) in path.steps.iter().enumerate() {
        let mut need: Vec<(StateId, u32)> = Vec::new();
        for e in [&s.e, &s.e_prime] {
            if p.role(e.src) != Role::Process {
                continue;
            }
            match need.iter_mut().find(|(q, _)| *q == e.src) {
                Some((_, k)) => *k += 1,
                None => need.push((e.src, 1)),
            }
        }
        for (q, k) in need {
            while cur.get(q) < k {
                n += 2;
                cur.add(p.initial(), 2);
                let (pump, next) = pump_pairs(p, &cur, q, 1)?;
                steps.extend(pump);
                cur = next;
            }
        }
        let step = concrete_step(s);
        cur = step.apply(&cur).expect("sources populated above");
        steps.push(step);
        debug_assert_eq!(EOConfig::of_config(p, &cur), path.configs[i + 1]);
    }
    for q in p.process_states() {
        if q == p.final_state() {
            continue;
        }
        let c = cur.get(q);
        debug_assert_eq!(c % 2, 0);
        if c > 0 {
            let (drain, next) = drain_pairs(p, &cur, q, c / 2)?;
            steps.extend(drain);
            cur = next;
        }
    }
    let trace = Trace {
        start: initial_config(p, n),
        steps,
    };
    debug_assert_eq!(cur, final_config(p, n));
    Ok((n, trace))
}
