//! Rendez-vous protocols: data model, validation, classification and the
//! structural transformations used by the decision procedures.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Index of a state in a [`Protocol`]. Process states come first, then
/// leader states, each group in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub(crate) u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a letter in the protocol alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LetterId(pub(crate) u32);

impl LetterId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Process,
    Leader,
}

/// `!a` is [`Polarity::Send`], `?a` is [`Polarity::Receive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Send,
    Receive,
}

impl Polarity {
    pub fn dual(self) -> Polarity {
        match self {
            Polarity::Send => Polarity::Receive,
            Polarity::Receive => Polarity::Send,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarity::Send => '!',
            Polarity::Receive => '?',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub polarity: Polarity,
    pub letter: LetterId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: StateId,
    pub action: Action,
    pub dst: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct StateInfo {
    name: String,
    role: Role,
}

/// Initial and final state of the leader.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeaderEnds {
    pub init: StateId,
    pub fin: StateId,
}

/// A validated rendez-vous protocol. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    states: Vec<StateInfo>,
    num_process: usize,
    letters: Vec<String>,
    init: StateId,
    fin: StateId,
    leader: Option<LeaderEnds>,
    edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid name `{name}`: names are non-empty tokens over [A-Za-z0-9_]")]
    InvalidName { name: String, origin: Option<usize> },
    #[error("duplicate declaration of `{name}`")]
    Duplicate { name: String, origin: Option<usize> },
    #[error("undeclared state `{name}`")]
    UndeclaredState { name: String, origin: Option<usize> },
    #[error("undeclared letter `{name}`")]
    UndeclaredLetter { name: String, origin: Option<usize> },
    #[error("edge {src} -> {dst} crosses the process/leader partition")]
    CrossPartition {
        src: String,
        dst: String,
        origin: Option<usize>,
    },
    #[error("`{name}` must be a {expected} state")]
    WrongRole {
        name: String,
        expected: &'static str,
        origin: Option<usize>,
    },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("leader states declared without leader initial/final states")]
    LeaderEndsMissing,
    #[error("leader initial/final states given but no leader states declared")]
    LeaderEndsWithoutLeader,
    #[error("operation requires a leaderless protocol")]
    NotLeaderless,
    #[error("initial and final process states coincide and have outgoing edges")]
    InitialIsFinalWithOutEdges,
    #[error("exponential family requires k >= 1")]
    ZeroFamilyParameter,
}

impl ModelError {
    /// Caller-supplied origin tag (a line number for the text parser).
    pub fn origin(&self) -> Option<usize> {
        match self {
            ModelError::InvalidName { origin, .. }
            | ModelError::Duplicate { origin, .. }
            | ModelError::UndeclaredState { origin, .. }
            | ModelError::UndeclaredLetter { origin, .. }
            | ModelError::CrossPartition { origin, .. }
            | ModelError::WrongRole { origin, .. } => *origin,
            _ => None,
        }
    }
}

pub fn is_valid_token(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl Protocol {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_process_states(&self) -> usize {
        self.num_process
    }

    pub fn num_leader_states(&self) -> usize {
        self.states.len() - self.num_process
    }

    pub fn process_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_process as u32).map(StateId)
    }

    pub fn leader_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (self.num_process as u32..self.states.len() as u32).map(StateId)
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn role(&self, q: StateId) -> Role {
        self.states[q.index()].role
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()].name
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s.name == name)
            .map(|i| StateId(i as u32))
    }

    pub fn letters(&self) -> impl Iterator<Item = LetterId> + '_ {
        (0..self.letters.len() as u32).map(LetterId)
    }

    pub fn num_letters(&self) -> usize {
        self.letters.len()
    }

    pub fn letter_name(&self, a: LetterId) -> &str {
        &self.letters[a.index()]
    }

    pub fn letter_by_name(&self, name: &str) -> Option<LetterId> {
        self.letters
            .iter()
            .position(|l| l == name)
            .map(|i| LetterId(i as u32))
    }

    pub fn initial(&self) -> StateId {
        self.init
    }

    pub fn final_state(&self) -> StateId {
        self.fin
    }

    pub fn leader(&self) -> Option<LeaderEnds> {
        self.leader
    }

    pub fn is_leaderless(&self) -> bool {
        self.leader.is_none()
    }

    /// Edges, sorted and without duplicates.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    /// All `(send, receive)` edge pairs sharing a letter, in sorted order.
    /// Every rendez-vous is an instance of one of these pairs.
    pub fn rendezvous_pairs(&self) -> Vec<(Edge, Edge)> {
        let mut out = Vec::new();
        for s in self.edges.iter().filter(|e| e.action.polarity == Polarity::Send) {
            for r in self
                .edges
                .iter()
                .filter(|e| e.action.polarity == Polarity::Receive)
            {
                if s.action.letter == r.action.letter {
                    out.push((*s, *r));
                }
            }
        }
        out
    }

    pub fn edge_to_string(&self, e: &Edge) -> String {
        format!(
            "({}, {}{}, {})",
            self.state_name(e.src),
            e.action.polarity.symbol(),
            self.letter_name(e.action.letter),
            self.state_name(e.dst)
        )
    }

    /// SHA-256 over a canonical encoding of the protocol structure.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        let mut put = |s: &str| {
            h.update((s.len() as u32).to_le_bytes());
            h.update(s.as_bytes());
        };
        put("rdv-protocol-v1");
        for q in self.states() {
            put(self.state_name(q));
            put(match self.role(q) {
                Role::Process => "P",
                Role::Leader => "L",
            });
        }
        put("|");
        for a in self.letters() {
            put(self.letter_name(a));
        }
        put("|");
        put(self.state_name(self.init));
        put(self.state_name(self.fin));
        if let Some(l) = self.leader {
            put(self.state_name(l.init));
            put(self.state_name(l.fin));
        }
        put("|");
        for e in &self.edges {
            put(self.state_name(e.src));
            put(if e.action.polarity == Polarity::Send { "!" } else { "?" });
            put(self.letter_name(e.action.letter));
            put(self.state_name(e.dst));
        }
        h.finalize().into()
    }

    pub fn digest_hex(&self) -> String {
        let mut s = String::with_capacity(64);
        for b in self.digest() {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    /// Rebuilds the protocol through a builder so that transformations can
    /// add states and edges by name.
    pub fn to_builder(&self) -> ProtocolBuilder {
        let mut b = ProtocolBuilder::new();
        b.alphabet(self.letters.iter().map(String::as_str));
        b.process_states(self.process_states().map(|q| self.state_name(q)));
        if let Some(l) = self.leader {
            b.leader_states(self.leader_states().map(|q| self.state_name(q)));
            b.initial(self.state_name(self.init), Some(self.state_name(l.init)));
            b.final_states(self.state_name(self.fin), Some(self.state_name(l.fin)));
        } else {
            b.initial(self.state_name(self.init), None);
            b.final_states(self.state_name(self.fin), None);
        }
        for e in &self.edges {
            b.edge(
                self.state_name(e.src),
                e.action.polarity,
                self.letter_name(e.action.letter),
                self.state_name(e.dst),
            );
        }
        b
    }

    /// Returns a name not yet used by any state, derived from `base`.
    pub fn fresh_state_name(&self, base: &str) -> String {
        let mut candidate = base.to_string();
        let mut i = 1;
        while self.state_by_name(&candidate).is_some() {
            candidate = format!("{base}{i}");
            i += 1;
        }
        candidate
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone)]
struct PendingEdge {
    src: String,
    polarity: Polarity,
    letter: String,
    dst: String,
    origin: Option<usize>,
}

/// Incremental, name-based construction of a [`Protocol`]. Validation happens
/// in [`ProtocolBuilder::build`]; errors carry the origin tag that was current
/// when the offending item was added.
#[derive(Debug, Clone, Default)]
pub struct ProtocolBuilder {
    letters: Vec<(String, Option<usize>)>,
    process: Vec<(String, Option<usize>)>,
    leader: Vec<(String, Option<usize>)>,
    init: Option<(String, Option<String>, Option<usize>)>,
    fin: Option<(String, Option<String>, Option<usize>)>,
    edges: Vec<PendingEdge>,
    origin: Option<usize>,
}

impl ProtocolBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tags every subsequently added item with `origin`.
    pub fn set_origin(&mut self, origin: usize) -> &mut Self {
        self.origin = Some(origin);
        self
    }

    pub fn alphabet<'s>(&mut self, letters: impl IntoIterator<Item = &'s str>) -> &mut Self {
        for l in letters {
            self.letters.push((l.to_string(), self.origin));
        }
        self
    }

    pub fn process_states<'s>(&mut self, names: impl IntoIterator<Item = &'s str>) -> &mut Self {
        for n in names {
            self.process.push((n.to_string(), self.origin));
        }
        self
    }

    pub fn leader_states<'s>(&mut self, names: impl IntoIterator<Item = &'s str>) -> &mut Self {
        for n in names {
            self.leader.push((n.to_string(), self.origin));
        }
        self
    }

    pub fn initial(&mut self, process: &str, leader: Option<&str>) -> &mut Self {
        self.init = Some((process.to_string(), leader.map(str::to_string), self.origin));
        self
    }

    pub fn final_states(&mut self, process: &str, leader: Option<&str>) -> &mut Self {
        self.fin = Some((process.to_string(), leader.map(str::to_string), self.origin));
        self
    }

    pub fn edge(&mut self, src: &str, polarity: Polarity, letter: &str, dst: &str) -> &mut Self {
        self.edges.push(PendingEdge {
            src: src.to_string(),
            polarity,
            letter: letter.to_string(),
            dst: dst.to_string(),
            origin: self.origin,
        });
        self
    }

    pub fn send(&mut self, src: &str, letter: &str, dst: &str) -> &mut Self {
        self.edge(src, Polarity::Send, letter, dst)
    }

    pub fn recv(&mut self, src: &str, letter: &str, dst: &str) -> &mut Self {
        self.edge(src, Polarity::Receive, letter, dst)
    }

    /// Symmetric edge: both `!letter` and `?letter` from `src` to `dst`.
    pub fn sym(&mut self, src: &str, letter: &str, dst: &str) -> &mut Self {
        self.send(src, letter, dst).recv(src, letter, dst)
    }

    pub fn build(&self) -> Result<Protocol, ModelError> {
        let mut letter_ids: BTreeMap<&str, LetterId> = BTreeMap::new();
        let mut letters = Vec::new();
        for (l, origin) in &self.letters {
            if !is_valid_token(l) {
                return Err(ModelError::InvalidName {
                    name: l.clone(),
                    origin: *origin,
                });
            }
            if letter_ids.insert(l, LetterId(letters.len() as u32)).is_some() {
                return Err(ModelError::Duplicate {
                    name: l.clone(),
                    origin: *origin,
                });
            }
            letters.push(l.clone());
        }

        let mut state_ids: BTreeMap<&str, StateId> = BTreeMap::new();
        let mut states = Vec::new();
        for ((n, origin), role) in self
            .process
            .iter()
            .map(|x| (x, Role::Process))
            .chain(self.leader.iter().map(|x| (x, Role::Leader)))
        {
            if !is_valid_token(n) {
                return Err(ModelError::InvalidName {
                    name: n.clone(),
                    origin: *origin,
                });
            }
            if state_ids.insert(n, StateId(states.len() as u32)).is_some() {
                return Err(ModelError::Duplicate {
                    name: n.clone(),
                    origin: *origin,
                });
            }
            states.push(StateInfo {
                name: n.clone(),
                role,
            });
        }
        if self.process.is_empty() {
            return Err(ModelError::Missing("process states"));
        }

        let lookup = |name: &str, origin: Option<usize>| {
            state_ids
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UndeclaredState {
                    name: name.to_string(),
                    origin,
                })
        };
        let expect_role = |id: StateId, name: &str, role: Role, origin: Option<usize>| {
            if states[id.index()].role == role {
                Ok(id)
            } else {
                Err(ModelError::WrongRole {
                    name: name.to_string(),
                    expected: if role == Role::Process { "process" } else { "leader" },
                    origin,
                })
            }
        };

        let (ip, il, iorigin) = self.init.as_ref().ok_or(ModelError::Missing("initial states"))?;
        let (fp, fl, forigin) = self.fin.as_ref().ok_or(ModelError::Missing("final states"))?;
        let init = expect_role(lookup(ip, *iorigin)?, ip, Role::Process, *iorigin)?;
        let fin = expect_role(lookup(fp, *forigin)?, fp, Role::Process, *forigin)?;
        let has_leader = !self.leader.is_empty();
        let leader = match (il, fl) {
            (Some(il), Some(fl)) => {
                if !has_leader {
                    return Err(ModelError::LeaderEndsWithoutLeader);
                }
                Some(LeaderEnds {
                    init: expect_role(lookup(il, *iorigin)?, il, Role::Leader, *iorigin)?,
                    fin: expect_role(lookup(fl, *forigin)?, fl, Role::Leader, *forigin)?,
                })
            }
            (None, None) if !has_leader => None,
            (None, None) => return Err(ModelError::LeaderEndsMissing),
            _ if has_leader => return Err(ModelError::LeaderEndsMissing),
            _ => return Err(ModelError::LeaderEndsWithoutLeader),
        };

        let mut edges = BTreeSet::new();
        for pe in &self.edges {
            let src = lookup(&pe.src, pe.origin)?;
            let dst = lookup(&pe.dst, pe.origin)?;
            let letter =
                letter_ids
                    .get(pe.letter.as_str())
                    .copied()
                    .ok_or_else(|| ModelError::UndeclaredLetter {
                        name: pe.letter.clone(),
                        origin: pe.origin,
                    })?;
            if states[src.index()].role != states[dst.index()].role {
                return Err(ModelError::CrossPartition {
                    src: pe.src.clone(),
                    dst: pe.dst.clone(),
                    origin: pe.origin,
                });
            }
            edges.insert(Edge {
                src,
                action: Action {
                    polarity: pe.polarity,
                    letter,
                },
                dst,
            });
        }

        Ok(Protocol {
            num_process: self.process.len(),
            states,
            letters,
            init,
            fin,
            leader,
            edges: edges.into_iter().collect(),
        })
    }
}

/// Structural flags of a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// `(q,!a,q')` is an edge iff `(q,?a,q')` is.
    pub symmetric: bool,
    pub leaderless: bool,
    /// Every process state lies on a path from the initial to the final
    /// process state.
    pub connectivity_ok: bool,
    /// A leader whose initial and final state coincide. Accepted, but worth
    /// reporting.
    pub leader_init_is_final: bool,
}

pub fn classify(p: &Protocol) -> Classification {
    let symmetric = p.edges.iter().all(|e| {
        p.has_edge(&Edge {
            action: Action {
                polarity: e.action.polarity.dual(),
                letter: e.action.letter,
            },
            ..*e
        })
    });
    Classification {
        symmetric,
        leaderless: p.is_leaderless(),
        connectivity_ok: disconnected_process_states(p).is_empty(),
        leader_init_is_final: p.leader.is_some_and(|l| l.init == l.fin),
    }
}

/// Process states that are not on any path from the initial to the final
/// process state (edge labels ignored).
pub fn disconnected_process_states(p: &Protocol) -> Vec<StateId> {
    let n = p.num_process;
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for e in p.edges.iter().filter(|e| e.src.index() < n) {
        fwd[e.src.index()].push(e.dst.index());
        bwd[e.dst.index()].push(e.src.index());
    }
    let from_init = graph_reach(&fwd, p.init.index());
    let to_final = graph_reach(&bwd, p.fin.index());
    (0..n)
        .filter(|&i| !(from_init[i] && to_final[i]))
        .map(|i| StateId(i as u32))
        .collect()
}

fn graph_reach(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Moves the final process state to a fresh copy without outgoing edges.
///
/// Every edge into `q_f` gets a parallel edge into the fresh state `q_f'`,
/// which becomes the final state; `q_f` keeps its outgoing edges. Protocols
/// whose final state already has no outgoing edge are returned unchanged.
///
/// When `q_i = q_f` and that state has outgoing edges the transformation would
/// strand entities that never move, so it is rejected.
pub fn eliminate_final_outgoing(p: &Protocol) -> Result<Protocol, ModelError> {
    if !p.is_leaderless() {
        return Err(ModelError::NotLeaderless);
    }
    if !p.edges.iter().any(|e| e.src == p.fin) {
        return Ok(p.clone());
    }
    if p.init == p.fin {
        return Err(ModelError::InitialIsFinalWithOutEdges);
    }
    let old = p.state_name(p.fin);
    let fresh = p.fresh_state_name(&format!("{old}_fin"));
    let mut b = ProtocolBuilder::new();
    b.alphabet(p.letters.iter().map(String::as_str));
    b.process_states(p.process_states().map(|q| p.state_name(q)).chain([fresh.as_str()]));
    b.initial(p.state_name(p.init), None);
    b.final_states(&fresh, None);
    for e in &p.edges {
        let (s, a, d) = (
            p.state_name(e.src),
            p.letter_name(e.action.letter),
            p.state_name(e.dst),
        );
        b.edge(s, e.action.polarity, a, d);
        if e.dst == p.fin {
            b.edge(s, e.action.polarity, a, &fresh);
        }
    }
    b.build()
}

/// The leaderless family whose minimal completing population grows
/// exponentially in `k`.
///
/// States `q_i, q_1..q_k, q_f`; letters `1..k, a`. A process reaches `q_1`
/// through a symmetric rendez-vous on `1`; reaching `q_j` needs a partner in
/// `q_{j-1}` sending `!j` while the receiver jumps from `q_i`. Processes in
/// `q_k` then release the rest to `q_f` on `a`.
pub fn gen_exp_family(k: usize) -> Result<Protocol, ModelError> {
    if k == 0 {
        return Err(ModelError::ZeroFamilyParameter);
    }
    let q = |j: usize| format!("q_{j}");
    let mut names = vec![String::from("q_i")];
    names.extend((1..=k).map(q));
    names.push(String::from("q_f"));
    let mut letters: Vec<String> = (1..=k).map(|j| j.to_string()).collect();
    letters.push(String::from("a"));

    let mut b = ProtocolBuilder::new();
    b.alphabet(letters.iter().map(String::as_str));
    b.process_states(names.iter().map(String::as_str));
    b.initial("q_i", None).final_states("q_f", None);
    b.send("q_i", "1", &q(1)).recv("q_i", "1", &q(1));
    for j in 2..=k {
        let l = j.to_string();
        b.send(&q(j - 1), &l, &q(j)).recv("q_i", &l, &q(j));
    }
    b.send(&q(k), "a", &q(k))
        .send(&q(k), "a", "q_f")
        .recv("q_i", "a", "q_f");
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn fig1_shape() {
        let p = corpus::fig1();
        assert_eq!(p.num_process_states(), 3);
        assert_eq!(p.num_leader_states(), 3);
        assert_eq!(p.num_letters(), 4);
        assert_eq!(p.edges().len(), 9);
        let c = classify(&p);
        assert!(!c.symmetric && !c.leaderless && c.connectivity_ok);
        assert!(!c.leader_init_is_final);
    }

    #[test]
    fn fig6_is_leaderless_asymmetric() {
        let c = classify(&corpus::fig6());
        assert!(!c.symmetric);
        assert!(c.leaderless);
        assert!(c.connectivity_ok);
    }

    #[test]
    fn sym_lines_make_symmetric_protocols() {
        let p = ProtocolBuilder::new()
            .alphabet(["a", "b"])
            .process_states(["q_i", "q", "q_f"])
            .initial("q_i", None)
            .final_states("q_f", None)
            .sym("q_i", "a", "q")
            .sym("q", "b", "q_f")
            .build()
            .unwrap();
        assert!(classify(&p).symmetric);
        assert_eq!(p.edges().len(), 4);
    }

    #[test]
    fn degenerate_single_state_protocol() {
        let p = ProtocolBuilder::new()
            .process_states(["q"])
            .initial("q", None)
            .final_states("q", None)
            .build()
            .unwrap();
        assert!(p.is_leaderless());
        assert!(p.edges().is_empty());
        let c = classify(&p);
        assert!(c.connectivity_ok && c.symmetric);
    }

    #[test]
    fn cross_partition_edge_rejected() {
        let err = ProtocolBuilder::new()
            .alphabet(["a"])
            .process_states(["q_i", "q_f"])
            .leader_states(["qLi"])
            .initial("q_i", Some("qLi"))
            .final_states("q_f", Some("qLi"))
            .set_origin(7)
            .send("q_i", "a", "qLi")
            .build()
            .unwrap_err();
        assert!(matches!(err, ModelError::CrossPartition { .. }));
        assert_eq!(err.origin(), Some(7));
    }

    #[test]
    fn undeclared_and_duplicate_names() {
        let base = || {
            let mut b = ProtocolBuilder::new();
            b.alphabet(["a"])
                .process_states(["q_i", "q_f"])
                .initial("q_i", None)
                .final_states("q_f", None);
            b
        };
        let e = base().send("q_i", "z", "q_f").build().unwrap_err();
        assert!(matches!(e, ModelError::UndeclaredLetter { .. }));
        let e = base().send("q_i", "a", "nowhere").build().unwrap_err();
        assert!(matches!(e, ModelError::UndeclaredState { .. }));
        let e = base().alphabet(["a"]).build().unwrap_err();
        assert!(matches!(e, ModelError::Duplicate { .. }));
        let e = base().process_states(["q_f"]).build().unwrap_err();
        assert!(matches!(e, ModelError::Duplicate { .. }));
        let e = base().alphabet(["b-c"]).build().unwrap_err();
        assert!(matches!(e, ModelError::InvalidName { .. }));
    }

    #[test]
    fn leader_ends_must_be_consistent() {
        let e = ProtocolBuilder::new()
            .process_states(["q"])
            .leader_states(["l"])
            .initial("q", None)
            .final_states("q", None)
            .build()
            .unwrap_err();
        assert_eq!(e, ModelError::LeaderEndsMissing);
        let e = ProtocolBuilder::new()
            .process_states(["q"])
            .initial("q", Some("l"))
            .final_states("q", Some("l"))
            .build()
            .unwrap_err();
        assert_eq!(e, ModelError::LeaderEndsWithoutLeader);
        let e = ProtocolBuilder::new()
            .process_states(["q"])
            .leader_states(["l"])
            .initial("l", Some("l"))
            .final_states("q", Some("l"))
            .build()
            .unwrap_err();
        assert!(matches!(e, ModelError::WrongRole { .. }));
    }

    #[test]
    fn connectivity_failure_is_reported_not_rejected() {
        let p = ProtocolBuilder::new()
            .alphabet(["a"])
            .process_states(["q_i", "dead", "q_f"])
            .initial("q_i", None)
            .final_states("q_f", None)
            .sym("q_i", "a", "q_f")
            .sym("q_i", "a", "dead")
            .build()
            .unwrap();
        assert!(!classify(&p).connectivity_ok);
        assert_eq!(disconnected_process_states(&p), vec![StateId(1)]);
    }

    #[test]
    fn symmetric_flag_ignores_edge_order() {
        let mut b1 = ProtocolBuilder::new();
        b1.alphabet(["a"])
            .process_states(["q_i", "q_f"])
            .initial("q_i", None)
            .final_states("q_f", None);
        let mut b2 = b1.clone();
        b1.send("q_i", "a", "q_f").recv("q_i", "a", "q_f");
        b2.recv("q_i", "a", "q_f").send("q_i", "a", "q_f");
        let (p1, p2) = (b1.build().unwrap(), b2.build().unwrap());
        assert_eq!(p1, p2);
        assert!(classify(&p1).symmetric && classify(&p2).symmetric);
    }

    #[test]
    fn eliminate_final_outgoing_shapes() {
        let p6 = corpus::fig6();
        assert_eq!(eliminate_final_outgoing(&p6).unwrap(), p6);

        let p = ProtocolBuilder::new()
            .alphabet(["a"])
            .process_states(["q_i", "q_f"])
            .initial("q_i", None)
            .final_states("q_f", None)
            .send("q_f", "a", "q_i")
            .recv("q_i", "a", "q_f")
            .build()
            .unwrap();
        let p2 = eliminate_final_outgoing(&p).unwrap();
        let fin = p2.final_state();
        assert_eq!(p2.state_name(fin), "q_f_fin");
        assert!(p2.edges().iter().all(|e| e.src != fin));
        let into: Vec<_> = p2.edges().iter().filter(|e| e.dst == fin).collect();
        assert_eq!(into.len(), 1);
        assert_eq!(p2.edge_to_string(into[0]), "(q_i, ?a, q_f_fin)");
        assert_eq!(p2.edges().len(), 3);
    }

    #[test]
    fn eliminate_final_outgoing_preconditions() {
        assert_eq!(
            eliminate_final_outgoing(&corpus::fig1()),
            Err(ModelError::NotLeaderless)
        );
        let p = ProtocolBuilder::new()
            .alphabet(["a"])
            .process_states(["q", "r"])
            .initial("q", None)
            .final_states("q", None)
            .sym("q", "a", "r")
            .build()
            .unwrap();
        assert_eq!(
            eliminate_final_outgoing(&p),
            Err(ModelError::InitialIsFinalWithOutEdges)
        );
    }

    #[test]
    fn exp_family_sizes() {
        assert_eq!(gen_exp_family(0), Err(ModelError::ZeroFamilyParameter));
        let p1 = gen_exp_family(1).unwrap();
        assert_eq!(
            (p1.num_process_states(), p1.num_letters(), p1.edges().len()),
            (3, 2, 5)
        );
        let p2 = gen_exp_family(2).unwrap();
        assert_eq!(
            (p2.num_process_states(), p2.num_letters(), p2.edges().len()),
            (4, 3, 7)
        );
        assert!(p2.is_leaderless());
        assert!(classify(&p2).connectivity_ok);
    }

    #[test]
    fn digest_is_structural() {
        assert_eq!(corpus::fig1().digest(), corpus::fig1().digest());
        assert_ne!(corpus::fig1().digest(), corpus::fig1_variant().digest());
        assert_eq!(corpus::fig6().digest_hex().len(), 64);
    }

    #[test]
    fn to_builder_round_trips() {
        for p in [corpus::fig1(), corpus::fig6(), gen_exp_family(3).unwrap()] {
            assert_eq!(p.to_builder().build().unwrap(), p);
        }
    }
}
