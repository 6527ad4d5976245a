//! Translations between protocols and nets, and the net transformations
//! used by the leaderless reduction.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::net::{Marking, NetError, PetriNet, PetriNetBuilder, PlaceId, TransitionId};
use crate::model::{Protocol, ProtocolBuilder};
use crate::semantics::{initial_config, Configuration, Step, Trace};

/// A protocol encoded as a net: one place per state (same index and name),
/// a generator `t_i` for `q_i`, an optional sink `t_Lf` for the final
/// leader state, and one transition per rendez-vous pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedNet {
    pub net: PetriNet,
    pub m0: Marking,
    pub p_f: PlaceId,
    pub t_i: TransitionId,
    pub t_lf: Option<TransitionId>,
    /// Rendez-vous realised by each transition (`None` for `t_i`, `t_Lf`).
    pub steps: Vec<Option<Step>>,
}

impl EncodedNet {
    /// `n` tokens in the final process place, nothing else.
    pub fn final_marking(&self, n: u32) -> Marking {
        Marking::single(self.net.num_places(), self.p_f, n)
    }

    pub fn marking_of(&self, c: &Configuration) -> Marking {
        Marking::from_counts(c.counts().to_vec())
    }

    /// Concrete execution behind a firing sequence from `m0`: the `t_i`
    /// firings fix the population and can be moved to the front, `t_Lf` is
    /// dropped. `None` if the sequence does not fire from `m0`.
    pub fn to_trace(&self, p: &Protocol, seq: &[TransitionId]) -> Option<Trace> {
        self.net.fire_sequence(&self.m0, seq)?;
        let n = seq.iter().filter(|&&t| t == self.t_i).count() as u32;
        Some(Trace {
            start: initial_config(p, n),
            steps: seq.iter().filter_map(|t| self.steps[t.index()]).collect(),
        })
    }
}

pub fn rdv_transition_name(p: &Protocol, s: &Step) -> String {
    format!(
        "rdv:{}:{}>{}:{}>{}",
        p.letter_name(s.letter()),
        p.state_name(s.send.src),
        p.state_name(s.send.dst),
        p.state_name(s.recv.src),
        p.state_name(s.recv.dst)
    )
}

pub fn protocol_to_net(p: &Protocol) -> EncodedNet {
    let mut b = PetriNetBuilder::new();
    b.places(p.states().map(|q| p.state_name(q)));
    let qi = p.state_name(p.initial());
    b.transition("t_i", &[], &[(qi, 1)]);
    let mut steps = alloc::vec![None];
    if let Some(l) = p.leader() {
        b.transition("t_Lf", &[(p.state_name(l.fin), 1)], &[]);
        steps.push(None);
    }
    for (send, recv) in p.rendezvous_pairs() {
        let s = Step { send, recv };
        b.transition(
            &rdv_transition_name(p, &s),
            &[(p.state_name(send.src), 1), (p.state_name(recv.src), 1)],
            &[(p.state_name(send.dst), 1), (p.state_name(recv.dst), 1)],
        );
        steps.push(Some(s));
    }
    let net = b.build().expect("state names are valid place names");
    let mut m0 = net.zero_marking();
    if let Some(l) = p.leader() {
        m0.set(PlaceId(l.init.0), 1);
    }
    EncodedNet {
        m0,
        p_f: PlaceId(p.final_state().0),
        t_i: TransitionId(0),
        t_lf: p.leader().map(|_| TransitionId(1)),
        steps,
        net,
    }
}

/// Valid, unused protocol token derived from `base`.
fn token(base: &str, used: &mut BTreeSet<String>) -> String {
    let clean: String = base
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    let name = super::net::fresh(&clean, |n| used.contains(n));
    used.insert(name.clone());
    name
}

/// Protocol whose processes simulate the tokens of `net`: a process is
/// recruited into a reserve state, the leader assigns reserve processes to
/// places (`pr_p`) and consumes them (`co_p`) transition by transition, and
/// finishes by consuming a token of `p_f`. Completions exist for every large
/// enough population iff one token in `p_f` is reachable from one token in
/// `p_i`.
pub fn net_to_protocol(net: &PetriNet, p_i: PlaceId, p_f: PlaceId) -> Result<Protocol, NetError> {
    if p_i == p_f {
        return Err(NetError::SamePlace);
    }
    let mut used = BTreeSet::new();
    let qi = token("q_i", &mut used);
    let qf = token("q_f", &mut used);
    let r = token("R", &mut used);
    let place_state: Vec<String> = net.places().map(|p| token(net.place_name(p), &mut used)).collect();
    let ql_i = token("qLi", &mut used);
    let ql_s = token("qLs", &mut used);
    let ql_f = token("qLf", &mut used);

    let mut letters_used = BTreeSet::new();
    let a = token("a", &mut letters_used);
    let bl = token("b", &mut letters_used);
    let co: Vec<String> = net
        .places()
        .map(|p| token(&format!("co_{}", net.place_name(p)), &mut letters_used))
        .collect();
    let pr: Vec<String> = net
        .places()
        .map(|p| token(&format!("pr_{}", net.place_name(p)), &mut letters_used))
        .collect();

    let mut chain_states = Vec::new();
    let mut chain_edges: Vec<(String, String, String)> = Vec::new();
    for t in net.transitions() {
        let mut word = Vec::new();
        for (p, k) in net.pre(t).support() {
            word.extend(core::iter::repeat(co[p.index()].clone()).take(k as usize));
        }
        for (p, k) in net.post(t).support() {
            word.extend(core::iter::repeat(pr[p.index()].clone()).take(k as usize));
        }
        if word.is_empty() {
            continue;
        }
        let mut cur = ql_s.clone();
        for (j, letter) in word.iter().enumerate() {
            let next = if j + 1 == word.len() {
                ql_s.clone()
            } else {
                let s = token(&format!("qL_{}_{}", net.transition_name(t), j + 1), &mut used);
                chain_states.push(s.clone());
                s
            };
            chain_edges.push((cur, letter.clone(), next.clone()));
            cur = next;
        }
    }

    let mut b = ProtocolBuilder::new();
    b.alphabet([a.as_str(), bl.as_str()])
        .alphabet(co.iter().map(String::as_str))
        .alphabet(pr.iter().map(String::as_str))
        .process_states([qi.as_str(), qf.as_str(), r.as_str()])
        .process_states(place_state.iter().map(String::as_str))
        .leader_states([ql_i.as_str(), ql_s.as_str(), ql_f.as_str()])
        .leader_states(chain_states.iter().map(String::as_str))
        .initial(&qi, Some(&ql_i))
        .final_states(&qf, Some(&ql_f))
        .recv(&qi, &a, &r)
        .send(&ql_i, &a, &ql_i);
    for p in net.places() {
        let i = p.index();
        b.recv(&r, &pr[i], &place_state[i]);
        b.recv(&place_state[i], &co[i], &qf);
    }
    b.send(&ql_i, &pr[p_i.index()], &ql_s);
    for (src, letter, dst) in &chain_edges {
        b.send(src, letter, dst);
    }
    b.recv(&qi, &bl, &qf)
        .send(&ql_s, &bl, &ql_s)
        .send(&ql_s, &co[p_f.index()], &ql_f);
    Ok(b.build().expect("generated names are valid and unique"))
}

/// Net with fresh places `p_i`, `p_f` and transitions `t_init: p_i -> from`,
/// `t_fin: to -> p_f`, so that `{p_f: 1}` is reachable from `{p_i: 1}` iff
/// `to` is reachable from `from` in `net`.
pub fn normalize_markings(
    net: &PetriNet,
    from: &Marking,
    to: &Marking,
) -> Result<(PetriNet, PlaceId, PlaceId), NetError> {
    for m in [from, to] {
        if m.len() != net.num_places() {
            return Err(NetError::MarkingSize {
                got: m.len(),
                want: net.num_places(),
            });
        }
    }
    let pi = net.fresh_place_name("p_init");
    let pf = fresh_distinct(net.fresh_place_name("p_fin"), &pi);
    let ti = net.fresh_transition_name("t_init");
    let tf = fresh_distinct(net.fresh_transition_name("t_fin"), &ti);
    let arcs = |m: &Marking| -> Vec<(String, u32)> {
        m.support().map(|(p, k)| (net.place_name(p).to_string(), k)).collect()
    };
    let (fa, ta) = (arcs(from), arcs(to));
    let mut b = net.to_builder();
    b.place(&pi).place(&pf);
    b.transition(&ti, &[(pi.as_str(), 1)], &borrow(&fa));
    b.transition(&tf, &borrow(&ta), &[(pf.as_str(), 1)]);
    let out = b.build()?;
    let n = net.num_places() as u32;
    Ok((out, PlaceId(n), PlaceId(n + 1)))
}

fn borrow(v: &[(String, u32)]) -> Vec<(&str, u32)> {
    v.iter().map(|(s, k)| (s.as_str(), *k)).collect()
}

fn fresh_distinct(candidate: String, other: &str) -> String {
    if candidate == other {
        format!("{candidate}_")
    } else {
        candidate
    }
}

/// `x` ↦ `x^R`, and `x^R` ↦ `x`, so that reversing twice gives back the
/// original names.
pub fn reverse_name(name: &str) -> String {
    match name.strip_suffix("^R") {
        Some(base) => base.to_string(),
        None => format!("{name}^R"),
    }
}

/// Same places (renamed) and transitions with `Pre` and `Post` swapped.
/// Place and transition indices are preserved.
pub fn reverse_net(net: &PetriNet) -> PetriNet {
    let names: Vec<String> = net.places().map(|p| reverse_name(net.place_name(p))).collect();
    let mut b = PetriNetBuilder::new();
    b.places(names.iter().map(String::as_str));
    for t in net.transitions() {
        let arcs = |m: &Marking| -> Vec<(&str, u32)> {
            m.support().map(|(p, k)| (names[p.index()].as_str(), k)).collect()
        };
        b.transition(&reverse_name(net.transition_name(t)), &arcs(net.post(t)), &arcs(net.pre(t)));
    }
    b.build().expect("reversed names stay unique")
}

/// Disjoint union of `fwd` and `rev` where the reverse copy of `p_f` is
/// merged into `p_f`. Places and transitions of `fwd` keep their indices;
/// the other reverse places follow in order, then the reverse transitions.
pub fn merge_final(fwd: &PetriNet, rev: &PetriNet, p_f: PlaceId) -> Result<PetriNet, NetError> {
    if fwd.num_places() != rev.num_places() || fwd.num_transitions() != rev.num_transitions() {
        return Err(NetError::ReverseMismatch);
    }
    for t in fwd.transitions() {
        if fwd.pre(t) != rev.post(t) || fwd.post(t) != rev.pre(t) {
            return Err(NetError::ReverseMismatch);
        }
        if fwd.pre(t).get(p_f) > 0 {
            return Err(NetError::ForwardConsumesFinal(fwd.place_name(p_f).to_string()));
        }
    }
    let mut b = fwd.to_builder();
    let rev_name = |p: PlaceId| -> &str {
        if p == p_f {
            fwd.place_name(p_f)
        } else {
            rev.place_name(p)
        }
    };
    b.places(rev.places().filter(|&p| p != p_f).map(|p| rev.place_name(p)));
    for t in rev.transitions() {
        let arcs = |m: &Marking| -> Vec<(&str, u32)> { m.support().map(|(p, k)| (rev_name(p), k)).collect() };
        b.transition(rev.transition_name(t), &arcs(rev.pre(t)), &arcs(rev.post(t)));
    }
    b.build()
}
