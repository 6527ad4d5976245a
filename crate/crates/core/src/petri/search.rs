//! Explicit-state search over markings with a token cap, and the structural
//! certificate that makes a capped negative answer exact.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::net::{Marking, PetriNet, PlaceId, TransitionId};
use crate::budget::SearchLimits;
use crate::semantics::Answer;

/// A place set `L` such that, for every transition `t`,
/// `Δ_L(t) <= min(0, Δ(t))` where `Δ` is the total token change.
///
/// Then `sum_L` never increases and the tokens outside `L` never decrease,
/// so every marking on a run from `from` to `to` has at most
/// `|to| - sum_L(to) + sum_L(from)` tokens. For protocol nets `L` is the
/// set of leader places and the bound for `{q_f: n}` is `n + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenCapCertificate {
    pub places: Vec<PlaceId>,
}

const CERTIFICATE_SEARCH_NODES: usize = 200_000;

impl TokenCapCertificate {
    fn sum(&self, m: &Marking) -> i64 {
        self.places.iter().map(|&p| m.get(p) as i64).sum()
    }

    /// Largest token count that a run `from ->* to` can pass through.
    /// Negative means no run exists at all.
    pub fn cap(&self, from: &Marking, to: &Marking) -> i64 {
        to.total() as i64 - self.sum(to) + self.sum(from)
    }

    /// `sum_L(from)`: the most a run to any target can exceed the target's
    /// size.
    pub fn slack(&self, from: &Marking) -> u32 {
        self.sum(from) as u32
    }

    pub fn holds_for(&self, net: &PetriNet) -> bool {
        let mut y = vec![0i64; net.num_places()];
        for p in &self.places {
            y[p.index()] = 1;
        }
        net.transitions().all(|t| {
            let d = net.delta(t);
            let dl: i64 = d.iter().zip(&y).map(|(a, b)| a * b).sum();
            dl <= 0.min(d.iter().sum())
        })
    }

    /// Searches for a certificate, preferring places with low indices.
    /// Depth-first over place memberships with bound propagation; gives up
    /// (returns `None`) after a fixed number of search nodes.
    pub fn find(net: &PetriNet) -> Option<Self> {
        let n = net.num_places();
        let deltas: Vec<Vec<i64>> = net.transitions().map(|t| net.delta(t)).collect();
        let bounds: Vec<i64> = deltas.iter().map(|d| 0.min(d.iter().sum())).collect();
        // Only transitions that touch a place constrain its membership.
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (t, d) in deltas.iter().enumerate() {
            for (p, &v) in d.iter().enumerate() {
                if v != 0 {
                    touching[p].push(t);
                }
            }
        }
        // For each transition: chosen sum so far, and the most negative
        // contribution still available from undecided places.
        let mut chosen = vec![0i64; deltas.len()];
        let mut slack: Vec<i64> = deltas.iter().map(|d| d.iter().filter(|&&v| v < 0).sum()).collect();
        let mut member = vec![false; n];
        let mut nodes = 0usize;

        fn go(
            p: usize,
            deltas: &[Vec<i64>],
            bounds: &[i64],
            touching: &[Vec<usize>],
            chosen: &mut [i64],
            slack: &mut [i64],
            member: &mut [bool],
            nodes: &mut usize,
        ) -> Option<bool> {
            *nodes += 1;
            if *nodes > CERTIFICATE_SEARCH_NODES {
                return None;
            }
            if p == member.len() {
                return Some(true);
            }
            for take in [true, false] {
                let mut ok = true;
                for &t in &touching[p] {
                    let v = deltas[t][p];
                    if v < 0 {
                        slack[t] -= v;
                    }
                    if take {
                        chosen[t] += v;
                    }
                    if chosen[t] + slack[t] > bounds[t] {
                        ok = false;
                    }
                }
                member[p] = take;
                if ok {
                    match go(p + 1, deltas, bounds, touching, chosen, slack, member, nodes) {
                        Some(true) => return Some(true),
                        None => return None,
                        Some(false) => {}
                    }
                }
                for &t in &touching[p] {
                    let v = deltas[t][p];
                    if v < 0 {
                        slack[t] += v;
                    }
                    if take {
                        chosen[t] -= v;
                    }
                }
            }
            member[p] = false;
            Some(false)
        }

        // Transitions touching no place at all must satisfy 0 <= bound.
        if bounds.iter().zip(&deltas).any(|(b, d)| d.iter().all(|&v| v == 0) && *b < 0) {
            return None;
        }
        match go(
            0,
            &deltas,
            &bounds,
            &touching,
            &mut chosen,
            &mut slack,
            &mut member,
            &mut nodes,
        )? {
            true => {
                let cert = TokenCapCertificate {
                    places: (0..n)
                        .filter(|&i| member[i])
                        .map(|i| PlaceId(i as u32))
                        .collect(),
                };
                debug_assert!(cert.holds_for(net));
                Some(cert)
            }
            false => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CappedSearch {
    Found(Vec<TransitionId>),
    /// Every marking with at most `token_cap` tokens reachable through such
    /// markings was explored.
    Exhausted,
    BudgetHit,
}

/// Breadth-first search restricted to markings with at most `token_cap`
/// tokens. Transitions are tried in index order.
pub fn capped_search(
    net: &PetriNet,
    from: &Marking,
    to: &Marking,
    token_cap: u32,
    limits: &SearchLimits<'_>,
) -> CappedSearch {
    if from == to {
        return CappedSearch::Found(Vec::new());
    }
    if from.total() > token_cap {
        return CappedSearch::Exhausted;
    }
    let mut nodes = vec![from.clone()];
    let mut parent: Vec<(u32, Option<TransitionId>)> = vec![(0, None)];
    let mut index: HashMap<Marking, ()> = HashMap::new();
    index.insert(from.clone(), ());
    let mut queue = VecDeque::from([0u32]);
    let mut expanded = 0usize;
    while let Some(u) = queue.pop_front() {
        expanded += 1;
        if expanded % 1024 == 0 && limits.expired() {
            return CappedSearch::BudgetHit;
        }
        let cur = nodes[u as usize].clone();
        for t in net.transitions() {
            let Some(next) = net.fire(&cur, t) else { continue };
            if next.total() > token_cap || index.contains_key(&next) {
                continue;
            }
            parent.push((u, Some(t)));
            let id = nodes.len() as u32;
            if &next == to {
                let mut seq = Vec::new();
                let mut i = id;
                while let (pi, Some(t)) = parent[i as usize] {
                    seq.push(t);
                    i = pi;
                }
                seq.reverse();
                return CappedSearch::Found(seq);
            }
            if nodes.len() >= limits.node_cap {
                return CappedSearch::BudgetHit;
            }
            index.insert(next.clone(), ());
            nodes.push(next);
            queue.push_back(id);
        }
    }
    CappedSearch::Exhausted
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedReach {
    Reachable(Vec<TransitionId>),
    NotReachableExact,
    Unknown,
}

impl BoundedReach {
    pub fn answer(&self) -> Answer {
        match self {
            BoundedReach::Reachable(_) => Answer::Yes,
            BoundedReach::NotReachableExact => Answer::No,
            BoundedReach::Unknown => Answer::Unknown,
        }
    }
}

/// Capped reachability. A negative answer is exact only when the net has a
/// [`TokenCapCertificate`] whose bound for this query is within `token_cap`.
pub fn bounded_reach(
    net: &PetriNet,
    from: &Marking,
    to: &Marking,
    token_cap: u32,
    limits: &SearchLimits<'_>,
) -> BoundedReach {
    bounded_reach_with(net, TokenCapCertificate::find(net).as_ref(), from, to, token_cap, limits)
}

/// [`bounded_reach`] with a precomputed (or absent) certificate.
pub fn bounded_reach_with(
    net: &PetriNet,
    cert: Option<&TokenCapCertificate>,
    from: &Marking,
    to: &Marking,
    token_cap: u32,
    limits: &SearchLimits<'_>,
) -> BoundedReach {
    match capped_search(net, from, to, token_cap, limits) {
        CappedSearch::Found(seq) => BoundedReach::Reachable(seq),
        CappedSearch::Exhausted => match cert {
            Some(c) if c.cap(from, to) <= token_cap as i64 => BoundedReach::NotReachableExact,
            _ => BoundedReach::Unknown,
        },
        CappedSearch::BudgetHit => BoundedReach::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::petri::{merge_final, protocol_to_net, reverse_net, PetriNetBuilder};

    #[test]
    fn protocol_nets_are_certified_by_leader_places() {
        let p = corpus::fig1();
        let e = protocol_to_net(&p);
        let cert = TokenCapCertificate::find(&e.net).unwrap();
        let leader: Vec<PlaceId> = p.leader_states().map(|q| PlaceId(q.0)).collect();
        assert_eq!(cert.places, leader);
        for n in 0..6 {
            assert_eq!(cert.cap(&e.m0, &e.final_marking(n)), n as i64 + 1);
        }
        let p6 = protocol_to_net(&corpus::fig6());
        let c6 = TokenCapCertificate::find(&p6.net).unwrap();
        assert_eq!(c6.cap(&p6.m0, &p6.final_marking(4)), 4);
    }

    #[test]
    fn merged_nets_have_no_certificate() {
        let e = protocol_to_net(&corpus::fig6());
        let m = merge_final(&e.net, &reverse_net(&e.net), e.p_f).unwrap();
        assert_eq!(TokenCapCertificate::find(&m), None);
    }

    #[test]
    fn fig5_queries() {
        let e = protocol_to_net(&corpus::fig1());
        let lim = SearchLimits::default();
        let r3 = bounded_reach(&e.net, &e.m0, &e.final_marking(3), 4, &lim);
        let BoundedReach::Reachable(seq) = r3 else { panic!() };
        assert_eq!(e.net.fire_sequence(&e.m0, &seq), Some(e.final_marking(3)));
        assert_eq!(
            bounded_reach(&e.net, &e.m0, &e.final_marking(2), 3, &lim),
            BoundedReach::NotReachableExact
        );
        // A cap below the certified bound cannot give an exact negative.
        assert_eq!(
            bounded_reach(&e.net, &e.m0, &e.final_marking(2), 2, &lim),
            BoundedReach::Unknown
        );
        assert_eq!(
            bounded_reach(&e.net, &e.m0, &e.m0, 0, &lim),
            BoundedReach::Reachable(Vec::new())
        );
    }

    #[test]
    fn node_cap_gives_unknown() {
        let e = protocol_to_net(&corpus::fig1());
        let r = bounded_reach(&e.net, &e.m0, &e.final_marking(5), 6, &SearchLimits::with_node_cap(5));
        assert_eq!(r, BoundedReach::Unknown);
    }

    #[test]
    fn uncertified_net_never_exact() {
        // t consumes one token and produces nothing: a decrementer with no
        // place that can pay for it.
        let mut b = PetriNetBuilder::new();
        b.places(["p", "q"])
            .transition("gen", &[], &[("p", 1)])
            .transition("eat", &[("p", 1)], &[]);
        let net = b.build().unwrap();
        assert_eq!(TokenCapCertificate::find(&net), None);
        let q1 = net.marking(&[("q", 1)]).unwrap();
        assert_eq!(
            bounded_reach(&net, &net.zero_marking(), &q1, 10, &SearchLimits::default()),
            BoundedReach::Unknown
        );
    }

    #[test]
    fn certificate_bound_holds_on_explored_runs() {
        // Every marking visited on the way to a reachable target stays
        // within the certified cap.
        let p = corpus::fig1();
        let e = protocol_to_net(&p);
        let cert = TokenCapCertificate::find(&e.net).unwrap();
        for n in 1..=5 {
            if let BoundedReach::Reachable(seq) =
                bounded_reach(&e.net, &e.m0, &e.final_marking(n), 50, &SearchLimits::default())
            {
                let mut m = e.m0.clone();
                for t in seq {
                    m = e.net.fire(&m, t).unwrap();
                    assert!(m.total() as i64 <= cert.cap(&e.m0, &e.final_marking(n)));
                }
            }
        }
    }
}
