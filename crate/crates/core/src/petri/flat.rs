//! Flat expressions, linear sets, and the net gadget that reduces
//! "does `Reach(M_0)` meet `b + P`" to reachability of the zero marking.

use alloc::string::String;
use alloc::vec::Vec;

use super::net::{Marking, NetError, PetriNet, PlaceId, TransitionId};
use super::search::{capped_search, CappedSearch};
use crate::budget::SearchLimits;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Word(Vec<TransitionId>),
    Star(Vec<TransitionId>),
}

/// `T_1 T_2 ... T_l` where each `T_j` is a word or a starred word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FlatExpression {
    pub segments: Vec<Segment>,
}

impl FlatExpression {
    pub fn num_stars(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| matches!(s, Segment::Star(_)))
            .count()
    }

    pub fn validate(&self, net: &PetriNet) -> Result<(), NetError> {
        for s in &self.segments {
            let (Segment::Word(w) | Segment::Star(w)) = s;
            if let Some(t) = w.iter().find(|t| t.index() >= net.num_transitions()) {
                return Err(NetError::UnknownTransition(alloc::format!("#{}", t.index())));
            }
        }
        Ok(())
    }

    /// The word of `L(FE)` with the given iteration count per star.
    pub fn unfold(&self, counts: &[u32]) -> Vec<TransitionId> {
        let mut out = Vec::new();
        let mut k = counts.iter();
        for s in &self.segments {
            match s {
                Segment::Word(w) => out.extend_from_slice(w),
                Segment::Star(w) => {
                    let c = *k.next().expect("one count per star");
                    for _ in 0..c {
                        out.extend_from_slice(w);
                    }
                }
            }
        }
        out
    }

    pub fn render(&self, net: &PetriNet) -> String {
        let mut out = String::new();
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let (Segment::Word(w) | Segment::Star(w)) = s;
            out.push('(');
            for (j, t) in w.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                out.push_str(net.transition_name(*t));
            }
            out.push(')');
            if matches!(s, Segment::Star(_)) {
                out.push('*');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlatMembership {
    /// Iteration counts, one per star, in order.
    Member(Vec<u32>),
    NotWithinBudget,
}

/// Whether `target` is reached from `m` by a word of `L(fe)` that iterates
/// every star at most `loop_budget` times. Counts are tried in
/// lexicographic order, so the first member found is the smallest.
pub fn member_flat(
    net: &PetriNet,
    m: &Marking,
    fe: &FlatExpression,
    target: &Marking,
    loop_budget: u32,
) -> FlatMembership {
    fn go(
        net: &PetriNet,
        m: &Marking,
        segs: &[Segment],
        target: &Marking,
        budget: u32,
        counts: &mut Vec<u32>,
    ) -> bool {
        let Some((first, rest)) = segs.split_first() else {
            return m == target;
        };
        match first {
            Segment::Word(w) => match net.fire_sequence(m, w) {
                Some(next) => go(net, &next, rest, target, budget, counts),
                None => false,
            },
            Segment::Star(w) => {
                let mut cur = m.clone();
                for k in 0..=budget {
                    counts.push(k);
                    if go(net, &cur, rest, target, budget, counts) {
                        return true;
                    }
                    counts.pop();
                    // A word that cannot fire now cannot fire after more
                    // iterations of the same prefix either.
                    match net.fire_sequence(&cur, w) {
                        Some(next) => cur = next,
                        None => break,
                    }
                }
                false
            }
        }
    }
    let mut counts = Vec::new();
    if go(net, m, &fe.segments, target, loop_budget, &mut counts) {
        FlatMembership::Member(counts)
    } else {
        FlatMembership::NotWithinBudget
    }
}

/// All non-empty words over the net's transitions of length at most
/// `max_len`, shortest first.
fn words(num_transitions: usize, max_len: usize) -> Vec<Vec<TransitionId>> {
    let mut out: Vec<Vec<TransitionId>> = Vec::new();
    let mut layer: Vec<Vec<TransitionId>> = alloc::vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for t in 0..num_transitions {
                let mut v = w.clone();
                v.push(TransitionId(t as u32));
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Flat expressions with up to `max_segments` segments, each a word of length
/// at most `max_word_len` (plain or starred). The count grows as
/// `(2 |T|^max_word_len)^max_segments`; callers keep both bounds small.
pub fn enumerate_flat_expressions(
    net: &PetriNet,
    max_segments: usize,
    max_word_len: usize,
) -> Vec<FlatExpression> {
    let ws = words(net.num_transitions(), max_word_len);
    let mut segs: Vec<Segment> = Vec::new();
    for w in &ws {
        segs.push(Segment::Word(w.clone()));
        segs.push(Segment::Star(w.clone()));
    }
    let mut out = alloc::vec![FlatExpression::default()];
    let mut layer = out.clone();
    for _ in 0..max_segments {
        let mut next = Vec::new();
        for fe in &layer {
            for s in &segs {
                let mut f = fe.clone();
                f.segments.push(s.clone());
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// First flat expression (in enumeration order) whose language reaches
/// `target` within the loop budget.
pub fn search_flat(
    net: &PetriNet,
    m: &Marking,
    target: &Marking,
    max_segments: usize,
    max_word_len: usize,
    loop_budget: u32,
) -> Option<(FlatExpression, Vec<u32>)> {
    enumerate_flat_expressions(net, max_segments, max_word_len)
        .into_iter()
        .find_map(|fe| match member_flat(net, m, &fe, target, loop_budget) {
            FlatMembership::Member(c) => Some((fe, c)),
            FlatMembership::NotWithinBudget => None,
        })
}

/// `{ base + λ_1 v_1 + ... + λ_k v_k }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSet {
    pub base: Marking,
    pub periods: Vec<Marking>,
}

impl LinearSet {
    /// Indices of zero periods; they add nothing to the set.
    pub fn zero_periods(&self) -> Vec<usize> {
        self.periods
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Coefficients `λ` with `m = base + Σ λ_j v_j`, if any.
    pub fn decompose(&self, m: &Marking) -> Option<Vec<u32>> {
        let rest = m.checked_sub(&self.base)?;
        let mut lambdas = alloc::vec![0u32; self.periods.len()];
        fn go(periods: &[Marking], j: usize, rest: &Marking, lambdas: &mut [u32]) -> bool {
            if rest.is_zero() {
                return true;
            }
            if j == periods.len() {
                return false;
            }
            if periods[j].is_zero() {
                return go(periods, j + 1, rest, lambdas);
            }
            let mut cur = rest.clone();
            let mut k = 0;
            loop {
                lambdas[j] = k;
                if go(periods, j + 1, &cur, lambdas) {
                    return true;
                }
                match cur.checked_sub(&periods[j]) {
                    Some(next) => cur = next,
                    None => break,
                }
                k += 1;
            }
            lambdas[j] = 0;
            false
        }
        go(&self.periods, 0, &rest, &mut lambdas).then_some(lambdas)
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.decompose(m).is_some()
    }
}

/// The gadget net and its initial marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub net: PetriNet,
    pub m0: Marking,
    pub p_sim: PlaceId,
    pub p_lin: PlaceId,
}

/// Extends `net` with places `p_sim`, `p_lin`: original transitions need
/// (and keep) the token in `p_sim`; `t_lin` trades it and `base` for a
/// token in `p_lin`; each `t_cons_j` consumes one period while `p_lin` is
/// marked; `t_end` empties `p_lin`. The zero marking is reachable from
/// `m0 + p_sim` iff `Reach(m0)` meets `s`.
pub fn intersect_gadget(net: &PetriNet, m0: &Marking, s: &LinearSet) -> Gadget {
    let n = net.num_places();
    let sim = net.fresh_place_name("p_sim");
    let lin = super::net::fresh(&net.fresh_place_name("p_lin"), |c| c == sim);
    let names: Vec<String> = net.places().map(|p| String::from(net.place_name(p))).collect();
    let arcs = |m: &Marking| -> Vec<(&str, u32)> {
        m.support().map(|(p, k)| (names[p.index()].as_str(), k)).collect()
    };
    let mut b = super::net::PetriNetBuilder::new();
    b.places(names.iter().map(String::as_str)).place(&sim).place(&lin);
    for t in net.transitions() {
        let mut pre = arcs(net.pre(t));
        pre.push((sim.as_str(), 1));
        let mut post = arcs(net.post(t));
        post.push((sim.as_str(), 1));
        b.transition(net.transition_name(t), &pre, &post);
    }
    let taken = |c: &str| net.transition_by_name(c).is_some();
    let t_lin = super::net::fresh("t_lin", taken);
    let mut pre = arcs(&s.base);
    pre.push((sim.as_str(), 1));
    b.transition(&t_lin, &pre, &[(lin.as_str(), 1)]);
    for (j, v) in s.periods.iter().enumerate() {
        let name = super::net::fresh(&alloc::format!("t_cons_{}", j + 1), taken);
        let mut pre = arcs(v);
        pre.push((lin.as_str(), 1));
        b.transition(&name, &pre, &[(lin.as_str(), 1)]);
    }
    b.transition(&super::net::fresh("t_end", taken), &[(lin.as_str(), 1)], &[]);
    let gnet = b.build().expect("gadget names are fresh");
    let mut g0 = m0.resized(n + 2);
    g0.set(PlaceId(n as u32), 1);
    Gadget {
        net: gnet,
        m0: g0,
        p_sim: PlaceId(n as u32),
        p_lin: PlaceId(n as u32 + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GadgetOutcome {
    /// Firing sequence of the gadget net reaching zero.
    Intersects(Vec<TransitionId>),
    EmptyWithinCap,
    BudgetHit,
}

/// Capped search for the zero marking in the gadget net. With cap `C`, a
/// member `M` is found whenever some run to `M` in the original net stays
/// within `C - 1` tokens.
pub fn gadget_check(
    net: &PetriNet,
    m0: &Marking,
    s: &LinearSet,
    cap: u32,
    limits: &SearchLimits<'_>,
) -> GadgetOutcome {
    let g = intersect_gadget(net, m0, s);
    let zero = g.net.zero_marking();
    match capped_search(&g.net, &g.m0, &zero, cap, limits) {
        CappedSearch::Found(seq) => GadgetOutcome::Intersects(seq),
        CappedSearch::Exhausted => GadgetOutcome::EmptyWithinCap,
        CappedSearch::BudgetHit => GadgetOutcome::BudgetHit,
    }
}
