use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub(crate) u32);

impl PlaceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub(crate) u32);

impl TransitionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Token vector indexed by place.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking {
    counts: Vec<u32>,
}

impl Marking {
    pub fn zero(num_places: usize) -> Self {
        Marking {
            counts: vec![0; num_places],
        }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Marking { counts }
    }

    /// `k` tokens in `p`, nothing elsewhere.
    pub fn single(num_places: usize, p: PlaceId, k: u32) -> Self {
        let mut m = Marking::zero(num_places);
        m.counts[p.index()] = k;
        m
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, p: PlaceId) -> u32 {
        self.counts[p.index()]
    }

    pub fn set(&mut self, p: PlaceId, v: u32) {
        self.counts[p.index()] = v;
    }

    pub fn add(&mut self, p: PlaceId, v: u32) {
        self.counts[p.index()] += v;
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Marking) -> bool {
        self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &Marking) -> Option<Marking> {
        self.counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Marking::from_counts)
    }

    pub fn plus(&self, other: &Marking) -> Marking {
        Marking::from_counts(self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, k: u32) -> Marking {
        Marking::from_counts(self.counts.iter().map(|a| a * k).collect())
    }

    /// Copy padded with zeros (or truncated) to `n` places.
    pub fn resized(&self, n: usize) -> Marking {
        let mut c = self.counts.clone();
        c.resize(n, 0);
        Marking::from_counts(c)
    }

    pub fn support(&self) -> impl Iterator<Item = (PlaceId, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (PlaceId(i as u32), c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub pre: Marking,
    pub post: Marking,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("duplicate place `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(String),
    #[error("undeclared place `{0}`")]
    UndeclaredPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("marking has {got} entries, net has {want} places")]
    MarkingSize { got: usize, want: usize },
    #[error("source and target place must differ")]
    SamePlace,
    #[error("a forward transition consumes from the final place `{0}`; eliminate outgoing final edges first")]
    ForwardConsumesFinal(String),
    #[error("reverse net does not match the forward net")]
    ReverseMismatch,
}

/// Place names: non-empty, no whitespace, no `:` (which separates a place
/// from its multiplicity in the text format).
pub fn is_valid_place_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == ':')
}

pub fn is_valid_transition_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
}

impl PetriNet {
    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        (0..self.places.len() as u32).map(PlaceId)
    }

    pub fn transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        (0..self.transitions.len() as u32).map(TransitionId)
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.index()]
    }

    pub fn place_by_name(&self, name: &str) -> Option<PlaceId> {
        self.places
            .iter()
            .position(|n| n == name)
            .map(|i| PlaceId(i as u32))
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.index()]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.index()].name
    }

    pub fn transition_by_name(&self, name: &str) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .map(|i| TransitionId(i as u32))
    }

    pub fn pre(&self, t: TransitionId) -> &Marking {
        &self.transitions[t.index()].pre
    }

    pub fn post(&self, t: TransitionId) -> &Marking {
        &self.transitions[t.index()].post
    }

    /// Net effect `Post(t) - Pre(t)` per place.
    pub fn delta(&self, t: TransitionId) -> Vec<i64> {
        let tr = &self.transitions[t.index()];
        tr.pre
            .counts()
            .iter()
            .zip(tr.post.counts())
            .map(|(a, b)| *b as i64 - *a as i64)
            .collect()
    }

    pub fn zero_marking(&self) -> Marking {
        Marking::zero(self.places.len())
    }

    /// Builds a marking from `(place name, tokens)` pairs.
    pub fn marking(&self, entries: &[(&str, u32)]) -> Result<Marking, NetError> {
        let mut m = self.zero_marking();
        for (name, k) in entries {
            let p = self
                .place_by_name(name)
                .ok_or_else(|| NetError::UndeclaredPlace(name.to_string()))?;
            m.add(p, *k);
        }
        Ok(m)
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.pre(t).le(m)
    }

    /// Successor marking when `t` is enabled in `m`.
    pub fn fire(&self, m: &Marking, t: TransitionId) -> Option<Marking> {
        let tr = &self.transitions[t.index()];
        m.checked_sub(&tr.pre).map(|r| r.plus(&tr.post))
    }

    /// Name-checked variant of [`fire`](Self::fire).
    pub fn fire_named(&self, m: &Marking, name: &str) -> Result<Option<Marking>, NetError> {
        let t = self
            .transition_by_name(name)
            .ok_or_else(|| NetError::UnknownTransition(name.to_string()))?;
        Ok(self.fire(m, t))
    }

    /// Fires `seq` in order; `None` as soon as one transition is disabled.
    pub fn fire_sequence(&self, m: &Marking, seq: &[TransitionId]) -> Option<Marking> {
        seq.iter().try_fold(m.clone(), |cur, &t| self.fire(&cur, t))
    }

    /// Rebuilds the net through a builder so that transformations can add
    /// places and transitions by name.
    pub fn to_builder(&self) -> PetriNetBuilder {
        let mut b = PetriNetBuilder::new();
        b.places(self.places.iter().map(String::as_str));
        for t in &self.transitions {
            b.transition_markings(&t.name, &t.pre, &t.post, &self.places);
        }
        b
    }

    /// A place name not yet used, derived from `base`.
    pub fn fresh_place_name(&self, base: &str) -> String {
        fresh(base, |n| self.place_by_name(n).is_some())
    }

    pub fn fresh_transition_name(&self, base: &str) -> String {
        fresh(base, |n| self.transition_by_name(n).is_some())
    }
}

pub(crate) fn fresh(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut candidate = base.to_string();
    let mut i = 1;
    while taken(&candidate) {
        candidate = alloc::format!("{base}{i}");
        i += 1;
    }
    candidate
}

type Arcs = Vec<(String, u32)>;

/// Name-based net construction; validated by [`build`](Self::build).
#[derive(Debug, Clone, Default)]
pub struct PetriNetBuilder {
    places: Vec<String>,
    transitions: Vec<(String, Arcs, Arcs)>,
}

impl PetriNetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn places<'s>(&mut self, names: impl IntoIterator<Item = &'s str>) -> &mut Self {
        self.places.extend(names.into_iter().map(str::to_string));
        self
    }

    pub fn place(&mut self, name: &str) -> &mut Self {
        self.places.push(name.to_string());
        self
    }

    /// Adds a transition; repeated places in `pre` or `post` accumulate.
    pub fn transition(&mut self, name: &str, pre: &[(&str, u32)], post: &[(&str, u32)]) -> &mut Self {
        let own = |v: &[(&str, u32)]| v.iter().map(|(p, k)| (p.to_string(), *k)).collect();
        self.transitions.push((name.to_string(), own(pre), own(post)));
        self
    }

    fn transition_markings(&mut self, name: &str, pre: &Marking, post: &Marking, places: &[String]) {
        let arcs = |m: &Marking| {
            m.support()
                .map(|(p, k)| (places[p.index()].clone(), k))
                .collect()
        };
        self.transitions.push((name.to_string(), arcs(pre), arcs(post)));
    }

    pub fn build(&self) -> Result<PetriNet, NetError> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, p) in self.places.iter().enumerate() {
            if !is_valid_place_name(p) {
                return Err(NetError::InvalidName(p.clone()));
            }
            if index.insert(p, i).is_some() {
                return Err(NetError::DuplicatePlace(p.clone()));
            }
        }
        let n = self.places.len();
        let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
        let mut transitions = Vec::new();
        for (name, pre, post) in &self.transitions {
            if !is_valid_transition_name(name) {
                return Err(NetError::InvalidName(name.clone()));
            }
            if seen.insert(name, ()).is_some() {
                return Err(NetError::DuplicateTransition(name.clone()));
            }
            let to_marking = |arcs: &Arcs| -> Result<Marking, NetError> {
                let mut m = Marking::zero(n);
                for (p, k) in arcs {
                    let i = *index
                        .get(p.as_str())
                        .ok_or_else(|| NetError::UndeclaredPlace(p.clone()))?;
                    m.counts[i] += k;
                }
                Ok(m)
            };
            transitions.push(Transition {
                name: name.clone(),
                pre: to_marking(pre)?,
                post: to_marking(post)?,
            });
        }
        Ok(PetriNet {
            places: self.places.clone(),
            transitions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fig4_net;

    #[test]
    fn fig4_fire() {
        let (net, from, _) = fig4_net();
        let t1 = net.transition_by_name("t_1").unwrap();
        let t2 = net.transition_by_name("t_2").unwrap();
        let m = net.fire(&from, t1).unwrap();
        assert_eq!(m, net.marking(&[("p_2", 1), ("p_3", 1)]).unwrap());
        let only_p2 = net.marking(&[("p_2", 1)]).unwrap();
        assert_eq!(net.fire(&only_p2, t2), None);
        assert_eq!(
            net.fire(&m, t2).unwrap(),
            net.marking(&[("p_f", 1)]).unwrap()
        );
        assert!(matches!(
            net.fire_named(&m, "t_9"),
            Err(NetError::UnknownTransition(_))
        ));
    }

    #[test]
    fn empty_pre_fires_from_zero() {
        let mut b = PetriNetBuilder::new();
        b.places(["p", "q"]).transition("gen", &[], &[("p", 2), ("q", 1)]);
        let net = b.build().unwrap();
        let t = net.transition_by_name("gen").unwrap();
        assert_eq!(net.fire(&net.zero_marking(), t).unwrap(), *net.post(t));
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = PetriNetBuilder::new();
        b.places(["p", "p"]);
        assert_eq!(b.build(), Err(NetError::DuplicatePlace("p".into())));
        let mut b = PetriNetBuilder::new();
        b.places(["p"]).transition("t", &[("x", 1)], &[]);
        assert_eq!(b.build(), Err(NetError::UndeclaredPlace("x".into())));
        let mut b = PetriNetBuilder::new();
        b.places(["a:b"]);
        assert!(matches!(b.build(), Err(NetError::InvalidName(_))));
    }

    #[test]
    fn builder_round_trip() {
        let (net, _, _) = fig4_net();
        assert_eq!(net.to_builder().build().unwrap(), net);
    }
}
