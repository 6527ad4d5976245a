//! Seeded random protocols for property tests and `gen random`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdvcut_core::model::{classify, disconnected_process_states, ModelError, Polarity, Protocol, ProtocolBuilder};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    /// Including `q_i` and `q_f`; 1 makes them coincide.
    pub num_process_states: usize,
    pub num_letters: usize,
    /// Probability of each candidate edge `(q, a, q')`.
    pub edge_density: f64,
    pub symmetric: bool,
    pub leaderless: bool,
    /// Including the leader's initial and final state; ignored when leaderless.
    pub num_leader_states: usize,
    pub seed: u64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            num_process_states: 3,
            num_letters: 2,
            edge_density: 0.15,
            symmetric: false,
            leaderless: true,
            num_leader_states: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandomError {
    #[error("need at least one process state")]
    NoStates,
    #[error("need at least one letter")]
    NoLetters,
    #[error("a leader needs at least one state")]
    NoLeaderStates,
    #[error("edge density must lie in [0, 1]")]
    Density,
    #[error("at most 64 process states are supported")]
    TooManyStates,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn process_names(k: usize) -> Vec<String> {
    if k == 1 {
        return vec!["q_i".into()];
    }
    let mut v = vec!["q_i".to_string()];
    v.extend((1..k - 1).map(|j| format!("q{j}")));
    v.push("q_f".into());
    v
}

fn leader_names(k: usize) -> Vec<String> {
    if k == 1 {
        return vec!["qLi".into()];
    }
    let mut v = vec!["qLi".to_string()];
    v.extend((1..k - 1).map(|j| format!("qL{j}")));
    v.push("qLf".into());
    v
}

struct Draft {
    edges: Vec<(usize, Polarity, usize, usize)>,
}

impl Draft {
    fn add(&mut self, symmetric: bool, rng: &mut ChaCha8Rng, src: usize, letter: usize, dst: usize) {
        if symmetric {
            self.edges.push((src, Polarity::Send, letter, dst));
            self.edges.push((src, Polarity::Receive, letter, dst));
        } else {
            let pol = if rng.gen_bool(0.5) { Polarity::Send } else { Polarity::Receive };
            self.edges.push((src, pol, letter, dst));
        }
    }
}

/// Deterministic in `spec.seed`. Every process state ends up on a path from
/// `q_i` to `q_f`: unreachable states get an edge from a reachable one, and
/// states that cannot reach `q_f` get an edge into a state that can.
pub fn gen_random(spec: &RandomSpec) -> Result<Protocol, RandomError> {
    if spec.num_process_states == 0 {
        return Err(RandomError::NoStates);
    }
    if spec.num_process_states > 64 {
        return Err(RandomError::TooManyStates);
    }
    if spec.num_letters == 0 {
        return Err(RandomError::NoLetters);
    }
    if !spec.leaderless && spec.num_leader_states == 0 {
        return Err(RandomError::NoLeaderStates);
    }
    if !(0.0..=1.0).contains(&spec.edge_density) {
        return Err(RandomError::Density);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let procs = process_names(spec.num_process_states);
    let leads = if spec.leaderless { Vec::new() } else { leader_names(spec.num_leader_states) };
    let letters: Vec<String> = (0..spec.num_letters).map(|j| format!("a{j}")).collect();

    let np = procs.len();
    let mut proc_draft = Draft { edges: Vec::new() };
    for s in 0..np {
        for d in 0..np {
            for a in 0..letters.len() {
                if rng.gen_bool(spec.edge_density) {
                    proc_draft.add(spec.symmetric, &mut rng, s, a, d);
                }
            }
        }
    }
    let mut lead_draft = Draft { edges: Vec::new() };
    for s in 0..leads.len() {
        for d in 0..leads.len() {
            for a in 0..letters.len() {
                if rng.gen_bool(spec.edge_density) {
                    lead_draft.add(spec.symmetric, &mut rng, s, a, d);
                }
            }
        }
    }

    let build = |pd: &Draft| -> Result<Protocol, ModelError> {
        let mut b = ProtocolBuilder::new();
        b.alphabet(letters.iter().map(String::as_str));
        b.process_states(procs.iter().map(String::as_str));
        let (pi, pf) = (procs[0].as_str(), procs[np - 1].as_str());
        if leads.is_empty() {
            b.initial(pi, None).final_states(pf, None);
        } else {
            b.leader_states(leads.iter().map(String::as_str));
            b.initial(pi, Some(&leads[0])).final_states(pf, Some(&leads[leads.len() - 1]));
        }
        for &(s, pol, a, d) in &pd.edges {
            b.edge(&procs[s], pol, &letters[a], &procs[d]);
        }
        for &(s, pol, a, d) in &lead_draft.edges {
            b.edge(&leads[s], pol, &letters[a], &leads[d]);
        }
        b.build()
    };

    // Repair: one state at a time, re-checking after each added edge.
    loop {
        let p = build(&proc_draft)?;
        let bad = disconnected_process_states(&p);
        let Some(&q) = bad.first() else { return Ok(p) };
        let qi = q.index();
        let fwd = reach(np, &proc_draft, 0, false);
        let bwd = reach(np, &proc_draft, np - 1, true);
        let a = rng.gen_range(0..letters.len());
        if !fwd[qi] {
            let from: Vec<usize> = (0..np).filter(|&s| fwd[s]).collect();
            let s = *from.choose(&mut rng).expect("q_i reaches itself");
            proc_draft.add(spec.symmetric, &mut rng, s, a, qi);
        } else {
            let to: Vec<usize> = (0..np).filter(|&d| bwd[d]).collect();
            let d = *to.choose(&mut rng).expect("q_f reaches itself");
            proc_draft.add(spec.symmetric, &mut rng, qi, a, d);
        }
        debug_assert!(!spec.symmetric || classify(&build(&proc_draft)?).symmetric);
    }
}

/// States reachable from `root` in the process graph (or co-reachable when
/// `backward`).
fn reach(np: usize, d: &Draft, root: usize, backward: bool) -> Vec<bool> {
    let mut seen = vec![false; np];
    seen[root] = true;
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        for &(s, _, _, t) in &d.edges {
            let (from, to) = if backward { (t, s) } else { (s, t) };
            if from == u && !seen[to] {
                seen[to] = true;
                stack.push(to);
            }
        }
    }
    seen
}
