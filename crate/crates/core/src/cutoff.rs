//! Cut-off decision driver: picks the strongest applicable procedure for
//! the protocol's class and packages the result as a checkable certificate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use thiserror::Error;

use crate::budget::{Clock, SearchLimits, DEFAULT_NODE_CAP};
use crate::evenodd::{
    concretize, decide_symmetric_cop, AbstractPath, EvenOddError, ParityClass, SymmetricVerdict,
};
use crate::model::{classify, eliminate_final_outgoing, ModelError, Protocol};
use crate::petri::{
    capped_search, gadget_check, merge_final, protocol_to_net, reverse_net,
    single_place_cutoff_budgeted, CappedSearch, GadgetOutcome, LinearSet, Marking, NetError,
    PetriNet, PlaceId, SinglePlaceBudget, SinglePlaceOutcome, TokenCapCertificate, TransitionId,
};
use crate::semantics::{final_config, initial_config, reachable_final, Answer, Reachability, Trace};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest population checked individually.
    pub n_max: u32,
    /// Stored configurations (or markings) per search.
    pub node_cap: usize,
    pub wall_time: Duration,
    /// Confirmations required above a general-class cut-off candidate.
    pub window: u32,
    /// Treat `n = 0` as a population.
    pub include_zero: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            n_max: 12,
            node_cap: DEFAULT_NODE_CAP,
            wall_time: Duration::from_secs(60),
            window: 5,
            include_zero: false,
        }
    }
}

impl Budget {
    pub fn limits<'a>(&self, clock: &'a dyn Clock) -> SearchLimits<'a> {
        SearchLimits {
            node_cap: self.node_cap,
            deadline: Some((clock, self.wall_time)),
        }
    }

    fn first_n(&self) -> u32 {
        u32::from(!self.include_zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Cutoff(u32),
    NoCutoff,
    Unknown,
}

/// `{p_f: base + λ period}` is unreachable for every `λ <= lambda_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progression {
    pub base: u32,
    pub period: u32,
    pub lambda_max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Symmetric protocol: witnesses for an even and an odd population.
    /// Pumping pairs extends them to every larger population of the same
    /// parity, so `max(n_even, n_odd)` is a cut-off.
    ParityPumping {
        n_even: u32,
        n_odd: u32,
        trace_even: Trace,
        trace_odd: Trace,
        path_even: AbstractPath,
        path_odd: AbstractPath,
    },
    /// Leaderless protocol: witnesses for `n` and `n + 1` compose into
    /// witnesses for every population `>= n^2`.
    Composition {
        n: u32,
        trace_n: Trace,
        trace_n1: Trace,
        bound: u32,
    },
    /// Symmetric protocol: no abstract path for this class, so no
    /// population of that parity ever completes.
    AbstractObstruction { failed: ParityClass },
    /// Per-population results up to the budget. For a cut-off, every `n`
    /// in `window` carries a witness; for its absence, `obstruction` names
    /// an unreachable progression.
    ExhaustiveWindow {
        table: Vec<Answer>,
        window: (u32, u32),
        traces: Vec<(u32, Trace)>,
        obstruction: Option<Progression>,
    },
    BudgetExhausted {
        n_max: u32,
        node_cap: usize,
        table: Vec<Answer>,
    },
}

impl Justification {
    pub fn tag(&self) -> &'static str {
        match self {
            Justification::ParityPumping { .. } => "parity_pumping",
            Justification::Composition { .. } => "composition",
            Justification::AbstractObstruction { .. } => "abstract_obstruction",
            Justification::ExhaustiveWindow { .. } => "exhaustive_window",
            Justification::BudgetExhausted { .. } => "budget_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub schema_version: u32,
    pub protocol_hash: [u8; 32],
    pub verdict: Verdict,
    /// `false` when the verdict only holds within the search budget.
    pub exact: bool,
    /// The reported cut-off was checked to be the least one (exactly, or
    /// within the verified window when `exact` is false).
    pub minimal: bool,
    pub include_zero: bool,
    pub justification: Justification,
    pub notes: Vec<String>,
}

fn certificate(p: &Protocol, budget: &Budget, verdict: Verdict, exact: bool, minimal: bool, j: Justification, notes: Vec<String>) -> Certificate {
    Certificate {
        schema_version: SCHEMA_VERSION,
        protocol_hash: p.digest(),
        verdict,
        exact,
        minimal,
        include_zero: budget.include_zero,
        justification: j,
        notes,
    }
}

/// Least `m >= lo` such that every `n` in `m..hi` completes, using `answer`
/// per population. `None` when some answer is unknown before a negative
/// one is met.
fn tighten(lo: u32, hi: u32, mut answer: impl FnMut(u32) -> Answer) -> Option<u32> {
    let mut m = hi;
    while m > lo {
        match answer(m - 1) {
            Answer::Yes => m -= 1,
            Answer::No => return Some(m),
            Answer::Unknown => return None,
        }
    }
    Some(m)
}

/// Decides the cut-off problem for `p` within `budget`.
///
/// Symmetric protocols get an exact answer from the parity abstraction;
/// leaderless ones an exact cut-off as soon as two consecutive populations
/// complete; otherwise per-population search plus the single-place
/// procedure on the encoded net give budget-qualified evidence.
pub fn decide(p: &Protocol, budget: &Budget, clock: &dyn Clock) -> Certificate {
    let limits = budget.limits(clock);
    let cls = classify(p);
    let mut notes = Vec::new();
    let lo = budget.first_n();

    if cls.symmetric {
        match decide_symmetric_cop(p) {
            Ok(SymmetricVerdict::HasCutoff { even, odd }) => {
                let (ne, te) = concretize(p, &even, ParityClass::Even).expect("connected symmetric protocol");
                let (no, to) = concretize(p, &odd, ParityClass::Odd).expect("connected symmetric protocol");
                let bound = ne.max(no);
                let minimal = tighten(lo, bound, |n| reachable_final(p, n, &limits).answer());
                if minimal.is_none() {
                    notes.push(format!("minimal cut-off not confirmed below {bound} within budget"));
                }
                return certificate(
                    p,
                    budget,
                    Verdict::Cutoff(minimal.unwrap_or(bound)),
                    true,
                    minimal.is_some(),
                    Justification::ParityPumping {
                        n_even: ne,
                        n_odd: no,
                        trace_even: te,
                        trace_odd: to,
                        path_even: even,
                        path_odd: odd,
                    },
                    notes,
                );
            }
            Ok(SymmetricVerdict::NoCutoff { failed }) => {
                return certificate(
                    p,
                    budget,
                    Verdict::NoCutoff,
                    true,
                    false,
                    Justification::AbstractObstruction { failed },
                    notes,
                );
            }
            Err(EvenOddError::Disconnected(states)) => {
                let names: Vec<&str> = states.iter().map(|&q| p.state_name(q)).collect();
                notes.push(format!(
                    "even-odd procedure skipped: states {} are not on a path from the initial to the final state",
                    names.join(", ")
                ));
            }
            Err(e) => notes.push(format!("even-odd procedure skipped: {e}")),
        }
    }

    let table: Vec<Reachability> = (0..=budget.n_max).map(|n| reachable_final(p, n, &limits)).collect();
    let answers: Vec<Answer> = table.iter().map(Reachability::answer).collect();

    if p.is_leaderless() {
        let pair = (lo..budget.n_max).find(|&n| {
            answers[n as usize] == Answer::Yes && answers[n as usize + 1] == Answer::Yes
        });
        if let Some(n) = pair {
            let bound = n * n;
            let minimal = tighten(lo, bound, |k| match answers.get(k as usize) {
                Some(a) => *a,
                None => reachable_final(p, k, &limits).answer(),
            });
            if minimal.is_none() {
                notes.push(format!("minimal cut-off not confirmed below {bound} within budget"));
            }
            let trace = |k: u32| table[k as usize].trace().expect("answer is yes").clone();
            return certificate(
                p,
                budget,
                Verdict::Cutoff(minimal.unwrap_or(bound).min(bound)),
                true,
                minimal.is_some(),
                Justification::Composition {
                    n,
                    trace_n: trace(n),
                    trace_n1: trace(n + 1),
                    bound,
                },
                notes,
            );
        }
        notes.push(format!(
            "composition procedure found no consecutive witnesses up to n = {}",
            budget.n_max
        ));
    }

    let e = protocol_to_net(p);
    let sp_budget = SinglePlaceBudget {
        n_max: budget.n_max,
        window: budget.window,
        period_max: budget.window + 1,
        include_zero: budget.include_zero,
        uncertified_slack: 2,
    };
    let report = single_place_cutoff_budgeted(&e.net, &e.m0, e.p_f, &sp_budget, &limits);
    for (n, (a, b)) in answers.iter().zip(report.answers()).enumerate() {
        if *a != Answer::Unknown && b != Answer::Unknown && *a != b {
            notes.push(format!("configuration and net searches disagree at n = {n}"));
        }
    }
    let traces_in = |from: u32, to: u32| -> Vec<(u32, Trace)> {
        (from..=to)
            .filter_map(|n| table[n as usize].trace().map(|t| (n, t.clone())))
            .collect()
    };
    match report.outcome {
        SinglePlaceOutcome::CutoffFound { b, verified_to } => {
            // Same criterion on the configuration table, which also carries
            // the witnesses.
            if (b..=verified_to).all(|n| answers[n as usize] == Answer::Yes) {
                return certificate(
                    p,
                    budget,
                    Verdict::Cutoff(b),
                    false,
                    true,
                    Justification::ExhaustiveWindow {
                        table: answers,
                        window: (b, verified_to),
                        traces: traces_in(b, verified_to),
                        obstruction: None,
                    },
                    notes,
                );
            }
        }
        SinglePlaceOutcome::NoCutoffEvidence { base, period, lambda_max } => {
            return certificate(
                p,
                budget,
                Verdict::NoCutoff,
                false,
                false,
                Justification::ExhaustiveWindow {
                    table: answers,
                    window: (lo, budget.n_max),
                    traces: traces_in(lo, budget.n_max),
                    obstruction: Some(Progression {
                        base,
                        period,
                        lambda_max,
                    }),
                },
                notes,
            );
        }
        SinglePlaceOutcome::Unknown => {}
    }
    certificate(
        p,
        budget,
        Verdict::Unknown,
        false,
        false,
        Justification::BudgetExhausted {
            n_max: budget.n_max,
            node_cap: budget.node_cap,
            table: answers,
        },
        notes,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutoffError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("protocol has a leader")]
    NotLeaderless,
    #[error("no witness for n = {0}")]
    MissingWitness(u32),
}

/// The merged forward/reverse net of a leaderless protocol, with the
/// markings `M_0 = 0` and `M^(1) = {q_f: 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleNet {
    pub net: PetriNet,
    pub m0: Marking,
    pub m1: Marking,
    pub p_f: PlaceId,
    pub t_i: TransitionId,
    pub t_i_rev: TransitionId,
}

impl ReversibleNet {
    /// For a run `M_0 ->* M^(1)`, the `t_i` firings count the forward
    /// population and the reversed `t_i` firings the backward one; they
    /// differ by one.
    pub fn populations(&self, seq: &[TransitionId]) -> (u32, u32) {
        let count = |t| seq.iter().filter(|&&s| s == t).count() as u32;
        (count(self.t_i), count(self.t_i_rev))
    }
}

pub fn reduce_reversible(p: &Protocol) -> Result<ReversibleNet, CutoffError> {
    if !p.is_leaderless() {
        return Err(CutoffError::NotLeaderless);
    }
    let q = eliminate_final_outgoing(p)?;
    let e = protocol_to_net(&q);
    let net = merge_final(&e.net, &reverse_net(&e.net), e.p_f)?;
    let t_i_rev = net
        .transition_by_name(&crate::petri::reverse_name("t_i"))
        .expect("reverse generator present");
    Ok(ReversibleNet {
        m0: net.zero_marking(),
        m1: Marking::single(net.num_places(), e.p_f, 1),
        p_f: e.p_f,
        t_i: e.t_i,
        t_i_rev,
        net,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversibleCheck {
    pub forward: CappedSearch,
    pub backward: CappedSearch,
}

impl ReversibleCheck {
    pub fn both_found(&self) -> bool {
        matches!(self.forward, CappedSearch::Found(_)) && matches!(self.backward, CappedSearch::Found(_))
    }
}

/// Both capped searches `M_0 ->* M^(1)` and `M^(1) ->* M_0`. The merged net
/// generally has no token-cap certificate, so a failed search only means
/// "not within `token_cap`".
pub fn reversible_check(r: &ReversibleNet, token_cap: u32, limits: &SearchLimits<'_>) -> ReversibleCheck {
    ReversibleCheck {
        forward: capped_search(&r.net, &r.m0, &r.m1, token_cap, limits),
        backward: capped_search(&r.net, &r.m1, &r.m0, token_cap, limits),
    }
}

/// Runs `tn` and then `tm` on the initial configuration of size `n + m`;
/// the processes not used by the first trace wait in the initial state.
pub fn compose_traces(p: &Protocol, tn: &Trace, tm: &Trace) -> Option<Trace> {
    let n = tn.population(p)?;
    let m = tm.population(p)?;
    let mut steps = tn.steps.clone();
    steps.extend_from_slice(&tm.steps);
    Some(Trace {
        start: initial_config(p, n + m),
        steps,
    })
}

/// Builds the composed witness for `n + m` and replays it.
pub fn composition_check(p: &Protocol, n: u32, m: u32, limits: &SearchLimits<'_>) -> Result<bool, CutoffError> {
    if !p.is_leaderless() {
        return Err(CutoffError::NotLeaderless);
    }
    let witness = |k: u32| match reachable_final(p, k, limits) {
        Reachability::Witness(t) => Ok(t),
        _ => Err(CutoffError::MissingWitness(k)),
    };
    let (tn, tm) = (witness(n)?, witness(m)?);
    let Some(t) = compose_traces(p, &tn, &tm) else { return Ok(false) };
    Ok(t.replay(p).ok() == Some(final_config(p, n + m)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("certificate is for a different protocol")]
    HashMismatch,
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("witness for n = {n} does not replay: {reason}")]
    BadTrace { n: u32, reason: String },
    #[error("lemma precondition: {0}")]
    Precondition(String),
    #[error("verdict does not follow from the evidence: {0}")]
    Verdict(String),
}

fn check_witness(p: &Protocol, t: &Trace, n: u32) -> Result<(), VerifyError> {
    let bad = |reason: String| VerifyError::BadTrace { n, reason };
    if t.population(p) != Some(n) {
        return Err(bad("does not start from the initial configuration".into()));
    }
    let end = t.replay(p).map_err(|e| bad(format!("{e}")))?;
    if end != final_config(p, n) {
        return Err(bad("does not end in the final configuration".into()));
    }
    Ok(())
}

/// Every `n` in `from..to` completes (checked by fresh searches).
fn confirm_range(p: &Protocol, from: u32, to: u32, limits: &SearchLimits<'_>) -> Result<(), VerifyError> {
    for n in from..to {
        if reachable_final(p, n, limits).answer() != Answer::Yes {
            return Err(VerifyError::Verdict(format!("n = {n} is not confirmed to complete")));
        }
    }
    Ok(())
}

/// Independently re-checks a certificate: replays every trace, re-derives
/// the bound from the lemma behind the justification, and re-runs the
/// abstract or gadget searches behind negative verdicts.
pub fn verify_certificate(p: &Protocol, cert: &Certificate, limits: &SearchLimits<'_>) -> Result<(), VerifyError> {
    if cert.protocol_hash != p.digest() {
        return Err(VerifyError::HashMismatch);
    }
    if cert.schema_version != SCHEMA_VERSION {
        return Err(VerifyError::Schema(cert.schema_version));
    }
    let lo = u32::from(!cert.include_zero);
    match &cert.justification {
        Justification::ParityPumping {
            n_even,
            n_odd,
            trace_even,
            trace_odd,
            path_even,
            path_odd,
        } => {
            let cls = classify(p);
            if !cls.symmetric || !cls.connectivity_ok {
                return Err(VerifyError::Precondition("protocol is not symmetric and connected".into()));
            }
            if n_even % 2 != 0 || n_odd % 2 != 1 {
                return Err(VerifyError::Precondition("witness parities are wrong".into()));
            }
            check_witness(p, trace_even, *n_even)?;
            check_witness(p, trace_odd, *n_odd)?;
            let ends = crate::evenodd::abstract_endpoints(p);
            for (path, class) in [(path_even, ParityClass::Even), (path_odd, ParityClass::Odd)] {
                let (a, b) = ends.for_class(class);
                if path.start() != a || path.end() != b || !path.is_consistent(p) {
                    return Err(VerifyError::Precondition(format!("{class:?} abstract path is invalid")));
                }
            }
            let bound = *n_even.max(n_odd);
            match cert.verdict {
                Verdict::Cutoff(b) if b <= bound && b >= lo => confirm_range(p, b, bound, limits),
                _ => Err(VerifyError::Verdict(format!("expected a cut-off of at most {bound}"))),
            }
        }
        Justification::Composition {
            n,
            trace_n,
            trace_n1,
            bound,
        } => {
            if !p.is_leaderless() {
                return Err(VerifyError::Precondition("protocol has a leader".into()));
            }
            let n1 = trace_n1.population(p).unwrap_or(u32::MAX);
            if trace_n.population(p) != Some(*n) || n1 != n + 1 {
                return Err(VerifyError::Precondition("witnesses are not for consecutive populations".into()));
            }
            check_witness(p, trace_n, *n)?;
            check_witness(p, trace_n1, n + 1)?;
            if *bound != n * n {
                return Err(VerifyError::Verdict(format!("bound {bound} is not {n}^2")));
            }
            match cert.verdict {
                Verdict::Cutoff(b) if b <= *bound && b >= lo => confirm_range(p, b, *bound, limits),
                _ => Err(VerifyError::Verdict(format!("expected a cut-off of at most {bound}"))),
            }
        }
        Justification::AbstractObstruction { failed } => {
            if cert.verdict != Verdict::NoCutoff {
                return Err(VerifyError::Verdict("an obstruction implies no cut-off".into()));
            }
            match decide_symmetric_cop(p) {
                Ok(SymmetricVerdict::NoCutoff { failed: f }) if f == *failed => Ok(()),
                Ok(_) => Err(VerifyError::Verdict("abstract witness exists for the failed class".into())),
                Err(e) => Err(VerifyError::Precondition(format!("{e}"))),
            }
        }
        Justification::ExhaustiveWindow {
            table,
            window,
            traces,
            obstruction,
        } => {
            for (n, t) in traces {
                check_witness(p, t, *n)?;
                if table.get(*n as usize) != Some(&Answer::Yes) {
                    return Err(VerifyError::Verdict(format!("table does not mark n = {n} as completing")));
                }
            }
            let has = |n: u32| traces.iter().any(|(k, _)| *k == n);
            match (cert.verdict, obstruction) {
                (Verdict::Cutoff(b), None) => {
                    let (w0, w1) = *window;
                    if w0 != b || w1 < b + 1 || w1 as usize >= table.len() + 1 {
                        return Err(VerifyError::Verdict("window must start at B and hold two witnesses".into()));
                    }
                    if let Some(n) = (w0..=w1).find(|&n| !has(n)) {
                        return Err(VerifyError::Verdict(format!("no witness for n = {n} in the window")));
                    }
                    if b > lo && reachable_final(p, b - 1, limits).answer() != Answer::No {
                        return Err(VerifyError::Verdict(format!("n = {} is not confirmed to fail", b - 1)));
                    }
                    Ok(())
                }
                (Verdict::NoCutoff, Some(pr)) => {
                    if pr.period == 0 {
                        return Err(VerifyError::Precondition("period must be positive".into()));
                    }
                    for lam in 0..=pr.lambda_max {
                        let n = pr.base + lam * pr.period;
                        if (n as usize) < table.len() && reachable_final(p, n, limits).answer() != Answer::No {
                            return Err(VerifyError::Verdict(format!("n = {n} is not confirmed to fail")));
                        }
                    }
                    let e = protocol_to_net(p);
                    let cert_cap = TokenCapCertificate::find(&e.net)
                        .ok_or_else(|| VerifyError::Precondition("encoded net has no token-cap certificate".into()))?;
                    let s = LinearSet {
                        base: e.final_marking(pr.base),
                        periods: alloc::vec![e.final_marking(pr.period)],
                    };
                    let cap = pr.base + pr.lambda_max * pr.period + cert_cap.slack(&e.m0) + 1;
                    match gadget_check(&e.net, &e.m0, &s, cap, limits) {
                        GadgetOutcome::EmptyWithinCap => Ok(()),
                        GadgetOutcome::Intersects(_) => Err(VerifyError::Verdict("progression meets the reachable set".into())),
                        GadgetOutcome::BudgetHit => Err(VerifyError::Verdict("gadget search ran out of budget".into())),
                    }
                }
                _ => Err(VerifyError::Verdict("window evidence does not match the verdict".into())),
            }
        }
        Justification::BudgetExhausted { .. } => match cert.verdict {
            Verdict::Unknown => Ok(()),
            _ => Err(VerifyError::Verdict("an exhausted budget cannot support a verdict".into())),
        },
    }
}
