//! Budgeted search for a single-place cut-off: the least `B` such that
//! `{p_f: n}` is reachable for every `n >= B`, or evidence that an
//! arithmetic progression of targets is unreachable.

use alloc::vec::Vec;

use super::flat::{gadget_check, GadgetOutcome, LinearSet};
use super::net::{Marking, PetriNet, PlaceId};
use super::search::{bounded_reach_with, BoundedReach, TokenCapCertificate};
use crate::budget::SearchLimits;
use crate::semantics::Answer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SinglePlaceBudget {
    /// Largest population checked individually.
    pub n_max: u32,
    /// A cut-off candidate `B` must be confirmed on `B..=B + window`.
    pub window: u32,
    /// Largest period tried for non-cut-off evidence.
    pub period_max: u32,
    /// Count `n = 0` as a candidate.
    pub include_zero: bool,
    /// Token cap margin above `n + |M_0|` for nets without a certificate.
    pub uncertified_slack: u32,
}

impl Default for SinglePlaceBudget {
    fn default() -> Self {
        SinglePlaceBudget {
            n_max: 12,
            window: 5,
            period_max: 6,
            include_zero: false,
            uncertified_slack: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SinglePlaceOutcome {
    /// Every `n` in `b..=verified_to` is reachable, and `b` is the least
    /// candidate with that property in the table.
    CutoffFound { b: u32, verified_to: u32 },
    /// No marking `{p_f: base + λ period}` with `λ <= lambda_max` is
    /// reachable (exact, from a certified cap).
    NoCutoffEvidence { base: u32, period: u32, lambda_max: u32 },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinglePlaceReport {
    /// Entry `n` answers `{p_f: n} ∈ Reach(M_0)`.
    pub table: Vec<BoundedReach>,
    pub certificate: Option<TokenCapCertificate>,
    pub outcome: SinglePlaceOutcome,
}

impl SinglePlaceReport {
    pub fn answers(&self) -> Vec<Answer> {
        self.table.iter().map(BoundedReach::answer).collect()
    }
}

pub fn single_place_cutoff_budgeted(
    net: &PetriNet,
    m0: &Marking,
    p_f: PlaceId,
    budget: &SinglePlaceBudget,
    limits: &SearchLimits<'_>,
) -> SinglePlaceReport {
    let cert = TokenCapCertificate::find(net);
    let np = net.num_places();
    let target = |n: u32| Marking::single(np, p_f, n);
    let cap_for = |n: u32| match &cert {
        Some(c) => c.cap(m0, &target(n)).max(0) as u32,
        None => n + m0.total() + budget.uncertified_slack,
    };
    let table: Vec<BoundedReach> = (0..=budget.n_max)
        .map(|n| bounded_reach_with(net, cert.as_ref(), m0, &target(n), cap_for(n), limits))
        .collect();
    let answers: Vec<Answer> = table.iter().map(BoundedReach::answer).collect();
    let start = u32::from(!budget.include_zero);

    // Semi-procedure 1: least B whose whole tail of the table is reachable,
    // with at least `window` further confirmations.
    let mut candidate = None;
    for b in (start..=budget.n_max).rev() {
        if answers[b as usize] != Answer::Yes {
            break;
        }
        candidate = Some(b);
    }
    if let Some(b) = candidate {
        if budget.n_max - b >= budget.window {
            return SinglePlaceReport {
                table,
                certificate: cert,
                outcome: SinglePlaceOutcome::CutoffFound {
                    b,
                    verified_to: budget.n_max,
                },
            };
        }
    }

    // Semi-procedure 2: a progression b + λd that the table marks as
    // unreachable, confirmed one period beyond the table by the gadget.
    if let Some(c) = &cert {
        let slack = c.slack(m0);
        for b in start.max(1)..=budget.n_max {
            for d in 1..=budget.period_max {
                if b + d > budget.n_max {
                    break;
                }
                let all_no = (b..=budget.n_max)
                    .step_by(d as usize)
                    .all(|n| answers[n as usize] == Answer::No);
                if !all_no {
                    continue;
                }
                let lambda_max = (budget.n_max - b) / d + 1;
                let s = LinearSet {
                    base: target(b),
                    periods: alloc::vec![target(d)],
                };
                let cap = b + lambda_max * d + slack + 1;
                if gadget_check(net, m0, &s, cap, limits) == GadgetOutcome::EmptyWithinCap {
                    return SinglePlaceReport {
                        table,
                        certificate: cert,
                        outcome: SinglePlaceOutcome::NoCutoffEvidence {
                            base: b,
                            period: d,
                            lambda_max,
                        },
                    };
                }
            }
        }
    }
    SinglePlaceReport {
        table,
        certificate: cert,
        outcome: SinglePlaceOutcome::Unknown,
    }
}
