use proptest::prelude::*;
use rdvcut_core::budget::SearchLimits;
use rdvcut_core::evenodd::{eo_step, EOConfig, SymEdge};
use rdvcut_core::model::{classify, eliminate_final_outgoing, Polarity, Protocol, ProtocolBuilder, Role};
use rdvcut_core::petri::{bounded_reach, protocol_to_net, reverse_net, TokenCapCertificate};
use rdvcut_core::semantics::{enabled_steps, initial_config, reachable_final, Answer};

const PROC: [&str; 4] = ["q_i", "q1", "q2", "q_f"];
const LEAD: [&str; 3] = ["qLi", "qL1", "qLf"];
const LETTERS: [&str; 2] = ["a", "b"];

/// (src, send?, letter, dst) over the first `k` names.
type RawEdge = (usize, bool, usize, usize);

fn protocol(np: usize, nl: usize, sym: bool, pe: &[RawEdge], le: &[RawEdge]) -> Protocol {
    let pnames: Vec<&str> = if np == 4 { PROC.to_vec() } else { [&PROC[..np - 1], &PROC[3..]].concat() };
    let mut b = ProtocolBuilder::new();
    b.alphabet(LETTERS).process_states(pnames.iter().copied());
    if nl == 0 {
        b.initial("q_i", None).final_states("q_f", None);
    } else {
        let lnames: Vec<&str> = if nl == 3 { LEAD.to_vec() } else { vec!["qLi", "qLf"] };
        b.leader_states(lnames.iter().copied());
        b.initial("q_i", Some("qLi")).final_states("q_f", Some("qLf"));
        for &(s, send, a, d) in le {
            let (s, d) = (lnames[s % nl], lnames[d % nl]);
            if sym {
                b.sym(s, LETTERS[a], d);
            } else {
                b.edge(s, if send { Polarity::Send } else { Polarity::Receive }, LETTERS[a], d);
            }
        }
    }
    for &(s, send, a, d) in pe {
        let (s, d) = (pnames[s % np], pnames[d % np]);
        if sym {
            b.sym(s, LETTERS[a], d);
        } else {
            b.edge(s, if send { Polarity::Send } else { Polarity::Receive }, LETTERS[a], d);
        }
    }
    b.build().unwrap()
}

fn raw_edges(max: usize) -> impl Strategy<Value = Vec<RawEdge>> {
    prop::collection::vec((0..4usize, any::<bool>(), 0..2usize, 0..4usize), 0..max)
}

fn arb_protocol(sym: bool) -> impl Strategy<Value = Protocol> {
    (2..=4usize, prop_oneof![Just(0usize), Just(2), Just(3)], raw_edges(7), raw_edges(4))
        .prop_map(move |(np, nl, pe, le)| protocol(np, nl, sym, &pe, &le))
}

fn arb_leaderless(sym: bool) -> impl Strategy<Value = Protocol> {
    (2..=4usize, raw_edges(7)).prop_map(move |(np, pe)| protocol(np, 0, sym, &pe, &[]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_replay_and_match_the_net(p in arb_protocol(false), n in 0u32..4) {
        let r = reachable_final(&p, n, &SearchLimits::default());
        if let Some(t) = r.trace() {
            prop_assert_eq!(t.witnesses(&p), Some(n));
        }
        let e = protocol_to_net(&p);
        let b = bounded_reach(&e.net, &e.m0, &e.final_marking(n), n + 1, &SearchLimits::default());
        prop_assert_eq!(r.answer(), b.answer());
    }

    #[test]
    fn steps_preserve_population(p in arb_protocol(false), n in 1u32..5) {
        let c = initial_config(&p, n);
        for (s, c2) in enabled_steps(&p, &c) {
            prop_assert!(s.is_wellformed(&p));
            prop_assert_eq!(c2.size(), c.size());
            prop_assert!(c2.is_valid_for(&p));
        }
    }

    #[test]
    fn reversal_is_an_involution(p in arb_protocol(false)) {
        let e = protocol_to_net(&p);
        prop_assert_eq!(reverse_net(&reverse_net(&e.net)), e.net);
    }

    #[test]
    fn certificate_holds_on_encoded_nets(p in arb_protocol(false)) {
        let e = protocol_to_net(&p);
        let c = TokenCapCertificate::find(&e.net).expect("protocol nets are certified");
        prop_assert!(c.holds_for(&e.net));
        // Never looser than the structural bound; tighter when some process
        // places can only lose tokens.
        for n in 0..4 {
            prop_assert!(c.cap(&e.m0, &e.final_marking(n)) <= i64::from(n) + i64::from(!p.is_leaderless()));
        }
    }

    #[test]
    fn abstraction_commutes_with_steps(p in arb_protocol(true), n in 1u32..5) {
        prop_assume!(classify(&p).symmetric);
        let c = initial_config(&p, n);
        let g = EOConfig::of_config(&p, &c);
        for (s, c2) in enabled_steps(&p, &c) {
            let (mut e, mut e2) = (SymEdge::from_edge(&s.send), SymEdge::from_edge(&s.recv));
            if p.role(e2.src) == Role::Leader {
                std::mem::swap(&mut e, &mut e2);
            }
            let h = eo_step(&p, &g, &e, &e2).unwrap();
            prop_assert_eq!(h, Some(EOConfig::of_config(&p, &c2)));
        }
    }

    #[test]
    fn final_outgoing_elimination_preserves_answers(p in arb_leaderless(false)) {
        prop_assume!(p.initial() != p.final_state());
        let q = eliminate_final_outgoing(&p).unwrap();
        prop_assert!(!q.edges().iter().any(|e| e.src == q.final_state()));
        for n in 0..5 {
            let a = reachable_final(&p, n, &SearchLimits::default()).answer();
            let b = reachable_final(&q, n, &SearchLimits::default()).answer();
            prop_assert_ne!(a, Answer::Unknown);
            prop_assert_eq!(a, b, "n = {}", n);
        }
    }
}
