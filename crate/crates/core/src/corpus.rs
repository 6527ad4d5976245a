//! Built-in example protocols and nets used by tests, the CLI `gen figs`
//! command, and the bundled text corpus.

use crate::model::{gen_exp_family, Protocol, ProtocolBuilder};
use crate::petri::{Marking, PetriNet, PetriNetBuilder};

/// Leader protocol with cut-off 3: `n = 1` completes through `c` directly,
/// `n = 2` is stuck, every `n >= 3` completes.
pub fn fig1() -> Protocol {
    fig1_builder()
        .recv("q", "a", "q_i")
        .build()
        .expect("fig1 is well-formed")
}

/// [`fig1`] without `(q, ?a, q_i)`: only odd populations complete.
pub fn fig1_variant() -> Protocol {
    fig1_builder().build().expect("fig1 variant is well-formed")
}

fn fig1_builder() -> ProtocolBuilder {
    let mut b = ProtocolBuilder::new();
    b.alphabet(["a", "b", "c", "d"])
        .process_states(["q_i", "q", "q_f"])
        .leader_states(["qLi", "qL", "qLf"])
        .initial("q_i", Some("qLi"))
        .final_states("q_f", Some("qLf"))
        .recv("q_i", "c", "q_f")
        .recv("q_i", "d", "q_f")
        .send("q_i", "d", "q")
        .recv("q", "a", "q")
        .recv("q", "b", "q_f")
        .send("qLi", "a", "qL")
        .send("qL", "b", "qLi")
        .send("qLi", "c", "qLf");
    b
}

/// Leaderless protocol: `n = 1` is stuck, every other `n` completes.
pub fn fig6() -> Protocol {
    ProtocolBuilder::new()
        .alphabet(["a", "b"])
        .process_states(["q_i", "q_f"])
        .initial("q_i", None)
        .final_states("q_f", None)
        .recv("q_i", "a", "q_i")
        .send("q_i", "a", "q_f")
        .send("q_i", "b", "q_f")
        .recv("q_i", "b", "q_f")
        .build()
        .expect("fig6 is well-formed")
}

/// Leaderless family whose cut-off grows exponentially in `k`.
pub fn fig7(k: usize) -> Protocol {
    gen_exp_family(k).expect("k >= 1")
}

/// Two-transition net `p_i -> p_2 + p_3 -> p_f`, with markings
/// `{p_i: 1}` and `{p_f: 1}`.
pub fn fig4_net() -> (PetriNet, Marking, Marking) {
    let mut b = PetriNetBuilder::new();
    b.places(["p_i", "p_2", "p_3", "p_f"])
        .transition("t_1", &[("p_i", 1)], &[("p_2", 1), ("p_3", 1)])
        .transition("t_2", &[("p_2", 1), ("p_3", 1)], &[("p_f", 1)]);
    let net = b.build().expect("fig4 net is well-formed");
    let from = net.marking(&[("p_i", 1)]).unwrap();
    let to = net.marking(&[("p_f", 1)]).unwrap();
    (net, from, to)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_sizes() {
        let p = fig1();
        assert_eq!(p.edges().len(), 9);
        assert_eq!(fig1_variant().edges().len(), 8);
        assert_eq!(fig6().edges().len(), 4);
        assert_eq!(fig7(3).num_states(), 5);
        let (net, from, to) = fig4_net();
        assert_eq!(net.num_places(), 4);
        assert_eq!(net.num_transitions(), 2);
        assert_eq!(from.total(), 1);
        assert_eq!(to.total(), 1);
    }
}
