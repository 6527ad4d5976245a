//! Line-based protocol format.
//!
//! ```text
//! alphabet: a b c
//! process: q_i q q_f
//! leader: qLi qL qLf        # omitted for leaderless protocols
//! init: q_i qLi
//! final: q_f qLf
//! edge: q_i ?c q_f
//! sym: q a q_f              # both (q, !a, q_f) and (q, ?a, q_f)
//! ```
//!
//! Sections appear in this order; `edge:` and `sym:` lines repeat.

use std::fmt::Write as _;

use rdvcut_core::model::{ModelError, Polarity, Protocol, ProtocolBuilder};

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Alphabet,
    Process,
    Leader,
    Init,
    Final,
    Edges,
}

fn section(key: &str) -> Option<Section> {
    Some(match key {
        "alphabet" => Section::Alphabet,
        "process" => Section::Process,
        "leader" => Section::Leader,
        "init" => Section::Init,
        "final" => Section::Final,
        "edge" | "sym" => Section::Edges,
        _ => return None,
    })
}

pub fn parse_protocol(text: &str) -> Result<Protocol, ParseError> {
    let mut b = ProtocolBuilder::new();
    let mut last: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |msg: String| ParseError::Syntax { line, msg };
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| syntax(format!("expected `<section>: ...`, got `{content}`")))?;
        let key = key.trim();
        let sec = section(key).ok_or_else(|| syntax(format!("unknown section `{key}`")))?;
        match last {
            Some(prev) if prev > sec => {
                return Err(syntax(format!("section `{key}` out of order")));
            }
            Some(prev) if prev == sec && sec != Section::Edges => {
                return Err(syntax(format!("section `{key}` repeated")));
            }
            _ => {}
        }
        last = Some(sec);
        let toks: Vec<&str> = rest.split_whitespace().collect();
        b.set_origin(line);
        match sec {
            Section::Alphabet => {
                b.alphabet(toks.iter().copied());
            }
            Section::Process => {
                b.process_states(toks.iter().copied());
            }
            Section::Leader => {
                b.leader_states(toks.iter().copied());
            }
            Section::Init | Section::Final => {
                let (proc_, lead) = match toks.as_slice() {
                    [q] => (*q, None),
                    [q, l] => (*q, Some(*l)),
                    _ => return Err(syntax(format!("`{key}:` takes a process state and an optional leader state"))),
                };
                if sec == Section::Init {
                    b.initial(proc_, lead);
                } else {
                    b.final_states(proc_, lead);
                }
            }
            Section::Edges => {
                let [src, act, dst] = toks.as_slice() else {
                    return Err(syntax(format!("`{key}:` takes exactly three fields")));
                };
                if key == "sym" {
                    b.sym(src, act, dst);
                } else {
                    let (polarity, letter) = if let Some(l) = act.strip_prefix('!') {
                        (Polarity::Send, l)
                    } else if let Some(l) = act.strip_prefix('?') {
                        (Polarity::Receive, l)
                    } else {
                        return Err(syntax(format!("action `{act}` must start with `!` or `?`")));
                    };
                    b.edge(src, polarity, letter, dst);
                }
            }
        }
    }
    b.build().map_err(|e: ModelError| ParseError::Model {
        line: e.origin(),
        source: e,
    })
}

/// Canonical text form; symmetric edge pairs print as `sym:` lines.
pub fn print_protocol(p: &Protocol) -> String {
    let mut s = String::new();
    let names = |it: &mut dyn Iterator<Item = &str>| it.collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "alphabet: {}", names(&mut p.letters().map(|a| p.letter_name(a))));
    let _ = writeln!(s, "process: {}", names(&mut p.process_states().map(|q| p.state_name(q))));
    match p.leader() {
        Some(l) => {
            let _ = writeln!(s, "leader: {}", names(&mut p.leader_states().map(|q| p.state_name(q))));
            let _ = writeln!(s, "init: {} {}", p.state_name(p.initial()), p.state_name(l.init));
            let _ = writeln!(s, "final: {} {}", p.state_name(p.final_state()), p.state_name(l.fin));
        }
        None => {
            let _ = writeln!(s, "init: {}", p.state_name(p.initial()));
            let _ = writeln!(s, "final: {}", p.state_name(p.final_state()));
        }
    }
    for e in p.edges() {
        let mut dual = *e;
        dual.action.polarity = e.action.polarity.dual();
        let paired = p.has_edge(&dual);
        let (src, a, dst) = (p.state_name(e.src), p.letter_name(e.action.letter), p.state_name(e.dst));
        match (paired, e.action.polarity) {
            (true, Polarity::Send) => {
                let _ = writeln!(s, "sym: {src} {a} {dst}");
            }
            (true, Polarity::Receive) => {}
            (false, pol) => {
                let _ = writeln!(s, "edge: {src} {}{a} {dst}", pol.symbol());
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdvcut_core::corpus;
    use rdvcut_core::model::classify;

    const FIG1: &str = "\
# leader protocol with cut-off 3
alphabet: a b c d
process: q_i q q_f
leader: qLi qL qLf
init: q_i qLi
final: q_f qLf
edge: q_i ?c q_f
edge: q_i ?d q_f
edge: q_i !d q
edge: q ?a q
edge: q ?b q_f
edge: q ?a q_i
edge: qLi !a qL
edge: qL !b qLi
edge: qLi !c qLf
";

    #[test]
    fn parses_fig1() {
        let p = parse_protocol(FIG1).unwrap();
        assert_eq!(p, corpus::fig1());
        assert_eq!((p.num_process_states(), p.num_leader_states(), p.num_letters()), (3, 3, 4));
    }

    #[test]
    fn round_trips_corpus() {
        for p in [corpus::fig1(), corpus::fig1_variant(), corpus::fig6(), corpus::fig7(2)] {
            assert_eq!(parse_protocol(&print_protocol(&p)).unwrap(), p);
        }
    }

    #[test]
    fn degenerate_protocol() {
        let p = parse_protocol("alphabet:\nprocess: q\ninit: q\nfinal: q\n").unwrap();
        assert!(p.is_leaderless());
        assert_eq!(p.initial(), p.final_state());
    }

    #[test]
    fn sym_lines_give_symmetric_protocols() {
        let p = parse_protocol("alphabet: a\nprocess: q_i q_f\ninit: q_i\nfinal: q_f\nsym: q_i a q_f\n").unwrap();
        assert_eq!(p.edges().len(), 2);
        assert!(classify(&p).symmetric);
        assert!(print_protocol(&p).contains("sym: q_i a q_f"));
    }

    #[test]
    fn errors_carry_lines() {
        let cross = "alphabet: a\nprocess: q_i q_f\nleader: qLi qLf\ninit: q_i qLi\nfinal: q_f qLf\nedge: q_i !a qLi\n";
        let e = parse_protocol(cross).unwrap_err();
        assert!(matches!(e, ParseError::Model { line: Some(6), source: ModelError::CrossPartition { .. } }), "{e}");

        let e = parse_protocol("alphabet: a\nprocess: q\ninit: q\nfinal: q\nedge: q a q\n").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 5, .. }));

        let e = parse_protocol("process: q\nalphabet: a\n").unwrap_err();
        assert!(e.to_string().contains("out of order"));

        let e = parse_protocol("alphabet: a a\nprocess: q\ninit: q\nfinal: q\n").unwrap_err();
        assert!(matches!(e, ParseError::Model { line: Some(1), source: ModelError::Duplicate { .. } }));

        let e = parse_protocol("alphabet: a\nprocess: q\ninit: q\nfinal: q\nedge: q !b q\n").unwrap_err();
        assert!(e.to_string().starts_with("line 5:"), "{e}");
    }
}
