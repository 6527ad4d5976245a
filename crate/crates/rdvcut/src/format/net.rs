//! Line-based Petri net format.
//!
//! ```text
//! places: p_i p_2 p_3 p_f
//! transition: t_1 pre p_i:1 post p_2:1 p_3:1
//! marking init: p_i:1
//! ```
//!
//! A place without `:k` has multiplicity 1. Markings are named and may be
//! empty.

use std::fmt::Write as _;

use rdvcut_core::petri::{Marking, PetriNet, PetriNetBuilder, TransitionId};

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetFile {
    pub net: PetriNet,
    pub markings: Vec<(String, Marking)>,
}

impl NetFile {
    pub fn marking(&self, label: &str) -> Option<&Marking> {
        self.markings.iter().find(|(l, _)| l == label).map(|(_, m)| m)
    }
}

fn arc(tok: &str, line: usize) -> Result<(&str, u32), ParseError> {
    match tok.split_once(':') {
        None => Ok((tok, 1)),
        Some((p, k)) => k.parse().map(|k| (p, k)).map_err(|_| ParseError::Syntax {
            line,
            msg: format!("bad multiplicity in `{tok}`"),
        }),
    }
}

pub fn parse_net(text: &str) -> Result<NetFile, ParseError> {
    let mut b = PetriNetBuilder::new();
    let mut raw_markings: Vec<(String, Vec<(String, u32)>, usize)> = Vec::new();
    let mut seen_places = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |msg: String| ParseError::Syntax { line, msg };
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| syntax(format!("expected `<keyword>: ...`, got `{content}`")))?;
        let toks: Vec<&str> = rest.split_whitespace().collect();
        let key = key.trim();
        if key == "places" {
            if seen_places {
                return Err(syntax("`places:` repeated".into()));
            }
            seen_places = true;
            b.places(toks.iter().copied());
        } else if key == "transition" {
            let Some((name, tail)) = toks.split_first() else {
                return Err(syntax("transition needs a name".into()));
            };
            let mut pre = Vec::new();
            let mut post = Vec::new();
            let mut side: Option<&mut Vec<(&str, u32)>> = None;
            for t in tail {
                match *t {
                    "pre" => side = Some(&mut pre),
                    "post" => side = Some(&mut post),
                    _ => match side.as_deref_mut() {
                        Some(v) => v.push(arc(t, line)?),
                        None => return Err(syntax(format!("arc `{t}` before `pre` or `post`"))),
                    },
                }
            }
            b.transition(name, &pre, &post);
        } else if let Some(label) = key.strip_prefix("marking") {
            let label = label.trim();
            if label.is_empty() {
                return Err(syntax("marking needs a label".into()));
            }
            let entries = toks
                .iter()
                .map(|t| arc(t, line).map(|(p, k)| (p.to_string(), k)))
                .collect::<Result<_, _>>()?;
            raw_markings.push((label.to_string(), entries, line));
        } else {
            return Err(syntax(format!("unknown keyword `{key}`")));
        }
    }
    let net = b.build().map_err(|source| ParseError::Net { line: None, source })?;
    let mut markings: Vec<(String, Marking)> = Vec::new();
    for (label, entries, line) in raw_markings {
        if markings.iter().any(|(l, _)| *l == label) {
            return Err(ParseError::Syntax {
                line,
                msg: format!("marking `{label}` repeated"),
            });
        }
        let borrowed: Vec<(&str, u32)> = entries.iter().map(|(p, k)| (p.as_str(), *k)).collect();
        let m = net.marking(&borrowed).map_err(|source| ParseError::Net {
            line: Some(line),
            source,
        })?;
        markings.push((label, m));
    }
    Ok(NetFile { net, markings })
}

fn arcs(net: &PetriNet, m: &Marking) -> String {
    m.support()
        .map(|(p, k)| format!(" {}:{k}", net.place_name(p)))
        .collect()
}

pub fn print_net(net: &PetriNet, markings: &[(&str, &Marking)]) -> String {
    let mut s = String::new();
    let places: Vec<&str> = net.places().map(|p| net.place_name(p)).collect();
    let _ = writeln!(s, "places: {}", places.join(" "));
    for t in net.transitions() {
        let _ = writeln!(
            s,
            "transition: {} pre{} post{}",
            net.transition_name(t),
            arcs(net, net.pre(t)),
            arcs(net, net.post(t))
        );
    }
    for (label, m) in markings {
        let _ = writeln!(s, "marking {label}:{}", arcs(net, m));
    }
    s
}

pub fn print_sequence(net: &PetriNet, seq: &[TransitionId]) -> Vec<String> {
    seq.iter().map(|&t| net.transition_name(t).to_string()).collect()
}

pub fn parse_sequence(net: &PetriNet, names: &[String]) -> Result<Vec<TransitionId>, ParseError> {
    names
        .iter()
        .map(|n| {
            net.transition_by_name(n).ok_or_else(|| ParseError::Net {
                line: None,
                source: rdvcut_core::petri::NetError::UnknownTransition(n.clone()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdvcut_core::corpus;
    use rdvcut_core::petri::protocol_to_net;

    #[test]
    fn parses_fig4() {
        let text = "places: p_i p_2 p_3 p_f\n\
                    transition: t_1 pre p_i post p_2:1 p_3:1\n\
                    transition: t_2 pre p_2 p_3 post p_f:1\n\
                    marking init: p_i:1\n\
                    marking fin: p_f\n";
        let f = parse_net(text).unwrap();
        let (net, from, to) = corpus::fig4_net();
        assert_eq!(f.net, net);
        assert_eq!(f.marking("init"), Some(&from));
        assert_eq!(f.marking("fin"), Some(&to));
    }

    #[test]
    fn round_trips_encoded_nets() {
        for p in [corpus::fig1(), corpus::fig6()] {
            let e = protocol_to_net(&p);
            let text = print_net(&e.net, &[("m0", &e.m0), ("final3", &e.final_marking(3))]);
            let f = parse_net(&text).unwrap();
            assert_eq!(f.net, e.net);
            assert_eq!(f.marking("m0"), Some(&e.m0));
            assert_eq!(f.marking("final3"), Some(&e.final_marking(3)));
        }
    }

    #[test]
    fn empty_pre_and_marking() {
        let f = parse_net("places: p\ntransition: gen pre post p:2\nmarking zero:\n").unwrap();
        assert!(f.net.pre(f.net.transitions().next().unwrap()).is_zero());
        assert!(f.marking("zero").unwrap().is_zero());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_net("places: p\ntransition: t p:1\n"), Err(ParseError::Syntax { line: 2, .. })));
        assert!(matches!(parse_net("places: p\ntransition: t pre p:x\n"), Err(ParseError::Syntax { line: 2, .. })));
        assert!(matches!(parse_net("places: p\nmarking m: r:1\n"), Err(ParseError::Net { line: Some(2), .. })));
        assert!(matches!(parse_net("places: p p\n"), Err(ParseError::Net { line: None, .. })));
        assert!(matches!(parse_net("arcs: p\n"), Err(ParseError::Syntax { line: 1, .. })));
    }
}
