//! JSON forms of traces, abstract paths and certificates. Everything refers
//! to states and letters by name so documents stay readable and survive
//! reordering of declarations.

use rdvcut_core::cutoff::{Certificate, Justification, Progression, Verdict};
use rdvcut_core::evenodd::{AbstractPath, AbstractStep, EOConfig, ParityClass, SymEdge};
use rdvcut_core::model::{Action, Edge, Polarity, Protocol, StateId};
use rdvcut_core::semantics::{initial_config, Answer, Step, Trace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DtoError {
    #[error("unknown state `{0}`")]
    State(String),
    #[error("unknown letter `{0}`")]
    Letter(String),
    #[error("bad protocol hash `{0}`")]
    Hash(String),
    #[error("unknown table entry `{0}`")]
    Answer(String),
    #[error("abstract configuration marks leader state `{0}` as odd")]
    OddLeader(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDto {
    pub letter: String,
    pub send: [String; 2],
    pub recv: [String; 2],
}

/// A trace from the initial configuration of population `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDto {
    pub n: u32,
    pub steps: Vec<StepDto>,
}

fn state(p: &Protocol, name: &str) -> Result<StateId, DtoError> {
    p.state_by_name(name).ok_or_else(|| DtoError::State(name.to_string()))
}

pub fn step_to_dto(p: &Protocol, s: &Step) -> StepDto {
    let name = |q| p.state_name(q).to_string();
    StepDto {
        letter: p.letter_name(s.letter()).to_string(),
        send: [name(s.send.src), name(s.send.dst)],
        recv: [name(s.recv.src), name(s.recv.dst)],
    }
}

pub fn step_from_dto(p: &Protocol, d: &StepDto) -> Result<Step, DtoError> {
    let letter = p
        .letter_by_name(&d.letter)
        .ok_or_else(|| DtoError::Letter(d.letter.clone()))?;
    let edge = |ends: &[String; 2], polarity| -> Result<Edge, DtoError> {
        Ok(Edge {
            src: state(p, &ends[0])?,
            action: Action { polarity, letter },
            dst: state(p, &ends[1])?,
        })
    };
    Ok(Step {
        send: edge(&d.send, Polarity::Send)?,
        recv: edge(&d.recv, Polarity::Receive)?,
    })
}

/// Traces that do not start from an initial configuration get `n` from
/// their size; [`trace_from_dto`] always rebuilds an initial start, so such
/// traces fail to replay as witnesses.
pub fn trace_to_dto(p: &Protocol, t: &Trace) -> TraceDto {
    TraceDto {
        n: t.population(p).unwrap_or_else(|| t.start.processes(p)),
        steps: t.steps.iter().map(|s| step_to_dto(p, s)).collect(),
    }
}

pub fn trace_from_dto(p: &Protocol, d: &TraceDto) -> Result<Trace, DtoError> {
    Ok(Trace {
        start: initial_config(p, d.n),
        steps: d.steps.iter().map(|s| step_from_dto(p, s)).collect::<Result<_, _>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EOConfigDto {
    pub leader: Option<String>,
    /// Process states holding an odd number of processes.
    pub odd: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractStepDto {
    pub e: [String; 3],
    pub e_prime: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractPathDto {
    pub steps: Vec<AbstractStepDto>,
    pub configs: Vec<EOConfigDto>,
}

pub fn eo_config_to_dto(p: &Protocol, g: &EOConfig) -> EOConfigDto {
    EOConfigDto {
        leader: g.leader.map(|q| p.state_name(q).to_string()),
        odd: p
            .process_states()
            .filter(|q| g.odd >> q.index() & 1 == 1)
            .map(|q| p.state_name(q).to_string())
            .collect(),
    }
}

fn eo_config_from_dto(p: &Protocol, d: &EOConfigDto) -> Result<EOConfig, DtoError> {
    let mut odd = 0u64;
    for name in &d.odd {
        let q = state(p, name)?;
        if q.index() >= p.num_process_states() {
            return Err(DtoError::OddLeader(name.clone()));
        }
        odd |= 1 << q.index();
    }
    Ok(EOConfig {
        leader: d.leader.as_deref().map(|l| state(p, l)).transpose()?,
        odd,
    })
}

fn sym_to_dto(p: &Protocol, e: &SymEdge) -> [String; 3] {
    [
        p.state_name(e.src).to_string(),
        p.letter_name(e.letter).to_string(),
        p.state_name(e.dst).to_string(),
    ]
}

fn sym_from_dto(p: &Protocol, d: &[String; 3]) -> Result<SymEdge, DtoError> {
    Ok(SymEdge {
        src: state(p, &d[0])?,
        letter: p.letter_by_name(&d[1]).ok_or_else(|| DtoError::Letter(d[1].clone()))?,
        dst: state(p, &d[2])?,
    })
}

pub fn path_to_dto(p: &Protocol, path: &AbstractPath) -> AbstractPathDto {
    AbstractPathDto {
        steps: path
            .steps
            .iter()
            .map(|s| AbstractStepDto {
                e: sym_to_dto(p, &s.e),
                e_prime: sym_to_dto(p, &s.e_prime),
            })
            .collect(),
        configs: path.configs.iter().map(|g| eo_config_to_dto(p, g)).collect(),
    }
}

pub fn path_from_dto(p: &Protocol, d: &AbstractPathDto) -> Result<AbstractPath, DtoError> {
    Ok(AbstractPath {
        steps: d
            .steps
            .iter()
            .map(|s| {
                Ok(AbstractStep {
                    e: sym_from_dto(p, &s.e)?,
                    e_prime: sym_from_dto(p, &s.e_prime)?,
                })
            })
            .collect::<Result<_, DtoError>>()?,
        configs: d.configs.iter().map(|g| eo_config_from_dto(p, g)).collect::<Result<_, _>>()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityDto {
    Even,
    Odd,
}

impl From<ParityClass> for ParityDto {
    fn from(c: ParityClass) -> Self {
        match c {
            ParityClass::Even => ParityDto::Even,
            ParityClass::Odd => ParityDto::Odd,
        }
    }
}

impl From<ParityDto> for ParityClass {
    fn from(c: ParityDto) -> Self {
        match c {
            ParityDto::Even => ParityClass::Even,
            ParityDto::Odd => ParityClass::Odd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressionDto {
    pub base: u32,
    pub period: u32,
    pub lambda_max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum JustificationDto {
    ParityPumping {
        n_even: u32,
        n_odd: u32,
        trace_even: TraceDto,
        trace_odd: TraceDto,
        path_even: AbstractPathDto,
        path_odd: AbstractPathDto,
    },
    Composition {
        n: u32,
        trace_n: TraceDto,
        trace_n1: TraceDto,
        bound: u32,
    },
    AbstractObstruction {
        failed: ParityDto,
    },
    ExhaustiveWindow {
        /// `"y"`, `"n"` or `"?"` for `n = 0, 1, ...`.
        table: Vec<String>,
        window: [u32; 2],
        traces: Vec<TraceDto>,
        obstruction: Option<ProgressionDto>,
    },
    BudgetExhausted {
        n_max: u32,
        node_cap: usize,
        table: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictDto {
    Cutoff { bound: u32 },
    NoCutoff,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDto {
    pub schema_version: u32,
    pub protocol_hash: String,
    pub verdict: VerdictDto,
    pub exact: bool,
    pub minimal: bool,
    pub include_zero: bool,
    pub justification: JustificationDto,
    #[serde(default)]
    pub notes: Vec<String>,
}

pub fn answer_symbol(a: Answer) -> &'static str {
    match a {
        Answer::Yes => "y",
        Answer::No => "n",
        Answer::Unknown => "?",
    }
}

fn answer_from(s: &str) -> Result<Answer, DtoError> {
    match s {
        "y" => Ok(Answer::Yes),
        "n" => Ok(Answer::No),
        "?" => Ok(Answer::Unknown),
        _ => Err(DtoError::Answer(s.to_string())),
    }
}

fn table_to_dto(t: &[Answer]) -> Vec<String> {
    t.iter().map(|a| answer_symbol(*a).to_string()).collect()
}

fn table_from_dto(t: &[String]) -> Result<Vec<Answer>, DtoError> {
    t.iter().map(|s| answer_from(s)).collect()
}

pub fn certificate_to_dto(p: &Protocol, c: &Certificate) -> CertificateDto {
    let tr = |t: &Trace| trace_to_dto(p, t);
    let justification = match &c.justification {
        Justification::ParityPumping {
            n_even,
            n_odd,
            trace_even,
            trace_odd,
            path_even,
            path_odd,
        } => JustificationDto::ParityPumping {
            n_even: *n_even,
            n_odd: *n_odd,
            trace_even: tr(trace_even),
            trace_odd: tr(trace_odd),
            path_even: path_to_dto(p, path_even),
            path_odd: path_to_dto(p, path_odd),
        },
        Justification::Composition {
            n,
            trace_n,
            trace_n1,
            bound,
        } => JustificationDto::Composition {
            n: *n,
            trace_n: tr(trace_n),
            trace_n1: tr(trace_n1),
            bound: *bound,
        },
        Justification::AbstractObstruction { failed } => JustificationDto::AbstractObstruction {
            failed: (*failed).into(),
        },
        Justification::ExhaustiveWindow {
            table,
            window,
            traces,
            obstruction,
        } => JustificationDto::ExhaustiveWindow {
            table: table_to_dto(table),
            window: [window.0, window.1],
            traces: traces.iter().map(|(_, t)| tr(t)).collect(),
            obstruction: obstruction.map(|o| ProgressionDto {
                base: o.base,
                period: o.period,
                lambda_max: o.lambda_max,
            }),
        },
        Justification::BudgetExhausted { n_max, node_cap, table } => JustificationDto::BudgetExhausted {
            n_max: *n_max,
            node_cap: *node_cap,
            table: table_to_dto(table),
        },
    };
    CertificateDto {
        schema_version: c.schema_version,
        protocol_hash: hex::encode(c.protocol_hash),
        verdict: match c.verdict {
            Verdict::Cutoff(b) => VerdictDto::Cutoff { bound: b },
            Verdict::NoCutoff => VerdictDto::NoCutoff,
            Verdict::Unknown => VerdictDto::Unknown,
        },
        exact: c.exact,
        minimal: c.minimal,
        include_zero: c.include_zero,
        justification,
        notes: c.notes.clone(),
    }
}

pub fn certificate_from_dto(p: &Protocol, d: &CertificateDto) -> Result<Certificate, DtoError> {
    let tr = |t: &TraceDto| trace_from_dto(p, t);
    let justification = match &d.justification {
        JustificationDto::ParityPumping {
            n_even,
            n_odd,
            trace_even,
            trace_odd,
            path_even,
            path_odd,
        } => Justification::ParityPumping {
            n_even: *n_even,
            n_odd: *n_odd,
            trace_even: tr(trace_even)?,
            trace_odd: tr(trace_odd)?,
            path_even: path_from_dto(p, path_even)?,
            path_odd: path_from_dto(p, path_odd)?,
        },
        JustificationDto::Composition {
            n,
            trace_n,
            trace_n1,
            bound,
        } => Justification::Composition {
            n: *n,
            trace_n: tr(trace_n)?,
            trace_n1: tr(trace_n1)?,
            bound: *bound,
        },
        JustificationDto::AbstractObstruction { failed } => Justification::AbstractObstruction {
            failed: (*failed).into(),
        },
        JustificationDto::ExhaustiveWindow {
            table,
            window,
            traces,
            obstruction,
        } => Justification::ExhaustiveWindow {
            table: table_from_dto(table)?,
            window: (window[0], window[1]),
            traces: traces
                .iter()
                .map(|t| Ok((t.n, tr(t)?)))
                .collect::<Result<_, DtoError>>()?,
            obstruction: obstruction.map(|o| Progression {
                base: o.base,
                period: o.period,
                lambda_max: o.lambda_max,
            }),
        },
        JustificationDto::BudgetExhausted { n_max, node_cap, table } => Justification::BudgetExhausted {
            n_max: *n_max,
            node_cap: *node_cap,
            table: table_from_dto(table)?,
        },
    };
    let bytes = hex::decode(&d.protocol_hash).map_err(|_| DtoError::Hash(d.protocol_hash.clone()))?;
    let protocol_hash: [u8; 32] = bytes
        .try_into()
        .map_err(|_| DtoError::Hash(d.protocol_hash.clone()))?;
    Ok(Certificate {
        schema_version: d.schema_version,
        protocol_hash,
        verdict: match d.verdict {
            VerdictDto::Cutoff { bound } => Verdict::Cutoff(bound),
            VerdictDto::NoCutoff => Verdict::NoCutoff,
            VerdictDto::Unknown => Verdict::Unknown,
        },
        exact: d.exact,
        minimal: d.minimal,
        include_zero: d.include_zero,
        justification,
        notes: d.notes.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdvcut_core::cutoff::{decide, verify_certificate, Budget};
    use rdvcut_core::model::ProtocolBuilder;
    use rdvcut_core::semantics::reachable_final;
    use rdvcut_core::{corpus, NoClock};
    use rdvcut_core::budget::SearchLimits;

    fn round_trip(p: &Protocol) {
        let c = decide(p, &Budget::default(), &NoClock);
        let text = serde_json::to_string_pretty(&certificate_to_dto(p, &c)).unwrap();
        let back: CertificateDto = serde_json::from_str(&text).unwrap();
        let c2 = certificate_from_dto(p, &back).unwrap();
        assert_eq!(c2, c);
        assert_eq!(verify_certificate(p, &c2, &SearchLimits::default()), Ok(()));
    }

    #[test]
    fn certificates_round_trip() {
        round_trip(&corpus::fig1());
        round_trip(&corpus::fig6());
        round_trip(&corpus::fig1_variant());
        let sym = ProtocolBuilder::new()
            .alphabet(["a", "b"])
            .process_states(["q_i", "q_f"])
            .initial("q_i", None)
            .final_states("q_f", None)
            .sym("q_i", "a", "q_f")
            .sym("q_i", "b", "q_i")
            .sym("q_i", "b", "q_f")
            .build()
            .unwrap();
        round_trip(&sym);
    }

    #[test]
    fn trace_schema() {
        let p = corpus::fig1();
        let t = reachable_final(&p, 3, &SearchLimits::default()).trace().unwrap().clone();
        let v = serde_json::to_value(trace_to_dto(&p, &t)).unwrap();
        assert_eq!(v["n"], 3);
        let first = &v["steps"][0];
        assert!(first["letter"].is_string());
        assert_eq!(first["send"].as_array().unwrap().len(), 2);
        assert_eq!(first["recv"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let p = corpus::fig6();
        let d = StepDto {
            letter: "zz".into(),
            send: ["q_i".into(), "q_f".into()],
            recv: ["q_i".into(), "q_f".into()],
        };
        assert_eq!(step_from_dto(&p, &d), Err(DtoError::Letter("zz".into())));
    }

    #[test]
    fn tagged_json() {
        let p = corpus::fig6();
        let c = decide(&p, &Budget::default(), &NoClock);
        let v = serde_json::to_value(certificate_to_dto(&p, &c)).unwrap();
        assert_eq!(v["justification"]["tag"], "composition");
        assert_eq!(v["verdict"]["kind"], "cutoff");
        assert_eq!(v["verdict"]["bound"], 2);
        assert_eq!(v["protocol_hash"].as_str().unwrap().len(), 64);
    }
}
