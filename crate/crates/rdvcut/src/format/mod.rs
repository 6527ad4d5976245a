//! Text formats for protocols and nets.

pub mod net;
pub mod protocol;

use rdvcut_core::model::ModelError;
use rdvcut_core::petri::NetError;
use thiserror::Error;

pub use net::{parse_net, print_net, NetFile};
pub use protocol::{parse_protocol, print_protocol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{}{source}", line_prefix(*.line))]
    Model { line: Option<usize>, source: ModelError },
    #[error("{}{source}", line_prefix(*.line))]
    Net { line: Option<usize>, source: NetError },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}
