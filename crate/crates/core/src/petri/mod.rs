//! Petri nets, the encodings between protocols and nets, capped
//! reachability with exactness certificates, flat expressions, linear sets
//! and the single-place cut-off search.

mod encode;
mod flat;
mod net;
mod search;
mod single;

pub use encode::{
    merge_final, net_to_protocol, normalize_markings, protocol_to_net, rdv_transition_name,
    reverse_name, reverse_net, EncodedNet,
};
pub use flat::{
    enumerate_flat_expressions, gadget_check, intersect_gadget, member_flat, search_flat,
    FlatExpression, FlatMembership, Gadget, GadgetOutcome, LinearSet, Segment,
};
pub use net::{
    is_valid_place_name, is_valid_transition_name, Marking, NetError, PetriNet, PetriNetBuilder,
    PlaceId, Transition, TransitionId,
};
pub use search::{
    bounded_reach, bounded_reach_with, capped_search, BoundedReach, CappedSearch,
    TokenCapCertificate,
};
pub use single::{
    single_place_cutoff_budgeted, SinglePlaceBudget, SinglePlaceOutcome, SinglePlaceReport,
};
