//! Composite scattering analysis: element matrices are aggregated, their
//! terminals tied through ideal junctions, and the inner waves eliminated to
//! leave the scattering matrix seen at the external ports.

mod assemble;
mod format;
mod netlist;
mod reduce;

pub use assemble::{element_fsms, netlist_to_fsm};
pub use format::{format_netlist, parse_netlist};
pub use netlist::{ExternalPort, Netlist, NodeId, GROUND_NAME};
pub use reduce::{
    aggregate_fsm, connection_operator, junction_fsm, open_fsm, reduce_to_external, short_fsm,
    ConnectionMap,
};
