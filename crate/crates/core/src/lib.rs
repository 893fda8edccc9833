//! Abelian networks: graphs of communicating automata whose final output does
//! not depend on the order in which messages are processed.
//!
//! The crate is organised bottom-up:
//!
//! * [`network`], [`state`] and [`processor`] describe a network: its directed
//!   multigraph, the global alphabet, and the automaton at each vertex.
//! * [`dynamics`] views the whole network as one automaton over
//!   configurations `x.q` (letter counts plus processor states).
//! * [`processors`] holds the builtin processor families (sandpile, rotor,
//!   bootstrap, instruction tapes, oil and water, mobile agents, sinks).
//! * [`engine`] drives executions to completion under pluggable schedulers and
//!   certifies non-halting runs.
//! * [`verify`] samples the abelian axioms and their consequences.
//! * [`optimize`] solves monotone and toppling integer programs with networks.
//! * [`cli`] holds the text formats, raster output and command implementations.

pub mod cli;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod network;
pub mod optimize;
pub mod processor;
pub mod processors;
pub mod state;
pub mod verify;

pub use dynamics::{
    apply_word, collapse_subnetwork, message_count, step, CollapsedProcessor, Configuration,
    MessageCount,
};
pub use engine::{run, run_all_schedulers, run_parallel, Odometer, Policy, RunOptions, RunOutcome};
pub use error::Error;
pub use network::{Alphabet, Edge, LetterId, Network, Topology};
pub use processor::{Behavior, Emission, ProcessError, Processor, Transition};
pub use processors::{ProcessorSpec, SpecError};
pub use state::State;

pub type Result<T, E = Error> = std::result::Result<T, E>;
