//! Library side of the votekit command-line tool: trace serialization,
//! report building and the command implementations.

pub mod commands;
pub mod report;
pub mod trace;
