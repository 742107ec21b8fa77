//! Graceful labelings of rooted trees built from a star by leaf transfers.

pub mod attainable;
pub mod automaton;
pub mod classify;
pub mod constructors;
pub mod oracle;
pub mod transfer;
pub mod tree;
pub mod walk;
