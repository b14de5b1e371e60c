//! Path-reporting distance oracles, interactive distance preservers, hopsets
//! with small support and interactive emulators for weighted undirected graphs.

pub mod composer;
pub mod emulator;
pub mod gen;
pub mod graph;
pub mod harness;
pub mod hierarchy;
pub mod oracle;
pub mod partial_tz;
pub mod preserver;
pub mod util;
