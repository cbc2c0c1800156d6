//! Uplink fronthaul IQ compression and a distributed-MIMO link-level
//! simulator for measuring what each compression method costs in BLER.

pub mod channel;
pub mod compression;
pub mod iq;
pub mod phy;
pub mod receiver;
pub mod sim;
pub mod wire;
