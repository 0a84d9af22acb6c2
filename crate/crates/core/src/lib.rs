//! Passenger-flow simulation for an airport immigration hall.
//!
//! The crate covers the whole pipeline: ingesting flight, immigration-stamp
//! and Wi-Fi logs ([`ingest`]), calibrating walk-speed and service-rate
//! models ([`calibrate`]), running the discrete-event simulation
//! ([`engine`]), and summarising results ([`analyze`]). The [`cli`] module
//! wires these stages into the `paxflow` command.

pub mod analyze;
pub mod calibrate;
pub mod cli;
pub mod engine;
pub mod ingest;
pub mod staffing;
pub mod time;
