//! Command line and HTTP front end for the proof tutor.

pub mod cli;
pub mod http;
