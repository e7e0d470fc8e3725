//! Command-line front end for the `lognls` laboratory.

pub mod commands;
pub mod config;
