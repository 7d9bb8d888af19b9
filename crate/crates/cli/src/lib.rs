//! File formats and command-line driver for the clearing engine.

pub mod args;
pub mod commands;
pub mod io;
pub mod lpfile;
pub mod output;
pub mod profile;
