//! The `coupled` command-line tool and its serve-mode engine.

pub mod args;
pub mod commands;
pub mod protocol;
pub mod server;
