//! Library backing the `symreg` binary: the project configuration format
//! and the subcommand implementations.
//!
//! Each subcommand is a pure function of the files on disk, the parsed
//! [`config::ProjectConfig`], and the seed it carries, so rerunning a
//! command over unchanged inputs rewrites byte-identical artifacts. The
//! binary itself only parses arguments, applies flag overrides to the
//! config, and maps errors onto exit codes.

pub mod commands;
pub mod config;
