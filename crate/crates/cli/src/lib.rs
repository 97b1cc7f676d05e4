//! Command-line front end: run scenarios, sweep pointer widths, dump shot
//! ensembles, and produce the reproduction report.

pub mod commands;
pub mod config;
pub mod report;
pub mod synth;

/// Exit code for malformed configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for physically degenerate or unattainable requests.
pub const EXIT_PHYSICS: i32 = 3;

pub fn exit_code_for(err: &weaksim_core::Error) -> i32 {
    if err.is_physics() {
        EXIT_PHYSICS
    } else {
        EXIT_CONFIG
    }
}
