//! Command implementations behind the `qlie` binary.
//!
//! Commands write human-readable output to a caller-supplied writer and return
//! structured results, so they can be driven in-process as well as from the
//! binary. Exit codes: 0 for a completed run (whatever the verdict), 2 for
//! parse/validation errors, 3 for internal consistency failures.

mod commands;
pub mod files;

pub use commands::{
    cmd_analyze, cmd_demo, cmd_simulate, parse_complex, parse_state_csv, render_report, resolve_tolerances,
    AnalyzeArgs, CliError, DemoArgs, Exit, SimulateArgs, DEMOS, TOOL, VERSION,
};
