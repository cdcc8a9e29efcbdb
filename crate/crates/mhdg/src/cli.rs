//! Command-line interface (under construction).

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    eprintln!("not yet implemented");
    2
}
