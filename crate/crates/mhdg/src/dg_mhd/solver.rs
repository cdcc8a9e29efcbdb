//! Fixed-point solver for the coupled system (under construction).

/// Placeholder.
pub struct DgSolution;
/// Placeholder.
pub struct PicardOptions;
/// Placeholder.
pub struct PicardReport;

/// Placeholder.
pub fn solve_linearized() {}
/// Placeholder.
pub fn picard_solve() {}
