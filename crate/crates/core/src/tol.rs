//! The single tolerance record shared by every structural check.

/// Numerical thresholds used across the crate.
///
/// Structural checks (Hermiticity, trace, positivity, unitarity, POVM
/// completeness, ensemble weights) all use `structural`. Eigenvalues at or
/// below `eig_cutoff` count as zero for rank, support and `0 log 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub eig_cutoff: f64,
    pub reconstruction: f64,
    pub norm: f64,
    /// Slack below zero but above `-tie` counts as a numerical tie.
    pub tie: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        structural: 1e-10,
        eig_cutoff: 1e-12,
        reconstruction: 1e-8,
        norm: 1e-12,
        tie: 1e-4,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
