//! Result records shared by the optimizers.

use crate::measures::Ebits;

/// How a reported value relates to the exact quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Exact,
    /// A local minimizer's value: at or above the true minimum.
    UpperBoundOfMin,
    /// A local maximizer's value: at or below the true maximum.
    LowerBoundOfMax,
    /// Certified by a dual bracket to lie at or below the true minimum.
    CertifiedLower,
}

impl Bound {
    pub fn flag(self) -> &'static str {
        match self {
            Bound::Exact => "exact",
            Bound::UpperBoundOfMin => "upper-bound-of-min",
            Bound::LowerBoundOfMax => "lower-bound-of-max",
            Bound::CertifiedLower => "certified-lower",
        }
    }
}

/// Multi-start optimizer bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub restarts: usize,
    pub best_restart: usize,
    pub converged_restarts: usize,
    pub iterations: usize,
    /// Gradient norm at the best restart's final iterate.
    pub residual: f64,
    /// Best and worst final values across restarts.
    pub best: f64,
    pub worst: f64,
    /// Number of free ensemble terms (`k` for decompositions, `m` for ansätze).
    pub size: usize,
}

impl Diagnostics {
    pub fn spread(&self) -> f64 {
        (self.worst - self.best).abs()
    }
}

/// Named measure value with its optimizer diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureValue {
    pub value: Ebits,
    pub bound: Bound,
    pub diagnostics: Option<Diagnostics>,
}
