use alloc::format;
use alloc::vec::Vec;

use super::{DensityMatrix, PureState};
use crate::error::{Error, Invariant, Result};
use crate::qmat::ComplexMatrix;
use crate::tol::Tolerances;

/// One member of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl Member {
    pub fn density(&self) -> DensityMatrix {
        match self {
            Member::Pure(p) => p.density(),
            Member::Mixed(m) => m.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            Member::Pure(p) => Some(p),
            Member::Mixed(_) => None,
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            Member::Pure(p) => p.dims(),
            Member::Mixed(m) => m.dims(),
        }
    }

    fn matrix(&self) -> ComplexMatrix {
        match self {
            Member::Pure(p) => ComplexMatrix::projector(p.amplitudes()),
            Member::Mixed(m) => m.matrix().clone(),
        }
    }
}

/// A weighted ensemble realizing `target`: `Σ p_i ρ_i = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    members: Vec<(f64, Member)>,
    target: DensityMatrix,
}

impl Decomposition {
    /// Checks positive weights summing to one and reconstruction of the
    /// target in Frobenius norm.
    pub fn new(members: Vec<(f64, Member)>, target: DensityMatrix) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        if members.is_empty() {
            return Err(Error::validation(Invariant::Weights, 0.0));
        }
        if let Some((_, m)) = members.iter().find(|(_, m)| m.dims() != target.dims()) {
            return Err(Error::Dimension(format!(
                "member dims {:?} differ from target dims {:?}",
                m.dims(),
                target.dims()
            )));
        }
        if let Some(&(w, _)) = members.iter().find(|(w, _)| !(*w > 0.0)) {
            return Err(Error::validation(Invariant::Weights, w));
        }
        let sum: f64 = members.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > tol.structural {
            return Err(Error::validation(Invariant::Weights, sum));
        }
        let residual = (&mix(&members) - target.matrix()).frobenius_norm();
        if residual > tol.reconstruction {
            return Err(Error::validation(Invariant::Reconstruction, residual));
        }
        Ok(Self { members, target })
    }

    /// Decomposition of whatever state the members mix to.
    pub fn from_members(members: Vec<(f64, Member)>) -> Result<Self> {
        let dims = members
            .first()
            .map(|(_, m)| m.dims().to_vec())
            .ok_or(Error::validation(Invariant::Weights, 0.0))?;
        let target = DensityMatrix::new(mix(&members), &dims)?;
        Self::new(members, target)
    }

    /// Pure-member convenience constructor.
    pub fn pure(members: Vec<(f64, PureState)>) -> Result<Self> {
        Self::from_members(members.into_iter().map(|(w, p)| (w, Member::Pure(p))).collect())
    }

    pub fn members(&self) -> &[(f64, Member)] {
        &self.members
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|(w, _)| *w).collect()
    }

    pub fn is_pure(&self) -> bool {
        self.members.iter().all(|(_, m)| m.as_pure().is_some())
    }

    /// Pure members, or a type error naming `context` if any is mixed.
    pub fn pure_members(&self, context: &'static str) -> Result<Vec<(f64, &PureState)>> {
        self.members
            .iter()
            .map(|(w, m)| m.as_pure().map(|p| (*w, p)).ok_or(Error::MixedMembers(context)))
            .collect()
    }

    /// `‖Σ p_i ρ_i − target‖_F`.
    pub fn reconstruction_residual(&self) -> f64 {
        (&mix(&self.members) - self.target.matrix()).frobenius_norm()
    }
}

fn mix(members: &[(f64, Member)]) -> ComplexMatrix {
    let n = members[0].1.matrix().rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (w, m) in members {
        acc = &acc + &m.matrix().scale(*w);
    }
    acc
}
