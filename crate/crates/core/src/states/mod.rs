//! Validated quantum states: density matrices, pure states, Schmidt forms,
//! decompositions and memory extensions.

mod ensemble;
mod extension;
mod families;
mod schmidt;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Invariant, Result};
use crate::qmat::{self, herm_eig_unchecked, ComplexMatrix, HermitianEigen, C64};
use crate::tol::Tolerances;

pub use ensemble::{Decomposition, Member};
pub use extension::{canonical_extension, pure_extension, purify, MemoryExtendedState, MemoryKind};
pub use families::{
    bell_state, gen_bell_diagonal, gen_random_density, gen_random_density_with, gen_random_pure,
    gen_random_pure_with, gen_werner, singlet, Bell,
};
pub use schmidt::{schmidt, SchmidtForm};

/// Hermitian, positive semidefinite, unit-trace operator together with its
/// subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

/// Checks every density-matrix invariant; see [`DensityMatrix::with_tolerances`].
pub fn validate_density(matrix: ComplexMatrix, dims: &[usize]) -> Result<DensityMatrix> {
    DensityMatrix::new(matrix, dims)
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: &[usize]) -> Result<Self> {
        Self::with_tolerances(matrix, dims, &Tolerances::DEFAULT)
    }

    /// Validates Hermiticity, trace and positivity in that order. Small
    /// negative eigenvalues (within `structural`) are clamped to zero and the
    /// spectrum renormalized.
    pub fn with_tolerances(matrix: ComplexMatrix, dims: &[usize], tol: &Tolerances) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || !matrix.is_square() || matrix.rows() != total {
            return Err(Error::Dimension(format!(
                "dims {dims:?} do not match a {}x{} matrix",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation(Invariant::FiniteEntries, f64::NAN));
        }
        let herm = matrix.hermiticity_residual();
        if herm > tol.structural {
            return Err(Error::validation(Invariant::Hermiticity, herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol.structural || tr.im.abs() > tol.structural {
            return Err(Error::validation(Invariant::Trace, tr.re));
        }
        let matrix = matrix.hermitian_part();
        let eig = herm_eig_unchecked(&matrix);
        let min = eig.values().last().copied().unwrap_or(0.0);
        if min < -tol.structural {
            return Err(Error::validation(Invariant::Positivity, min));
        }
        let matrix = if min < 0.0 {
            let total: f64 = eig.values().iter().map(|&l| l.max(0.0)).sum();
            eig.map(|l| l.max(0.0) / total)
        } else {
            matrix
        };
        Ok(Self {
            dims: dims.to_vec(),
            matrix,
        })
    }

    /// For matrices that are density matrices by construction; only
    /// re-symmetrizes and renormalizes.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dims: &[usize]) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.rows());
        let mut m = matrix.hermitian_part();
        let tr = m.trace().re;
        if tr > 0.0 && tr != 1.0 {
            m = m.scale(1.0 / tr);
        }
        Self {
            dims: dims.to_vec(),
            matrix: m,
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            dims: psi.dims.clone(),
            matrix: ComplexMatrix::projector(&psi.amplitudes),
        }
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            matrix: ComplexMatrix::identity(n).scale(1.0 / n as f64),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigen(&self) -> HermitianEigen {
        herm_eig_unchecked(&self.matrix)
    }

    /// Number of eigenvalues above the eigenvalue cutoff.
    pub fn rank(&self) -> usize {
        self.eigen().rank(Tolerances::DEFAULT.eig_cutoff)
    }

    /// Reduced state on the listed subsystems.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = qmat::partial_trace(&self.matrix, &self.dims, keep)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let dims: Vec<usize> = kept.iter().map(|&k| self.dims[k]).collect();
        Ok(Self::from_trusted(m, &dims))
    }

    /// Partial transpose on subsystem `on`; the result is Hermitian with unit
    /// trace but need not be positive, so it is returned as a bare matrix.
    pub fn partial_transpose(&self, on: usize) -> Result<ComplexMatrix> {
        qmat::partial_transpose(&self.matrix, &self.dims, on)
    }

    /// Smallest eigenvalue of the partial transpose on the last subsystem.
    pub fn min_pt_eigenvalue(&self) -> f64 {
        let on = self.dims.len() - 1;
        let pt = qmat::partial_transpose(&self.matrix, &self.dims, on).expect("dims checked");
        herm_eig_unchecked(&pt).values().last().copied().unwrap_or(0.0)
    }

    /// `p ρ + (1 − p) σ` for states with the same dims.
    pub fn mix(&self, p: f64, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!("mixing {:?} with {:?}", self.dims, other.dims)));
        }
        Ok(Self::from_trusted(
            &self.matrix.scale(p) + &other.matrix.scale(1.0 - p),
            &self.dims,
        ))
    }

    /// `ρ ⊗ σ`, dims concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let m = qmat::tensor(&self.matrix, &other.matrix)?;
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(Self { dims, matrix: m })
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> DensityMatrix {
        Self::from_trusted(&(u * &self.matrix) * &u.adjoint(), &self.dims)
    }

    /// Same matrix under a different subsystem split.
    pub fn regroup(&self, dims: &[usize]) -> Result<DensityMatrix> {
        if dims.iter().product::<usize>() != self.dim() {
            return Err(Error::Dimension(format!("cannot regroup {:?} as {dims:?}", self.dims)));
        }
        Ok(Self {
            dims: dims.to_vec(),
            matrix: self.matrix.clone(),
        })
    }

    pub(crate) fn require_bipartite(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::Dimension(format!("expected a bipartite state, got dims {:?}", self.dims))),
        }
    }
}

/// Unit vector with subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Requires norm 1 within the norm tolerance.
    pub fn new(amplitudes: Vec<C64>, dims: &[usize]) -> Result<Self> {
        Self::check_len(&amplitudes, dims)?;
        let norm = qmat::vec_norm(&amplitudes);
        if (norm - 1.0).abs() > Tolerances::DEFAULT.norm || !norm.is_finite() {
            return Err(Error::validation(Invariant::Normalization, norm));
        }
        Ok(Self {
            dims: dims.to_vec(),
            amplitudes,
        })
    }

    /// Rescales to unit norm; rejects the zero vector.
    pub fn normalized(mut amplitudes: Vec<C64>, dims: &[usize]) -> Result<Self> {
        Self::check_len(&amplitudes, dims)?;
        let norm = qmat::vec_norm(&amplitudes);
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::validation(Invariant::Normalization, norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self {
            dims: dims.to_vec(),
            amplitudes,
        })
    }

    fn check_len(amplitudes: &[C64], dims: &[usize]) -> Result<()> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != amplitudes.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        Ok(())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(index: usize, dims: &[usize]) -> Result<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(Error::Dimension(format!("basis index {index} for dims {dims:?}")));
        }
        let mut v = alloc::vec![qmat::ZERO; n];
        v[index] = qmat::ONE;
        Ok(Self {
            dims: dims.to_vec(),
            amplitudes: v,
        })
    }

    /// `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &PureState, b: &PureState) -> Self {
        let mut dims = a.dims.clone();
        dims.extend_from_slice(&b.dims);
        Self {
            dims,
            amplitudes: qmat::kron_vec(&a.amplitudes, &b.amplitudes),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        qmat::vec_dot(&self.amplitudes, &other.amplitudes).norm_sqr()
    }

    pub fn regroup(&self, dims: &[usize]) -> Result<PureState> {
        Self::check_len(&self.amplitudes, dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            amplitudes: self.amplitudes.clone(),
        })
    }

    /// Reduced state on one side of a bipartite split.
    pub fn reduced(&self, keep: usize) -> Result<DensityMatrix> {
        self.density().reduce(&[keep])
    }

    pub(crate) fn require_bipartite(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::Dimension(format!("expected a bipartite pure state, got dims {:?}", self.dims))),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{ONE, ZERO};

    #[test]
    fn maximally_mixed_is_valid() {
        let m = ComplexMatrix::identity(4).scale(0.25);
        let rho = validate_density(m, &[2, 2]).unwrap();
        assert_eq!(rho.dims(), &[2, 2]);
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let m = ComplexMatrix::from_real_diagonal(&[0.55, 0.5, -0.05]);
        let err = validate_density(m, &[3]).unwrap_err();
        assert_eq!(err.invariant(), Some(Invariant::Positivity));
    }

    #[test]
    fn wrong_trace_is_rejected() {
        let m = ComplexMatrix::from_real_diagonal(&[0.5, 0.49]);
        let err = validate_density(m, &[2]).unwrap_err();
        assert_eq!(err.invariant(), Some(Invariant::Trace));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.1, 0.0);
        let err = validate_density(m, &[2]).unwrap_err();
        assert_eq!(err.invariant(), Some(Invariant::Hermiticity));
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clamped() {
        let m = ComplexMatrix::from_real_diagonal(&[0.5 + 5e-11, 0.5, -5e-11]);
        let rho = validate_density(m, &[3]).unwrap();
        let eig = rho.eigen();
        assert!(eig.values().iter().all(|&l| l >= 0.0));
        assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn shape_mismatch_is_dimension_error() {
        let m = ComplexMatrix::identity(4).scale(0.25);
        assert!(matches!(validate_density(m, &[2, 3]), Err(Error::Dimension(_))));
    }

    #[test]
    fn pure_state_norm_checked() {
        let v = alloc::vec![ONE, ONE];
        assert_eq!(
            PureState::new(v.clone(), &[2]).unwrap_err().invariant(),
            Some(Invariant::Normalization)
        );
        let psi = PureState::normalized(v, &[2]).unwrap();
        assert!((crate::qmat::vec_norm(psi.amplitudes()) - 1.0).abs() <= 1e-15);
        assert!(PureState::normalized(alloc::vec![ZERO, ZERO], &[2]).is_err());
    }
}
