//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, plus
//! the spectral functions built on it.

use alloc::vec::Vec;

use super::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Invariant, Result};
use crate::math::{cabs, cis, sqrt};
use crate::tol::Tolerances;

const MAX_SWEEPS: usize = 80;

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: Vec<f64>,
    vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                if fl[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * fl[k];
                }
            }
            acc
        })
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }

    /// Number of eigenvalues strictly above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        self.values.iter().filter(|&&l| l > cutoff).count()
    }

    pub(crate) fn clamp_below(&mut self, floor: f64) {
        self.values.iter_mut().for_each(|l| *l = l.max(floor));
    }

    /// `V† M V`, the matrix `m` expressed in this eigenbasis.
    pub fn rotate_into(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let va = self.vectors.adjoint();
        &(&va * m) * &self.vectors
    }
}

/// Eigendecomposition of a Hermitian matrix; rejects inputs whose
/// Hermiticity residual exceeds the structural tolerance.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Dimension(alloc::format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let residual = m.hermiticity_residual();
    if residual > Tolerances::DEFAULT.structural * m.frobenius_norm().max(1.0) {
        return Err(Error::validation(Invariant::Hermiticity, residual));
    }
    Ok(herm_eig_unchecked(m))
}

/// Jacobi eigensolver on the Hermitian part of `m`, without validation.
pub fn herm_eig_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.rows();
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off == 0.0 || sqrt(off) <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

/// One rotation zeroing `a[p][q]`: `A ← J†AJ`, `V ← VJ`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = cabs(apq);
    if mag == 0.0 {
        return;
    }
    let n = a.rows();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible against both diagonal entries even after squaring.
    if mag < 1e-300 || (mag * 1e18 < app.abs() && mag * 1e18 < aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / sqrt(t * t + 1.0);
    let s = t * c;
    let ph = phase.conj();
    // J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) block.
    let j_pp = C64::new(c, 0.0);
    let j_pq = C64::new(s, 0.0);
    let j_qp = ph * (-s);
    let j_qq = ph * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

/// `exp(G)` for anti-Hermitian `G`, computed through the spectrum of the
/// Hermitian matrix `-iG`; the result is unitary to rounding.
pub fn expm_antihermitian(g: &ComplexMatrix) -> ComplexMatrix {
    let h = g.scale_complex(C64::new(0.0, -1.0));
    let eig = herm_eig_unchecked(&h);
    let n = eig.dim();
    let phases: Vec<C64> = eig.values().iter().map(|&l| cis(l)).collect();
    let vv = eig.vectors();
    ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| vv[(i, k)] * phases[k] * vv[(j, k)].conj()).sum()
    })
}
