//! Dense complex matrices and the subsystem operations every measure is
//! built on.
//!
//! Subsystem convention: a dims list `[d_0, d_1, ..]` describes the space
//! `H_0 ⊗ H_1 ⊗ ..` with subsystem 0 the most significant digit of the flat
//! index, so `tensor(a, b)` has dims `[rows(a), rows(b)]`. Tripartite
//! memory states use the order `[d_M, d_A, d_B]`.

mod eig;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Invariant, Result};
use crate::math::{cabs, sqrt};

pub use eig::{expm_antihermitian, herm_eig, herm_eig_unchecked, HermitianEigen};

pub type C64 = Complex<f64>;

/// Largest total dimension `tensor` will build unless told otherwise.
pub const DEFAULT_DIM_CAP: usize = 4096;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation(Invariant::FiniteEntries, f64::NAN));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `‖M − M†‖_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        sqrt(acc)
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `Re Tr(A† B)`, the real Frobenius inner product.
    pub fn inner_re(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// `M v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| cabs(a - b))
            .fold(0.0, f64::max)
    }

    /// Complex Gaussian (Ginibre) matrix with unit-variance entries.
    pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| complex_gaussian(rng))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn vec_norm(v: &[C64]) -> f64 {
    sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

pub(crate) fn vec_dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Kronecker product `a ⊗ b`, refusing results beyond [`DEFAULT_DIM_CAP`].
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_capped(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => Ok(kron(a, b)),
        _ => Err(Error::Dimension(format!(
            "tensor product {}x{} ⊗ {}x{} exceeds the dimension cap {cap}",
            a.rows, a.cols, b.rows, b.cols
        ))),
    }
}

pub(crate) fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub(crate) fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if !m.is_square() || dims.is_empty() || total != m.rows {
        return Err(Error::Dimension(format!(
            "dims {dims:?} do not match a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// Flat offsets of every multi-index over `subsystems`, in row-major order.
fn offsets(dims: &[usize], strides: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for d in 0..dims[s] {
                next.push(base + d * strides[s]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every subsystem not listed in `keep`.
///
/// Kept subsystems appear in the result in ascending index order.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("keep set {keep:?} out of range for dims {dims:?}")));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let st = strides(dims);
    let ko = offsets(dims, &st, &kept);
    let to = offsets(dims, &st, &traced);
    let n = ko.len();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        to.iter().map(|&t| m[(ko[r] + t, ko[c] + t)]).sum()
    }))
}

/// Transposes subsystem `on` (an index into `dims`).
pub fn partial_transpose(m: &ComplexMatrix, dims: &[usize], on: usize) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    if on >= dims.len() {
        return Err(Error::Dimension(format!(
            "subsystem {on} out of range for dims {dims:?}"
        )));
    }
    let stride = strides(dims)[on];
    let d = dims[on];
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let di = (i / stride) % d;
        for j in 0..n {
            let dj = (j / stride) % d;
            let ni = i - di * stride + dj * stride;
            let nj = j - dj * stride + di * stride;
            out[(ni, nj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Orthonormalizes `vectors` in order by modified Gram–Schmidt (applied
/// twice), dropping any vector whose residual norm falls below `drop_tol`.
pub(crate) fn gram_schmidt(vectors: &[Vec<C64>], drop_tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        let start = vec_norm(&w);
        for _ in 0..2 {
            for b in &basis {
                let c = vec_dot(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let nw = vec_norm(&w);
        if nw > drop_tol * start.max(1e-300) && nw > 1e-300 {
            for x in &mut w {
                *x /= nw;
            }
            basis.push(w);
        }
    }
    basis
}

/// Extends an orthonormal list to a full basis of `C^n` with computational
/// basis vectors.
pub(crate) fn complete_basis(mut basis: Vec<Vec<C64>>, n: usize) -> Vec<Vec<C64>> {
    let mut candidates = basis.clone();
    for i in 0..n {
        let mut e = vec![ZERO; n];
        e[i] = ONE;
        candidates.push(e);
    }
    basis = gram_schmidt(&candidates, 1e-8);
    basis.truncate(n);
    basis
}

/// Haar-random `n × n` unitary from a Gram–Schmidt-orthonormalized Ginibre
/// matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|_| (0..n).map(|_| complex_gaussian(rng)).collect())
            .collect();
        let q = gram_schmidt(&cols, 1e-10);
        if q.len() == n {
            return ComplexMatrix::from_columns(&q);
        }
    }
}

/// `‖V†V − I‖_F` for the columns of `v`.
pub fn isometry_residual(v: &ComplexMatrix) -> f64 {
    let g = &v.adjoint() * v;
    (&g - &ComplexMatrix::identity(v.cols)).frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::ginibre(n, n, &mut rng)
    }

    fn singlet() -> ComplexMatrix {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let v = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
        ComplexMatrix::projector(&v)
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn tensor_shapes_multiply() {
        let t = tensor(&ComplexMatrix::zeros(2, 2), &ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!((t.rows(), t.cols()), (6, 6));
    }

    #[test]
    fn x_tensor_z_entries() {
        let t = tensor(&pauli_x(), &pauli_z()).unwrap();
        assert_eq!(t[(0, 2)], ONE);
        assert_eq!(t[(1, 3)], -ONE);
    }

    #[test]
    fn tensor_respects_cap() {
        let a = ComplexMatrix::identity(70);
        assert!(matches!(tensor(&a, &a), Err(Error::Dimension(_))));
        assert!(tensor_capped(&a, &a, 4900).is_ok());
    }

    #[test]
    fn tensor_is_associative() {
        let (a, b, c) = (random_matrix(2, 1), random_matrix(3, 2), random_matrix(2, 3));
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        assert!(left.max_abs_diff(&right) <= 1e-14);
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::from_vec(2, 2, vec![ZERO; 3]),
            Err(Error::Dimension(_))
        ));
        let err = ComplexMatrix::from_vec(1, 1, vec![C64::new(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err.invariant(), Some(Invariant::FiniteEntries));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho_a = ComplexMatrix::from_real_diagonal(&[0.3, 0.7]);
        let rho_b = ComplexMatrix::from_real_diagonal(&[0.25, 0.25, 0.5]);
        let joint = tensor(&rho_a, &rho_b).unwrap();
        let back = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(back.max_abs_diff(&rho_a) <= 1e-15);
        let back_b = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(back_b.max_abs_diff(&rho_b) <= 1e-15);
    }

    #[test]
    fn singlet_reduces_to_maximally_mixed() {
        let red = partial_trace(&singlet(), &[2, 2], &[1]).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) <= 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let g = random_matrix(8, 7);
        let m = &g * &g.adjoint();
        for keep in [&[0usize][..], &[1], &[2], &[0, 2], &[1, 2]] {
            let r = partial_trace(&m, &[2, 2, 2], keep).unwrap();
            assert!((r.trace() - m.trace()).norm_sqr().sqrt() <= 1e-12 * m.trace().norm_sqr().sqrt());
        }
        let dims_err = partial_trace(&m, &[2, 3], &[0]);
        assert!(matches!(dims_err, Err(Error::Dimension(_))));
    }

    #[test]
    fn partial_trace_over_everything_is_trace() {
        let m = random_matrix(6, 11);
        let full = partial_trace(&m, &[2, 3], &[]).unwrap();
        assert_eq!((full.rows(), full.cols()), (1, 1));
        assert!((full[(0, 0)] - m.trace()).norm_sqr().sqrt() <= 1e-13);
    }

    #[test]
    fn partial_trace_middle_subsystem() {
        let (a, b, c) = (random_matrix(2, 4), random_matrix(3, 5), random_matrix(2, 6));
        let abc = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let ac = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        let expect = tensor(&a, &c).unwrap().scale_complex(b.trace());
        assert!(ac.max_abs_diff(&expect) <= 1e-12);
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let g = random_matrix(2, 21);
        let sa = ComplexMatrix::from_real_diagonal(&[0.4, 0.6]);
        let sb = {
            let p = &g * &g.adjoint();
            p.scale(1.0 / p.trace().re)
        };
        let pt = partial_transpose(&tensor(&sa, &sb).unwrap(), &[2, 2], 1).unwrap();
        let expect = tensor(&sa, &sb.transpose()).unwrap();
        assert!(pt.max_abs_diff(&expect) <= 1e-15);
        let eig = herm_eig(&pt).unwrap();
        assert!(eig.values().iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn singlet_partial_transpose_min_eigenvalue() {
        // Direct oracle: the partially transposed singlet is
        // 1/2 [[0,0,0,-1],[0,1,0,0],[0,0,1,0],[-1,0,0,0]], spectrum {1/2,1/2,1/2,-1/2}.
        let pt = partial_transpose(&singlet(), &[2, 2], 1).unwrap();
        let mut expect = ComplexMatrix::zeros(4, 4);
        expect[(1, 1)] = C64::new(0.5, 0.0);
        expect[(2, 2)] = C64::new(0.5, 0.0);
        expect[(0, 3)] = C64::new(-0.5, 0.0);
        expect[(3, 0)] = C64::new(-0.5, 0.0);
        assert!(pt.max_abs_diff(&expect) <= 1e-15);
        let eig = herm_eig(&pt).unwrap();
        assert!((eig.values()[3] + 0.5).abs() <= 1e-12);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let m = random_matrix(6, 3);
        for on in 0..2 {
            let twice = partial_transpose(&partial_transpose(&m, &[2, 3], on).unwrap(), &[2, 3], on)
                .unwrap();
            assert_eq!(twice, m);
        }
    }

    #[test]
    fn partial_transpose_keeps_trace_and_hermiticity() {
        let g = random_matrix(4, 9);
        let m = &g * &g.adjoint();
        let pt = partial_transpose(&m, &[2, 2], 0).unwrap();
        assert!((pt.trace() - m.trace()).norm_sqr().sqrt() <= 1e-13);
        assert!(pt.hermiticity_residual() <= 1e-13);
        assert!(matches!(partial_transpose(&m, &[3, 2], 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary(7, &mut rng);
        assert!(isometry_residual(&u) <= 1e-12);
    }
}
