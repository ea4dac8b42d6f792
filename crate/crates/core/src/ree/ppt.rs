//! Barrier Newton method for `min S(ρ‖σ)` over `{σ ⪰ 0, σ^Γ ⪰ 0, Tr σ = 1}`.
//!
//! Every strictly feasible iterate `σ` yields the bound
//! `S(ρ‖σ) − Tr Gσ + λ_min(G − μσ⁻¹ − μ((σ^Γ)⁻¹)^Γ) ≤ min`, where `G` is the
//! gradient of `−Tr ρ log₂ σ`; the reported lower value is the best of these.

use alloc::vec::Vec;

use super::{cross_entropy_gradient, dd2};
use crate::math::{ln, sqrt, LN2};
use crate::measures::{vn_entropy, Ebits};
use crate::qmat::{herm_eig_unchecked, partial_transpose, ComplexMatrix, HermitianEigen, C64, ZERO};
use crate::states::DensityMatrix;

const MU_START: f64 = 0.1;
const MU_SHRINK: f64 = 6.0;
const MU_END: f64 = 1e-11;
const MAX_NEWTON: usize = 60;

/// Result of the PPT relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct PptBracket {
    /// Certified lower bound on the relaxation minimum, and hence on the REE.
    pub lower: Ebits,
    /// `S(ρ‖σ)` at the final PPT iterate.
    pub upper: Ebits,
    pub sigma: DensityMatrix,
    pub newton_steps: usize,
}

/// Orthonormal traceless Hermitian basis (generalized Gell-Mann matrices).
pub(crate) fn traceless_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = 1.0 / sqrt(2.0);
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut re = ComplexMatrix::zeros(n, n);
            re[(j, k)] = C64::new(s, 0.0);
            re[(k, j)] = C64::new(s, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(n, n);
            im[(j, k)] = C64::new(0.0, -s);
            im[(k, j)] = C64::new(0.0, s);
            out.push(im);
        }
    }
    for l in 1..n {
        let c = 1.0 / sqrt((l * (l + 1)) as f64);
        let mut d = ComplexMatrix::zeros(n, n);
        for j in 0..l {
            d[(j, j)] = C64::new(c, 0.0);
        }
        d[(l, l)] = C64::new(-(l as f64) * c, 0.0);
        out.push(d);
    }
    out
}

fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    *herm_eig_unchecked(&m.hermitian_part()).values().last().expect("non-empty")
}

fn trace_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.trace_product(b).re
}

struct Setup {
    rho: ComplexMatrix,
    dims: [usize; 2],
    entropy: f64,
    basis: Vec<ComplexMatrix>,
    basis_pt: Vec<ComplexMatrix>,
}

struct Point {
    sigma: ComplexMatrix,
    eig: HermitianEigen,
    eig_pt: HermitianEigen,
}

impl Setup {
    fn point(&self, x: &[f64]) -> Option<Point> {
        let n = self.rho.rows();
        let mut sigma = ComplexMatrix::identity(n).scale(1.0 / n as f64);
        for (xk, b) in x.iter().zip(&self.basis) {
            sigma = &sigma + &b.scale(*xk);
        }
        let eig = herm_eig_unchecked(&sigma);
        if *eig.values().last()? <= 0.0 {
            return None;
        }
        let pt = partial_transpose(&sigma, &self.dims, 1).ok()?;
        let eig_pt = herm_eig_unchecked(&pt);
        if *eig_pt.values().last()? <= 0.0 {
            return None;
        }
        Some(Point { sigma, eig, eig_pt })
    }

    fn objective(&self, p: &Point) -> f64 {
        let (cross, _, _) = cross_entropy_gradient(&self.rho, &p.eig);
        cross - self.entropy
    }

    fn barrier_value(&self, p: &Point, mu: f64) -> f64 {
        let logdet: f64 = p.eig.values().iter().chain(p.eig_pt.values()).map(|&l| ln(l)).sum();
        self.objective(p) - mu * logdet
    }

    /// Strictly valid lower bound from the point `p` with multiplier `mu`:
    /// the best of the barrier duals `(μσ⁻¹, μ(σ^Γ)⁻¹)` and of a dual whose
    /// `Z` is rebuilt from stationarity and clipped to the PSD cone.
    fn certificate(&self, p: &Point, mu: f64) -> f64 {
        let n = self.rho.rows() as f64;
        let (cross, g, _) = cross_entropy_gradient(&self.rho, &p.eig);
        let f = cross - self.entropy;
        let g_sigma = trace_re(&g, &p.sigma);
        let base = f - g_sigma;
        let y = p.eig.map(|l| mu / l);
        let z_barrier = p.eig_pt.map(|l| mu / l);
        let rest = &g - &y;
        let nu = g_sigma - 2.0 * n * mu;
        let target = &partial_transpose(&rest, &self.dims, 1).expect("square") - &ComplexMatrix::identity(rest.rows()).scale(nu);
        let z_fit = herm_eig_unchecked(&target.hermitian_part()).map(|l| l.max(0.0));
        let mut best = base + min_eigenvalue(&g);
        for z in [z_barrier, z_fit] {
            let zg = partial_transpose(&z, &self.dims, 1).expect("square");
            best = best.max(base + min_eigenvalue(&(&rest - &zg)));
        }
        best
    }

    fn newton_system(&self, p: &Point, mu: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.rho.rows();
        let nb = self.basis.len();
        let (_, g, rt) = cross_entropy_gradient(&self.rho, &p.eig);
        let lam = p.eig.values();
        let lam_pt = p.eig_pt.values();
        let inv = p.eig.map(|l| 1.0 / l);
        let inv_pt = p.eig_pt.map(|l| 1.0 / l);
        let grad: Vec<f64> = (0..nb)
            .map(|k| {
                trace_re(&g, &self.basis[k])
                    - mu * trace_re(&inv, &self.basis[k])
                    - mu * trace_re(&inv_pt, &self.basis_pt[k])
            })
            .collect();
        let rot: Vec<ComplexMatrix> = self.basis.iter().map(|b| p.eig.rotate_into(b)).collect();
        let rot_pt: Vec<ComplexMatrix> = self.basis_pt.iter().map(|b| p.eig_pt.rotate_into(b)).collect();
        let mut f2 = alloc::vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    f2[(i * n + j) * n + m] = dd2(lam[i], lam[j], lam[m]);
                }
            }
        }
        let mut h = alloc::vec![0.0; nb * nb];
        for k in 0..nb {
            let bk = &rot[k];
            let mut z = ComplexMatrix::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let mut acc = ZERO;
                    for c in 0..n {
                        // T[a][b] = Σ_c f2(c,a,b) ρ̃_bc B̃_ca ; U[a][b] = Σ_c f2(a,b,c) ρ̃_ca B̃_bc
                        acc += rt[(b, c)] * bk[(c, a)] * f2[(c * n + a) * n + b];
                        acc += rt[(c, a)] * bk[(b, c)] * f2[(a * n + b) * n + c];
                    }
                    z[(a, b)] = acc;
                }
            }
            for l in k..nb {
                let bl = &rot[l];
                let bl_pt = &rot_pt[l];
                let bk_pt = &rot_pt[k];
                let mut hf = 0.0;
                let mut hb = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        hf += (z[(a, b)] * bl[(a, b)]).re;
                        hb += (bk[(a, b)] * bl[(b, a)]).re / (lam[a] * lam[b]);
                        hb += (bk_pt[(a, b)] * bl_pt[(b, a)]).re / (lam_pt[a] * lam_pt[b]);
                    }
                }
                let v = -hf / LN2 + mu * hb;
                h[k * nb + l] = v;
                h[l * nb + k] = v;
            }
        }
        (grad, h)
    }
}

/// Solves `H d = −g` by Cholesky, adding diagonal shifts until it succeeds.
fn newton_direction(h: &[f64], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let scale = (0..n).map(|i| h[i * n + i].abs()).fold(0.0f64, f64::max).max(1e-300);
    let mut shift = 0.0;
    loop {
        if let Some(l) = cholesky(h, n, shift) {
            let mut y = alloc::vec![0.0; n];
            for i in 0..n {
                let mut s = -g[i];
                for j in 0..i {
                    s -= l[i * n + j] * y[j];
                }
                y[i] = s / l[i * n + i];
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for j in i + 1..n {
                    s -= l[j * n + i] * y[j];
                }
                y[i] = s / l[i * n + i];
            }
            return y;
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 10.0 };
    }
}

fn cholesky(h: &[f64], n: usize, shift: f64) -> Option<Vec<f64>> {
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i * n + j] + if i == j { shift } else { 0.0 };
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

pub(super) fn solve(rho: &DensityMatrix, da: usize, db: usize) -> PptBracket {
    let n = da * db;
    let basis = traceless_basis(n);
    let basis_pt = basis
        .iter()
        .map(|b| partial_transpose(b, &[da, db], 1).expect("square"))
        .collect();
    let setup = Setup {
        rho: rho.matrix().clone(),
        dims: [da, db],
        entropy: vn_entropy(rho).value(),
        basis,
        basis_pt,
    };
    let mut x = alloc::vec![0.0; n * n - 1];
    let mut p = setup.point(&x).expect("maximally mixed state is interior");
    let mut best = setup.certificate(&p, MU_START);
    let mut mu = MU_START;
    let mut steps = 0;
    while mu >= MU_END {
        for _ in 0..MAX_NEWTON {
            let (g, h) = setup.newton_system(&p, mu);
            let d = newton_direction(&h, &g);
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if -slope <= 1e-13 {
                break;
            }
            let phi = setup.barrier_value(&p, mu);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                if let Some(q) = setup.point(&trial) {
                    if setup.barrier_value(&q, mu) <= phi + 1e-4 * t * slope {
                        x = trial;
                        p = q;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            steps += 1;
            if !moved {
                break;
            }
        }
        best = best.max(setup.certificate(&p, mu));
        mu /= MU_SHRINK;
    }
    let upper = setup.objective(&p);
    PptBracket {
        lower: Ebits::new(best.max(0.0)),
        upper: Ebits::new(upper.max(0.0)),
        sigma: DensityMatrix::from_trusted(p.sigma, &[da, db]),
        newton_steps: steps,
    }
}
