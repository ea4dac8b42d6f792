//! Objective and gradient of `−Tr ρ log₂ σ` over the softmax / normalized
//! vector parameterization of a separable ansatz.

use alloc::vec::Vec;

use rand::Rng;

use super::{cross_entropy_gradient, AnsatzTerm, SeparableAnsatz};
use crate::decomp::{random_complex_vec, softmax};
use crate::error::Result;
use crate::math::sqrt;
use crate::qmat::{herm_eig_unchecked, kron_vec, ComplexMatrix, C64, ZERO};
use crate::states::{DensityMatrix, PureState};

pub(super) struct Problem {
    rho: ComplexMatrix,
    da: usize,
    db: usize,
    m: usize,
    floor: f64,
}

struct Unpacked {
    weights: Vec<f64>,
    a: Vec<Vec<C64>>,
    b: Vec<Vec<C64>>,
    norm_a: Vec<f64>,
    norm_b: Vec<f64>,
}

fn read_vec(x: &[f64]) -> (Vec<C64>, f64) {
    let v: Vec<C64> = x.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    let nv = sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    let nv = nv.max(1e-300);
    (v.into_iter().map(|z| z / nv).collect(), nv)
}

impl Problem {
    pub(super) fn new(rho: &DensityMatrix, da: usize, db: usize, m: usize, floor: f64) -> Self {
        Self {
            rho: rho.matrix().clone(),
            da,
            db,
            m,
            floor,
        }
    }

    fn a_offset(&self, j: usize) -> usize {
        self.m + j * 2 * self.da
    }

    fn b_offset(&self, j: usize) -> usize {
        self.m + self.m * 2 * self.da + j * 2 * self.db
    }

    fn len(&self) -> usize {
        self.m * (1 + 2 * self.da + 2 * self.db)
    }

    pub(super) fn random_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = alloc::vec![0.0; self.len()];
        for v in x.iter_mut().take(self.m) {
            *v = rng.random::<f64>() - 0.5;
        }
        let rest: Vec<C64> = random_complex_vec((self.len() - self.m) / 2, rng);
        for (i, z) in rest.iter().enumerate() {
            x[self.m + 2 * i] = z.re;
            x[self.m + 2 * i + 1] = z.im;
        }
        x
    }

    fn unpack(&self, x: &[f64]) -> Unpacked {
        let weights = softmax(&x[..self.m]);
        let mut u = Unpacked {
            weights,
            a: Vec::with_capacity(self.m),
            b: Vec::with_capacity(self.m),
            norm_a: Vec::with_capacity(self.m),
            norm_b: Vec::with_capacity(self.m),
        };
        for j in 0..self.m {
            let (a, na) = read_vec(&x[self.a_offset(j)..self.a_offset(j) + 2 * self.da]);
            let (b, nb) = read_vec(&x[self.b_offset(j)..self.b_offset(j) + 2 * self.db]);
            u.a.push(a);
            u.b.push(b);
            u.norm_a.push(na);
            u.norm_b.push(nb);
        }
        u
    }

    /// `−Tr ρ log₂ σ_ε`, with the gradient written into `grad` when given.
    pub(super) fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let n = self.da * self.db;
        let u = self.unpack(x);
        let keep = 1.0 - n as f64 * self.floor;
        let products: Vec<Vec<C64>> = (0..self.m).map(|j| kron_vec(&u.a[j], &u.b[j])).collect();
        let mut sigma = ComplexMatrix::identity(n).scale(self.floor);
        for (w, v) in u.weights.iter().zip(&products) {
            let s = w * keep;
            for i in 0..n {
                let vi = v[i] * s;
                for k in 0..n {
                    sigma[(i, k)] += vi * v[k].conj();
                }
            }
        }
        let mut eig = herm_eig_unchecked(&sigma);
        eig.clamp_below(0.5 * self.floor);
        let (cross, g, _) = cross_entropy_gradient(&self.rho, &eig);
        let Some(grad) = grad else {
            return cross;
        };
        let g = g.scale(keep);
        let mut c = alloc::vec![0.0; self.m];
        let (da, db) = (self.da, self.db);
        for j in 0..self.m {
            let v = &products[j];
            let gv = g.apply(v);
            let cj: f64 = v.iter().zip(&gv).map(|(p, q)| (p.conj() * q).re).sum();
            c[j] = cj;
            let w2 = 2.0 * u.weights[j];
            let (a, b) = (&u.a[j], &u.b[j]);
            let mut ga = alloc::vec![ZERO; da];
            let mut gb = alloc::vec![ZERO; db];
            for xa in 0..da {
                for yb in 0..db {
                    let z = gv[xa * db + yb];
                    ga[xa] += z * b[yb].conj();
                    gb[yb] += z * a[xa].conj();
                }
            }
            let oa = self.a_offset(j);
            for xa in 0..da {
                let d = (ga[xa] - a[xa] * cj) * (w2 / u.norm_a[j]);
                grad[oa + 2 * xa] = d.re;
                grad[oa + 2 * xa + 1] = d.im;
            }
            let ob = self.b_offset(j);
            for yb in 0..db {
                let d = (gb[yb] - b[yb] * cj) * (w2 / u.norm_b[j]);
                grad[ob + 2 * yb] = d.re;
                grad[ob + 2 * yb + 1] = d.im;
            }
        }
        let mean: f64 = u.weights.iter().zip(&c).map(|(w, cj)| w * cj).sum();
        for j in 0..self.m {
            grad[j] = u.weights[j] * (c[j] - mean);
        }
        cross
    }

    /// The evaluated state `σ_ε` as an explicit ansatz, floor terms included.
    pub(super) fn realize(&self, x: &[f64]) -> Result<SeparableAnsatz> {
        let n = self.da * self.db;
        let u = self.unpack(x);
        let keep = 1.0 - n as f64 * self.floor;
        let mut terms = Vec::with_capacity(self.m + n);
        for j in 0..self.m {
            let w = u.weights[j] * keep;
            if w > 0.0 {
                terms.push(AnsatzTerm {
                    weight: w,
                    a: PureState::normalized(u.a[j].clone(), &[self.da])?,
                    b: PureState::normalized(u.b[j].clone(), &[self.db])?,
                });
            }
        }
        for xa in 0..self.da {
            for yb in 0..self.db {
                terms.push(AnsatzTerm {
                    weight: self.floor,
                    a: PureState::basis(xa, &[self.da])?,
                    b: PureState::basis(yb, &[self.db])?,
                });
            }
        }
        SeparableAnsatz::new(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::gen_random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_matches_central_differences() {
        for (dims, seed) in [([2usize, 2usize], 1u64), ([2, 3], 2)] {
            let rho = gen_random_density(&dims, 3, seed).unwrap();
            let p = Problem::new(&rho, dims[0], dims[1], 5, 1e-3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = p.random_start(&mut rng);
            let mut g = alloc::vec![0.0; x.len()];
            p.eval(&x, Some(&mut g));
            let h = 1e-6;
            for i in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let num = (p.eval(&xp, None) - p.eval(&xm, None)) / (2.0 * h);
                assert!((num - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "{i}: {num} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn realized_ansatz_matches_evaluated_state() {
        let rho = gen_random_density(&[2, 2], 4, 3).unwrap();
        let p = Problem::new(&rho, 2, 2, 16, 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = p.random_start(&mut rng);
        let sigma = p.realize(&x).unwrap().density();
        let direct = crate::measures::qrelative_entropy(&rho, &sigma).unwrap().value();
        let s = crate::measures::vn_entropy(&rho).value();
        assert!((direct - (p.eval(&x, None) - s)).abs() < 1e-10);
    }
}
