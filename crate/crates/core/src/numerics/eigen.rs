//! Hermitian eigendecomposition by cyclic Jacobi rotations.

use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 512;
const HERMITIAN_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by ascending eigenvalue; `vectors` holds them as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// V Λ V†
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = ComplexMatrix::from_diag(&self.values.iter().map(|&e| C64::new(e, 0.0)).collect::<Vec<_>>());
        self.vectors.matmul(&lambda).matmul(&self.vectors.adjoint())
    }

    /// max_k ‖H v_k − ε_k v_k‖
    pub fn max_residual(&self, h: &ComplexMatrix) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.vector(k);
                let hv = h.mul_vec(&v);
                hv.iter().zip(&v).map(|(a, b)| (a - b * self.values[k]).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// max |V†V − I|
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.vectors.adjoint().matmul(&self.vectors);
        g.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

/// Diagonalizes a Hermitian matrix of dimension at most 512.
pub fn eigh(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::Contract(format!("eigh needs a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    let n = h.rows();
    if n == 0 || n > MAX_DIM {
        return Err(Error::Contract(format!("eigh dimension {n} outside 1..={MAX_DIM}")));
    }
    let scale = h.max_abs();
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!("matrix is not Hermitian (max |A - A†| = {defect:.3e})")));
    }

    let mut a = h.clone();
    // symmetrize so the rotations see an exactly Hermitian matrix
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();

    if norm > 0.0 {
        for _sweep in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * norm {
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

    let gap_tol = 1e-9 * h.frobenius_norm().max(f64::MIN_POSITIVE);
    orthonormalize_clusters(&values, &mut vectors, gap_tol);

    Ok(EigenDecomposition { values, vectors })
}

/// Zeroes a[p][q] with the unitary U = [[c, s e^{iφ}], [−s e^{−iφ}, c]].
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let z = a[(p, q)];
    let mag = z.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // below round-off relative to the diagonal; rotating would only add noise
    if mag < 1e-300 || (app.abs() + aqq.abs()) * f64::EPSILON * 1e-3 > mag {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = z / mag;
    let theta = (aqq - app) / (2.0 * mag);
    // smaller root of t² + 2θt − 1 = 0; θ = 0 gives t = 1
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let u_pq = phase * s; // s e^{iφ}
    let u_qp = -phase.conj() * s; // −s e^{−iφ}

    let n = a.rows();
    // A ← A U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * c;
    }
    // A ← U† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * u_qp.conj();
        a[(q, k)] = apk * u_pq.conj() + aqk * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V ← V U
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * c;
    }
}

/// Modified Gram-Schmidt inside each cluster of eigenvalues closer than `gap`.
fn orthonormalize_clusters(values: &[f64], vectors: &mut ComplexMatrix, gap: f64) {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < gap {
            end += 1;
        }
        for k in start..end {
            for j in start..k {
                let proj: C64 = (0..n).map(|i| vectors[(i, j)].conj() * vectors[(i, k)]).sum();
                for i in 0..n {
                    let vij = vectors[(i, j)];
                    vectors[(i, k)] -= proj * vij;
                }
            }
            let norm = (0..n).map(|i| vectors[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..n {
                vectors[(i, k)] /= norm;
            }
        }
        start = end;
    }
}
