use std::ops::Deref;

use num_complex::Complex64;

use super::cmat::CMat;
use crate::error::{domain, Result};

/// Entrywise tolerance, relative to `max(1, max|m_ij|)`, for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues down to `-PSD_TOL` are accepted as zero.
pub const PSD_TOL: f64 = 1e-9;

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction checks the defect and then symmetrizes exactly, so every
/// downstream routine sees an exactly Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(domain(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermitian_defect();
        if !(defect <= HERMITIAN_TOL * m.max_abs().max(1.0)) {
            return Err(domain(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self(symmetrize(&m)))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self(CMat::from_real_diag(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_cmat(&self) -> &CMat {
        &self.0
    }

    pub fn into_cmat(self) -> CMat {
        self.0
    }

    pub fn real_trace(&self) -> f64 {
        self.0.trace().re
    }
}

impl Deref for HermitianMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

fn symmetrize(m: &CMat) -> CMat {
    let n = m.rows();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    })
}

/// Spectral decomposition `M = U diag(values) U^H`, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMat,
}

impl Eigen {
    pub fn reconstruct(&self) -> CMat {
        let d = CMat::from_real_diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

/// Exponential correlation profile: entry `(i, j)` is `t^|i-j|`.
pub fn exp_correlation(n: usize, t: f64) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(domain("correlation dimension must be positive"));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!(
            "correlation coefficient {t} outside [0, 1]"
        )));
    }
    let m = CMat::from_fn(n, n, |i, j| {
        Complex64::new(t.powi((i as i32 - j as i32).abs()), 0.0)
    });
    Ok(HermitianMatrix(m))
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Runs cyclic Jacobi on the real symmetric embedding `[[X, -Y], [Y, X]]`
/// of `M = X + iY`. Every eigenvalue of `M` appears twice in the embedding,
/// with real eigenvectors `[x; y]` and `[-y; x]` that map to the same complex
/// direction; a pivoted Gram-Schmidt pass per eigenvalue cluster keeps one
/// complex vector per eigenvalue.
pub fn hermitian_eig(m: &CMat) -> Result<Eigen> {
    let h = HermitianMatrix::new(m.clone())?;
    Ok(eig_exact_hermitian(h.as_cmat()))
}

/// Eigendecomposition of a matrix already known to be exactly Hermitian.
pub(crate) fn eig_exact_hermitian(m: &CMat) -> Eigen {
    let n = m.rows();
    let nn = 2 * n;
    let mut s = vec![0.0; nn * nn];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            s[i * nn + j] = z.re;
            s[(i + n) * nn + (j + n)] = z.re;
            s[i * nn + (j + n)] = -z.im;
            s[(i + n) * nn + j] = z.im;
        }
    }
    let (vals, vecs) = jacobi_symmetric(&mut s, nn);

    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));

    let scale = vals.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let cluster_tol = 1e-10 * scale;

    let mut accepted: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < nn && accepted.len() < n {
        let mut end = start + 1;
        while end < nn && vals[order[end - 1]] - vals[order[end]] <= cluster_tol {
            end += 1;
        }
        let mut candidates: Vec<Vec<Complex64>> = order[start..end]
            .iter()
            .map(|&c| {
                (0..n)
                    .map(|i| Complex64::new(vecs[i * nn + c], vecs[(i + n) * nn + c]))
                    .collect()
            })
            .collect();
        let target = (end - start).div_ceil(2);
        for _ in 0..target {
            if accepted.len() == n {
                break;
            }
            for cand in candidates.iter_mut() {
                // two passes of classical Gram-Schmidt
                for _ in 0..2 {
                    for a in &accepted {
                        let proj: Complex64 =
                            a.iter().zip(cand.iter()).map(|(x, y)| x.conj() * y).sum();
                        for (c, x) in cand.iter_mut().zip(a) {
                            *c -= proj * x;
                        }
                    }
                }
            }
            let (best, norm) = candidates
                .iter()
                .enumerate()
                .map(|(k, c)| (k, c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("cluster is non-empty");
            let v: Vec<Complex64> = candidates[best].iter().map(|z| z / norm).collect();
            candidates.swap_remove(best);
            accepted.push(v);
        }
        start = end;
    }
    debug_assert_eq!(accepted.len(), n);

    // Rayleigh quotients give eigenvalues consistent with the chosen vectors.
    let mut pairs: Vec<(f64, Vec<Complex64>)> = accepted
        .into_iter()
        .map(|v| {
            let mut q = 0.0;
            for i in 0..n {
                let mut row = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    row += m[(i, j)] * v[j];
                }
                q += (v[i].conj() * row).re;
            }
            (q, v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMat::from_fn(n, n, |i, j| pairs[j].1[i]);
    Eigen { values, vectors }
}

/// Cyclic Jacobi eigenvalue iteration for a dense real symmetric matrix
/// (row-major, destroyed). Returns unsorted eigenvalues and the row-major
/// matrix whose columns are eigenvectors.
fn jacobi_symmetric(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    const MAX_SWEEPS: usize = 100;
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    let tiny = f64::EPSILON * f64::EPSILON * total.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i * n + i]).collect();
    (vals, v)
}

/// Principal square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &CMat) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(m)?;
    let roots = clamp_psd(&eig.values)?
        .into_iter()
        .map(f64::sqrt)
        .collect::<Vec<_>>();
    let d = CMat::from_real_diag(&roots);
    let r = &(&eig.vectors * &d) * &eig.vectors.adjoint();
    Ok(HermitianMatrix(symmetrize(&r)))
}

/// Clamps eigenvalues in `[-PSD_TOL, 0)` to zero; anything lower is an error.
pub(crate) fn clamp_psd(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v < -PSD_TOL {
                Err(domain(format!(
                    "matrix is not positive semidefinite (eigenvalue {v:e})"
                )))
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}

/// `log2 det(I + M)` for positive semidefinite `M`.
pub fn logdet_ipm(m: &CMat) -> f64 {
    let n = m.rows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    match a.cholesky() {
        Some(l) => (0..n).map(|i| l[(i, i)].re.log2()).sum::<f64>() * 2.0,
        None => eig_exact_hermitian(&symmetrize(m))
            .values
            .iter()
            .map(|&v| (1.0 + v.max(0.0)).log2())
            .sum(),
    }
}
