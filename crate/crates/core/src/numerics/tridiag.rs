//! Sturm-sequence bisection and inverse iteration for symmetric tridiagonal
//! matrices. Only the `k` lowest eigenpairs are computed.

use super::NumericsError;

/// Lowest eigenpairs of a symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Euclidean-orthonormal eigenvectors, `vectors[j]` belongs to `values[j]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let pivmin = pivot_floor(offdiag);
    sturm_count_with(diag, offdiag, x, pivmin)
}

fn sturm_count_with(diag: &[f64], offdiag: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { offdiag[i - 1] * offdiag[i - 1] };
        q = diag[i] - x - e2 / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(offdiag: &[f64]) -> f64 {
    let emax = offdiag.iter().fold(0.0f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE.max(f64::MIN_POSITIVE * emax)
}

fn gershgorin(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { offdiag[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The `k` smallest eigenpairs of the symmetric tridiagonal matrix with the
/// given diagonal and off-diagonal.
///
/// Eigenvalues come from bisection on Sturm counts; eigenvectors from inverse
/// iteration with partial-pivoting LU, re-orthogonalized inside clusters.
/// Each eigenvector is signed so that its last non-negligible entry is positive.
pub fn eig_sym_tridiag(diag: &[f64], offdiag: &[f64], k: usize) -> Result<TridiagEigen, NumericsError> {
    let n = diag.len();
    if n == 0 || offdiag.len() + 1 != n {
        return Err(NumericsError::InvalidInput(format!(
            "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
            n,
            offdiag.len()
        )));
    }
    if k == 0 || k > n {
        return Err(NumericsError::InvalidInput(format!("k = {k} outside 1..={n}")));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(NumericsError::InvalidInput("non-finite matrix entry".into()));
    }

    let (glo, ghi) = gershgorin(diag, offdiag);
    let norm = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = pivot_floor(offdiag);

    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        values.push(bisect_eigenvalue(diag, offdiag, j, glo, ghi, pivmin));
    }

    let cluster_tol = 1e-3 * norm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut seed = 0x2545_F491_4F6C_DD1Du64;
    for (j, &lambda) in values.iter().enumerate() {
        let cluster_start = (0..j)
            .rev()
            .take_while(|&i| (values[i + 1] - values[i]).abs() <= cluster_tol)
            .last()
            .unwrap_or(j);
        // a bare shift makes the factorization singular only for exactly
        // representable eigenvalues; perturb relative to the norm
        let shift = lambda + norm * 4.0 * f64::EPSILON * (1 + j - cluster_start) as f64;
        let lu = TridiagLu::factor(diag, offdiag, shift, norm);

        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        normalize(&mut x);

        let mut converged = false;
        for _ in 0..8 {
            lu.solve(&mut x);
            orthogonalize(&mut x, &vectors[cluster_start..j]);
            if normalize(&mut x) == 0.0 {
                return Err(NumericsError::Convergence { index: j });
            }
            if residual(diag, offdiag, &x, lambda) <= 1e-12 * norm {
                converged = true;
                break;
            }
        }
        if !converged && residual(diag, offdiag, &x, lambda) > 1e-8 * norm {
            return Err(NumericsError::Convergence { index: j });
        }
        fix_sign(&mut x);
        vectors.push(x);
    }
    Ok(TridiagEigen { values, vectors })
}

fn bisect_eigenvalue(diag: &[f64], offdiag: &[f64], j: usize, glo: f64, ghi: f64, pivmin: f64) -> f64 {
    let pad = 2.0 * f64::EPSILON * glo.abs().max(ghi.abs()) + pivmin;
    let (mut lo, mut hi) = (glo - pad, ghi + pad);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + pivmin {
            break;
        }
        if sturm_count_with(diag, offdiag, mid, pivmin) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn normalize(x: &mut [f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return 0.0;
    }
    let norm = scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
    norm
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = x.iter().zip(b).map(|(a, b)| a * b).sum();
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi -= dot * bi;
        }
    }
}

fn residual(diag: &[f64], offdiag: &[f64], x: &[f64], lambda: f64) -> f64 {
    let n = diag.len();
    let mut sum = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * x[i];
        if i > 0 {
            r += offdiag[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            r += offdiag[i] * x[i + 1];
        }
        sum += r * r;
    }
    sum.sqrt()
}

fn fix_sign(x: &mut [f64]) {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(&last) = x.iter().rev().find(|v| v.abs() >= 1e-8 * scale) {
        if last < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// LU factorization with partial pivoting of `T - shift I` (the LAPACK
/// `gttrf` layout: two super-diagonals of U, one multiplier per row).
struct TridiagLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], offdiag: &[f64], shift: f64, norm: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut du: Vec<f64> = offdiag.to_vec();
        let mut dl: Vec<f64> = offdiag.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = f64::EPSILON * norm;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = f64::EPSILON * norm;
        }
        Self {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        // forward: L
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        // backward: U
        // rescale on the fly to keep huge growth from overflowing
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.du2[i] * b[i + 2];
            }
            b[i] = v / self.d[i];
            if !b[i].is_finite() || b[i].abs() > 1e150 {
                let s = b[i..].iter().fold(0.0f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { m });
                let s = if s > 0.0 { s } else { 1.0 };
                for x in b[i..].iter_mut() {
                    *x = if x.is_finite() { *x / s } else { x.signum() };
                }
            }
        }
    }
}
