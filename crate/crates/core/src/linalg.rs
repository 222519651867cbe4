//! Thin dense linear-algebra helpers over `nalgebra` complex matrices.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Complex Schur form `m = q t q^†`; returns the diagonal of `t` with `q` and `t`.
pub fn schur(m: CMat) -> Result<(Vec<Complex64>, CMat, CMat)> {
    let n = m.nrows();
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let schur = Schur::try_new(m, f64::EPSILON * scale, 10_000)
        .ok_or(Error::Linalg("Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();
    let values = (0..n).map(|i| t[(i, i)]).collect();
    Ok((values, q, t))
}

/// Eigenpairs of a matrix whose spectrum is simple: eigenvalues pairwise
/// separated by more than `gap * max(1, |λ|max)`. Eigenvectors are unit norm.
pub fn simple_eigenpairs(m: &CMat, gap: f64) -> Result<Vec<(Complex64, CVec)>> {
    let n = m.nrows();
    let (values, q, t) = schur(m.clone())?;
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            if (values[i] - values[j]).norm() <= gap * scale {
                return Err(Error::NonGeneric(format!(
                    "eigenvalues {} and {} closer than {:e}",
                    values[i],
                    values[j],
                    gap * scale
                )));
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // back substitution on the triangular factor
        let mut y = CVec::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in i + 1..=k {
                s += t[(i, l)] * y[l];
            }
            y[i] = -s / (t[(i, i)] - t[(k, k)]);
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        out.push((values[k], v));
    }
    Ok(out)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Spectral norm.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with cutoff `rel * σ_max`.
pub fn rank(m: &CMat, rel: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel * top).count()
}

/// Orthonormal basis of the numerical null space, cutoff `rel * σ_max`.
/// Also returns the singular values, decreasing, padded with zeros to `ncols`.
pub fn null_space(m: &CMat, rel: f64) -> (Vec<CVec>, Vec<f64>) {
    let cols = m.ncols();
    // pad to at least square so the SVD exposes a full right basis
    let rows = m.nrows().max(cols);
    let mut padded = CMat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let top = sv.first().copied().unwrap_or(0.0);
    let basis = order
        .iter()
        .filter(|&&i| svd.singular_values[i] <= rel * top || top == 0.0)
        .map(|&i| v_t.row(i).adjoint())
        .collect();
    (basis, sv)
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: CMat, b: CMat) -> Result<CMat> {
    let svd = SVD::new(a, true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(&b, top * 1e-14).map_err(Error::Linalg)
}

/// Solves a square system, falling back to least squares when LU fails.
pub fn solve(a: &CMat, b: &CVec) -> Result<CVec> {
    if let Some(x) = a.clone().lu().solve(b) {
        if x.iter().all(|c| c.is_finite()) {
            return Ok(x);
        }
    }
    let bm = CMat::from_column_slice(b.len(), 1, b.as_slice());
    let x = least_squares(a.clone(), bm)?;
    Ok(CVec::from_column_slice(x.as_slice()))
}

/// Eigenvalues of the Hermitian part `(m + m^†)/2`, increasing.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}
