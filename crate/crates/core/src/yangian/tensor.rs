//! Dense operators on `W^{⊗n}`, `W = C^N`, in the lexicographic basis
//! `v_{a_1} ⊗ … ⊗ v_{a_n}` with site 0 the most significant digit.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Clone, Debug, PartialEq)]
pub struct TensorOp {
    rank: usize,
    sites: usize,
    mat: CMat,
}

/// `N^n`.
pub fn tensor_dim(rank: usize, sites: usize) -> usize {
    rank.pow(sites as u32)
}

impl TensorOp {
    pub fn new(rank: usize, sites: usize, mat: CMat) -> Result<Self> {
        let d = tensor_dim(rank, sites);
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Shape(format!(
                "{}x{} matrix for N = {rank}, n = {sites}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(TensorOp { rank, sites, mat })
    }

    pub fn identity(rank: usize, sites: usize) -> Self {
        let d = tensor_dim(rank, sites);
        TensorOp { rank, sites, mat: CMat::identity(d, d) }
    }

    pub fn zeros(rank: usize, sites: usize) -> Self {
        let d = tensor_dim(rank, sites);
        TensorOp { rank, sites, mat: CMat::zeros(d, d) }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn scale(&self, s: Complex64) -> Self {
        TensorOp { mat: &self.mat * s, ..self.clone() }
    }

    pub fn adjoint(&self) -> Self {
        TensorOp { mat: self.mat.adjoint(), ..self.clone() }
    }

    pub fn transpose(&self) -> Self {
        TensorOp { mat: self.mat.transpose(), ..self.clone() }
    }

    pub fn conj(&self) -> Self {
        TensorOp { mat: self.mat.map(|c| c.conj()), ..self.clone() }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.mat.clone().try_inverse().ok_or(Error::Linalg("singular operator"))?;
        Ok(TensorOp { mat: inv, ..self.clone() })
    }

    pub fn op_norm(&self) -> f64 {
        linalg::op_norm(&self.mat)
    }

    /// `‖self − other‖ / max(‖self‖, ‖other‖)`, zero when both vanish.
    pub fn rel_residual(&self, other: &TensorOp) -> f64 {
        let scale = self.op_norm().max(other.op_norm());
        let diff = linalg::op_norm(&(&self.mat - &other.mat));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    pub fn commutator(&self, other: &TensorOp) -> TensorOp {
        &(self * other) - &(other * self)
    }
}

impl Mul for &TensorOp {
    type Output = TensorOp;
    fn mul(self, rhs: &TensorOp) -> TensorOp {
        TensorOp { mat: &self.mat * &rhs.mat, ..self.clone() }
    }
}

impl Add for &TensorOp {
    type Output = TensorOp;
    fn add(self, rhs: &TensorOp) -> TensorOp {
        TensorOp { mat: &self.mat + &rhs.mat, ..self.clone() }
    }
}

impl Sub for &TensorOp {
    type Output = TensorOp;
    fn sub(self, rhs: &TensorOp) -> TensorOp {
        TensorOp { mat: &self.mat - &rhs.mat, ..self.clone() }
    }
}

/// Matrix unit `E_ab` on `C^N`.
pub fn elementary(rank: usize, a: usize, b: usize) -> CMat {
    let mut m = CMat::zeros(rank, rank);
    m[(a, b)] = Complex64::new(1.0, 0.0);
    m
}

/// `1 ⊗ … ⊗ M ⊗ … ⊗ 1` with `M` at site `i`.
pub fn site_op(rank: usize, sites: usize, i: usize, m: &CMat) -> CMat {
    let left = CMat::identity(tensor_dim(rank, i), tensor_dim(rank, i));
    let right = CMat::identity(tensor_dim(rank, sites - i - 1), tensor_dim(rank, sites - i - 1));
    linalg::kron(&linalg::kron(&left, m), &right)
}

fn digits(mut idx: usize, rank: usize, sites: usize) -> Vec<usize> {
    let mut d = vec![0; sites];
    for k in (0..sites).rev() {
        d[k] = idx % rank;
        idx /= rank;
    }
    d
}

fn undigits(d: &[usize], rank: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * rank + x)
}

/// Flip `P_(ij)` exchanging tensor factors `i` and `j`.
pub fn flip(rank: usize, sites: usize, i: usize, j: usize) -> TensorOp {
    let d = tensor_dim(rank, sites);
    let mut m = CMat::zeros(d, d);
    for col in 0..d {
        let mut dg = digits(col, rank, sites);
        dg.swap(i, j);
        m[(undigits(&dg, rank), col)] = Complex64::new(1.0, 0.0);
    }
    TensorOp { rank, sites, mat: m }
}

/// `R(x) = 1 + P/x` on `W ⊗ W`.
pub fn r_matrix(rank: usize, x: Complex64) -> Result<TensorOp> {
    r_matrix_at(rank, 2, 0, 1, x)
}

/// `R_(ij)(x)` inside `W^{⊗ sites}`.
pub fn r_matrix_at(rank: usize, sites: usize, i: usize, j: usize, x: Complex64) -> Result<TensorOp> {
    if x.norm() == 0.0 {
        return Err(Error::Pole(x));
    }
    let p = flip(rank, sites, i, j);
    Ok(&TensorOp::identity(rank, sites) + &p.scale(x.inv()))
}

/// `Ř(x) = xP + 1` on `W ⊗ W`.
pub fn r_check(rank: usize, x: Complex64) -> TensorOp {
    r_check_at(rank, 2, 0, 1, x)
}

/// `Ř_(ij)(x)` inside `W^{⊗ sites}`.
pub fn r_check_at(rank: usize, sites: usize, i: usize, j: usize, x: Complex64) -> TensorOp {
    &flip(rank, sites, i, j).scale(x) + &TensorOp::identity(rank, sites)
}
