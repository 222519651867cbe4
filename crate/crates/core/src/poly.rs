//! Dense univariate polynomials and rational functions over `Complex64`.
//!
//! Coefficients are stored in ascending degree. The zero polynomial is the
//! empty coefficient list, and every nonzero polynomial has a nonzero leading
//! coefficient (exact zeros are trimmed on construction).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::perm::signed_permutations;

/// Largest matrix accepted by [`poly_det`]; the Leibniz sum has `n!` terms.
pub const MAX_DET_SIZE: usize = 8;

/// Comparison tolerance: `|a - b| <= abs + rel * scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    pub fn close(&self, a: Complex64, b: Complex64, scale: f64) -> bool {
        (a - b).norm() <= self.abs + self.rel * scale
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        CPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(1)
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        CPoly { coeffs }
    }

    /// `x - r`.
    pub fn linear(r: Complex64) -> Self {
        Self::new(vec![-r, Complex64::new(1.0, 0.0)])
    }

    /// Monic polynomial `∏ (x - r_k)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots
            .iter()
            .fold(CPoly::one(), |acc, &r| &acc * &CPoly::linear(r))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `x^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<Complex64> {
        self.coeffs.last().copied()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Largest coefficient modulus, zero for the zero polynomial.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Returns `q` with `q(x) = p(x + a)`, by binomial expansion.
    pub fn compose_shift(&self, a: Complex64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        // p(x+a) = Σ_k c_k Σ_m C(k,m) a^{k-m} x^m
        for (k, &c) in self.coeffs.iter().enumerate() {
            let mut binom = 1.0;
            let mut apow = Complex64::new(1.0, 0.0);
            for m in (0..=k).rev() {
                out[m] += c * binom * apow;
                binom = binom * m as f64 / (k - m + 1) as f64;
                apow *= a;
            }
        }
        Self::new(out)
    }

    /// Returns `q` with `q(x) = p(s * x + t)`.
    pub fn compose_affine(&self, s: Complex64, t: Complex64) -> Self {
        let shifted = self.compose_shift(t);
        let mut spow = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(shifted.coeffs.len());
        for &c in &shifted.coeffs {
            out.push(c * spow);
            spow *= s;
        }
        Self::new(out)
    }

    /// Drops leading coefficients with modulus `<= rel * norm_inf`.
    pub fn trimmed(&self, rel: f64) -> Self {
        let cut = rel * self.norm_inf();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= cut) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    /// Divides by the leading coefficient; `None` for the zero polynomial.
    pub fn monic(&self) -> Option<Self> {
        let lead = self.lead()?;
        Some(self.scale(lead.inv()))
    }

    /// Long division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &CPoly) -> Result<(CPoly, CPoly)> {
        let dd = d.degree().ok_or(Error::ZeroPolynomial)?;
        let lead = d.coeffs[dd];
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((CPoly::zero(), self.clone()));
        }
        let mut q = vec![Complex64::new(0.0, 0.0); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = r[k + dd] / lead;
            q[k] = t;
            for (j, &c) in d.coeffs.iter().enumerate() {
                r[k + j] -= t * c;
            }
        }
        r.truncate(dd);
        Ok((CPoly::new(q), CPoly::new(r)))
    }

    /// Largest coefficientwise difference.
    pub fn max_coeff_diff(&self, other: &CPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CPoly, tol: Tolerance) -> bool {
        let scale = self.norm_inf().max(other.norm_inf());
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| tol.close(self.coeff(k), other.coeff(k), scale))
    }

    /// True when every coefficient has `|Im| <= tol * max(1, norm_inf)`.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.norm_inf().max(1.0);
        self.coeffs.iter().all(|c| c.im.abs() <= tol * scale)
    }

    /// All `deg(p)` roots with multiplicity, from the eigenvalues of the
    /// companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let Some(deg) = self.degree() else {
            return Err(Error::ZeroPolynomial);
        };
        if deg == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[deg];
        if deg == 1 {
            return Ok(vec![-self.coeffs[0] / lead]);
        }
        let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
        for i in 1..deg {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..deg {
            companion[(i, deg - 1)] = -self.coeffs[i] / lead;
        }
        let (values, _, _) = linalg::schur(companion)?;
        Ok(values)
    }
}

impl From<Vec<Complex64>> for CPoly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        CPoly::new(coeffs)
    }
}

impl From<CPoly> for Vec<Complex64> {
    fn from(p: CPoly) -> Self {
        p.coeffs
    }
}

impl fmt::Display for CPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &CPoly {
    type Output = CPoly;
    fn add(self, rhs: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &CPoly {
    type Output = CPoly;
    fn sub(self, rhs: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &CPoly {
    type Output = CPoly;
    fn mul(self, rhs: &CPoly) -> CPoly {
        if self.is_zero() || rhs.is_zero() {
            return CPoly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CPoly {
            type Output = CPoly;
            fn $m(self, rhs: CPoly) -> CPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Determinant of a square matrix of polynomials by the Leibniz sum.
pub fn poly_det(m: &[Vec<CPoly>]) -> Result<CPoly> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::Shape(format!("polynomial matrix is not square ({n} rows)")));
    }
    if n > MAX_DET_SIZE {
        return Err(Error::Shape(format!(
            "polynomial determinant limited to {MAX_DET_SIZE}x{MAX_DET_SIZE}, got {n}"
        )));
    }
    if n == 0 {
        return Ok(CPoly::one());
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); 1];
    for (perm, sign) in signed_permutations(n) {
        let mut term = CPoly::constant(Complex64::new(sign, 0.0));
        for (i, &j) in perm.iter().enumerate() {
            term = &term * &m[i][j];
            if term.is_zero() {
                break;
            }
        }
        if acc.len() < term.coeffs.len() {
            acc.resize(term.coeffs.len(), Complex64::new(0.0, 0.0));
        }
        for (a, c) in acc.iter_mut().zip(term.coeffs) {
            *a += c;
        }
    }
    Ok(CPoly::new(acc))
}

/// Polynomial of degree `<= degree_bound` through `points`; least squares when
/// overdetermined. Returns the fit and its max absolute residual.
pub fn interpolate(points: &[(Complex64, Complex64)], degree_bound: usize) -> Result<(CPoly, f64)> {
    if points.len() < degree_bound + 1 {
        return Err(Error::Interpolation(format!(
            "{} nodes cannot fix degree {degree_bound}",
            points.len()
        )));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::Interpolation(format!("repeated node {}", a.0)));
        }
    }
    // Work in t = (x - c)/r to keep the Vandermonde matrix tame.
    let c = points.iter().map(|p| p.0).sum::<Complex64>() / points.len() as f64;
    let r = points
        .iter()
        .map(|p| (p.0 - c).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let rows = points.len();
    let cols = degree_bound + 1;
    let mut vander = DMatrix::<Complex64>::zeros(rows, cols);
    let mut rhs = DMatrix::<Complex64>::zeros(rows, 1);
    for (i, &(x, y)) in points.iter().enumerate() {
        let t = (x - c) / r;
        let mut tp = Complex64::new(1.0, 0.0);
        for j in 0..cols {
            vander[(i, j)] = tp;
            tp *= t;
        }
        rhs[(i, 0)] = y;
    }
    let sol = linalg::least_squares(vander, rhs)?;
    let in_t = CPoly::new(sol.iter().copied().collect());
    // q(x) = in_t((x - c)/r)
    let rinv = Complex64::new(1.0 / r, 0.0);
    let poly = in_t.compose_affine(rinv, -c * rinv);
    let residual = points
        .iter()
        .map(|&(x, y)| (poly.eval(x) - y).norm())
        .fold(0.0, f64::max);
    Ok((poly, residual))
}

/// `num / den` with `den` monic. Not kept in lowest terms.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    num: CPoly,
    den: CPoly,
}

impl RationalFn {
    pub fn new(num: CPoly, den: CPoly) -> Result<Self> {
        let lead = den.lead().ok_or(Error::ZeroPolynomial)?;
        let inv = lead.inv();
        Ok(RationalFn {
            num: num.scale(inv),
            den: den.scale(inv),
        })
    }

    pub fn from_poly(p: CPoly) -> Self {
        RationalFn {
            num: p,
            den: CPoly::one(),
        }
    }

    pub fn num(&self) -> &CPoly {
        &self.num
    }

    pub fn den(&self) -> &CPoly {
        &self.den
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.num.eval(x) / self.den.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn trims_exact_zeros() {
        let p = CPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), Some(0));
        assert!(CPoly::new(vec![c(0.0, 0.0)]).is_zero());
        assert_eq!(CPoly::zero().degree(), None);
    }

    #[test]
    fn compose_shift_examples() {
        let x2 = CPoly::monomial(2);
        assert_eq!(x2.compose_shift(c(0.0, 0.0)), x2);
        let h = c(0.0, 0.7);
        assert_eq!(CPoly::x().compose_shift(h), CPoly::new(vec![h, c(1.0, 0.0)]));
        // (x-1)(x+1) at x+1 is x^2 + 2x
        let p = CPoly::from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let q = p.compose_shift(c(1.0, 0.0));
        assert!(q.approx_eq(&CPoly::from_real(&[0.0, 2.0, 1.0]), Tolerance::default()));
    }

    #[test]
    fn compose_affine_matches_eval() {
        let p = CPoly::from_real(&[1.0, -2.0, 0.5, 3.0]);
        let (s, t) = (c(0.0, 2.0), c(1.0, 3.0));
        let q = p.compose_affine(s, t);
        let x = c(0.3, -0.4);
        assert!((q.eval(x) - p.eval(s * x + t)).norm() < 1e-12);
    }

    #[test]
    fn roots_examples() {
        let r = sorted(CPoly::from_real(&[-1.0, 0.0, 1.0]).roots().unwrap());
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-12 && (r[1] - c(1.0, 0.0)).norm() < 1e-12);
        let r = sorted(CPoly::from_real(&[1.0, 0.0, 1.0]).roots().unwrap());
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-12 && (r[1] - c(0.0, 1.0)).norm() < 1e-12);

        let want = vec![c(0.3, 0.0), c(1.0, 0.5), c(1.0, -0.5)];
        let got = sorted(CPoly::from_roots(&want).roots().unwrap());
        for (g, w) in got.iter().zip(sorted(want)) {
            assert!((g - w).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_polynomial_has_no_roots() {
        let err = CPoly::zero().roots().unwrap_err();
        assert_eq!(err.to_string(), "no roots of zero polynomial");
    }

    #[test]
    fn det_examples() {
        assert_eq!(poly_det(&[vec![CPoly::one()]]).unwrap(), CPoly::one());
        let h = c(0.0, 0.25);
        let m = vec![
            vec![CPoly::one(), CPoly::one()],
            vec![CPoly::x().compose_shift(-h), CPoly::x().compose_shift(h)],
        ];
        let d = poly_det(&m).unwrap();
        assert!(d.approx_eq(&CPoly::constant(h * 2.0), Tolerance::default()));

        let p = CPoly::from_real(&[1.0, 2.0]);
        let q = CPoly::from_real(&[0.0, -1.0, 1.0]);
        let diag = vec![vec![p.clone(), CPoly::zero()], vec![CPoly::zero(), q.clone()]];
        assert_eq!(poly_det(&diag).unwrap(), &p * &q);
    }

    #[test]
    fn det_rejects_non_square() {
        assert!(poly_det(&[vec![CPoly::one(), CPoly::one()]]).is_err());
    }

    #[test]
    fn interpolate_examples() {
        let one = c(1.0, 0.0);
        let (p, _) = interpolate(&[(c(0.0, 0.0), one), (one, one)], 0).unwrap();
        assert!(p.approx_eq(&CPoly::one(), Tolerance::default()));

        let pts: Vec<_> = [0.0, 1.0, 2.0].iter().map(|&t| (c(t, 0.0), c(t * t, 0.0))).collect();
        let (p, res) = interpolate(&pts, 2).unwrap();
        assert!(p.approx_eq(&CPoly::monomial(2), Tolerance::default()));
        assert!(res < 1e-12);

        let target = CPoly::from_real(&[2.0, 3.0, 1.0]);
        let nodes = [c(0.3, 1.2), c(-2.0, 0.1), c(1.7, -0.9), c(0.0, 2.5), c(-0.8, -1.4)];
        let pts: Vec<_> = nodes.iter().map(|&x| (x, target.eval(x))).collect();
        let (p, res) = interpolate(&pts, 2).unwrap();
        assert!(p.approx_eq(&target, Tolerance::default()));
        assert!(res < 1e-10);
    }

    #[test]
    fn interpolate_rejects_repeated_nodes() {
        let pts = [(c(1.0, 0.0), c(0.0, 0.0)), (c(1.0, 0.0), c(2.0, 0.0))];
        assert!(matches!(interpolate(&pts, 1), Err(Error::Interpolation(_))));
    }

    #[test]
    fn rational_den_is_monic() {
        let r = RationalFn::new(CPoly::from_real(&[2.0]), CPoly::from_real(&[1.0, 2.0])).unwrap();
        assert_eq!(r.den().lead(), Some(c(1.0, 0.0)));
        assert!((r.eval(c(1.0, 0.0)) - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn div_rem_recombines() {
        let p = CPoly::from_real(&[1.0, -2.0, 0.0, 3.0, 1.0]);
        let d = CPoly::new(vec![c(0.5, 1.0), c(2.0, 0.0)]);
        let (q, r) = p.div_rem(&d).unwrap();
        assert!(r.degree().unwrap_or(0) < 1);
        assert!((&(&q * &d) + &r).approx_eq(&p, Tolerance::default()));
    }
}
