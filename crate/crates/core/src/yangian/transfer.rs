use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::monodromy::{monodromy_blocks, Blocks};
use super::tensor::TensorOp;
use super::BetheSetup;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::perm::{combinations, sign, signed_permutations};
use crate::poly::CPoly;

/// Monodromy blocks at `x, x − 1, …, x − k + 1`.
pub struct MonodromyCache {
    x: Complex64,
    shifts: Vec<Blocks>,
}

impl MonodromyCache {
    pub fn new(setup: &BetheSetup, x: Complex64, k: usize) -> Result<Self> {
        let shifts = (0..k)
            .map(|s| monodromy_blocks(setup, x - s as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(MonodromyCache { x, shifts })
    }

    pub fn x(&self) -> Complex64 {
        self.x
    }

    pub fn depth(&self) -> usize {
        self.shifts.len()
    }

    /// `Σ_σ sgn σ · T_{r_1 c_σ1}(x) T_{r_2 c_σ2}(x − 1) ⋯`, any index tuples.
    pub fn minor_raw(&self, rows: &[usize], cols: &[usize]) -> CMat {
        let k = rows.len();
        assert!(k <= self.depth() && cols.len() == k, "minor size exceeds cache depth");
        let d = self.shifts[0][0][0].nrows();
        let mut out = CMat::zeros(d, d);
        for (perm, sgn) in signed_permutations(k) {
            let mut m = CMat::identity(d, d);
            for s in 0..k {
                m *= &self.shifts[s][rows[s]][cols[perm[s]]];
            }
            out += m * Complex64::new(sgn, 0.0);
        }
        out
    }
}

fn check_indices(setup: &BetheSetup, rows: &[usize], cols: &[usize]) -> Result<()> {
    if rows.len() != cols.len() || rows.len() > setup.rank() {
        return Err(Error::Shape(format!(
            "minor of {} rows and {} columns in rank {}",
            rows.len(),
            cols.len(),
            setup.rank()
        )));
    }
    if rows.iter().chain(cols).any(|&i| i >= setup.rank()) {
        return Err(Error::Shape("minor index out of range".into()));
    }
    Ok(())
}

/// Quantum minor by the permutation sum, for arbitrary index tuples.
pub fn t_minor_raw(setup: &BetheSetup, rows: &[usize], cols: &[usize], x: Complex64) -> Result<TensorOp> {
    check_indices(setup, rows, cols)?;
    let cache = MonodromyCache::new(setup, x, rows.len())?;
    TensorOp::new(setup.rank(), setup.sites(), cache.minor_raw(rows, cols))
}

/// Sorts a tuple; `None` on a repeated index, else the sorted tuple and sign.
fn sort_signed(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by_key(|&i| idx[i]);
    let sorted: Vec<usize> = order.iter().map(|&i| idx[i]).collect();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sorted, sign(&order)))
}

/// Quantum minor `T^{∧k}_{rows, cols}(x)`. Increasing tuples are evaluated
/// directly; other tuples are reordered with the permutation sign.
pub fn t_minor(setup: &BetheSetup, rows: &[usize], cols: &[usize], x: Complex64) -> Result<TensorOp> {
    check_indices(setup, rows, cols)?;
    let (Some((r, sr)), Some((c, sc))) = (sort_signed(rows), sort_signed(cols)) else {
        return Ok(TensorOp::zeros(setup.rank(), setup.sites()));
    };
    Ok(t_minor_raw(setup, &r, &c, x)?.scale(Complex64::new(sr * sc, 0.0)))
}

/// `b(x; z) = ∏ (x − z_i + 1)/(x − z_i)`.
pub fn b_scalar(z: &[Complex64], x: Complex64) -> Complex64 {
    z.iter().map(|&zi| (x - zi + 1.0) / (x - zi)).product()
}

/// `b_Q(x; z) = Q_1 ⋯ Q_N · b(x; z)`.
pub fn b_q(setup: &BetheSetup, x: Complex64) -> Complex64 {
    setup.q.iter().product::<Complex64>() * b_scalar(&setup.z, x)
}

fn transfer_from_cache(setup: &BetheSetup, cache: &MonodromyCache, k: usize) -> CMat {
    let d = setup.dim();
    if k == 0 {
        return CMat::identity(d, d);
    }
    let mut out = CMat::zeros(d, d);
    for idx in combinations(setup.rank(), k) {
        let weight: Complex64 = idx.iter().map(|&i| setup.q[i]).product();
        out += cache.minor_raw(&idx, &idx) * weight;
    }
    out
}

/// `B_{k,Q}(x; z) = Σ_{I} Q_I T^{∧k}_{II}(x; z)` over increasing `I`, `B_0 = 1`.
pub fn transfer_b(setup: &BetheSetup, k: usize, x: Complex64) -> Result<TensorOp> {
    if k > setup.rank() {
        return Err(Error::Shape(format!("k = {k} exceeds N = {}", setup.rank())));
    }
    let cache = MonodromyCache::new(setup, x, k)?;
    TensorOp::new(setup.rank(), setup.sites(), transfer_from_cache(setup, &cache, k))
}

/// All `B_0(x), …, B_N(x)` sharing one cache.
pub fn transfer_all(setup: &BetheSetup, x: Complex64) -> Result<Vec<TensorOp>> {
    let cache = MonodromyCache::new(setup, x, setup.rank())?;
    (0..=setup.rank())
        .map(|k| TensorOp::new(setup.rank(), setup.sites(), transfer_from_cache(setup, &cache, k)))
        .collect()
}

/// `B_{k,Q}(x) = num(x)/d(x)` with `d(x) = ∏_{s<k} ∏_i (x − s − z_i)`.
#[derive(Clone, Debug)]
pub struct OpPencil {
    pub k: usize,
    pub den: CPoly,
    rank: usize,
    sites: usize,
    /// Row-major entries of the numerator.
    num: Vec<CPoly>,
    /// Max absolute misfit at the interpolation nodes.
    pub fit_residual: f64,
}

/// Poles of `B_k`: `z_i + s`, `0 <= s < k`.
pub fn pencil_poles(setup: &BetheSetup, k: usize) -> Vec<Complex64> {
    (0..k)
        .flat_map(|s| setup.z.iter().map(move |&zi| zi + s as f64))
        .collect()
}

/// `M` points on a circle enclosing all of `poles` with margin.
pub(crate) fn circle_nodes(poles: &[Complex64], m: usize, phase: f64) -> (Complex64, f64, Vec<Complex64>) {
    let center = if poles.is_empty() {
        Complex64::new(0.0, 0.0)
    } else {
        poles.iter().sum::<Complex64>() / poles.len() as f64
    };
    let radius = 1.0 + poles.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
    let nodes = (0..m)
        .map(|t| center + Complex64::from_polar(radius, 2.0 * PI * (t as f64 + phase) / m as f64))
        .collect();
    (center, radius, nodes)
}

/// Least-squares fit of several value columns by polynomials of degree
/// `<= deg` over circle nodes, returned in the variable `x`.
pub(crate) fn fit_on_circle(
    center: Complex64,
    radius: f64,
    nodes: &[Complex64],
    values: &CMat,
    deg: usize,
) -> Result<(Vec<CPoly>, f64)> {
    let rows = nodes.len();
    let mut vander = DMatrix::<Complex64>::zeros(rows, deg + 1);
    for (i, &x) in nodes.iter().enumerate() {
        let u = (x - center) / radius;
        let mut p = Complex64::new(1.0, 0.0);
        for j in 0..=deg {
            vander[(i, j)] = p;
            p *= u;
        }
    }
    let sol = linalg::least_squares(vander.clone(), values.clone())?;
    let misfit = (&vander * &sol - values).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let rinv = Complex64::new(1.0 / radius, 0.0);
    let polys = (0..values.ncols())
        .map(|col| CPoly::new(sol.column(col).iter().copied().collect()).compose_affine(rinv, -center * rinv))
        .collect();
    Ok((polys, misfit))
}

/// Recovers `B_k` as a matrix of polynomials over its common denominator by
/// sampling on a circle around the poles.
pub fn pencil_b(setup: &BetheSetup, k: usize) -> Result<OpPencil> {
    if k > setup.rank() {
        return Err(Error::Shape(format!("k = {k} exceeds N = {}", setup.rank())));
    }
    let poles = pencil_poles(setup, k);
    let den = CPoly::from_roots(&poles);
    let deg = poles.len();
    let m = 2 * (deg + 1);
    let (center, radius, nodes) = circle_nodes(&poles, m, 0.25);
    let d = setup.dim();
    let mut values = CMat::zeros(m, d * d);
    for (t, &x) in nodes.iter().enumerate() {
        let b = transfer_b(setup, k, x)?.into_mat() * den.eval(x);
        for i in 0..d {
            for j in 0..d {
                values[(t, i * d + j)] = b[(i, j)];
            }
        }
    }
    let (num, fit_residual) = fit_on_circle(center, radius, &nodes, &values, deg)?;
    Ok(OpPencil { k, den, rank: setup.rank(), sites: setup.sites(), num, fit_residual })
}

impl OpPencil {
    pub fn numerator(&self, i: usize, j: usize) -> &CPoly {
        let d = super::tensor_dim(self.rank, self.sites);
        &self.num[i * d + j]
    }

    pub fn eval(&self, x: Complex64) -> Result<TensorOp> {
        let dv = self.den.eval(x);
        if dv.norm() == 0.0 {
            return Err(Error::Pole(x));
        }
        let d = super::tensor_dim(self.rank, self.sites);
        let m = CMat::from_fn(d, d, |i, j| self.num[i * d + j].eval(x) / dv);
        TensorOp::new(self.rank, self.sites, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup() -> BetheSetup {
        BetheSetup::new(vec![c(1.3, 0.2), c(0.6, -0.5)], vec![c(0.3, 0.1), c(-0.7, 0.4)]).unwrap()
    }

    #[test]
    fn first_minor_is_block() {
        let s = setup();
        let x = c(0.2, 0.9);
        let t = monodromy_blocks(&s, x).unwrap();
        assert_eq!(t_minor(&s, &[1], &[0], x).unwrap().mat(), &t[1][0]);
    }

    #[test]
    fn qdet_is_scalar() {
        let s = setup();
        let x = c(0.2, 0.9);
        let q = t_minor(&s, &[0, 1], &[0, 1], x).unwrap();
        let expect = TensorOp::identity(2, 2).scale(b_scalar(&s.z, x));
        assert!(q.rel_residual(&expect) < 1e-13);
    }

    #[test]
    fn row_swap_negates() {
        let s = setup();
        let x = c(-0.4, 0.5);
        let a = t_minor(&s, &[0, 1], &[0, 1], x).unwrap();
        let swapped = t_minor(&s, &[1, 0], &[0, 1], x).unwrap();
        assert!(swapped.rel_residual(&a.scale(c(-1.0, 0.0))) < 1e-14);
        // the permutation sum itself is antisymmetric in the rows
        let raw = t_minor_raw(&s, &[1, 0], &[0, 1], x).unwrap();
        assert!(raw.rel_residual(&swapped) < 1e-12);
        assert_eq!(t_minor(&s, &[1, 1], &[0, 1], x).unwrap(), TensorOp::zeros(2, 2));
    }

    #[test]
    fn scalar_b_value() {
        assert_eq!(b_scalar(&[c(0.0, 0.0)], c(1.0, 0.0)), c(2.0, 0.0));
    }

    #[test]
    fn pencil_reproduces_direct_evaluation() {
        let s = setup();
        for k in 0..=2 {
            let p = pencil_b(&s, k).unwrap();
            for x in [c(0.37, -1.1), c(2.5, 0.3), c(-1.0, 0.25)] {
                let direct = transfer_b(&s, k, x).unwrap();
                assert!(p.eval(x).unwrap().rel_residual(&direct) < 1e-9, "k = {k}");
            }
        }
    }
}
