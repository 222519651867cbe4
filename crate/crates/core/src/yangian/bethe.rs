//! Bethe eigenvectors, their scalar difference operators, and the
//! quasi-exponential kernels of those operators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::r_check_at;
use super::transfer::{b_q, circle_nodes, fit_on_circle, pencil_poles, transfer_b};
use super::BetheSetup;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::perm::signed_permutations;
use crate::poly::{CPoly, RationalFn};
use crate::quasiexp::{monic_wronskian, LogBase, QESpace, QuasiExp, UNIT_SHIFT_HALF_STEP};

/// Spectral gap below which two eigenvalues of the random combination count
/// as one cluster.
pub const EIGEN_GAP: f64 = 1e-7;
pub const MAX_RETRIES: usize = 5;
/// Relative singular-value cutoff for kernel extraction.
pub const KERNEL_TOL: f64 = 1e-8;

/// `(D f)(x) = Σ_{j=0}^{N} (−1)^j B_j(x) f(x − j)` with `B_0 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOpScalar {
    /// `B_1, …, B_N`.
    pub coeffs: Vec<RationalFn>,
}

impl DiffOpScalar {
    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    /// `B_j(x)`, with `B_0 = 1`.
    pub fn coeff(&self, j: usize, x: Complex64) -> Complex64 {
        if j == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            self.coeffs[j - 1].eval(x)
        }
    }

    pub fn apply(&self, f: &QuasiExp, x: Complex64) -> Complex64 {
        (0..=self.rank())
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                self.coeff(j, x) * f.eval(x - j as f64) * s
            })
            .sum()
    }

    /// Common multiple `L` of the denominators and the cofactors `L / den_j`
    /// for `j = 0..=N`.
    fn cleared(&self) -> Result<(CPoly, Vec<CPoly>)> {
        let divides = |d: &CPoly, l: &CPoly| -> Result<bool> {
            let (_, r) = l.div_rem(d)?;
            Ok(r.norm_inf() <= 1e-10 * l.norm_inf().max(1.0))
        };
        let mut l = CPoly::one();
        for c in &self.coeffs {
            let d = c.den();
            if divides(d, &l)? {
                continue;
            }
            if divides(&l, d)? {
                l = d.clone();
            } else {
                l = &l * d;
            }
        }
        let mut rest = vec![l.clone()];
        for c in &self.coeffs {
            rest.push(l.div_rem(c.den())?.0);
        }
        Ok((l, rest))
    }
}

#[derive(Clone, Debug)]
pub struct BetheVector {
    pub vector: CVec,
    pub op: DiffOpScalar,
    /// `max_j ‖B_j(x_t) v − λ_j(x_t) v‖` over the sample nodes.
    pub eigen_residual: f64,
    /// Worst misfit of the numerator interpolation.
    pub fit_residual: f64,
}

impl BetheVector {
    /// Eigenvalue `B_{j,v}(x)` as a rational function value.
    pub fn eigenvalue(&self, j: usize, x: Complex64) -> Complex64 {
        self.op.coeff(j, x)
    }
}

fn random_point(rng: &mut ChaCha8Rng, setup: &BetheSetup) -> Complex64 {
    let scale = 1.0 + setup.z.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(1.0..2.0)) * scale
}

fn combination(setup: &BetheSetup, rng: &mut ChaCha8Rng) -> Result<CMat> {
    let d = setup.dim();
    let mut m = CMat::zeros(d, d);
    let top = (setup.rank() - 1).max(1);
    for j in 1..=top {
        for _ in 0..2 {
            let x = random_point(rng, setup);
            let w = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m += transfer_b(setup, j, x)?.into_mat() * w;
        }
    }
    Ok(m)
}

/// Common eigenvectors of the Bethe algebra with their scalar operators.
pub fn bethe_eigensystem(setup: &BetheSetup) -> Result<Vec<BetheVector>> {
    if !setup.distinct_sites(1e-9) {
        return Err(Error::NonGeneric("sites z_i coincide".into()));
    }
    let mut pairs = None;
    let mut last = String::new();
    for attempt in 0..=MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ attempt as u64);
        let m = combination(setup, &mut rng)?;
        match linalg::simple_eigenpairs(&m, EIGEN_GAP) {
            Ok(p) => {
                pairs = Some(p);
                break;
            }
            Err(Error::NonGeneric(msg)) => last = msg,
            Err(e) => return Err(e),
        }
    }
    let pairs = pairs.ok_or(Error::NonGeneric(last))?;
    let vectors: Vec<CVec> = pairs.into_iter().map(|(_, v)| v).collect();
    let (rank, sites) = (setup.rank(), setup.sites());
    let mut coeffs: Vec<Vec<RationalFn>> = vec![Vec::with_capacity(rank); vectors.len()];
    let mut eigen_res = vec![0.0f64; vectors.len()];
    let mut fit_res = vec![0.0f64; vectors.len()];
    for j in 1..=rank {
        let poles = pencil_poles(setup, j);
        let den = CPoly::from_roots(&poles);
        let deg = j * sites;
        let m = 2 * (deg + 1);
        let (center, radius, nodes) = circle_nodes(&poles, m, 0.37);
        let mut values = CMat::zeros(m, vectors.len());
        for (t, &x) in nodes.iter().enumerate() {
            let b = transfer_b(setup, j, x)?.into_mat();
            let dv = den.eval(x);
            for (k, v) in vectors.iter().enumerate() {
                let bv = &b * v;
                let lambda = v.dotc(&bv);
                let r = (&bv - v * lambda).norm() / b.norm().max(f64::MIN_POSITIVE);
                eigen_res[k] = eigen_res[k].max(r);
                values[(t, k)] = lambda * dv;
            }
        }
        let (nums, misfit) = fit_on_circle(center, radius, &nodes, &values, deg)?;
        for (k, num) in nums.into_iter().enumerate() {
            let scale = values.column(k).iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            fit_res[k] = fit_res[k].max(misfit / scale);
            coeffs[k].push(RationalFn::new(num, den.clone())?);
        }
    }
    Ok(vectors
        .into_iter()
        .zip(coeffs)
        .enumerate()
        .map(|(k, (vector, c))| BetheVector {
            vector,
            op: DiffOpScalar { coeffs: c },
            eigen_residual: eigen_res[k],
            fit_residual: fit_res[k],
        })
        .collect())
}

/// Reduces kernel vectors so their leading degrees are distinct.
fn echelon(mut rows: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let width = rows.first().map_or(0, Vec::len);
    let scale = rows.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let mut done = vec![false; rows.len()];
    for col in (0..width).rev() {
        let pivot = (0..rows.len())
            .filter(|&r| !done[r])
            .max_by(|&a, &b| rows[a][col].norm().partial_cmp(&rows[b][col].norm()).unwrap());
        let Some(p) = pivot else { break };
        if rows[p][col].norm() <= 1e-8 * scale {
            continue;
        }
        let lead = rows[p][col];
        for c in rows[p].iter_mut() {
            *c /= lead;
        }
        for r in 0..rows.len() {
            if r != p {
                let f = rows[r][col];
                let pivot_row = rows[p].clone();
                for (c, pc) in rows[r].iter_mut().zip(pivot_row) {
                    *c -= f * pc;
                }
            }
        }
        done[p] = true;
    }
    rows
}

/// Quasi-exponential kernel of `D` with the given bases: for each base `Q`,
/// the polynomials `p` of degree `<= degree_bound` solving
/// `Σ_j (−1)^j B_j(x) Q^{−j} p(x − j) = 0`.
pub fn qe_kernel(d: &DiffOpScalar, bases: &[LogBase], degree_bound: usize) -> Result<QESpace> {
    if bases.len() != d.rank() {
        return Err(Error::Shape(format!("{} bases for an operator of order {}", bases.len(), d.rank())));
    }
    let (_, rest) = d.cleared()?;
    let nums: Vec<CPoly> = std::iter::once(CPoly::one())
        .chain(d.coeffs.iter().map(|c| c.num().clone()))
        .collect();
    let mut groups: Vec<(LogBase, usize)> = Vec::new();
    for b in bases {
        match groups.iter_mut().find(|(g, _)| g.same_base(b, 1e-9)) {
            Some(g) => g.1 += 1,
            None => groups.push((*b, 1)),
        }
    }
    let mut members = Vec::with_capacity(bases.len());
    let mut found = 0;
    for (base, mult) in groups {
        // scale each column by its largest term so cancellation shows up as
        // a small singular value instead of being normalized away
        let (cols, norms): (Vec<CPoly>, Vec<f64>) = (0..=degree_bound)
            .map(|e| {
                (0..=d.rank()).fold((CPoly::zero(), 0.0f64), |(acc, scale), j| {
                    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let shifted = CPoly::monomial(e).compose_shift(Complex64::new(-(j as f64), 0.0));
                    let weight = base.pow(Complex64::new(-(j as f64), 0.0)) * s;
                    let term = (&(&nums[j] * &rest[j]) * &shifted).scale(weight);
                    let scale = scale.max(term.norm_inf());
                    (&acc + &term, scale)
                })
            })
            .map(|(c, n)| (c, if n > 0.0 { n } else { 1.0 }))
            .unzip();
        let height = cols.iter().map(|c| c.coeffs().len()).max().unwrap_or(0).max(1);
        let a = CMat::from_fn(height, cols.len(), |r, k| cols[k].coeff(r) / norms[k]);
        let (basis, _) = linalg::null_space(&a, KERNEL_TOL);
        found += basis.len();
        if basis.len() != mult {
            continue;
        }
        let rows: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|v| v.iter().zip(&norms).map(|(c, n)| c / n).collect())
            .collect();
        for row in echelon(rows) {
            let p = CPoly::new(row).trimmed(1e-9);
            let p = p.monic().ok_or(Error::ZeroPolynomial)?;
            members.push(QuasiExp::new(p, base)?);
        }
    }
    if found != bases.len() || members.len() != bases.len() {
        return Err(Error::KernelDimension { found, expected: bases.len() });
    }
    QESpace::new(members)
}

/// Outcome of eigenvector → operator → kernel → Wronskian for one vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineVector {
    pub roots: Vec<Complex64>,
    pub root_error: f64,
    /// `max |D f| / max |B_j f|` over kernel members and sample points.
    pub kernel_residual: f64,
    /// `max |B_{N,v}(x) − b_Q(x)| / |b_Q(x)|` at the sample points.
    pub b_n_residual: f64,
    pub eigen_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub expected_roots: Vec<Complex64>,
    pub vectors: Vec<PipelineVector>,
    pub max_root_error: f64,
    pub max_kernel_residual: f64,
    pub max_b_n_residual: f64,
}

/// Smallest max-distance matching of two equal-size multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    signed_permutations(a.len())
        .into_iter()
        .map(|(p, _)| a.iter().zip(&p).map(|(x, &j)| (x - b[j]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

fn sample_points(setup: &BetheSetup) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    (0..5).map(|_| random_point(&mut rng, setup)).collect()
}

/// Runs the full eigenvector pipeline and compares each kernel's monic
/// Casoratian at unit full step against `∏ (x − z_i + (N+1)/2)`.
pub fn pipeline_roots(setup: &BetheSetup) -> Result<PipelineReport> {
    let rank = setup.rank();
    let shift = (rank as f64 + 1.0) / 2.0;
    let expected: Vec<Complex64> = setup.z.iter().map(|z| z - shift).collect();
    let bases: Vec<LogBase> = setup.q.iter().map(|&q| LogBase::from_base(q)).collect();
    let points = sample_points(setup);
    let mut vectors = Vec::new();
    for bv in bethe_eigensystem(setup)? {
        let space = qe_kernel(&bv.op, &bases, setup.sites())?;
        let w = monic_wronskian(&space, Complex64::new(UNIT_SHIFT_HALF_STEP, 0.0))?;
        let roots = w.roots()?;
        let root_error = multiset_distance(&roots, &expected);
        let mut kernel_residual: f64 = 0.0;
        let mut b_n_residual: f64 = 0.0;
        for &x in &points {
            for f in space.members() {
                let scale = (0..=rank)
                    .map(|j| (bv.op.coeff(j, x) * f.eval(x - j as f64)).norm())
                    .fold(0.0, f64::max)
                    .max(f64::MIN_POSITIVE);
                kernel_residual = kernel_residual.max(bv.op.apply(f, x).norm() / scale);
            }
            let bq = b_q(setup, x);
            b_n_residual = b_n_residual.max((bv.eigenvalue(rank, x) - bq).norm() / bq.norm());
        }
        vectors.push(PipelineVector {
            roots,
            root_error,
            kernel_residual,
            b_n_residual,
            eigen_residual: bv.eigen_residual,
        });
    }
    let max = |f: fn(&PipelineVector) -> f64| vectors.iter().map(f).fold(0.0, f64::max);
    Ok(PipelineReport {
        max_root_error: max(|v| v.root_error),
        max_kernel_residual: max(|v| v.kernel_residual),
        max_b_n_residual: max(|v| v.b_n_residual),
        expected_roots: expected,
        vectors,
    })
}

/// Worst relative defect of `conj(B_{j,v}(x)) = conj(b_Q(x))·B_{N−j,v}(−x̄ − 1)`.
pub fn bbar_residual(setup: &BetheSetup, vectors: &[BetheVector], points: &[Complex64]) -> f64 {
    let rank = setup.rank();
    let mut worst: f64 = 0.0;
    for v in vectors {
        for &x in points {
            let bq = b_q(setup, x);
            for j in 0..=rank {
                let lhs = v.eigenvalue(j, x).conj();
                let rhs = bq.conj() * v.eigenvalue(rank - j, -x.conj() - 1.0);
                let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
                worst = worst.max((lhs - rhs).norm() / scale);
            }
        }
    }
    worst
}

/// Gram matrix of `⟨v, w⟩_k = ⟨v, ∏_{i<k} Ř_(2i,2i+1)(z_{2i} − z_{2i+1}) w⟩`
/// (sites from zero), the standard form linear in its first argument.
#[derive(Clone, Debug)]
pub struct FormK {
    pub k: usize,
    pub gram: CMat,
    pub min_eigenvalue: f64,
    pub hermitian_defect: f64,
    /// `max_i |z_{2i+1} + conj(z_{2i})|`: zero when each pair is mirrored.
    pub pairing_defect: f64,
}

pub fn form_k(setup: &BetheSetup, k: usize) -> Result<FormK> {
    if 2 * k > setup.sites() {
        return Err(Error::Shape(format!("{k} pairs need {} sites", 2 * k)));
    }
    let (rank, sites) = (setup.rank(), setup.sites());
    let d = setup.dim();
    let mut g = CMat::identity(d, d);
    let mut pairing_defect: f64 = 0.0;
    for i in 0..k {
        let (a, b) = (setup.z[2 * i], setup.z[2 * i + 1]);
        pairing_defect = pairing_defect.max((b + a.conj()).norm());
        g *= r_check_at(rank, sites, 2 * i, 2 * i + 1, a - b).into_mat();
    }
    // ⟨e_a, G e_b⟩ = conj(G_ab)
    let gram = g.map(|c| c.conj());
    let hermitian_defect = (&gram - gram.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let min_eigenvalue = linalg::hermitian_eigenvalues(&gram)[0];
    Ok(FormK { k, gram, min_eigenvalue, hermitian_defect, pairing_defect })
}
