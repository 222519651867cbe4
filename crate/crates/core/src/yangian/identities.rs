//! Dense checks of the algebraic identities satisfied by the monodromy, its
//! quantum minors and the transfer matrices. Every check returns a relative
//! operator-norm residual.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::monodromy::{monodromy, monodromy_blocks, split, Blocks};
use super::tensor::{elementary, r_check_at, r_matrix, r_matrix_at, TensorOp};
use super::transfer::{b_q, b_scalar, t_minor, transfer_all, transfer_b};
use super::BetheSetup;
use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::perm::{combinations, signed_permutations};

fn rel(a: &CMat, b: &CMat) -> f64 {
    let scale = linalg::op_norm(a).max(linalg::op_norm(b));
    let diff = linalg::op_norm(&(a - b));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn embed(blocks: &Blocks, first: bool) -> CMat {
    let rank = blocks.len();
    let d = blocks[0][0].nrows();
    let aux_id = CMat::identity(rank, rank);
    let mut out = CMat::zeros(rank * rank * d, rank * rank * d);
    for (a, row) in blocks.iter().enumerate() {
        for (b, blk) in row.iter().enumerate() {
            let e = elementary(rank, a, b);
            let aux = if first { linalg::kron(&e, &aux_id) } else { linalg::kron(&aux_id, &e) };
            out += linalg::kron(&aux, blk);
        }
    }
    out
}

/// `R_(12)(x−y) T_(1)(x) T_(2)(y) = T_(2)(y) T_(1)(x) R_(12)(x−y)` on two
/// auxiliary copies tensored with `W^{⊗n}`.
pub fn check_rtt(setup: &BetheSetup, x: Complex64, y: Complex64) -> Result<f64> {
    let t1 = embed(&monodromy_blocks(setup, x)?, true);
    let t2 = embed(&monodromy_blocks(setup, y)?, false);
    let d = setup.dim();
    let r = linalg::kron(r_matrix(setup.rank(), x - y)?.mat(), &CMat::identity(d, d));
    Ok(rel(&(&r * &t1 * &t2), &(&t2 * &t1 * &r)))
}

/// `max_{j,k} ‖[B_j(x), B_k(y)]‖ / (‖B_j(x)‖ ‖B_k(y)‖)` over `1 <= j, k <= N`.
pub fn check_commutativity(setup: &BetheSetup, x: Complex64, y: Complex64) -> Result<f64> {
    let bx = transfer_all(setup, x)?;
    let by = transfer_all(setup, y)?;
    let mut worst: f64 = 0.0;
    for bj in &bx[1..] {
        for bk in &by[1..] {
            let scale = bj.op_norm() * bk.op_norm();
            worst = worst.max(bj.commutator(bk).op_norm() / scale.max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// `T^{∧N}(x) = b(x; z)·Id`.
pub fn check_qdet(setup: &BetheSetup, x: Complex64) -> Result<f64> {
    let all: Vec<usize> = (0..setup.rank()).collect();
    let q = t_minor(setup, &all, &all, x)?;
    Ok(q.rel_residual(&TensorOp::identity(setup.rank(), setup.sites()).scale(b_scalar(&setup.z, x))))
}

/// `B_N(x) = b_Q(x; z)·Id`.
pub fn check_b_n(setup: &BetheSetup, x: Complex64) -> Result<f64> {
    let b = transfer_b(setup, setup.rank(), x)?;
    Ok(b.rel_residual(&TensorOp::identity(setup.rank(), setup.sites()).scale(b_q(setup, x))))
}

/// `Ř_(i,i+1)(z_i − z_{i+1}) B_j(x; z) = B_j(x; σz) Ř_(i,i+1)(z_i − z_{i+1})`
/// for `j = 0..=N`, sites `i, i+1` counted from zero.
pub fn check_exchange(setup: &BetheSetup, i: usize, x: Complex64) -> Result<Vec<f64>> {
    let mut zs = setup.z.clone();
    zs.swap(i, i + 1);
    let swapped = setup.with_z(zs);
    let rc = r_check_at(setup.rank(), setup.sites(), i, i + 1, setup.z[i] - setup.z[i + 1]);
    let lhs = transfer_all(setup, x)?;
    let rhs = transfer_all(&swapped, x)?;
    Ok(lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (&rc * l).rel_residual(&(r * &rc)))
        .collect())
}

/// `B_j(x; z) = b_Q(x; z)·(B_{N−j, Q̄^{-1}}(−x̄ − 1; −z̄))^†`.
pub fn check_adjoint(setup: &BetheSetup, j: usize, x: Complex64) -> Result<f64> {
    let n = setup.rank();
    let mirror = BetheSetup {
        q: setup.q.iter().map(|q| q.conj().inv()).collect(),
        z: setup.z.iter().map(|z| -z.conj()).collect(),
    };
    let lhs = transfer_b(setup, j, x)?;
    let rhs = transfer_b(&mirror, n - j, -x.conj() - 1.0)?.adjoint().scale(b_q(setup, x));
    Ok(lhs.rel_residual(&rhs))
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AntipodeResiduals {
    /// Product of inverse R-matrices against the inverse monodromy.
    pub inverse_product: f64,
    /// `T̃(x; z)` transposed in all factors against `T(−x; −z) b(x−1; z)/b(x; z)`.
    pub st: f64,
    /// Minor duality, worst over `1 <= k < N` and all index sets.
    pub stk: f64,
    /// Antipode of minors against complementary minors, worst case.
    pub nt: f64,
    /// `B_{k,Q}(x; z) = b_Q(x; z)·(B_{N−k,Q^{-1}}(−x−1; −z))^T`, per `k = 0..=N`.
    pub b_relation: Vec<f64>,
}

impl AntipodeResiduals {
    pub fn max(&self) -> f64 {
        self.b_relation
            .iter()
            .copied()
            .fold(self.inverse_product.max(self.st).max(self.stk).max(self.nt), f64::max)
    }
}

fn complement(rank: usize, idx: &[usize]) -> Vec<usize> {
    (0..rank).filter(|i| !idx.contains(i)).collect()
}

fn parity(rows: &[usize], cols: &[usize]) -> f64 {
    if (rows.iter().sum::<usize>() + cols.iter().sum::<usize>()) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Blocks of the inverse monodromy at `x`.
fn inverse_blocks(setup: &BetheSetup, x: Complex64) -> Result<Blocks> {
    Ok(split(monodromy(setup, x)?.inverse()?.mat(), setup.rank()))
}

/// Image of the antipode applied to a quantum minor: the permutation sum of
/// inverse-monodromy blocks in reversed order.
fn antipode_minor(inv: &[Blocks], rows: &[usize], cols: &[usize]) -> CMat {
    let k = rows.len();
    let d = inv[0][0][0].nrows();
    let mut out = CMat::zeros(d, d);
    for (perm, sgn) in signed_permutations(k) {
        let mut m = CMat::identity(d, d);
        for s in (0..k).rev() {
            m *= &inv[s][rows[s]][cols[perm[s]]];
        }
        out += m * Complex64::new(sgn, 0.0);
    }
    out
}

pub fn check_antipode(setup: &BetheSetup, x: Complex64) -> Result<AntipodeResiduals> {
    let (rank, sites) = (setup.rank(), setup.sites());
    let neg = setup.negated_z();
    let mut out = AntipodeResiduals::default();

    let t = monodromy(setup, x)?;
    let t_inv = t.inverse()?;
    let mut prod = TensorOp::identity(rank, sites + 1);
    for (m, &zm) in setup.z.iter().enumerate() {
        prod = &prod * &r_matrix_at(rank, sites + 1, 0, m + 1, x - zm)?.inverse()?;
    }
    out.inverse_product = prod.rel_residual(&t_inv);
    let rhs = monodromy(&neg, -x)?.scale(b_scalar(&setup.z, x - 1.0) / b_scalar(&setup.z, x));
    out.st = t_inv.transpose().rel_residual(&rhs);

    let bx = b_scalar(&setup.z, x);
    let inv: Vec<Blocks> = (0..rank)
        .map(|s| inverse_blocks(setup, x - s as f64))
        .collect::<Result<_>>()?;
    for k in 1..rank {
        let sets = combinations(rank, k);
        for rows in &sets {
            for cols in &sets {
                let (rc, cc) = (complement(rank, rows), complement(rank, cols));
                let sgn = Complex64::new(parity(rows, cols), 0.0);
                let lhs = t_minor(setup, rows, cols, x)?;
                let dual = t_minor(&neg, &rc, &cc, -x - 1.0)?.transpose().scale(bx * sgn);
                out.stk = out.stk.max(lhs.rel_residual(&dual));

                let s_minor = antipode_minor(&inv, rows, cols) * bx;
                let comp = t_minor(setup, &cc, &rc, x - k as f64)?.into_mat() * sgn;
                out.nt = out.nt.max(rel(&s_minor, &comp));
            }
        }
    }

    let inv_q = setup.with_q(setup.q.iter().map(|q| q.inv()).collect());
    let inv_q_neg = inv_q.negated_z();
    let bqx = b_q(setup, x);
    let lhs = transfer_all(setup, x)?;
    let rhs = transfer_all(&inv_q_neg, -x - 1.0)?;
    out.b_relation = (0..=rank)
        .map(|k| lhs[k].rel_residual(&rhs[rank - k].transpose().scale(bqx)))
        .collect();
    Ok(out)
}

/// Worst residual of each identity over a list of sample pairs `(x, y)`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IdentityBattery {
    pub rank: usize,
    pub sites: usize,
    pub rtt: f64,
    pub commutativity: f64,
    pub qdet: f64,
    pub b_n: f64,
    pub exchange: f64,
    pub adjoint: f64,
    pub antipode: AntipodeResiduals,
}

impl IdentityBattery {
    pub fn run(setup: &BetheSetup, points: &[(Complex64, Complex64)]) -> Result<Self> {
        let mut out = IdentityBattery { rank: setup.rank(), sites: setup.sites(), ..Default::default() };
        let mut antipode = AntipodeResiduals { b_relation: vec![0.0; setup.rank() + 1], ..Default::default() };
        for &(x, y) in points {
            out.rtt = out.rtt.max(check_rtt(setup, x, y)?);
            out.commutativity = out.commutativity.max(check_commutativity(setup, x, y)?);
            out.qdet = out.qdet.max(check_qdet(setup, x)?);
            out.b_n = out.b_n.max(check_b_n(setup, x)?);
            for i in 0..setup.sites().saturating_sub(1) {
                for r in check_exchange(setup, i, x)? {
                    out.exchange = out.exchange.max(r);
                }
            }
            for j in 0..=setup.rank() {
                out.adjoint = out.adjoint.max(check_adjoint(setup, j, x)?);
            }
            let a = check_antipode(setup, x)?;
            antipode.inverse_product = antipode.inverse_product.max(a.inverse_product);
            antipode.st = antipode.st.max(a.st);
            antipode.stk = antipode.stk.max(a.stk);
            antipode.nt = antipode.nt.max(a.nt);
            for (w, r) in antipode.b_relation.iter_mut().zip(a.b_relation) {
                *w = w.max(r);
            }
        }
        out.antipode = antipode;
        Ok(out)
    }

    pub fn max(&self) -> f64 {
        [self.rtt, self.commutativity, self.qdet, self.b_n, self.exchange, self.adjoint, self.antipode.max()]
            .into_iter()
            .fold(0.0, f64::max)
    }
}
