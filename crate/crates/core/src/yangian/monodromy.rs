use num_complex::Complex64;

use super::tensor::{elementary, r_matrix_at, site_op, tensor_dim, TensorOp};
use super::BetheSetup;
use crate::error::Result;
use crate::linalg::CMat;

/// Auxiliary blocks `T_ab(x)`, each an operator on `W^{⊗n}`.
pub type Blocks = Vec<Vec<CMat>>;

/// `T_ab(x; z)` built site by site: `T ← L^{(m)} T` with
/// `L^{(m)}_ac = δ_ac + E_ca^{(m)} / (x − z_m)`.
pub fn monodromy_blocks(setup: &BetheSetup, x: Complex64) -> Result<Blocks> {
    setup.check_off_pole(x)?;
    let (rank, sites) = (setup.rank(), setup.sites());
    let d = tensor_dim(rank, sites);
    let mut t: Blocks = (0..rank)
        .map(|a| {
            (0..rank)
                .map(|b| if a == b { CMat::identity(d, d) } else { CMat::zeros(d, d) })
                .collect()
        })
        .collect();
    for (m, &zm) in setup.z.iter().enumerate() {
        let u = (x - zm).inv();
        let es: Blocks = (0..rank)
            .map(|c| (0..rank).map(|a| site_op(rank, sites, m, &elementary(rank, c, a))).collect())
            .collect();
        let mut next: Blocks = t.clone();
        for a in 0..rank {
            for b in 0..rank {
                // δ_ac term plus Σ_c E_ca^{(m)} T_cb / u
                let mut acc = t[a][b].clone();
                for (c, row) in t.iter().enumerate() {
                    acc += &es[c][a] * &row[b] * u;
                }
                next[a][b] = acc;
            }
        }
        t = next;
    }
    Ok(t)
}

/// Full monodromy on `W^{⊗(n+1)}` with the auxiliary factor at position 0.
pub fn monodromy(setup: &BetheSetup, x: Complex64) -> Result<TensorOp> {
    let blocks = monodromy_blocks(setup, x)?;
    TensorOp::new(setup.rank(), setup.sites() + 1, assemble(&blocks))
}

pub(crate) fn assemble(blocks: &Blocks) -> CMat {
    let rank = blocks.len();
    let d = blocks[0][0].nrows();
    let mut m = CMat::zeros(rank * d, rank * d);
    for (a, row) in blocks.iter().enumerate() {
        for (b, blk) in row.iter().enumerate() {
            m.view_mut((a * d, b * d), (d, d)).copy_from(blk);
        }
    }
    m
}

pub(crate) fn split(m: &CMat, rank: usize) -> Blocks {
    let d = m.nrows() / rank;
    (0..rank)
        .map(|a| (0..rank).map(|b| m.view((a * d, b * d), (d, d)).into_owned()).collect())
        .collect()
}

/// `R_(0n)(x − z_n) ⋯ R_(01)(x − z_1)` as a plain product of R-matrices.
pub fn monodromy_from_r(setup: &BetheSetup, x: Complex64) -> Result<TensorOp> {
    let (rank, sites) = (setup.rank(), setup.sites() + 1);
    let mut t = TensorOp::identity(rank, sites);
    for (m, &zm) in setup.z.iter().enumerate() {
        t = &r_matrix_at(rank, sites, 0, m + 1, x - zm)? * &t;
    }
    Ok(t)
}
