//! Evaluation modules of the Yangian of `gl_N` realized as dense operators:
//! monodromy, quantum minors, the transfer matrices `B_{k,Q}`, their
//! identities, and the Bethe eigen-system with its quasi-exponential kernels.

mod bethe;
mod identities;
mod monodromy;
mod tensor;
mod transfer;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bethe::{
    bbar_residual, bethe_eigensystem, form_k, multiset_distance, pipeline_roots, qe_kernel, BetheVector, DiffOpScalar,
    FormK, PipelineReport, PipelineVector,
};
pub use identities::{
    check_adjoint, check_antipode, check_b_n, check_commutativity, check_exchange, check_qdet, check_rtt,
    AntipodeResiduals, IdentityBattery,
};
pub use monodromy::{monodromy, monodromy_blocks, monodromy_from_r, Blocks};
pub use tensor::{elementary, flip, r_check, r_check_at, r_matrix, r_matrix_at, site_op, tensor_dim, TensorOp};
pub use transfer::{
    b_q, b_scalar, pencil_b, pencil_poles, t_minor, t_minor_raw, transfer_all, transfer_b, MonodromyCache, OpPencil,
};

/// Largest dense dimension `N^n` accepted.
pub const MAX_DIM: usize = 4096;

/// Distance below which a spectral parameter counts as sitting on a pole.
pub const POLE_TOL: f64 = 1e-12;

/// Rank `N = q.len()`, sites `n = z.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheSetup {
    pub q: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl BetheSetup {
    pub fn new(q: Vec<Complex64>, z: Vec<Complex64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::Shape("rank N must be at least 2".into()));
        }
        if z.is_empty() {
            return Err(Error::Shape("at least one site required".into()));
        }
        if q.iter().any(|c| c.norm() == 0.0) {
            return Err(Error::Shape("Q entries must be nonzero".into()));
        }
        let s = BetheSetup { q, z };
        if s.dim() > MAX_DIM {
            return Err(Error::Shape(format!("N^n = {} exceeds {MAX_DIM}", s.dim())));
        }
        Ok(s)
    }

    /// Setup of the rescaled problem: `Q̃ = Q^{2h}`, `z̃ = z/(2h)`.
    pub fn from_theorem_data(q: &[f64], z: &[Complex64], h: Complex64) -> Result<Self> {
        if h.norm() == 0.0 {
            return Err(Error::ZeroStep);
        }
        let two_h = h * 2.0;
        let qt = q
            .iter()
            .map(|&qi| crate::quasiexp::LogBase::from_real(qi).pow(two_h))
            .collect();
        BetheSetup::new(qt, z.iter().map(|zi| zi / two_h).collect())
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    pub fn sites(&self) -> usize {
        self.z.len()
    }

    pub fn dim(&self) -> usize {
        tensor_dim(self.rank(), self.sites())
    }

    /// Same setup at `-z` as used by the duality identities.
    pub fn negated_z(&self) -> Self {
        BetheSetup { q: self.q.clone(), z: self.z.iter().map(|z| -z).collect() }
    }

    pub fn with_q(&self, q: Vec<Complex64>) -> Self {
        BetheSetup { q, z: self.z.clone() }
    }

    pub fn with_z(&self, z: Vec<Complex64>) -> Self {
        BetheSetup { q: self.q.clone(), z }
    }

    pub(crate) fn check_off_pole(&self, x: Complex64) -> Result<()> {
        match self.z.iter().find(|&&zi| (x - zi).norm() <= POLE_TOL * (1.0 + zi.norm())) {
            Some(_) => Err(Error::Pole(x)),
            None => Ok(()),
        }
    }

    /// True when all sites are pairwise separated by more than `tol`.
    pub fn distinct_sites(&self, tol: f64) -> bool {
        (0..self.z.len()).all(|i| (0..i).all(|j| (self.z[i] - self.z[j]).norm() > tol))
    }
}
