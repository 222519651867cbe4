//! Quasi-exponential functions `p(x)·e^{μx}`, their spans, and discrete
//! Wronskians (Casorati determinants).
//!
//! Step convention: every API here takes the *half-step* `h`. The Casoratian
//! evaluates member `i` at `x + h(2j - N - 1)`, `j = 1..N`, so neighbouring
//! columns are `2h` apart.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{poly_det, CPoly};

/// Half-step under which the kernel of a unit-shift difference operator is
/// compared against `∏(x - z_i + (N+1)/2)`: neighbouring columns one apart.
pub const UNIT_SHIFT_HALF_STEP: f64 = 0.5;

/// Half-step of a Casoratian with full step `full`.
pub fn half_step_from_full(full: Complex64) -> Complex64 {
    full * 0.5
}

/// A base `Q` stored through its chosen logarithm: `Q^x := e^{μx}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogBase {
    pub mu: Complex64,
}

impl LogBase {
    pub fn new(mu: Complex64) -> Self {
        LogBase { mu }
    }

    /// Principal logarithm of `q` (argument in `(-π, π]`).
    pub fn from_base(q: Complex64) -> Self {
        LogBase { mu: q.ln() }
    }

    pub fn from_real(q: f64) -> Self {
        Self::from_base(Complex64::new(q, 0.0))
    }

    pub fn base(&self) -> Complex64 {
        self.mu.exp()
    }

    /// `Q^t` for the fixed branch.
    pub fn pow(&self, t: Complex64) -> Complex64 {
        (self.mu * t).exp()
    }

    /// Real when `Im μ ∈ πZ` within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        let k = self.mu.im / PI;
        (k - k.round()).abs() * PI <= tol
    }

    /// Same logarithm within `tol`; distinct branches are distinct bases.
    pub fn same_base(&self, other: &LogBase, tol: f64) -> bool {
        (self.mu - other.mu).norm() <= tol * self.mu.norm().max(1.0)
    }
}

/// `p(x)·Q^x` with `p` nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuasiExpRepr", into = "QuasiExpRepr")]
pub struct QuasiExp {
    p: CPoly,
    base: LogBase,
}

#[derive(Serialize, Deserialize)]
struct QuasiExpRepr {
    coeffs: Vec<Complex64>,
    mu: Complex64,
}

impl TryFrom<QuasiExpRepr> for QuasiExp {
    type Error = Error;
    fn try_from(r: QuasiExpRepr) -> Result<Self> {
        QuasiExp::new(CPoly::new(r.coeffs), LogBase::new(r.mu))
    }
}

impl From<QuasiExp> for QuasiExpRepr {
    fn from(q: QuasiExp) -> Self {
        QuasiExpRepr {
            coeffs: q.p.into_coeffs(),
            mu: q.base.mu,
        }
    }
}

impl QuasiExp {
    pub fn new(p: CPoly, base: LogBase) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(QuasiExp { p, base })
    }

    pub fn polynomial(p: CPoly) -> Result<Self> {
        Self::new(p, LogBase::new(Complex64::new(0.0, 0.0)))
    }

    pub fn p(&self) -> &CPoly {
        &self.p
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    pub fn mu(&self) -> Complex64 {
        self.base.mu
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.p.eval(x) * self.base.pow(x)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.base.is_real(tol) && self.p.is_real(tol)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        QuasiExp {
            p: self.p.scale(s),
            base: self.base,
        }
    }
}

/// A span of quasi-exponentials, given by a basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QESpaceRepr")]
pub struct QESpace {
    members: Vec<QuasiExp>,
}

#[derive(Deserialize)]
struct QESpaceRepr {
    members: Vec<QuasiExp>,
}

impl TryFrom<QESpaceRepr> for QESpace {
    type Error = Error;
    fn try_from(r: QESpaceRepr) -> Result<Self> {
        QESpace::new(r.members)
    }
}

impl QESpace {
    /// Checks independence through the differential Wronskian, which for
    /// analytic functions vanishes identically exactly when they are dependent.
    pub fn new(members: Vec<QuasiExp>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Empty);
        }
        let (w, scale) = differential_wronskian_scaled(&members)?;
        if w.norm_inf() <= 1e-11 * scale {
            return Err(Error::DependentMembers);
        }
        Ok(QESpace { members })
    }

    pub fn members(&self) -> &[QuasiExp] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn mu_total(&self) -> Complex64 {
        self.members.iter().map(|m| m.mu()).sum()
    }
}

/// Monic representative `w(x)·e^{μ_total x}` of the discrete Wronskian of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteWronskian {
    pub w: CPoly,
    pub mu_total: Complex64,
    /// Half-step.
    pub h: Complex64,
}

impl DiscreteWronskian {
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        self.w.roots()
    }
}

fn shifts(n: usize, h: Complex64) -> Vec<Complex64> {
    (1..=n)
        .map(|j| h * (2.0 * j as f64 - n as f64 - 1.0))
        .collect()
}

/// Casoratian with its natural magnitude (sum of term-size bounds), used to
/// tell cancellation noise from genuine coefficients.
fn casoratian_scaled(fs: &[QuasiExp], h: Complex64) -> Result<(CPoly, Complex64, f64)> {
    if fs.is_empty() {
        return Err(Error::Empty);
    }
    if h == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroStep);
    }
    let n = fs.len();
    let s = shifts(n, h);
    let matrix: Vec<Vec<CPoly>> = fs
        .iter()
        .map(|f| {
            s.iter()
                .map(|&sj| f.p.compose_shift(sj).scale(f.base.pow(sj)))
                .collect()
        })
        .collect();
    let scale = row_norm_product(&matrix);
    let det = poly_det(&matrix)?;
    Ok((det, fs.iter().map(|f| f.mu()).sum(), scale))
}

fn row_norm_product(matrix: &[Vec<CPoly>]) -> f64 {
    let n = matrix.len();
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    fact * matrix
        .iter()
        .map(|row| row.iter().map(|p| p.norm_inf() * p.coeffs().len() as f64).fold(0.0, f64::max))
        .product::<f64>()
}

/// `Wr^d_h(fs) = P(x)·e^{μ_total x}` with half-step `h`. `P` is not normalized.
pub fn casoratian(fs: &[QuasiExp], h: Complex64) -> Result<(CPoly, Complex64)> {
    let (p, mu, _) = casoratian_scaled(fs, h)?;
    Ok((p, mu))
}

/// Relative size below which Casoratian coefficients count as cancellation noise.
pub const CANCELLATION_REL: f64 = 1e-11;

/// Casoratian with noise-level leading coefficients removed.
pub fn casoratian_trimmed(fs: &[QuasiExp], h: Complex64) -> Result<(CPoly, Complex64)> {
    let (p, mu, scale) = casoratian_scaled(fs, h)?;
    Ok((trim_to_scale(&p, scale), mu))
}

fn trim_to_scale(p: &CPoly, scale: f64) -> CPoly {
    let cut = CANCELLATION_REL * scale;
    let mut coeffs = p.coeffs().to_vec();
    while coeffs.last().is_some_and(|c| c.norm() <= cut) {
        coeffs.pop();
    }
    CPoly::new(coeffs)
}

/// `Wr^d_h(V)`, normalized to a monic polynomial part.
pub fn monic_wronskian(v: &QESpace, h: Complex64) -> Result<DiscreteWronskian> {
    let (p, mu_total) = casoratian_trimmed(&v.members, h)?;
    let w = p.monic().ok_or(Error::DependentMembers)?;
    Ok(DiscreteWronskian { w, mu_total, h })
}

/// `det(d^{j-1} f_i / dx^{j-1})` as `(P, μ_total)`.
pub fn differential_wronskian(v: &QESpace) -> Result<(CPoly, Complex64)> {
    let (p, _) = differential_wronskian_scaled(&v.members)?;
    Ok((p, v.mu_total()))
}

fn differential_wronskian_scaled(fs: &[QuasiExp]) -> Result<(CPoly, f64)> {
    let n = fs.len();
    let matrix: Vec<Vec<CPoly>> = fs
        .iter()
        .map(|f| {
            // d/dx (p e^{μx}) = (p' + μ p) e^{μx}
            let mut row = Vec::with_capacity(n);
            let mut cur = f.p.clone();
            for _ in 0..n {
                let next = &cur.derivative() + &cur.scale(f.mu());
                row.push(cur);
                cur = next;
            }
            row
        })
        .collect();
    let scale = row_norm_product(&matrix);
    Ok((trim_to_scale(&poly_det(&matrix)?, scale), scale))
}

/// Differential Wronskian normalized to a monic polynomial part.
pub fn monic_differential_wronskian(v: &QESpace) -> Result<CPoly> {
    let (p, _) = differential_wronskian(v)?;
    p.monic().ok_or(Error::DependentMembers)
}

/// Coefficient rows of the members, one group per distinct base.
fn groups_by_base(members: &[QuasiExp], tol: f64) -> Vec<Vec<&QuasiExp>> {
    let mut groups: Vec<Vec<&QuasiExp>> = Vec::new();
    for m in members {
        match groups.iter_mut().find(|g| g[0].base.same_base(&m.base, tol)) {
            Some(g) => g.push(m),
            None => groups.push(vec![m]),
        }
    }
    groups
}

/// True when `V` is closed under coefficient conjugation, i.e. has a basis of
/// real quasi-exponentials. Compares ranks of `V`, `V̄`, and `V + V̄` group by
/// group, cutoff `tol·σ_max`.
pub fn is_real_space(v: &QESpace, tol: f64) -> Result<bool> {
    if v.members.iter().any(|m| !m.base.is_real(tol)) {
        return Err(Error::NonRealBase);
    }
    for group in groups_by_base(&v.members, tol) {
        let width = group
            .iter()
            .map(|m| m.p.coeffs().len())
            .max()
            .unwrap_or(0);
        let k = group.len();
        let mut stacked = DMatrix::<Complex64>::zeros(2 * k, width);
        for (i, m) in group.iter().enumerate() {
            // normalize rows so the cutoff is scale-free
            let inv = 1.0 / m.p.norm_inf();
            for (j, c) in m.p.coeffs().iter().enumerate() {
                stacked[(i, j)] = c * inv;
                stacked[(k + i, j)] = c.conj() * inv;
            }
        }
        let own = linalg::rank(&stacked.rows(0, k).into_owned(), tol);
        let conj = linalg::rank(&stacked.rows(k, k).into_owned(), tol);
        let union = linalg::rank(&stacked, tol);
        if own != conj || union != own {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Conjugation distance: smallest singular value that separates `V + V̄` from `V`,
/// the largest over base groups. Zero exactly for real spaces.
pub fn reality_defect(v: &QESpace, tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for group in groups_by_base(&v.members, tol) {
        let width = group.iter().map(|m| m.p.coeffs().len()).max().unwrap_or(0);
        let k = group.len();
        let mut stacked = DMatrix::<Complex64>::zeros(2 * k, width);
        for (i, m) in group.iter().enumerate() {
            let inv = 1.0 / m.p.norm_inf();
            for (j, c) in m.p.coeffs().iter().enumerate() {
                stacked[(i, j)] = c * inv;
                stacked[(k + i, j)] = c.conj() * inv;
            }
        }
        let sv = linalg::singular_values(&stacked);
        if let Some(&s) = sv.get(k) {
            worst = worst.max(s);
        }
    }
    worst
}

/// Change of variables `p(x)Q^x ↦ p(2hx + h(N+1))·Q^{2hx}` taking half-step `h`
/// data to the unit-shift convention.
pub fn rescale_space(v: &QESpace, h: Complex64) -> Result<QESpace> {
    if h == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroStep);
    }
    let n = v.dim() as f64;
    let two_h = h * 2.0;
    let members = v
        .members
        .iter()
        .map(|m| QuasiExp {
            p: m.p.compose_affine(two_h, h * (n + 1.0)),
            base: LogBase::new(m.mu() * two_h),
        })
        .collect();
    Ok(QESpace { members })
}

/// Monic form of `w(2hx + h(N+1))`: the discrete Wronskian of the rescaled
/// space at half-step 1/2 predicted from that of `V` at half-step `h`.
pub fn predicted_rescaled_wronskian(w: &DiscreteWronskian, n: usize) -> Option<CPoly> {
    w.w.compose_affine(w.h * 2.0, w.h * (n as f64 + 1.0)).monic()
}

/// Max coefficient deviation between the rescaled space's Wronskian and the
/// prediction from `V`'s Wronskian.
pub fn rescale_residual(v: &QESpace, h: Complex64) -> Result<f64> {
    let w = monic_wronskian(v, h)?;
    let vt = rescale_space(v, h)?;
    let wt = monic_wronskian(&vt, Complex64::new(UNIT_SHIFT_HALF_STEP, 0.0))?;
    let predicted = predicted_rescaled_wronskian(&w, v.dim()).ok_or(Error::DependentMembers)?;
    Ok(wt.w.max_coeff_diff(&predicted))
}

/// Hypothesis flags of the reality theorem for a given space and half-step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub re_h_zero: bool,
    pub bases_real: bool,
    pub w_real: bool,
    pub roots_in_strip: bool,
    pub max_abs_im_root: f64,
    pub abs_h: f64,
}

impl HypothesisReport {
    pub fn all(&self) -> bool {
        self.re_h_zero && self.bases_real && self.w_real && self.roots_in_strip
    }
}

pub fn theorem1_hypotheses(v: &QESpace, h: Complex64, tol: f64) -> Result<HypothesisReport> {
    let w = monic_wronskian(v, h)?;
    let roots = w.roots()?;
    let max_abs_im_root = roots.iter().map(|r| r.im.abs()).fold(0.0, f64::max);
    Ok(HypothesisReport {
        re_h_zero: h.re.abs() <= tol * h.norm().max(1.0),
        bases_real: v.members.iter().all(|m| m.base.is_real(tol)),
        w_real: w.w.is_real(tol),
        roots_in_strip: max_abs_im_root <= h.norm() + tol,
        max_abs_im_root,
        abs_h: h.norm(),
    })
}
