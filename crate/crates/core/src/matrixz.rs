//! Matrix form of the reality problem: `Z = diag(a) + (1/sin(λ_i − λ_j))_{i≠j}`
//! whose characteristic polynomial is the Casoratian (half-step `i`) of the
//! space spanned by `p_i(x) e^{λ_i x}`, `p_i = x − a_i − Σ_{j≠i} cot(λ_i − λ_j)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::poly::{poly_det, CPoly};
use crate::quasiexp::{monic_wronskian, LogBase, QESpace, QuasiExp};

/// Half-step of the Casoratian matching `det(x − Z)`.
pub const LEMMA_HALF_STEP: Complex64 = Complex64::new(0.0, 1.0);
/// `λ_i − λ_j` closer than this to `πZ` is rejected.
pub const LAMBDA_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZData {
    pub a: Vec<Complex64>,
    pub lambda: Vec<f64>,
}

impl ZData {
    pub fn new(a: Vec<Complex64>, lambda: Vec<f64>) -> Result<Self> {
        let d = ZData { a, lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.len() != self.lambda.len() {
            return Err(Error::Shape(format!("{} values of a, {} of lambda", self.a.len(), self.lambda.len())));
        }
        if self.a.is_empty() {
            return Err(Error::Empty);
        }
        for i in 0..self.lambda.len() {
            for j in 0..i {
                let t = (self.lambda[i] - self.lambda[j]) / PI;
                if (t - t.round()).abs() * PI <= LAMBDA_TOL {
                    return Err(Error::LambdaCollision { i: j, j: i });
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.a.len()
    }
}

/// `Z_ii = a_i`, `Z_ij = 1/sin(λ_i − λ_j)` for every `i ≠ j`.
pub fn build_z(d: &ZData) -> Result<CMat> {
    d.validate()?;
    let n = d.size();
    Ok(CMat::from_fn(n, n, |i, j| {
        if i == j {
            d.a[i]
        } else {
            Complex64::new(1.0 / (d.lambda[i] - d.lambda[j]).sin(), 0.0)
        }
    }))
}

/// Shifts `Σ_{j≠i} cot(λ_i − λ_j)`.
fn cot_sums(lambda: &[f64]) -> Vec<f64> {
    (0..lambda.len())
        .map(|i| {
            (0..lambda.len())
                .filter(|&j| j != i)
                .map(|j| {
                    let t = lambda[i] - lambda[j];
                    t.cos() / t.sin()
                })
                .sum()
        })
        .collect()
}

pub fn space_from_z(d: &ZData) -> Result<QESpace> {
    d.validate()?;
    let shifts = cot_sums(&d.lambda);
    let members = d
        .a
        .iter()
        .zip(&d.lambda)
        .zip(shifts)
        .map(|((&a, &l), s)| QuasiExp::new(CPoly::linear(a + s), LogBase::new(Complex64::new(l, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    QESpace::new(members)
}

/// `det(x − Z)` by cofactor expansion over polynomial entries.
pub fn char_poly(z: &CMat) -> Result<CPoly> {
    poly_det(&shifted_matrix(z))
}

fn shifted_matrix(z: &CMat) -> Vec<Vec<CPoly>> {
    let n = z.nrows();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { CPoly::linear(z[(i, j)]) } else { CPoly::constant(-z[(i, j)]) })
                .collect()
        })
        .collect()
}

/// Max coefficient gap between `det(x − Z)` and the monic Casoratian of
/// the associated space at half-step `i`.
pub fn verify_lemma_wron(d: &ZData) -> Result<f64> {
    let cp = char_poly(&build_z(d)?)?;
    let w = monic_wronskian(&space_from_z(d)?, LEMMA_HALF_STEP)?;
    Ok(cp.max_coeff_diff(&w.w))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem1aReport {
    pub char_poly_real: bool,
    pub roots_in_strip: bool,
    pub max_abs_im_root: f64,
    pub max_abs_im_a: f64,
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
    pub lemma_residual: f64,
    /// `(ε, ‖εZ(ε) − Z_0‖)` with `a = b/ε`, `λ = εμ` (see [`epsilon_trend`]).
    pub epsilon_trend: Vec<(f64, f64)>,
}

impl Theorem1aReport {
    /// False only for a counterexample: hypotheses hold, conclusion fails.
    pub fn consistent(&self) -> bool {
        !self.hypotheses_hold || self.conclusion_holds
    }
}

pub const EPSILONS: [f64; 3] = [1.0, 0.1, 0.01];

/// Distance of `εZ(ε)` from its limit `diag(b) + (1/(μ_i − μ_j))_{i≠j}` under
/// `a_i = b_i/ε`, `λ_i = εμ_i`.
pub fn epsilon_trend(b: &[Complex64], mu: &[f64], eps: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = b.len();
    let limit = CMat::from_fn(n, n, |i, j| {
        if i == j {
            b[i]
        } else {
            Complex64::new(1.0 / (mu[i] - mu[j]), 0.0)
        }
    });
    eps.iter()
        .map(|&e| {
            let d = ZData::new(b.iter().map(|bi| bi / e).collect(), mu.iter().map(|m| m * e).collect())?;
            let scaled = build_z(&d)? * Complex64::new(e, 0.0);
            Ok((e, linalg::op_norm(&(scaled - &limit))))
        })
        .collect()
}

pub fn theorem1a_check(d: &ZData, tol: f64) -> Result<Theorem1aReport> {
    let z = build_z(d)?;
    let cp = char_poly(&z)?;
    let roots = cp.roots()?;
    let max_abs_im_root = roots.iter().map(|r| r.im.abs()).fold(0.0, f64::max);
    let max_abs_im_a = d.a.iter().map(|a| a.im.abs()).fold(0.0, f64::max);
    let char_poly_real = cp.is_real(tol);
    let roots_in_strip = max_abs_im_root <= 1.0 + tol;
    let hypotheses_hold = char_poly_real && roots_in_strip;
    // the degeneration needs distinct μ, so reuse λ as μ
    let epsilon_trend = epsilon_trend(&d.a, &d.lambda, &EPSILONS)?;
    Ok(Theorem1aReport {
        char_poly_real,
        roots_in_strip,
        max_abs_im_root,
        max_abs_im_a,
        hypotheses_hold,
        conclusion_holds: max_abs_im_a <= tol,
        lemma_residual: verify_lemma_wron(d)?,
        epsilon_trend,
    })
}

// ---------------------------------------------------------------------------
// Inverse direction: given real λ and a target, solve det(x − Z(a)) = w.

/// `a` with `det(x − Z(a)) = target` from one start, by damped Newton with
/// the exact Jacobian `∂/∂a_i det(x − Z) = −det(minor_ii)`.
pub fn solve_a(lambda: &[f64], target: &CPoly, start: Vec<Complex64>) -> Option<(Vec<Complex64>, f64)> {
    let n = lambda.len();
    let eval = |a: &[Complex64]| -> Option<CVec> {
        let d = ZData { a: a.to_vec(), lambda: lambda.to_vec() };
        let cp = char_poly(&build_z(&d).ok()?).ok()?;
        Some(CVec::from_iterator(n, (0..n).map(|k| cp.coeff(k) - target.coeff(k))))
    };
    let max_abs = |v: &CVec| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale = target.norm_inf().max(1.0);
    let mut a = start;
    let mut r = eval(&a)?;
    let mut res = max_abs(&r);
    for _ in 0..100 {
        if res < 1e-12 * scale {
            break;
        }
        let z = build_z(&ZData { a: a.clone(), lambda: lambda.to_vec() }).ok()?;
        let m = shifted_matrix(&z);
        let mut jac = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            let minor: Vec<Vec<CPoly>> = m
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != i)
                .map(|(_, row)| row.iter().enumerate().filter(|&(c, _)| c != i).map(|(_, p)| p.clone()).collect())
                .collect();
            let dm = if minor.is_empty() { CPoly::one() } else { poly_det(&minor).ok()? };
            for k in 0..n {
                jac[(k, i)] = -dm.coeff(k);
            }
        }
        let delta = linalg::solve(&jac, &(-&r)).ok()?;
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..=30 {
            let trial: Vec<Complex64> = a.iter().zip(delta.iter()).map(|(x, d)| x + d * step).collect();
            if let Some(rt) = eval(&trial) {
                let rest = max_abs(&rt);
                if rest < res {
                    a = trial;
                    r = rt;
                    res = rest;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved || max_abs(&delta) * step < 1e-14 * (1.0 + a.iter().map(|x| x.norm()).fold(0.0, f64::max)) {
            break;
        }
    }
    Some((a, res))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub trials: usize,
    /// Sizes drawn uniformly from this inclusive range.
    pub min_size: usize,
    pub max_size: usize,
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    /// Conjugate roots placed at `|Im z| <= strip·(1 − 1e-3)`.
    pub strip: f64,
}

impl FalsifyConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        FalsifyConfig { trials, min_size: 2, max_size: 3, seed, restarts: 4, tol: 1e-6, strip: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub lambda: Vec<f64>,
    pub roots: Vec<Complex64>,
    pub a: Vec<Complex64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FalsifyReport {
    pub trials: usize,
    /// Trials where at least one `a` was found.
    pub solved_trials: usize,
    pub solutions: usize,
    pub counterexamples: Vec<Counterexample>,
    pub max_residual: f64,
}

fn draw_target(rng: &mut ChaCha8Rng, n: usize, strip: f64) -> Vec<Complex64> {
    let pairs = rng.random_range(0..=n / 2);
    let mut roots = Vec::with_capacity(n);
    for _ in 0..pairs {
        let re = rng.random_range(-2.0..2.0);
        let im = rng.random_range(0.0..=1.0) * strip * (1.0 - 1e-3);
        roots.push(Complex64::new(re, im));
        roots.push(Complex64::new(re, -im));
    }
    while roots.len() < n {
        roots.push(Complex64::new(rng.random_range(-2.0..2.0), 0.0));
    }
    roots
}

fn draw_lambda(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let l: Vec<f64> = (0..n).map(|_| rng.random_range(-PI / 2.0..PI / 2.0)).collect();
        let separated = (0..n).all(|i| (0..i).all(|j| (l[i] - l[j]).sin().abs() > 0.1));
        if separated {
            return l;
        }
    }
}

/// Random real `λ` and real targets with roots in the strip; every recovered
/// `a` must be real.
pub fn falsify_theorem1a(cfg: &FalsifyConfig) -> FalsifyReport {
    type TrialOutcome = (usize, Vec<(Vec<Complex64>, f64)>, Vec<f64>, Vec<Complex64>);
    let per_trial: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let n = rng.random_range(cfg.min_size..=cfg.max_size);
            let lambda = draw_lambda(&mut rng, n);
            let roots = draw_target(&mut rng, n, cfg.strip);
            let target = CPoly::from_roots(&roots);
            let radius = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
            let mut found: Vec<(Vec<Complex64>, f64)> = Vec::new();
            for _ in 0..cfg.restarts {
                let start: Vec<Complex64> = (0..n)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re, im) * radius
                    })
                    .collect();
                if let Some((a, res)) = solve_a(&lambda, &target, start) {
                    if res <= 1e-9 * target.norm_inf().max(1.0)
                        && !found.iter().any(|(b, _)| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-6 * (1.0 + x.norm())))
                    {
                        found.push((a, res));
                    }
                }
            }
            (t, found, lambda, roots)
        })
        .collect();
    let mut report = FalsifyReport { trials: cfg.trials, ..Default::default() };
    for (t, found, lambda, roots) in per_trial {
        if !found.is_empty() {
            report.solved_trials += 1;
        }
        for (a, res) in found {
            report.solutions += 1;
            report.max_residual = report.max_residual.max(res);
            let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
            if a.iter().any(|x| x.im.abs() > cfg.tol * scale) {
                report.counterexamples.push(Counterexample { trial: t, lambda: lambda.clone(), roots: roots.clone(), a });
            }
        }
    }
    report
}

/// Strip-violating instance: `λ = (0, π/2)` with target roots `±i·height`.
pub fn strip_violation(height: f64) -> (Vec<f64>, CPoly) {
    let r = Complex64::new(0.0, height);
    (vec![0.0, PI / 2.0], CPoly::from_roots(&[r, -r]))
}
