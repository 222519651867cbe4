//! Inverse discrete-Wronski problem: given bases, member degrees, a half-step
//! and a monic target `w`, find every space (up to gauge) whose monic
//! Casoratian is `w`.
//!
//! Gauge: each member is monic, and inside a group of members sharing a base
//! (degrees strictly increasing) a member's coefficients at the degrees of the
//! lower members are fixed to zero. This reduced echelon basis is unique, so
//! solutions are isolated and can be compared coefficientwise.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CVec};
use crate::poly::{poly_det, CPoly};
use crate::quasiexp::{casoratian, is_real_space, reality_defect, LogBase, QESpace, QuasiExp};

/// Acceptance bound on the max coefficient error of an accepted solution.
pub const ACCEPT_RESIDUAL: f64 = 1e-7;
/// Newton stops once the residual falls below this.
pub const CONVERGED_RESIDUAL: f64 = 1e-10;
pub const MIN_STEP: f64 = 1e-14;
pub const MAX_HALVINGS: usize = 30;
pub const MAX_NEWTON_ITERS: usize = 100;
/// Solutions closer than this (relative) are the same solution.
pub const DEDUP_DISTANCE: f64 = 1e-5;
/// Reality test cutoff applied to converged solutions.
pub const REALITY_TOL: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 200;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Example 1

/// One branch of `Wr^d_h(x + a, Q^x (x + b)) = Q^x (Q^h - Q^-h)(x + A)(x - A)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example1Branch {
    pub a: Complex64,
    pub b: Complex64,
    /// Max coefficient deviation of the forward Casoratian from the target.
    pub residual: f64,
}

impl Example1Branch {
    pub fn is_real(&self, tol: f64) -> bool {
        self.a.im.abs() <= tol * self.a.norm().max(1.0) && self.b.im.abs() <= tol * self.b.norm().max(1.0)
    }
}

/// Both closed-form branches, each checked against the forward Casoratian.
pub fn example1_solve(q: LogBase, h: Complex64, big_a: Complex64) -> Result<[Example1Branch; 2]> {
    if h == c(0.0, 0.0) {
        return Err(Error::ZeroStep);
    }
    let qp = q.pow(h);
    let qm = q.pow(-h);
    let diff = qp - qm;
    if diff.norm() <= 1e-14 * qp.norm().max(1.0) {
        return Err(Error::DegenerateBase);
    }
    let root = (diff * diff * big_a * big_a + h * h * 4.0).sqrt();
    let target = CPoly::from_roots(&[-big_a, big_a]).scale(diff);
    let mut out = [Example1Branch { a: c(0.0, 0.0), b: c(0.0, 0.0), residual: 0.0 }; 2];
    for (slot, sign) in out.iter_mut().zip([1.0, -1.0]) {
        let a = ((qp + qm) * h + root * sign) / diff;
        let b = -a;
        let fs = [
            QuasiExp::polynomial(CPoly::new(vec![a, c(1.0, 0.0)]))?,
            QuasiExp::new(CPoly::new(vec![b, c(1.0, 0.0)]), q)?,
        ];
        let (p, _) = casoratian(&fs, h)?;
        *slot = Example1Branch { a, b, residual: p.max_coeff_diff(&target) };
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Generic Newton solver

/// Inverse problem data. `mus[i]` and `degrees[i]` describe member `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseProblem {
    pub mus: Vec<LogBase>,
    pub degrees: Vec<usize>,
    /// Half-step.
    pub h: Complex64,
    pub target_w: CPoly,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

pub const MAX_MEMBERS: usize = 3;
pub const MAX_TOTAL_DEGREE: usize = 6;

/// Unknown layout: member `i` has free coefficients at `free[i]` exponents.
#[derive(Clone, Debug)]
struct Layout {
    bases: Vec<LogBase>,
    degrees: Vec<usize>,
    free: Vec<Vec<usize>>,
    /// `rows[i][e][j]`: `(x + s_j)^e · Q_i^{s_j}`.
    rows: Vec<Vec<Vec<CPoly>>>,
    n: usize,
}

impl Layout {
    fn new(prob: &InverseProblem) -> Result<Self> {
        let nm = prob.mus.len();
        if nm == 0 || nm != prob.degrees.len() {
            return Err(Error::Shape("mus and degrees must be nonempty and of equal length".into()));
        }
        if nm > MAX_MEMBERS || prob.degrees.iter().sum::<usize>() > MAX_TOTAL_DEGREE {
            return Err(Error::Shape(format!(
                "supported shapes: at most {MAX_MEMBERS} members, total degree at most {MAX_TOTAL_DEGREE}"
            )));
        }
        if prob.h == c(0.0, 0.0) {
            return Err(Error::ZeroStep);
        }
        let tol = 1e-12;
        let mut free = Vec::with_capacity(nm);
        let mut drops = 0;
        for i in 0..nm {
            let lower: Vec<usize> = (0..nm)
                .filter(|&j| j != i && prob.mus[j].same_base(&prob.mus[i], tol))
                .map(|j| prob.degrees[j])
                .filter(|&d| d < prob.degrees[i])
                .collect();
            if (0..nm).any(|j| {
                j != i && prob.mus[j].same_base(&prob.mus[i], tol) && prob.degrees[j] == prob.degrees[i]
            }) {
                return Err(Error::Shape("degrees must differ inside a base group".into()));
            }
            drops += lower.len();
            free.push((0..prob.degrees[i]).filter(|e| !lower.contains(e)).collect());
        }
        let n = prob.degrees.iter().sum::<usize>() - drops;
        if prob.target_w.degree() != Some(n) {
            return Err(Error::Shape(format!(
                "target degree {:?} does not match the generic Casoratian degree {n}",
                prob.target_w.degree()
            )));
        }
        let shifts: Vec<Complex64> = (1..=nm)
            .map(|j| prob.h * (2.0 * j as f64 - nm as f64 - 1.0))
            .collect();
        let rows = (0..nm)
            .map(|i| {
                (0..=prob.degrees[i])
                    .map(|e| {
                        shifts
                            .iter()
                            .map(|&s| CPoly::monomial(e).compose_shift(s).scale(prob.mus[i].pow(s)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Layout { bases: prob.mus.clone(), degrees: prob.degrees.clone(), free, rows, n })
    }

    fn unknowns(&self) -> usize {
        self.free.iter().map(Vec::len).sum()
    }

    fn polys(&self, u: &[Complex64]) -> Vec<CPoly> {
        let mut k = 0;
        self.degrees
            .iter()
            .zip(&self.free)
            .map(|(&d, free)| {
                let mut coeffs = vec![c(0.0, 0.0); d + 1];
                coeffs[d] = c(1.0, 0.0);
                for &e in free {
                    coeffs[e] = u[k];
                    k += 1;
                }
                CPoly::new(coeffs)
            })
            .collect()
    }

    fn row(&self, i: &usize, p: &CPoly) -> Vec<CPoly> {
        let cols = self.rows[*i][0].len();
        (0..cols)
            .map(|j| {
                p.coeffs()
                    .iter()
                    .enumerate()
                    .fold(CPoly::zero(), |acc, (e, &a)| &acc + &self.rows[*i][e][j].scale(a))
            })
            .collect()
    }

    fn matrix(&self, u: &[Complex64]) -> Vec<Vec<CPoly>> {
        self.polys(u)
            .iter()
            .enumerate()
            .map(|(i, p)| self.row(&i, p))
            .collect()
    }

    /// Monic-normalized residual and its holomorphic Jacobian.
    fn eval(&self, u: &[Complex64], target: &CPoly, with_jacobian: bool) -> Result<(CVec, Option<DMatrix<Complex64>>)> {
        let m = self.matrix(u);
        let cas = poly_det(&m)?;
        let lead = cas.coeff(self.n);
        if lead.norm() == 0.0 {
            return Err(Error::DependentMembers);
        }
        let r = CVec::from_iterator(self.n, (0..self.n).map(|l| cas.coeff(l) / lead - target.coeff(l)));
        if !with_jacobian {
            return Ok((r, None));
        }
        let mut jac = DMatrix::<Complex64>::zeros(self.n, self.unknowns());
        let mut k = 0;
        for (i, free) in self.free.iter().enumerate() {
            for &e in free {
                // Casoratian is linear in each row
                let mut mk = m.clone();
                mk[i] = self.rows[i][e].clone();
                let dcas = poly_det(&mk)?;
                let dlead = dcas.coeff(self.n);
                for l in 0..self.n {
                    jac[(l, k)] = dcas.coeff(l) / lead - cas.coeff(l) * dlead / (lead * lead);
                }
                k += 1;
            }
        }
        Ok((r, Some(jac)))
    }

    fn space(&self, u: &[Complex64]) -> Result<QESpace> {
        let members = self
            .polys(u)
            .into_iter()
            .zip(&self.bases)
            .map(|(p, &b)| QuasiExp::new(p, b))
            .collect::<Result<Vec<_>>>()?;
        QESpace::new(members)
    }
}

fn max_abs(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
struct NewtonOutcome {
    u: Vec<Complex64>,
    residual: f64,
    degenerate: bool,
}

/// Damped Newton from `u0`: halve the step until the residual decreases.
fn damped_newton(layout: &Layout, target: &CPoly, mut u: Vec<Complex64>) -> Option<NewtonOutcome> {
    let scale = target.norm_inf().max(1.0);
    let (mut r, _) = layout.eval(&u, target, false).ok()?;
    let mut res = max_abs(&r);
    for _ in 0..MAX_NEWTON_ITERS {
        if res < CONVERGED_RESIDUAL * scale {
            break;
        }
        let (_, jac) = layout.eval(&u, target, true).ok()?;
        let jac = jac?;
        let delta = linalg::solve(&jac, &(-&r)).ok()?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<Complex64> = u.iter().zip(delta.iter()).map(|(a, d)| a + d * step).collect();
            if let Ok((rt, _)) = layout.eval(&trial, target, false) {
                let rest = max_abs(&rt);
                if rest.is_finite() && rest < res {
                    u = trial;
                    r = rt;
                    res = rest;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        let unorm = u.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if !accepted || max_abs(&delta) * step < MIN_STEP * (1.0 + unorm) {
            break;
        }
    }
    if !res.is_finite() {
        return None;
    }
    let (_, jac) = layout.eval(&u, target, true).ok()?;
    let degenerate = match jac {
        Some(j) if j.ncols() > 0 => {
            let s = linalg::singular_values(&j);
            s.last().copied().unwrap_or(0.0) <= 1e-10 * s[0].max(1e-300)
        }
        _ => false,
    };
    Some(NewtonOutcome { u, residual: res, degenerate })
}

/// Accepted solutions of an inverse problem.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SolutionSet {
    pub solutions: Vec<QESpace>,
    pub residuals: Vec<f64>,
    pub real_flags: Vec<bool>,
    pub degenerate: Vec<bool>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }
}

fn random_start(layout: &Layout, rng: &mut ChaCha8Rng, radius: f64) -> Vec<Complex64> {
    // roots of each member drawn at the target's scale, gauge positions dropped
    let mut u = Vec::with_capacity(layout.unknowns());
    for (d, free) in layout.degrees.iter().zip(&layout.free) {
        let roots: Vec<Complex64> = (0..*d)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c(re, im) * radius
            })
            .collect();
        let p = CPoly::from_roots(&roots);
        u.extend(free.iter().map(|&e| p.coeff(e)));
    }
    u
}

fn same_solution(a: &[Complex64], b: &[Complex64]) -> bool {
    let scale = a.iter().chain(b).map(|x| x.norm()).fold(1.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < DEDUP_DISTANCE * scale)
}

fn collect(layout: &Layout, outcomes: Vec<NewtonOutcome>, target: &CPoly) -> Result<SolutionSet> {
    let scale = target.norm_inf().max(1.0);
    let mut kept: Vec<NewtonOutcome> = Vec::new();
    for o in outcomes {
        if o.residual > ACCEPT_RESIDUAL * scale {
            continue;
        }
        if kept.iter().any(|k| same_solution(&k.u, &o.u)) {
            continue;
        }
        kept.push(o);
    }
    let mut set = SolutionSet::default();
    for o in kept {
        let Ok(space) = layout.space(&o.u) else { continue };
        let real = is_real_space(&space, REALITY_TOL).unwrap_or(false);
        set.solutions.push(space);
        set.residuals.push(o.residual);
        set.real_flags.push(real);
        set.degenerate.push(o.degenerate);
    }
    Ok(set)
}

fn start_radius(target: &CPoly, h: Complex64) -> f64 {
    let roots = target.roots().unwrap_or_default();
    roots.iter().map(|r| r.norm()).fold(1.0, f64::max).max(h.norm())
}

/// Solves from `restarts` random starts; restarts run in parallel, results
/// are merged in restart order.
pub fn newton_inverse(prob: &InverseProblem) -> Result<SolutionSet> {
    newton_inverse_seeded(prob, &[])
}

/// As [`newton_inverse`], running the given starting points first.
pub fn newton_inverse_seeded(prob: &InverseProblem, seeds: &[Vec<Complex64>]) -> Result<SolutionSet> {
    let layout = Layout::new(prob)?;
    if let Some(s) = seeds.iter().find(|s| s.len() != layout.unknowns()) {
        return Err(Error::Shape(format!("seed has {} entries, expected {}", s.len(), layout.unknowns())));
    }
    let radius = start_radius(&prob.target_w, prob.h);
    let mut outcomes: Vec<NewtonOutcome> = seeds
        .iter()
        .filter_map(|s| damped_newton(&layout, &prob.target_w, s.clone()))
        .collect();
    let random: Vec<NewtonOutcome> = (0..prob.restarts)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(prob.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64));
            let u0 = random_start(&layout, &mut rng, radius);
            damped_newton(&layout, &prob.target_w, u0)
        })
        .collect();
    outcomes.extend(random);
    collect(&layout, outcomes, &prob.target_w)
}

/// Free coefficients of a space in the solver's gauge, when it already is in
/// that gauge (monic members, zeros at lower degrees of the same base).
pub fn gauge_coordinates(prob: &InverseProblem, space: &QESpace) -> Result<Vec<Complex64>> {
    let layout = Layout::new(prob)?;
    let mut u = Vec::new();
    for (m, free) in space.members().iter().zip(&layout.free) {
        u.extend(free.iter().map(|&e| m.p().coeff(e)));
    }
    Ok(u)
}

/// True when some member of `set` matches `u` in gauge coordinates.
pub fn contains_solution(prob: &InverseProblem, set: &SolutionSet, u: &[Complex64]) -> Result<bool> {
    for s in &set.solutions {
        if same_solution(&gauge_coordinates(prob, s)?, u) {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Example 2

/// One branch of `Wr^d_h(x + a, x^3 + b x^2 + c) = 4h x (x - A)(x - B)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example2Branch {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub residual: f64,
    /// Closed-form values used as seeds. `closed_c` does not solve the system; kept for comparison.
    pub closed_a: Complex64,
    pub closed_b: Complex64,
    pub closed_c: Complex64,
}

impl Example2Branch {
    pub fn is_real(&self, tol: f64) -> bool {
        [self.a, self.b, self.c].iter().all(|z| z.im.abs() <= tol * z.norm().max(1.0))
    }
}

/// `A² - AB + B² - 3h²`, the radicand shared by both branches.
pub fn example2_radicand(h: Complex64, big_a: Complex64, big_b: Complex64) -> Complex64 {
    -big_a * big_b - h * h * 3.0 + big_a * big_a + big_b * big_b
}

/// Closed forms `(a, b, c)` for the branch sign `s = ±1`.
pub fn example2_closed_form(h: Complex64, big_a: Complex64, big_b: Complex64, s: f64) -> (Complex64, Complex64, Complex64) {
    let root = example2_radicand(h, big_a, big_b).sqrt();
    let sum = big_a + big_b;
    let a = -sum / 3.0 + root * (s / 3.0);
    let b = -sum - root * s;
    let cc = (c(-4.0 / 3.0, 0.0) + h * h * 2.0) * sum + h * h / 3.0 * root;
    (a, b, cc)
}

/// Constant term solving the system for given `(a, b)`; the Casoratian is
/// affine in `c`, so this is one linear least-squares fit.
fn example2_seed_c(h: Complex64, a: Complex64, b: Complex64, target: &CPoly) -> Result<Complex64> {
    let fs = |cc: Complex64| -> Result<CPoly> {
        let members = [
            QuasiExp::polynomial(CPoly::new(vec![a, c(1.0, 0.0)]))?,
            QuasiExp::polynomial(CPoly::new(vec![cc, c(0.0, 0.0), b, c(1.0, 0.0)]))?,
        ];
        Ok(casoratian(&members, h)?.0)
    };
    let p0 = fs(c(0.0, 0.0))?;
    let dp = &fs(c(1.0, 0.0))? - &p0;
    let scaled_target = target.scale(h * 4.0);
    let num: Complex64 = (0..4).map(|k| dp.coeff(k).conj() * (scaled_target.coeff(k) - p0.coeff(k))).sum();
    let den: f64 = (0..4).map(|k| dp.coeff(k).norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::Linalg("constant term does not enter the Casoratian"));
    }
    Ok(num / den)
}

pub fn example2_problem(h: Complex64, big_a: Complex64, big_b: Complex64) -> InverseProblem {
    InverseProblem {
        mus: vec![LogBase::new(c(0.0, 0.0)); 2],
        degrees: vec![1, 3],
        h,
        target_w: CPoly::from_roots(&[c(0.0, 0.0), big_a, big_b]),
        seed: 0,
        restarts: 0,
    }
}

/// Both branches, Newton-solved from the closed-form `(a, b)` with a fitted `c`.
pub fn example2_solve(h: Complex64, big_a: Complex64, big_b: Complex64) -> Result<[Example2Branch; 2]> {
    if h == c(0.0, 0.0) {
        return Err(Error::ZeroStep);
    }
    let prob = example2_problem(h, big_a, big_b);
    let layout = Layout::new(&prob)?;
    let mut out = Vec::with_capacity(2);
    for s in [1.0, -1.0] {
        let (pa, pb, pc) = example2_closed_form(h, big_a, big_b, s);
        let c0 = example2_seed_c(h, pa, pb, &prob.target_w)?;
        // unknown order: a, c, b (free exponents of x+a then x^3+bx^2+c)
        let start = vec![pa, c0, pb];
        let scale = prob.target_w.norm_inf().max(1.0);
        let best = damped_newton(&layout, &prob.target_w, start).ok_or(Error::NoSolution {
            restarts: 1,
            best_residual: f64::INFINITY,
        })?;
        if best.residual > ACCEPT_RESIDUAL * scale {
            return Err(Error::NoSolution { restarts: 1, best_residual: best.residual });
        }
        out.push(Example2Branch {
            a: best.u[0],
            c: best.u[1],
            b: best.u[2],
            residual: best.residual,
            closed_a: pa,
            closed_b: pb,
            closed_c: pc,
        });
    }
    Ok([out[0], out[1]])
}

/// Constant term from the exact solution of the system, for the branch whose
/// `a` carries `+s/3·√(…)`.
pub fn example2_exact_c(h: Complex64, big_a: Complex64, big_b: Complex64, s: f64) -> Complex64 {
    let root = example2_radicand(h, big_a, big_b).sqrt();
    h * h * (2.0 / 3.0) * (big_a + big_b + root * (2.0 * s))
}

// ---------------------------------------------------------------------------
// Randomized reality harness

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseSigns {
    /// `Q_j` drawn from `[-3, -1/3] ∪ [1/3, 3]`.
    Mixed,
    /// `Q_j` drawn from `[1/3, 3]`.
    Positive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub trials: usize,
    pub members: usize,
    /// Number of roots of `w`.
    pub roots: usize,
    pub seed: u64,
    pub restarts: usize,
    pub signs: BaseSigns,
    /// Conjugate pairs are placed at `|Im z| <= strip_fraction·|h|`.
    pub strip_fraction: f64,
}

impl HarnessConfig {
    pub fn new(trials: usize, members: usize, roots: usize, seed: u64) -> Self {
        HarnessConfig {
            trials,
            members,
            roots,
            seed,
            restarts: DEFAULT_RESTARTS,
            signs: BaseSigns::Mixed,
            strip_fraction: 1.0 - 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealityFailure {
    pub trial: usize,
    pub bases: Vec<f64>,
    pub h: Complex64,
    pub roots: Vec<Complex64>,
    pub defect: f64,
    pub space: QESpace,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub bases: Vec<f64>,
    pub degrees: Vec<usize>,
    pub h: Complex64,
    pub roots: Vec<Complex64>,
    pub solutions: usize,
    pub real: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarnessReport {
    pub trials: usize,
    pub solutions: usize,
    pub reality_failures: Vec<RealityFailure>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub records: Vec<TrialRecord>,
}

/// One random instance satisfying the theorem's hypotheses.
#[derive(Clone, Debug)]
pub struct HarnessInstance {
    pub bases: Vec<f64>,
    pub degrees: Vec<usize>,
    pub h: Complex64,
    pub roots: Vec<Complex64>,
}

impl HarnessInstance {
    pub fn problem(&self, seed: u64, restarts: usize) -> InverseProblem {
        InverseProblem {
            mus: self.bases.iter().map(|&q| LogBase::from_real(q)).collect(),
            degrees: self.degrees.clone(),
            h: self.h,
            target_w: CPoly::from_roots(&self.roots),
            seed,
            restarts,
        }
    }
}

pub fn draw_instance(cfg: &HarnessConfig, rng: &mut ChaCha8Rng) -> HarnessInstance {
    let mut bases: Vec<f64> = Vec::with_capacity(cfg.members);
    while bases.len() < cfg.members {
        let mag: f64 = rng.random_range(1.0 / 3.0..3.0);
        let q = match cfg.signs {
            BaseSigns::Positive => mag,
            BaseSigns::Mixed => {
                if rng.random_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            }
        };
        // keep logarithms well apart so the bases are distinct
        if bases.iter().all(|&b: &f64| (b.abs().ln() - q.abs().ln()).abs() > 0.15 || b.signum() != q.signum()) {
            bases.push(q);
        }
    }
    let mut degrees = vec![0usize; cfg.members];
    for _ in 0..cfg.roots {
        let i = rng.random_range(0..cfg.members);
        degrees[i] += 1;
    }
    let s = rng.random_range(0.5..2.0);
    let h = c(0.0, s);
    let pairs = rng.random_range(0..=cfg.roots / 2);
    let mut roots = Vec::with_capacity(cfg.roots);
    for _ in 0..pairs {
        let re = rng.random_range(-2.0..2.0);
        let im = rng.random_range(0.0..=1.0) * s * cfg.strip_fraction;
        roots.push(c(re, im));
        roots.push(c(re, -im));
    }
    while roots.len() < cfg.roots {
        roots.push(c(rng.random_range(-2.0..2.0), 0.0));
    }
    HarnessInstance { bases, degrees, h, roots }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Draws instances satisfying the hypotheses, solves each, and records every
/// accepted solution that is not real.
pub fn theorem1_harness(cfg: &HarnessConfig) -> Result<HarnessReport> {
    if !(2..=3).contains(&cfg.members) || cfg.roots > 4 {
        return Err(Error::Shape("harness supports 2 or 3 members and at most 4 roots".into()));
    }
    type TrialOutcome = (TrialRecord, Vec<RealityFailure>, Vec<f64>);
    let per_trial: Vec<Result<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let inst = draw_instance(cfg, &mut rng);
            let prob = inst.problem(rng.random(), cfg.restarts);
            let set = newton_inverse(&prob)?;
            let mut failures = Vec::new();
            for (space, &real) in set.solutions.iter().zip(&set.real_flags) {
                if !real {
                    failures.push(RealityFailure {
                        trial: t,
                        bases: inst.bases.clone(),
                        h: inst.h,
                        roots: inst.roots.clone(),
                        defect: reality_defect(space, REALITY_TOL),
                        space: space.clone(),
                    });
                }
            }
            let record = TrialRecord {
                trial: t,
                bases: inst.bases.clone(),
                degrees: inst.degrees.clone(),
                h: inst.h,
                roots: inst.roots.clone(),
                solutions: set.len(),
                real: set.real_flags.iter().filter(|&&r| r).count(),
            };
            Ok((record, failures, set.residuals))
        })
        .collect();
    let mut report = HarnessReport {
        trials: cfg.trials,
        solutions: 0,
        reality_failures: Vec::new(),
        max_residual: 0.0,
        mean_residual: 0.0,
        records: Vec::with_capacity(cfg.trials),
    };
    let mut total = 0.0;
    for item in per_trial {
        let (record, failures, residuals) = item?;
        report.solutions += record.solutions;
        report.records.push(record);
        report.reality_failures.extend(failures);
        for r in residuals {
            report.max_residual = report.max_residual.max(r);
            total += r;
        }
    }
    if report.solutions > 0 {
        report.mean_residual = total / report.solutions as f64;
    }
    Ok(report)
}

/// Instance outside the strip: Example-1 shape with `A = i·factor·|h|` and
/// the positive base `e^{π/(2|h|)}` for which `Q^h = i`.
pub fn strip_violation_problem(h: Complex64, factor: f64, restarts: usize, seed: u64) -> InverseProblem {
    let a = c(0.0, factor * h.norm());
    InverseProblem {
        mus: vec![LogBase::new(c(0.0, 0.0)), LogBase::new(c(PI / (2.0 * h.norm()), 0.0))],
        degrees: vec![1, 1],
        h,
        target_w: CPoly::from_roots(&[a, -a]),
        seed,
        restarts,
    }
}
