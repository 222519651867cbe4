//! Fixed inputs shared by the benchmarks.

use casorati::inverse::InverseProblem;
use casorati::yangian::BetheSetup;
use casorati::{CPoly, Complex64, LogBase, QESpace, QuasiExp};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `n` members with distinct real bases and degrees `0..n`.
pub fn sample_space(n: usize) -> QESpace {
    let members = (0..n)
        .map(|i| {
            let mut coeffs: Vec<f64> = (0..i).map(|k| 0.3 * (k as f64 + 1.0) - 0.5).collect();
            coeffs.push(1.0);
            QuasiExp::new(CPoly::from_real(&coeffs), LogBase::from_real(0.5 + 0.7 * i as f64)).unwrap()
        })
        .collect();
    QESpace::new(members).unwrap()
}

/// `n × n` matrix of cubic polynomial entries.
pub fn sample_poly_matrix(n: usize) -> Vec<Vec<CPoly>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let t = (i * n + j) as f64;
                    CPoly::new(vec![c(t.sin(), 0.1), c(t.cos(), 0.0), c(0.5, -0.2 * t), c(1.0, 0.0)])
                })
                .collect()
        })
        .collect()
}

/// Two members, bases 1/2 and 2, roots in the strip of `h = i`.
pub fn sample_problem(restarts: usize) -> InverseProblem {
    InverseProblem {
        mus: vec![LogBase::from_real(0.5), LogBase::from_real(2.0)],
        degrees: vec![1, 2],
        h: c(0.0, 1.0),
        target_w: CPoly::from_roots(&[c(-0.4, 0.6), c(-0.4, -0.6), c(1.1, 0.0)]),
        seed: 11,
        restarts,
    }
}

pub fn sample_setup(rank: usize, sites: usize) -> BetheSetup {
    let q = (0..rank).map(|i| c(1.0 + 0.4 * i as f64, 0.1 * i as f64)).collect();
    let z = (0..sites).map(|i| c(0.3 * i as f64 - 0.2, 0.2 - 0.15 * i as f64)).collect();
    BetheSetup::new(q, z).unwrap()
}
