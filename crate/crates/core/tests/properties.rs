use casorati::inverse::{contains_solution, example1_solve, gauge_coordinates, newton_inverse, InverseProblem};
use casorati::matrixz::{theorem1a_check, verify_lemma_wron, ZData};
use casorati::poly::poly_det;
use casorati::quasiexp::{casoratian, monic_wronskian, rescale_residual};
use casorati::yangian::{check_commutativity, check_rtt, pencil_b, transfer_b, BetheSetup};
use casorati::{CPoly, Complex64, LogBase, QESpace, QuasiExp};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cplx(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

/// Determinant by Gaussian elimination with partial pivoting.
fn det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut d = c(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).unwrap();
        if m[p][k].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        d *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            let pivot_row = m[k].clone();
            for (x, &t) in m[i].iter_mut().zip(&pivot_row).skip(k) {
                *x -= f * t;
            }
        }
    }
    d
}

fn eval_qe(coeffs: &[Complex64], mu: Complex64, x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * x + a) * (mu * x).exp()
}

/// Space of `members` quasi-exponentials with distinct positive bases and
/// monic real polynomials of degree at most 2.
fn real_space(members: usize) -> impl Strategy<Value = QESpace> {
    (
        proptest::collection::vec(proptest::collection::vec(-1.5..1.5f64, 0..=2), members),
        proptest::collection::vec(0.0..1.0f64, members),
    )
        .prop_filter_map("dependent", |(polys, jitter)| {
            let members = polys
                .into_iter()
                .zip(jitter)
                .enumerate()
                .map(|(i, (mut p, j))| {
                    p.push(1.0);
                    // log-bases spaced by at least 0.4
                    let q = (-0.8 + 0.8 * i as f64 + 0.4 * j).exp();
                    QuasiExp::new(CPoly::from_real(&p), LogBase::from_real(q)).unwrap()
                })
                .collect();
            QESpace::new(members).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_multiset_round_trip(roots in proptest::collection::vec(cplx(2.0), 1..6)) {
        let found = CPoly::from_roots(&roots).roots().unwrap();
        prop_assert_eq!(found.len(), roots.len());
        // each found root has a partner; clustered roots lose accuracy as a power of the gap
        for r in &found {
            let d = roots.iter().map(|s| (r - s).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-4, "{:?} vs {:?}", found, roots);
        }
        let rebuilt = CPoly::from_roots(&found);
        prop_assert!(rebuilt.max_coeff_diff(&CPoly::from_roots(&roots)) < 1e-8);
    }

    #[test]
    fn shift_round_trip(coeffs in proptest::collection::vec(cplx(2.0), 1..7), a in cplx(3.0), x in cplx(2.0)) {
        let p = CPoly::new(coeffs);
        let q = p.compose_shift(a);
        prop_assert!((q.eval(x) - p.eval(x + a)).norm() < 1e-9 * (1.0 + p.norm_inf()) * (1.0 + (x + a).norm()).powi(6));
        prop_assert!(q.compose_shift(-a).max_coeff_diff(&p) < 1e-8 * (1.0 + a.norm()).powi(6));
    }

    #[test]
    fn poly_det_matches_pointwise_and_alternates(
        entries in proptest::collection::vec(proptest::collection::vec(cplx(1.0), 1..4), 9),
        x in cplx(1.5),
    ) {
        let m: Vec<Vec<CPoly>> = entries.chunks(3).map(|row| row.iter().map(|e| CPoly::new(e.clone())).collect()).collect();
        let d = poly_det(&m).unwrap();
        let pointwise = det(m.iter().map(|row| row.iter().map(|p| p.eval(x)).collect()).collect());
        prop_assert!((d.eval(x) - pointwise).norm() < 1e-9 * (1.0 + pointwise.norm()) * 50.0);
        let mut swapped = m.clone();
        swapped.swap(0, 2);
        prop_assert!(poly_det(&swapped).unwrap().max_coeff_diff(&d.scale(c(-1.0, 0.0))) < 1e-10 * (1.0 + d.norm_inf()));
    }

    #[test]
    fn casoratian_matches_pointwise_determinant(
        polys in proptest::collection::vec(proptest::collection::vec(cplx(1.0), 1..4), 1..4),
        mus in proptest::collection::vec(cplx(0.7), 3),
        h in cplx(1.0),
        x in cplx(1.0),
    ) {
        prop_assume!(h.norm() > 0.05);
        let n = polys.len();
        let fs: Vec<QuasiExp> = polys
            .iter()
            .zip(&mus)
            .map(|(p, &mu)| QuasiExp::new(CPoly::new(p.clone()), LogBase::new(mu)).unwrap())
            .collect();
        let (p, mu_total) = casoratian(&fs, h).unwrap();
        let shifts: Vec<Complex64> = (1..=n).map(|j| h * (2.0 * j as f64 - n as f64 - 1.0)).collect();
        let m: Vec<Vec<Complex64>> = polys
            .iter()
            .zip(&mus)
            .map(|(pc, &mu)| shifts.iter().map(|&s| eval_qe(pc, mu, x + s)).collect())
            .collect();
        let oracle = det(m);
        let got = p.eval(x) * (mu_total * x).exp();
        prop_assert!((got - oracle).norm() <= 1e-9 * (1.0 + oracle.norm()) * 100.0, "{got} vs {oracle}");
    }

    #[test]
    fn monic_wronskian_basis_independent(v in real_space(3), t in proptest::collection::vec(cplx(1.0), 3), s in 0.3..2.0f64) {
        // with distinct bases the only changes of basis are rescalings
        let h = c(0.0, s);
        let w = monic_wronskian(&v, h).unwrap();
        let scaled: Vec<QuasiExp> = v.members().iter().zip(&t).map(|(m, &k)| m.scaled(k + c(1.5, 0.0))).collect();
        let w2 = monic_wronskian(&QESpace::new(scaled).unwrap(), h).unwrap();
        prop_assert!(w.w.max_coeff_diff(&w2.w) < 1e-8 * (1.0 + w.w.norm_inf()));
    }

    #[test]
    fn monic_wronskian_is_even_in_h(v in real_space(2), h in cplx(1.5)) {
        prop_assume!(h.norm() > 0.1);
        let a = monic_wronskian(&v, h).unwrap();
        let b = monic_wronskian(&v, -h).unwrap();
        prop_assert!(a.w.max_coeff_diff(&b.w) < 1e-8 * (1.0 + a.w.norm_inf()));
    }

    #[test]
    fn real_space_has_real_wronskian(v in real_space(3), s in 0.2..2.0f64) {
        let w = monic_wronskian(&v, c(0.0, s)).unwrap();
        prop_assert!(w.w.is_real(1e-9 * (1.0 + w.w.norm_inf())), "{:?}", w.w);
    }

    #[test]
    fn rescaling_to_unit_shift(v in real_space(2), h in cplx(1.5)) {
        prop_assume!(h.norm() > 0.2);
        let r = rescale_residual(&v, h).unwrap();
        prop_assert!(r < 1e-7, "{r}");
    }

    #[test]
    fn example1_branches_are_consistent(q in 0.2..4.0f64, s in 0.3..2.5f64, t in 0.0..1.0f64, imaginary: bool) {
        let lq = LogBase::from_real(q);
        let h = c(0.0, s);
        prop_assume!((lq.pow(h) - lq.pow(-h)).norm() > 1e-3);
        // real A, or imaginary A inside the strip
        let a = if imaginary { c(0.0, t * s) } else { c(4.0 * t - 2.0, 0.0) };
        let br = example1_solve(lq, h, a).unwrap();
        for b in &br {
            prop_assert!((b.a + b.b).norm() < 1e-12 * (1.0 + b.a.norm()));
            prop_assert!(b.residual < 1e-8 * (1.0 + a.norm_sqr()) * (1.0 + b.a.norm()).powi(2));
            prop_assert!(b.is_real(1e-8), "{:?}", b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn forward_inverse_round_trip(v in real_space(2), s in 0.5..1.5f64, seed in 0u64..1000) {
        // the space in gauge form: monic members with distinct bases need no elimination
        let h = c(0.0, s);
        let w = monic_wronskian(&v, h).unwrap();
        let prob = InverseProblem {
            mus: v.members().iter().map(|m| m.base()).collect(),
            degrees: v.members().iter().map(|m| m.p().degree().unwrap()).collect(),
            h,
            target_w: w.w.clone(),
            seed,
            restarts: 48,
        };
        let set = newton_inverse(&prob).unwrap();
        let u = gauge_coordinates(&prob, &v).unwrap();
        prop_assert!(contains_solution(&prob, &set, &u).unwrap(), "{} solutions", set.len());
        for sol in &set.solutions {
            let ws = monic_wronskian(sol, h).unwrap();
            prop_assert!(ws.w.max_coeff_diff(&w.w) < 1e-7 * (1.0 + w.w.norm_inf()));
        }
    }

    #[test]
    fn rtt_and_commutativity(
        q in proptest::collection::vec(cplx(1.0), 2),
        z in proptest::collection::vec(cplx(1.0), 1..3),
        x in cplx(2.0),
        y in cplx(2.0),
    ) {
        let q = q.into_iter().map(|v| v + c(1.5, 0.0)).collect();
        let setup = BetheSetup::new(q, z.clone()).unwrap();
        prop_assume!(z.iter().all(|zi| (x - zi).norm() > 0.05 && (y - zi).norm() > 0.05 && (x - 1.0 - zi).norm() > 0.05 && (y - 1.0 - zi).norm() > 0.05));
        prop_assume!((x - y).norm() > 0.05);
        prop_assert!(check_rtt(&setup, x, y).unwrap() < 1e-9);
        prop_assert!(check_commutativity(&setup, x, y).unwrap() < 1e-9);
    }

    #[test]
    fn pencil_matches_direct_transfer(
        q in proptest::collection::vec(cplx(1.0), 2),
        z in proptest::collection::vec(cplx(1.0), 1..3),
        x in cplx(2.0),
        k in 1usize..=2,
    ) {
        let q = q.into_iter().map(|v| v + c(1.5, 0.0)).collect();
        let setup = BetheSetup::new(q, z.clone()).unwrap();
        prop_assume!(z.iter().all(|zi| (0..k).all(|s| (x - s as f64 - zi).norm() > 0.1)));
        let pencil = pencil_b(&setup, k).unwrap();
        let direct = transfer_b(&setup, k, x).unwrap();
        let got = pencil.eval(x).unwrap();
        prop_assert!(got.rel_residual(&direct) < 1e-8, "{}", got.rel_residual(&direct));
    }

    #[test]
    fn lemma_residual_small(
        n in 2usize..=5,
        a in proptest::collection::vec(cplx(2.0), 5),
        lam in proptest::collection::vec(-1.5..1.5f64, 5),
    ) {
        let lambda = lam[..n].to_vec();
        prop_assume!((0..n).all(|i| (0..i).all(|j| (lambda[i] - lambda[j]).sin().abs() > 0.1)));
        let d = ZData::new(a[..n].to_vec(), lambda).unwrap();
        prop_assert!(verify_lemma_wron(&d).unwrap() < 1e-8);
    }

    #[test]
    fn matrix_theorem_never_contradicted(
        n in 2usize..=4,
        a in proptest::collection::vec(-2.0..2.0f64, 4),
        lam in proptest::collection::vec(-1.5..1.5f64, 4),
    ) {
        let lambda = lam[..n].to_vec();
        prop_assume!((0..n).all(|i| (0..i).all(|j| (lambda[i] - lambda[j]).sin().abs() > 0.1)));
        let d = ZData::new(a[..n].iter().map(|&x| c(x, 0.0)).collect(), lambda).unwrap();
        let r = theorem1a_check(&d, 1e-8).unwrap();
        // real a: char poly real, conclusion holds
        prop_assert!(r.char_poly_real && r.conclusion_holds && r.consistent());
    }
}
