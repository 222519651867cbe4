// Acceptance suite. Prints one PASS/FAIL line per criterion plus indented
// detail lines. Criteria in KNOWN_FAILURES do not fail the process unless
// CASORATI_STRICT=1 is set; see README "Known failures".

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use casorati::inverse::{
    example1_solve, example2_exact_c, example2_closed_form, example2_problem, example2_radicand, example2_solve,
    gauge_coordinates, newton_inverse, strip_violation_problem, theorem1_harness, BaseSigns, HarnessConfig,
};
use casorati::matrixz::{falsify_theorem1a, verify_lemma_wron, FalsifyConfig, ZData};
use casorati::quasiexp::{monic_differential_wronskian, monic_wronskian};
use casorati::yangian::{
    bbar_residual, bethe_eigensystem, form_k, multiset_distance, pipeline_roots, BetheSetup, IdentityBattery,
};
use casorati::{CPoly, Complex64, LogBase, QESpace, QuasiExp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_FAILURES: [usize; 3] = [1, 3, 8];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn criterion1() -> Outcome {
    let qs = [-0.5, 0.5, -2.0, 2.0, std::f64::consts::E];
    let hs = [c(0.0, 0.5), c(0.0, 1.0), c(0.0, 2.0)];
    let mut forward_worst: f64 = 0.0;
    let mut cells = 0;
    let mut mismatches_pos = 0;
    let mut mismatches_neg = 0;
    let mut counter_ok = true;
    let mut counter_cells = 0;
    for &h in &hs {
        let s = h.norm();
        let mut grid: Vec<(Complex64, bool)> = linspace(0.0, 2.0, 5).into_iter().map(|t| (c(t, 0.0), true)).collect();
        grid.extend(linspace(0.0, 2.0 * s, 5).into_iter().map(|t| (c(0.0, t), t <= s)));
        for &q in &qs {
            for &(big_a, in_strip) in &grid {
                let br = example1_solve(LogBase::from_real(q), h, big_a).expect("example 1 solve");
                let scale = (c(0.0, 0.0) + big_a * big_a).norm().max(1.0) * 4.0;
                for b in &br {
                    forward_worst = forward_worst.max(b.residual / scale);
                }
                if in_strip {
                    cells += 1;
                    if !br.iter().all(|b| b.is_real(1e-8)) {
                        if q > 0.0 {
                            mismatches_pos += 1;
                        } else {
                            mismatches_neg += 1;
                        }
                    }
                }
            }
        }
        // both readings of the adversarial base: e^{π/(2h)} and e^{π/(2|h|)}
        for q in [LogBase::new(c(PI, 0.0) / (h * 2.0)), LogBase::new(c(PI / (2.0 * s), 0.0))] {
            for &(big_a, _) in grid.iter().filter(|(a, _)| a.im > s * (1.0 + 1e-12)) {
                counter_cells += 1;
                let br = example1_solve(q, h, big_a).expect("counterexample solve");
                if br.iter().any(|b| b.is_real(1e-8)) {
                    counter_ok = false;
                }
                for b in &br {
                    forward_worst = forward_worst.max(b.residual / (big_a.norm_sqr().max(1.0) * 4.0));
                }
            }
        }
    }
    let pass = forward_worst < 1e-9 && mismatches_pos == 0 && mismatches_neg == 0 && counter_ok;
    Outcome {
        pass,
        summary: format!(
            "Example 1 grid: forward {forward_worst:.1e}, reality mismatches {} of {cells} (Q>0: {mismatches_pos}, Q<0: {mismatches_neg}), counterexample {}",
            mismatches_pos + mismatches_neg,
            if counter_ok { "non-real" } else { "REAL" }
        ),
        details: vec![
            format!("adversarial base cells with |A| > |h|: {counter_cells}, all non-real: {counter_ok}"),
            "negative Q: Q^h is not unimodular for imaginary h, so real A yields non-real a, b".into(),
        ],
    }
}

fn criterion2() -> Outcome {
    let h = c(0.0, 1.0);
    let s2 = h.norm_sqr();
    let us = linspace(-3.0, 3.0, 20);
    let vs = linspace(-3.0, 3.0, 20);
    let (mut counted, mut agree, mut band, mut solve_failures) = (0, 0, 0, 0);
    let mut closed_ab: f64 = 0.0;
    let mut exact_c: f64 = 0.0;
    let mut closed_c: f64 = 0.0;
    for &u in &us {
        for &v in &vs {
            let big_a = c(u, v);
            let g = 3.0 * v * v - u * u - 3.0 * s2;
            if g.abs() < 1e-6 {
                band += 1;
                continue;
            }
            counted += 1;
            let predicted_real = g < 0.0;
            match example2_solve(h, big_a, big_a.conj()) {
                Ok(br) => {
                    let real = br.iter().all(|b| b.is_real(1e-7));
                    if real == predicted_real {
                        agree += 1;
                    }
                    for (b, sign) in br.iter().zip([1.0, -1.0]) {
                        let sc = big_a.norm().max(1.0);
                        closed_ab = closed_ab.max((b.a - b.closed_a).norm() / sc).max((b.b - b.closed_b).norm() / sc);
                        exact_c = exact_c.max((b.c - example2_exact_c(h, big_a, big_a.conj(), sign)).norm() / sc);
                        closed_c = closed_c.max((b.c - b.closed_c).norm() / sc);
                    }
                }
                Err(_) => solve_failures += 1,
            }
        }
    }
    // independent check: random-restart solves on every other cell
    let mut restart_gap: f64 = 0.0;
    let mut unmatched = 0;
    let mut restart_cells = 0;
    for &u in us.iter().step_by(2) {
        for &v in vs.iter().step_by(2) {
            let big_a = c(u, v);
            if example2_radicand(h, big_a, big_a.conj()).norm() < 1e-6 {
                continue;
            }
            restart_cells += 1;
            let mut prob = example2_problem(h, big_a, big_a.conj());
            prob.restarts = 32;
            prob.seed = restart_cells;
            let set = newton_inverse(&prob).expect("restart solve");
            let branches: Vec<_> = [1.0, -1.0].iter().map(|&s| example2_closed_form(h, big_a, big_a.conj(), s)).collect();
            let mut hit = [false; 2];
            for sol in &set.solutions {
                let g = gauge_coordinates(&prob, sol).unwrap();
                let (k, gap) = branches
                    .iter()
                    .map(|(pa, pb, _)| (g[0] - pa).norm().max((g[2] - pb).norm()) / big_a.norm().max(1.0))
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .unwrap();
                hit[k] = true;
                restart_gap = restart_gap.max(gap);
            }
            if !(hit[0] && hit[1]) {
                unmatched += 1;
            }
        }
    }
    let frac = agree as f64 / counted as f64;
    Outcome {
        pass: frac >= 0.98 && closed_ab < 1e-7 && restart_gap < 1e-7 && unmatched == 0,
        summary: format!(
            "Example 2 hyperbola: agreement {:.2}% of {counted} cells (band {band}, solver failures {solve_failures}), closed-form a,b gap {closed_ab:.1e}",
            100.0 * frac
        ),
        details: vec![
            format!("random-restart solves on {restart_cells} cells: closed-form a,b gap {restart_gap:.1e}, cells missing a branch {unmatched}"),
            format!("c: solver vs corrected closed form {exact_c:.1e}; solver vs uncorrected closed-form c {closed_c:.2e} (not a solution)"),
        ],
    }
}

fn criterion3() -> Outcome {
    let run = |signs: BaseSigns, seed: u64| {
        let mut trials = 0;
        let mut solutions = 0;
        let mut failures = 0;
        let mut max_res: f64 = 0.0;
        for (members, roots) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)] {
            let mut cfg = HarnessConfig::new(10, members, roots, seed + roots as u64 * 17 + members as u64);
            cfg.signs = signs;
            let rep = theorem1_harness(&cfg).expect("harness");
            trials += rep.trials;
            solutions += rep.solutions;
            failures += rep.reality_failures.len();
            max_res = max_res.max(rep.max_residual);
        }
        (trials, solutions, failures, max_res)
    };
    let (t, s, f, r) = run(BaseSigns::Mixed, 1001);
    let (tp, sp, fp, rp) = run(BaseSigns::Positive, 1001);
    let strip = strip_violation_problem(c(0.0, 1.0), 1.5, 64, 7);
    let outside = newton_inverse(&strip).expect("strip violation");
    let nonreal_outside = outside.real_flags.iter().filter(|&&r| !r).count();
    Outcome {
        pass: f == 0 && r < 1e-7 && t >= 50,
        summary: format!("Theorem harness, Q in ±[1/3,3]: {t} instances, {s} solutions, {f} non-real, max residual {r:.1e}"),
        details: vec![
            format!("informational, Q in [1/3,3]: {tp} instances, {sp} solutions, {fp} non-real, max residual {rp:.1e}"),
            format!("control outside the strip: {} solutions, {nonreal_outside} non-real", outside.len()),
        ],
    }
}

fn random_setup(rng: &mut ChaCha8Rng, rank: usize, sites: usize) -> BetheSetup {
    let mut g = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let q = (0..rank).map(|_| g() + c(1.2, 0.0)).collect();
    let z = (0..sites).map(|_| g()).collect();
    BetheSetup::new(q, z).unwrap()
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points = [(c(0.37, 0.21), c(-0.83, 0.55)), (c(1.9, -0.4), c(0.15, 1.3))];
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for rank in [2, 3] {
        for sites in [1, 2, 3] {
            let setup = random_setup(&mut rng, rank, sites);
            let b = IdentityBattery::run(&setup, &points).expect("battery");
            details.push(format!(
                "N={rank} n={sites}: rtt {:.1e} comm {:.1e} qdet {:.1e} B_N {:.1e} exch {:.1e} adj {:.1e} antipode {:.1e}",
                b.rtt, b.commutativity, b.qdet, b.b_n, b.exchange, b.adjoint, b.antipode.max()
            ));
            worst = worst.max(b.max());
        }
    }
    Outcome { pass: worst < 1e-9, summary: format!("Yangian identity battery: max residual {worst:.1e}"), details }
}

fn criterion5() -> Outcome {
    let setups = [
        BetheSetup::new(vec![c(1.3, 0.2), c(0.6, -0.5)], vec![c(0.3, 0.1), c(-0.7, 0.4)]).unwrap(),
        BetheSetup::from_theorem_data(&[0.7, 1.9], &[c(0.4, 0.3), c(0.4, -0.3)], c(0.0, 1.0)).unwrap(),
        BetheSetup::new(vec![c(-0.8, 0.9), c(2.1, 0.3)], vec![c(1.1, -0.6), c(0.2, 0.9)]).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut all_four = true;
    let mut details = Vec::new();
    for s in &setups {
        let r = pipeline_roots(s).expect("pipeline");
        all_four &= r.vectors.len() == 4;
        worst = worst.max(r.max_root_error);
        details.push(format!(
            "{} vectors, root error {:.1e}, kernel residual {:.1e}",
            r.vectors.len(),
            r.max_root_error,
            r.max_kernel_residual
        ));
    }
    Outcome {
        pass: all_four && worst < 1e-6,
        summary: format!("Bethe pipeline N=2 n=2: max root error {worst:.1e}"),
        details,
    }
}

fn criterion6() -> Outcome {
    let h = c(0.0, 1.0);
    let points: Vec<Complex64> = (0..10).map(|k| c(-1.3 + 0.31 * k as f64, 0.9 - 0.23 * k as f64)).collect();
    let setups = [
        BetheSetup::from_theorem_data(&[0.7, 1.9], &[c(0.4, 0.3), c(0.4, -0.3)], h).unwrap(),
        BetheSetup::from_theorem_data(&[0.5, 2.5], &[c(-0.2, 0.0), c(0.9, 0.0)], h).unwrap(),
        BetheSetup::from_theorem_data(&[0.4, 1.1, 2.6], &[c(0.1, 0.6), c(0.1, -0.6)], h).unwrap(),
    ];
    let mut bbar: f64 = 0.0;
    for s in &setups {
        let vs = bethe_eigensystem(s).expect("eigensystem");
        bbar = bbar.max(bbar_residual(s, &vs, &points));
    }
    let mut inside_min = f64::INFINITY;
    let mut sweep = Vec::new();
    for frac in [0.2, 0.5, 0.8, 0.95, 0.99] {
        let z = [c(0.3, frac * h.norm()), c(0.3, -frac * h.norm())];
        let f = form_k(&BetheSetup::from_theorem_data(&[0.7, 1.9], &z, h).unwrap(), 1).unwrap();
        inside_min = inside_min.min(f.min_eigenvalue);
        sweep.push(format!("{frac}:{:.3e}", f.min_eigenvalue));
    }
    let z = [c(0.3, h.norm()), c(0.3, -h.norm())];
    let edge = form_k(&BetheSetup::from_theorem_data(&[0.7, 1.9], &z, h).unwrap(), 1).unwrap().min_eigenvalue;
    Outcome {
        pass: bbar < 1e-8 && inside_min > 0.0 && edge.abs() < 1e-9,
        summary: format!(
            "Eigenvalue conjugation symmetry {bbar:.1e}; form min eigenvalue inside {inside_min:.2e}, at boundary {edge:.1e}"
        ),
        details: vec![format!("min eigenvalue by |Im z|/|h|: {}", sweep.join(" "))],
    }
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 100 {
        let n = 2 + count % 4;
        let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-PI / 2.0..PI / 2.0)).collect();
        if !(0..n).all(|i| (0..i).all(|j| (lambda[i] - lambda[j]).sin().abs() > 0.1)) {
            continue;
        }
        let a = (0..n).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let d = ZData::new(a, lambda).unwrap();
        worst = worst.max(verify_lemma_wron(&d).expect("lemma"));
        count += 1;
    }
    let rep = falsify_theorem1a(&FalsifyConfig::new(10_000, 42));
    Outcome {
        pass: worst < 1e-8 && rep.counterexamples.is_empty(),
        summary: format!(
            "Matrix lemma residual {worst:.1e} over 100 instances; falsification {} trials, {} counterexamples",
            rep.trials,
            rep.counterexamples.len()
        ),
        details: vec![format!(
            "falsification: {} trials solved, {} solutions, max residual {:.1e}",
            rep.solved_trials, rep.solutions, rep.max_residual
        )],
    }
}

fn criterion8() -> Outcome {
    let spaces = [
        QESpace::new(vec![
            QuasiExp::new(CPoly::from_real(&[0.5, -1.0, 1.0]), LogBase::from_real(2.0)).unwrap(),
            QuasiExp::new(CPoly::from_real(&[-0.3, 1.0]), LogBase::from_real(0.7)).unwrap(),
        ])
        .unwrap(),
        QESpace::new(vec![
            QuasiExp::new(CPoly::from_real(&[1.0, 0.0, 0.0, 1.0]), LogBase::from_real(0.4)).unwrap(),
            QuasiExp::new(CPoly::from_real(&[0.2, 1.0]), LogBase::from_real(2.5)).unwrap(),
        ])
        .unwrap(),
    ];
    // three members lose the Casoratian to cancellation below |h| ~ 1e-4
    let three = QESpace::new(vec![
        QuasiExp::new(CPoly::from_real(&[1.0, 1.0]), LogBase::from_real(0.5)).unwrap(),
        QuasiExp::new(CPoly::from_real(&[0.2, 0.0, 1.0]), LogBase::from_real(1.5)).unwrap(),
        QuasiExp::new(CPoly::from_real(&[-0.4, 1.0]), LogBase::from_real(3.0)).unwrap(),
    ])
    .unwrap();
    let mut monotone = true;
    let mut ratios_ok = true;
    let mut bounded = true;
    let mut details = Vec::new();
    for v in &spaces {
        let limit = monic_differential_wronskian(v).unwrap().roots().unwrap();
        let errs: Vec<f64> = (2..=5)
            .map(|k| {
                let h = c(0.0, 10f64.powi(-k));
                multiset_distance(&monic_wronskian(v, h).unwrap().roots().unwrap(), &limit)
            })
            .collect();
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
        monotone &= errs.windows(2).all(|w| w[1] < w[0]);
        ratios_ok &= ratios.iter().all(|&r| (10.0 / 3.0..=30.0).contains(&r));
        // error ≤ C·|h| with C fixed at the coarsest step
        bounded &= errs.iter().enumerate().all(|(i, &e)| e <= errs[0] * 10f64.powi(-(i as i32)) * (1.0 + 1e-6));
        let order = (errs[0] / errs[errs.len() - 1]).log10() / (errs.len() - 1) as f64;
        details.push(format!(
            "N={}: errors {} ratios {} observed order {order:.2}",
            v.dim(),
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" "),
            ratios.iter().map(|r| format!("{r:.1}")).collect::<Vec<_>>().join(" ")
        ));
    }
    let limit = monic_differential_wronskian(&three).unwrap().roots().unwrap();
    let three_errs: Vec<String> = (2..=5)
        .map(|k| match monic_wronskian(&three, c(0.0, 10f64.powi(-k))).and_then(|w| w.roots()) {
            Ok(r) => format!("{:.2e}", multiset_distance(&r, &limit)),
            Err(e) => format!("({e})"),
        })
        .collect();
    details.push(format!("informational N=3: errors {}", three_errs.join(" ")));
    details.push(format!("error decreasing: {monotone}; error <= C|h|: {bounded}"));
    Outcome {
        pass: monotone && ratios_ok,
        summary: format!(
            "h -> 0 convergence: decreasing {monotone}, per-decade ratio within factor 3 of linear {ratios_ok}"
        ),
        details,
    }
}

fn main() -> ExitCode {
    let strict = std::env::var("CASORATI_STRICT").is_ok_and(|v| v == "1");
    let criteria: [(usize, fn() -> Outcome); 8] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
    ];
    let mut unexpected = 0;
    for (id, run) in criteria {
        let t = Instant::now();
        let out = run();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (out.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id}: {tag}: {} [{:.1}s]", out.summary, t.elapsed().as_secs_f64());
        for d in &out.details {
            println!("    {d}");
        }
        if !out.pass && (strict || !known) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
