use std::fmt::Write as _;
use std::path::PathBuf;

use casorati::inverse::{example1_solve, example2_radicand, example2_solve};
use casorati::{Complex64, LogBase};

use crate::{emit_text, CmdResult, Failure};

const REALITY_TOL: f64 = 1e-7;
const SCAN_HALF_WIDTH: f64 = 3.0;

fn fmt_c(z: Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

pub fn run(q: f64, h: Complex64, cells: usize, csv: Option<&PathBuf>, out: Option<&PathBuf>) -> CmdResult {
    if q == 0.0 || h.norm() == 0.0 {
        return Err(Failure::usage("need Q != 0 and h != 0"));
    }
    let mut text = String::new();
    let s = h.norm();
    writeln!(text, "# Wr(x + a, Q^x (x + b)) with b = -a, Q = {q}, h = {}", fmt_c(h)).unwrap();
    writeln!(text, "{:>24} {:>24} {:>24} {:>6} {:>9}", "A", "a (+)", "a (-)", "real", "residual").unwrap();
    let mut big_as: Vec<Complex64> = grid(0.0, 2.0, 5).into_iter().map(|t| Complex64::new(t, 0.0)).collect();
    big_as.extend(grid(0.0, 2.0 * s, 5).into_iter().map(|t| Complex64::new(0.0, t)));
    for big_a in big_as {
        let br = example1_solve(LogBase::from_real(q), h, big_a)?;
        let real = br.iter().all(|b| b.is_real(REALITY_TOL));
        let res = br[0].residual.max(br[1].residual);
        writeln!(text, "{:>24} {:>24} {:>24} {:>6} {:>9.1e}", fmt_c(big_a), fmt_c(br[0].a), fmt_c(br[1].a), real, res)
            .unwrap();
    }

    writeln!(text).unwrap();
    writeln!(text, "# Wr(x + a, x^3 + b x^2 + c) = 4h x (x - A)(x - B), B = conj(A), h = {}", fmt_c(h)).unwrap();
    writeln!(
        text,
        "{:>10} {:>10} {:>24} {:>24} {:>24} {:>6} {:>9}",
        "ReA", "ImA", "a (+)", "b (+)", "c (+)", "real", "predicted"
    )
    .unwrap();
    let axis = grid(-SCAN_HALF_WIDTH, SCAN_HALF_WIDTH, cells);
    let mut writer = match csv {
        Some(path) => Some(csv::Writer::from_path(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?),
        None => None,
    };
    if let Some(w) = writer.as_mut() {
        w.write_record(["ReA", "ImA", "is_real"]).map_err(|e| Failure::usage(e.to_string()))?;
    }
    for &u in &axis {
        for &v in &axis {
            let big_a = Complex64::new(u, v);
            let big_b = big_a.conj();
            let predicted = example2_radicand(h, big_a, big_b);
            let predicted_real = predicted.im.abs() <= 1e-12 * predicted.norm().max(1.0) && predicted.re >= 0.0;
            let (row, real) = match example2_solve(h, big_a, big_b) {
                Ok(br) => {
                    let real = br.iter().all(|b| b.is_real(REALITY_TOL));
                    (format!("{:>24} {:>24} {:>24} {:>6}", fmt_c(br[0].a), fmt_c(br[0].b), fmt_c(br[0].c), real), real)
                }
                Err(e) => (format!("{:>74} {:>6}", e.to_string(), false), false),
            };
            writeln!(text, "{u:>10.4} {v:>10.4} {row} {predicted_real:>9}").unwrap();
            if let Some(w) = writer.as_mut() {
                w.write_record([u.to_string(), v.to_string(), real.to_string()])
                    .map_err(|e| Failure::usage(e.to_string()))?;
            }
        }
    }
    if let Some(mut w) = writer {
        w.flush().map_err(|e| Failure::usage(e.to_string()))?;
    }
    emit_text(&text, out)?;
    Ok(true)
}
