use std::f64::consts::PI;
use std::path::PathBuf;

use casorati::inverse::{theorem1_harness, BaseSigns, HarnessConfig, RealityFailure};
use casorati::matrixz::{falsify_theorem1a, verify_lemma_wron, FalsifyConfig, FalsifyReport, ZData};
use casorati::yangian::{BetheSetup, IdentityBattery};
use casorati::Complex64;
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{emit, CmdResult, Failure, VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bethe,
    LemmaWron,
    Theorem1,
    Theorem1a,
    All,
}

/// Flags as given; suites fill in their own defaults.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub rank: Option<usize>,
    pub sites: Option<usize>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub positive_bases: bool,
}

#[derive(Serialize)]
struct Envelope<C, R> {
    version: &'static str,
    suite: Suite,
    config: C,
    report: R,
    pass: bool,
}

fn envelope<C, R>(suite: Suite, config: C, report: R, pass: bool) -> Envelope<C, R> {
    Envelope { version: VERSION, suite, config, report, pass }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Serialize)]
struct BetheConfig {
    rank: usize,
    sites: usize,
    seed: u64,
    tol: f64,
}

#[derive(Serialize)]
struct BetheReport {
    setup: BetheSetup,
    points: Vec<(Complex64, Complex64)>,
    battery: IdentityBattery,
    max_residual: f64,
}

fn bethe(cfg: &VerifyConfig) -> Result<Envelope<BetheConfig, BetheReport>, Failure> {
    let conf = BetheConfig {
        rank: cfg.rank.unwrap_or(2),
        sites: cfg.sites.unwrap_or(2),
        seed: cfg.seed,
        tol: cfg.tol.unwrap_or(1e-9),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(conf.seed);
    let mut g = |r: f64| c(rng.random_range(-r..r), rng.random_range(-r..r));
    let q = (0..conf.rank).map(|_| g(1.0) + c(1.2, 0.0)).collect();
    let z = (0..conf.sites).map(|_| g(1.0)).collect();
    let points = vec![(g(2.0), g(2.0)), (g(2.0), g(2.0))];
    let setup = BetheSetup::new(q, z)?;
    let battery = IdentityBattery::run(&setup, &points)?;
    let max_residual = battery.max();
    let pass = max_residual < conf.tol;
    Ok(envelope(Suite::Bethe, conf, BetheReport { setup, points, battery, max_residual }, pass))
}

// ---------------------------------------------------------------------------

#[derive(Clone, Serialize)]
struct LemmaConfig {
    trials: usize,
    max_size: usize,
    seed: u64,
    tol: f64,
}

#[derive(Serialize)]
struct LemmaFailure {
    trial: usize,
    data: ZData,
    residual: f64,
}

#[derive(Serialize)]
struct LemmaReport {
    trials: usize,
    max_residual: f64,
    failures: Vec<LemmaFailure>,
}

fn lemma(cfg: &VerifyConfig) -> Result<Envelope<LemmaConfig, LemmaReport>, Failure> {
    let conf = LemmaConfig {
        trials: cfg.trials.unwrap_or(100),
        max_size: cfg.rank.unwrap_or(5),
        seed: cfg.seed,
        tol: cfg.tol.unwrap_or(1e-8),
    };
    if conf.max_size < 2 {
        return Err(Failure::usage("lemma-wron needs --N at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(conf.seed);
    let mut report = LemmaReport { trials: conf.trials, max_residual: 0.0, failures: Vec::new() };
    for trial in 0..conf.trials {
        let n = rng.random_range(2..=conf.max_size);
        let lambda = loop {
            let l: Vec<f64> = (0..n).map(|_| rng.random_range(-PI / 2.0..PI / 2.0)).collect();
            if (0..n).all(|i| (0..i).all(|j| (l[i] - l[j]).sin().abs() > 0.1)) {
                break l;
            }
        };
        let a = (0..n).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let data = ZData::new(a, lambda)?;
        let residual = verify_lemma_wron(&data)?;
        report.max_residual = report.max_residual.max(residual);
        if residual.is_nan() || residual >= conf.tol {
            report.failures.push(LemmaFailure { trial, data, residual });
        }
    }
    let pass = report.failures.is_empty();
    Ok(envelope(Suite::LemmaWron, conf, report, pass))
}

// ---------------------------------------------------------------------------

#[derive(Clone, Serialize)]
struct Theorem1Config {
    members: usize,
    roots: usize,
    trials: usize,
    seed: u64,
    tol: f64,
    signs: BaseSigns,
    restarts: usize,
}

#[derive(Serialize)]
struct Theorem1Report {
    trials: usize,
    solutions: usize,
    reality_failures: Vec<RealityFailure>,
    max_residual: f64,
    mean_residual: f64,
}

fn theorem1(cfg: &VerifyConfig) -> Result<Envelope<Theorem1Config, Theorem1Report>, Failure> {
    let mut h = HarnessConfig::new(cfg.trials.unwrap_or(50), cfg.rank.unwrap_or(2), cfg.sites.unwrap_or(3), cfg.seed);
    if cfg.positive_bases {
        h.signs = BaseSigns::Positive;
    }
    let conf = Theorem1Config {
        members: h.members,
        roots: h.roots,
        trials: h.trials,
        seed: h.seed,
        tol: cfg.tol.unwrap_or(1e-7),
        signs: h.signs,
        restarts: h.restarts,
    };
    let rep = theorem1_harness(&h)?;
    let report = Theorem1Report {
        trials: rep.trials,
        solutions: rep.solutions,
        reality_failures: rep.reality_failures,
        max_residual: rep.max_residual,
        mean_residual: rep.mean_residual,
    };
    let pass = report.reality_failures.is_empty() && report.max_residual < conf.tol;
    Ok(envelope(Suite::Theorem1, conf, report, pass))
}

// ---------------------------------------------------------------------------

fn theorem1a(cfg: &VerifyConfig) -> Result<Envelope<FalsifyConfig, FalsifyReport>, Failure> {
    let mut conf = FalsifyConfig::new(cfg.trials.unwrap_or(10_000), cfg.seed);
    conf.max_size = cfg.rank.unwrap_or(conf.max_size);
    if conf.max_size < conf.min_size {
        return Err(Failure::usage(format!("theorem1a needs --N at least {}", conf.min_size)));
    }
    if let Some(t) = cfg.tol {
        conf.tol = t;
    }
    let report = falsify_theorem1a(&conf);
    let pass = report.counterexamples.is_empty();
    Ok(envelope(Suite::Theorem1a, conf, report, pass))
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AllReport {
    version: &'static str,
    suite: Suite,
    bethe: Envelope<BetheConfig, BetheReport>,
    lemma_wron: Envelope<LemmaConfig, LemmaReport>,
    theorem1: Envelope<Theorem1Config, Theorem1Report>,
    theorem1a: Envelope<FalsifyConfig, FalsifyReport>,
    pass: bool,
}

pub fn run(cfg: &VerifyConfig, out: Option<&PathBuf>) -> CmdResult {
    let pass = match cfg.suite {
        Suite::Bethe => write(bethe(cfg)?, out)?,
        Suite::LemmaWron => write(lemma(cfg)?, out)?,
        Suite::Theorem1 => write(theorem1(cfg)?, out)?,
        Suite::Theorem1a => write(theorem1a(cfg)?, out)?,
        Suite::All => {
            // suite defaults apart from the seed
            let base = VerifyConfig { rank: None, sites: None, trials: None, tol: None, ..cfg.clone() };
            let r = AllReport {
                version: VERSION,
                suite: Suite::All,
                bethe: bethe(&base)?,
                lemma_wron: lemma(&base)?,
                theorem1: theorem1(&base)?,
                theorem1a: theorem1a(&base)?,
                pass: false,
            };
            let pass = r.bethe.pass && r.lemma_wron.pass && r.theorem1.pass && r.theorem1a.pass;
            emit(&AllReport { pass, ..r }, out)?;
            pass
        }
    };
    Ok(pass)
}

fn write<C: Serialize, R: Serialize>(e: Envelope<C, R>, out: Option<&PathBuf>) -> Result<bool, Failure> {
    emit(&e, out)?;
    Ok(e.pass)
}
