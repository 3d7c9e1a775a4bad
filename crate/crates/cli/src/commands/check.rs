use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use expgeo::linalg::fd_gradient;
use expgeo::{
    alpha_limit_check, bregman, fisher_mc_check, make_family, FamilyConstants, FamilySpec,
    FAMILY_NAMES,
};

use super::{parse_family, CliError};
use crate::report::{Diagnostic, RunReport};
use crate::CheckArgs;

const POINTS: usize = 200;
const ALPHA_PAIRS: usize = 20;
const FISHER_POINTS: u64 = 2;
const FISHER_SAMPLES: usize = 100_000;
/// Standard errors a Monte Carlo Fisher entry may deviate.
const FISHER_Z: f64 = 3.0;
const FD_TOL: f64 = 1e-5;
const ALPHA_TOL: f64 = expgeo::alpha::LIMIT_REL_TOL;

/// A natural parameter well inside the domain, drawn from `[-1, 1]^d`.
fn random_theta(fam: &FamilySpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let u: Vec<f64> = (0..fam.dimension()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    match fam.name() {
        "gaussian_fixed_variance" => u.iter().map(|v| 3.0 * v).collect(),
        "bernoulli" => u.iter().map(|v| 4.0 * v).collect(),
        "exponential" => u.iter().map(|v| -(0.2 + 1.4 * (v + 1.0))).collect(),
        _ => u.iter().map(|v| 2.0 * v).collect(),
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn round_trip(fam: &FamilySpec, rng: &mut ChaCha8Rng, tol: f64) -> Result<Diagnostic, CliError> {
    let numeric = fam.clone().with_numerical_inverse();
    let mut worst: f64 = 0.0;
    for f in [fam, &numeric] {
        for _ in 0..POINTS {
            let theta = random_theta(f, rng);
            let mu = f.to_mean(&theta)?;
            let back = f.to_natural(&mu)?;
            let again = f.to_mean(&back)?;
            for (a, b) in back.iter().zip(&theta).chain(again.iter().zip(&mu)) {
                worst = worst.max(rel_err(*a, *b));
            }
        }
    }
    Ok(Diagnostic::at_most("round_trip", worst, tol)
        .with_detail(json!({"points": POINTS, "inverses": ["analytic", "newton"]})))
}

fn duality_flip(fam: &FamilySpec, rng: &mut ChaCha8Rng, tol: f64) -> Result<Diagnostic, CliError> {
    let mut worst: f64 = 0.0;
    for _ in 0..POINTS {
        let (t1, t2) = (random_theta(fam, rng), random_theta(fam, rng));
        let (m1, m2) = (fam.to_mean(&t1)?, fam.to_mean(&t2)?);
        let lhs = bregman(fam.dual(), &m1, &m2)?;
        let rhs = bregman(fam.log_partition(), &t2, &t1)?;
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok(Diagnostic::at_most("duality_flip", worst, tol).with_detail(json!({"pairs": POINTS})))
}

fn gradients(fam: &FamilySpec, rng: &mut ChaCha8Rng) -> Result<Diagnostic, CliError> {
    let mut worst: f64 = 0.0;
    for _ in 0..POINTS {
        let theta = random_theta(fam, rng);
        let mu = fam.to_mean(&theta)?;
        for (f, x) in [(fam.log_partition(), &theta), (fam.dual(), &mu)] {
            let failed = Cell::new(None);
            let fd = fd_gradient(
                |y| {
                    f.value(y).unwrap_or_else(|e| {
                        failed.set(Some(e));
                        f64::NAN
                    })
                },
                x,
                1e-6,
            );
            if let Some(e) = failed.into_inner() {
                return Err(e.into());
            }
            for (a, b) in f.gradient(x)?.iter().zip(&fd) {
                worst = worst.max(rel_err(*a, *b));
            }
        }
    }
    Ok(Diagnostic::at_most("gradient_fd", worst, FD_TOL).with_detail(json!({"points": POINTS})))
}

fn alpha_limits(fam: &FamilySpec, rng: &mut ChaCha8Rng) -> Result<Diagnostic, CliError> {
    let mut worst: f64 = 0.0;
    let mut all_passed = true;
    for _ in 0..ALPHA_PAIRS {
        let (t1, t2) = (random_theta(fam, rng), random_theta(fam, rng));
        let r = alpha_limit_check(fam.log_partition(), &t1, &t2)?;
        all_passed &= r.passed;
        let last = |g: &[f64], b: f64| g.last().copied().unwrap_or(0.0) / (1.0 + b);
        worst = worst
            .max(last(&r.gaps_forward, r.bregman_forward))
            .max(last(&r.gaps_reverse, r.bregman_reverse));
    }
    let mut d = Diagnostic::at_most("alpha_limits", worst, ALPHA_TOL)
        .with_detail(json!({"pairs": ALPHA_PAIRS, "all_monotone_and_within": all_passed}));
    d.passed &= all_passed;
    Ok(d)
}

fn fisher(fam: &FamilySpec, rng: &mut ChaCha8Rng, seed: u64) -> Result<Diagnostic, CliError> {
    let mut worst_z: f64 = 0.0;
    let mut all_within = true;
    for k in 0..FISHER_POINTS {
        let theta = random_theta(fam, rng);
        let check = fisher_mc_check(fam, &theta, FISHER_SAMPLES, seed.wrapping_add(k))?;
        all_within &= check.within_3se;
        for (dev, se) in check.deviation.iter().flatten().zip(check.std_error.iter().flatten()) {
            if *se > 0.0 {
                worst_z = worst_z.max(dev.abs() / se);
            }
        }
    }
    let mut d = Diagnostic::at_most("fisher_monte_carlo", worst_z, FISHER_Z)
        .with_detail(json!({"points": FISHER_POINTS, "samples": FISHER_SAMPLES}));
    d.passed &= all_within;
    Ok(d)
}

pub fn run(args: &CheckArgs, argv: Vec<String>) -> Result<RunReport, CliError> {
    let families: Vec<FamilySpec> = match &args.family {
        Some(name) => vec![parse_family(name)?],
        None => FAMILY_NAMES
            .iter()
            .map(|n| make_family(n, FamilyConstants::default()))
            .collect::<Result<_, _>>()?,
    };
    let names: Vec<&str> = families.iter().map(|f| f.name()).collect();
    let mut report = RunReport::new(
        argv,
        args.family.as_ref().map(|_| names[0].to_string()),
        json!({"families": names, "seed": args.seed, "tol": args.tol}),
    );
    for (i, fam) in families.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(i as u64));
        let checks = [
            round_trip(fam, &mut rng, args.tol)?,
            duality_flip(fam, &mut rng, args.tol)?,
            gradients(fam, &mut rng)?,
            alpha_limits(fam, &mut rng)?,
            fisher(fam, &mut rng, args.seed)?,
        ];
        for mut d in checks {
            d.name = format!("{}/{}", fam.name(), d.name);
            report.diagnostics.push(d);
        }
    }
    Ok(report)
}
