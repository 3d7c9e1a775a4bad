use serde_json::json;

use expgeo::estimation::solve_median_numerical_with;
use expgeo::optim::DescentOptions;
use expgeo::{fit_map, fit_ml, ConjugateHyperparams, Dataset, Space};

use super::{parse_family, parse_vector, CliError};
use crate::report::{Diagnostic, RunReport};
use crate::FitArgs;

/// Closed-form and numerical solutions must agree to this.
const AGREEMENT_TOL: f64 = 1e-6;

pub fn run(args: &FitArgs, argv: Vec<String>) -> Result<RunReport, CliError> {
    let fam = parse_family(&args.family)?;
    let data = Dataset::from_csv_path(&args.data, fam.dimension(), None)?;
    let n = data.n();
    let prior = match (&args.alpha, args.beta) {
        (Some(a), Some(b)) => Some(ConjugateHyperparams::new(&fam, parse_vector("alpha", a)?, b)?),
        _ => None,
    };
    let est = match &prior {
        Some(hp) => fit_map(&fam, &data, hp)?,
        None => fit_ml(&fam, &data)?,
    };

    // The same estimate as a weighted median, solved iteratively.
    let mut points = data.points.clone();
    let mut weights = vec![1.0; n];
    if let Some(hp) = &prior {
        points.push(hp.pseudo_point());
        weights.push(hp.beta());
    }
    if args.space == Space::Natural {
        // Natural-space medians take each observation's natural parameter.
        points = points
            .iter()
            .map(|x| {
                fam.to_natural(x).map_err(|_| {
                    CliError::Usage(format!(
                        "observation {x:?} has no natural parameter; use --space mean"
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
    }
    let opts = DescentOptions {
        tol: args.tol,
        max_iter: args.max_iter,
    };
    let numerical = solve_median_numerical_with(&fam, &points, &weights, args.space, opts)?;
    let gap = expgeo::linalg::max_abs_diff(&numerical.mu_hat, &est.mu_hat);

    let inputs = json!({
        "data": args.data.display().to_string(),
        "n": n,
        "dimension": fam.dimension(),
        "mean": data.mean(),
        "prior": prior.as_ref().map(|hp| json!({"alpha": hp.alpha(), "beta": hp.beta()})),
        "space": args.space,
        "max_iter": args.max_iter,
        "tol": args.tol,
    });
    let mut report = RunReport::new(argv, Some(fam.name().to_string()), inputs);
    report.estimate("mu_hat", est.mu_hat.clone());
    report.estimate("theta_hat", est.theta_hat.clone());
    report.objective = Some(est.objective_value);
    report.diagnostics.push(
        Diagnostic::at_most("numerical_agreement", gap, AGREEMENT_TOL).with_detail(json!({
            "space": args.space,
            "iterations": numerical.iterations,
            "mu_hat": numerical.mu_hat,
        })),
    );
    Ok(report)
}
