use serde_json::json;

use expgeo::{alpha_divergence, bregman, AlphaIndex, Space};

use super::{parse_family, parse_vector, CliError};
use crate::report::{Diagnostic, RunReport};
use crate::DivergenceArgs;

/// Tolerance of `B_F(p || q) = B_G(q* || p*)`, relative to `1 + B`.
const FLIP_TOL: f64 = 1e-8;

pub fn run(args: &DivergenceArgs, argv: Vec<String>) -> Result<RunReport, CliError> {
    let fam = parse_family(&args.family)?;
    let p = parse_vector("P", &args.p)?;
    let q = parse_vector("Q", &args.q)?;
    let alphas = match &args.alpha_index {
        Some(text) => parse_vector("alpha-index", text)?
            .into_iter()
            .map(AlphaIndex::new)
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };

    // Mean-space points use F; natural-space points use G.
    let (f, g) = (fam.dual(), fam.log_partition());
    let (value, flipped, theta_p, theta_q) = match args.space {
        Space::Mean => {
            let value = bregman(f, &p, &q)?;
            let (tp, tq) = (fam.to_natural(&p).ok(), fam.to_natural(&q).ok());
            let flipped = match (&tp, &tq) {
                (Some(tp), Some(tq)) => Some(bregman(g, tq, tp)?),
                _ => None,
            };
            (value, flipped, tp, tq)
        }
        Space::Natural => {
            let value = bregman(g, &p, &q)?;
            let flipped = bregman(f, &fam.to_mean(&q)?, &fam.to_mean(&p)?)?;
            (value, Some(flipped), Some(p.clone()), Some(q.clone()))
        }
    };

    let mut report = RunReport::new(
        argv,
        Some(fam.name().to_string()),
        json!({
            "space": args.space,
            "p": p,
            "q": q,
            "alpha_index": alphas.iter().map(|a| a.value()).collect::<Vec<_>>(),
        }),
    );
    report.objective = Some(value);
    report.estimate("bregman", vec![value]);
    if let Some(other) = flipped {
        let rel = (value - other).abs() / (1.0 + value.abs());
        report.diagnostics.push(
            Diagnostic::at_most("duality_flip", rel, FLIP_TOL).with_detail(json!({ "dual_orientation": other })),
        );
    }
    if !alphas.is_empty() {
        let (Some(tp), Some(tq)) = (theta_p, theta_q) else {
            return Err(CliError::Usage(
                "alpha-divergence needs both points in the interior of the mean space".into(),
            ));
        };
        let values = alphas
            .iter()
            .map(|&a| alpha_divergence(g, &tp, &tq, a))
            .collect::<Result<Vec<_>, _>>()?;
        report.estimate("alpha_index", alphas.iter().map(|a| a.value()).collect());
        report.estimate("alpha_divergence", values);
    }
    Ok(report)
}
