pub mod check;
pub mod divergence;
pub mod fit;
pub mod hybrid;

use expgeo::{make_family, Error, FamilyConstants, FamilySpec};
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_convergence() => 3,
            _ => 2,
        }
    }
}

/// Parses `name` or `name:param`. The parameter is the variance of
/// `gaussian_fixed_variance` or the number of categories of `categorical`.
pub fn parse_family(text: &str) -> Result<FamilySpec, CliError> {
    let (name, param) = match text.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p.trim())),
        None => (text.trim(), None),
    };
    let mut constants = FamilyConstants::default();
    if let Some(p) = param {
        match name {
            "gaussian_fixed_variance" | "gaussian" => {
                constants.variance = p
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad variance `{p}`")))?;
            }
            "categorical" => {
                constants.categories = p
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad category count `{p}`")))?;
            }
            _ => return Err(CliError::Usage(format!("family `{name}` takes no parameter"))),
        }
    }
    Ok(make_family(name, constants)?)
}

pub fn parse_vector(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("{name}: `{s}` is not a finite number")))
        })
        .collect()
}
