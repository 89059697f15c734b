pub mod adversary;
pub mod gen;
pub mod run;
pub mod star_prob;
pub mod sweep;
pub mod verify;

use fhg_core::adversaries::{StarSpec, WeightRange};

use crate::args::StarShape;
use crate::error::{CliError, CliResult};

pub fn weight_range(text: Option<&str>, default: &str) -> CliResult<WeightRange> {
    Ok(WeightRange::parse(text.unwrap_or(default))?)
}

pub fn star_spec(s: &StarShape) -> CliResult<StarSpec> {
    let spec = match s.x {
        Some(x) => StarSpec::new(s.i.clone(), s.j.clone(), x, s.eps.clone())?,
        None => StarSpec::with_min_x(s.i.clone(), s.j.clone(), s.eps.clone())?,
    };
    Ok(spec)
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `k` of the innermost `efgt:k=` in a possibly wrapped id.
pub fn efgt_k(id: &str) -> Option<usize> {
    id.rsplit(':').next().and_then(|last| last.strip_prefix("k=")).and_then(|k| k.parse().ok())
}
