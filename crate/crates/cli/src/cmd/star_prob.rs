use fhg_core::adversaries::{max_edge_conversion_check, star_match_probabilities_capped, StarKind};
use fhg_core::algorithms::{policy_from_id, RegistryContext, StarPolicy};
use serde_json::json;

use super::star_spec;
use crate::args::{KindArg, StarProbArgs};
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{emit, to_json};

pub fn run(a: StarProbArgs, settings: &Settings) -> CliResult<()> {
    let spec = star_spec(&a.shape)?;
    let f = StarPolicy::from_name(&a.f)?;
    let (h, r) = star_match_probabilities_capped(&f, &spec, settings.caps.star)?;
    let kind = match a.kind {
        KindArg::Star => StarKind::Star,
        KindArg::Bistar => StarKind::Bistar,
    };
    let ctx = RegistryContext { star: Some((spec.eps.clone(), spec.x)), caps: settings.caps };
    let mut checks = Vec::new();
    let mut negative = Vec::new();
    for id in &a.check {
        let policy = policy_from_id(id, &ctx)?;
        let c = max_edge_conversion_check(policy.as_ref(), &spec, kind, settings.caps.exact)?;
        if c.slack.is_negative() {
            negative.push(id.clone());
        }
        checks.push(json!({ "alg": id, "check": c }));
    }
    let out = json!({
        "spec": spec.to_file(kind),
        "f": f.name,
        "h": h,
        "r": r,
        "h_minus_r": &h - &r,
        "conversion": checks,
    });
    emit(a.out.as_deref(), &to_json(&out))?;
    if negative.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("negative slack for {}", negative.join(", "))))
    }
}
