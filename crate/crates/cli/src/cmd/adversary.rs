use std::path::PathBuf;

use fhg_core::adversaries::{run_dissolution_adversary, AdversaryBudget};
use fhg_core::algorithms::{policy_from_id, RegistryContext};
use serde_json::json;

use crate::args::AdversaryArgs;
use crate::config::Settings;
use crate::error::CliResult;
use crate::output::{emit, to_json};

pub fn run(a: AdversaryArgs, settings: &Settings) -> CliResult<()> {
    let budget = AdversaryBudget {
        max_phases: a.phases,
        max_agents_per_phase: a.agents_per_phase,
        max_increments: a.waves,
    };
    budget.validate()?;
    let policy = policy_from_id(&a.alg, &RegistryContext { star: None, caps: settings.caps })?;
    let run = run_dissolution_adversary(policy.as_ref(), &a.gamma, budget)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("adversary_bundle.json"));
    let bundle = serde_json::to_string(&run.bundle()).expect("bundle serializes");
    emit(Some(&out), &bundle)?;
    let summary = json!({
        "policy": run.policy,
        "gamma": a.gamma,
        "outcome": run.outcome,
        "ratio_upper_bound": run.ratio_upper_bound,
        "ratio_upper_bound_f64": run.ratio_upper_bound.to_f64(),
        "agents": run.graph.n(),
        "phases": run.phases.iter().map(|p| json!({
            "i": p.i, "eps": p.eps, "ell": p.ell, "j_star": p.j_star, "y_next": p.y_next,
        })).collect::<Vec<_>>(),
        "trajectory": run.trajectory.iter().map(|b| json!({
            "phase": b.phase, "at": b.at, "bound": b.bound, "f64": b.bound.to_f64(),
        })).collect::<Vec<_>>(),
        "bundle": out.display().to_string(),
    });
    eprintln!("ratio upper bound {} ({:.6})", run.ratio_upper_bound, run.ratio_upper_bound.to_f64());
    emit(None, &to_json(&summary))
}
