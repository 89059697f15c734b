use fhg_core::suites::{run_suite, SuiteParams, SUITES};
use serde_json::json;

use super::usage;
use crate::args::VerifyArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{emit, to_json};

fn params(a: &VerifyArgs, settings: &Settings) -> SuiteParams {
    let mut p = SuiteParams { seed: settings.seed_or(a.seed), caps: settings.caps, ..SuiteParams::default() };
    p.cases = a.cases;
    p.n = a.n;
    if let Some(s) = a.samples {
        p.samples = s;
    }
    if !a.beta.is_empty() {
        p.betas = a.beta.clone();
    }
    if let Some(s) = a.max_steps {
        p.vara_steps = s;
    }
    p.f = a.f.clone();
    if let Some(m) = a.max_i {
        p.max_i = m;
    }
    if !a.gamma.is_empty() {
        p.gammas = a.gamma.clone();
    }
    if let Some(s) = a.specs {
        p.specs = s;
    }
    if let Some(ph) = a.phases {
        p.budget.max_phases = ph;
    }
    if let Some(w) = a.waves {
        p.budget.max_increments = w;
    }
    p
}

pub fn run(a: VerifyArgs, settings: &Settings) -> CliResult<()> {
    let names: Vec<String> = if a.suites.iter().any(|s| s == "all") {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        a.suites.clone()
    };
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(&n.as_str())) {
        return Err(usage(format!("unknown suite {bad:?}; known: {}", SUITES.join(", "))));
    }
    let p = params(&a, settings);
    p.budget.validate()?;
    if p.max_i == 0 || p.max_i > 20 {
        return Err(usage("--maxI must be between 1 and 20"));
    }
    let mut reports = Vec::new();
    for name in &names {
        let r = run_suite(name, &p)?;
        eprintln!(
            "{} {name}: {} checks, {} failures, {} ms",
            if r.passed { "pass" } else { "FAIL" },
            r.checked,
            r.failures.len(),
            r.elapsed_ms
        );
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    let summary = json!({
        "passed": passed,
        "seed": p.seed,
        "flags": std::env::args().skip(1).collect::<Vec<_>>(),
        "suites": reports,
    });
    let text = to_json(&summary);
    if let Some(out) = &a.out {
        emit(Some(out), &text)?;
    }
    emit(None, &text)?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite.as_str()).collect();
        Err(CliError::Verification(format!("failed suites: {}", failed.join(", "))))
    }
}
