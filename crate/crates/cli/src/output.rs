use std::io::Write;
use std::path::Path;

use fhg_core::engine::CompetitiveReport;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Writes to `out`, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CsvRow<'a> {
    instance_id: &'a str,
    alg: &'a str,
    mode: String,
    arrival: &'a str,
    welfare: String,
    opt: String,
    ratio: String,
    samples: Option<usize>,
    stderr: Option<f64>,
    seed: u64,
}

/// Reports as CSV with a header row.
pub fn reports_csv(reports: &[CompetitiveReport]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(CsvRow {
            instance_id: &r.instance_id,
            alg: &r.alg,
            mode: r.mode.to_string(),
            arrival: &r.arrival,
            welfare: r.welfare.to_string(),
            opt: r.opt.to_string(),
            ratio: r.ratio.to_string(),
            samples: r.samples,
            stderr: r.stderr,
            seed: r.seed,
        })
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    if reports.is_empty() {
        w.write_record(["instance_id", "alg", "mode", "arrival", "welfare", "opt", "ratio", "samples", "stderr", "seed"])
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
