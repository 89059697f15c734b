use std::path::PathBuf;

use fhg_core::adversaries::gen_random;
use fhg_core::engine::{derive_seed, Stream};
use fhg_core::SymmetricFhg;
use rayon::prelude::*;

use super::{usage, weight_range};
use super::run::{instance_id, load, write_rows, Measure, Row};
use crate::args::SweepArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult};

fn expand(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn run(a: SweepArgs, settings: &Settings) -> CliResult<()> {
    let m = Measure::new(&a.m, settings)?;
    let mut instances: Vec<(String, SymmetricFhg)> = Vec::new();
    for path in expand(&a.instances)? {
        instances.push((instance_id(&path), load(&path)?));
    }
    if a.random > 0 {
        let range = weight_range(a.range.as_deref(), "-10:10:4")?;
        for k in 0..a.random {
            let s = derive_seed(m.seed, Stream::Instance, k as u64);
            instances.push((format!("random-{k:04}"), gen_random(a.n, s, &range)));
        }
    }
    if instances.is_empty() {
        return Err(usage("sweep needs instance files or --random N"));
    }
    let jobs: Vec<(&str, &SymmetricFhg, &str)> = instances
        .iter()
        .flat_map(|(id, g)| a.algs.iter().map(move |alg| (id.as_str(), g, alg.as_str())))
        .collect();
    let results: Vec<CliResult<(Row, Vec<String>)>> =
        jobs.par_iter().map(|&(id, g, alg)| m.measure(g, alg, id)).collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let (row, warnings) = r?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        rows.push(row);
    }
    rows.sort_by(|x, y| {
        (x.report.instance_id.as_str(), x.report.alg.as_str()).cmp(&(y.report.instance_id.as_str(), y.report.alg.as_str()))
    });
    write_rows("sweep", &rows, &a.m, m.seed)
}
