use std::path::Path;

use fhg_core::algorithms::{policy_from_id, RegistryContext};
use fhg_core::config::Caps;
use fhg_core::engine::{competitive_ratio, Arrival, ArrivalOrder, CompetitiveReport, Mode, WelfareValue};
use fhg_core::io::read_instance;
use fhg_core::sqrt2::{cmp_rational, dissolution_floor};
use fhg_core::{FhgError, SymmetricFhg};
use serde::Serialize;

use super::{efgt_k, usage};
use crate::args::{ExpectArg, FormatArg, MeasureArgs, ModeArg, RunArgs};
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{emit, reports_csv, to_json};

/// Parsed measurement options.
pub struct Measure {
    pub mode: Mode,
    arrival: ArrivalSpec,
    expect: ExpectArg,
    samples: usize,
    pub seed: u64,
    ctx: RegistryContext,
    caps: Caps,
}

enum ArrivalSpec {
    Order(String),
    Random,
    Worst,
}

impl Measure {
    pub fn new(m: &MeasureArgs, settings: &Settings) -> CliResult<Self> {
        let arrival = match m.arrival.as_str() {
            "random" => ArrivalSpec::Random,
            "worst" => ArrivalSpec::Worst,
            other => match other.strip_prefix("order:") {
                Some(list) => ArrivalSpec::Order(list.to_string()),
                None => return Err(usage(format!("--arrival must be order:<perm>, random or worst, got {other:?}"))),
            },
        };
        if m.samples == 0 {
            return Err(usage("--samples must be at least 1"));
        }
        let star = match (&m.star_eps, m.star_x) {
            (Some(e), Some(x)) => Some((e.clone(), x)),
            (None, None) => None,
            _ => return Err(usage("--star-eps and --star-x go together")),
        };
        Ok(Measure {
            mode: match m.mode {
                ModeArg::Strict => Mode::Strict,
                ModeArg::Dissolve => Mode::Dissolution,
            },
            arrival,
            expect: m.expect,
            samples: m.samples,
            seed: settings.seed_or(m.seed),
            ctx: RegistryContext { star, caps: settings.caps },
            caps: settings.caps,
        })
    }

    fn arrival(&self, n: usize) -> CliResult<Arrival> {
        Ok(match (&self.arrival, self.expect) {
            (ArrivalSpec::Order(list), _) => Arrival::Order(ArrivalOrder::parse(list, n)?),
            (ArrivalSpec::Worst, _) => Arrival::Worst,
            (ArrivalSpec::Random, ExpectArg::Exact) => Arrival::RandomExact,
            (ArrivalSpec::Random, ExpectArg::Mc) => Arrival::RandomMc { samples: self.samples },
        })
    }

    /// One report, with warnings for the caller to print.
    pub fn measure(&self, g: &SymmetricFhg, alg: &str, instance_id: &str) -> CliResult<(Row, Vec<String>)> {
        let mut warnings = Vec::new();
        if let Some(k) = efgt_k(alg) {
            if k >= g.n() {
                warnings.push(format!("{instance_id}: {}", FhgError::KTooLargeForInstance { k, n: g.n() }));
            }
        }
        let policy = policy_from_id(alg, &self.ctx)?;
        let arrival = self.arrival(g.n())?;
        let report = competitive_ratio(g, policy.as_ref(), self.mode, &arrival, &self.caps, self.seed, instance_id)
            .map_err(|e| match e {
                FhgError::InstanceTooLarge { what, n, cap } => CliError::Usage(format!(
                    "{instance_id}: {what} refuses n = {n} above the cap {cap}; use --expect mc or raise the cap in a config file"
                )),
                other => other.into(),
            })?;
        let above = match (&report.ratio, self.mode) {
            (WelfareValue::Exact(r), Mode::Dissolution) => Some(cmp_rational(r, &dissolution_floor()).is_ge()),
            _ => None,
        };
        Ok((Row { report, above_dissolution_floor: above }, warnings))
    }
}

#[derive(Serialize)]
pub struct Row {
    #[serde(flatten)]
    pub report: CompetitiveReport,
    /// exact comparison of the ratio with 1/(6+4√2), dissolve mode only
    #[serde(skip_serializing_if = "Option::is_none")]
    pub above_dissolution_floor: Option<bool>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    command: &'a str,
    flags: Vec<String>,
    seed: u64,
    rows: &'a [Row],
}

pub fn write_rows(command: &str, rows: &[Row], m: &MeasureArgs, seed: u64) -> CliResult<()> {
    for r in rows {
        if let Some(above) = r.above_dissolution_floor {
            eprintln!(
                "{} {}: ratio {} {} 1/(6+4*sqrt2) (exact)",
                r.report.instance_id,
                r.report.alg,
                r.report.ratio,
                if above { ">=" } else { "<" }
            );
        }
    }
    let text = match m.format {
        FormatArg::Csv => {
            let reports: Vec<CompetitiveReport> = rows.iter().map(|r| r.report.clone()).collect();
            reports_csv(&reports)?
        }
        FormatArg::Json => to_json(&JsonReport { command, flags: std::env::args().skip(1).collect(), seed, rows }),
    };
    emit(m.out.as_deref(), &text)
}

pub fn load(path: &Path) -> CliResult<SymmetricFhg> {
    if !path.exists() {
        return Err(CliError::io(path, "no such file"));
    }
    Ok(read_instance(path)?.into_symmetric())
}

pub fn instance_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn run(a: RunArgs, settings: &Settings) -> CliResult<()> {
    let m = Measure::new(&a.m, settings)?;
    let g = load(&a.instance)?;
    let (row, warnings) = m.measure(&g, &a.alg, &instance_id(&a.instance))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    write_rows("run", &[row], &a.m, m.seed)
}
