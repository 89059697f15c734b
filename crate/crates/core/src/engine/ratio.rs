use std::fmt;

use serde::{Serialize, Serializer};

use super::{
    expected_welfare_exact_capped, expected_welfare_for_order, expected_welfare_mc, expected_welfare_per_order,
    ArrivalOrder, McEstimate, Mode, OnlinePolicy,
};
use crate::config::Caps;
use crate::error::Result;
use crate::game::{AgentId, SymmetricWeights};
use crate::oracles::optimal_partition_capped;
use crate::rational::Rational;

/// How arrival orders are chosen.
#[derive(Clone, Debug)]
pub enum Arrival {
    /// one adversarial order
    Order(ArrivalOrder),
    /// the worst order, found by exhaustive search
    Worst,
    /// uniformly random order, exact expectation
    RandomExact,
    /// uniformly random order, Monte Carlo
    RandomMc { samples: usize },
}

impl fmt::Display for Arrival {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arrival::Order(o) => {
                let ids: Vec<String> = o.agents().iter().map(|a| a.to_string()).collect();
                write!(f, "order:{}", ids.join(","))
            }
            Arrival::Worst => f.write_str("worst"),
            Arrival::RandomExact | Arrival::RandomMc { .. } => f.write_str("random"),
        }
    }
}

/// Achieved welfare: exact, or a sample mean.
#[derive(Clone, Debug, PartialEq)]
pub enum WelfareValue {
    Exact(Rational),
    Sampled(McEstimate),
}

impl fmt::Display for WelfareValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WelfareValue::Exact(r) => write!(f, "{r}"),
            WelfareValue::Sampled(m) => write!(f, "{}", m.mean),
        }
    }
}

impl Serialize for WelfareValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WelfareValue::Exact(r) => r.serialize(s),
            WelfareValue::Sampled(m) => s.serialize_f64(m.mean),
        }
    }
}

/// One measured ratio.
#[derive(Clone, Debug, Serialize)]
pub struct CompetitiveReport {
    pub instance_id: String,
    pub alg: String,
    pub mode: Mode,
    pub arrival: String,
    pub welfare: WelfareValue,
    pub opt: Rational,
    pub ratio: WelfareValue,
    pub samples: Option<usize>,
    pub stderr: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_order: Option<Vec<AgentId>>,
}

/// `achieved / opt` with `0/0 = 1` and `negative/0 = 0`.
pub fn ratio_with_conventions(achieved: &Rational, opt: &Rational) -> Rational {
    if opt.is_zero() {
        if achieved.is_negative() {
            Rational::zero()
        } else {
            Rational::one()
        }
    } else {
        achieved / opt
    }
}

fn ratio_f64(achieved: f64, opt: &Rational) -> f64 {
    if opt.is_zero() {
        if achieved < 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        achieved / opt.to_f64()
    }
}

/// Measures `policy` on `g` against the optimal partition.
pub fn competitive_ratio<G: SymmetricWeights>(
    g: &G,
    policy: &dyn OnlinePolicy,
    mode: Mode,
    arrival: &Arrival,
    caps: &Caps,
    seed: u64,
    instance_id: &str,
) -> Result<CompetitiveReport> {
    let (_, opt) = optimal_partition_capped(g, caps.partition)?;
    let mut worst_order = None;
    let mut samples = None;
    let mut stderr = None;
    let welfare = match arrival {
        Arrival::Order(o) => WelfareValue::Exact(expected_welfare_for_order(g, policy, mode, o.agents())?),
        Arrival::Worst => {
            let per = expected_welfare_per_order(g, policy, mode, caps.exact)?;
            let (order, w) = per
                .into_iter()
                .min_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
                .expect("at least one order");
            worst_order = Some(order);
            WelfareValue::Exact(w)
        }
        Arrival::RandomExact => WelfareValue::Exact(expected_welfare_exact_capped(g, policy, mode, caps.exact)?),
        Arrival::RandomMc { samples: s } => {
            let est = expected_welfare_mc(g, policy, mode, *s, seed)?;
            samples = Some(est.samples);
            stderr = Some(est.stderr);
            WelfareValue::Sampled(est)
        }
    };
    let ratio = match &welfare {
        WelfareValue::Exact(w) => WelfareValue::Exact(ratio_with_conventions(w, &opt)),
        WelfareValue::Sampled(m) => WelfareValue::Sampled(McEstimate {
            mean: ratio_f64(m.mean, &opt),
            stderr: if opt.is_zero() { 0.0 } else { m.stderr / opt.to_f64() },
            samples: m.samples,
        }),
    };
    Ok(CompetitiveReport {
        instance_id: instance_id.to_string(),
        alg: policy.id(),
        mode,
        arrival: arrival.to_string(),
        welfare,
        opt,
        ratio,
        samples,
        stderr,
        seed,
        worst_order,
    })
}
