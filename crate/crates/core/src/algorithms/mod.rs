//! Online policies and the registry that builds them from ids.
//!
//! Ties between candidate partners are broken by earliest arrival. Policies
//! never see agent labels they could not observe online, so relabelling an
//! instance and its order leaves every decision unchanged.

mod adapters;
mod star;

use std::cmp::Ordering;

use crate::config::Caps;
use crate::engine::{DecisionDistribution, OnlineDecision, OnlinePolicy, PolicyState, View};
use crate::error::{FhgError, Result};
use crate::game::AgentId;
use crate::oracles::max_weight_matching_on;
use crate::rational::Rational;
use crate::sqrt2::{beta, Sqrt2Ext};

pub use adapters::{Lift, Restrict};
pub use star::{star_policy_as_online, StarFn, StarOnline, StarPolicy};

/// Highest weight first, then earliest arrival.
fn by_weight_then_arrival(view: &View<'_>, a: &(AgentId, Rational), b: &(AgentId, Rational)) -> Ordering {
    b.1.cmp(&a.1).then_with(|| view.position(a.0).cmp(&view.position(b.0)))
}

fn best_of(view: &View<'_>, candidates: Vec<(AgentId, Rational)>) -> Option<(AgentId, Rational)> {
    candidates.into_iter().min_by(|a, b| by_weight_then_arrival(view, a, b))
}

/// Matches the newcomer to the unmatched arrived agent of highest positive weight.
#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy;

impl OnlinePolicy for Greedy {
    fn id(&self) -> String {
        "greedy".into()
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution> {
        let z = view.newcomer();
        let free: Vec<_> = view
            .positive_neighbors(z)
            .into_iter()
            .filter(|(y, _)| view.partition().is_single(*y))
            .collect();
        let d = match best_of(view, free) {
            Some((y, _)) => OnlineDecision::join(y),
            None => OnlineDecision::SINGLETON,
        };
        Ok(DecisionDistribution::certain(d, state.clone()))
    }
}

/// Vertex-arrival matching with replacement: the newcomer takes its best
/// positive edge `{z, y}`; if `y` is matched in `e`, `e` is dissolved only when
/// `w(z, y) > (1+√2)·w(e)`, compared exactly.
#[derive(Clone, Copy, Debug, Default)]
pub struct DissolveThreshold;

/// Exact test of `w > (1+√2)·we`.
pub fn exceeds_threshold(w: &Rational, we: &Rational) -> bool {
    // w − we − we·√2 > 0
    Sqrt2Ext::new(w - we, -we.clone()).signum() > 0
}

impl OnlinePolicy for DissolveThreshold {
    fn id(&self) -> String {
        "dissolve-threshold".into()
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution> {
        let z = view.newcomer();
        let part = view.partition();
        let d = match best_of(view, view.positive_neighbors(z)) {
            None => OnlineDecision::SINGLETON,
            Some((y, w)) => match part.coalition_size(y) {
                1 => OnlineDecision::join(y),
                2 if view.mode() == crate::engine::Mode::Dissolution => {
                    let we = part.coalition_welfare_of(y);
                    if exceeds_threshold(&w, &we) {
                        OnlineDecision::dissolve_and_join(y, y)
                    } else {
                        OnlineDecision::SINGLETON
                    }
                }
                _ => OnlineDecision::SINGLETON,
            },
        };
        Ok(DecisionDistribution::certain(d, state.clone()))
    }
}

/// `1 + √2` as used by [`DissolveThreshold`].
pub fn threshold_beta() -> Sqrt2Ext {
    beta()
}

/// Sampling then maximum weight matching: the first `k` arrivals stay
/// single at their own arrival; afterwards the newcomer joins its partner in
/// an exact maximum weight matching of the revealed graph, if that partner
/// is still single.
#[derive(Clone, Copy, Debug)]
pub struct Efgt {
    pub k: usize,
    pub mwm_cap: usize,
}

impl Efgt {
    pub fn new(k: usize) -> Self {
        Efgt { k, mwm_cap: Caps::default().mwm }
    }
}

impl OnlinePolicy for Efgt {
    fn id(&self) -> String {
        format!("efgt:k={}", self.k)
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution> {
        if view.t() <= self.k {
            return Ok(DecisionDistribution::certain(OnlineDecision::SINGLETON, state.clone()));
        }
        let z = view.newcomer();
        let (pairs, _) = max_weight_matching_on(view.graph(), view.arrived(), self.mwm_cap)?;
        let partner = pairs.iter().find_map(|&(u, v)| match (u == z, v == z) {
            (true, _) => Some(v),
            (_, true) => Some(u),
            _ => None,
        });
        let d = match partner {
            Some(u) if view.partition().is_single(u) => OnlineDecision::join(u),
            _ => OnlineDecision::SINGLETON,
        };
        Ok(DecisionDistribution::certain(d, state.clone()))
    }
}

/// A deliberately coalition-forming test policy: the newcomer joins the
/// coalition of its best positive neighbour whatever its size. With free
/// dissolution it first breaks that coalition up if its welfare is negative.
#[derive(Clone, Copy, Debug, Default)]
pub struct Attach;

impl OnlinePolicy for Attach {
    fn id(&self) -> String {
        "attach".into()
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution> {
        let z = view.newcomer();
        let d = match best_of(view, view.positive_neighbors(z)) {
            None => OnlineDecision::SINGLETON,
            Some((y, _)) => {
                let negative = view.partition().coalition_welfare_of(y).is_negative();
                if negative && view.mode() == crate::engine::Mode::Dissolution {
                    OnlineDecision::dissolve_and_join(y, y)
                } else {
                    OnlineDecision::join(y)
                }
            }
        };
        Ok(DecisionDistribution::certain(d, state.clone()))
    }
}

/// Extra parameters some registry entries need.
#[derive(Clone, Debug, Default)]
pub struct RegistryContext {
    /// `(ε, x)` of the star family, for `star:f=...`
    pub star: Option<(Rational, u32)>,
    pub caps: Caps,
}

/// Builds a policy from its registry id: `greedy`, `dissolve-threshold`,
/// `efgt:k=<int>`, `lift:<id>`, `restrict:<id>`, `star:f=<name>`, `attach`.
pub fn policy_from_id(id: &str, ctx: &RegistryContext) -> Result<Box<dyn OnlinePolicy>> {
    let id = id.trim();
    if let Some(inner) = id.strip_prefix("lift:") {
        return Ok(Box::new(Lift::new(policy_from_id(inner, ctx)?)));
    }
    if let Some(inner) = id.strip_prefix("restrict:") {
        return Ok(Box::new(Restrict::new(policy_from_id(inner, ctx)?)));
    }
    if let Some(k) = id.strip_prefix("efgt:k=") {
        let k: usize = k.parse().map_err(|_| FhgError::UnknownAlgorithm(id.to_string()))?;
        if k == 0 {
            return Err(FhgError::InvalidArgument("efgt needs k >= 1".into()));
        }
        return Ok(Box::new(Efgt { k, mwm_cap: ctx.caps.mwm }));
    }
    if let Some(name) = id.strip_prefix("star:f=") {
        let (eps, x) = ctx.star.clone().ok_or_else(|| {
            FhgError::InvalidArgument("star policies need the family parameters eps and x".into())
        })?;
        let sp = StarPolicy::from_name(name)?;
        return Ok(Box::new(star_policy_as_online(sp, eps, x)?));
    }
    match id {
        "greedy" => Ok(Box::new(Greedy)),
        "dissolve-threshold" => Ok(Box::new(DissolveThreshold)),
        "attach" => Ok(Box::new(Attach)),
        _ => Err(FhgError::UnknownAlgorithm(id.to_string())),
    }
}

#[cfg(test)]
mod tests;
