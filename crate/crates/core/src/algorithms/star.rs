//! Max-edge matching policies on star and bi-star instances, described by a
//! matching probability `f(I, x)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::engine::{DecisionDistribution, OnlineDecision, OnlinePolicy, PolicyState, View};
use crate::error::{FhgError, Result};
use crate::game::AgentId;
use crate::rational::{ratio, Rational};

/// `f(I, x)`: `I` is the sorted set of revealed leaf exponents of the center.
pub type StarFn = Arc<dyn Fn(&[u32], u32) -> Rational + Send + Sync>;

/// A star policy: the probability of matching the current maximum weight edge.
#[derive(Clone)]
pub struct StarPolicy {
    pub name: String,
    pub f: StarFn,
}

impl fmt::Debug for StarPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarPolicy({})", self.name)
    }
}

impl StarPolicy {
    pub fn new(name: impl Into<String>, f: impl Fn(&[u32], u32) -> Rational + Send + Sync + 'static) -> Self {
        StarPolicy { name: name.into(), f: Arc::new(f) }
    }

    pub fn constant(p: Rational) -> Self {
        StarPolicy::new(p.to_string(), move |_, _| p.clone())
    }

    /// Named members of the test bank, or a constant written `p/q`:
    /// `zero`, `one`, `half`, `two-thirds`, `ramp` (|I|/(|I|+1)), `late`
    /// (1 once two leaves are known, else 1/2), `parity` (1 for even max
    /// exponent, 1/3 otherwise).
    pub fn from_name(name: &str) -> Result<Self> {
        let sp = match name {
            "zero" => StarPolicy::new(name, |_, _| Rational::zero()),
            "one" => StarPolicy::new(name, |_, _| Rational::one()),
            "half" => StarPolicy::new(name, |_, _| ratio(1, 2)),
            "two-thirds" => StarPolicy::new(name, |_, _| ratio(2, 3)),
            "ramp" => StarPolicy::new(name, |i, _| ratio(i.len() as i64, i.len() as i64 + 1)),
            "late" => StarPolicy::new(name, |i, _| if i.len() >= 2 { Rational::one() } else { ratio(1, 2) }),
            "parity" => StarPolicy::new(name, |i, _| {
                if i.last().is_some_and(|m| m % 2 == 0) {
                    Rational::one()
                } else {
                    ratio(1, 3)
                }
            }),
            other => {
                let p: Rational = other
                    .parse()
                    .map_err(|_| FhgError::UnknownAlgorithm(format!("star:f={other}")))?;
                if p.is_negative() || p > Rational::one() {
                    return Err(FhgError::InvalidArgument(format!("star probability {p} outside [0, 1]")));
                }
                let mut sp = StarPolicy::constant(p);
                sp.name = other.to_string();
                sp
            }
        };
        Ok(sp)
    }

    /// Names in the standard bank.
    pub fn bank() -> Vec<StarPolicy> {
        ["zero", "one", "half", "two-thirds", "ramp", "late", "parity"]
            .iter()
            .map(|n| StarPolicy::from_name(n).expect("bank name"))
            .collect()
    }

    pub fn eval(&self, i: &[u32], x: u32) -> Result<Rational> {
        let p = (self.f)(i, x);
        if p.is_negative() || p > Rational::one() {
            return Err(FhgError::InvalidDistribution(format!("f({i:?}, {x}) = {p} outside [0, 1]")));
        }
        Ok(p)
    }
}

/// A [`StarPolicy`] run by the engine on instances of the star shape with
/// parameters `(ε, x)`.
pub struct StarOnline {
    policy: StarPolicy,
    x: u32,
    exponent: HashMap<Rational, u32>,
    negative: Rational,
}

/// Wraps a star policy for the engine. Every revealed weight must be
/// `(1/ε)^i` with `0 < i < x` or `−(1/ε)^x`, otherwise the step fails with
/// `NotAStarShapedInstance`.
///
/// At each arrival the policy finds the maximum revealed positive edge. If the
/// newcomer is one of its ends and both ends are single, it matches with
/// probability `f(I, x)`, where `I` holds the exponents of the positive edges
/// of the edge's center (the end with more revealed positive edges, the
/// earlier arrival on a tie).
pub fn star_policy_as_online(policy: StarPolicy, eps: Rational, x: u32) -> Result<StarOnline> {
    if !eps.is_positive() || eps > ratio(1, 2) {
        return Err(FhgError::InvalidSpec(format!("eps = {eps} outside (0, 1/2]")));
    }
    if x < 2 {
        return Err(FhgError::InvalidSpec(format!("x = {x} too small")));
    }
    let base = eps.recip();
    let mut exponent = HashMap::new();
    let mut pw = Rational::one();
    for i in 1..x {
        pw = &pw * &base;
        exponent.insert(pw.clone(), i);
    }
    let negative = -(&pw * &base);
    Ok(StarOnline { policy, x, exponent, negative })
}

impl StarOnline {
    fn exponent_of(&self, w: &Rational) -> Result<Option<u32>> {
        if w.is_positive() {
            match self.exponent.get(w) {
                Some(&i) => Ok(Some(i)),
                None => Err(FhgError::NotAStarShapedInstance(format!("positive weight {w} is not a power of 1/eps"))),
            }
        } else if *w == self.negative {
            Ok(None)
        } else {
            Err(FhgError::NotAStarShapedInstance(format!("weight {w} is neither a leaf weight nor the negative fill")))
        }
    }
}

impl OnlinePolicy for StarOnline {
    fn id(&self) -> String {
        format!("star:f={}", self.policy.name)
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution> {
        let z = view.newcomer();
        for &j in view.earlier() {
            self.exponent_of(&view.weight(z, j))?;
        }
        let stay = || Ok(DecisionDistribution::certain(OnlineDecision::SINGLETON, state.clone()));

        // the maximum revealed positive edge (weights are distinct powers)
        let mut best: Option<(AgentId, AgentId, u32)> = None;
        for &u in view.arrived() {
            for (v, w) in view.positive_neighbors(u) {
                if view.position(v) <= view.position(u) {
                    continue;
                }
                let e = self.exponent_of(&w)?.expect("positive");
                if best.is_none_or(|(_, _, be)| e > be) {
                    best = Some((u, v, e));
                }
            }
        }
        let Some((u, v, _)) = best else { return stay() };
        if z != u && z != v {
            return stay();
        }
        let part = view.partition();
        let other = if z == u { v } else { u };
        if !part.is_single(other) {
            return stay();
        }
        let du = view.positive_neighbors(u);
        let dv = view.positive_neighbors(v);
        let center_edges = match du.len().cmp(&dv.len()) {
            std::cmp::Ordering::Greater => du,
            std::cmp::Ordering::Less => dv,
            std::cmp::Ordering::Equal => {
                if view.position(u) < view.position(v) {
                    du
                } else {
                    dv
                }
            }
        };
        let mut leaves = Vec::with_capacity(center_edges.len());
        for (_, w) in &center_edges {
            leaves.push(self.exponent_of(w)?.expect("positive"));
        }
        leaves.sort_unstable();
        let p = self.policy.eval(&leaves, self.x)?;
        DecisionDistribution::bernoulli(p, OnlineDecision::join(other), OnlineDecision::SINGLETON, state.clone())
    }
}
