//! Matching probabilities of star policies, by recursion and by enumeration,
//! and the conversion between ratio and max-edge probability.

use serde::Serialize;

use super::{gen_instance, gen_star, StarKind, StarSpec};
use crate::algorithms::{star_policy_as_online, StarPolicy};
use crate::config::Caps;
use crate::engine::{exact_leaves, Mode, OnlinePolicy, OrderSet};
use crate::error::{FhgError, Result};
use crate::game::{AgentId, SymmetricWeights};
use crate::oracles::max_weight_matching_on;
use crate::rational::Rational;

/// `(h, r)` for the star on `I` by the recursion over the last arrival among
/// `a` and the leaves. With `k = |S| + 1` and `t` the top leaf of `S`:
///
/// `h(S) = (1/k)·[Σ_{i≠t} h(S−d_i) + h(S−d_t) + (1 − h(S−d_t))·f(S) + f(S)]`
///
/// `r(S) = (1/k)·[Σ_{i≠t} r(S−d_i) + (1 − h(S−d_t))·f(S) + f(S)]`
///
/// and `h = r = 0` for the bare centre.
pub fn h_r_recursion(policy: &StarPolicy, leaves: &[u32], x: u32) -> Result<(Rational, Rational)> {
    let m = leaves.len();
    if m == 0 {
        return Ok((Rational::zero(), Rational::zero()));
    }
    if m > 20 {
        return Err(FhgError::InstanceTooLarge { what: "h/r recursion", n: m, cap: 20 });
    }
    let mut sorted = leaves.to_vec();
    sorted.sort_unstable();
    let full = (1usize << m) - 1;
    let mut h = vec![Rational::zero(); full + 1];
    let mut r = vec![Rational::zero(); full + 1];
    // subsets in increasing order, so all proper subsets come first
    for s in 1..=full {
        let members: Vec<u32> = (0..m).filter(|&b| s & (1 << b) != 0).map(|b| sorted[b]).collect();
        let top = 63 - (s as u64).leading_zeros() as usize;
        let f = policy.eval(&members, x)?;
        let k = Rational::from(members.len() as u64 + 1);
        let without_top = s & !(1 << top);
        let miss = &Rational::one() - &h[without_top];
        let gain = &(&miss * &f) + &f;
        let mut hs = &h[without_top] + &gain;
        let mut rs = gain;
        for b in 0..top {
            if s & (1 << b) != 0 {
                hs += &h[s & !(1 << b)];
                rs += &r[s & !(1 << b)];
            }
        }
        h[s] = hs / &k;
        r[s] = rs / &k;
    }
    Ok((h[full].clone(), r[full].clone()))
}

/// `(h, r)` by exact enumeration of every arrival order of the centre and the
/// `I` leaves, run through the engine. Agents without positive edges (`b` and
/// the `J` leaves of a star) never touch the maximum edge nor the centre's
/// leaf set, so they are left out of the enumeration.
fn h_r_enumeration(policy: &StarPolicy, spec: &StarSpec, cap: usize) -> Result<(Rational, Rational)> {
    let reduced = StarSpec { i: spec.i.clone(), j: Vec::new(), x: spec.x, eps: spec.eps.clone() };
    let full = gen_star(&reduced)?;
    // keep a and the I leaves, dropping b
    let keep: Vec<AgentId> = std::iter::once(AgentId(0)).chain((2..reduced.n()).map(AgentId::from)).collect();
    if keep.len() > cap + 1 {
        return Err(FhgError::InstanceTooLarge { what: "star enumeration", n: keep.len() - 1, cap });
    }
    let g = full.induced(&keep);
    let online = star_policy_as_online(policy.clone(), spec.eps.clone(), spec.x)?;
    let a = AgentId(0);
    let top = AgentId::from(keep.len() - 1);
    let mut h = Rational::zero();
    let mut r = Rational::zero();
    exact_leaves(&g, &online, Mode::Strict, OrderSet::All, usize::MAX, |_, p, part| {
        if p.is_zero() {
            return;
        }
        if part.coalition_size(a) > 1 {
            h += p;
            if part.partner(a) == Some(top) {
                r += p;
            }
        }
    })?;
    let n_fact: Rational = (1..=keep.len() as u64).map(Rational::from).product();
    Ok((h / &n_fact, r / &n_fact))
}

/// `(h, r)` with the default cap on `|I|`.
pub fn star_match_probabilities(policy: &StarPolicy, spec: &StarSpec) -> Result<(Rational, Rational)> {
    star_match_probabilities_capped(policy, spec, Caps::default().star)
}

/// `h` is the probability that `a` is matched, `r` the probability that the
/// maximum edge `{a, d_{t_S}}` is. Both are computed by the recursion and by
/// enumeration; any disagreement is reported as an error.
pub fn star_match_probabilities_capped(
    policy: &StarPolicy,
    spec: &StarSpec,
    cap: usize,
) -> Result<(Rational, Rational)> {
    spec.validate()?;
    if spec.i.len() > cap {
        return Err(FhgError::InstanceTooLarge { what: "star probabilities", n: spec.i.len(), cap });
    }
    let rec = h_r_recursion(policy, &spec.i, spec.x)?;
    let enu = h_r_enumeration(policy, spec, cap)?;
    if rec != enu {
        return Err(FhgError::RecursionEnumerationMismatch(format!(
            "f={} I={:?}: recursion ({}, {}) vs enumeration ({}, {})",
            policy.name, spec.i, rec.0, rec.1, enu.0, enu.1
        )));
    }
    Ok(rec)
}

/// Output of [`max_edge_conversion_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConversionCheck {
    pub kind: StarKind,
    pub welfare: Rational,
    pub opt: Rational,
    pub ratio: Rational,
    pub p_max: Rational,
    /// `p_max + ε` for stars, `p_max + 2ε` for bi-stars, minus the ratio
    pub slack: Rational,
}

/// Exact expected welfare ratio against the optimal matching over uniformly
/// random orders, and the probability that the maximum weight edge ends up
/// matched.
pub fn max_edge_conversion_check(
    policy: &dyn OnlinePolicy,
    spec: &StarSpec,
    kind: StarKind,
    cap: usize,
) -> Result<ConversionCheck> {
    let g = gen_instance(kind, spec)?;
    let n = g.n();
    if n > cap {
        return Err(FhgError::InstanceTooLarge { what: "exact expectation", n, cap });
    }
    let (a, other) = match kind {
        StarKind::Star => (spec.a(), spec.leaf(spec.t_s()).expect("top leaf")),
        StarKind::Bistar => (spec.a(), spec.b()),
    };
    let all: Vec<AgentId> = (0..n).map(AgentId::from).collect();
    let (_, opt) = max_weight_matching_on(&g, &all, Caps::default().mwm)?;
    let mut welfare = Rational::zero();
    let mut p_max = Rational::zero();
    exact_leaves(&g, policy, Mode::Strict, OrderSet::All, cap, |_, p, part| {
        welfare += &(p * part.welfare());
        if part.coalition_size(a) == 2 && part.partner(a) == Some(other) {
            p_max += p;
        }
    })?;
    let n_fact: Rational = (1..=n as u64).map(Rational::from).product();
    let welfare = welfare / &n_fact;
    let p_max = p_max / &n_fact;
    debug_assert_eq!(g.weight(a, other), opt);
    let ratio = &welfare / &opt;
    let slack_eps = match kind {
        StarKind::Star => spec.eps.clone(),
        StarKind::Bistar => &spec.eps * &Rational::from(2),
    };
    let slack = &(&p_max + &slack_eps) - &ratio;
    Ok(ConversionCheck { kind, welfare, opt, ratio, p_max, slack })
}
