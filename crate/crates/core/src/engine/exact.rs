//! Exact expectation by probability-weighted traversal of every arrival
//! order and every randomization branch. Orders sharing a prefix share the
//! work done on that prefix.

use std::collections::HashMap;

use super::{Mode, OnlinePolicy, PartitionState, PolicyState, View, NONE};
use crate::config::Caps;
use crate::error::{FhgError, Result};
use crate::game::{AgentId, SymmetricWeights};
use crate::rational::Rational;

/// Which arrival orders to traverse.
#[derive(Clone, Copy, Debug)]
pub enum OrderSet<'a> {
    /// all `n!` orders, uniformly
    All,
    Fixed(&'a [AgentId]),
}

struct Walk<'a, G: SymmetricWeights, F> {
    g: &'a G,
    policy: &'a dyn OnlinePolicy,
    mode: Mode,
    fixed: Option<&'a [AgentId]>,
    arrived: Vec<AgentId>,
    position: Vec<u32>,
    visit: F,
}

impl<G: SymmetricWeights, F: FnMut(&[AgentId], &Rational, &PartitionState)> Walk<'_, G, F> {
    fn next_agents(&self) -> Vec<AgentId> {
        let t = self.arrived.len();
        match self.fixed {
            Some(order) => vec![order[t]],
            None => (0..self.g.agent_count())
                .map(AgentId::from)
                .filter(|a| self.position[a.index()] == NONE)
                .collect(),
        }
    }

    fn go(&mut self, part: &PartitionState, state: &PolicyState, prob: &Rational) -> Result<()> {
        let n = self.g.agent_count();
        if self.arrived.len() == n {
            (self.visit)(&self.arrived, prob, part);
            return Ok(());
        }
        for agent in self.next_agents() {
            let t = self.arrived.len() + 1;
            self.arrived.push(agent);
            self.position[agent.index()] = (t - 1) as u32;
            let dist = {
                let view = View::new(self.g, &self.arrived, &self.position, part, self.mode);
                self.policy.step(state, &view)?
            };
            for b in dist.into_branches() {
                if b.probability.is_zero() {
                    continue;
                }
                let mut next = part.clone();
                next.apply(self.g, self.mode, t, agent, &b.decision)?;
                let p = prob * &b.probability;
                self.go(&next, &b.state, &p)?;
            }
            self.arrived.pop();
            self.position[agent.index()] = NONE;
        }
        Ok(())
    }
}

/// Calls `visit(order, branch probability, final partition)` for every leaf.
/// The branch probability excludes the `1/n!` order weight.
pub fn exact_leaves<G, F>(
    g: &G,
    policy: &dyn OnlinePolicy,
    mode: Mode,
    orders: OrderSet<'_>,
    cap: usize,
    visit: F,
) -> Result<()>
where
    G: SymmetricWeights,
    F: FnMut(&[AgentId], &Rational, &PartitionState),
{
    let n = g.agent_count();
    let fixed = match orders {
        OrderSet::All => {
            if n > cap {
                return Err(FhgError::InstanceTooLarge { what: "exact expectation", n, cap });
            }
            None
        }
        OrderSet::Fixed(order) => {
            super::ArrivalOrder::new(order.to_vec(), n)?;
            Some(order)
        }
    };
    let mut walk = Walk {
        g,
        policy,
        mode,
        fixed,
        arrived: Vec::with_capacity(n),
        position: vec![NONE; n],
        visit,
    };
    walk.go(&PartitionState::new(), &policy.start(), &Rational::one())
}

fn factorial(n: usize) -> Rational {
    (1..=n as u64).map(Rational::from).product()
}

/// `E[SW]` over uniformly random orders and policy randomness, default cap.
pub fn expected_welfare_exact<G: SymmetricWeights>(g: &G, policy: &dyn OnlinePolicy, mode: Mode) -> Result<Rational> {
    expected_welfare_exact_capped(g, policy, mode, Caps::default().exact)
}

pub fn expected_welfare_exact_capped<G: SymmetricWeights>(
    g: &G,
    policy: &dyn OnlinePolicy,
    mode: Mode,
    cap: usize,
) -> Result<Rational> {
    let mut total = Rational::zero();
    exact_leaves(g, policy, mode, OrderSet::All, cap, |_, p, part| {
        total += &(p * part.welfare());
    })?;
    Ok(total / factorial(g.agent_count()))
}

/// `E[SW]` over policy randomness for one fixed order.
pub fn expected_welfare_for_order<G: SymmetricWeights>(
    g: &G,
    policy: &dyn OnlinePolicy,
    mode: Mode,
    order: &[AgentId],
) -> Result<Rational> {
    let mut total = Rational::zero();
    exact_leaves(g, policy, mode, OrderSet::Fixed(order), usize::MAX, |_, p, part| {
        total += &(p * part.welfare());
    })?;
    Ok(total)
}

/// Expected welfare of every order, keyed by the order.
pub fn expected_welfare_per_order<G: SymmetricWeights>(
    g: &G,
    policy: &dyn OnlinePolicy,
    mode: Mode,
    cap: usize,
) -> Result<HashMap<Vec<AgentId>, Rational>> {
    let mut out: HashMap<Vec<AgentId>, Rational> = HashMap::new();
    exact_leaves(g, policy, mode, OrderSet::All, cap, |order, p, part| {
        *out.entry(order.to_vec()).or_default() += &(p * part.welfare());
    })?;
    Ok(out)
}
