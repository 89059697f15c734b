//! Moving between matching policies and coalition policies.

use std::sync::Arc;

use crate::engine::{
    Branch, DecisionDistribution, OnlineDecision, OnlinePolicy, PartitionState, Placement, PolicyState, View,
};
use crate::error::{FhgError, Result};

/// A matching policy viewed as a coalition policy. Decisions pass through
/// unchanged; any decision that would create a coalition of three is an error.
pub struct Lift {
    inner: Box<dyn OnlinePolicy>,
}

impl Lift {
    pub fn new(inner: Box<dyn OnlinePolicy>) -> Self {
        Lift { inner }
    }
}

fn keeps_matching(view: &View<'_>, d: &OnlineDecision) -> bool {
    match d.placement {
        Placement::NewSingleton => true,
        Placement::Join(t) => {
            let part = view.partition();
            let freed = d.dissolve.is_some_and(|x| part.coalition_of(x).contains(&t));
            freed || part.coalition_size(t) == 1
        }
    }
}

impl OnlinePolicy for Lift {
    fn id(&self) -> String {
        format!("lift:{}", self.inner.id())
    }

    fn start(&self) -> PolicyState {
        self.inner.start()
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution> {
        let dist = self.inner.step(state, view)?;
        if dist.branches().iter().any(|b| !keeps_matching(view, &b.decision)) {
            return Err(FhgError::NotMatchingValued(self.inner.id()));
        }
        Ok(dist)
    }
}

/// Runs any policy on the side and copies only its pair decisions: the
/// newcomer is matched exactly when the simulated policy puts it in a
/// coalition of size two with positive welfare. When the simulated policy
/// dissolves a coalition, the matched pair lying inside it is dissolved too.
/// On tree-domain instances this never loses welfare.
pub struct Restrict {
    inner: Box<dyn OnlinePolicy>,
}

impl Restrict {
    pub fn new(inner: Box<dyn OnlinePolicy>) -> Self {
        Restrict { inner }
    }
}

struct RestrictState {
    inner: PolicyState,
    simulated: PartitionState,
}

impl OnlinePolicy for Restrict {
    fn id(&self) -> String {
        format!("restrict:{}", self.inner.id())
    }

    fn start(&self) -> PolicyState {
        Arc::new(RestrictState { inner: self.inner.start(), simulated: PartitionState::new() })
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution> {
        let st = state
            .downcast_ref::<RestrictState>()
            .expect("restrict state");
        let inner_view = View::new(view.graph(), view.arrived(), view.position_table(), &st.simulated, view.mode());
        let dist = self.inner.step(&st.inner, &inner_view)?;
        let z = view.newcomer();
        let outer = view.partition();
        let mut branches = Vec::with_capacity(dist.branches().len());
        for b in dist.into_branches() {
            let mut sim = st.simulated.clone();
            let dissolved = sim.apply(view.graph(), view.mode(), view.t(), z, &b.decision)?;
            // the (unique) outer pair inside the dissolved coalition
            let dissolve = dissolved.as_ref().and_then(|members| {
                members
                    .iter()
                    .copied()
                    .find(|&m| outer.partner(m).is_some_and(|p| members.contains(&p)))
            });
            let coalition = sim.coalition_of(z);
            let placement = if coalition.len() == 2 && sim.coalition_welfare_of(z).is_positive() {
                let u = if coalition[0] == z { coalition[1] } else { coalition[0] };
                let freed = dissolve.is_some_and(|d| outer.coalition_of(d).contains(&u));
                if freed || outer.is_single(u) {
                    Placement::Join(u)
                } else {
                    Placement::NewSingleton
                }
            } else {
                Placement::NewSingleton
            };
            branches.push(Branch {
                decision: OnlineDecision { dissolve, placement },
                probability: b.probability,
                state: Arc::new(RestrictState { inner: b.state, simulated: sim }),
            });
        }
        DecisionDistribution::new(branches)
    }
}
