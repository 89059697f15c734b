//! Online arrival semantics: the policy interface, the engine-side partition
//! state, single runs with audited traces, and expectation over orders.

mod exact;
mod mc;
mod ratio;
mod seed;
mod trace;

use std::any::Any;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FhgError, Result};
use crate::game::{AgentId, Coalition, Partition, SymmetricWeights};
use crate::rational::Rational;

pub use exact::{
    exact_leaves, expected_welfare_exact, expected_welfare_exact_capped, expected_welfare_for_order,
    expected_welfare_per_order, OrderSet,
};
pub use mc::{expected_welfare_mc, McEstimate};
pub use ratio::{competitive_ratio, ratio_with_conventions, Arrival, CompetitiveReport, WelfareValue};
pub use seed::{derive_seed, splitmix64, Stream};
pub use trace::{check_transition, read_trace_jsonl, verify_trace, write_trace_jsonl, DecisionRecord, TraceEvent};

/// Whether coalitions may be dissolved on arrival.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "strict")]
    Strict,
    #[serde(rename = "dissolve")]
    Dissolution,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Dissolution => "dissolve",
        })
    }
}

impl FromStr for Mode {
    type Err = FhgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "dissolve" | "dissolution" => Ok(Mode::Dissolution),
            other => Err(FhgError::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

/// A bijection from arrival positions to agents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrivalOrder(Vec<AgentId>);

impl ArrivalOrder {
    pub fn new(order: Vec<AgentId>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(FhgError::InvalidArgument(format!(
                "arrival order has {} entries for {n} agents",
                order.len()
            )));
        }
        for a in &order {
            if a.index() >= n || std::mem::replace(&mut seen[a.index()], true) {
                return Err(FhgError::InvalidArgument(format!("arrival order is not a permutation of 0..{n}")));
            }
        }
        Ok(ArrivalOrder(order))
    }

    pub fn identity(n: usize) -> Self {
        ArrivalOrder(crate::game::agents(n))
    }

    /// A uniformly random order.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut v = crate::game::agents(n);
        v.shuffle(rng);
        ArrivalOrder(v)
    }

    /// Parses `"2,0,1"`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let ids = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map(AgentId)
                    .map_err(|_| FhgError::InvalidArgument(format!("bad agent id {s:?} in order")))
            })
            .collect::<Result<Vec<_>>>()?;
        ArrivalOrder::new(ids, n)
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.0
    }
}

/// Where the newcomer goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    /// join the coalition currently containing this agent
    Join(AgentId),
    NewSingleton,
}

/// One arrival step: optionally dissolve the coalition containing an agent,
/// then place the newcomer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OnlineDecision {
    pub dissolve: Option<AgentId>,
    pub placement: Placement,
}

impl OnlineDecision {
    pub const SINGLETON: OnlineDecision = OnlineDecision { dissolve: None, placement: Placement::NewSingleton };

    pub fn join(target: AgentId) -> Self {
        OnlineDecision { dissolve: None, placement: Placement::Join(target) }
    }

    pub fn dissolve_and_join(dissolve: AgentId, target: AgentId) -> Self {
        OnlineDecision { dissolve: Some(dissolve), placement: Placement::Join(target) }
    }
}

/// Opaque per-run policy memory, shared between branches that did not diverge.
pub type PolicyState = Arc<dyn Any + Send + Sync>;

pub fn no_state() -> PolicyState {
    Arc::new(())
}

/// One outcome of a randomized step.
#[derive(Clone)]
pub struct Branch {
    pub decision: OnlineDecision,
    pub probability: Rational,
    pub state: PolicyState,
}

/// A finite distribution over decisions; probabilities are exact and sum to 1.
#[derive(Clone)]
pub struct DecisionDistribution(Vec<Branch>);

impl DecisionDistribution {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(FhgError::InvalidDistribution("no branches".into()));
        }
        if branches.iter().any(|b| b.probability.is_negative()) {
            return Err(FhgError::InvalidDistribution("negative probability".into()));
        }
        let total: Rational = branches.iter().map(|b| &b.probability).sum();
        if total != Rational::one() {
            return Err(FhgError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(DecisionDistribution(branches))
    }

    pub fn certain(decision: OnlineDecision, state: PolicyState) -> Self {
        DecisionDistribution(vec![Branch { decision, probability: Rational::one(), state }])
    }

    /// `decision` with probability `p`, otherwise `fallback`; degenerate cases collapse.
    pub fn bernoulli(p: Rational, decision: OnlineDecision, fallback: OnlineDecision, state: PolicyState) -> Result<Self> {
        if p.is_negative() || p > Rational::one() {
            return Err(FhgError::InvalidDistribution(format!("probability {p} outside [0, 1]")));
        }
        if p.is_zero() {
            return Ok(Self::certain(fallback, state));
        }
        if p == Rational::one() {
            return Ok(Self::certain(decision, state));
        }
        let q = &Rational::one() - &p;
        Ok(DecisionDistribution(vec![
            Branch { decision, probability: p, state: state.clone() },
            Branch { decision: fallback, probability: q, state },
        ]))
    }

    pub fn branches(&self) -> &[Branch] {
        &self.0
    }

    pub fn into_branches(self) -> Vec<Branch> {
        self.0
    }

    /// Draws one branch; a single branch consumes no randomness.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> &Branch {
        if self.0.len() == 1 {
            return &self.0[0];
        }
        let u: f64 = rand::Rng::gen(rng);
        let mut acc = 0.0;
        for b in &self.0 {
            acc += b.probability.to_f64();
            if u < acc {
                return b;
            }
        }
        self.0.iter().rev().find(|b| b.probability.is_positive()).expect("positive mass")
    }
}

/// An online algorithm. Given what has been revealed so far it returns a
/// distribution over legal decisions for the newcomer.
pub trait OnlinePolicy: Send + Sync {
    fn id(&self) -> String;

    fn start(&self) -> PolicyState {
        no_state()
    }

    fn step(&self, state: &PolicyState, view: &View<'_>) -> Result<DecisionDistribution>;
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Slot {
    members: Vec<AgentId>,
    pairsum: Rational,
    welfare: Rational,
}

/// The current coalition structure over arrived agents, with welfare kept
/// up to date incrementally.
#[derive(Clone, Debug, Default)]
pub struct PartitionState {
    slot_of: Vec<u32>,
    slots: Vec<Slot>,
    free: Vec<u32>,
    welfare: Rational,
}

impl PartitionState {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, n: usize) {
        if self.slot_of.len() < n {
            self.slot_of.resize(n, NONE);
        }
    }

    pub fn contains(&self, a: AgentId) -> bool {
        self.slot_of.get(a.index()).is_some_and(|&s| s != NONE)
    }

    fn slot(&self, a: AgentId) -> Option<&Slot> {
        let s = *self.slot_of.get(a.index())?;
        (s != NONE).then(|| &self.slots[s as usize])
    }

    /// Members of `a`'s coalition, in the order they joined. Empty if `a` has not arrived.
    pub fn coalition_of(&self, a: AgentId) -> &[AgentId] {
        self.slot(a).map_or(&[], |s| &s.members)
    }

    pub fn coalition_size(&self, a: AgentId) -> usize {
        self.coalition_of(a).len()
    }

    pub fn is_single(&self, a: AgentId) -> bool {
        self.coalition_size(a) == 1
    }

    /// The other member when `a` is in a pair.
    pub fn partner(&self, a: AgentId) -> Option<AgentId> {
        match self.coalition_of(a) {
            [x, y] => Some(if *x == a { *y } else { *x }),
            _ => None,
        }
    }

    pub fn coalition_welfare_of(&self, a: AgentId) -> Rational {
        self.slot(a).map_or_else(Rational::zero, |s| s.welfare.clone())
    }

    pub fn welfare(&self) -> &Rational {
        &self.welfare
    }

    /// Live coalitions, as member lists.
    pub fn coalitions(&self) -> impl Iterator<Item = &[AgentId]> {
        self.slots.iter().filter(|s| !s.members.is_empty()).map(|s| s.members.as_slice())
    }

    pub fn to_partition(&self) -> Partition {
        Partition::new(
            self.coalitions()
                .map(|m| Coalition::new(m.to_vec()).expect("live slot"))
                .collect(),
        )
        .expect("slots are disjoint")
    }

    fn new_slot(&mut self, a: AgentId) {
        let slot = Slot { members: vec![a], pairsum: Rational::zero(), welfare: Rational::zero() };
        let id = match self.free.pop() {
            Some(id) => {
                self.slots[id as usize] = slot;
                id
            }
            None => {
                self.slots.push(slot);
                (self.slots.len() - 1) as u32
            }
        };
        self.slot_of[a.index()] = id;
    }

    /// Breaks the coalition containing `a` into singletons; returns its members.
    fn dissolve(&mut self, a: AgentId) -> Vec<AgentId> {
        let id = self.slot_of[a.index()];
        let slot = std::mem::replace(
            &mut self.slots[id as usize],
            Slot { members: Vec::new(), pairsum: Rational::zero(), welfare: Rational::zero() },
        );
        self.welfare -= &slot.welfare;
        self.free.push(id);
        for &m in &slot.members {
            self.new_slot(m);
        }
        slot.members
    }

    fn join<G: SymmetricWeights + ?Sized>(&mut self, g: &G, newcomer: AgentId, target: AgentId) {
        let id = self.slot_of[target.index()] as usize;
        let slot = &mut self.slots[id];
        for &m in &slot.members {
            slot.pairsum += g.weight(newcomer, m);
        }
        slot.members.push(newcomer);
        let k = slot.members.len() as i64;
        let new_welfare = &slot.pairsum * &Rational::new(2, k);
        self.welfare -= &slot.welfare;
        self.welfare += &new_welfare;
        slot.welfare = new_welfare;
        self.slot_of[newcomer.index()] = id as u32;
    }

    /// Validates and applies one decision for `newcomer` arriving as the `t`-th agent.
    /// Returns the dissolved coalition, if any.
    pub fn apply<G: SymmetricWeights + ?Sized>(
        &mut self,
        g: &G,
        mode: Mode,
        t: usize,
        newcomer: AgentId,
        decision: &OnlineDecision,
    ) -> Result<Option<Vec<AgentId>>> {
        self.ensure(g.agent_count());
        if newcomer.index() >= g.agent_count() {
            return Err(FhgError::UnknownAgent { agent: newcomer, n: g.agent_count() });
        }
        if self.contains(newcomer) {
            return Err(FhgError::IrrevocabilityViolation { t, reason: format!("agent {newcomer} arrived twice") });
        }
        let mut dissolved = None;
        if let Some(d) = decision.dissolve {
            if mode == Mode::Strict {
                return Err(FhgError::DissolutionInStrictMode(t));
            }
            if !self.contains(d) {
                return Err(FhgError::IrrevocabilityViolation {
                    t,
                    reason: format!("dissolution names agent {d}, which has not arrived"),
                });
            }
            dissolved = Some(self.dissolve(d));
        }
        match decision.placement {
            Placement::NewSingleton => self.new_slot(newcomer),
            Placement::Join(target) => {
                if !self.contains(target) {
                    return Err(FhgError::IrrevocabilityViolation {
                        t,
                        reason: format!("join target {target} is not an existing coalition member"),
                    });
                }
                self.join(g, newcomer, target);
            }
        }
        Ok(dissolved)
    }
}

/// What a policy sees at an arrival: the revealed weights among arrived
/// agents, the current partition and the mode. Unarrived agents are hidden.
pub struct View<'a> {
    graph: &'a dyn SymmetricWeights,
    arrived: &'a [AgentId],
    position: &'a [u32],
    partition: &'a PartitionState,
    mode: Mode,
}

impl<'a> View<'a> {
    /// `arrived` lists arrivals in order with the newcomer last; `position[a]`
    /// is the arrival index of `a` (or `u32::MAX`). The newcomer is not yet in `partition`.
    pub fn new(
        graph: &'a dyn SymmetricWeights,
        arrived: &'a [AgentId],
        position: &'a [u32],
        partition: &'a PartitionState,
        mode: Mode,
    ) -> Self {
        debug_assert!(!arrived.is_empty());
        View { graph, arrived, position, partition, mode }
    }

    pub fn newcomer(&self) -> AgentId {
        *self.arrived.last().expect("a newcomer")
    }

    /// 1-based arrival index of the newcomer.
    pub fn t(&self) -> usize {
        self.arrived.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn arrived(&self) -> &[AgentId] {
        self.arrived
    }

    /// Agents arrived before the newcomer.
    pub fn earlier(&self) -> &[AgentId] {
        &self.arrived[..self.arrived.len() - 1]
    }

    pub fn graph(&self) -> &'a dyn SymmetricWeights {
        self.graph
    }

    pub fn partition(&self) -> &PartitionState {
        self.partition
    }

    pub fn position_table(&self) -> &'a [u32] {
        self.position
    }

    pub fn has_arrived(&self, a: AgentId) -> bool {
        self.position.get(a.index()).is_some_and(|&p| p != NONE)
    }

    /// Arrival index (0-based) of an arrived agent.
    pub fn position(&self, a: AgentId) -> usize {
        let p = self.position[a.index()];
        assert!(p != NONE, "agent {a} has not arrived");
        p as usize
    }

    /// Weight between two arrived agents.
    pub fn weight(&self, i: AgentId, j: AgentId) -> Rational {
        assert!(self.has_arrived(i) && self.has_arrived(j), "weight of an unrevealed agent");
        self.graph.weight(i, j)
    }

    /// Arrived agents joined to `i` by positive weight, ordered by arrival.
    pub fn positive_neighbors(&self, i: AgentId) -> Vec<(AgentId, Rational)> {
        let mut out: Vec<_> = self
            .graph
            .positive_neighbors(i)
            .into_iter()
            .filter(|(j, _)| self.has_arrived(*j))
            .collect();
        out.sort_by_key(|(j, _)| self.position[j.index()]);
        out
    }
}

/// Options for recording a run.
#[derive(Clone, Copy, Debug, Default)]
pub struct TraceOptions {
    pub record: bool,
    /// nonzero weights from the newcomer to earlier arrivals
    pub revealed: bool,
    /// the full partition after each arrival
    pub snapshots: bool,
}

impl TraceOptions {
    pub fn full() -> Self {
        TraceOptions { record: true, revealed: true, snapshots: true }
    }
}

/// A run in progress. The graph is passed on every arrival so that an
/// interactive adversary can keep extending it between arrivals.
pub struct Session<'p> {
    policy: &'p dyn OnlinePolicy,
    mode: Mode,
    seed: u64,
    arrived: Vec<AgentId>,
    position: Vec<u32>,
    partition: PartitionState,
    state: PolicyState,
    options: TraceOptions,
    events: Vec<TraceEvent>,
}

impl<'p> Session<'p> {
    pub fn new(policy: &'p dyn OnlinePolicy, mode: Mode, seed: u64, options: TraceOptions) -> Self {
        Session {
            policy,
            mode,
            seed,
            arrived: Vec::new(),
            position: Vec::new(),
            partition: PartitionState::new(),
            state: policy.start(),
            options,
            events: Vec::new(),
        }
    }

    /// Reveals `agent`, asks the policy, checks and applies its decision.
    pub fn arrive<G: SymmetricWeights>(&mut self, g: &G, agent: AgentId) -> Result<OnlineDecision> {
        let n = g.agent_count();
        if self.position.len() < n {
            self.position.resize(n, NONE);
        }
        if agent.index() >= n {
            return Err(FhgError::UnknownAgent { agent, n });
        }
        let t = self.arrived.len() + 1;
        if self.position[agent.index()] != NONE {
            return Err(FhgError::IrrevocabilityViolation { t, reason: format!("agent {agent} arrived twice") });
        }
        self.arrived.push(agent);
        self.position[agent.index()] = (t - 1) as u32;
        let dist = {
            let view = View::new(g, &self.arrived, &self.position, &self.partition, self.mode);
            self.policy.step(&self.state, &view)?
        };
        let branch = if dist.branches().len() == 1 {
            dist.branches()[0].clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, Stream::Step, t as u64));
            dist.sample(&mut rng).clone()
        };
        let dissolved = self.partition.apply(g, self.mode, t, agent, &branch.decision)?;
        self.state = branch.state;
        if self.options.record {
            let revealed = self.options.revealed.then(|| {
                self.arrived[..t - 1]
                    .iter()
                    .filter_map(|&j| {
                        let w = g.weight(agent, j);
                        (!w.is_zero()).then_some((j, w))
                    })
                    .collect()
            });
            let snapshot = self.options.snapshots.then(|| self.partition.to_partition().encoding());
            self.events.push(TraceEvent {
                t,
                agent,
                decision: DecisionRecord {
                    dissolved,
                    join: match branch.decision.placement {
                        Placement::Join(a) => Some(a),
                        Placement::NewSingleton => None,
                    },
                    coalition: {
                        let mut c = self.partition.coalition_of(agent).to_vec();
                        c.sort_unstable();
                        c
                    },
                },
                welfare: self.partition.welfare().clone(),
                revealed,
                snapshot,
            });
        }
        Ok(branch.decision)
    }

    pub fn partition(&self) -> &PartitionState {
        &self.partition
    }

    pub fn welfare(&self) -> &Rational {
        self.partition.welfare()
    }

    pub fn arrived(&self) -> &[AgentId] {
        &self.arrived
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<TraceEvent> {
        self.events
    }
}

/// Runs `policy` on `g` in order `order`. Policy randomness at arrival `t`
/// comes from the stream `derive_seed(seed, Step, t)`.
pub fn run_online<G: SymmetricWeights>(
    g: &G,
    order: &ArrivalOrder,
    policy: &dyn OnlinePolicy,
    mode: Mode,
    seed: u64,
    options: TraceOptions,
) -> Result<(Partition, Vec<TraceEvent>)> {
    if order.agents().len() != g.agent_count() {
        return Err(FhgError::InvalidArgument("arrival order does not match the instance".into()));
    }
    let mut session = Session::new(policy, mode, seed, options);
    for &a in order.agents() {
        session.arrive(g, a)?;
    }
    let partition = session.partition().to_partition();
    let events = session.into_events();
    if options.record && options.snapshots {
        verify_trace(g, mode, &events)?;
    }
    Ok((partition, events))
}

/// Welfare of one run, without recording.
pub fn run_welfare<G: SymmetricWeights>(
    g: &G,
    order: &[AgentId],
    policy: &dyn OnlinePolicy,
    mode: Mode,
    seed: u64,
) -> Result<Rational> {
    let mut session = Session::new(policy, mode, seed, TraceOptions::default());
    for &a in order {
        session.arrive(g, a)?;
    }
    Ok(session.welfare().clone())
}
