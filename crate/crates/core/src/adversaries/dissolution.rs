//! The phased adversary against online coalition formation with free
//! dissolution. It grows stars around both ends of the policy's only positive
//! pair and raises the leaf weights wave by wave until the policy switches
//! pairs; each switch yields a comparison partition and hence an upper bound
//! on the policy's ratio.

use serde::{Deserialize, Serialize};

use crate::engine::{Mode, OnlinePolicy, Session, TraceEvent, TraceOptions};
use crate::error::{FhgError, Result};
use crate::game::{members_welfare, AgentId, SymmetricFhg, SymmetricWeights, Valuation};
use crate::oracles::star_welfare;
use crate::rational::Rational;
use crate::sqrt2::{cmp_rational, dissolution_floor, Sqrt2Ext};

const NO_GROUP: u32 = u32::MAX;

/// One adversary agent. Agents are numbered in arrival order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryNode {
    /// the single earlier agent this one values positively
    pub parent: Option<AgentId>,
    #[serde(default, skip_serializing_if = "Rational::is_zero")]
    pub w: Rational,
    /// agents of one leaf set value each other at zero
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<u32>,
    /// weight towards every other earlier agent
    pub fill: Rational,
}

/// The instance revealed so far, stored per agent: one positive edge to a
/// parent, zero inside a leaf set, and a negative fill of
/// `−(1 + running positive sum)` everywhere else.
#[derive(Clone, Debug, Default)]
pub struct AdversaryGraph {
    nodes: Vec<AdversaryNode>,
    group: Vec<u32>,
    children: Vec<Vec<u32>>,
    positive_total: Rational,
}

impl AdversaryGraph {
    pub fn new() -> Self {
        AdversaryGraph::default()
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[AdversaryNode] {
        &self.nodes
    }

    pub fn positive_total(&self) -> &Rational {
        &self.positive_total
    }

    /// Appends an agent with an optional positive edge and leaf set.
    pub fn push(&mut self, parent: Option<(AgentId, Rational)>, group: Option<u32>) -> AgentId {
        let id = AgentId::from(self.nodes.len());
        let (parent, w) = match parent {
            Some((p, w)) => {
                assert!(p.index() < self.nodes.len() && w.is_positive(), "bad parent edge");
                self.children[p.index()].push(id.0);
                self.positive_total += &w;
                (Some(p), w)
            }
            None => (None, Rational::zero()),
        };
        let fill = -(Rational::one() + &self.positive_total);
        self.nodes.push(AdversaryNode { parent, w, group, fill });
        self.group.push(group.unwrap_or(NO_GROUP));
        self.children.push(Vec::new());
        id
    }

    /// Rebuilds the graph from stored nodes.
    pub fn from_nodes(nodes: Vec<AdversaryNode>) -> Result<Self> {
        let mut g = AdversaryGraph::new();
        for (k, node) in nodes.into_iter().enumerate() {
            let parent = match node.parent {
                Some(p) if p.index() >= k || !node.w.is_positive() => {
                    return Err(FhgError::InvalidInstance(format!("agent {k}: bad parent edge")));
                }
                Some(p) => Some((p, node.w.clone())),
                None => None,
            };
            g.push(parent, node.group);
            if g.nodes[k].fill != node.fill {
                return Err(FhgError::InvalidInstance(format!("agent {k}: fill does not match the running sum")));
            }
        }
        Ok(g)
    }

    /// Dense copy, for small instances.
    pub fn to_symmetric(&self) -> SymmetricFhg {
        SymmetricFhg::from_fn(self.n(), |i, j| self.weight(AgentId::from(i), AgentId::from(j)))
    }
}

impl Valuation for AdversaryGraph {
    fn agent_count(&self) -> usize {
        self.nodes.len()
    }

    fn value(&self, i: AgentId, j: AgentId) -> Rational {
        let (lo, hi) = if i.0 < j.0 { (i, j) } else { (j, i) };
        let node = &self.nodes[hi.index()];
        if node.parent == Some(lo) {
            node.w.clone()
        } else if self.group[hi.index()] != NO_GROUP && self.group[hi.index()] == self.group[lo.index()] {
            Rational::zero()
        } else {
            node.fill.clone()
        }
    }
}

impl SymmetricWeights for AdversaryGraph {
    fn positive_neighbors(&self, i: AgentId) -> Vec<(AgentId, Rational)> {
        let node = &self.nodes[i.index()];
        let mut out = Vec::with_capacity(self.children[i.index()].len() + 1);
        if let Some(p) = node.parent {
            out.push((p, node.w.clone()));
        }
        out.extend(self.children[i.index()].iter().map(|&c| (AgentId(c), self.nodes[c as usize].w.clone())));
        out
    }
}

/// Termination guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryBudget {
    pub max_phases: usize,
    /// arrivals in the leaf-building part of one phase
    pub max_agents_per_phase: usize,
    /// weight increments per phase
    pub max_increments: usize,
}

impl Default for AdversaryBudget {
    fn default() -> Self {
        AdversaryBudget { max_phases: 4, max_agents_per_phase: 10_000, max_increments: 1000 }
    }
}

impl AdversaryBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_phases == 0 || self.max_agents_per_phase == 0 || self.max_increments == 0 {
            return Err(FhgError::InvalidArgument("adversary budgets must be positive".into()));
        }
        Ok(())
    }
}

/// A rational stand-in `q ≥ c/γ` with `γ' = c/q ∈ (c, γ)`, so that every
/// step size `ε_i = ((γ' − c)/(2γ'))·2^{−i} = ((1 − q)/2)·2^{−i}` is rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surrogate {
    pub gamma: Rational,
    pub q: Rational,
}

impl Surrogate {
    /// `γ' = c/q`
    pub fn gamma_prime(&self) -> Sqrt2Ext {
        dissolution_floor().scale(&self.q.recip())
    }

    pub fn eps(&self, i: u32) -> Rational {
        (Rational::one() - &self.q) / Rational::from(2) / Rational::from(2).pow(i as i32)
    }

    /// `ℓ_i = ⌈(1 − ε_i)/ε_i⌉`
    pub fn ell(&self, i: u32) -> u64 {
        let e = self.eps(i);
        let v = ((Rational::one() - &e) / e).ceil();
        u64::try_from(v).expect("ell fits u64")
    }

    /// Exact check of `ε_i·2^i·2γ' = γ' − c` and `c < γ' < γ`.
    pub fn check_eps(&self, i: u32, eps: &Rational) -> bool {
        let gp = self.gamma_prime();
        let lhs = gp.scale(&(eps * &Rational::from(2).pow(i as i32 + 1)));
        let rhs = gp.clone() - dissolution_floor();
        lhs == rhs && gp > dissolution_floor() && cmp_rational(&self.gamma, &gp).is_gt()
    }
}

/// Picks `q = ⌊10^k·c/γ⌋/10^k + 10^{−k}` for the smallest `k ≥ 6` with `q < 1`.
pub fn epsilon_surrogate(gamma: &Rational) -> Result<Surrogate> {
    let c = dissolution_floor();
    if cmp_rational(gamma, &c).is_le() {
        return Err(FhgError::InvalidArgument(format!("gamma = {gamma} must exceed 1/(6+4√2)")));
    }
    if *gamma > Rational::one() {
        return Err(FhgError::InvalidArgument(format!("gamma = {gamma} must be at most 1")));
    }
    let ratio = c.scale(&gamma.recip());
    let mut scale = Rational::from(1_000_000);
    for _ in 0..8 {
        // floor(scale·ratio) by a float guess corrected exactly
        let target = ratio.scale(&scale);
        let mut m = Rational::from_f64(target.to_f64().floor()).expect("finite");
        while cmp_rational(&m, &target).is_gt() {
            m -= Rational::one();
        }
        while cmp_rational(&(&m + &Rational::one()), &target).is_le() {
            m += Rational::one();
        }
        let q = (m + Rational::one()) / &scale;
        if q < Rational::one() {
            return Ok(Surrogate { gamma: gamma.clone(), q });
        }
        scale *= Rational::from(1000);
    }
    Err(FhgError::InvalidArgument(format!("gamma = {gamma} is too close to 1/(6+4√2)")))
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryOutcome {
    /// every budgeted phase ended with a switch
    Completed,
    /// the increment budget ran out in this phase
    PolicyNeverDissolves { phase: u32 },
    /// the policy held a positive coalition of three or more agents
    NonMatchingPositiveStructure { phase: u32, t: usize },
    /// the policy held no positive coalition at all
    NoPositiveCoalition { phase: u32, t: usize },
    /// the leaf-building part of a phase ran out of agents
    AgentBudgetExhausted { phase: u32 },
}

/// One completed or stalled phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub i: u32,
    pub y: Rational,
    pub eps: Rational,
    pub ell: u64,
    /// the wave at which the policy switched; absent when it stalled
    pub j_star: Option<usize>,
    /// waves completed
    pub waves: usize,
    /// weight of the leaves in `C` and `D`
    pub leaf_weight: Rational,
    pub c: Vec<AgentId>,
    pub d: Vec<AgentId>,
    pub sw_c: Rational,
    pub sw_d: Rational,
    /// `2ℓ/(ℓ+1)·leaf_weight`
    pub star_closed_form: Rational,
    pub y_next: Option<Rational>,
    /// switches during the leaf-building part
    pub relabels: usize,
    pub agents_end: usize,
}

/// One upper bound on the ratio: the policy's welfare over a comparison partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub phase: u32,
    /// "switch", "stall" or "end"
    pub at: String,
    pub t: usize,
    pub alg: Rational,
    pub comparison: Rational,
    pub bound: Rational,
}

#[derive(Clone, Debug)]
pub struct AdversaryRun {
    pub policy: String,
    pub surrogate: Surrogate,
    pub budget: AdversaryBudget,
    pub graph: AdversaryGraph,
    pub events: Vec<TraceEvent>,
    pub phases: Vec<PhaseRecord>,
    pub trajectory: Vec<BoundPoint>,
    pub outcome: AdversaryOutcome,
    pub ratio_upper_bound: Rational,
    pub final_welfare: Rational,
}

/// The JSON document written for a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryBundle {
    pub policy: String,
    pub gamma: Rational,
    pub q: Rational,
    /// `c/q` as `a + b·√2`
    pub gamma_prime: (Rational, Rational),
    pub budget: AdversaryBudget,
    pub outcome: AdversaryOutcome,
    pub ratio_upper_bound: Rational,
    pub final_welfare: Rational,
    pub phases: Vec<PhaseRecord>,
    pub trajectory: Vec<BoundPoint>,
    pub instance: Vec<AdversaryNode>,
    pub trace: Vec<TraceEvent>,
}

impl AdversaryRun {
    pub fn bundle(&self) -> AdversaryBundle {
        let gp = self.surrogate.gamma_prime();
        AdversaryBundle {
            policy: self.policy.clone(),
            gamma: self.surrogate.gamma.clone(),
            q: self.surrogate.q.clone(),
            gamma_prime: (gp.a, gp.b),
            budget: self.budget,
            outcome: self.outcome,
            ratio_upper_bound: self.ratio_upper_bound.clone(),
            final_welfare: self.final_welfare.clone(),
            phases: self.phases.clone(),
            trajectory: self.trajectory.clone(),
            instance: self.graph.nodes().to_vec(),
            trace: self.events.clone(),
        }
    }
}

enum Reaction {
    Kept,
    /// the newcomer now forms the only positive pair, with `center`
    Switched { center: AgentId },
    Broken(AdversaryOutcome),
}

struct Driver<'p> {
    g: AdversaryGraph,
    session: Session<'p>,
    groups: u32,
    phase: u32,
}

impl Driver<'_> {
    fn group(&mut self) -> u32 {
        self.groups += 1;
        self.groups - 1
    }

    /// Sends a leaf of `center` and classifies the policy's answer against the
    /// pair `(a, b)`. Returns the leaf, the welfare before it arrived, and the reaction.
    fn send(&mut self, center: AgentId, w: &Rational, group: Option<u32>, pair: (AgentId, AgentId)) -> Result<(AgentId, Rational, Reaction)> {
        let before = self.session.welfare().clone();
        let z = self.g.push(Some((center, w.clone())), group);
        self.session.arrive(&self.g, z)?;
        Ok((z, before, self.classify(z, pair)))
    }

    fn classify(&self, z: AgentId, (a, b): (AgentId, AgentId)) -> Reaction {
        let part = self.session.partition();
        let t = self.session.arrived().len();
        let pair_intact = part.coalition_size(a) == 2 && part.partner(a) == Some(b);
        if part.coalition_welfare_of(z).is_positive() {
            let members = part.coalition_of(z);
            if members.len() >= 3 || pair_intact {
                return Reaction::Broken(AdversaryOutcome::NonMatchingPositiveStructure { phase: self.phase, t });
            }
            let u = if members[0] == z { members[1] } else { members[0] };
            return Reaction::Switched { center: u };
        }
        if pair_intact {
            Reaction::Kept
        } else {
            Reaction::Broken(AdversaryOutcome::NoPositiveCoalition { phase: self.phase, t })
        }
    }

    fn star(&self, center: AgentId, leaves: &[AgentId]) -> Vec<AgentId> {
        let mut c = Vec::with_capacity(leaves.len() + 1);
        c.push(center);
        c.extend_from_slice(leaves);
        c
    }

    fn point(&self, at: &str, alg: Rational, comparison: Rational) -> BoundPoint {
        let bound = crate::engine::ratio_with_conventions(&alg, &comparison);
        BoundPoint {
            phase: self.phase,
            at: at.into(),
            t: self.session.arrived().len(),
            alg,
            comparison,
            bound,
        }
    }
}

/// Runs the adversary against `policy` under free dissolution.
///
/// The first two agents share weight 1. Phase `i` starts from the policy's
/// pair `{a, b}` of weight `y_i`. First `ℓ_i` leaves of weight `y_i` arrive at
/// `b`, then `ℓ_i` at `a`; if the policy swaps its pair for a leaf, the roles
/// are relabelled and the leaf set of the new `b` starts over. Then waves of
/// `ℓ_i` leaves at `a` and `ℓ_i` at `b` arrive with weight `y_i + j·ε_i` until
/// the policy switches to a new pair `{a_{i+1}, b_{i+1}}`. The star at the
/// abandoned end from wave `j* − 1` becomes `C_i`, the other one `D_i`.
pub fn run_dissolution_adversary(
    policy: &dyn OnlinePolicy,
    gamma: &Rational,
    budget: AdversaryBudget,
) -> Result<AdversaryRun> {
    budget.validate()?;
    let surrogate = epsilon_surrogate(gamma)?;
    let options = TraceOptions { record: true, revealed: false, snapshots: false };
    let mut d = Driver { g: AdversaryGraph::new(), session: Session::new(policy, Mode::Dissolution, 0, options), groups: 0, phase: 1 };
    let mut phases = Vec::new();
    let mut trajectory = Vec::new();
    let mut c_total = Rational::zero();

    let a1 = d.g.push(None, None);
    d.session.arrive(&d.g, a1)?;
    let (b1, _, first) = d.send(a1, &Rational::one(), None, (a1, AgentId(u32::MAX)))?;
    let mut pair = (a1, b1);
    let mut y = Rational::one();
    let mut outcome = match first {
        Reaction::Switched { .. } => None,
        Reaction::Kept => unreachable!("no pair existed before"),
        Reaction::Broken(o) => Some(o),
    };

    // comparison welfare used when the run breaks off: C_1..C_{i-1} plus the current pair edge
    let end_point = |d: &Driver<'_>, c_total: &Rational, y: &Rational| {
        d.point("end", d.session.welfare().clone(), c_total + y)
    };

    'phases: while outcome.is_none() {
        let i = d.phase;
        if i as usize > budget.max_phases {
            outcome = Some(AdversaryOutcome::Completed);
            break;
        }
        let eps = surrogate.eps(i);
        let ell = surrogate.ell(i);
        let ell_us = ell as usize;
        let (mut a, mut b) = pair;

        // leaf-building part
        let mut la: Vec<AgentId> = Vec::new();
        let mut lb: Vec<AgentId> = Vec::new();
        let mut ga = d.group();
        let mut gb = d.group();
        let mut sent = 0usize;
        let mut relabels = 0usize;
        loop {
            if la.len() == ell_us && lb.len() == ell_us {
                break;
            }
            if sent == budget.max_agents_per_phase {
                outcome = Some(AdversaryOutcome::AgentBudgetExhausted { phase: i });
                trajectory.push(end_point(&d, &c_total, &y));
                break 'phases;
            }
            sent += 1;
            let to_b = lb.len() < ell_us;
            let (center, group) = if to_b { (b, gb) } else { (a, ga) };
            let (z, _, reaction) = d.send(center, &y, Some(group), (a, b))?;
            match reaction {
                Reaction::Kept => {
                    if to_b {
                        lb.push(z)
                    } else {
                        la.push(z)
                    }
                }
                Reaction::Switched { center: c } => {
                    debug_assert_eq!(c, center);
                    relabels += 1;
                    if to_b {
                        // b keeps its leaves and becomes a
                        a = b;
                        la = std::mem::take(&mut lb);
                        ga = gb;
                    }
                    b = z;
                    lb.clear();
                    gb = d.group();
                }
                Reaction::Broken(o) => {
                    outcome = Some(o);
                    trajectory.push(end_point(&d, &c_total, &y));
                    break 'phases;
                }
            }
        }

        // increment waves
        let mut prev_a = la;
        let mut prev_b = lb;
        let mut switched = None;
        let mut waves = 0;
        'waves: for j in 1..=budget.max_increments {
            let w = &y + &(&eps * &Rational::from(j as u64));
            let mut cur = [Vec::with_capacity(ell_us), Vec::with_capacity(ell_us)];
            for (side, center) in [a, b].into_iter().enumerate() {
                let group = d.group();
                for _ in 0..ell_us {
                    let (z, before, reaction) = d.send(center, &w, Some(group), (a, b))?;
                    match reaction {
                        Reaction::Kept => cur[side].push(z),
                        Reaction::Switched { center: c } => {
                            switched = Some((j, c, z, before));
                            break 'waves;
                        }
                        Reaction::Broken(o) => {
                            outcome = Some(o);
                            trajectory.push(end_point(&d, &c_total, &y));
                            break 'phases;
                        }
                    }
                }
            }
            let [ca, cb] = cur;
            prev_a = ca;
            prev_b = cb;
            waves = j;
        }

        let leaf_weight = &y + &(&eps * &Rational::from(waves as u64));
        let closed = star_welfare(ell, &leaf_weight);
        match switched {
            Some((j_star, center, z, before)) => {
                let (c_set, d_set, next) = if center == a {
                    (d.star(b, &prev_b), d.star(a, &prev_a), (a, z))
                } else {
                    (d.star(a, &prev_a), d.star(b, &prev_b), (b, z))
                };
                let sw_c = members_welfare(&d.g, &c_set);
                let sw_d = members_welfare(&d.g, &d_set);
                c_total += &sw_c;
                let y_next = d.g.weight(next.0, next.1);
                trajectory.push(d.point("switch", before, &c_total + &sw_d));
                phases.push(PhaseRecord {
                    i,
                    y: y.clone(),
                    eps,
                    ell,
                    j_star: Some(j_star),
                    waves,
                    leaf_weight,
                    c: c_set,
                    d: d_set,
                    sw_c,
                    sw_d,
                    star_closed_form: closed,
                    y_next: Some(y_next.clone()),
                    relabels,
                    agents_end: d.g.n(),
                });
                pair = next;
                y = y_next;
                d.phase += 1;
            }
            None => {
                let sa = d.star(a, &prev_a);
                let sb = d.star(b, &prev_b);
                let sw_a = members_welfare(&d.g, &sa);
                let sw_b = members_welfare(&d.g, &sb);
                let comparison = &(&c_total + &sw_a) + &sw_b;
                trajectory.push(d.point("stall", d.session.welfare().clone(), comparison));
                phases.push(PhaseRecord {
                    i,
                    y: y.clone(),
                    eps,
                    ell,
                    j_star: None,
                    waves,
                    leaf_weight,
                    c: sa,
                    d: sb,
                    sw_c: sw_a,
                    sw_d: sw_b,
                    star_closed_form: closed,
                    y_next: None,
                    relabels,
                    agents_end: d.g.n(),
                });
                outcome = Some(AdversaryOutcome::PolicyNeverDissolves { phase: i });
            }
        }
    }

    let ratio_upper_bound = trajectory
        .iter()
        .map(|p| p.bound.clone())
        .min()
        .unwrap_or_else(|| crate::engine::ratio_with_conventions(d.session.welfare(), &y));
    let final_welfare = d.session.welfare().clone();
    let Driver { g, session, .. } = d;
    Ok(AdversaryRun {
        policy: policy.id(),
        surrogate,
        budget,
        graph: g,
        events: session.into_events(),
        phases,
        trajectory,
        outcome: outcome.expect("set on exit"),
        ratio_upper_bound,
        final_welfare,
    })
}
