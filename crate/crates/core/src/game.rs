//! Instances, coalitions, partitions and welfare.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FhgError, Result};
use crate::rational::Rational;

/// Index of an agent, in `0..n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for AgentId {
    fn from(i: usize) -> Self {
        AgentId(i as u32)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Agents `0..n` as ids.
pub fn agents(n: usize) -> Vec<AgentId> {
    (0..n).map(AgentId::from).collect()
}

/// Anything that assigns agent `i` a value for agent `j`.
pub trait Valuation {
    fn agent_count(&self) -> usize;
    /// `v_i(j)`; zero when unset. Callers guarantee `i != j` and both in range.
    fn value(&self, i: AgentId, j: AgentId) -> Rational;
}

/// A valuation with `v_i(j) = v_j(i)`.
pub trait SymmetricWeights: Valuation + Sync {
    fn weight(&self, i: AgentId, j: AgentId) -> Rational {
        self.value(i, j)
    }

    /// Neighbours joined to `i` by a strictly positive weight, ascending by id.
    fn positive_neighbors(&self, i: AgentId) -> Vec<(AgentId, Rational)> {
        (0..self.agent_count())
            .map(AgentId::from)
            .filter(|&j| j != i)
            .filter_map(|j| {
                let w = self.weight(i, j);
                w.is_positive().then_some((j, w))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(Vec<Rational>),
    Sparse(HashMap<(u32, u32), Rational>),
}

const DENSE_LIMIT: usize = 512;

/// A symmetric instance `(N, w)`.
#[derive(Clone, Debug)]
pub struct SymmetricFhg {
    n: usize,
    storage: Storage,
    positive: Vec<Vec<(AgentId, Rational)>>,
}

impl SymmetricFhg {
    /// All-zero instance on `n` agents.
    pub fn empty(n: usize) -> Self {
        let storage = if n <= DENSE_LIMIT {
            Storage::Dense(vec![Rational::zero(); n * n])
        } else {
            Storage::Sparse(HashMap::new())
        };
        SymmetricFhg { n, storage, positive: vec![Vec::new(); n] }
    }

    /// Builds an instance from `(i, j, w)` triples. Each unordered pair may appear once.
    pub fn from_weights<I>(n: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut g = SymmetricFhg::empty(n);
        let mut seen = std::collections::HashSet::new();
        for (i, j, w) in weights {
            if i == j {
                return Err(FhgError::InvalidInstance(format!("self valuation at agent {i}")));
            }
            if i >= n || j >= n {
                return Err(FhgError::InvalidInstance(format!(
                    "pair ({i}, {j}) out of range for n = {n}"
                )));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(FhgError::InvalidInstance(format!("pair ({i}, {j}) listed twice")));
            }
            g.put(i, j, w);
        }
        g.rebuild_positive();
        Ok(g)
    }

    /// Builds an instance by evaluating `f(i, j)` for every `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut g = SymmetricFhg::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                let w = f(i, j);
                if !w.is_zero() {
                    g.put(i, j, w);
                }
            }
        }
        g.rebuild_positive();
        g
    }

    fn put(&mut self, i: usize, j: usize, w: Rational) {
        match &mut self.storage {
            Storage::Dense(v) => {
                v[i * self.n + j] = w.clone();
                v[j * self.n + i] = w;
            }
            Storage::Sparse(m) => {
                let key = (i.min(j) as u32, i.max(j) as u32);
                if w.is_zero() {
                    m.remove(&key);
                } else {
                    m.insert(key, w);
                }
            }
        }
    }

    fn rebuild_positive(&mut self) {
        let mut positive = vec![Vec::new(); self.n];
        for (i, j, w) in self.nonzero_pairs() {
            if w.is_positive() {
                positive[i].push((AgentId::from(j), w.clone()));
                positive[j].push((AgentId::from(i), w));
            }
        }
        for list in &mut positive {
            list.sort_by_key(|(a, _)| *a);
        }
        self.positive = positive;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self, i: usize, j: usize) -> Rational {
        if i == j {
            return Rational::zero();
        }
        match &self.storage {
            Storage::Dense(v) => v[i * self.n + j].clone(),
            Storage::Sparse(m) => m
                .get(&(i.min(j) as u32, i.max(j) as u32))
                .cloned()
                .unwrap_or_default(),
        }
    }

    /// Nonzero pairs `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn nonzero_pairs(&self) -> Vec<(usize, usize, Rational)> {
        match &self.storage {
            Storage::Dense(v) => {
                let mut out = Vec::new();
                for i in 0..self.n {
                    for j in i + 1..self.n {
                        let w = &v[i * self.n + j];
                        if !w.is_zero() {
                            out.push((i, j, w.clone()));
                        }
                    }
                }
                out
            }
            Storage::Sparse(m) => {
                let mut out: Vec<_> = m
                    .iter()
                    .map(|(&(i, j), w)| (i as usize, j as usize, w.clone()))
                    .collect();
                out.sort_by_key(|t| (t.0, t.1));
                out
            }
        }
    }

    /// Sum of all strictly positive weights.
    pub fn positive_sum(&self) -> Rational {
        self.positive
            .iter()
            .flatten()
            .map(|(_, w)| w)
            .sum::<Rational>()
            / Rational::from(2)
    }

    /// The same game with agent `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> SymmetricFhg {
        assert_eq!(perm.len(), self.n);
        let triples = self.nonzero_pairs().into_iter().map(|(i, j, w)| (perm[i], perm[j], w));
        SymmetricFhg::from_weights(self.n, triples).expect("relabel of a valid instance")
    }

    /// The induced subgame on `members`, relabelled `0..members.len()`.
    pub fn induced(&self, members: &[AgentId]) -> SymmetricFhg {
        SymmetricFhg::from_fn(members.len(), |a, b| self.w(members[a].index(), members[b].index()))
    }
}

impl Valuation for SymmetricFhg {
    fn agent_count(&self) -> usize {
        self.n
    }

    fn value(&self, i: AgentId, j: AgentId) -> Rational {
        self.w(i.index(), j.index())
    }
}

impl SymmetricWeights for SymmetricFhg {
    fn positive_neighbors(&self, i: AgentId) -> Vec<(AgentId, Rational)> {
        self.positive[i.index()].clone()
    }
}

/// An instance with possibly asymmetric valuations `v_i(j)`.
#[derive(Clone, Debug)]
pub struct DirectedFhg {
    n: usize,
    v: Vec<Rational>,
}

impl DirectedFhg {
    /// Builds from ordered `(i, j, v_i(j))` triples; each ordered pair at most once.
    pub fn from_values<I>(n: usize, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut v = vec![Rational::zero(); n * n];
        let mut seen = std::collections::HashSet::new();
        for (i, j, x) in values {
            if i == j {
                return Err(FhgError::InvalidInstance(format!("self valuation at agent {i}")));
            }
            if i >= n || j >= n {
                return Err(FhgError::InvalidInstance(format!(
                    "pair ({i}, {j}) out of range for n = {n}"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(FhgError::InvalidInstance(format!("ordered pair ({i}, {j}) listed twice")));
            }
            v[i * n + j] = x;
        }
        Ok(DirectedFhg { n, v })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero ordered entries `(i, j, v_i(j))`.
    pub fn nonzero_values(&self) -> Vec<(usize, usize, Rational)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let x = &self.v[i * self.n + j];
                if i != j && !x.is_zero() {
                    out.push((i, j, x.clone()));
                }
            }
        }
        out
    }
}

impl Valuation for DirectedFhg {
    fn agent_count(&self) -> usize {
        self.n
    }

    fn value(&self, i: AgentId, j: AgentId) -> Rational {
        self.v[i.index() * self.n + j.index()].clone()
    }
}

/// Replaces both `v_i(j)` and `v_j(i)` by their mean.
pub fn symmetrize(g: &DirectedFhg) -> SymmetricFhg {
    let half = crate::rational::ratio(1, 2);
    SymmetricFhg::from_fn(g.n, |i, j| {
        &(&g.v[i * g.n + j] + &g.v[j * g.n + i]) * &half
    })
}

/// A nonempty set of agents, stored sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<AgentId>", into = "Vec<AgentId>")]
pub struct Coalition(Vec<AgentId>);

impl Coalition {
    pub fn new(mut members: Vec<AgentId>) -> Result<Self> {
        if members.is_empty() {
            return Err(FhgError::InvalidPartition("empty coalition".into()));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(FhgError::InvalidPartition("repeated member in coalition".into()));
        }
        Ok(Coalition(members))
    }

    pub fn singleton(a: AgentId) -> Self {
        Coalition(vec![a])
    }

    pub fn pair(a: AgentId, b: AgentId) -> Self {
        assert_ne!(a, b);
        Coalition(vec![a.min(b), a.max(b)])
    }

    pub fn members(&self) -> &[AgentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, a: AgentId) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn min(&self) -> AgentId {
        self.0[0]
    }
}

impl TryFrom<Vec<AgentId>> for Coalition {
    type Error = FhgError;
    fn try_from(v: Vec<AgentId>) -> Result<Self> {
        Coalition::new(v)
    }
}

impl From<Coalition> for Vec<AgentId> {
    fn from(c: Coalition) -> Self {
        c.0
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter().map(|a| a.0)).finish()
    }
}

/// Disjoint coalitions covering a ground set. Coalitions are kept ordered by
/// their smallest member, which makes equal partitions structurally equal.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    coalitions: Vec<Coalition>,
    #[serde(skip)]
    ground: Vec<AgentId>,
}

impl Partition {
    /// A partition whose ground set is the union of the coalitions.
    pub fn new(coalitions: Vec<Coalition>) -> Result<Self> {
        let mut ground: Vec<AgentId> =
            coalitions.iter().flat_map(|c| c.members().iter().copied()).collect();
        ground.sort_unstable();
        if ground.windows(2).any(|w| w[0] == w[1]) {
            return Err(FhgError::InvalidPartition("coalitions overlap".into()));
        }
        let mut coalitions = coalitions;
        coalitions.sort_by_key(|c| c.min());
        Ok(Partition { coalitions, ground })
    }

    /// Like [`Partition::new`] but also checks the union equals `ground`.
    pub fn with_ground(coalitions: Vec<Coalition>, ground: &[AgentId]) -> Result<Self> {
        let p = Partition::new(coalitions)?;
        let mut g = ground.to_vec();
        g.sort_unstable();
        if g != p.ground {
            return Err(FhgError::InvalidPartition(
                "coalitions do not cover the ground set exactly".into(),
            ));
        }
        Ok(p)
    }

    pub fn from_lists(lists: Vec<Vec<AgentId>>) -> Result<Self> {
        Partition::new(lists.into_iter().map(Coalition::new).collect::<Result<_>>()?)
    }

    pub fn singletons(agents: &[AgentId]) -> Self {
        Partition::new(agents.iter().map(|&a| Coalition::singleton(a)).collect())
            .expect("distinct agents")
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn ground(&self) -> &[AgentId] {
        &self.ground
    }

    pub fn coalition_of(&self, a: AgentId) -> Option<&Coalition> {
        self.coalitions.iter().find(|c| c.contains(a))
    }

    pub fn max_coalition_size(&self) -> usize {
        self.coalitions.iter().map(Coalition::len).max().unwrap_or(0)
    }

    pub fn is_matching(&self) -> bool {
        self.max_coalition_size() <= 2
    }

    /// The partition restricted to `keep` (members outside are dropped).
    pub fn restrict(&self, keep: &[AgentId]) -> Partition {
        let cs = self
            .coalitions
            .iter()
            .filter_map(|c| {
                let m: Vec<_> = c.members().iter().copied().filter(|a| keep.contains(a)).collect();
                (!m.is_empty()).then_some(Coalition(m))
            })
            .collect();
        Partition::new(cs).expect("restriction of a partition")
    }

    /// Sorted member lists, the canonical encoding used for tie-breaking.
    pub fn encoding(&self) -> Vec<Vec<u32>> {
        self.coalitions.iter().map(|c| c.members().iter().map(|a| a.0).collect()).collect()
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            coalitions: Vec<Coalition>,
        }
        let raw = Raw::deserialize(d)?;
        Partition::new(raw.coalitions).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coalitions).finish()
    }
}

/// A partition whose coalitions have size at most two.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matching(Partition);

impl Matching {
    pub fn new(p: Partition) -> Result<Self> {
        match p.coalitions.iter().map(Coalition::len).find(|&s| s > 2) {
            Some(s) => Err(FhgError::NotAMatching(s)),
            None => Ok(Matching(p)),
        }
    }

    /// Builds a matching from disjoint pairs; agents of `ground` not in a pair stay single.
    pub fn from_pairs(pairs: &[(AgentId, AgentId)], ground: &[AgentId]) -> Result<Self> {
        let mut cs: Vec<Coalition> = pairs.iter().map(|&(a, b)| Coalition::pair(a, b)).collect();
        for &g in ground {
            if !pairs.iter().any(|&(a, b)| a == g || b == g) {
                cs.push(Coalition::singleton(g));
            }
        }
        Ok(Matching(Partition::new(cs)?))
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn into_partition(self) -> Partition {
        self.0
    }

    pub fn pairs(&self) -> Vec<(AgentId, AgentId)> {
        self.0
            .coalitions
            .iter()
            .filter(|c| c.len() == 2)
            .map(|c| (c.0[0], c.0[1]))
            .collect()
    }
}

fn check_agents<G: Valuation + ?Sized>(g: &G, members: &[AgentId]) -> Result<()> {
    let n = g.agent_count();
    match members.iter().find(|a| a.index() >= n) {
        Some(&agent) => Err(FhgError::UnknownAgent { agent, n }),
        None => Ok(()),
    }
}

/// `u_i(C) = Σ_{j ∈ C∖i} v_i(j) / |C|`.
pub fn utility<G: Valuation + ?Sized>(g: &G, i: AgentId, c: &Coalition) -> Result<Rational> {
    check_agents(g, c.members())?;
    if !c.contains(i) {
        return Err(FhgError::AgentNotInCoalition(i));
    }
    if c.len() == 1 {
        return Ok(Rational::zero());
    }
    let s: Rational = c.members().iter().filter(|&&j| j != i).map(|&j| g.value(i, j)).sum();
    Ok(s / Rational::from(c.len()))
}

/// Welfare of agents forming a coalition, without validation.
pub fn members_welfare<G: Valuation + ?Sized>(g: &G, members: &[AgentId]) -> Rational {
    let k = members.len();
    if k < 2 {
        return Rational::zero();
    }
    let mut s = Rational::zero();
    for (x, &i) in members.iter().enumerate() {
        for &j in &members[x + 1..] {
            s += g.value(i, j);
            s += g.value(j, i);
        }
    }
    s / Rational::from(k)
}

/// `SW(C)`: the sum of member utilities.
pub fn coalition_welfare<G: Valuation + ?Sized>(g: &G, c: &Coalition) -> Result<Rational> {
    check_agents(g, c.members())?;
    Ok(members_welfare(g, c.members()))
}

/// `SW(π)`: the sum of coalition welfares.
pub fn partition_welfare<G: Valuation + ?Sized>(g: &G, p: &Partition) -> Result<Rational> {
    check_agents(g, p.ground())?;
    Ok(p.coalitions().iter().map(|c| members_welfare(g, c.members())).sum())
}

/// Sum of pair weights of a matching.
pub fn matching_weight<G: SymmetricWeights + ?Sized>(g: &G, m: &Matching) -> Result<Rational> {
    check_agents(g, m.partition().ground())?;
    Ok(m.pairs().into_iter().map(|(a, b)| g.weight(a, b)).sum())
}

/// Positive edges form a forest and every other pair is strictly below minus the
/// total positive weight. Zero pairs therefore fail unless there are no other pairs.
pub fn is_tree_domain<G: SymmetricWeights + ?Sized>(g: &G) -> bool {
    let n = g.agent_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut total = Rational::zero();
    let mut min_other: Option<Rational> = None;
    for i in 0..n {
        for j in i + 1..n {
            let w = g.weight(AgentId::from(i), AgentId::from(j));
            if w.is_positive() {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri == rj {
                    return false;
                }
                parent[ri] = rj;
                total += &w;
            } else if min_other.as_ref().is_none_or(|m| w > *m) {
                // track the largest non-positive weight, the binding one
                min_other = Some(w);
            }
        }
    }
    match min_other {
        None => true,
        Some(worst) => worst < -total,
    }
}

/// All set partitions of `members`, by restricted growth strings.
pub fn enumerate_partitions(members: &[AgentId]) -> Vec<Partition> {
    let k = members.len();
    let mut out = Vec::new();
    if k == 0 {
        out.push(Partition::new(Vec::new()).unwrap());
        return out;
    }
    let mut rgs = vec![0usize; k];
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut lists = vec![Vec::new(); blocks];
        for (x, &b) in rgs.iter().enumerate() {
            lists[b].push(members[x]);
        }
        out.push(Partition::from_lists(lists).unwrap());
        // next restricted growth string
        let mut pos = k - 1;
        loop {
            if pos == 0 {
                return out;
            }
            let prefix_max = rgs[..pos].iter().copied().max().unwrap();
            if rgs[pos] <= prefix_max {
                rgs[pos] += 1;
                for r in rgs.iter_mut().skip(pos + 1) {
                    *r = 0;
                }
                break;
            }
            pos -= 1;
        }
    }
}

/// All matchings on `members` (every set of disjoint pairs).
pub fn enumerate_matchings(members: &[AgentId]) -> Vec<Matching> {
    fn rec(rest: &[AgentId], pairs: &mut Vec<(AgentId, AgentId)>, all: &[AgentId], out: &mut Vec<Matching>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(Matching::from_pairs(pairs, all).unwrap());
            return;
        };
        rec(tail, pairs, all, out);
        for (x, &u) in tail.iter().enumerate() {
            let mut remaining = tail.to_vec();
            remaining.remove(x);
            pairs.push((first, u));
            rec(&remaining, pairs, all, out);
            pairs.pop();
        }
    }
    let mut out = Vec::new();
    rec(members, &mut Vec::new(), members, &mut out);
    out
}
