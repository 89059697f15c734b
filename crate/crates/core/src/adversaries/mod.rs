//! Instance families and the interactive dissolution adversary.
//!
//! Star and bi-star agents are labelled `a = 0`, `b = 1`, then `d_i` for
//! `i ∈ I` ascending, then `d_j` for `j ∈ J` ascending.

mod dissolution;
mod star_prob;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FhgError, Result};
use crate::game::{AgentId, SymmetricFhg};
use crate::rational::{ratio, Rational};

pub use dissolution::{
    epsilon_surrogate, run_dissolution_adversary, AdversaryBudget, AdversaryBundle, AdversaryGraph, AdversaryNode,
    AdversaryOutcome, AdversaryRun, BoundPoint, PhaseRecord, Surrogate,
};
pub use star_prob::{
    h_r_recursion, max_edge_conversion_check, star_match_probabilities, star_match_probabilities_capped,
    ConversionCheck,
};

/// Star or bi-star.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarKind {
    Star,
    Bistar,
}

impl fmt::Display for StarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StarKind::Star => "star",
            StarKind::Bistar => "bistar",
        })
    }
}

impl FromStr for StarKind {
    type Err = FhgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(StarKind::Star),
            "bistar" => Ok(StarKind::Bistar),
            _ => Err(FhgError::InvalidArgument(format!("unknown instance kind {s:?}"))),
        }
    }
}

/// Parameters `(I, J, x, ε)` of a star or bi-star instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarSpec {
    #[serde(rename = "I")]
    pub i: Vec<u32>,
    #[serde(rename = "J", default)]
    pub j: Vec<u32>,
    pub x: u32,
    pub eps: Rational,
}

/// A spec file: the spec plus its kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarSpecFile {
    pub kind: StarKind,
    #[serde(rename = "I")]
    pub i: Vec<u32>,
    #[serde(rename = "J", default)]
    pub j: Vec<u32>,
    pub x: u32,
    pub eps: Rational,
}

impl StarSpecFile {
    pub fn split(self) -> (StarKind, StarSpec) {
        (self.kind, StarSpec { i: self.i, j: self.j, x: self.x, eps: self.eps })
    }
}

impl StarSpec {
    /// Sorts `I` and `J` and checks every constraint.
    pub fn new(mut i: Vec<u32>, mut j: Vec<u32>, x: u32, eps: Rational) -> Result<Self> {
        i.sort_unstable();
        j.sort_unstable();
        let spec = StarSpec { i, j, x, eps };
        spec.validate()?;
        Ok(spec)
    }

    /// The smallest legal `x`.
    pub fn with_min_x(i: Vec<u32>, j: Vec<u32>, eps: Rational) -> Result<Self> {
        let t = i.iter().chain(&j).copied().max().unwrap_or(0);
        StarSpec::new(i, j, t + 3, eps)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FhgError::InvalidSpec(m));
        if self.i.is_empty() {
            return bad("I must be nonempty".into());
        }
        let all: Vec<u32> = self.i.iter().chain(&self.j).copied().collect();
        if all.contains(&0) {
            return bad("indices must be positive".into());
        }
        if self.i.windows(2).any(|w| w[0] >= w[1]) || self.j.windows(2).any(|w| w[0] >= w[1]) {
            return bad("I and J must be sorted sets".into());
        }
        if self.i.iter().any(|v| self.j.contains(v)) {
            return bad("I and J must be disjoint".into());
        }
        if self.x <= self.t_b() + 2 {
            return bad(format!("x = {} must exceed max(I ∪ J) + 2 = {}", self.x, self.t_b() + 2));
        }
        if !self.eps.is_positive() || self.eps > ratio(1, 2) {
            return bad(format!("eps = {} outside (0, 1/2]", self.eps));
        }
        Ok(())
    }

    pub fn t_s(&self) -> u32 {
        *self.i.last().expect("I nonempty")
    }

    pub fn t_b(&self) -> u32 {
        self.i.iter().chain(&self.j).copied().max().unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        2 + self.i.len() + self.j.len()
    }

    /// `(1/ε)^e`
    pub fn power(&self, e: u32) -> Rational {
        self.eps.recip().pow(e as i32)
    }

    pub fn a(&self) -> AgentId {
        AgentId(0)
    }

    pub fn b(&self) -> AgentId {
        AgentId(1)
    }

    /// Agent `d_i` for `i ∈ I ∪ J`.
    pub fn leaf(&self, idx: u32) -> Option<AgentId> {
        if let Some(p) = self.i.iter().position(|&v| v == idx) {
            return Some(AgentId::from(2 + p));
        }
        self.j.iter().position(|&v| v == idx).map(|p| AgentId::from(2 + self.i.len() + p))
    }

    /// The same spec with `I` and `J` swapped, if `J` is nonempty.
    pub fn mirrored(&self) -> Option<StarSpec> {
        if self.j.is_empty() {
            return None;
        }
        Some(StarSpec { i: self.j.clone(), j: self.i.clone(), x: self.x, eps: self.eps.clone() })
    }

    pub fn to_file(&self, kind: StarKind) -> StarSpecFile {
        StarSpecFile { kind, i: self.i.clone(), j: self.j.clone(), x: self.x, eps: self.eps.clone() }
    }
}

fn star_weights(spec: &StarSpec, bistar: bool) -> Result<SymmetricFhg> {
    spec.validate()?;
    let n = spec.n();
    let neg = -spec.power(spec.x);
    let mut pos = BTreeMap::new();
    for &i in &spec.i {
        pos.insert((0, spec.leaf(i).unwrap().index()), spec.power(i));
    }
    if bistar {
        for &j in &spec.j {
            pos.insert((1, spec.leaf(j).unwrap().index()), spec.power(j));
        }
        pos.insert((0, 1), spec.power(spec.t_b() + 1));
    }
    let g = SymmetricFhg::from_fn(n, |u, v| pos.get(&(u, v)).cloned().unwrap_or_else(|| neg.clone()));
    Ok(g)
}

/// The star instance: `w(a, d_i) = (1/ε)^i` for `i ∈ I`, every other pair `−(1/ε)^x`.
pub fn gen_star(spec: &StarSpec) -> Result<SymmetricFhg> {
    star_weights(spec, false)
}

/// The bi-star instance: the star on `I` around `a`, a star on `J` around `b`,
/// and `w(a, b) = (1/ε)^{t_B+1}`.
pub fn gen_bistar(spec: &StarSpec) -> Result<SymmetricFhg> {
    star_weights(spec, true)
}

pub fn gen_instance(kind: StarKind, spec: &StarSpec) -> Result<SymmetricFhg> {
    match kind {
        StarKind::Star => gen_star(spec),
        StarKind::Bistar => gen_bistar(spec),
    }
}

/// Weights drawn as `p/d` with `d` uniform in `1..=max_den` and `p/d` uniform
/// over the grid points in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightRange {
    pub lo: Rational,
    pub hi: Rational,
    pub max_den: u32,
}

impl WeightRange {
    pub fn new(lo: Rational, hi: Rational, max_den: u32) -> Result<Self> {
        if lo > hi || max_den == 0 {
            return Err(FhgError::InvalidArgument(format!("empty weight range [{lo}, {hi}] / {max_den}")));
        }
        Ok(WeightRange { lo, hi, max_den })
    }

    /// Parses `lo:hi` or `lo:hi:max_den`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || FhgError::InvalidArgument(format!("bad weight range {text:?}, expected lo:hi[:den]"));
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad());
        }
        let lo: Rational = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: Rational = parts[1].trim().parse().map_err(|_| bad())?;
        let den = match parts.get(2) {
            Some(d) => d.trim().parse().map_err(|_| bad())?,
            None => 1,
        };
        WeightRange::new(lo, hi, den)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Rational {
        loop {
            let d = rng.gen_range(1..=self.max_den as i64);
            let dd = Rational::from(d);
            let lo = i64::try_from((&self.lo * &dd).ceil()).expect("range fits i64");
            let hi = i64::try_from((&self.hi * &dd).floor()).expect("range fits i64");
            if lo <= hi {
                return Rational::new(rng.gen_range(lo..=hi), d);
            }
        }
    }
}

impl Default for WeightRange {
    fn default() -> Self {
        WeightRange { lo: Rational::from(-10), hi: Rational::from(10), max_den: 4 }
    }
}

/// A random symmetric instance with every pair drawn from `range`.
pub fn gen_random(n: usize, seed: u64, range: &WeightRange) -> SymmetricFhg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymmetricFhg::from_fn(n, |_, _| range.sample(&mut rng))
}

/// A random tree-domain instance. The positive edges are a uniform random
/// rooted forest (a uniform labelled tree on `n + 1` vertices, Prüfer decoded,
/// with the extra vertex removed), weighted from `range`, which must be
/// positive. Every other pair gets `−(1 + total positive weight)`.
pub fn gen_random_tree_domain(n: usize, seed: u64, range: &WeightRange) -> Result<SymmetricFhg> {
    if !range.lo.is_positive() {
        return Err(FhgError::InvalidArgument("tree-domain weights must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    if n >= 2 {
        // vertices 0..n are agents, n is the virtual root
        let m = n + 1;
        let prufer: Vec<usize> = (0..m - 2).map(|_| rng.gen_range(0..m)).collect();
        for (u, v) in prufer_decode(&prufer, m) {
            if u != n && v != n {
                edges.push((u.min(v), u.max(v), range.sample(&mut rng)));
            }
        }
    }
    let total: Rational = edges.iter().map(|e| e.2.clone()).sum();
    let fill = -(Rational::one() + total);
    let pos: BTreeMap<(usize, usize), Rational> = edges.into_iter().map(|(u, v, w)| ((u, v), w)).collect();
    Ok(SymmetricFhg::from_fn(n, |u, v| pos.get(&(u, v)).cloned().unwrap_or_else(|| fill.clone())))
}

fn prufer_decode(seq: &[usize], m: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; m];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..m).filter(|&v| degree[v] == 1).map(std::cmp::Reverse).collect();
    for &v in seq {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("a leaf exists");
        edges.push((leaf, v));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.push(std::cmp::Reverse(v));
        }
    }
    let std::cmp::Reverse(u) = leaves.pop().expect("two vertices remain");
    let std::cmp::Reverse(v) = leaves.pop().expect("two vertices remain");
    edges.push((u, v));
    edges
}

/// Shuffled copy of `0..n`, handy for relabelling generated instances.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rng);
    p
}

/// Sorted multiset of revealed weights among `agents`.
fn weight_multiset(g: &SymmetricFhg, agents: &[usize]) -> Vec<Rational> {
    let mut out = Vec::new();
    for (x, &u) in agents.iter().enumerate() {
        for &v in &agents[x + 1..] {
            out.push(g.w(u, v));
        }
    }
    out.sort();
    out
}

/// Result of comparing bi-star prefixes with star prefixes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PrefixReport {
    /// prefixes lacking `a` or `b` that were compared
    pub checked: usize,
    /// prefixes whose multisets differ, as agent lists
    pub mismatches: Vec<Vec<u32>>,
}

/// Every arrival prefix (as a set) of the bi-star that lacks `b` is compared
/// with the same agents in the star on `(I, J)`; every prefix that lacks `a`
/// is compared with the mirrored star on `(J, I)`, where `b` plays the
/// centre. The revealed weight multisets must agree.
pub fn prefix_indistinguishability(spec: &StarSpec) -> Result<PrefixReport> {
    let n = spec.n();
    if n > 20 {
        return Err(FhgError::InstanceTooLarge { what: "prefix enumeration", n, cap: 20 });
    }
    let bistar = gen_bistar(spec)?;
    let star = gen_star(spec)?;
    // in the mirrored star, agent k corresponds to bi-star agent mirror_of[k]
    let mirror = match spec.mirrored() {
        Some(m) => {
            let g = gen_star(&m)?;
            let mut to_bistar = vec![0usize; n];
            to_bistar[0] = 1;
            to_bistar[1] = 0;
            for &v in m.i.iter().chain(&m.j) {
                to_bistar[m.leaf(v).unwrap().index()] = spec.leaf(v).unwrap().index();
            }
            let mut from_bistar = vec![0usize; n];
            for (k, &b) in to_bistar.iter().enumerate() {
                from_bistar[b] = k;
            }
            Some((g, from_bistar))
        }
        None => None,
    };
    let mut report = PrefixReport::default();
    for mask in 0u32..(1 << n) {
        let has_a = mask & 1 != 0;
        let has_b = mask & 2 != 0;
        if has_a && has_b {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let ours = weight_multiset(&bistar, &members);
        let theirs = if !has_b {
            weight_multiset(&star, &members)
        } else {
            match &mirror {
                Some((g, from)) => weight_multiset(g, &members.iter().map(|&v| from[v]).collect::<Vec<_>>()),
                // J empty: b has no positive edge and looks like any star agent
                None => weight_multiset(&star, &members),
            }
        };
        report.checked += 1;
        if ours != theirs {
            report.mismatches.push(members.iter().map(|&v| v as u32).collect());
        }
    }
    Ok(report)
}
