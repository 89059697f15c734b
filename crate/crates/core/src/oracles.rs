//! Exact offline baselines.

use std::cmp::Ordering;
use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::{FhgError, Result};
use crate::game::{agents, AgentId, Coalition, Matching, Partition, SymmetricWeights};
use crate::rational::Rational;

/// Welfare-maximizing partition of all agents, with the default cap.
pub fn optimal_partition<G: SymmetricWeights + ?Sized>(g: &G) -> Result<(Partition, Rational)> {
    optimal_partition_capped(g, Caps::default().partition)
}

pub fn optimal_partition_capped<G: SymmetricWeights + ?Sized>(
    g: &G,
    cap: usize,
) -> Result<(Partition, Rational)> {
    let n = g.agent_count();
    if n > cap {
        return Err(FhgError::InstanceTooLarge { what: "optimal partition", n, cap });
    }
    Ok(optimal_partition_of(g, &agents(n)))
}

/// Lexicographic comparison of two bitmasks read as ascending member lists.
fn lex_cmp(mut a: u32, mut b: u32) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
        if x != y {
            return x.cmp(&y);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

/// Optimal partition of `members` (any subset of agents). Among optimal
/// partitions the one with the lexicographically smallest encoding wins,
/// where the encoding lists coalitions by smallest member, each sorted.
pub fn optimal_partition_of<G: SymmetricWeights + ?Sized>(
    g: &G,
    members: &[AgentId],
) -> (Partition, Rational) {
    let mut members = members.to_vec();
    members.sort_unstable();
    let k = members.len();
    assert!(k < 32, "subset DP needs fewer than 32 agents");
    let full: u32 = if k == 0 { 0 } else { (1u32 << k) - 1 };
    let size = 1usize << k;

    // pair sums, then coalition welfare 2·pairsum/|T|
    let mut w = vec![vec![Rational::zero(); k]; k];
    for x in 0..k {
        for y in x + 1..k {
            let v = g.weight(members[x], members[y]);
            w[x][y] = v.clone();
            w[y][x] = v;
        }
    }
    let mut sw = vec![Rational::zero(); size];
    let mut ps = vec![Rational::zero(); size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut s = ps[rest].clone();
        let mut bits = rest;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            s += &w[low][u];
            bits &= bits - 1;
        }
        let cnt = mask.count_ones() as i64;
        if cnt >= 2 {
            sw[mask] = &s * &Rational::new(2, cnt);
        }
        ps[mask] = s;
    }

    let mut best = vec![Rational::zero(); size];
    let mut choice = vec![0u32; size];
    for s in 1..size as u32 {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut sub = rest;
        let mut have = false;
        loop {
            let t = sub | low;
            let val = &sw[t as usize] + &best[(s ^ t) as usize];
            let better = !have
                || match val.cmp(&best[s as usize]) {
                    Ordering::Greater => true,
                    Ordering::Equal => lex_cmp(t, choice[s as usize]) == Ordering::Less,
                    Ordering::Less => false,
                };
            if better {
                best[s as usize] = val;
                choice[s as usize] = t;
                have = true;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }

    let mut coalitions = Vec::new();
    let mut s = full;
    while s != 0 {
        let t = choice[s as usize];
        let mut list = Vec::new();
        let mut bits = t;
        while bits != 0 {
            list.push(members[bits.trailing_zeros() as usize]);
            bits &= bits - 1;
        }
        coalitions.push(Coalition::new(list).expect("nonempty"));
        s ^= t;
    }
    let value = best[full as usize].clone();
    (Partition::new(coalitions).expect("disjoint by construction"), value)
}

trait DpNum: Clone + Ord + Zero + for<'a> Add<&'a Self, Output = Self> {}
impl DpNum for i128 {}
impl DpNum for Rational {}

/// Subset DP: `f[mask]` is the best matching weight inside `mask`.
/// `w[x][y]` is `None` for non-positive pairs.
fn matching_dp<T: DpNum>(w: &[Vec<Option<T>>]) -> (Vec<(usize, usize)>, T) {
    let k = w.len();
    let size = 1usize << k;
    let mut f: Vec<T> = vec![T::zero(); size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut best = f[rest].clone();
        let mut bits = rest;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            if let Some(wu) = &w[low][u] {
                let cand = f[rest & !(1 << u)].clone() + wu;
                if cand > best {
                    best = cand;
                }
            }
            bits &= bits - 1;
        }
        f[mask] = best;
    }
    // reconstruct: lowest listed agent first, pairing with the earliest
    // partner that stays optimal, otherwise single
    let mut pairs = Vec::new();
    let mut mask = size - 1;
    while mask != 0 {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut bits = rest;
        let mut paired = None;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            if let Some(wu) = &w[low][u] {
                if f[rest & !(1 << u)].clone() + wu == f[mask] {
                    paired = Some(u);
                    break;
                }
            }
            bits &= bits - 1;
        }
        match paired {
            Some(u) => {
                pairs.push((low, u));
                mask = rest & !(1 << u);
            }
            None => mask = rest,
        }
    }
    (pairs, f[size - 1].clone())
}

/// Integer scaling of the positive weights when the common denominator is small.
fn scaled_weights(w: &[Vec<Option<Rational>>]) -> Option<Vec<Vec<Option<i128>>>> {
    let mut lcm: i128 = 1;
    for row in w {
        for v in row.iter().flatten() {
            let (_, d) = v.as_small()?;
            let d = d as i128;
            let g = num_integer::gcd(lcm, d);
            lcm = (lcm / g).checked_mul(d)?;
            if lcm > 1 << 40 {
                return None;
            }
        }
    }
    let limit = i128::MAX / 64;
    let mut out = vec![vec![None; w.len()]; w.len()];
    for (x, row) in w.iter().enumerate() {
        for (y, v) in row.iter().enumerate() {
            if let Some(v) = v {
                let (n, d) = v.as_small()?;
                let s = (n as i128).checked_mul(lcm / d as i128)?;
                if s > limit {
                    return None;
                }
                out[x][y] = Some(s);
            }
        }
    }
    Some(out)
}

/// Maximum weight matching restricted to `members`. Ties go to the matching
/// found by scanning `members` in the given order and pairing each agent with
/// its earliest optimal partner. Only strictly positive pairs are ever matched.
pub fn max_weight_matching_on<G: SymmetricWeights + ?Sized>(
    g: &G,
    members: &[AgentId],
    cap: usize,
) -> Result<(Vec<(AgentId, AgentId)>, Rational)> {
    let k = members.len();
    if k > cap {
        return Err(FhgError::InstanceTooLarge { what: "maximum weight matching", n: k, cap });
    }
    let mut w: Vec<Vec<Option<Rational>>> = vec![vec![None; k]; k];
    for x in 0..k {
        for y in x + 1..k {
            let v = g.weight(members[x], members[y]);
            if v.is_positive() {
                w[x][y] = Some(v.clone());
                w[y][x] = Some(v);
            }
        }
    }
    let (pairs, weight) = match scaled_weights(&w) {
        Some(ws) => {
            let (pairs, _) = matching_dp(&ws);
            let weight = pairs.iter().map(|&(x, y)| w[x][y].clone().unwrap()).sum();
            (pairs, weight)
        }
        None => matching_dp(&w),
    };
    Ok((pairs.into_iter().map(|(x, y)| (members[x], members[y])).collect(), weight))
}

/// Maximum weight matching of the whole instance, with the default cap.
pub fn max_weight_matching<G: SymmetricWeights + ?Sized>(g: &G) -> Result<(Matching, Rational)> {
    max_weight_matching_capped(g, Caps::default().mwm)
}

pub fn max_weight_matching_capped<G: SymmetricWeights + ?Sized>(
    g: &G,
    cap: usize,
) -> Result<(Matching, Rational)> {
    let all = agents(g.agent_count());
    let (pairs, weight) = max_weight_matching_on(g, &all, cap)?;
    Ok((Matching::from_pairs(&pairs, &all)?, weight))
}

/// Maximum weight matching when the positive edges form a forest. Linear time,
/// suitable for the large adversary instances.
pub fn forest_max_weight_matching<G: SymmetricWeights + ?Sized>(g: &G) -> Result<Rational> {
    let n = g.agent_count();
    let mut visited = vec![false; n];
    let mut parent: Vec<Option<(usize, Rational)>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut adj: Vec<Vec<(AgentId, Rational)>> = Vec::with_capacity(n);
    for i in 0..n {
        adj.push(g.positive_neighbors(AgentId::from(i)));
    }
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for (u, w) in &adj[v] {
                let u = u.index();
                if parent[v].as_ref().is_some_and(|(p, _)| *p == u) {
                    continue;
                }
                if visited[u] {
                    return Err(FhgError::InvalidInstance("positive edges contain a cycle".into()));
                }
                visited[u] = true;
                parent[u] = Some((v, w.clone()));
                stack.push(u);
            }
        }
    }
    // free[v]: best in subtree with v unmatched; best[v]: best in subtree
    let mut free = vec![Rational::zero(); n];
    let mut best = vec![Rational::zero(); n];
    let mut gain = vec![Rational::zero(); n];
    for &v in order.iter().rev() {
        best[v] = &free[v] + &gain[v];
        if let Some((p, w)) = &parent[v] {
            let p = *p;
            free[p] += &best[v];
            // matching v to p replaces best[v] by free[v] + w
            let delta = &(&free[v] + w) - &best[v];
            if delta > gain[p] {
                gain[p] = delta;
            }
        }
    }
    Ok((0..n).filter(|&v| parent[v].is_none()).map(|v| best[v].clone()).sum())
}

/// The average-edge bound on a coalition: returns
/// `(Σ_{pairs in C} w / |C|, MWM weight of G[C], lhs <= rhs)`.
pub fn avg_edge_bound_holds<G: SymmetricWeights + ?Sized>(
    g: &G,
    c: &Coalition,
) -> Result<(Rational, Rational, bool)> {
    let m = c.members();
    let n = g.agent_count();
    if let Some(&agent) = m.iter().find(|a| a.index() >= n) {
        return Err(FhgError::UnknownAgent { agent, n });
    }
    let mut s = Rational::zero();
    for (x, &i) in m.iter().enumerate() {
        for &j in &m[x + 1..] {
            s += g.weight(i, j);
        }
    }
    let lhs = s / Rational::from(m.len());
    let (_, rhs) = max_weight_matching_on(g, m, Caps::default().mwm)?;
    let ok = lhs <= rhs;
    Ok((lhs, rhs, ok))
}

/// Welfare of a star with `leaves` leaves at weight `x` and zero leaf pairs:
/// `2·leaves/(leaves+1)·x`.
pub fn star_welfare(leaves: u64, x: &Rational) -> Rational {
    assert!(leaves >= 1, "a star needs a leaf");
    &Rational::from(2 * leaves) / &Rational::from(leaves + 1) * x
}

/// Outcome of the greedy sequence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// index of the first term forced negative
    Finite(usize),
    Unbounded,
}

/// Builds the pointwise maximal sequence `x_1 = 1`,
/// `x_{i+1} = (x_i/β − Σ_{j≤i} x_j)/2` and reports the first index whose
/// term is negative, or `Unbounded` if all of `x_1..x_maxSteps` are nonnegative.
pub fn vara_sequence_horizon(beta: &Rational, max_steps: usize) -> Result<Horizon> {
    if !beta.is_positive() {
        return Err(FhgError::InvalidBeta(beta.to_string()));
    }
    // with β = p/q and x_i = X_i/(2p)^{i-1}, S_i = T_i/(2p)^{i-1}:
    //   X_{i+1} = q X_i − p T_i,  T_{i+1} = 2p T_i + X_{i+1}
    let p = beta.numer();
    let q = beta.denom();
    let two_p: BigInt = &p * 2;
    let mut x = BigInt::from(1);
    let mut t = BigInt::from(1);
    for idx in 2..=max_steps {
        let next = &q * &x - &p * &t;
        if next.is_negative() {
            return Ok(Horizon::Finite(idx));
        }
        t = &two_p * &t + &next;
        x = next;
    }
    Ok(Horizon::Unbounded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{
        coalition_welfare, enumerate_matchings, enumerate_partitions, matching_weight,
        partition_welfare, SymmetricFhg,
    };
    use crate::rational::ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> SymmetricFhg {
        SymmetricFhg::from_fn(n, |_, _| {
            let d = rng.gen_range(1..=3);
            ratio(rng.gen_range(-6 * d..=6 * d), d)
        })
    }

    #[test]
    fn path_optimum_is_the_star() {
        let g = SymmetricFhg::from_weights(3, [(0, 1, r(3)), (0, 2, r(3))]).unwrap();
        let (p, v) = optimal_partition(&g).unwrap();
        assert_eq!(v, r(4));
        assert_eq!(p.encoding(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn trivial_optima() {
        let neg = SymmetricFhg::from_fn(4, |_, _| r(-1));
        let (p, v) = optimal_partition(&neg).unwrap();
        assert_eq!(v, r(0));
        assert_eq!(p.max_coalition_size(), 1);
        let pair = SymmetricFhg::from_weights(2, [(0, 1, r(5))]).unwrap();
        assert_eq!(optimal_partition(&pair).unwrap().0.encoding(), vec![vec![0, 1]]);
        let empty = SymmetricFhg::empty(0);
        assert_eq!(optimal_partition(&empty).unwrap().1, r(0));
        assert!(matches!(
            optimal_partition(&SymmetricFhg::empty(13)),
            Err(FhgError::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn ties_prefer_smallest_encoding() {
        // all zero: every partition has welfare 0; [[0],[1],[2]] is lexicographically smallest
        let g = SymmetricFhg::empty(3);
        assert_eq!(optimal_partition(&g).unwrap().0.encoding(), vec![vec![0], vec![1], vec![2]]);
        // {0,1} and {0,2} tie at 3; [0,1] < [0,2]
        let h = SymmetricFhg::from_weights(3, [(0, 1, r(3)), (0, 2, r(3)), (1, 2, r(-9))]).unwrap();
        assert_eq!(optimal_partition(&h).unwrap().0.encoding(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn mwm_examples() {
        let tri = SymmetricFhg::from_weights(3, [(0, 1, r(3)), (0, 2, r(3))]).unwrap();
        let (m, v) = max_weight_matching(&tri).unwrap();
        assert_eq!(v, r(3));
        assert_eq!(m.pairs(), vec![(AgentId(0), AgentId(1))]);
        let neg = SymmetricFhg::from_fn(5, |_, _| r(-2));
        let (m, v) = max_weight_matching(&neg).unwrap();
        assert_eq!(v, r(0));
        assert!(m.pairs().is_empty());
    }

    #[test]
    fn oracles_dominate_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 0..=7 {
            let g = random_instance(&mut rng, n);
            let (p, v) = optimal_partition(&g).unwrap();
            assert_eq!(partition_welfare(&g, &p).unwrap(), v);
            let all = enumerate_partitions(&agents(n));
            let brute = all.iter().map(|q| partition_welfare(&g, q).unwrap()).max().unwrap();
            assert_eq!(brute, v);
            let first = all
                .iter()
                .filter(|q| partition_welfare(&g, q).unwrap() == v)
                .map(|q| q.encoding())
                .min()
                .unwrap();
            assert_eq!(first, p.encoding());

            let (m, mv) = max_weight_matching(&g).unwrap();
            assert_eq!(matching_weight(&g, &m).unwrap(), mv);
            let brute_m = enumerate_matchings(&agents(n))
                .iter()
                .map(|q| matching_weight(&g, q).unwrap())
                .max()
                .unwrap();
            assert_eq!(brute_m, mv);
        }
    }

    #[test]
    fn rational_fallback_agrees() {
        let big = &ratio(1, 3) + &Rational::new(1, 1 << 50);
        let g = SymmetricFhg::from_weights(
            4,
            [(0, 1, big.clone()), (1, 2, ratio(1, 3)), (2, 3, big.clone()), (0, 3, r(-1))],
        )
        .unwrap();
        let (_, v) = max_weight_matching(&g).unwrap();
        assert_eq!(v, &big + &big);
    }

    #[test]
    fn forest_matching_matches_dp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(1..=10);
            // random forest with positive weights, negatives elsewhere
            let mut edges = Vec::new();
            for v in 1..n {
                if rng.gen_bool(0.8) {
                    edges.push((rng.gen_range(0..v), v, ratio(rng.gen_range(1..20), rng.gen_range(1..4))));
                }
            }
            let g = SymmetricFhg::from_fn(n, |i, j| {
                edges
                    .iter()
                    .find(|e| (e.0, e.1) == (i, j))
                    .map(|e| e.2.clone())
                    .unwrap_or(r(-100))
            });
            assert_eq!(forest_max_weight_matching(&g).unwrap(), max_weight_matching(&g).unwrap().1);
        }
        let cyc = SymmetricFhg::from_fn(3, |_, _| r(1));
        assert!(forest_max_weight_matching(&cyc).is_err());
    }

    #[test]
    fn avg_edge_examples() {
        let g = SymmetricFhg::from_weights(3, [(0, 1, r(3)), (0, 2, r(3))]).unwrap();
        let all = Coalition::new(agents(3)).unwrap();
        assert_eq!(avg_edge_bound_holds(&g, &all).unwrap(), (r(2), r(3), true));
        let single = Coalition::singleton(AgentId(1));
        assert_eq!(avg_edge_bound_holds(&g, &single).unwrap(), (r(0), r(0), true));
        let pair = SymmetricFhg::from_weights(2, [(0, 1, r(5))]).unwrap();
        let c = Coalition::new(agents(2)).unwrap();
        assert_eq!(avg_edge_bound_holds(&pair, &c).unwrap(), (ratio(5, 2), r(5), true));
    }

    #[test]
    fn star_welfare_examples() {
        assert_eq!(star_welfare(1, &r(5)), r(5));
        assert_eq!(star_welfare(2, &r(3)), r(4));
        assert_eq!(star_welfare(6, &r(1)), ratio(12, 7));
        // against a built star
        for leaves in 1..=8usize {
            let x = ratio(7, 3);
            let g = SymmetricFhg::from_fn(leaves + 1, |i, _| if i == 0 { x.clone() } else { r(0) });
            let c = Coalition::new(agents(leaves + 1)).unwrap();
            assert_eq!(coalition_welfare(&g, &c).unwrap(), star_welfare(leaves as u64, &x));
        }
    }

    #[test]
    fn vara_examples() {
        assert_eq!(vara_sequence_horizon(&ratio(1, 2), 100).unwrap(), Horizon::Finite(3));
        assert!(matches!(vara_sequence_horizon(&ratio(18, 100), 10_000).unwrap(), Horizon::Finite(_)));
        assert_eq!(vara_sequence_horizon(&ratio(17, 100), 10_000).unwrap(), Horizon::Unbounded);
        assert_eq!(vara_sequence_horizon(&ratio(1, 2), 2).unwrap(), Horizon::Unbounded);
        assert!(matches!(vara_sequence_horizon(&r(0), 10), Err(FhgError::InvalidBeta(_))));
    }

    #[test]
    fn vara_agrees_with_direct_recurrence() {
        for beta in [ratio(1, 2), ratio(1, 4), ratio(1, 5), ratio(2, 9), r(3)] {
            let mut xs = vec![r(1)];
            let mut sum = r(1);
            let mut expect = Horizon::Unbounded;
            for idx in 2..=60 {
                let next = (&(xs.last().unwrap() / &beta) - &sum) * ratio(1, 2);
                if next.is_negative() {
                    expect = Horizon::Finite(idx);
                    break;
                }
                sum += &next;
                xs.push(next);
            }
            assert_eq!(vara_sequence_horizon(&beta, 60).unwrap(), expect, "beta {beta}");
        }
    }
}
