//! Audited event logs and their replay check.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Mode, OnlineDecision, PartitionState, Placement};
use crate::error::{FhgError, Result};
use crate::game::{AgentId, Partition, SymmetricWeights};
use crate::rational::Rational;

/// What happened at one arrival.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    /// members of the dissolved coalition
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissolved: Option<Vec<AgentId>>,
    /// a member of the joined coalition; absent for a new singleton
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join: Option<AgentId>,
    /// the newcomer's coalition after placement, sorted
    pub coalition: Vec<AgentId>,
}

/// One trace line: `{"t": k, "agent": id, "decision": {...}, "welfare": "p/q"}`
/// plus optional revealed weights and the partition snapshot after the arrival.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: usize,
    pub agent: AgentId,
    pub decision: DecisionRecord,
    pub welfare: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revealed: Option<Vec<(AgentId, Rational)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Vec<Vec<u32>>>,
}

pub fn write_trace_jsonl<W: Write>(mut out: W, events: &[TraceEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl<R: BufRead>(input: R) -> Result<Vec<TraceEvent>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

fn partition_of(lists: &[Vec<u32>]) -> Result<Partition> {
    Partition::from_lists(lists.iter().map(|c| c.iter().map(|&a| AgentId(a)).collect()).collect())
}

/// Checks one step of the online rules: `next` restricted to the agents of
/// `prev` must equal `prev` (strict) or `prev` with at most one coalition
/// broken into singletons (free dissolution).
pub fn check_transition(prev: &Partition, next: &Partition, mode: Mode, t: usize) -> Result<()> {
    let restricted = next.restrict(prev.ground());
    if restricted.ground() != prev.ground() {
        return Err(FhgError::IrrevocabilityViolation { t, reason: "an arrived agent disappeared".into() });
    }
    if &restricted == prev {
        return Ok(());
    }
    let mut broken = 0;
    for c in prev.coalitions() {
        let kept = restricted.coalitions().iter().any(|d| d == c);
        if kept {
            continue;
        }
        let all_single = c
            .members()
            .iter()
            .all(|&a| restricted.coalition_of(a).is_some_and(|d| d.len() == 1));
        if !all_single {
            return Err(FhgError::IrrevocabilityViolation {
                t,
                reason: format!("coalition {:?} was changed other than by dissolution", c),
            });
        }
        broken += 1;
    }
    match (mode, broken) {
        (_, 0) => Err(FhgError::IrrevocabilityViolation { t, reason: "earlier coalitions were merged".into() }),
        (Mode::Strict, _) => Err(FhgError::DissolutionInStrictMode(t)),
        (Mode::Dissolution, 1) => Ok(()),
        (Mode::Dissolution, _) => Err(FhgError::MultipleDissolutions(t)),
    }
}

/// Replays a trace against the instance and checks every recorded fact:
/// arrival indices, one dissolution at most per arrival (none in strict mode),
/// placements, welfare values and snapshots. Returns the final partition.
pub fn verify_trace<G: SymmetricWeights + ?Sized>(g: &G, mode: Mode, events: &[TraceEvent]) -> Result<Partition> {
    let mut state = PartitionState::new();
    let mut prev_snapshot: Option<Partition> = None;
    for (k, e) in events.iter().enumerate() {
        let t = k + 1;
        if e.t != t {
            return Err(FhgError::IrrevocabilityViolation { t, reason: format!("event numbered {}", e.t) });
        }
        let dissolve = match &e.decision.dissolved {
            None => None,
            Some(members) => {
                let first = *members.first().ok_or_else(|| FhgError::IrrevocabilityViolation {
                    t,
                    reason: "empty dissolution".into(),
                })?;
                let mut current = state.coalition_of(first).to_vec();
                current.sort_unstable();
                let mut named = members.clone();
                named.sort_unstable();
                if current != named {
                    let spans_several = named.iter().any(|a| !current.contains(a));
                    return Err(if spans_several && mode == Mode::Dissolution {
                        FhgError::MultipleDissolutions(t)
                    } else {
                        FhgError::IrrevocabilityViolation { t, reason: "dissolved set is not a coalition".into() }
                    });
                }
                Some(first)
            }
        };
        let decision = OnlineDecision {
            dissolve,
            placement: e.decision.join.map_or(Placement::NewSingleton, Placement::Join),
        };
        state.apply(g, mode, t, e.agent, &decision)?;
        let mut coalition = state.coalition_of(e.agent).to_vec();
        coalition.sort_unstable();
        if coalition != e.decision.coalition {
            return Err(FhgError::IrrevocabilityViolation { t, reason: "recorded coalition differs from replay".into() });
        }
        if state.welfare() != &e.welfare {
            return Err(FhgError::IrrevocabilityViolation {
                t,
                reason: format!("recorded welfare {} but replay gives {}", e.welfare, state.welfare()),
            });
        }
        if let Some(snap) = &e.snapshot {
            let p = partition_of(snap)?;
            if p != state.to_partition() {
                return Err(FhgError::IrrevocabilityViolation { t, reason: "snapshot differs from replay".into() });
            }
            if let Some(prev) = &prev_snapshot {
                check_transition(prev, &p, mode, t)?;
            }
            prev_snapshot = Some(p);
        }
    }
    Ok(state.to_partition())
}
