//! Influential sets by toggling click bits of one round and replaying the
//! rounds after it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{AuctionError, Result};
use crate::mechanisms::{check_realization, Mechanism};
use crate::model::{AllocationRound, ObservedClick, Realization};
use crate::scalar::Scalar;

/// Agent-slot pair `(agent, slot)`.
pub type Pair = (usize, usize);

/// Default bound on `|I(t)|` for the joint enumeration.
pub const DEFAULT_INFLUENCE_CAP: usize = 12;

/// Toggling the click of `pair` in `round`, alone and at the factual
/// realization, changes the allocation of `influenced` first in `earliest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrongInfluence {
    pub pair: Pair,
    pub round: usize,
    pub influenced: usize,
    pub earliest: usize,
}

/// Influence structure of one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundInfluence {
    pub round: usize,
    /// Allocated pairs whose bit, toggled alone, changes some later allocation.
    pub influential: BTreeSet<Pair>,
    /// Per agent `i`, pairs of `influential` whose toggle changes agent `i`'s later
    /// allocation under some setting of the other influential bits.
    pub per_agent: Vec<BTreeSet<Pair>>,
    pub strong: Vec<StrongInfluence>,
}

impl RoundInfluence {
    fn empty(round: usize, agents: usize) -> Self {
        Self {
            round,
            influential: BTreeSet::new(),
            per_agent: vec![BTreeSet::new(); agents],
            strong: Vec::new(),
        }
    }

    /// Strong influences on `agent`.
    pub fn strong_on(&self, agent: usize) -> impl Iterator<Item = &StrongInfluence> + '_ {
        self.strong.iter().filter(move |s| s.influenced == agent)
    }
}

/// Influence structure of every round of one game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceReport {
    pub allocations: Vec<AllocationRound>,
    pub rounds: Vec<RoundInfluence>,
}

impl InfluenceReport {
    pub fn i_influential(&self, agent: usize, t: usize) -> &BTreeSet<Pair> {
        &self.rounds[t].per_agent[agent]
    }

    /// All strong influences on `agent` across rounds.
    pub fn strong_on(&self, agent: usize) -> impl Iterator<Item = &StrongInfluence> + '_ {
        self.rounds.iter().flat_map(move |r| r.strong_on(agent))
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.iter().all(|r| r.influential.is_empty())
    }
}

/// Factual replay that keeps the state in front of every round.
pub(crate) struct Factual<St> {
    pub allocations: Vec<AllocationRound>,
    pub states: Vec<St>,
}

pub(crate) fn factual<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &[S], rho: &Realization) -> Result<Factual<M::State>> {
    let dims = mechanism.dims();
    dims.check_bids(bids)?;
    check_realization(dims, rho)?;
    let mut state = mechanism.init();
    let mut states = Vec::with_capacity(dims.horizon);
    let mut allocations = Vec::with_capacity(dims.horizon);
    for t in 0..dims.horizon {
        states.push(state.clone());
        let round = mechanism.allocate(&state, bids, t)?;
        mechanism.observe(&mut state, t, &round, &observed(&round, t, |a, s| rho.get(t, a, s)));
        allocations.push(round);
    }
    Ok(Factual { allocations, states })
}

fn observed(round: &AllocationRound, t: usize, bit: impl Fn(usize, usize) -> bool) -> Vec<ObservedClick> {
    round
        .pairs()
        .map(|(agent, slot)| ObservedClick {
            round: t,
            agent,
            slot,
            clicked: bit(agent, slot),
        })
        .collect()
}

/// Allocations of rounds `t+1..T` when round `t` reveals `bit` instead of `rho(t)`.
fn replay_after<S, M>(
    mechanism: &M,
    bids: &[S],
    rho: &Realization,
    before: &M::State,
    round: &AllocationRound,
    t: usize,
    bit: impl Fn(usize, usize) -> bool,
) -> Result<Vec<AllocationRound>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let horizon = mechanism.dims().horizon;
    let mut state = before.clone();
    mechanism.observe(&mut state, t, round, &observed(round, t, bit));
    let mut future = Vec::with_capacity(horizon - t - 1);
    for s in t + 1..horizon {
        let next = mechanism.allocate(&state, bids, s)?;
        mechanism.observe(&mut state, s, &next, &observed(&next, s, |a, j| rho.get(s, a, j)));
        future.push(next);
    }
    Ok(future)
}

/// Earliest round after `t` in which each agent's slot differs between two futures.
fn first_changes(t: usize, a: &[AllocationRound], b: &[AllocationRound], agents: usize) -> BTreeMap<usize, usize> {
    let mut changed = BTreeMap::new();
    for (offset, (x, y)) in a.iter().zip(b).enumerate() {
        for agent in 0..agents {
            if x.slot(agent) != y.slot(agent) {
                changed.entry(agent).or_insert(t + 1 + offset);
            }
        }
    }
    changed
}

fn agent_changes(a: &[AllocationRound], b: &[AllocationRound], agent: usize) -> bool {
    a.iter().zip(b).any(|(x, y)| x.slot(agent) != y.slot(agent))
}

pub(crate) fn round_influence<S, M>(
    mechanism: &M,
    bids: &[S],
    rho: &Realization,
    fact: &Factual<M::State>,
    t: usize,
    cap: Option<usize>,
) -> Result<RoundInfluence>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let dims = mechanism.dims();
    let mut out = RoundInfluence::empty(t, dims.agents);
    if t + 1 >= dims.horizon {
        return Ok(out);
    }
    let round = &fact.allocations[t];
    let before = &fact.states[t];
    let baseline = &fact.allocations[t + 1..];

    for (agent, slot) in round.pairs() {
        let future = replay_after(mechanism, bids, rho, before, round, t, |a, j| {
            rho.get(t, a, j) ^ (a == agent && j == slot)
        })?;
        let changed = first_changes(t, baseline, &future, dims.agents);
        if changed.is_empty() {
            continue;
        }
        out.influential.insert((agent, slot));
        out.strong.extend(changed.into_iter().map(|(influenced, earliest)| StrongInfluence {
            pair: (agent, slot),
            round: t,
            influenced,
            earliest,
        }));
    }

    let Some(cap) = cap else {
        return Ok(out);
    };
    let members: Vec<Pair> = out.influential.iter().copied().collect();
    if members.len() > cap {
        return Err(AuctionError::CombinatorialBlowup {
            t,
            size: members.len(),
            cap,
        });
    }
    // Future under every joint setting of the influential bits; other bits stay factual.
    let futures = (0..1usize << members.len())
        .map(|mask| {
            replay_after(mechanism, bids, rho, before, round, t, |a, j| {
                match members.iter().position(|&p| p == (a, j)) {
                    Some(q) => mask >> q & 1 == 1,
                    None => rho.get(t, a, j),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for (q, &pair) in members.iter().enumerate() {
        for agent in 0..dims.agents {
            let flips = (0..futures.len())
                .filter(|mask| mask >> q & 1 == 0)
                .any(|mask| agent_changes(&futures[mask], &futures[mask | 1 << q], agent));
            if flips {
                out.per_agent[agent].insert(pair);
            }
        }
    }
    Ok(out)
}

/// Influential set, i-influential sets and strong influences of round `t`.
///
/// The i-influential sets enumerate all `2^|I(t)|` settings of the
/// influential bits, which fails with [`AuctionError::CombinatorialBlowup`]
/// above `cap`.
pub fn influential_set<S, M>(mechanism: &M, bids: &[S], rho: &Realization, t: usize, cap: usize) -> Result<RoundInfluence>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let dims = mechanism.dims();
    dims.check_round(t)?;
    let fact = factual(mechanism, bids, rho)?;
    round_influence(mechanism, bids, rho, &fact, t, Some(cap))
}

/// [`influential_set`] for every round.
pub fn influence_report<S, M>(mechanism: &M, bids: &[S], rho: &Realization, cap: usize) -> Result<InfluenceReport>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let fact = factual(mechanism, bids, rho)?;
    let rounds = (0..mechanism.dims().horizon)
        .map(|t| round_influence(mechanism, bids, rho, &fact, t, Some(cap)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InfluenceReport {
        allocations: fact.allocations,
        rounds,
    })
}

/// Single-toggle strong influences of every round, without the joint enumeration.
pub fn strong_influences<S, M>(mechanism: &M, bids: &[S], rho: &Realization) -> Result<Vec<StrongInfluence>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let fact = factual(mechanism, bids, rho)?;
    let mut all = Vec::new();
    for t in 0..mechanism.dims().horizon {
        all.extend(round_influence(mechanism, bids, rho, &fact, t, None)?.strong);
    }
    Ok(all)
}
