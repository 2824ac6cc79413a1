//! Hand-built allocation rules and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use slotmab::mechanisms::{run, Dims, Mechanism};
use slotmab::model::{AllocationRound, ObservedClick, Realization};
use slotmab::verifier::{Pair, StrongInfluence};
use slotmab::{BidProfile, Result};

/// Single agent, single slot, shown iff its bid reaches `theta`.
#[derive(Debug, Clone)]
pub struct ReserveRule {
    pub dims: Dims,
    pub theta: f64,
}

impl ReserveRule {
    pub fn new(horizon: usize, theta: f64) -> Self {
        Self {
            dims: Dims::new(1, 1, horizon).unwrap(),
            theta,
        }
    }
}

impl Mechanism<f64> for ReserveRule {
    type State = ();
    fn name(&self) -> &str {
        "reserve"
    }
    fn dims(&self) -> Dims {
        self.dims
    }
    fn init(&self) {}
    fn allocate(&self, _: &(), bids: &[f64], _t: usize) -> Result<AllocationRound> {
        let shown = (bids[0] >= self.theta).then_some(0);
        AllocationRound::from_slot_order(1, &[shown])
    }
    fn observe(&self, _: &mut (), _: usize, _: &AllocationRound, _: &[ObservedClick]) {}
}

/// Two agents, two slots; agent 0 takes the top slot only while bidding below 1.
#[derive(Debug, Clone)]
pub struct DemotingRule {
    pub dims: Dims,
}

impl DemotingRule {
    pub fn new(horizon: usize) -> Self {
        Self {
            dims: Dims::new(2, 2, horizon).unwrap(),
        }
    }
}

impl Mechanism<f64> for DemotingRule {
    type State = ();
    fn name(&self) -> &str {
        "demoting"
    }
    fn dims(&self) -> Dims {
        self.dims
    }
    fn init(&self) {}
    fn allocate(&self, _: &(), bids: &[f64], _t: usize) -> Result<AllocationRound> {
        let order = if bids[0] < 1.0 { [Some(0), Some(1)] } else { [Some(1), Some(0)] };
        AllocationRound::from_slot_order(2, &order)
    }
    fn observe(&self, _: &mut (), _: usize, _: &AllocationRound, _: &[ObservedClick]) {}
}

/// Two agents, one slot. Round 0 shows agent 1. Afterwards agent 0 wins iff
/// "agent 1 clicked in round 0" agrees with "agent 0 bids at least 1", so the
/// effect of the competitor's click on agent 0 flips with agent 0's bid.
#[derive(Debug, Clone)]
pub struct InvertingRule {
    pub dims: Dims,
}

impl InvertingRule {
    pub fn new(horizon: usize) -> Self {
        Self {
            dims: Dims::new(2, 1, horizon).unwrap(),
        }
    }
}

impl Mechanism<f64> for InvertingRule {
    type State = Option<bool>;
    fn name(&self) -> &str {
        "inverting"
    }
    fn dims(&self) -> Dims {
        self.dims
    }
    fn init(&self) -> Option<bool> {
        None
    }
    fn allocate(&self, state: &Option<bool>, bids: &[f64], t: usize) -> Result<AllocationRound> {
        let winner = if t == 0 {
            1
        } else if state.unwrap_or(false) == (bids[0] >= 1.0) {
            0
        } else {
            1
        };
        AllocationRound::from_slot_order(2, &[Some(winner)])
    }
    fn observe(&self, state: &mut Option<bool>, t: usize, _: &AllocationRound, clicks: &[ObservedClick]) {
        if t == 0 {
            *state = Some(clicks.iter().any(|c| c.agent == 1 && c.clicked));
        }
    }
}

/// Ignores bids and clicks: slot `j` in round `t` shows agent `(2t + j) mod k`.
#[derive(Debug, Clone)]
pub struct ObliviousSchedule {
    pub dims: Dims,
}

impl Mechanism<f64> for ObliviousSchedule {
    type State = ();
    fn name(&self) -> &str {
        "oblivious"
    }
    fn dims(&self) -> Dims {
        self.dims
    }
    fn init(&self) {}
    fn allocate(&self, _: &(), _bids: &[f64], t: usize) -> Result<AllocationRound> {
        let k = self.dims.agents;
        let shown: Vec<Option<usize>> = (0..self.dims.slots).map(|j| Some((2 * t + j) % k)).collect();
        AllocationRound::from_slot_order(k, &shown)
    }
    fn observe(&self, _: &mut (), _: usize, _: &AllocationRound, _: &[ObservedClick]) {}
}

/// Best injective slot-to-agent map by enumeration, summed in slot order.
pub fn brute_force_welfare(weights: &Array2<f64>) -> f64 {
    fn go(weights: &Array2<f64>, slot: usize, used: &mut Vec<bool>, acc: f64) -> f64 {
        if slot == weights.ncols() {
            return acc;
        }
        let mut best = f64::NEG_INFINITY;
        for agent in 0..weights.nrows() {
            if used[agent] {
                continue;
            }
            used[agent] = true;
            best = best.max(go(weights, slot + 1, used, acc + weights[[agent, slot]]));
            used[agent] = false;
        }
        best
    }
    go(weights, 0, &mut vec![false; weights.nrows()], 0.0)
}

/// Influence structure of round `t` from a table of full replays over all
/// `2^(k m)` click patterns of that round.
pub struct ExhaustiveInfluence {
    pub influential: BTreeSet<Pair>,
    pub per_agent: Vec<BTreeSet<Pair>>,
    pub strong: BTreeSet<StrongInfluence>,
}

pub fn exhaustive_influence<M: Mechanism<f64>>(mech: &M, bids: &[f64], rho: &Realization, t: usize) -> ExhaustiveInfluence {
    let Dims { agents: k, slots: m, horizon } = mech.dims();
    let bit = |i: usize, j: usize| 1usize << (i * m + j);
    let pattern_of = |r: &Realization| (0..k * m).filter(|&q| r.get(t, q / m, q % m)).map(|q| 1usize << q).sum::<usize>();
    let futures: Vec<Vec<Vec<Option<usize>>>> = (0..1usize << (k * m))
        .map(|pattern| {
            let mut r = rho.clone();
            for q in 0..k * m {
                r.set(t, q / m, q % m, pattern >> q & 1 == 1);
            }
            let out = run(mech, bids, &r).unwrap();
            out.allocations[t + 1..horizon]
                .iter()
                .map(|a| (0..k).map(|i| a.slot(i)).collect())
                .collect()
        })
        .collect();
    let actual = pattern_of(rho);
    let allocated: Vec<Pair> = run(mech, bids, rho).unwrap().allocations[t].pairs().collect();

    let agent_differs = |a: usize, b: usize, agent: usize| futures[a].iter().zip(&futures[b]).any(|(x, y)| x[agent] != y[agent]);
    let mut influential = BTreeSet::new();
    let mut strong = BTreeSet::new();
    for &(i, j) in &allocated {
        let flipped = actual ^ bit(i, j);
        if futures[actual] == futures[flipped] {
            continue;
        }
        influential.insert((i, j));
        let mut first: BTreeMap<usize, usize> = BTreeMap::new();
        for (offset, (x, y)) in futures[actual].iter().zip(&futures[flipped]).enumerate() {
            for agent in 0..k {
                if x[agent] != y[agent] {
                    first.entry(agent).or_insert(t + 1 + offset);
                }
            }
        }
        for (influenced, earliest) in first {
            strong.insert(StrongInfluence {
                pair: (i, j),
                round: t,
                influenced,
                earliest,
            });
        }
    }
    let i_mask: usize = influential.iter().map(|&(i, j)| bit(i, j)).sum();
    let per_agent = (0..k)
        .map(|agent| {
            influential
                .iter()
                .copied()
                .filter(|&(i, j)| {
                    (0..1usize << (k * m))
                        .filter(|&p| p & !i_mask == actual & !i_mask)
                        .any(|p| agent_differs(p, p ^ bit(i, j), agent))
                })
                .collect()
        })
        .collect();
    ExhaustiveInfluence {
        influential,
        per_agent,
        strong,
    }
}

/// Midpoint-rule estimate of `int_0^{b_i} C_i(x) dx` on `n` equal cells.
pub fn grid_click_integral<M: Mechanism<f64>>(mech: &M, agent: usize, bids: &BidProfile<f64>, rho: &Realization, n: usize) -> f64 {
    let b = bids.bid(agent);
    let h = b / n as f64;
    let mut cache: BTreeMap<Vec<Option<usize>>, u64> = BTreeMap::new();
    let mut total = 0.0;
    for q in 0..n {
        let x = h * (q as f64 + 0.5);
        let out = run(mech, bids.with_bid(agent, x).bids(), rho).unwrap();
        let slots = out.slots_of(agent);
        let clicks = *cache.entry(slots.clone()).or_insert_with(|| {
            slots
                .iter()
                .enumerate()
                .filter(|(t, s)| s.is_some_and(|j| rho.get(*t, agent, j)))
                .count() as u64
        });
        total += clicks as f64 * h;
    }
    total
}

/// Divisors of 10^4, for bids whose ratios put breakpoints on grid nodes.
pub fn divisors_of_ten_thousand() -> Vec<u32> {
    (1..=10_000).filter(|d| 10_000 % d == 0).collect()
}
