//! Auction domain types, CTR regimes and realization sampling.
//!
//! Indices are 0-based throughout: rounds `0..horizon`, agents `0..k`,
//! slots `0..m` with slot 0 the top slot.

use std::fmt;

use ndarray::{Array2, Array3};

use crate::error::{AuctionError, Result};
use crate::rng::CounterRng;
use crate::scalar::Scalar;

/// Structural assumption on the click probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// No relation among the `mu[i][j]`.
    Unconstrained,
    /// Rows non-increasing in the slot index; realizations obey higher-slot click precedence.
    Precedence,
    /// `mu[i][j] = alpha[i] * beta[j]` with `beta` non-increasing.
    Separable,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Unconstrained => "unconstrained",
            Regime::Precedence => "precedence",
            Regime::Separable => "separable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unconstrained" => Some(Regime::Unconstrained),
            "precedence" => Some(Regime::Precedence),
            "separable" => Some(Regime::Separable),
            _ => None,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Problem dimensions and regime of one auction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuctionConfig {
    pub agents: usize,
    pub slots: usize,
    pub horizon: usize,
    pub regime: Regime,
    pub seed: u64,
}

impl AuctionConfig {
    pub fn new(agents: usize, slots: usize, horizon: usize, regime: Regime, seed: u64) -> Result<Self> {
        let config = Self {
            agents,
            slots,
            horizon,
            regime,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(AuctionError::InvalidConfig("m must be at least 1".into()));
        }
        if self.agents < self.slots {
            return Err(AuctionError::InvalidConfig(format!(
                "k = {} must be at least m = {}",
                self.agents, self.slots
            )));
        }
        if self.horizon == 0 {
            return Err(AuctionError::InvalidConfig("T must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-click bids and, optionally, the true per-click values.
#[derive(Debug, Clone, PartialEq)]
pub struct BidProfile<S> {
    bids: Vec<S>,
    values: Option<Vec<S>>,
}

fn check_nonnegative<S: Scalar>(field: &'static str, xs: &[S]) -> Result<()> {
    for (i, &x) in xs.iter().enumerate() {
        if !x.is_finite() || x < S::zero() {
            return Err(AuctionError::InvalidValue {
                field,
                reason: format!("entry {i} is {x}, expected a finite non-negative number"),
            });
        }
    }
    Ok(())
}

impl<S: Scalar> BidProfile<S> {
    pub fn new(bids: Vec<S>) -> Result<Self> {
        check_nonnegative("bids", &bids)?;
        Ok(Self { bids, values: None })
    }

    /// Truthful profile: bids equal values.
    pub fn truthful(values: Vec<S>) -> Result<Self> {
        check_nonnegative("values", &values)?;
        Ok(Self {
            bids: values.clone(),
            values: Some(values),
        })
    }

    pub fn with_values(mut self, values: Vec<S>) -> Result<Self> {
        check_nonnegative("values", &values)?;
        if values.len() != self.bids.len() {
            return Err(AuctionError::DimensionMismatch {
                what: "values",
                expected: self.bids.len(),
                got: values.len(),
            });
        }
        self.values = Some(values);
        Ok(self)
    }

    pub fn bids(&self) -> &[S] {
        &self.bids
    }

    pub fn bid(&self, agent: usize) -> S {
        self.bids[agent]
    }

    pub fn values(&self) -> Option<&[S]> {
        self.values.as_deref()
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    /// Same profile with agent `agent` bidding `x` instead.
    pub fn with_bid(&self, agent: usize, x: S) -> Self {
        let mut next = self.clone();
        next.bids[agent] = x;
        next
    }

    pub fn expect_agents(&self, agents: usize) -> Result<()> {
        if self.bids.len() != agents {
            return Err(AuctionError::DimensionMismatch {
                what: "bid vector",
                expected: agents,
                got: self.bids.len(),
            });
        }
        Ok(())
    }
}

/// Click-through rates `mu[i][j]`, with the separable factors when known.
#[derive(Debug, Clone, PartialEq)]
pub struct CtrModel<S> {
    mu: Array2<S>,
    alpha: Option<Vec<S>>,
    beta: Option<Vec<S>>,
}

impl<S: Scalar> CtrModel<S> {
    pub fn new(mu: Array2<S>) -> Result<Self> {
        let model = Self {
            mu,
            alpha: None,
            beta: None,
        };
        model.check_probabilities()?;
        Ok(model)
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let k = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(AuctionError::DimensionMismatch {
                what: "CTR row",
                expected: m,
                got: bad.len(),
            });
        }
        let mu = Array2::from_shape_fn((k, m), |(i, j)| rows[i][j]);
        Self::new(mu)
    }

    /// Separable model `mu[i][j] = alpha[i] * beta[j]`.
    pub fn separable(alpha: Vec<S>, beta: Vec<S>) -> Result<Self> {
        let mu = Array2::from_shape_fn((alpha.len(), beta.len()), |(i, j)| alpha[i] * beta[j]);
        let model = Self {
            mu,
            alpha: Some(alpha),
            beta: Some(beta),
        };
        model.check_probabilities()?;
        model.validate(Regime::Separable)?;
        Ok(model)
    }

    /// Constant CTR matrix, useful for the all-click and no-click edge cases.
    pub fn constant(agents: usize, slots: usize, p: S) -> Result<Self> {
        Self::new(Array2::from_elem((agents, slots), p))
    }

    fn check_probabilities(&self) -> Result<()> {
        for ((i, j), &p) in self.mu.indexed_iter() {
            if !(p >= S::zero() && p <= S::one()) {
                return Err(AuctionError::InvalidValue {
                    field: "mu",
                    reason: format!("mu[{i}][{j}] = {p} is outside [0, 1]"),
                });
            }
        }
        for (field, factors) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            if let Some(xs) = factors {
                if let Some(x) = xs.iter().find(|&&x| !(x >= S::zero() && x <= S::one())) {
                    return Err(AuctionError::InvalidValue {
                        field,
                        reason: format!("{x} is outside [0, 1]"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks the regime-specific structure of the matrix.
    pub fn validate(&self, regime: Regime) -> Result<()> {
        match regime {
            Regime::Unconstrained => Ok(()),
            Regime::Precedence => {
                if self.is_row_monotone() {
                    Ok(())
                } else {
                    Err(AuctionError::RegimeMismatch {
                        regime: "precedence",
                        reason: "some row of mu increases with the slot index".into(),
                    })
                }
            }
            Regime::Separable => {
                let (Some(alpha), Some(beta)) = (&self.alpha, &self.beta) else {
                    return Err(AuctionError::RegimeMismatch {
                        regime: "separable",
                        reason: "alpha and beta factors are missing".into(),
                    });
                };
                if alpha.len() != self.agents() || beta.len() != self.slots() {
                    return Err(AuctionError::RegimeMismatch {
                        regime: "separable",
                        reason: "factor lengths do not match mu".into(),
                    });
                }
                if beta.windows(2).any(|w| w[1] > w[0]) {
                    return Err(AuctionError::RegimeMismatch {
                        regime: "separable",
                        reason: "beta must be non-increasing".into(),
                    });
                }
                let exact = self
                    .mu
                    .indexed_iter()
                    .all(|((i, j), &p)| p == alpha[i] * beta[j]);
                if exact {
                    Ok(())
                } else {
                    Err(AuctionError::RegimeMismatch {
                        regime: "separable",
                        reason: "mu differs from alpha * beta".into(),
                    })
                }
            }
        }
    }

    pub fn is_row_monotone(&self) -> bool {
        self.mu
            .rows()
            .into_iter()
            .all(|row| row.iter().zip(row.iter().skip(1)).all(|(a, b)| b <= a))
    }

    pub fn mu(&self) -> &Array2<S> {
        &self.mu
    }

    pub fn get(&self, agent: usize, slot: usize) -> S {
        self.mu[[agent, slot]]
    }

    pub fn alpha(&self) -> Option<&[S]> {
        self.alpha.as_deref()
    }

    pub fn beta(&self) -> Option<&[S]> {
        self.beta.as_deref()
    }

    pub fn agents(&self) -> usize {
        self.mu.nrows()
    }

    pub fn slots(&self) -> usize {
        self.mu.ncols()
    }
}

/// Full tensor of would-be clicks `rho[t][i][j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    rho: Array3<bool>,
}

impl Realization {
    pub fn zeros(horizon: usize, agents: usize, slots: usize) -> Self {
        Self {
            rho: Array3::from_elem((horizon, agents, slots), false),
        }
    }

    pub fn from_fn(
        horizon: usize,
        agents: usize,
        slots: usize,
        f: impl FnMut((usize, usize, usize)) -> bool,
    ) -> Self {
        Self {
            rho: Array3::from_shape_fn((horizon, agents, slots), f),
        }
    }

    pub fn from_array(rho: Array3<bool>) -> Self {
        Self { rho }
    }

    pub fn horizon(&self) -> usize {
        self.rho.shape()[0]
    }

    pub fn agents(&self) -> usize {
        self.rho.shape()[1]
    }

    pub fn slots(&self) -> usize {
        self.rho.shape()[2]
    }

    pub fn get(&self, t: usize, agent: usize, slot: usize) -> bool {
        self.rho[[t, agent, slot]]
    }

    pub fn set(&mut self, t: usize, agent: usize, slot: usize, click: bool) {
        self.rho[[t, agent, slot]] = click;
    }

    /// Copy with one bit flipped.
    pub fn toggled(&self, t: usize, agent: usize, slot: usize) -> Self {
        let mut next = self.clone();
        next.rho[[t, agent, slot]] ^= true;
        next
    }

    pub fn as_array(&self) -> &Array3<bool> {
        &self.rho
    }

    /// Higher-slot click precedence: a click in slot `j1` implies clicks in every `j2 < j1`.
    pub fn satisfies_precedence(&self) -> bool {
        self.rho.outer_iter().all(|round| {
            round
                .rows()
                .into_iter()
                .all(|row| row.iter().zip(row.iter().skip(1)).all(|(&hi, &lo)| hi || !lo))
        })
    }

    /// Bits seen by a mechanism whose allocation history is `allocations`.
    pub fn observed_mask(&self, allocations: &[AllocationRound]) -> Result<Array3<bool>> {
        self.expect_rounds(allocations)?;
        let mut mask = Array3::from_elem(self.rho.raw_dim(), false);
        for (t, round) in allocations.iter().enumerate() {
            for (agent, slot) in round.pairs() {
                mask[[t, agent, slot]] = true;
            }
        }
        Ok(mask)
    }

    /// Copy in which every bit outside `mask` is replaced by a fresh fair coin.
    pub fn with_unobserved_resampled(&self, mask: &Array3<bool>, seed: u64) -> Self {
        let mut rng = CounterRng::new(seed);
        let (_, k, m) = self.rho.dim();
        let rho = Array3::from_shape_fn(self.rho.raw_dim(), |(t, i, j)| {
            if mask[[t, i, j]] {
                self.rho[[t, i, j]]
            } else {
                rng.unit_at(t as u64, (i * m + j) as u64 + (k * m) as u64) < 0.5
            }
        });
        Self { rho }
    }

    fn expect_rounds(&self, allocations: &[AllocationRound]) -> Result<()> {
        if allocations.len() != self.horizon() {
            return Err(AuctionError::DimensionMismatch {
                what: "allocation rounds",
                expected: self.horizon(),
                got: allocations.len(),
            });
        }
        for round in allocations {
            if round.agents() != self.agents() {
                return Err(AuctionError::DimensionMismatch {
                    what: "agents in allocation",
                    expected: self.agents(),
                    got: round.agents(),
                });
            }
            if round.slots() != self.slots() {
                return Err(AuctionError::DimensionMismatch {
                    what: "slots in allocation",
                    expected: self.slots(),
                    got: round.slots(),
                });
            }
        }
        Ok(())
    }
}

/// One round's assignment of agents to slots.
///
/// Stored as the slot of each agent; each agent holds at most one slot and
/// each slot at most one agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AllocationRound {
    slot_of: Vec<Option<usize>>,
    slots: usize,
}

impl AllocationRound {
    pub fn empty(agents: usize, slots: usize) -> Self {
        Self {
            slot_of: vec![None; agents],
            slots,
        }
    }

    pub fn from_slots(slot_of: Vec<Option<usize>>, slots: usize) -> Result<Self> {
        let mut taken = vec![false; slots];
        for (agent, slot) in slot_of.iter().enumerate() {
            if let Some(j) = *slot {
                if j >= slots {
                    return Err(AuctionError::InvalidAllocation(format!(
                        "agent {agent} assigned to slot {j} but there are {slots} slots"
                    )));
                }
                if std::mem::replace(&mut taken[j], true) {
                    return Err(AuctionError::InvalidAllocation(format!(
                        "slot {j} assigned twice"
                    )));
                }
            }
        }
        Ok(Self { slot_of, slots })
    }

    /// Builds the round from `agent_in_slot[j]` (the agent shown in slot `j`).
    pub fn from_slot_order(agents: usize, agent_in_slot: &[Option<usize>]) -> Result<Self> {
        let mut slot_of = vec![None; agents];
        for (j, agent) in agent_in_slot.iter().enumerate() {
            if let Some(i) = *agent {
                if i >= agents {
                    return Err(AuctionError::InvalidAllocation(format!(
                        "slot {j} shows agent {i} but there are {agents} agents"
                    )));
                }
                if slot_of[i].replace(j).is_some() {
                    return Err(AuctionError::InvalidAllocation(format!(
                        "agent {i} shown in two slots"
                    )));
                }
            }
        }
        Ok(Self {
            slot_of,
            slots: agent_in_slot.len(),
        })
    }

    pub fn agents(&self) -> usize {
        self.slot_of.len()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn slot(&self, agent: usize) -> Option<usize> {
        self.slot_of[agent]
    }

    pub fn slot_of(&self) -> &[Option<usize>] {
        &self.slot_of
    }

    /// `A_ij(t)`.
    pub fn assigned(&self, agent: usize, slot: usize) -> bool {
        self.slot_of[agent] == Some(slot)
    }

    pub fn agent_in_slot(&self, slot: usize) -> Option<usize> {
        self.slot_of.iter().position(|&s| s == Some(slot))
    }

    /// Allocated `(agent, slot)` pairs in agent order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.slot_of
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|j| (i, j)))
    }

    pub fn to_matrix(&self) -> Array2<u8> {
        Array2::from_shape_fn((self.agents(), self.slots), |(i, j)| u8::from(self.assigned(i, j)))
    }
}

/// A single observed click bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservedClick {
    pub round: usize,
    pub agent: usize,
    pub slot: usize,
    pub clicked: bool,
}

/// Everything recorded about one end-to-end run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<S> {
    pub allocations: Vec<AllocationRound>,
    pub clicks: Vec<u64>,
    pub observed: Vec<ObservedClick>,
    pub payments: Option<Vec<S>>,
    pub welfare: S,
}

impl<S: Scalar> RunTrace<S> {
    /// Assembles the trace of `allocations` under `rho`; welfare is the realized `sum_i v_i C_i`.
    pub fn new(allocations: Vec<AllocationRound>, rho: &Realization, values: &[S]) -> Result<Self> {
        let clicks = count_clicks(&allocations, rho)?;
        if values.len() != clicks.len() {
            return Err(AuctionError::DimensionMismatch {
                what: "values",
                expected: clicks.len(),
                got: values.len(),
            });
        }
        let observed = allocations
            .iter()
            .enumerate()
            .flat_map(|(t, round)| {
                round.pairs().map(move |(agent, slot)| ObservedClick {
                    round: t,
                    agent,
                    slot,
                    clicked: rho.get(t, agent, slot),
                })
            })
            .collect();
        let welfare = values
            .iter()
            .zip(&clicks)
            .map(|(&v, &c)| v * S::of_count(c))
            .sum();
        Ok(Self {
            allocations,
            clicks,
            observed,
            payments: None,
            welfare,
        })
    }

    /// Realized utility `v_i C_i - P_i`, when payments are attached.
    pub fn utility(&self, agent: usize, value: S) -> Option<S> {
        self.payments
            .as_ref()
            .map(|p| value * S::of_count(self.clicks[agent]) - p[agent])
    }
}

/// Samples the full click tensor for `config.horizon` rounds.
///
/// Unconstrained and separable models draw every bit independently;
/// the precedence regime shares one uniform per `(round, agent)` across slots.
pub fn sample_realization<S: Scalar>(
    ctr: &CtrModel<S>,
    config: &AuctionConfig,
    seed: u64,
) -> Result<Realization> {
    config.validate()?;
    if ctr.agents() != config.agents {
        return Err(AuctionError::DimensionMismatch {
            what: "CTR rows",
            expected: config.agents,
            got: ctr.agents(),
        });
    }
    if ctr.slots() != config.slots {
        return Err(AuctionError::DimensionMismatch {
            what: "CTR columns",
            expected: config.slots,
            got: ctr.slots(),
        });
    }
    ctr.validate(config.regime)?;

    let (k, m) = (config.agents, config.slots);
    let mu: Vec<f64> = ctr.mu().iter().map(|p| p.as_f64()).collect();
    let mut rho = Array3::from_elem((config.horizon, k, m), false);
    let mut rng = CounterRng::new(seed);
    for (t, mut round) in rho.outer_iter_mut().enumerate() {
        rng.seek(t as u64, 0);
        match config.regime {
            Regime::Precedence => {
                for i in 0..k {
                    let u = rng.next_unit();
                    for j in 0..m {
                        round[[i, j]] = u < mu[i * m + j];
                    }
                }
            }
            Regime::Unconstrained | Regime::Separable => {
                for i in 0..k {
                    for j in 0..m {
                        round[[i, j]] = rng.next_unit() < mu[i * m + j];
                    }
                }
            }
        }
    }
    Ok(Realization { rho })
}

/// `C[i] = sum_t sum_j A_ij(t) rho_ij(t)`.
pub fn count_clicks(allocations: &[AllocationRound], rho: &Realization) -> Result<Vec<u64>> {
    rho.expect_rounds(allocations)?;
    let mut clicks = vec![0u64; rho.agents()];
    for (t, round) in allocations.iter().enumerate() {
        for (agent, slot) in round.pairs() {
            clicks[agent] += u64::from(rho.get(t, agent, slot));
        }
    }
    Ok(clicks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(k: usize, m: usize, horizon: usize, regime: Regime) -> AuctionConfig {
        AuctionConfig::new(k, m, horizon, regime, 0).unwrap()
    }

    #[test]
    fn config_rejects_fewer_agents_than_slots() {
        assert!(AuctionConfig::new(1, 2, 5, Regime::Unconstrained, 0).is_err());
        assert!(AuctionConfig::new(2, 0, 5, Regime::Unconstrained, 0).is_err());
        assert!(AuctionConfig::new(2, 1, 0, Regime::Unconstrained, 0).is_err());
    }

    #[test]
    fn bids_must_be_finite_and_nonnegative() {
        assert!(BidProfile::new(vec![1.0, -0.5]).is_err());
        assert!(BidProfile::new(vec![1.0, f64::NAN]).is_err());
        assert!(BidProfile::new(vec![0.0, 2.0]).is_ok());
    }

    #[test]
    fn zero_and_one_ctrs_are_deterministic() {
        let zero = CtrModel::constant(3, 2, 0.0).unwrap();
        let one = CtrModel::constant(3, 2, 1.0).unwrap();
        for regime in [Regime::Unconstrained, Regime::Precedence] {
            let c = config(3, 2, 50, regime);
            let r0 = sample_realization(&zero, &c, 9).unwrap();
            let r1 = sample_realization(&one, &c, 9).unwrap();
            assert!(r0.as_array().iter().all(|&b| !b));
            assert!(r1.as_array().iter().all(|&b| b));
        }
    }

    #[test]
    fn single_cell_frequency_matches_mean() {
        let ctr = CtrModel::constant(1, 1, 0.3).unwrap();
        let rho = sample_realization(&ctr, &config(1, 1, 100_000, Regime::Unconstrained), 42).unwrap();
        let freq = rho.as_array().iter().filter(|&&b| b).count() as f64 / 100_000.0;
        assert!((freq - 0.3).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn precedence_rejects_increasing_rows() {
        let ctr = CtrModel::from_rows(&[vec![0.2, 0.5], vec![0.5, 0.1]]).unwrap();
        let err = sample_realization(&ctr, &config(2, 2, 3, Regime::Precedence), 1).unwrap_err();
        assert!(matches!(err, AuctionError::RegimeMismatch { .. }));
    }

    #[test]
    fn separable_requires_factors() {
        let plain = CtrModel::from_rows(&[vec![0.2, 0.1]]).unwrap();
        assert!(plain.validate(Regime::Separable).is_err());
        assert!(CtrModel::separable(vec![0.5], vec![0.2, 0.4]).is_err());
        let sep = CtrModel::separable(vec![0.5, 1.0], vec![0.8, 0.4]).unwrap();
        assert_eq!(sep.get(1, 1), 0.4);
        assert!(sep.validate(Regime::Precedence).is_ok());
    }

    #[test]
    fn realization_depends_only_on_seed() {
        let ctr = CtrModel::from_rows(&[vec![0.7, 0.3], vec![0.5, 0.4], vec![0.1, 0.05]]).unwrap();
        let c = config(3, 2, 200, Regime::Precedence);
        assert_eq!(
            sample_realization(&ctr, &c, 5).unwrap(),
            sample_realization(&ctr, &c, 5).unwrap()
        );
        assert_ne!(
            sample_realization(&ctr, &c, 5).unwrap(),
            sample_realization(&ctr, &c, 6).unwrap()
        );
    }

    #[test]
    fn allocation_round_rejects_double_booking() {
        assert!(AllocationRound::from_slots(vec![Some(0), Some(0)], 2).is_err());
        assert!(AllocationRound::from_slots(vec![Some(2)], 2).is_err());
        assert!(AllocationRound::from_slot_order(3, &[Some(1), Some(1)]).is_err());
        let round = AllocationRound::from_slot_order(3, &[Some(2), Some(0)]).unwrap();
        assert_eq!(round.slot(2), Some(0));
        assert_eq!(round.agent_in_slot(1), Some(0));
        assert_eq!(round.to_matrix().sum(), 2);
    }

    #[test]
    fn count_clicks_empty_allocation_is_zero() {
        let rho = Realization::from_fn(4, 3, 2, |_| true);
        let allocs = vec![AllocationRound::empty(3, 2); 4];
        assert_eq!(count_clicks(&allocs, &rho).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn count_clicks_single_agent() {
        let rho = Realization::from_fn(5, 1, 1, |(t, _, _)| t != 1 && t != 3);
        let allocs = vec![AllocationRound::from_slots(vec![Some(0)], 1).unwrap(); 5];
        assert_eq!(count_clicks(&allocs, &rho).unwrap(), vec![3]);
    }

    #[test]
    fn count_clicks_checks_dimensions() {
        let rho = Realization::zeros(3, 2, 1);
        let allocs = vec![AllocationRound::empty(2, 1); 2];
        assert!(count_clicks(&allocs, &rho).is_err());
        let allocs = vec![AllocationRound::empty(3, 1); 3];
        assert!(count_clicks(&allocs, &rho).is_err());
    }

    #[test]
    fn observed_mask_matches_allocations() {
        let rho = Realization::from_fn(2, 2, 2, |_| true);
        let allocs = vec![
            AllocationRound::from_slots(vec![Some(1), None], 2).unwrap(),
            AllocationRound::from_slots(vec![Some(0), Some(1)], 2).unwrap(),
        ];
        let mask = rho.observed_mask(&allocs).unwrap();
        assert_eq!(mask.iter().filter(|&&b| b).count(), 3);
        assert!(mask[[0, 0, 1]] && mask[[1, 0, 0]] && mask[[1, 1, 1]]);
        let resampled = rho.with_unobserved_resampled(&mask, 3);
        assert!(resampled.get(0, 0, 1) && resampled.get(1, 1, 1));
    }
}
