use ndarray::Array2;

use super::{estimate_alpha, rank_agents, ClickStats, Dims, Mechanism};
use crate::error::{AuctionError, Result};
use crate::model::{AllocationRound, ObservedClick};
use crate::scalar::Scalar;

/// Round-robin exploration followed by exploitation on frozen estimates.
///
/// During the first `exploration_rounds` rounds slot `j` shows agent
/// `(t + j) mod k`, whatever the bids. Afterwards agents are ranked by
/// `alpha'_i * b_i`, where `alpha'` is estimated from exploration clicks only,
/// and the top `m` take the slots in order of decreasing `beta`.
#[derive(Debug, Clone)]
pub struct ExploreExploitSeparable<S> {
    dims: Dims,
    beta: Vec<S>,
    exploration_rounds: usize,
    tie_epsilon: S,
    slot_order: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExploreState<S> {
    stats: ClickStats,
    alpha: Option<Vec<S>>,
}

impl<S: Scalar> ExploreState<S> {
    /// Exploration-phase click statistics.
    pub fn stats(&self) -> &ClickStats {
        &self.stats
    }

    /// Frozen estimate, available once exploration has ended.
    pub fn alpha(&self) -> Option<&[S]> {
        self.alpha.as_deref()
    }
}

impl<S: Scalar> ExploreExploitSeparable<S> {
    pub fn new(dims: Dims, beta: Vec<S>, exploration_rounds: usize) -> Result<Self> {
        if beta.len() != dims.slots {
            return Err(AuctionError::DimensionMismatch {
                what: "beta",
                expected: dims.slots,
                got: beta.len(),
            });
        }
        if let Some(b) = beta.iter().find(|&&b| !(b > S::zero() && b <= S::one())) {
            return Err(AuctionError::InvalidValue {
                field: "beta",
                reason: format!("slot factor {b} must lie in (0, 1]"),
            });
        }
        if exploration_rounds > dims.horizon {
            return Err(AuctionError::InvalidConfig(format!(
                "exploration_rounds = {exploration_rounds} exceeds T = {}",
                dims.horizon
            )));
        }
        let mut slot_order: Vec<usize> = (0..dims.slots).collect();
        slot_order.sort_by(|&a, &b| {
            beta[b]
                .partial_cmp(&beta[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        Ok(Self {
            dims,
            beta,
            exploration_rounds,
            tie_epsilon: S::zero(),
            slot_order,
        })
    }

    pub fn with_tie_epsilon(mut self, eps: S) -> Self {
        self.tie_epsilon = eps;
        self
    }

    pub fn exploration_rounds(&self) -> usize {
        self.exploration_rounds
    }

    pub fn beta(&self) -> &[S] {
        &self.beta
    }

    /// Allocation of exploration round `t`, independent of bids.
    pub fn exploration_round(&self, t: usize) -> AllocationRound {
        let k = self.dims.agents;
        let shown: Vec<Option<usize>> = (0..self.dims.slots).map(|j| Some((t + j) % k)).collect();
        AllocationRound::from_slot_order(k, &shown).expect("round robin never double-books")
    }

    /// Exploitation allocation for a given estimate.
    pub fn exploit_with(&self, alpha: &[S], bids: &[S]) -> AllocationRound {
        let scores: Vec<S> = alpha.iter().zip(bids).map(|(&a, &b)| a * b).collect();
        let ranked = rank_agents(&scores, self.dims.slots, self.tie_epsilon);
        let mut shown = vec![None; self.dims.slots];
        for (&slot, &agent) in self.slot_order.iter().zip(&ranked) {
            shown[slot] = Some(agent);
        }
        AllocationRound::from_slot_order(self.dims.agents, &shown).expect("ranking yields distinct agents")
    }

    fn frozen_alpha(&self, stats: &ClickStats) -> Vec<S> {
        estimate_alpha(stats, &self.beta).expect("beta is strictly positive")
    }
}

impl<S: Scalar> Mechanism<S> for ExploreExploitSeparable<S> {
    type State = ExploreState<S>;

    fn name(&self) -> &str {
        "explore-exploit-separable"
    }

    fn dims(&self) -> Dims {
        self.dims
    }

    fn init(&self) -> Self::State {
        let stats = ClickStats::new(self.dims.agents, self.dims.slots);
        let alpha = (self.exploration_rounds == 0).then(|| self.frozen_alpha(&stats));
        ExploreState { stats, alpha }
    }

    fn allocate(&self, state: &Self::State, bids: &[S], t: usize) -> Result<AllocationRound> {
        self.dims.check_round(t)?;
        self.dims.check_bids(bids)?;
        if t < self.exploration_rounds {
            return Ok(self.exploration_round(t));
        }
        let alpha = state
            .alpha
            .as_ref()
            .expect("estimate is frozen at the end of exploration");
        Ok(self.exploit_with(alpha, bids))
    }

    fn observe(&self, state: &mut Self::State, t: usize, _round: &AllocationRound, clicks: &[ObservedClick]) {
        if t >= self.exploration_rounds {
            return;
        }
        for click in clicks {
            state.stats.record(click);
        }
        if t + 1 == self.exploration_rounds {
            state.alpha = Some(self.frozen_alpha(&state.stats));
        }
    }

    /// `mu'_ij = alpha'_i * beta_j`.
    fn learned_ctr(&self, state: &Self::State) -> Option<Array2<S>> {
        let alpha = state.alpha.as_ref()?;
        Some(Array2::from_shape_fn(
            (self.dims.agents, self.dims.slots),
            |(i, j)| alpha[i] * self.beta[j],
        ))
    }
}
