use super::{rank_agents, ClickStats, Dims, Mechanism};
use crate::error::Result;
use crate::model::{AllocationRound, ObservedClick};
use crate::scalar::Scalar;

/// Per-round greedy ranking by `b_i * (X_i + 1) / (Y_i + 2)` over every
/// observed round, with no separation between learning and earning.
///
/// Kept as a negative reference: raising a bid changes who is shown in
/// rounds whose clicks steer later allocations.
#[derive(Debug, Clone)]
pub struct GreedyAdaptiveNaive<S> {
    dims: Dims,
    tie_epsilon: S,
}

impl<S: Scalar> GreedyAdaptiveNaive<S> {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            tie_epsilon: S::zero(),
        }
    }

    pub fn with_tie_epsilon(mut self, eps: S) -> Self {
        self.tie_epsilon = eps;
        self
    }
}

impl<S: Scalar> Mechanism<S> for GreedyAdaptiveNaive<S> {
    type State = ClickStats;

    fn name(&self) -> &str {
        "greedy-adaptive-naive"
    }

    fn dims(&self) -> Dims {
        self.dims
    }

    fn init(&self) -> ClickStats {
        ClickStats::new(self.dims.agents, self.dims.slots)
    }

    fn allocate(&self, stats: &ClickStats, bids: &[S], t: usize) -> Result<AllocationRound> {
        self.dims.check_round(t)?;
        self.dims.check_bids(bids)?;
        let scores: Vec<S> = (0..self.dims.agents)
            .map(|i| {
                let (x, y) = stats.agent_totals(i);
                bids[i] * S::of_count(x + 1) / S::of_count(y + 2)
            })
            .collect();
        let ranked = rank_agents(&scores, self.dims.slots, self.tie_epsilon);
        let shown: Vec<Option<usize>> = ranked.into_iter().map(Some).collect();
        AllocationRound::from_slot_order(self.dims.agents, &shown)
    }

    fn observe(&self, stats: &mut ClickStats, _t: usize, _round: &AllocationRound, clicks: &[ObservedClick]) {
        for click in clicks {
            stats.record(click);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::run;
    use crate::model::Realization;

    #[test]
    fn first_round_ranks_by_bid() {
        let m = GreedyAdaptiveNaive::<f64>::new(Dims::new(3, 2, 4).unwrap());
        let round = m.allocate(&m.init(), &[1.0, 3.0, 2.0], 0).unwrap();
        assert_eq!(round.agent_in_slot(0), Some(1));
        assert_eq!(round.agent_in_slot(1), Some(2));
    }

    #[test]
    fn missing_clicks_demote_the_leader() {
        let m = GreedyAdaptiveNaive::<f64>::new(Dims::new(2, 1, 3).unwrap());
        let out = run(&m, &[1.2, 1.0], &Realization::zeros(3, 2, 1)).unwrap();
        assert_eq!(out.allocations[0].agent_in_slot(0), Some(0));
        assert_eq!(out.allocations[1].agent_in_slot(0), Some(1));
    }
}
