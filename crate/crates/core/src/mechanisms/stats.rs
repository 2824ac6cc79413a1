use ndarray::Array2;

use crate::error::{AuctionError, Result};
use crate::model::ObservedClick;
use crate::scalar::Scalar;

/// Observed clicks `X[i][j]` and impressions `Y[i][j]` per agent-slot pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickStats {
    clicks: Array2<u64>,
    impressions: Array2<u64>,
}

impl ClickStats {
    pub fn new(agents: usize, slots: usize) -> Self {
        Self {
            clicks: Array2::zeros((agents, slots)),
            impressions: Array2::zeros((agents, slots)),
        }
    }

    /// Builds stats from explicit matrices; requires `X <= Y` elementwise.
    pub fn from_counts(clicks: Array2<u64>, impressions: Array2<u64>) -> Result<Self> {
        if clicks.dim() != impressions.dim() {
            return Err(AuctionError::DimensionMismatch {
                what: "click and impression matrices",
                expected: impressions.len(),
                got: clicks.len(),
            });
        }
        if let Some(((i, j), _)) = clicks
            .indexed_iter()
            .find(|&((i, j), &x)| x > impressions[[i, j]])
        {
            return Err(AuctionError::InvalidValue {
                field: "clicks",
                reason: format!("X[{i}][{j}] exceeds Y[{i}][{j}]"),
            });
        }
        Ok(Self { clicks, impressions })
    }

    pub fn record(&mut self, click: &ObservedClick) {
        self.impressions[[click.agent, click.slot]] += 1;
        self.clicks[[click.agent, click.slot]] += u64::from(click.clicked);
    }

    pub fn clicks(&self) -> &Array2<u64> {
        &self.clicks
    }

    pub fn impressions(&self) -> &Array2<u64> {
        &self.impressions
    }

    pub fn agents(&self) -> usize {
        self.clicks.nrows()
    }

    pub fn slots(&self) -> usize {
        self.clicks.ncols()
    }

    /// Clicks and impressions of `agent` summed over slots.
    pub fn agent_totals(&self, agent: usize) -> (u64, u64) {
        (self.clicks.row(agent).sum(), self.impressions.row(agent).sum())
    }
}

/// Agent factor estimate `alpha'_i = mean_j X_ij / (Y_ij * beta_j)` over slots with `Y_ij > 0`.
///
/// Agents that were never shown get the prior 0.
pub fn estimate_alpha<S: Scalar>(stats: &ClickStats, beta: &[S]) -> Result<Vec<S>> {
    if beta.len() != stats.slots() {
        return Err(AuctionError::DimensionMismatch {
            what: "beta",
            expected: stats.slots(),
            got: beta.len(),
        });
    }
    (0..stats.agents())
        .map(|i| {
            let mut sum = S::zero();
            let mut shown_slots = 0u64;
            for (j, &b) in beta.iter().enumerate() {
                let y = stats.impressions[[i, j]];
                if y == 0 {
                    continue;
                }
                if b <= S::zero() {
                    return Err(AuctionError::DegenerateSlot { agent: i, slot: j });
                }
                let x = stats.clicks[[i, j]];
                sum += S::of_count(x) / (S::of_count(y) * b);
                shown_slots += 1;
            }
            Ok(if shown_slots == 0 {
                S::zero()
            } else {
                sum / S::of_count(shown_slots)
            })
        })
        .collect()
}
