use super::{Dims, Mechanism};
use crate::error::{AuctionError, Result};
use crate::model::{AllocationRound, ObservedClick};
use crate::scalar::Scalar;

/// Every agent owns a fixed home slot; in each slot the highest bidder among
/// the agents homed there is shown (ties to the lower index).
///
/// Bids decide only who gets an impression, never where, and clicks are
/// ignored, so the rule is strongly pointwise monotone and has no
/// influential click bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongPointwiseFixedSlots {
    dims: Dims,
    home: Vec<usize>,
}

impl StrongPointwiseFixedSlots {
    /// Home slot of agent `i` is `i mod m`.
    pub fn new(dims: Dims) -> Self {
        let home = (0..dims.agents).map(|i| i % dims.slots).collect();
        Self { dims, home }
    }

    pub fn with_home_slots(dims: Dims, home: Vec<usize>) -> Result<Self> {
        if home.len() != dims.agents {
            return Err(AuctionError::DimensionMismatch {
                what: "home slots",
                expected: dims.agents,
                got: home.len(),
            });
        }
        if let Some(&j) = home.iter().find(|&&j| j >= dims.slots) {
            return Err(AuctionError::InvalidConfig(format!("home slot {j} does not exist")));
        }
        Ok(Self { dims, home })
    }

    pub fn home_slots(&self) -> &[usize] {
        &self.home
    }
}

impl<S: Scalar> Mechanism<S> for StrongPointwiseFixedSlots {
    type State = ();

    fn name(&self) -> &str {
        "strong-pointwise-fixed-slots"
    }

    fn dims(&self) -> Dims {
        self.dims
    }

    fn init(&self) {}

    fn allocate(&self, _state: &(), bids: &[S], t: usize) -> Result<AllocationRound> {
        self.dims.check_round(t)?;
        self.dims.check_bids(bids)?;
        let mut shown: Vec<Option<usize>> = vec![None; self.dims.slots];
        for (agent, &slot) in self.home.iter().enumerate() {
            match shown[slot] {
                Some(best) if bids[best] >= bids[agent] => {}
                _ => shown[slot] = Some(agent),
            }
        }
        AllocationRound::from_slot_order(self.dims.agents, &shown)
    }

    fn observe(&self, _state: &mut (), _t: usize, _round: &AllocationRound, _clicks: &[ObservedClick]) {}
}
