//! Allocation rules and the replay engine that drives them.
//!
//! A mechanism is a deterministic function of the bids, the round index and
//! the click bits it has observed so far. The [`Mechanism`] trait makes the
//! "observed so far" part explicit: the engine feeds each round's observed
//! bits to [`Mechanism::observe`], and nothing else about the realization
//! ever reaches the rule.

mod explore_exploit;
mod fixed_slots;
mod greedy;
mod stats;

use std::fmt;

use ndarray::Array2;

pub use explore_exploit::{ExploreExploitSeparable, ExploreState};
pub use fixed_slots::StrongPointwiseFixedSlots;
pub use greedy::GreedyAdaptiveNaive;
pub use stats::{estimate_alpha, ClickStats};

use crate::error::{AuctionError, Result};
use crate::model::{AllocationRound, ObservedClick, Realization};
use crate::scalar::Scalar;

/// Dimensions a mechanism instance is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub agents: usize,
    pub slots: usize,
    pub horizon: usize,
}

impl Dims {
    pub fn new(agents: usize, slots: usize, horizon: usize) -> Result<Self> {
        if slots == 0 || agents < slots || horizon == 0 {
            return Err(AuctionError::InvalidConfig(format!(
                "need k >= m >= 1 and T >= 1, got k = {agents}, m = {slots}, T = {horizon}"
            )));
        }
        Ok(Self {
            agents,
            slots,
            horizon,
        })
    }

    pub(crate) fn check_round(&self, t: usize) -> Result<()> {
        if t >= self.horizon {
            return Err(AuctionError::RoundOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    pub(crate) fn check_bids<S>(&self, bids: &[S]) -> Result<()> {
        if bids.len() != self.agents {
            return Err(AuctionError::DimensionMismatch {
                what: "bid vector",
                expected: self.agents,
                got: bids.len(),
            });
        }
        Ok(())
    }
}

/// Deterministic multi-round allocation rule.
pub trait Mechanism<S: Scalar>: Sync {
    /// Whatever the rule remembers from observed clicks.
    type State: Clone + Send;

    fn name(&self) -> &str;

    fn dims(&self) -> Dims;

    fn init(&self) -> Self::State;

    /// Allocation for round `t` (0-based) given the observations so far.
    fn allocate(&self, state: &Self::State, bids: &[S], t: usize) -> Result<AllocationRound>;

    /// Records the bits observed at the end of round `t`.
    fn observe(&self, state: &mut Self::State, t: usize, round: &AllocationRound, clicks: &[ObservedClick]);

    /// CTR estimate the rule has learned, for payments in expectation.
    fn learned_ctr(&self, _state: &Self::State) -> Option<Array2<S>> {
        None
    }
}

/// Allocation history of one replay plus the rule's final state.
#[derive(Debug, Clone)]
pub struct Run<St> {
    pub allocations: Vec<AllocationRound>,
    pub state: St,
}

impl<St> Run<St> {
    /// Slot held by `agent` in every round.
    pub fn slots_of(&self, agent: usize) -> Vec<Option<usize>> {
        self.allocations.iter().map(|a| a.slot(agent)).collect()
    }
}

/// Replays `mechanism` for all rounds of `rho`, revealing only allocated bits.
pub fn run<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &[S], rho: &Realization) -> Result<Run<M::State>> {
    let dims = mechanism.dims();
    dims.check_bids(bids)?;
    check_realization(dims, rho)?;
    let mut state = mechanism.init();
    let mut allocations = Vec::with_capacity(dims.horizon);
    let mut clicks = Vec::with_capacity(dims.slots);
    for t in 0..dims.horizon {
        let round = mechanism.allocate(&state, bids, t)?;
        if round.agents() != dims.agents || round.slots() != dims.slots {
            return Err(AuctionError::InvalidAllocation(format!(
                "{} produced a {}x{} round for a {}x{} auction",
                mechanism.name(),
                round.agents(),
                round.slots(),
                dims.agents,
                dims.slots
            )));
        }
        clicks.clear();
        clicks.extend(round.pairs().map(|(agent, slot)| ObservedClick {
            round: t,
            agent,
            slot,
            clicked: rho.get(t, agent, slot),
        }));
        mechanism.observe(&mut state, t, &round, &clicks);
        allocations.push(round);
    }
    Ok(Run { allocations, state })
}

pub(crate) fn check_realization(dims: Dims, rho: &Realization) -> Result<()> {
    for (what, expected, got) in [
        ("realization rounds", dims.horizon, rho.horizon()),
        ("realization agents", dims.agents, rho.agents()),
        ("realization slots", dims.slots, rho.slots()),
    ] {
        if expected != got {
            return Err(AuctionError::DimensionMismatch { what, expected, got });
        }
    }
    Ok(())
}

/// Exploration length `ceil(T^(2/3))`, computed exactly in integers.
pub fn default_exploration_rounds(horizon: usize) -> usize {
    let target = (horizon as u128) * (horizon as u128);
    let mut e = (horizon as f64).powf(2.0 / 3.0).ceil() as u128;
    while e > 0 && (e - 1).pow(3) >= target {
        e -= 1;
    }
    while e.pow(3) < target {
        e += 1;
    }
    e as usize
}

/// Top `count` agents by `score`, ties broken towards the lower index.
///
/// With `tie_epsilon > 0` scores are compared on a grid of that width, so
/// scores closer than the grid resolution rank by index.
pub(crate) fn rank_agents<S: Scalar>(scores: &[S], count: usize, tie_epsilon: S) -> Vec<usize> {
    let key = |s: S| {
        if tie_epsilon > S::zero() {
            (s / tie_epsilon).floor()
        } else {
            s
        }
    };
    let keys: Vec<S> = scores.iter().map(|&s| key(s)).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        keys[b]
            .partial_cmp(&keys[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(count);
    order
}

/// Which allocation rule to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MechanismKind {
    ExploreExploitSeparable,
    StrongPointwiseFixedSlots,
    GreedyAdaptiveNaive,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 3] = [
        MechanismKind::ExploreExploitSeparable,
        MechanismKind::StrongPointwiseFixedSlots,
        MechanismKind::GreedyAdaptiveNaive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::ExploreExploitSeparable => "explore-exploit-separable",
            MechanismKind::StrongPointwiseFixedSlots => "strong-pointwise-fixed-slots",
            MechanismKind::GreedyAdaptiveNaive => "greedy-adaptive-naive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL.into_iter().find(|k| {
            k.name() == norm || format!("{k:?}").eq_ignore_ascii_case(s)
        })
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Declarative description of a mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    /// `None` means `ceil(T^(2/3))`.
    pub exploration_rounds: Option<usize>,
    pub tie_epsilon: f64,
}

pub const DEFAULT_TIE_EPSILON: f64 = 1e-12;

impl MechanismSpec {
    pub fn new(kind: MechanismKind) -> Self {
        Self {
            kind,
            exploration_rounds: None,
            tie_epsilon: DEFAULT_TIE_EPSILON,
        }
    }

    pub fn exploration_rounds(&self, horizon: usize) -> usize {
        self.exploration_rounds
            .unwrap_or_else(|| default_exploration_rounds(horizon))
    }

    /// Instantiates the rule. `beta` is required by the separable rule only.
    pub fn build<S: Scalar>(&self, dims: Dims, beta: Option<&[S]>) -> Result<AnyMechanism<S>> {
        if !(self.tie_epsilon >= 0.0 && self.tie_epsilon.is_finite()) {
            return Err(AuctionError::InvalidValue {
                field: "tie_epsilon",
                reason: format!("{} is not a finite non-negative number", self.tie_epsilon),
            });
        }
        let eps = S::of(self.tie_epsilon);
        Ok(match self.kind {
            MechanismKind::ExploreExploitSeparable => {
                let beta = beta.ok_or_else(|| {
                    AuctionError::InvalidConfig("the separable rule needs slot factors beta".into())
                })?;
                let rounds = self.exploration_rounds(dims.horizon);
                AnyMechanism::ExploreExploit(
                    ExploreExploitSeparable::new(dims, beta.to_vec(), rounds)?.with_tie_epsilon(eps),
                )
            }
            MechanismKind::StrongPointwiseFixedSlots => {
                AnyMechanism::FixedSlots(StrongPointwiseFixedSlots::new(dims))
            }
            MechanismKind::GreedyAdaptiveNaive => {
                AnyMechanism::Greedy(GreedyAdaptiveNaive::new(dims).with_tie_epsilon(eps))
            }
        })
    }
}

/// Any of the built-in rules behind one type.
#[derive(Debug, Clone)]
pub enum AnyMechanism<S> {
    ExploreExploit(ExploreExploitSeparable<S>),
    FixedSlots(StrongPointwiseFixedSlots),
    Greedy(GreedyAdaptiveNaive<S>),
}

#[derive(Debug, Clone)]
pub enum AnyState<S> {
    ExploreExploit(ExploreState<S>),
    FixedSlots,
    Greedy(ClickStats),
}

impl<S: Scalar> AnyMechanism<S> {
    pub fn kind(&self) -> MechanismKind {
        match self {
            AnyMechanism::ExploreExploit(_) => MechanismKind::ExploreExploitSeparable,
            AnyMechanism::FixedSlots(_) => MechanismKind::StrongPointwiseFixedSlots,
            AnyMechanism::Greedy(_) => MechanismKind::GreedyAdaptiveNaive,
        }
    }
}

impl<S: Scalar> Mechanism<S> for AnyMechanism<S> {
    type State = AnyState<S>;

    fn name(&self) -> &str {
        match self {
            AnyMechanism::ExploreExploit(m) => Mechanism::<S>::name(m),
            AnyMechanism::FixedSlots(m) => Mechanism::<S>::name(m),
            AnyMechanism::Greedy(m) => Mechanism::<S>::name(m),
        }
    }

    fn dims(&self) -> Dims {
        match self {
            AnyMechanism::ExploreExploit(m) => Mechanism::<S>::dims(m),
            AnyMechanism::FixedSlots(m) => Mechanism::<S>::dims(m),
            AnyMechanism::Greedy(m) => Mechanism::<S>::dims(m),
        }
    }

    fn init(&self) -> Self::State {
        match self {
            AnyMechanism::ExploreExploit(m) => AnyState::ExploreExploit(m.init()),
            AnyMechanism::FixedSlots(_) => AnyState::FixedSlots,
            AnyMechanism::Greedy(m) => AnyState::Greedy(m.init()),
        }
    }

    fn allocate(&self, state: &Self::State, bids: &[S], t: usize) -> Result<AllocationRound> {
        match (self, state) {
            (AnyMechanism::ExploreExploit(m), AnyState::ExploreExploit(s)) => m.allocate(s, bids, t),
            (AnyMechanism::FixedSlots(m), AnyState::FixedSlots) => m.allocate(&(), bids, t),
            (AnyMechanism::Greedy(m), AnyState::Greedy(s)) => m.allocate(s, bids, t),
            _ => unreachable!("state does not belong to this mechanism"),
        }
    }

    fn observe(&self, state: &mut Self::State, t: usize, round: &AllocationRound, clicks: &[ObservedClick]) {
        match (self, state) {
            (AnyMechanism::ExploreExploit(m), AnyState::ExploreExploit(s)) => m.observe(s, t, round, clicks),
            (AnyMechanism::FixedSlots(m), AnyState::FixedSlots) => {
                Mechanism::<S>::observe(m, &mut (), t, round, clicks)
            }
            (AnyMechanism::Greedy(m), AnyState::Greedy(s)) => m.observe(s, t, round, clicks),
            _ => unreachable!("state does not belong to this mechanism"),
        }
    }

    fn learned_ctr(&self, state: &Self::State) -> Option<Array2<S>> {
        match (self, state) {
            (AnyMechanism::ExploreExploit(m), AnyState::ExploreExploit(s)) => m.learned_ctr(s),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exploration_length_is_exact_ceiling() {
        assert_eq!(default_exploration_rounds(1), 1);
        assert_eq!(default_exploration_rounds(8), 4);
        assert_eq!(default_exploration_rounds(27), 9);
        assert_eq!(default_exploration_rounds(28), 10);
        assert_eq!(default_exploration_rounds(1000), 100);
        assert_eq!(default_exploration_rounds(1001), 101);
        for t in 1..3000usize {
            let e = default_exploration_rounds(t) as u128;
            let t2 = (t as u128).pow(2);
            assert!(e.pow(3) >= t2 && (e - 1).pow(3) < t2, "T = {t}");
        }
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        assert_eq!(rank_agents(&[1.0, 2.0, 2.0, 0.5], 3, 0.0), vec![1, 2, 0]);
        assert_eq!(rank_agents(&[3.0e-13, 6.0e-13, 0.0], 2, 1e-12), vec![0, 1]);
        assert_eq!(rank_agents(&[3.0e-13, 6.0e-13, 0.0], 2, 0.0), vec![1, 0]);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in MechanismKind::ALL {
            assert_eq!(MechanismKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(
            MechanismKind::parse("ExploreExploitSeparable"),
            Some(MechanismKind::ExploreExploitSeparable)
        );
        assert_eq!(MechanismKind::parse("vcg"), None);
    }

    #[test]
    fn separable_rule_needs_beta() {
        let dims = Dims::new(2, 1, 4).unwrap();
        let spec = MechanismSpec::new(MechanismKind::ExploreExploitSeparable);
        assert!(spec.build::<f64>(dims, None).is_err());
        assert!(spec.build::<f64>(dims, Some(&[0.5])).is_ok());
    }
}
