//! Simulation and verification toolkit for multi-armed-bandit mechanisms in
//! multi-slot pay-per-click auctions.
//!
//! The crate runs allocation rules over sampled click realizations, prices
//! them by counterfactual replay along each agent's bid axis, checks the
//! monotonicity / separation / fairness properties that truthful rules must
//! have by toggling realization bits, and measures welfare regret against
//! the known-CTR optimal assignment.
//!
//! All numeric code is generic over [`Scalar`]; the aliases at the crate
//! root fix it to `f64`, which is what the CLI uses.

pub mod error;
pub mod format;
pub mod mechanisms;
pub mod model;
pub mod payments;
pub mod regret;
pub mod rng;
pub mod scalar;
pub mod verifier;

pub use error::{AuctionError, Result};
pub use mechanisms::{
    default_exploration_rounds, estimate_alpha, run, AnyMechanism, ClickStats, Dims,
    ExploreExploitSeparable, GreedyAdaptiveNaive, Mechanism, MechanismKind, MechanismSpec,
    StrongPointwiseFixedSlots,
};
pub use model::{
    count_clicks, sample_realization, AllocationRound, AuctionConfig, BidProfile, CtrModel,
    Realization, Regime, RunTrace,
};
pub use scalar::Scalar;

/// Bid profile over `f64`.
pub type Bids = model::BidProfile<f64>;
/// CTR model over `f64`.
pub type Ctr = model::CtrModel<f64>;
/// Run trace over `f64`.
pub type Trace = model::RunTrace<f64>;
/// Built-in mechanism over `f64`.
pub type Mech = mechanisms::AnyMechanism<f64>;
/// Explore-then-exploit rule over `f64`.
pub type ExploreExploit = mechanisms::ExploreExploitSeparable<f64>;
/// Bid-axis profile of click counts over `f64`.
pub type ClickProfile = payments::BidAxisProfile<f64, u64>;
/// Regret sweep result over `f64`.
pub type Sweep = regret::SweepResult<f64>;
