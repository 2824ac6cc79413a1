//! Brute-force checks of the monotonicity, separation and fairness
//! properties that characterize truthful allocation rules.
//!
//! Every check samples trials `(b, rho)` from a [`VerifierConfig`], replays
//! the mechanism under counterfactual bids or toggled click bits, and
//! reports the first violation it finds. A pass means no counterexample
//! turned up within the trial budget; it is never a proof. Failing verdicts
//! carry a [`Counterexample`] that [`Counterexample::replay`] re-checks from
//! its recorded inputs alone.

mod checks;
mod influence;

use std::fmt;

use rand::Rng;

pub use checks::{
    check_clickwise_monotone, check_empirical_truthful, check_fairness, check_payment_computability,
    check_precedence_necessary_pair, check_strong_pointwise, check_weak_pointwise, check_weakly_separated,
    clickwise_violation, fairness_violation, pointwise_violation, separation_violation, truthful_gain, utility,
    verify_all,
};
pub use influence::{
    influence_report, influential_set, strong_influences, InfluenceReport, Pair, RoundInfluence, StrongInfluence,
    DEFAULT_INFLUENCE_CAP,
};

use crate::error::Result;
use crate::format::sig12;
use crate::mechanisms::{Dims, MechanismKind};
use crate::model::{sample_realization, AuctionConfig, CtrModel, Realization, Regime};
use crate::payments::IntegralConfig;
use crate::rng::{derive_seed, instance_rng};
use crate::scalar::Scalar;

/// Property a check tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    StrongPointwise,
    WeakPointwise,
    WeaklySeparated,
    ClickwiseMonotone,
    Fair,
    EmpiricalTruthful,
    PaymentComputable,
    PrecedenceNecessaryPair,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::StrongPointwise,
        Property::WeakPointwise,
        Property::WeaklySeparated,
        Property::ClickwiseMonotone,
        Property::Fair,
        Property::EmpiricalTruthful,
        Property::PaymentComputable,
        Property::PrecedenceNecessaryPair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::StrongPointwise => "strong-pointwise",
            Property::WeakPointwise => "weak-pointwise",
            Property::WeaklySeparated => "weakly-separated",
            Property::ClickwiseMonotone => "clickwise-monotone",
            Property::Fair => "fair",
            Property::EmpiricalTruthful => "empirical-truthful",
            Property::PaymentComputable => "payment-computable",
            Property::PrecedenceNecessaryPair => "precedence-necessary-pair",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed,
    /// The check found nothing it could test on the sampled trials.
    Inconclusive,
}

/// How separation between two bids is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparationMode {
    /// Every pair in `N(b_i)` is still allocated in the same round under `b_i^+`.
    #[default]
    AllocationPreserving,
    /// `N(b_i) ⊆ N(b_i^+)` as sets.
    Inclusion,
}

/// Which payment rule prices utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthMode {
    /// Realized clicks and click-integral payments.
    ExPost,
    /// Expected clicks over the learned CTRs (true CTRs if the rule learns none).
    Expected,
}

impl TruthMode {
    pub fn name(self) -> &'static str {
        match self {
            TruthMode::ExPost => "ex-post",
            TruthMode::Expected => "expected",
        }
    }
}

/// The specific violation a counterexample exhibits.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<S> {
    /// Agent's slot in `round` at `low` is not matched (strong) or bettered (weak) at `high`.
    Pointwise { strong: bool, low: S, high: S, round: usize },
    /// `pair` belongs to `N(low)` in `round` but escapes at `high`.
    Separation {
        mode: SeparationMode,
        low: S,
        high: S,
        round: usize,
        pair: Pair,
        cap: usize,
    },
    /// Toggling `toggled` moves the agent's expected clicks in opposite directions at the two bids.
    Fairness { low: S, high: S, toggled: StrongInfluence },
    /// More clicks at `low` than at `high`.
    Clickwise { low: S, high: S, clicks_low: u64, clicks_high: u64 },
    /// Bidding `deviation` instead of the value gains `gain`.
    Truthful {
        mode: TruthMode,
        deviation: S,
        gain: S,
        tolerance: f64,
        integral: IntegralConfig,
    },
    /// Payments change by `difference` when unobserved bits are redrawn with `resample_seed`.
    Computability {
        mode: TruthMode,
        resample_seed: u64,
        difference: S,
        tolerance: f64,
        integral: IntegralConfig,
    },
}

/// Replayable record of a violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample<S> {
    pub property: Property,
    pub trial: usize,
    pub seed: u64,
    pub agent: usize,
    pub bids: Vec<S>,
    pub ctr: CtrModel<S>,
    pub rho: Realization,
    pub witness: Witness<S>,
}

impl<S: Scalar> Counterexample<S> {
    /// Round the violation is located in, where it has one.
    pub fn round(&self) -> Option<usize> {
        match &self.witness {
            Witness::Pointwise { round, .. } | Witness::Separation { round, .. } => Some(*round),
            Witness::Fairness { toggled, .. } => Some(toggled.earliest),
            _ => None,
        }
    }

    /// Toggled bit `(round, agent, slot)`, for fairness violations.
    pub fn toggled(&self) -> Option<(usize, usize, usize)> {
        match &self.witness {
            Witness::Fairness { toggled, .. } => Some((toggled.round, toggled.pair.0, toggled.pair.1)),
            _ => None,
        }
    }

    /// Deviating bid of the agent.
    pub fn deviation(&self) -> S {
        match &self.witness {
            Witness::Pointwise { high, .. }
            | Witness::Separation { high, .. }
            | Witness::Fairness { high, .. }
            | Witness::Clickwise { high, .. } => *high,
            Witness::Truthful { deviation, .. } => *deviation,
            Witness::Computability { .. } => self.bids[self.agent],
        }
    }

    /// Re-runs the violation from the recorded inputs; `true` if it reproduces.
    pub fn replay<M: crate::mechanisms::Mechanism<S>>(&self, mechanism: &M) -> Result<bool> {
        checks::replay(mechanism, self)
    }
}

/// Verdict of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyVerdict<S> {
    pub property: Property,
    pub outcome: Outcome,
    pub trials: usize,
    /// Number of individual comparisons made.
    pub comparisons: usize,
    pub counterexample: Option<Box<Counterexample<S>>>,
    pub note: String,
}

impl<S> PropertyVerdict<S> {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Passed
    }

    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Failed
    }
}

/// Where the CTR matrix of each trial comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CtrSource<S> {
    Fixed(CtrModel<S>),
    /// Uniform entries sorted non-increasing along each row.
    RowMonotone,
    /// Independent uniform entries.
    Uniform,
    /// Uniform `alpha` with the given slot factors.
    Separable { beta: Vec<S> },
}

/// Trial budget and sampling knobs shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifierConfig<S> {
    pub trials: usize,
    pub seed: u64,
    pub regime: Regime,
    pub ctr: CtrSource<S>,
    /// Bids are drawn from `U[0, max_bid)`.
    pub max_bid: S,
    /// Log-spaced grid points per agent, on top of 0 and the factual bid.
    pub grid_points: usize,
    /// Deviations per agent in the truthfulness check.
    pub deviations: usize,
    pub influence_cap: usize,
    pub separation: SeparationMode,
    /// Largest utility gain from deviating that still counts as truthful.
    pub truth_tolerance: f64,
    pub integral: IntegralConfig,
}

impl<S: Scalar> Default for VerifierConfig<S> {
    fn default() -> Self {
        Self {
            trials: 50,
            seed: 0,
            regime: Regime::Precedence,
            ctr: CtrSource::RowMonotone,
            max_bid: S::of(10.0),
            grid_points: 20,
            deviations: 50,
            influence_cap: DEFAULT_INFLUENCE_CAP,
            separation: SeparationMode::AllocationPreserving,
            truth_tolerance: 1e-9,
            integral: IntegralConfig::fine(),
        }
    }
}

/// One sampled game.
#[derive(Debug, Clone)]
pub struct Trial<S> {
    pub index: usize,
    pub seed: u64,
    pub ctr: CtrModel<S>,
    pub bids: Vec<S>,
    pub rho: Realization,
}

impl<S: Scalar> VerifierConfig<S> {
    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Samples trial `index` for an auction of size `dims`.
    pub fn trial(&self, dims: Dims, index: usize) -> Result<Trial<S>> {
        let seed = derive_seed(self.seed, 0, index as u64);
        let mut rng = instance_rng(seed);
        let (k, m) = (dims.agents, dims.slots);
        let mut unit = || S::of(rng.random::<f64>());
        let ctr = match &self.ctr {
            CtrSource::Fixed(ctr) => ctr.clone(),
            CtrSource::Uniform => CtrModel::new(ndarray::Array2::from_shape_fn((k, m), |_| unit()))?,
            CtrSource::RowMonotone => {
                let rows: Vec<Vec<S>> = (0..k)
                    .map(|_| {
                        let mut row: Vec<S> = (0..m).map(|_| unit()).collect();
                        row.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
                        row
                    })
                    .collect();
                CtrModel::from_rows(&rows)?
            }
            CtrSource::Separable { beta } => CtrModel::separable((0..k).map(|_| unit()).collect(), beta.clone())?,
        };
        let bids: Vec<S> = (0..k).map(|_| S::of(rng.random::<f64>()) * self.max_bid).collect();
        let config = AuctionConfig::new(k, m, dims.horizon, self.regime, derive_seed(seed, 1, 0))?;
        let rho = sample_realization(&ctr, &config, config.seed)?;
        Ok(Trial {
            index,
            seed,
            ctr,
            bids,
            rho,
        })
    }

    /// Sorted bid grid for one agent: 0, the factual bid and `grid_points`
    /// log-spaced points on `[max_bid / 1000, 2 max_bid]`.
    pub fn bid_grid(&self, factual: S) -> Vec<S> {
        let lo = (self.max_bid.as_f64() / 1000.0).ln();
        let hi = (2.0 * self.max_bid.as_f64()).ln();
        let n = self.grid_points;
        let mut grid = vec![S::zero(), factual];
        grid.extend((0..n).map(|q| {
            let f = if n > 1 { q as f64 / (n - 1) as f64 } else { 1.0 };
            S::of((lo + f * (hi - lo)).exp())
        }));
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        grid.dedup();
        grid
    }
}

/// Properties a built-in rule is expected to have, and how it is priced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claims {
    pub properties: Vec<Property>,
    pub truth: TruthMode,
}

impl Claims {
    pub fn of(kind: MechanismKind) -> Self {
        use Property::*;
        match kind {
            MechanismKind::StrongPointwiseFixedSlots => Self {
                properties: vec![
                    StrongPointwise,
                    WeakPointwise,
                    WeaklySeparated,
                    ClickwiseMonotone,
                    EmpiricalTruthful,
                    PaymentComputable,
                    PrecedenceNecessaryPair,
                ],
                truth: TruthMode::ExPost,
            },
            MechanismKind::ExploreExploitSeparable | MechanismKind::GreedyAdaptiveNaive => Self {
                properties: vec![
                    WeakPointwise,
                    WeaklySeparated,
                    ClickwiseMonotone,
                    Fair,
                    EmpiricalTruthful,
                    PaymentComputable,
                    PrecedenceNecessaryPair,
                ],
                truth: TruthMode::Expected,
            },
        }
    }

    pub fn claims(&self, property: Property) -> bool {
        self.properties.contains(&property)
    }
}

/// All verdicts for one mechanism.
#[derive(Debug, Clone)]
pub struct VerificationReport<S> {
    pub mechanism: String,
    pub claims: Claims,
    pub verdicts: Vec<PropertyVerdict<S>>,
}

impl<S> VerificationReport<S> {
    /// Claimed properties that failed.
    pub fn failed_claims(&self) -> Vec<Property> {
        self.verdicts
            .iter()
            .filter(|v| v.failed() && self.claims.claims(v.property))
            .map(|v| v.property)
            .collect()
    }
}

fn fmt_bits(rho: &Realization) -> String {
    (0..rho.horizon())
        .map(|t| {
            let rows: Vec<String> = (0..rho.agents())
                .map(|i| (0..rho.slots()).map(|j| if rho.get(t, i, j) { '1' } else { '0' }).collect())
                .collect();
            rows.join("/")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

fn fmt_list<S: Scalar>(xs: &[S]) -> String {
    let items: Vec<String> = xs.iter().map(|x| sig12(x.as_f64())).collect();
    format!("[{}]", items.join(", "))
}

impl<S: Scalar> fmt::Display for Counterexample<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = |x: S| sig12(x.as_f64());
        writeln!(f, "  trial = {}", self.trial)?;
        writeln!(f, "  seed = {}", self.seed)?;
        writeln!(f, "  agent = {}", self.agent)?;
        writeln!(f, "  bids = {}", fmt_list(&self.bids))?;
        writeln!(f, "  deviation = {}", g(self.deviation()))?;
        if let Some(round) = self.round() {
            writeln!(f, "  round = {round}")?;
        }
        if let Some((t, i, j)) = self.toggled() {
            writeln!(f, "  toggled = ({t}, {i}, {j})")?;
        }
        let mu: Vec<String> = self.ctr.mu().rows().into_iter().map(|r| fmt_list(&r.to_vec())).collect();
        writeln!(f, "  mu = [{}]", mu.join(", "))?;
        writeln!(f, "  rho = {}", fmt_bits(&self.rho))?;
        let detail = match &self.witness {
            Witness::Pointwise { strong, low, high, round } => format!(
                "{} pointwise: slot at bid {} in round {round} not {} at bid {}",
                if *strong { "strong" } else { "weak" },
                g(*low),
                if *strong { "kept" } else { "kept or improved" },
                g(*high)
            ),
            Witness::Separation { mode, low, high, round, pair, .. } => format!(
                "pair ({}, {}) is i-influential in round {round} at bid {} but {} at bid {}",
                pair.0,
                pair.1,
                g(*low),
                match mode {
                    SeparationMode::AllocationPreserving => "not allocated",
                    SeparationMode::Inclusion => "not i-influential",
                },
                g(*high)
            ),
            Witness::Fairness { low, high, toggled } => format!(
                "toggling ({}, {}) in round {} moves expected clicks in round {} in opposite directions at bids {} and {}",
                toggled.pair.0,
                toggled.pair.1,
                toggled.round,
                toggled.earliest,
                g(*low),
                g(*high)
            ),
            Witness::Clickwise { low, high, clicks_low, clicks_high } => format!(
                "{clicks_low} clicks at bid {} but {clicks_high} at bid {}",
                g(*low),
                g(*high)
            ),
            Witness::Truthful { mode, deviation, gain, .. } => format!(
                "{} utility gains {} by bidding {}",
                mode.name(),
                g(*gain),
                g(*deviation)
            ),
            Witness::Computability { mode, resample_seed, difference, .. } => format!(
                "{} payment moves by {} when unobserved bits are redrawn with seed {resample_seed}",
                mode.name(),
                g(*difference)
            ),
        };
        writeln!(f, "  detail = {detail}")
    }
}

impl<S: Scalar> fmt::Display for PropertyVerdict<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outcome = match self.outcome {
            Outcome::Passed => "passed",
            Outcome::Failed => "FAILED",
            Outcome::Inconclusive => "inconclusive",
        };
        writeln!(f, "[{}]", self.property)?;
        writeln!(f, "outcome = {outcome}")?;
        writeln!(f, "trials = {}", self.trials)?;
        writeln!(f, "comparisons = {}", self.comparisons)?;
        if !self.note.is_empty() {
            writeln!(f, "note = {}", self.note)?;
        }
        if let Some(cx) = &self.counterexample {
            writeln!(f, "counterexample:")?;
            write!(f, "{cx}")?;
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Display for VerificationReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mechanism = {}", self.mechanism)?;
        writeln!(f, "payments = {}", self.claims.truth.name())?;
        for v in &self.verdicts {
            writeln!(f)?;
            let role = if self.claims.claims(v.property) { "claimed" } else { "informational" };
            writeln!(f, "# {role}")?;
            write!(f, "{v}")?;
        }
        let failed = self.failed_claims();
        writeln!(f)?;
        if failed.is_empty() {
            writeln!(f, "summary = all claimed properties hold on the sampled trials")
        } else {
            let names: Vec<&str> = failed.iter().map(|p| p.name()).collect();
            writeln!(f, "summary = claimed properties failed: {}", names.join(", "))
        }
    }
}
