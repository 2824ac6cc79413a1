//! Welfare regret against the known-CTR optimum and the Monte Carlo sweep
//! used to estimate how regret scales with the horizon.

mod assignment;
mod fit;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

pub use assignment::{assignment_value, max_weight_assignment, separable_assignment, welfare_weights, Assignment};
pub use fit::{fit_power_law, PowerFit};

use crate::error::{AuctionError, Result};
use crate::mechanisms::{run, Dims, Mechanism, MechanismSpec};
use crate::model::{sample_realization, AllocationRound, AuctionConfig, BidProfile, CtrModel, Regime};
use crate::rng::{derive_seed, instance_rng};
use crate::scalar::Scalar;

/// Best expected single-round welfare `max_A sum_ij A_ij mu_ij v_i`.
pub fn optimal_welfare<S: Scalar>(ctr: &CtrModel<S>, values: &[S]) -> Result<S> {
    let weights = welfare_weights(ctr.mu(), values)?;
    Ok(max_weight_assignment(&weights)?.value)
}

/// Expected welfare of a fixed allocation history, `sum_t sum_ij A_ij(t) mu_ij v_i`.
pub fn welfare_of<S: Scalar>(allocations: &[AllocationRound], mu: &Array2<S>, values: &[S]) -> S {
    allocations
        .iter()
        .map(|round| round.pairs().map(|(i, j)| mu[[i, j]] * values[i]).sum::<S>())
        .sum()
}

/// Welfare of `mechanism` averaged over `realizations` sampled draws.
pub fn expected_achieved_welfare<S, M>(
    mechanism: &M,
    ctr: &CtrModel<S>,
    bids: &BidProfile<S>,
    regime: Regime,
    realizations: usize,
    seed: u64,
) -> Result<S>
where
    S: Scalar,
    M: Mechanism<S>,
{
    if realizations == 0 {
        return Err(AuctionError::InvalidConfig("need at least one realization".into()));
    }
    let dims = mechanism.dims();
    let values = bids.values().unwrap_or(bids.bids());
    let mut total = S::zero();
    for r in 0..realizations {
        let config = AuctionConfig::new(dims.agents, dims.slots, dims.horizon, regime, derive_seed(seed, 0, r as u64))?;
        let rho = sample_realization(ctr, &config, config.seed)?;
        let history = run(mechanism, bids.bids(), &rho)?;
        total += welfare_of(&history.allocations, ctr.mu(), values);
    }
    Ok(total / S::of_count(realizations as u64))
}

/// Regret of one run on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretSample<S> {
    pub horizon: usize,
    pub instance: usize,
    pub optimal: S,
    pub achieved: S,
    pub regret: S,
}

/// Three agents, two slots and truthful bids on which the fixed-slot rule
/// loses a constant amount of welfare every round.
///
/// Agents 0 and 1 keep slots 0 and 1, but the swapped assignment is worth
/// more: `mu[0][0] b0 + mu[1][1] b1 = 0.5 < mu[0][1] b0 + mu[1][0] b1 = 1.15`.
pub fn adversarial_linear_regret_instance<S: Scalar>() -> (CtrModel<S>, BidProfile<S>) {
    let s = S::of;
    let ctr = CtrModel::from_rows(&[
        vec![s(0.3), s(0.25)],
        vec![s(0.9), s(0.2)],
        vec![s(0.1), s(0.05)],
    ])
    .expect("valid CTR table");
    let bids = BidProfile::truthful(vec![s(1.0), s(1.0), s(0.5)]).expect("valid bids");
    (ctr, bids)
}

/// Per-round welfare lost by keeping agents 0 and 1 in slots 0 and 1 instead
/// of swapping them, `mu01 b0 + mu10 b1 - mu00 b0 - mu11 b1`.
pub fn swap_gap<S: Scalar>(ctr: &CtrModel<S>, bids: &[S]) -> S {
    let mu = ctr.mu();
    (mu[[0, 1]] * bids[0] + mu[[1, 0]] * bids[1]) - (mu[[0, 0]] * bids[0] + mu[[1, 1]] * bids[1])
}

/// Random separable instance with truthful bids.
#[derive(Debug, Clone)]
pub struct RandomInstance<S> {
    pub ctr: CtrModel<S>,
    pub bids: BidProfile<S>,
}

/// Sampling ranges of random separable instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceRanges {
    /// `alpha_i ~ U[lo, hi)`.
    pub alpha: (f64, f64),
    /// `beta_j ~ U(lo, hi]`, then sorted non-increasing.
    pub beta: (f64, f64),
    /// Values `v_i ~ U[0, value_scale)`.
    pub value_scale: f64,
}

impl Default for InstanceRanges {
    fn default() -> Self {
        Self {
            alpha: (0.0, 1.0),
            beta: (0.0, 1.0),
            value_scale: 10.0,
        }
    }
}

/// Draws `alpha`, `beta` and values from `ranges`.
pub fn random_separable_instance<S: Scalar>(agents: usize, slots: usize, ranges: &InstanceRanges, seed: u64) -> Result<RandomInstance<S>> {
    let mut rng = instance_rng(seed);
    let (a_lo, a_hi) = ranges.alpha;
    let (b_lo, b_hi) = ranges.beta;
    let alpha: Vec<S> = (0..agents).map(|_| S::of(a_lo + (a_hi - a_lo) * rng.random::<f64>())).collect();
    let mut beta: Vec<f64> = (0..slots).map(|_| b_hi - (b_hi - b_lo) * rng.random::<f64>()).collect();
    beta.sort_by(|a, b| b.total_cmp(a));
    let values: Vec<S> = (0..agents).map(|_| S::of(ranges.value_scale * rng.random::<f64>())).collect();
    Ok(RandomInstance {
        ctr: CtrModel::separable(alpha, beta.into_iter().map(S::of).collect())?,
        bids: BidProfile::truthful(values)?,
    })
}

/// Settings of a regret sweep over random separable instances.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub agents: usize,
    pub slots: usize,
    pub horizons: Vec<usize>,
    pub instances: usize,
    pub master_seed: u64,
    pub ranges: InstanceRanges,
    /// Realizations averaged per instance.
    pub realizations: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            agents: 4,
            slots: 2,
            horizons: vec![1_000, 3_000, 10_000, 30_000, 100_000],
            instances: 200,
            master_seed: 0,
            ranges: InstanceRanges::default(),
            realizations: 8,
        }
    }
}

/// Aggregated regret for one horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<S> {
    pub horizon: usize,
    pub instances: usize,
    pub avg_regret: S,
    pub worst_regret: S,
}

/// Rows per horizon, the raw samples and the log-log fits.
#[derive(Debug, Clone)]
pub struct SweepResult<S> {
    pub rows: Vec<SweepRow<S>>,
    pub samples: Vec<RegretSample<S>>,
    pub avg_fit: Option<PowerFit>,
    pub worst_fit: Option<PowerFit>,
}

/// Regret of the mechanism built from `spec` on random instance `instance`,
/// with achieved welfare averaged over `cfg.realizations` realizations.
pub fn regret_sample<S: Scalar>(spec: &MechanismSpec, cfg: &SweepConfig, horizon: usize, instance: usize) -> Result<RegretSample<S>> {
    // The same instances are reused at every horizon.
    let instance_seed = derive_seed(cfg.master_seed, 0, instance as u64);
    let inst = random_separable_instance::<S>(cfg.agents, cfg.slots, &cfg.ranges, instance_seed)?;
    let dims = Dims::new(cfg.agents, cfg.slots, horizon)?;
    let mechanism = spec.build(dims, inst.ctr.beta())?;
    let achieved = expected_achieved_welfare(&mechanism, &inst.ctr, &inst.bids, Regime::Separable, cfg.realizations, derive_seed(instance_seed, 1, 0))?;
    let values = inst.bids.bids();
    let optimal = S::of_count(horizon as u64) * separable_assignment(&inst.ctr, values)?.value;
    Ok(RegretSample {
        horizon,
        instance,
        optimal,
        achieved,
        regret: optimal - achieved,
    })
}

/// Runs `cfg.instances` random instances per horizon in parallel on the
/// current rayon pool and fits `ln regret = e ln T + c` to the averages and
/// to the worst cases.
pub fn monte_carlo_sweep<S: Scalar>(spec: &MechanismSpec, cfg: &SweepConfig) -> Result<SweepResult<S>> {
    if cfg.instances == 0 || cfg.horizons.is_empty() {
        return Err(AuctionError::InvalidConfig("sweep needs at least one horizon and one instance".into()));
    }
    let jobs: Vec<(usize, usize)> = cfg
        .horizons
        .iter()
        .flat_map(|&t| (0..cfg.instances).map(move |n| (t, n)))
        .collect();
    let samples = jobs
        .into_par_iter()
        .map(|(t, n)| regret_sample::<S>(spec, cfg, t, n))
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<SweepRow<S>> = cfg
        .horizons
        .iter()
        .map(|&horizon| {
            let regrets: Vec<S> = samples.iter().filter(|s| s.horizon == horizon).map(|s| s.regret).collect();
            let avg = regrets.iter().copied().sum::<S>() / S::of_count(regrets.len() as u64);
            let worst = regrets.iter().copied().fold(S::neg_infinity(), S::max);
            SweepRow {
                horizon,
                instances: regrets.len(),
                avg_regret: avg,
                worst_regret: worst,
            }
        })
        .collect();

    let fit = |pick: fn(&SweepRow<S>) -> S| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.horizon as f64, pick(r).as_f64())).collect();
        fit_power_law(&pts).ok()
    };
    let avg_fit = fit(|r| r.avg_regret);
    let worst_fit = fit(|r| r.worst_regret);
    Ok(SweepResult {
        rows,
        samples,
        avg_fit,
        worst_fit,
    })
}
