//! The property checks and the instance-level violation finders they share
//! with counterexample replay.

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use super::influence::{influence_report, strong_influences, InfluenceReport, Pair, StrongInfluence};
use super::{
    Claims, Counterexample, CtrSource, Outcome, Property, PropertyVerdict, SeparationMode, Trial, TruthMode,
    VerificationReport, VerifierConfig, Witness,
};
use crate::error::Result;
use crate::mechanisms::{run, Mechanism};
use crate::model::{count_clicks, BidProfile, Realization, Regime};
use crate::payments::{
    click_profile, counterfactual_slots, expected_clicks, payment_ex_post, payment_in_expectation, slot_profile,
    IntegralConfig,
};
use crate::rng::{derive_seed, instance_rng};
use crate::scalar::Scalar;

struct TrialResult<S> {
    violation: Option<Counterexample<S>>,
    comparisons: usize,
    influential: bool,
}

impl<S> TrialResult<S> {
    fn new() -> Self {
        Self {
            violation: None,
            comparisons: 0,
            influential: false,
        }
    }
}

struct Tally<S> {
    violation: Option<Counterexample<S>>,
    comparisons: usize,
    influential: bool,
}

fn run_trials<S, M, F>(mechanism: &M, cfg: &VerifierConfig<S>, per_trial: F) -> Result<Tally<S>>
where
    S: Scalar,
    M: Mechanism<S>,
    F: Fn(&Trial<S>) -> Result<TrialResult<S>> + Sync,
{
    let dims = mechanism.dims();
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|n| per_trial(&cfg.trial(dims, n)?))
        .collect::<Result<Vec<_>>>()?;
    let mut tally = Tally {
        violation: None,
        comparisons: 0,
        influential: false,
    };
    for r in results {
        tally.comparisons += r.comparisons;
        tally.influential |= r.influential;
        if tally.violation.is_none() {
            tally.violation = r.violation;
        }
    }
    Ok(tally)
}

fn verdict<S>(property: Property, cfg: &VerifierConfig<S>, tally: Tally<S>, outcome: Outcome, note: impl Into<String>) -> PropertyVerdict<S> {
    let failed = tally.violation.is_some();
    PropertyVerdict {
        property,
        outcome: if failed { Outcome::Failed } else { outcome },
        trials: cfg.trials,
        comparisons: tally.comparisons,
        counterexample: tally.violation.map(Box::new),
        note: if failed { String::new() } else { note.into() },
    }
}

fn counterexample<S: Scalar>(property: Property, trial: &Trial<S>, agent: usize, rho: Option<Realization>, witness: Witness<S>) -> Counterexample<S> {
    Counterexample {
        property,
        trial: trial.index,
        seed: trial.seed,
        agent,
        bids: trial.bids.clone(),
        ctr: trial.ctr.clone(),
        rho: rho.unwrap_or_else(|| trial.rho.clone()),
        witness,
    }
}

fn profile<S: Scalar>(bids: &[S]) -> Result<BidProfile<S>> {
    BidProfile::new(bids.to_vec())
}

fn slots_at<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &BidProfile<S>, rho: &Realization, agent: usize, x: S) -> Result<Vec<Option<usize>>> {
    counterfactual_slots(mechanism, x, agent, bids, rho)
}

// ---------------------------------------------------------------- pointwise

fn pointwise_round(low: &[Option<usize>], high: &[Option<usize>], strong: bool) -> Option<usize> {
    low.iter().zip(high).position(|(&lo, &hi)| match lo {
        None => false,
        Some(j) if strong => hi != Some(j),
        Some(j) => !matches!(hi, Some(j2) if j2 <= j),
    })
}

/// First round in which raising `agent`'s bid from `low` to `high` breaks
/// weak (or, with `strong`, strong) pointwise monotonicity.
pub fn pointwise_violation<S, M>(mechanism: &M, bids: &[S], rho: &Realization, agent: usize, low: S, high: S, strong: bool) -> Result<Option<usize>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let bids = profile(bids)?;
    let lo = slots_at(mechanism, &bids, rho, agent, low)?;
    let hi = slots_at(mechanism, &bids, rho, agent, high)?;
    Ok(pointwise_round(&lo, &hi, strong))
}

fn check_pointwise<S, M>(mechanism: &M, cfg: &VerifierConfig<S>, strong: bool) -> Result<PropertyVerdict<S>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let property = if strong { Property::StrongPointwise } else { Property::WeakPointwise };
    let tally = run_trials(mechanism, cfg, |trial| {
        let bids = profile(&trial.bids)?;
        let mut out = TrialResult::new();
        for agent in 0..trial.bids.len() {
            let grid = cfg.bid_grid(trial.bids[agent]);
            let seqs = grid
                .iter()
                .map(|&x| slots_at(mechanism, &bids, &trial.rho, agent, x))
                .collect::<Result<Vec<_>>>()?;
            for a in 0..grid.len() {
                for b in a + 1..grid.len() {
                    out.comparisons += 1;
                    if let Some(round) = pointwise_round(&seqs[a], &seqs[b], strong) {
                        let witness = Witness::Pointwise {
                            strong,
                            low: grid[a],
                            high: grid[b],
                            round,
                        };
                        out.violation = Some(counterexample(property, trial, agent, None, witness));
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    })?;
    Ok(verdict(property, cfg, tally, Outcome::Passed, ""))
}

pub fn check_weak_pointwise<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>) -> Result<PropertyVerdict<S>> {
    check_pointwise(mechanism, cfg, false)
}

pub fn check_strong_pointwise<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>) -> Result<PropertyVerdict<S>> {
    check_pointwise(mechanism, cfg, true)
}

// --------------------------------------------------------------- separation

fn separation_round(low: &InfluenceReport, high: &InfluenceReport, agent: usize, mode: SeparationMode) -> Option<(usize, Pair)> {
    for t in 0..low.rounds.len() {
        for &pair in low.i_influential(agent, t) {
            let escaped = match mode {
                SeparationMode::AllocationPreserving => !high.allocations[t].assigned(pair.0, pair.1),
                SeparationMode::Inclusion => !high.i_influential(agent, t).contains(&pair),
            };
            if escaped {
                return Some((t, pair));
            }
        }
    }
    None
}

/// First `(round, pair)` in `N(low)` that escapes when `agent` raises her bid to `high`.
#[allow(clippy::too_many_arguments)]
pub fn separation_violation<S, M>(
    mechanism: &M,
    bids: &[S],
    rho: &Realization,
    agent: usize,
    low: S,
    high: S,
    mode: SeparationMode,
    cap: usize,
) -> Result<Option<(usize, Pair)>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let bids = profile(bids)?;
    let lo = influence_report(mechanism, bids.with_bid(agent, low).bids(), rho, cap)?;
    let hi = influence_report(mechanism, bids.with_bid(agent, high).bids(), rho, cap)?;
    Ok(separation_round(&lo, &hi, agent, mode))
}

pub fn check_weakly_separated<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>) -> Result<PropertyVerdict<S>> {
    let property = Property::WeaklySeparated;
    let tally = run_trials(mechanism, cfg, |trial| {
        let bids = profile(&trial.bids)?;
        let mut out = TrialResult::new();
        for agent in 0..trial.bids.len() {
            let grid = cfg.bid_grid(trial.bids[agent]);
            let reports = grid
                .iter()
                .map(|&x| influence_report(mechanism, bids.with_bid(agent, x).bids(), &trial.rho, cfg.influence_cap))
                .collect::<Result<Vec<_>>>()?;
            out.influential |= reports.iter().any(|r| !r.is_empty());
            for a in 0..grid.len() {
                for b in a + 1..grid.len() {
                    out.comparisons += 1;
                    if let Some((round, pair)) = separation_round(&reports[a], &reports[b], agent, cfg.separation) {
                        let witness = Witness::Separation {
                            mode: cfg.separation,
                            low: grid[a],
                            high: grid[b],
                            round,
                            pair,
                            cap: cfg.influence_cap,
                        };
                        out.violation = Some(counterexample(property, trial, agent, None, witness));
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    })?;
    let note = if tally.influential { "" } else { "no influential pairs on any trial; holds vacuously" };
    Ok(verdict(property, cfg, tally, Outcome::Passed, note))
}

// ----------------------------------------------------------------- fairness

fn strong_on<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &[S], rho: &Realization, agent: usize) -> Result<BTreeSet<StrongInfluence>> {
    Ok(strong_influences(mechanism, bids, rho)?
        .into_iter()
        .filter(|s| s.influenced == agent)
        .collect())
}

fn shared_triplet(a: &BTreeSet<StrongInfluence>, b: &BTreeSet<StrongInfluence>) -> Option<StrongInfluence> {
    a.intersection(b).copied().min_by_key(|s| (s.earliest, s.round, s.pair))
}

fn expected_in_round<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &[S], rho: &Realization, mu: &Array2<S>, agent: usize, round: usize) -> Result<S> {
    let out = run(mechanism, bids, rho)?;
    Ok(out.allocations[round].slot(agent).map_or(S::zero(), |j| mu[[agent, j]]))
}

/// Whether toggling `toggled` shifts `agent`'s expected clicks in its
/// earliest influenced round in different directions at bids `low` and
/// `high`. Returns `false` unless `toggled` is strongly influential on the
/// agent, with that earliest round, at both bids.
#[allow(clippy::too_many_arguments)]
pub fn fairness_violation<S, M>(
    mechanism: &M,
    bids: &[S],
    rho: &Realization,
    mu: &Array2<S>,
    agent: usize,
    low: S,
    high: S,
    toggled: &StrongInfluence,
) -> Result<bool>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let bids = profile(bids)?;
    let flipped = rho.toggled(toggled.round, toggled.pair.0, toggled.pair.1);
    let mut sides = Vec::with_capacity(2);
    for x in [low, high] {
        let b = bids.with_bid(agent, x);
        if !strong_on(mechanism, b.bids(), rho, agent)?.contains(toggled) {
            return Ok(false);
        }
        let before = expected_in_round(mechanism, b.bids(), rho, mu, agent, toggled.earliest)?;
        let after = expected_in_round(mechanism, b.bids(), &flipped, mu, agent, toggled.earliest)?;
        sides.push(before >= after);
    }
    Ok(sides[0] != sides[1])
}

pub fn check_fairness<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>) -> Result<PropertyVerdict<S>> {
    let property = Property::Fair;
    let tally = run_trials(mechanism, cfg, |trial| {
        let bids = profile(&trial.bids)?;
        let mu = trial.ctr.mu();
        let mut out = TrialResult::new();
        for agent in 0..trial.bids.len() {
            let grid = cfg.bid_grid(trial.bids[agent]);
            let mut strong = Vec::with_capacity(grid.len());
            for &x in &grid {
                let all = strong_influences(mechanism, bids.with_bid(agent, x).bids(), &trial.rho)?;
                out.influential |= !all.is_empty();
                strong.push(all.into_iter().filter(|s| s.influenced == agent).collect::<BTreeSet<_>>());
            }
            for a in 0..grid.len() {
                for b in a + 1..grid.len() {
                    let Some(toggled) = shared_triplet(&strong[a], &strong[b]) else {
                        continue;
                    };
                    out.comparisons += 1;
                    if fairness_violation(mechanism, &trial.bids, &trial.rho, mu, agent, grid[a], grid[b], &toggled)? {
                        let witness = Witness::Fairness {
                            low: grid[a],
                            high: grid[b],
                            toggled,
                        };
                        out.violation = Some(counterexample(property, trial, agent, None, witness));
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    })?;
    let (outcome, note) = match (tally.influential, tally.comparisons) {
        (false, _) => (Outcome::Passed, "no influential pairs on any trial; holds vacuously"),
        (true, 0) => (Outcome::Inconclusive, "no two bids shared a strongly influential triplet"),
        _ => (Outcome::Passed, ""),
    };
    Ok(verdict(property, cfg, tally, outcome, note))
}

// ---------------------------------------------------------------- clickwise

fn clicks_at<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &BidProfile<S>, rho: &Realization, agent: usize, x: S) -> Result<(Vec<Option<usize>>, u64)> {
    let b = bids.with_bid(agent, x);
    let out = run(mechanism, b.bids(), rho)?;
    let clicks = count_clicks(&out.allocations, rho)?[agent];
    Ok((out.slots_of(agent), clicks))
}

/// `(C(low), C(high))` if `agent` gets strictly more clicks at `low`.
pub fn clickwise_violation<S, M>(mechanism: &M, bids: &[S], rho: &Realization, agent: usize, low: S, high: S) -> Result<Option<(u64, u64)>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let bids = profile(bids)?;
    let (_, lo) = clicks_at(mechanism, &bids, rho, agent, low)?;
    let (_, hi) = clicks_at(mechanism, &bids, rho, agent, high)?;
    Ok((lo > hi).then_some((lo, hi)))
}

/// Realization on which a slot loss at bid `high` becomes a click loss:
/// in the first round where the agent's slots differ and `low` holds the
/// better slot `j1`, the agent clicks in slots `0..=j1` only, and she never
/// clicks afterwards. Higher-slot precedence is preserved.
fn click_loss_realization(rho: &Realization, agent: usize, low: &[Option<usize>], high: &[Option<usize>]) -> Option<Realization> {
    let t0 = low.iter().zip(high).position(|(a, b)| a != b)?;
    let j1 = low[t0]?;
    if matches!(high[t0], Some(j2) if j2 <= j1) {
        return None;
    }
    let mut out = rho.clone();
    for j in 0..rho.slots() {
        out.set(t0, agent, j, j <= j1);
        for t in t0 + 1..rho.horizon() {
            out.set(t, agent, j, false);
        }
    }
    Some(out)
}

pub fn check_clickwise_monotone<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>) -> Result<PropertyVerdict<S>> {
    let property = Property::ClickwiseMonotone;
    let tally = run_trials(mechanism, cfg, |trial| {
        let bids = profile(&trial.bids)?;
        let mut out = TrialResult::new();
        for agent in 0..trial.bids.len() {
            let grid = cfg.bid_grid(trial.bids[agent]);
            let runs = grid
                .iter()
                .map(|&x| clicks_at(mechanism, &bids, &trial.rho, agent, x))
                .collect::<Result<Vec<_>>>()?;
            for a in 0..grid.len().saturating_sub(1) {
                out.comparisons += 1;
                let (lo, hi) = (runs[a].1, runs[a + 1].1);
                if lo > hi {
                    let witness = Witness::Clickwise {
                        low: grid[a],
                        high: grid[a + 1],
                        clicks_low: lo,
                        clicks_high: hi,
                    };
                    out.violation = Some(counterexample(property, trial, agent, None, witness));
                    return Ok(out);
                }
            }
            // Turn a slot loss on the sampled realization into a click loss.
            for a in 0..grid.len() {
                for b in a + 1..grid.len() {
                    let Some(rho) = click_loss_realization(&trial.rho, agent, &runs[a].0, &runs[b].0) else {
                        continue;
                    };
                    out.comparisons += 1;
                    if let Some((lo, hi)) = clickwise_violation(mechanism, &trial.bids, &rho, agent, grid[a], grid[b])? {
                        let witness = Witness::Clickwise {
                            low: grid[a],
                            high: grid[b],
                            clicks_low: lo,
                            clicks_high: hi,
                        };
                        out.violation = Some(counterexample(property, trial, agent, Some(rho), witness));
                        return Ok(out);
                    }
                }
            }
        }
        Ok(out)
    })?;
    Ok(verdict(property, cfg, tally, Outcome::Passed, ""))
}

// ------------------------------------------------------------ truthfulness

fn learned_or<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &[S], rho: &Realization, mu: &Array2<S>) -> Result<Array2<S>> {
    let out = run(mechanism, bids, rho)?;
    Ok(mechanism.learned_ctr(&out.state).unwrap_or_else(|| mu.clone()))
}

/// Utility of `agent` with value `values[agent]` when she bids `x` and the
/// others bid their values.
#[allow(clippy::too_many_arguments)]
pub fn utility<S, M>(
    mechanism: &M,
    values: &[S],
    rho: &Realization,
    mu: &Array2<S>,
    agent: usize,
    x: S,
    mode: TruthMode,
    integral: &IntegralConfig,
) -> Result<S>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let v = values[agent];
    let bids = profile(values)?.with_bid(agent, x);
    match mode {
        TruthMode::ExPost => {
            let p = click_profile(mechanism, agent, &bids, rho, x, integral)?;
            let clicks = S::of_count(*p.last());
            let payment = x * clicks - p.integral(|&c| S::of_count(c));
            Ok(v * clicks - payment)
        }
        TruthMode::Expected => {
            let mu = learned_or(mechanism, bids.bids(), rho, mu)?;
            let p = slot_profile(mechanism, agent, &bids, rho, x, integral)?;
            let clicks = expected_clicks(p.last(), &mu, agent);
            let payment = x * clicks - p.integral(|slots| expected_clicks(slots, &mu, agent));
            Ok(v * clicks - payment)
        }
    }
}

/// `U(deviation) - U(value)` for `agent`.
#[allow(clippy::too_many_arguments)]
pub fn truthful_gain<S, M>(
    mechanism: &M,
    values: &[S],
    rho: &Realization,
    mu: &Array2<S>,
    agent: usize,
    deviation: S,
    mode: TruthMode,
    integral: &IntegralConfig,
) -> Result<S>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let truthful = utility(mechanism, values, rho, mu, agent, values[agent], mode, integral)?;
    Ok(utility(mechanism, values, rho, mu, agent, deviation, mode, integral)? - truthful)
}

/// Bids `deviations` log-uniform draws over `[2v/10^4, 2v]` against truthful bidding.
pub fn check_empirical_truthful<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>, mode: TruthMode) -> Result<PropertyVerdict<S>> {
    let property = Property::EmpiricalTruthful;
    let tol = S::of(cfg.truth_tolerance);
    let tally = run_trials(mechanism, cfg, |trial| {
        let mu = trial.ctr.mu();
        let mut out = TrialResult::new();
        for agent in 0..trial.bids.len() {
            let v = trial.bids[agent];
            if v <= S::zero() {
                continue;
            }
            let truthful = utility(mechanism, &trial.bids, &trial.rho, mu, agent, v, mode, &cfg.integral)?;
            let mut rng = instance_rng(derive_seed(trial.seed, 2, agent as u64));
            for _ in 0..cfg.deviations {
                let x = v * S::of(2.0 * 10f64.powf(-4.0 * rng.random::<f64>()));
                out.comparisons += 1;
                let gain = utility(mechanism, &trial.bids, &trial.rho, mu, agent, x, mode, &cfg.integral)? - truthful;
                if gain > tol {
                    let witness = Witness::Truthful {
                        mode,
                        deviation: x,
                        gain,
                        tolerance: cfg.truth_tolerance,
                        integral: cfg.integral,
                    };
                    out.violation = Some(counterexample(property, trial, agent, None, witness));
                    return Ok(out);
                }
            }
        }
        Ok(out)
    })?;
    Ok(verdict(property, cfg, tally, Outcome::Passed, mode.name()))
}

// ----------------------------------------------------------- computability

fn payments<S: Scalar, M: Mechanism<S>>(mechanism: &M, bids: &BidProfile<S>, rho: &Realization, mu: &Array2<S>, mode: TruthMode, integral: &IntegralConfig) -> Result<Vec<S>> {
    match mode {
        TruthMode::ExPost => payment_ex_post(mechanism, bids, rho, integral),
        TruthMode::Expected => {
            let mu = learned_or(mechanism, bids.bids(), rho, mu)?;
            payment_in_expectation(mechanism, bids, rho, &mu, integral)
        }
    }
}

/// First agent whose payment moves by more than `tolerance * max(1, b_i)`
/// when the bits the factual run never observed are redrawn.
#[allow(clippy::too_many_arguments)]
fn computability_violation<S, M>(
    mechanism: &M,
    bids: &[S],
    rho: &Realization,
    mu: &Array2<S>,
    mode: TruthMode,
    integral: &IntegralConfig,
    resample_seed: u64,
    tolerance: f64,
) -> Result<Option<(usize, S)>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let bids = profile(bids)?;
    let factual = run(mechanism, bids.bids(), rho)?;
    let mask = rho.observed_mask(&factual.allocations)?;
    let redrawn = rho.with_unobserved_resampled(&mask, resample_seed);
    let full = payments(mechanism, &bids, rho, mu, mode, integral)?;
    let observed = payments(mechanism, &bids, &redrawn, mu, mode, integral)?;
    Ok(full.iter().zip(&observed).enumerate().find_map(|(i, (&p, &q))| {
        let diff = (p - q).abs();
        (diff > S::of(tolerance) * bids.bid(i).max(S::one())).then_some((i, diff))
    }))
}

pub fn check_payment_computability<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>, mode: TruthMode) -> Result<PropertyVerdict<S>> {
    let property = Property::PaymentComputable;
    let tally = run_trials(mechanism, cfg, |trial| {
        let mut out = TrialResult::new();
        let resample_seed = derive_seed(trial.seed, 3, 0);
        out.comparisons += trial.bids.len();
        if let Some((agent, difference)) = computability_violation(
            mechanism,
            &trial.bids,
            &trial.rho,
            trial.ctr.mu(),
            mode,
            &cfg.integral,
            resample_seed,
            cfg.truth_tolerance,
        )? {
            let witness = Witness::Computability {
                mode,
                resample_seed,
                difference,
                tolerance: cfg.truth_tolerance,
                integral: cfg.integral,
            };
            out.violation = Some(counterexample(property, trial, agent, None, witness));
        }
        Ok(out)
    })?;
    Ok(verdict(property, cfg, tally, Outcome::Passed, mode.name()))
}

// ----------------------------------------------------------- necessity pair

/// Under precedence realizations, truthfulness must come with weak
/// pointwise monotonicity and weak separation. Fails if the rule passes the
/// truthfulness sampling but one of the other two checks fails.
pub fn check_precedence_necessary_pair<S: Scalar, M: Mechanism<S>>(mechanism: &M, cfg: &VerifierConfig<S>, mode: TruthMode) -> Result<PropertyVerdict<S>> {
    let mut cfg = cfg.clone();
    cfg.regime = Regime::Precedence;
    if cfg.ctr == CtrSource::Uniform {
        cfg.ctr = CtrSource::RowMonotone;
    }
    let truthful = check_empirical_truthful(mechanism, &cfg, mode)?;
    let mut out = PropertyVerdict {
        property: Property::PrecedenceNecessaryPair,
        outcome: Outcome::Passed,
        trials: cfg.trials,
        comparisons: truthful.comparisons,
        counterexample: None,
        note: String::new(),
    };
    if !truthful.passed() {
        out.note = "not truthful under precedence; the implication holds vacuously".into();
        return Ok(out);
    }
    for v in [check_weak_pointwise(mechanism, &cfg)?, check_weakly_separated(mechanism, &cfg)?] {
        out.comparisons += v.comparisons;
        if v.failed() {
            out.outcome = Outcome::Failed;
            out.note = format!("truthful on the sampled trials but not {}", v.property);
            out.counterexample = v.counterexample;
            return Ok(out);
        }
    }
    Ok(out)
}

/// Runs every check and marks which properties `claims` asserts.
pub fn verify_all<S: Scalar, M: Mechanism<S>>(mechanism: &M, claims: Claims, cfg: &VerifierConfig<S>) -> Result<VerificationReport<S>> {
    let mode = claims.truth;
    let verdicts = vec![
        check_strong_pointwise(mechanism, cfg)?,
        check_weak_pointwise(mechanism, cfg)?,
        check_weakly_separated(mechanism, cfg)?,
        check_clickwise_monotone(mechanism, cfg)?,
        check_fairness(mechanism, cfg)?,
        check_empirical_truthful(mechanism, cfg, mode)?,
        check_payment_computability(mechanism, cfg, mode)?,
        check_precedence_necessary_pair(mechanism, cfg, mode)?,
    ];
    Ok(VerificationReport {
        mechanism: mechanism.name().to_string(),
        claims,
        verdicts,
    })
}

pub(crate) fn replay<S: Scalar, M: Mechanism<S>>(mechanism: &M, cx: &Counterexample<S>) -> Result<bool> {
    let (bids, rho, agent) = (&cx.bids, &cx.rho, cx.agent);
    let mu = cx.ctr.mu();
    Ok(match &cx.witness {
        Witness::Pointwise { strong, low, high, round } => {
            pointwise_violation(mechanism, bids, rho, agent, *low, *high, *strong)? == Some(*round)
        }
        Witness::Separation { mode, low, high, round, pair, cap } => {
            separation_violation(mechanism, bids, rho, agent, *low, *high, *mode, *cap)? == Some((*round, *pair))
        }
        Witness::Fairness { low, high, toggled } => fairness_violation(mechanism, bids, rho, mu, agent, *low, *high, toggled)?,
        Witness::Clickwise { low, high, clicks_low, clicks_high } => {
            clickwise_violation(mechanism, bids, rho, agent, *low, *high)? == Some((*clicks_low, *clicks_high))
        }
        Witness::Truthful { mode, deviation, tolerance, integral, .. } => {
            truthful_gain(mechanism, bids, rho, mu, agent, *deviation, *mode, integral)? > S::of(*tolerance)
        }
        Witness::Computability { mode, resample_seed, tolerance, integral, .. } => {
            computability_violation(mechanism, bids, rho, mu, *mode, integral, *resample_seed, *tolerance)?
                .is_some_and(|(i, _)| i == agent)
        }
    })
}
