//! Truthful payments by counterfactual replay along one agent's bid axis.
//!
//! For a fixed `(b_-i, rho)` the outcome of agent `i` is piecewise constant
//! in her bid `x`. [`bid_axis_profile`] locates the breakpoints by recursive
//! bisection: both ends of a segment are replayed, and wherever the outcomes
//! differ the segment is split until the change is bracketed within the
//! tolerance. Segments whose ends agree are taken as constant, so an
//! outcome that leaves and returns to the same value inside one initial
//! segment is not resolved; raise [`IntegralConfig::initial_segments`] when
//! that matters.
//!
//! Payments then follow from the integral of the outcome over `[0, b_i]`:
//! `P_i = b_i C_i(b) - int_0^{b_i} C_i(x) dx` ex post, and
//! `P_i = sum_t sum_j mu_ij (b_i A_ij(b, t) - int_0^{b_i} A_ij(x, t) dx)` in
//! expectation.

use ndarray::Array2;

use crate::error::{AuctionError, Result};
use crate::mechanisms::{run, Mechanism};
use crate::model::{count_clicks, BidProfile, Realization};
use crate::scalar::Scalar;

/// Knobs of the breakpoint search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralConfig {
    /// Breakpoints are bracketed within `rel_tol * max(1, b_i)`.
    pub rel_tol: f64,
    /// More breakpoints than this is reported as degeneracy.
    pub max_breakpoints: usize,
    /// Number of equal segments `[0, b_i]` is cut into before bisecting.
    pub initial_segments: usize,
}

impl Default for IntegralConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_breakpoints: 10_000,
            initial_segments: 1,
        }
    }
}

impl IntegralConfig {
    /// Brackets breakpoints down to adjacent floating-point numbers.
    pub fn fine() -> Self {
        Self {
            rel_tol: 0.0,
            ..Self::default()
        }
    }

    pub fn with_tolerance(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn tolerance<S: Scalar>(&self, upper: S) -> S {
        S::of(self.rel_tol) * upper.max(S::one())
    }
}

/// Piecewise-constant outcome of one agent on `[0, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BidAxisProfile<S, V> {
    edges: Vec<S>,
    values: Vec<V>,
}

impl<S: Scalar, V> BidAxisProfile<S, V> {
    /// Interior points where the outcome changes, strictly increasing.
    pub fn breakpoints(&self) -> &[S] {
        &self.edges[1..self.edges.len() - 1]
    }

    /// Outcome on each segment, left to right.
    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn upper(&self) -> S {
        self.edges[self.edges.len() - 1]
    }

    /// `(lo, hi, outcome)` for every segment.
    pub fn segments(&self) -> impl Iterator<Item = (S, S, &V)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[0], w[1], v))
    }

    /// Outcome at bid `x` (the right-hand segment at a breakpoint).
    pub fn value_at(&self, x: S) -> &V {
        let idx = self.breakpoints().partition_point(|&b| b <= x);
        &self.values[idx]
    }

    /// Outcome at the top of the axis, i.e. at the bid itself.
    pub fn last(&self) -> &V {
        self.values.last().expect("profiles have at least one segment")
    }

    /// `int_0^upper weight(outcome(x)) dx`.
    pub fn integral(&self, weight: impl Fn(&V) -> S) -> S {
        self.segments().map(|(lo, hi, v)| (hi - lo) * weight(v)).sum()
    }

    /// `int_0^y weight(outcome(x)) dx` for `y <= upper`.
    pub fn integral_up_to(&self, y: S, weight: impl Fn(&V) -> S) -> S {
        self.segments()
            .take_while(|&(lo, _, _)| lo < y)
            .map(|(lo, hi, v)| (hi.min(y) - lo) * weight(v))
            .sum()
    }

    /// Myerson payment `y * w(y) - int_0^y w` for a bid `y` on the axis.
    pub fn payment_at(&self, y: S, weight: impl Fn(&V) -> S) -> S {
        y * weight(self.value_at(y)) - self.integral_up_to(y, &weight)
    }
}

/// Builds the bid-axis profile of `eval` on `[0, upper]`.
pub fn bid_axis_profile<S, V, F>(mut eval: F, upper: S, cfg: &IntegralConfig, agent: usize) -> Result<BidAxisProfile<S, V>>
where
    S: Scalar,
    V: PartialEq + Clone,
    F: FnMut(S) -> Result<V>,
{
    if !(upper >= S::zero() && upper.is_finite()) {
        return Err(AuctionError::InvalidValue {
            field: "bid",
            reason: format!("cannot integrate up to {upper}"),
        });
    }
    let first = eval(S::zero())?;
    let mut search = Bisection {
        eval: &mut eval,
        tol: cfg.tolerance(upper),
        cap: cfg.max_breakpoints,
        agent,
        edges: vec![S::zero()],
        values: vec![first.clone()],
    };
    if upper > S::zero() {
        let pieces = cfg.initial_segments.max(1);
        let mut lo = S::zero();
        let mut v_lo = first;
        for p in 1..=pieces {
            let hi = if p == pieces {
                upper
            } else {
                upper * S::of_count(p as u64) / S::of_count(pieces as u64)
            };
            let v_hi = (search.eval)(hi)?;
            search.refine(lo, &v_lo, hi, &v_hi)?;
            lo = hi;
            v_lo = v_hi;
        }
    }
    let Bisection {
        mut edges, values, ..
    } = search;
    edges.push(upper);
    Ok(BidAxisProfile { edges, values })
}

struct Bisection<'a, S, V, F> {
    eval: &'a mut F,
    tol: S,
    cap: usize,
    agent: usize,
    edges: Vec<S>,
    values: Vec<V>,
}

impl<S, V, F> Bisection<'_, S, V, F>
where
    S: Scalar,
    V: PartialEq + Clone,
    F: FnMut(S) -> Result<V>,
{
    fn refine(&mut self, lo: S, v_lo: &V, hi: S, v_hi: &V) -> Result<()> {
        if v_lo == v_hi {
            return Ok(());
        }
        let two = S::one() + S::one();
        let mid = lo + (hi - lo) / two;
        let resolved = hi - lo <= self.tol;
        if resolved || mid <= lo || mid >= hi {
            let at = if resolved { mid } else { hi };
            if self.edges.len() > self.cap {
                return Err(AuctionError::SuspectedDegeneracy {
                    agent: self.agent,
                    cap: self.cap,
                });
            }
            self.edges.push(at);
            self.values.push(v_hi.clone());
            return Ok(());
        }
        let v_mid = (self.eval)(mid)?;
        self.refine(lo, v_lo, mid, &v_mid)?;
        self.refine(mid, &v_mid, hi, v_hi)
    }
}

/// `C_i(x, b_-i; rho)`: clicks of `agent` when she alone bids `x` instead.
pub fn counterfactual_clicks<S, M>(mechanism: &M, x: S, agent: usize, bids: &BidProfile<S>, rho: &Realization) -> Result<u64>
where
    S: Scalar,
    M: Mechanism<S>,
{
    check_agent(mechanism, agent)?;
    let replay = bids.with_bid(agent, x);
    let out = run(mechanism, replay.bids(), rho)?;
    Ok(count_clicks(&out.allocations, rho)?[agent])
}

/// Slot of `agent` in every round when she alone bids `x`.
pub fn counterfactual_slots<S, M>(
    mechanism: &M,
    x: S,
    agent: usize,
    bids: &BidProfile<S>,
    rho: &Realization,
) -> Result<Vec<Option<usize>>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    check_agent(mechanism, agent)?;
    let replay = bids.with_bid(agent, x);
    Ok(run(mechanism, replay.bids(), rho)?.slots_of(agent))
}

fn check_agent<S: Scalar, M: Mechanism<S>>(mechanism: &M, agent: usize) -> Result<()> {
    let k = mechanism.dims().agents;
    if agent >= k {
        return Err(AuctionError::InvalidValue {
            field: "agent",
            reason: format!("agent {agent} does not exist among {k}"),
        });
    }
    Ok(())
}

/// Click-count profile of `agent` on `[0, upper]`.
pub fn click_profile<S, M>(
    mechanism: &M,
    agent: usize,
    bids: &BidProfile<S>,
    rho: &Realization,
    upper: S,
    cfg: &IntegralConfig,
) -> Result<BidAxisProfile<S, u64>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    bid_axis_profile(
        |x| counterfactual_clicks(mechanism, x, agent, bids, rho),
        upper,
        cfg,
        agent,
    )
}

/// Per-round slot profile of `agent` on `[0, upper]`.
pub fn slot_profile<S, M>(
    mechanism: &M,
    agent: usize,
    bids: &BidProfile<S>,
    rho: &Realization,
    upper: S,
    cfg: &IntegralConfig,
) -> Result<BidAxisProfile<S, Vec<Option<usize>>>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    bid_axis_profile(
        |x| counterfactual_slots(mechanism, x, agent, bids, rho),
        upper,
        cfg,
        agent,
    )
}

/// `int_0^{b_i} C_i(x, b_-i; rho) dx`.
pub fn click_integral<S, M>(mechanism: &M, agent: usize, bids: &BidProfile<S>, rho: &Realization, cfg: &IntegralConfig) -> Result<S>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let profile = click_profile(mechanism, agent, bids, rho, bids.bid(agent), cfg)?;
    Ok(profile.integral(|&c| S::of_count(c)))
}

/// Ex-post payments `P_i = b_i C_i - int_0^{b_i} C_i(x) dx` for every agent.
pub fn payment_ex_post<S, M>(mechanism: &M, bids: &BidProfile<S>, rho: &Realization, cfg: &IntegralConfig) -> Result<Vec<S>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    bids.expect_agents(mechanism.dims().agents)?;
    (0..bids.len())
        .map(|i| {
            let b = bids.bid(i);
            let profile = click_profile(mechanism, i, bids, rho, b, cfg)?;
            Ok(b * S::of_count(*profile.last()) - profile.integral(|&c| S::of_count(c)))
        })
        .collect()
}

/// `sum_t mu[agent][slot_t]` over the rounds where the agent is shown.
pub fn expected_clicks<S: Scalar>(slots: &[Option<usize>], mu: &Array2<S>, agent: usize) -> S {
    slots.iter().flatten().map(|&j| mu[[agent, j]]).sum()
}

/// Payments in expectation over the CTR matrix `mu` (true, pre-estimated or learned).
pub fn payment_in_expectation<S, M>(
    mechanism: &M,
    bids: &BidProfile<S>,
    rho: &Realization,
    mu: &Array2<S>,
    cfg: &IntegralConfig,
) -> Result<Vec<S>>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let dims = mechanism.dims();
    bids.expect_agents(dims.agents)?;
    if mu.dim() != (dims.agents, dims.slots) {
        return Err(AuctionError::DimensionMismatch {
            what: "CTR matrix entries",
            expected: dims.agents * dims.slots,
            got: mu.len(),
        });
    }
    // Learned estimates may exceed 1, so only sign and finiteness are checked.
    if let Some(p) = mu.iter().find(|&&p| !(p >= S::zero() && p.is_finite())) {
        return Err(AuctionError::InvalidValue {
            field: "mu",
            reason: format!("{p} is not a finite non-negative rate"),
        });
    }
    (0..dims.agents)
        .map(|i| {
            let b = bids.bid(i);
            let profile = slot_profile(mechanism, i, bids, rho, b, cfg)?;
            let weight = |slots: &Vec<Option<usize>>| expected_clicks(slots, mu, i);
            Ok(b * weight(profile.last()) - profile.integral(weight))
        })
        .collect()
}

/// Payments in expectation over the CTR matrix the mechanism learned on the factual run.
///
/// Returns the payments together with that matrix.
pub fn payment_in_expectation_learned<S, M>(
    mechanism: &M,
    bids: &BidProfile<S>,
    rho: &Realization,
    cfg: &IntegralConfig,
) -> Result<(Vec<S>, Array2<S>)>
where
    S: Scalar,
    M: Mechanism<S>,
{
    let factual = run(mechanism, bids.bids(), rho)?;
    let mu = mechanism.learned_ctr(&factual.state).ok_or_else(|| {
        AuctionError::InvalidConfig(format!("{} does not learn a CTR matrix", mechanism.name()))
    })?;
    let payments = payment_in_expectation(mechanism, bids, rho, &mu, cfg)?;
    Ok((payments, mu))
}
