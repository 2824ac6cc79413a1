//! The four subcommands. Each renders its whole output into a string.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use slotmab::format::sig12;
use slotmab::mechanisms::{run, Dims, MechanismKind};
use slotmab::payments::{expected_clicks, payment_ex_post, payment_in_expectation};
use slotmab::regret::{monte_carlo_sweep, SweepResult};
use slotmab::rng::derive_seed;
use slotmab::verifier::{verify_all, Claims};
use slotmab::{sample_realization, Mechanism, RunTrace};

use crate::config::ExperimentConfig;

pub const SWEEP_HEADER: &str = "T,n_instances,avg_regret,worst_regret";
pub const FIG1_HEADER: &str = "T,n_instances,avg_regret,worst_regret,ln_T,ln_avg_regret,ln_worst_regret";

/// Rendered output and whether the run should exit with failure.
pub struct Output {
    pub text: String,
    pub failed: bool,
}

/// Comment block opening every output: command, optional timestamp, resolved config.
fn preamble(command: &str, cfg: &ExperimentConfig, timestamp: Option<u64>) -> String {
    let mut out = format!("# slotmab {command}\n");
    if let Some(secs) = timestamp {
        let _ = writeln!(out, "# generated_unix = {secs}");
    }
    out.push_str("# resolved config:\n");
    for line in cfg.to_toml().lines() {
        let _ = writeln!(out, "#   {line}");
    }
    out
}

pub fn simulate(cfg: &ExperimentConfig, timestamp: Option<u64>) -> Result<Output> {
    let auction = cfg.auction()?;
    let spec = cfg.mechanism()?;
    let integral = cfg.integral()?;
    let inst = cfg.instance()?;
    let dims = Dims::new(auction.agents, auction.slots, auction.horizon)?;
    let mech = spec.build(dims, inst.ctr.beta()).context("mechanism")?;
    let rho = sample_realization(&inst.ctr, &auction, derive_seed(auction.seed, 1, 0))?;
    let bids = inst.bids.bids();
    let values = inst.bids.values().unwrap_or(bids);

    let factual = run(&mech, bids, &rho)?;
    let mut trace = RunTrace::new(factual.allocations.clone(), &rho, values)?;
    trace.payments = Some(payment_ex_post(&mech, &inst.bids, &rho, &integral)?);
    let mu = mech.learned_ctr(&factual.state).unwrap_or_else(|| inst.ctr.mu().clone());
    let expected = payment_in_expectation(&mech, &inst.bids, &rho, &mu, &integral)?;

    let mut out = preamble("simulate", cfg, timestamp);
    let _ = writeln!(out, "# mechanism = {}", mech.name());
    let _ = writeln!(
        out,
        "# expected payments use {} CTRs",
        if mech.learned_ctr(&factual.state).is_some() { "learned" } else { "true" }
    );
    out.push_str("t,slot,agent,clicked\n");
    for (t, round) in trace.allocations.iter().enumerate() {
        for slot in 0..round.slots() {
            if let Some(agent) = round.agent_in_slot(slot) {
                let _ = writeln!(out, "{t},{slot},{agent},{}", u8::from(rho.get(t, agent, slot)));
            }
        }
    }
    out.push('\n');
    let _ = writeln!(out, "# welfare = {}", sig12(trace.welfare));
    out.push_str("agent,bid,value,clicks,payment_ex_post,utility_ex_post,expected_clicks,payment_expected,utility_expected\n");
    let paid = trace.payments.as_ref().expect("payments attached");
    for i in 0..dims.agents {
        let exp_clicks = expected_clicks(&factual.slots_of(i), &mu, i);
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{}",
            sig12(bids[i]),
            sig12(values[i]),
            trace.clicks[i],
            sig12(paid[i]),
            sig12(trace.utility(i, values[i]).expect("payments attached")),
            sig12(exp_clicks),
            sig12(expected[i]),
            sig12(values[i] * exp_clicks - expected[i]),
        );
    }
    Ok(Output { text: out, failed: false })
}

pub fn verify(cfg: &ExperimentConfig, timestamp: Option<u64>) -> Result<Output> {
    let auction = cfg.auction()?;
    let spec = cfg.mechanism()?;
    let inst = cfg.instance()?;
    let dims = Dims::new(auction.agents, auction.slots, auction.horizon)?;
    let mech = spec.build(dims, inst.ctr.beta()).context("mechanism")?;
    let vcfg = cfg.verifier(spec.kind, inst.ctr.beta(), &inst.ctr)?;
    let report = verify_all(&mech, Claims::of(spec.kind), &vcfg)?;
    let mut out = preamble("verify", cfg, timestamp);
    let _ = write!(out, "{report}");
    if !out.ends_with('\n') {
        out.push('\n');
    }
    Ok(Output {
        failed: !report.failed_claims().is_empty(),
        text: out,
    })
}

fn fit_footer(out: &mut String, sweep: &SweepResult<f64>) {
    for (name, fit) in [("avg_regret", sweep.avg_fit), ("worst_regret", sweep.worst_fit)] {
        match fit {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "# fit {name}: exponent = {}, intercept = {}, r_squared = {}",
                    sig12(f.exponent),
                    sig12(f.intercept),
                    sig12(f.r_squared)
                );
            }
            None => {
                let _ = writeln!(out, "# fit {name}: unavailable (needs two horizons with positive regret)");
            }
        }
    }
}

pub fn regret_sweep(cfg: &ExperimentConfig, timestamp: Option<u64>) -> Result<Output> {
    let spec = cfg.mechanism()?;
    let sweep_cfg = cfg.sweep()?;
    let sweep = monte_carlo_sweep::<f64>(&spec, &sweep_cfg)?;
    let mut out = preamble("regret-sweep", cfg, timestamp);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in &sweep.rows {
        let _ = writeln!(out, "{},{},{},{}", r.horizon, r.instances, sig12(r.avg_regret), sig12(r.worst_regret));
    }
    fit_footer(&mut out, &sweep);
    Ok(Output { text: out, failed: false })
}

pub fn reproduce_fig1(cfg: &ExperimentConfig, timestamp: Option<u64>) -> Result<Output> {
    let mut cfg = cfg.clone();
    cfg.auction.agents = 4;
    cfg.auction.slots = 2;
    cfg.mechanism.kind = MechanismKind::ExploreExploitSeparable.name().into();
    let spec = cfg.mechanism()?;
    let sweep_cfg = cfg.sweep()?;
    let sweep = monte_carlo_sweep::<f64>(&spec, &sweep_cfg)?;
    let mut out = preamble("reproduce-fig1", &cfg, timestamp);
    out.push_str(FIG1_HEADER);
    out.push('\n');
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.horizon,
            r.instances,
            sig12(r.avg_regret),
            sig12(r.worst_regret),
            sig12((r.horizon as f64).ln()),
            sig12(r.avg_regret.ln()),
            sig12(r.worst_regret.ln()),
        );
    }
    fit_footer(&mut out, &sweep);
    let _ = writeln!(
        out,
        "# reference: exponent = {}, avg intercept = ln(1/3) = {}, worst intercept = ln(17/3) = {}",
        sig12(2.0 / 3.0),
        sig12((1.0f64 / 3.0).ln()),
        sig12((17.0f64 / 3.0).ln())
    );
    Ok(Output { text: out, failed: false })
}
