//! Experiment configuration read from TOML.

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use slotmab::mechanisms::{MechanismKind, MechanismSpec, DEFAULT_TIE_EPSILON};
use slotmab::payments::IntegralConfig;
use slotmab::regret::{random_separable_instance, InstanceRanges, SweepConfig};
use slotmab::verifier::{CtrSource, SeparationMode, VerifierConfig};
use slotmab::{AuctionConfig, BidProfile, CtrModel, Regime};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub auction: AuctionSection,
    pub instance: InstanceSection,
    pub mechanism: MechanismSection,
    pub regret: RegretSection,
    pub verifier: VerifierSection,
    pub payments: PaymentsSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuctionSection {
    pub agents: usize,
    pub slots: usize,
    pub horizon: usize,
    pub regime: String,
    pub seed: u64,
}

impl Default for AuctionSection {
    fn default() -> Self {
        Self {
            agents: 4,
            slots: 2,
            horizon: 100,
            regime: "separable".into(),
            seed: 0,
        }
    }
}

/// Explicit instance; anything left out is drawn at random from `auction.seed`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bids: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismSection {
    pub kind: String,
    /// Defaults to `ceil(T^(2/3))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploration_rounds: Option<usize>,
    pub tie_epsilon: f64,
}

impl Default for MechanismSection {
    fn default() -> Self {
        Self {
            kind: MechanismKind::ExploreExploitSeparable.name().into(),
            exploration_rounds: None,
            tie_epsilon: DEFAULT_TIE_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegretSection {
    pub horizons: Vec<usize>,
    pub instances: usize,
    pub master_seed: u64,
    pub realizations: usize,
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub value_scale: f64,
}

impl Default for RegretSection {
    fn default() -> Self {
        let sweep = SweepConfig::default();
        Self {
            horizons: sweep.horizons,
            instances: sweep.instances,
            master_seed: sweep.master_seed,
            realizations: sweep.realizations,
            alpha_range: [sweep.ranges.alpha.0, sweep.ranges.alpha.1],
            beta_range: [sweep.ranges.beta.0, sweep.ranges.beta.1],
            value_scale: sweep.ranges.value_scale,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifierSection {
    pub trials: usize,
    pub seed: u64,
    pub regime: String,
    /// `row-monotone`, `uniform`, `separable` (uses the instance beta) or `instance`.
    /// Defaults to `separable` for the explore-exploit rule and `row-monotone` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ctr: Option<String>,
    pub max_bid: f64,
    pub grid_points: usize,
    pub deviations: usize,
    pub influence_cap: usize,
    /// `allocation-preserving` or `inclusion`.
    pub separation: String,
    pub truth_tolerance: f64,
}

impl Default for VerifierSection {
    fn default() -> Self {
        let v = VerifierConfig::<f64>::default();
        Self {
            trials: v.trials,
            seed: v.seed,
            regime: v.regime.name().into(),
            ctr: None,
            max_bid: v.max_bid,
            grid_points: v.grid_points,
            deviations: v.deviations,
            influence_cap: v.influence_cap,
            separation: "allocation-preserving".into(),
            truth_tolerance: v.truth_tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaymentsSection {
    pub rel_tol: f64,
    pub max_breakpoints: usize,
}

impl Default for PaymentsSection {
    fn default() -> Self {
        let p = IntegralConfig::default();
        Self {
            rel_tol: p.rel_tol,
            max_breakpoints: p.max_breakpoints,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub timestamp: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: None,
            timestamp: true,
        }
    }
}

/// Instance resolved from the config.
pub struct Instance {
    pub ctr: CtrModel<f64>,
    pub bids: BidProfile<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Applies `--seed` to every seed in the file.
    pub fn override_seed(&mut self, seed: u64) {
        self.auction.seed = seed;
        self.regret.master_seed = seed;
        self.verifier.seed = seed;
    }

    pub fn auction(&self) -> Result<AuctionConfig> {
        let a = &self.auction;
        let regime = parse_regime(&a.regime).context("auction.regime")?;
        AuctionConfig::new(a.agents, a.slots, a.horizon, regime, a.seed).context("auction")
    }

    pub fn mechanism(&self) -> Result<MechanismSpec> {
        let m = &self.mechanism;
        let kind = MechanismKind::parse(&m.kind).with_context(|| {
            let names: Vec<_> = MechanismKind::ALL.iter().map(|k| k.name()).collect();
            format!("mechanism.kind: unknown rule {:?}; expected one of {}", m.kind, names.join(", "))
        })?;
        ensure!(
            m.tie_epsilon >= 0.0 && m.tie_epsilon.is_finite(),
            "mechanism.tie_epsilon: must be finite and non-negative"
        );
        Ok(MechanismSpec {
            kind,
            exploration_rounds: m.exploration_rounds,
            tie_epsilon: m.tie_epsilon,
        })
    }

    pub fn integral(&self) -> Result<IntegralConfig> {
        let p = &self.payments;
        ensure!(p.rel_tol > 0.0 && p.rel_tol.is_finite(), "payments.rel_tol: must be positive");
        ensure!(p.max_breakpoints > 0, "payments.max_breakpoints: must be positive");
        Ok(IntegralConfig {
            rel_tol: p.rel_tol,
            max_breakpoints: p.max_breakpoints,
            ..IntegralConfig::default()
        })
    }

    pub fn ranges(&self) -> Result<InstanceRanges> {
        let r = &self.regret;
        let [a_lo, a_hi] = r.alpha_range;
        let [b_lo, b_hi] = r.beta_range;
        ensure!(0.0 <= a_lo && a_lo <= a_hi && a_hi <= 1.0, "regret.alpha_range: need 0 <= lo <= hi <= 1");
        ensure!(0.0 <= b_lo && b_lo <= b_hi && b_hi <= 1.0, "regret.beta_range: need 0 <= lo <= hi <= 1");
        ensure!(r.value_scale >= 0.0 && r.value_scale.is_finite(), "regret.value_scale: must be finite and non-negative");
        Ok(InstanceRanges {
            alpha: (a_lo, a_hi),
            beta: (b_lo, b_hi),
            value_scale: r.value_scale,
        })
    }

    /// CTRs and bids of the single-instance commands.
    pub fn instance(&self) -> Result<Instance> {
        let auction = self.auction()?;
        let (k, m) = (auction.agents, auction.slots);
        let inst = &self.instance;
        let random = random_separable_instance::<f64>(k, m, &self.ranges()?, auction.seed).context("instance")?;
        let ctr = match (&inst.mu, &inst.alpha, &inst.beta) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                bail!("instance: give either mu or alpha/beta, not both")
            }
            (Some(rows), None, None) => CtrModel::from_rows(rows).context("instance.mu")?,
            (None, alpha, beta) => {
                let alpha = alpha.clone().unwrap_or_else(|| random.ctr.alpha().unwrap().to_vec());
                let beta = beta.clone().unwrap_or_else(|| random.ctr.beta().unwrap().to_vec());
                CtrModel::separable(alpha, beta).context("instance.alpha/beta")?
            }
        };
        ensure!(
            ctr.agents() == k && ctr.slots() == m,
            "instance: CTR matrix is {}x{} but the auction has {k} agents and {m} slots",
            ctr.agents(),
            ctr.slots()
        );
        ctr.validate(auction.regime).context("instance")?;
        let values = inst
            .values
            .clone()
            .or_else(|| inst.bids.clone())
            .unwrap_or_else(|| random.bids.bids().to_vec());
        let bids = inst.bids.clone().unwrap_or_else(|| values.clone());
        ensure!(bids.len() == k, "instance.bids: expected {k} entries, got {}", bids.len());
        ensure!(values.len() == k, "instance.values: expected {k} entries, got {}", values.len());
        let bids = BidProfile::new(bids)
            .context("instance.bids")?
            .with_values(values)
            .context("instance.values")?;
        Ok(Instance { ctr, bids })
    }

    pub fn sweep(&self) -> Result<SweepConfig> {
        let a = &self.auction;
        let r = &self.regret;
        ensure!(!r.horizons.is_empty(), "regret.horizons: must list at least one horizon");
        ensure!(r.horizons.iter().all(|&t| t > 0), "regret.horizons: horizons must be positive");
        ensure!(r.instances > 0, "regret.instances: must be positive");
        ensure!(r.realizations > 0, "regret.realizations: must be positive");
        ensure!(a.agents >= a.slots && a.slots > 0, "auction: need agents >= slots >= 1");
        Ok(SweepConfig {
            agents: a.agents,
            slots: a.slots,
            horizons: r.horizons.clone(),
            instances: r.instances,
            master_seed: r.master_seed,
            ranges: self.ranges()?,
            realizations: r.realizations,
        })
    }

    pub fn verifier(&self, kind: MechanismKind, beta: Option<&[f64]>, ctr: &CtrModel<f64>) -> Result<VerifierConfig<f64>> {
        let v = &self.verifier;
        ensure!(v.trials > 0, "verifier.trials: must be positive");
        ensure!(v.max_bid > 0.0 && v.max_bid.is_finite(), "verifier.max_bid: must be positive");
        ensure!(v.truth_tolerance > 0.0, "verifier.truth_tolerance: must be positive");
        let regime = parse_regime(&v.regime).context("verifier.regime")?;
        let default_source = if kind == MechanismKind::ExploreExploitSeparable { "separable" } else { "row-monotone" };
        let source = match v.ctr.as_deref().unwrap_or(default_source) {
            "row-monotone" => CtrSource::RowMonotone,
            "uniform" => CtrSource::Uniform,
            "separable" => CtrSource::Separable {
                beta: beta
                    .context("verifier.ctr: separable sampling needs instance beta")?
                    .to_vec(),
            },
            "instance" => CtrSource::Fixed(ctr.clone()),
            other => bail!("verifier.ctr: unknown source {other:?}; expected row-monotone, uniform, separable or instance"),
        };
        let separation = match v.separation.as_str() {
            "allocation-preserving" => SeparationMode::AllocationPreserving,
            "inclusion" => SeparationMode::Inclusion,
            other => bail!("verifier.separation: unknown mode {other:?}; expected allocation-preserving or inclusion"),
        };
        Ok(VerifierConfig {
            trials: v.trials,
            seed: v.seed,
            regime,
            ctr: source,
            max_bid: v.max_bid,
            grid_points: v.grid_points,
            deviations: v.deviations,
            influence_cap: v.influence_cap,
            separation,
            truth_tolerance: v.truth_tolerance,
            integral: IntegralConfig::fine(),
        })
    }
}

fn parse_regime(s: &str) -> Result<Regime> {
    Regime::parse(s).with_context(|| format!("unknown regime {s:?}; expected unconstrained, precedence or separable"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.auction.agents, 4);
        assert_eq!(cfg.regret.horizons, SweepConfig::default().horizons);
        assert!(cfg.instance().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse("[auction]\nagnets = 3\n").unwrap_err();
        assert!(err.to_string().contains("agnets"));
    }

    #[test]
    fn errors_name_the_field() {
        let cfg = ExperimentConfig::parse("[regret]\nhorizons = []\n").unwrap();
        assert!(cfg.sweep().unwrap_err().to_string().starts_with("regret.horizons"));
        let cfg = ExperimentConfig::parse("[mechanism]\nkind = \"vickrey\"\n").unwrap();
        assert!(format!("{:#}", cfg.mechanism().unwrap_err()).starts_with("mechanism.kind"));
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = ExperimentConfig::parse("[instance]\nbeta = [0.9, 0.4]\n").unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg.to_toml(), again.to_toml());
    }
}
