//! Run-config files. Every key is optional; command-line flags win.
//!
//! ```toml
//! seed = 7
//! behav_metric = "avg_abs_rel_err"
//! ppa_metric = "pdplut"
//! noise_bits = 4
//! factors = [0.2, 0.5, 0.75, 1.0]
//!
//! [forest]
//! n_trees = 64
//!
//! [ga]
//! max_generations = 50
//! ```

use std::path::Path;

use axo::characterize::{InputPolicy, Metric, ProxyWeights};
use axo::dse::GaParams;
use axo::forest::{FeatureSubset, ForestParams};
use axo::stats::DistanceKind;
use axo::OperatorKind;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Operator for `characterize` when `--op` is absent.
    pub op: Option<String>,
    pub low_op: Option<String>,
    pub high_op: Option<String>,
    pub behav_metric: Option<String>,
    pub ppa_metric: Option<String>,
    pub distance: Option<String>,
    pub inputs: Option<String>,
    pub cycles: Option<usize>,
    pub noise_bits: Option<usize>,
    pub factors: Option<Vec<f64>>,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default)]
    pub ga: GaConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub lut_delay: Option<f64>,
    pub carry_delay: Option<f64>,
    pub unit_energy: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub features: Option<String>,
    pub bootstrap: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: Option<usize>,
    pub max_generations: Option<usize>,
    pub tournament_k: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub mutation_prob_per_bit: Option<f64>,
}

fn check<T: std::str::FromStr>(key: &str, value: &Option<String>) -> Result<(), CliError>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = value {
        v.parse::<T>().map_err(|e| CliError::Config(format!("{key}: {e}")))?;
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Core(axo::Error::Io { path: path.to_path_buf(), source: e }))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        check::<OperatorKind>("op", &self.op)?;
        check::<OperatorKind>("low_op", &self.low_op)?;
        check::<OperatorKind>("high_op", &self.high_op)?;
        check::<Metric>("behav_metric", &self.behav_metric)?;
        check::<Metric>("ppa_metric", &self.ppa_metric)?;
        check::<DistanceKind>("distance", &self.distance)?;
        check::<InputPolicy>("inputs", &self.inputs)?;
        check::<FeatureSubset>("forest.features", &self.forest.features)?;
        if let Some(f) = self.factors.iter().flatten().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(CliError::Config(format!("factors: {f} outside (0, 1]")));
        }
        self.forest_params(0).validate()?;
        self.ga_params(0).validate()?;
        Ok(())
    }

    pub fn weights(&self) -> ProxyWeights {
        let d = ProxyWeights::default();
        ProxyWeights {
            lut_delay: self.weights.lut_delay.unwrap_or(d.lut_delay),
            carry_delay: self.weights.carry_delay.unwrap_or(d.carry_delay),
            unit_energy: self.weights.unit_energy.unwrap_or(d.unit_energy),
        }
    }

    pub fn forest_params(&self, seed: u64) -> ForestParams {
        let d = ForestParams::default();
        let f = &self.forest;
        ForestParams {
            n_trees: f.n_trees.unwrap_or(d.n_trees),
            max_depth: f.max_depth.unwrap_or(d.max_depth),
            min_samples_leaf: f.min_samples_leaf.unwrap_or(d.min_samples_leaf),
            features_per_split: f.features.as_deref().and_then(|s| s.parse().ok()).unwrap_or(d.features_per_split),
            bootstrap: f.bootstrap.unwrap_or(d.bootstrap),
            seed,
        }
    }

    pub fn ga_params(&self, seed: u64) -> GaParams {
        let d = GaParams::default();
        let g = &self.ga;
        GaParams {
            population_size: g.population_size.unwrap_or(d.population_size),
            max_generations: g.max_generations.unwrap_or(d.max_generations),
            tournament_k: g.tournament_k.unwrap_or(d.tournament_k),
            crossover_prob: g.crossover_prob.unwrap_or(d.crossover_prob),
            mutation_prob_per_bit: g.mutation_prob_per_bit.or(d.mutation_prob_per_bit),
            seed,
        }
    }

    /// `(behav, ppa)` with flag values taking precedence.
    pub fn metrics(&self, behav: Option<Metric>, ppa: Option<Metric>) -> (Metric, Metric) {
        let pick = |flag: Option<Metric>, key: &Option<String>, default: Metric| {
            flag.or_else(|| key.as_deref().and_then(|s| s.parse().ok())).unwrap_or(default)
        };
        (pick(behav, &self.behav_metric, Metric::AvgAbsRelErr), pick(ppa, &self.ppa_metric, Metric::Pdplut))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("sed = 1").is_err());
        assert!(toml::from_str::<RunConfig>("[forest]\ntrees = 3").is_err());
    }

    #[test]
    fn bad_values_fail_validation() {
        let c: RunConfig = toml::from_str("ppa_metric = \"speed\"").unwrap();
        assert!(c.validate().is_err());
        let c: RunConfig = toml::from_str("factors = [0.5, 1.5]").unwrap();
        assert!(c.validate().is_err());
        let c: RunConfig = toml::from_str("[ga]\nmax_generations = 999").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn defaults_and_overrides() {
        let c: RunConfig = toml::from_str("behav_metric = \"err_rate\"\n[forest]\nn_trees = 8").unwrap();
        c.validate().unwrap();
        assert_eq!(c.metrics(None, None), (Metric::ErrRate, Metric::Pdplut));
        assert_eq!(c.metrics(Some(Metric::MaxAbsErr), None).0, Metric::MaxAbsErr);
        assert_eq!(c.forest_params(3).n_trees, 8);
        assert_eq!(c.forest_params(3).seed, 3);
    }
}
