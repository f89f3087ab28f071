//! Behavioral error and proxy hardware cost of approximate configurations.
//!
//! BEHAV metrics come from bit-exact simulation over an operand set
//! (exhaustive or sampled). PPA metrics come from a declared proxy model:
//! LUT count, a weighted longest path, and switching activity under random
//! consecutive input vectors.

pub(crate) mod csv;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{AxoConfig, CellKind, Family, OperatorKind, OperatorNetlist, Simulator};
use crate::rng::{self, Purpose};

pub use self::csv::{export_csv, import_csv, parse_csv, render_csv, CSV_HEADER};

/// Largest number of operand bits (2N) simulated exhaustively.
pub const MAX_EXHAUSTIVE_INPUT_BITS: usize = 24;

/// Metric columns of a characterization record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    AvgAbsErr,
    AvgAbsRelErr,
    MaxAbsErr,
    ErrRate,
    LutUtil,
    CpdProxy,
    PowerProxy,
    Pdp,
    Pdplut,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::AvgAbsErr,
        Metric::AvgAbsRelErr,
        Metric::MaxAbsErr,
        Metric::ErrRate,
        Metric::LutUtil,
        Metric::CpdProxy,
        Metric::PowerProxy,
        Metric::Pdp,
        Metric::Pdplut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AvgAbsErr => "avg_abs_err",
            Metric::AvgAbsRelErr => "avg_abs_rel_err",
            Metric::MaxAbsErr => "max_abs_err",
            Metric::ErrRate => "err_rate",
            Metric::LutUtil => "lut_util",
            Metric::CpdProxy => "cpd_proxy",
            Metric::PowerProxy => "power_proxy",
            Metric::Pdp => "pdp",
            Metric::Pdplut => "pdplut",
        }
    }

    pub fn is_behav(self) -> bool {
        matches!(self, Metric::AvgAbsErr | Metric::AvgAbsRelErr | Metric::MaxAbsErr | Metric::ErrRate)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParam(format!("unknown metric '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BehavMetrics {
    pub avg_abs_err: f64,
    pub avg_abs_rel_err: f64,
    pub max_abs_err: f64,
    pub err_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PpaMetrics {
    pub lut_util: u32,
    pub cpd_proxy: f64,
    pub power_proxy: f64,
    pub pdp: f64,
    pub pdplut: f64,
}

impl PpaMetrics {
    /// Fills in `pdp` and `pdplut` from the three primary quantities.
    pub fn from_parts(lut_util: u32, cpd_proxy: f64, power_proxy: f64) -> Self {
        let pdp = power_proxy * cpd_proxy;
        Self { lut_util, cpd_proxy, power_proxy, pdp, pdplut: pdp * lut_util as f64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharRecord {
    pub config: AxoConfig,
    pub behav: BehavMetrics,
    pub ppa: PpaMetrics,
}

impl CharRecord {
    pub fn config_uint(&self) -> u64 {
        self.config.to_uint()
    }

    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::AvgAbsErr => self.behav.avg_abs_err,
            Metric::AvgAbsRelErr => self.behav.avg_abs_rel_err,
            Metric::MaxAbsErr => self.behav.max_abs_err,
            Metric::ErrRate => self.behav.err_rate,
            Metric::LutUtil => self.ppa.lut_util as f64,
            Metric::CpdProxy => self.ppa.cpd_proxy,
            Metric::PowerProxy => self.ppa.power_proxy,
            Metric::Pdp => self.ppa.pdp,
            Metric::Pdplut => self.ppa.pdplut,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ProxyModel,
    ImportedExternal,
}

impl Provenance {
    pub fn token(self) -> &'static str {
        match self {
            Provenance::ProxyModel => "proxy",
            Provenance::ImportedExternal => "external",
        }
    }
}

/// Which operand pairs BEHAV metrics are computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputPolicy {
    Exhaustive,
    Sampled {
        n: usize,
        seed: u64,
    },
    /// Metrics measured elsewhere; only used for imported datasets.
    External,
}

impl InputPolicy {
    /// Exhaustive when 2N <= 16, otherwise 10^6 sampled pairs.
    pub fn default_for(kind: OperatorKind, seed: u64) -> Self {
        if 2 * kind.width() <= 16 {
            InputPolicy::Exhaustive
        } else {
            InputPolicy::Sampled { n: 1_000_000, seed }
        }
    }
}

impl fmt::Display for InputPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputPolicy::Exhaustive => f.write_str("exhaustive"),
            InputPolicy::Sampled { n, seed } => write!(f, "sampled:{n}:{seed}"),
            InputPolicy::External => f.write_str("external"),
        }
    }
}

impl FromStr for InputPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParam(format!("cannot parse input policy '{s}'"));
        match s {
            "exhaustive" => Ok(InputPolicy::Exhaustive),
            "external" => Ok(InputPolicy::External),
            _ => {
                let mut it = s.split(':');
                if it.next() != Some("sampled") {
                    return Err(bad());
                }
                let n = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                let seed = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                Ok(InputPolicy::Sampled { n, seed })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActivityPolicy {
    pub cycles: usize,
    pub seed: u64,
}

impl ActivityPolicy {
    pub const DEFAULT_CYCLES: usize = 2048;

    pub fn new(seed: u64) -> Self {
        Self { cycles: Self::DEFAULT_CYCLES, seed }
    }
}

/// Proxy cost-model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyWeights {
    pub lut_delay: f64,
    pub carry_delay: f64,
    pub unit_energy: f64,
}

impl Default for ProxyWeights {
    fn default() -> Self {
        Self { lut_delay: 1.0, carry_delay: 0.1, unit_energy: 1.0 }
    }
}

/// A set of characterized configurations of one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CharDataset {
    pub kind: OperatorKind,
    pub records: Vec<CharRecord>,
    pub provenance: Provenance,
    pub input_policy: InputPolicy,
    /// Absent for imported measurements.
    pub activity: Option<ActivityPolicy>,
    pub weights: Option<ProxyWeights>,
    pub seed: u64,
}

impl CharDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// A characterizer with the policies this dataset was produced under.
    pub fn characterizer(&self) -> Result<Characterizer> {
        match (self.provenance, self.activity) {
            (Provenance::ProxyModel, Some(activity)) => {
                Characterizer::new(self.kind, self.input_policy, activity, self.weights.unwrap_or_default())
            }
            _ => Err(Error::Schema("imported measurements cannot be reproduced by the proxy model".into())),
        }
    }

    pub fn values(&self, metric: Metric) -> Vec<f64> {
        self.records.iter().map(|r| r.metric(metric)).collect()
    }

    pub fn configs(&self) -> Vec<AxoConfig> {
        self.records.iter().map(|r| r.config).collect()
    }

    pub fn max(&self, metric: Metric) -> Option<f64> {
        self.records.iter().map(|r| r.metric(metric)).reduce(f64::max)
    }

    pub fn contains_all_zeros(&self) -> bool {
        self.records.iter().any(|r| r.config.is_all_zeros())
    }

    pub fn find(&self, config_uint: u64) -> Option<&CharRecord> {
        self.records.iter().find(|r| r.config_uint() == config_uint)
    }

    /// Records re-ordered by ascending configuration UINT.
    pub fn sorted_by_uint(&self) -> CharDataset {
        let mut out = self.clone();
        out.records.sort_by_key(|r| r.config_uint());
        out
    }

    pub(crate) fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.records.len());
        for r in &self.records {
            if !seen.insert(r.config_uint()) {
                return Err(Error::DuplicateConfig(r.config.to_bitstring()));
            }
        }
        Ok(())
    }
}

/// Operand pairs packed into simulation words, with exact results.
#[derive(Debug, Clone)]
struct Stimulus {
    width: usize,
    count: usize,
    a: Vec<u64>,
    b: Vec<u64>,
    exact: Vec<i64>,
}

impl Stimulus {
    fn from_pairs(kind: OperatorKind, pairs: impl ExactSizeIterator<Item = (i64, i64)>) -> Self {
        let width = kind.width();
        let count = pairs.len();
        let words = count.div_ceil(64);
        let mut a = vec![0u64; words * width];
        let mut b = vec![0u64; words * width];
        let mut exact = Vec::with_capacity(count);
        for (i, (x, y)) in pairs.enumerate() {
            let (w, lane) = (i / 64, i % 64);
            let (ux, uy) = (x as u64, y as u64);
            for j in 0..width {
                a[w * width + j] |= ((ux >> j) & 1) << lane;
                b[w * width + j] |= ((uy >> j) & 1) << lane;
            }
            exact.push(kind.exact(x, y));
        }
        Self { width, count, a, b, exact }
    }

    fn exhaustive(kind: OperatorKind) -> Result<Self> {
        let bits = 2 * kind.width();
        if bits > MAX_EXHAUSTIVE_INPUT_BITS {
            return Err(Error::Capacity(format!(
                "exhaustive simulation of {kind} needs 2^{bits} operand pairs (limit 2^{MAX_EXHAUSTIVE_INPUT_BITS})"
            )));
        }
        let (lo, hi) = kind.operand_range();
        let pairs = (lo..=hi).flat_map(move |b| (lo..=hi).map(move |a| (a, b)));
        let total = 1usize << bits;
        Ok(Self::from_pairs(kind, ExactLen(pairs, total)))
    }

    fn sampled(kind: OperatorKind, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("sampled input policy needs n >= 1".into()));
        }
        let (lo, hi) = kind.operand_range();
        let mut rng = rng::stream(seed, Purpose::Operands, 0);
        let pairs: Vec<(i64, i64)> = (0..n).map(|_| (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi))).collect();
        Ok(Self::from_pairs(kind, pairs.into_iter()))
    }

    fn words(&self) -> usize {
        self.count.div_ceil(64)
    }

    fn lanes(&self, word: usize) -> usize {
        (self.count - word * 64).min(64)
    }

    fn load(&self, sim: &mut Simulator<'_>, word: usize) {
        let range = word * self.width..(word + 1) * self.width;
        sim.load_words(&self.a[range.clone()], &self.b[range]);
    }
}

struct ExactLen<I>(I, usize);

impl<I: Iterator> Iterator for ExactLen<I> {
    type Item = I::Item;
    fn next(&mut self) -> Option<I::Item> {
        let item = self.0.next()?;
        self.1 -= 1;
        Some(item)
    }
    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.1, Some(self.1))
    }
}

impl<I: Iterator> ExactSizeIterator for ExactLen<I> {}

/// Characterizes configurations of one operator under fixed policies.
///
/// The operand set and the activity vectors are generated once from the
/// policy seeds and shared by every configuration, so metrics of different
/// configurations are compared on identical stimuli.
#[derive(Debug, Clone)]
pub struct Characterizer {
    netlist: OperatorNetlist,
    weights: ProxyWeights,
    input_policy: InputPolicy,
    activity: ActivityPolicy,
    behav_stimulus: Stimulus,
    activity_stimulus: Stimulus,
}

impl Characterizer {
    pub fn new(
        kind: OperatorKind,
        input_policy: InputPolicy,
        activity: ActivityPolicy,
        weights: ProxyWeights,
    ) -> Result<Self> {
        if activity.cycles < 2 {
            return Err(Error::InvalidParam(format!("activity needs >= 2 cycles, got {}", activity.cycles)));
        }
        let behav_stimulus = match input_policy {
            InputPolicy::Exhaustive => Stimulus::exhaustive(kind)?,
            InputPolicy::Sampled { n, seed } => Stimulus::sampled(kind, n, seed)?,
            InputPolicy::External => return Err(Error::InvalidParam("external inputs cannot be simulated".into())),
        };
        let (lo, hi) = kind.operand_range();
        let mut rng = rng::stream(activity.seed, Purpose::Activity, 0);
        let vectors: Vec<(i64, i64)> =
            (0..activity.cycles).map(|_| (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi))).collect();
        let activity_stimulus = Stimulus::from_pairs(kind, vectors.into_iter());
        Ok(Self {
            netlist: OperatorNetlist::build(kind),
            weights,
            input_policy,
            activity,
            behav_stimulus,
            activity_stimulus,
        })
    }

    /// Default policies: [`InputPolicy::default_for`], 2048 activity cycles.
    pub fn with_defaults(kind: OperatorKind, seed: u64) -> Result<Self> {
        Self::new(kind, InputPolicy::default_for(kind, seed), ActivityPolicy::new(seed), ProxyWeights::default())
    }

    pub fn kind(&self) -> OperatorKind {
        self.netlist.kind()
    }

    pub fn netlist(&self) -> &OperatorNetlist {
        &self.netlist
    }

    pub fn input_policy(&self) -> InputPolicy {
        self.input_policy
    }

    pub fn activity(&self) -> ActivityPolicy {
        self.activity
    }

    pub fn weights(&self) -> ProxyWeights {
        self.weights
    }

    pub fn behav(&self, config: &AxoConfig) -> Result<BehavMetrics> {
        self.netlist.check_config(config)?;
        Ok(self.behav_with(&mut Simulator::new(&self.netlist), config))
    }

    fn behav_with(&self, sim: &mut Simulator<'_>, config: &AxoConfig) -> BehavMetrics {
        let s = &self.behav_stimulus;
        let mut out = [0i64; 64];
        let mut sum_abs: u128 = 0;
        let mut sum_rel = 0.0f64;
        let mut max_abs: u64 = 0;
        let mut errors: u64 = 0;
        for w in 0..s.words() {
            let lanes = s.lanes(w);
            s.load(sim, w);
            sim.step(config);
            sim.decode_into(&mut out[..lanes]);
            for (lane, &approx) in out[..lanes].iter().enumerate() {
                let exact = s.exact[w * 64 + lane];
                let abs = exact.abs_diff(approx);
                if abs != 0 {
                    errors += 1;
                    sum_abs += abs as u128;
                    max_abs = max_abs.max(abs);
                    sum_rel += abs as f64 / exact.unsigned_abs().max(1) as f64;
                }
            }
        }
        let n = s.count as f64;
        BehavMetrics {
            avg_abs_err: sum_abs as f64 / n,
            avg_abs_rel_err: sum_rel / n,
            max_abs_err: max_abs as f64,
            err_rate: errors as f64 / n,
        }
    }

    pub fn ppa(&self, config: &AxoConfig) -> Result<PpaMetrics> {
        self.netlist.check_config(config)?;
        Ok(self.ppa_with(&mut Simulator::new(&self.netlist), config))
    }

    fn ppa_with(&self, sim: &mut Simulator<'_>, config: &AxoConfig) -> PpaMetrics {
        let cpd = critical_path(&self.netlist, config, &self.weights);
        let power = self.switching_activity(sim, config) * self.weights.unit_energy;
        PpaMetrics::from_parts(config.popcount() as u32, cpd, power)
    }

    /// Mean output toggles per cycle over all active cells.
    fn switching_activity(&self, sim: &mut Simulator<'_>, config: &AxoConfig) -> f64 {
        let nets: Vec<usize> = self
            .netlist
            .cells()
            .iter()
            .filter(|c| !c.is_removed(config))
            .flat_map(|c| c.outputs())
            .map(|n| n.index())
            .collect();
        let s = &self.activity_stimulus;
        let mut last = vec![0u64; nets.len()];
        let mut toggles: u64 = 0;
        for w in 0..s.words() {
            let lanes = s.lanes(w);
            s.load(sim, w);
            sim.step(config);
            let pair_mask = if lanes == 64 { u64::MAX >> 1 } else { (1u64 << (lanes - 1)) - 1 };
            let values = sim.values();
            for (slot, &n) in last.iter_mut().zip(&nets) {
                let v = values[n];
                toggles += ((v ^ (v >> 1)) & pair_mask).count_ones() as u64;
                if w > 0 {
                    toggles += (v & 1) ^ *slot;
                }
                *slot = (v >> (lanes - 1)) & 1;
            }
        }
        toggles as f64 / (s.count - 1) as f64
    }

    pub fn record(&self, config: &AxoConfig) -> Result<CharRecord> {
        self.netlist.check_config(config)?;
        let mut sim = Simulator::new(&self.netlist);
        Ok(self.record_with(&mut sim, config))
    }

    fn record_with(&self, sim: &mut Simulator<'_>, config: &AxoConfig) -> CharRecord {
        CharRecord { config: *config, behav: self.behav_with(sim, config), ppa: self.ppa_with(sim, config) }
    }

    /// One record per configuration, in input order. Runs in parallel; the
    /// result does not depend on the thread count.
    pub fn dataset(&self, configs: &[AxoConfig]) -> Result<CharDataset> {
        if configs.is_empty() {
            return Err(Error::Empty("no configurations to characterize".into()));
        }
        let mut seen = HashSet::with_capacity(configs.len());
        for c in configs {
            self.netlist.check_config(c)?;
            if !seen.insert(c.to_uint()) {
                return Err(Error::DuplicateConfig(c.to_bitstring()));
            }
        }
        let records =
            configs.par_iter().map_init(|| Simulator::new(&self.netlist), |sim, c| self.record_with(sim, c)).collect();
        Ok(CharDataset {
            kind: self.kind(),
            records,
            provenance: Provenance::ProxyModel,
            input_policy: self.input_policy,
            activity: Some(self.activity),
            weights: Some(self.weights),
            seed: self.activity.seed,
        })
    }
}

/// Longest weighted path through the active netlist. Removed LUTs drive
/// constants and add no delay; carry cells always conduct.
pub fn critical_path(netlist: &OperatorNetlist, config: &AxoConfig, weights: &ProxyWeights) -> f64 {
    let mut arrival = vec![0.0f64; netlist.net_count()];
    let mut longest = 0.0f64;
    for c in netlist.cells() {
        let t = if c.is_removed(config) {
            0.0
        } else {
            let delay = match c.kind {
                CellKind::Lut { .. } => weights.lut_delay,
                CellKind::CarryMux | CellKind::CarryXor => weights.carry_delay,
            };
            c.inputs.iter().map(|n| arrival[n.index()]).fold(0.0, f64::max) + delay
        };
        for n in c.outputs() {
            arrival[n.index()] = t;
        }
        longest = longest.max(t);
    }
    longest
}

/// BEHAV metrics of one configuration.
pub fn behav_characterize(kind: OperatorKind, config: &AxoConfig, input_policy: InputPolicy) -> Result<BehavMetrics> {
    Characterizer::new(kind, input_policy, ActivityPolicy::new(0), ProxyWeights::default())?.behav(config)
}

/// PPA metrics of one configuration under the default proxy weights.
pub fn ppa_characterize(netlist: &OperatorNetlist, config: &AxoConfig, activity: ActivityPolicy) -> Result<PpaMetrics> {
    netlist.check_config(config)?;
    if activity.cycles < 2 {
        return Err(Error::InvalidParam(format!("activity needs >= 2 cycles, got {}", activity.cycles)));
    }
    // Only the activity stimulus is used; a one-pair operand set keeps setup cheap.
    let kind = netlist.kind();
    let c = Characterizer::new(kind, InputPolicy::Sampled { n: 1, seed: 0 }, activity, ProxyWeights::default())?;
    c.ppa(config)
}

pub fn characterize_dataset(
    kind: OperatorKind,
    configs: &[AxoConfig],
    input_policy: InputPolicy,
    activity: ActivityPolicy,
) -> Result<CharDataset> {
    Characterizer::new(kind, input_policy, activity, ProxyWeights::default())?.dataset(configs)
}

/// `n` distinct configurations drawn uniformly, never all-zeros.
pub fn sample_configs(kind: OperatorKind, n: usize, seed: u64) -> Result<Vec<AxoConfig>> {
    let len = kind.config_length();
    let space = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
    if n as u64 > space {
        return Err(Error::Capacity(format!("cannot draw {n} distinct non-zero configurations from {space}")));
    }
    let mut rng = rng::stream(seed, Purpose::ConfigSampling, 0);
    if len <= 20 && (n as u64) * 2 > space {
        let mut all: Vec<u64> = (1..=space).collect();
        let (picked, _) = all.partial_shuffle(&mut rng, n);
        return picked.iter().map(|&u| AxoConfig::from_uint(u, len)).collect();
    }
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = rng.gen_range(1..=space);
        if seen.insert(u) {
            out.push(AxoConfig::from_uint(u, len)?);
        }
    }
    Ok(out)
}

/// Family-aware name for diagnostics.
pub fn describe(kind: OperatorKind) -> String {
    match kind.family() {
        Family::UnsignedAdder => format!("{}-bit unsigned adder", kind.width()),
        Family::SignedMultiplier => format!("{0}x{0} signed multiplier", kind.width()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::enumerate_configs;

    fn adder(n: usize) -> OperatorKind {
        OperatorKind::adder(n).unwrap()
    }

    #[test]
    fn accurate_config_has_zero_error() {
        for kind in [adder(4), adder(8), OperatorKind::multiplier(4).unwrap()] {
            let acc = AxoConfig::all_ones(kind.config_length()).unwrap();
            let m = behav_characterize(kind, &acc, InputPolicy::Exhaustive).unwrap();
            assert_eq!(m, BehavMetrics::default());
        }
    }

    #[test]
    fn three_bit_adder_max_error() {
        let cfg = AxoConfig::from_bits(&[1, 0, 1]).unwrap();
        let m = behav_characterize(adder(3), &cfg, InputPolicy::Exhaustive).unwrap();
        // (3, 1) evaluates to 2 instead of 4.
        assert!(m.max_abs_err >= 2.0);
        assert!(m.avg_abs_err <= m.max_abs_err);
    }

    #[test]
    fn oversized_exhaustive_request() {
        let kind = adder(13);
        let cfg = AxoConfig::all_ones(13).unwrap();
        assert!(matches!(behav_characterize(kind, &cfg, InputPolicy::Exhaustive), Err(Error::Capacity(_))));
    }

    #[test]
    fn eight_bit_adder_critical_path() {
        let n = OperatorNetlist::build(adder(8));
        let acc = AxoConfig::all_ones(8).unwrap();
        let cpd = critical_path(&n, &acc, &ProxyWeights::default());
        assert!((cpd - 1.8).abs() < 1e-12, "{cpd}");
        let p = ppa_characterize(&n, &acc, ActivityPolicy::new(3)).unwrap();
        assert_eq!(p.lut_util, 8);
        assert_eq!(p.cpd_proxy, cpd);
    }

    #[test]
    fn all_zeros_uses_no_luts() {
        let n = OperatorNetlist::build(adder(8));
        let p = ppa_characterize(&n, &AxoConfig::zeros(8).unwrap(), ActivityPolicy::new(3)).unwrap();
        assert_eq!(p.lut_util, 0);
        assert_eq!(p.power_proxy, 0.0);
        assert_eq!(p.pdplut, 0.0);
    }

    #[test]
    fn activity_needs_two_cycles() {
        let n = OperatorNetlist::build(adder(4));
        let acc = AxoConfig::all_ones(4).unwrap();
        assert!(ppa_characterize(&n, &acc, ActivityPolicy { cycles: 1, seed: 0 }).is_err());
    }

    #[test]
    fn product_identities() {
        let kind = OperatorKind::multiplier(4).unwrap();
        let configs = enumerate_configs(kind, false).unwrap();
        let ds = characterize_dataset(kind, &configs[..64], InputPolicy::Exhaustive, ActivityPolicy::new(1)).unwrap();
        for r in &ds.records {
            let p = r.ppa;
            assert_eq!(p.pdp, p.power_proxy * p.cpd_proxy);
            assert_eq!(p.pdplut, p.power_proxy * p.cpd_proxy * p.lut_util as f64);
            assert!(p.lut_util as usize <= kind.config_length());
            if p.pdp > 0.0 {
                assert!((p.pdplut / p.pdp - p.lut_util as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dataset_errors() {
        let kind = adder(4);
        let c = AxoConfig::from_uint(3, 4).unwrap();
        let ch = Characterizer::with_defaults(kind, 1).unwrap();
        assert!(matches!(ch.dataset(&[]), Err(Error::Empty(_))));
        assert!(matches!(ch.dataset(&[c, c]), Err(Error::DuplicateConfig(_))));
        let wrong = AxoConfig::from_uint(3, 5).unwrap();
        assert!(matches!(ch.dataset(&[wrong]), Err(Error::ConfigLength { .. })));
    }

    #[test]
    fn full_small_datasets() {
        let kind = adder(4);
        let ds =
            Characterizer::with_defaults(kind, 1).unwrap().dataset(&enumerate_configs(kind, true).unwrap()).unwrap();
        assert_eq!(ds.len(), 16);
        assert!(ds.contains_all_zeros());
    }

    #[test]
    fn sampling_is_distinct_and_deterministic() {
        let kind = OperatorKind::multiplier(8).unwrap();
        let a = sample_configs(kind, 2000, 1).unwrap();
        let b = sample_configs(kind, 2000, 1).unwrap();
        assert_eq!(a, b);
        let set: HashSet<u64> = a.iter().map(|c| c.to_uint()).collect();
        assert_eq!(set.len(), 2000);
        assert!(a.iter().all(|c| !c.is_all_zeros() && c.len() == 36));
        let one = sample_configs(adder(4), 1, 9).unwrap();
        assert!(!one[0].is_all_zeros());
        assert_eq!(sample_configs(adder(4), 15, 2).unwrap().len(), 15);
        assert!(sample_configs(adder(4), 16, 2).is_err());
    }

    #[test]
    fn input_policy_tokens() {
        for p in [InputPolicy::Exhaustive, InputPolicy::Sampled { n: 1000, seed: 4 }, InputPolicy::External] {
            assert_eq!(p.to_string().parse::<InputPolicy>().unwrap(), p);
        }
    }
}
