//! Configuration supersampling: high-width candidates predicted from
//! low-width seeds that meet scaled constraints.
//!
//! Pool files list one candidate per row:
//!
//! ```text
//! # kind=adder:8 n_noise=4 behav=avg_abs_rel_err ppa=pdplut
//! config_bits,config_uint,origin_l_uint,noise_pattern,source[,metric columns]
//! ```
//!
//! `source` is `none`, `estimator` (followed by `pred_<behav>,pred_<ppa>`)
//! or `proxy` (followed by the nine characterization metric columns).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use crate::characterize::csv::{kind_token, parse_config, parse_kind_token, parse_metrics, CSV_HEADER};
use crate::characterize::{CharDataset, CharRecord, Characterizer, Metric};
use crate::dse::{pareto_front, FrontPoint, HypervolumeResult};
use crate::error::{Error, Result};
use crate::forest::{BitClassifier, ForestRegressor};
use crate::matching::{append_noise, noise_patterns, NoiseMode};
use crate::operator::{AxoConfig, OperatorKind};
use crate::stats::bounds;
use crate::table::{self, fmt_real, parse_real, parse_uint, render_table};

pub const DEFAULT_NOISE_BITS: usize = 4;
/// Scaling factors swept by the comparison report.
pub const CANONICAL_FACTORS: [f64; 4] = [0.2, 0.5, 0.75, 1.0];

/// Short identifier for a dataset, recorded in manifests.
pub fn dataset_id(d: &CharDataset) -> String {
    format!("{}/{}/n{}/seed{}", kind_token(d.kind), d.provenance.token(), d.len(), d.seed)
}

/// Absolute limits `b_max`, `p_max` plus the source dataset's metric ranges,
/// which define the scaled space used for hypervolume.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub b_max: f64,
    pub p_max: f64,
    pub scaling_factor: f64,
    pub behav_metric: Metric,
    pub ppa_metric: Metric,
    pub source: String,
    pub behav_range: (f64, f64),
    pub ppa_range: (f64, f64),
}

fn unit(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

impl ConstraintSpec {
    pub fn feasible(&self, behav: f64, ppa: f64) -> bool {
        behav <= self.b_max && ppa <= self.p_max
    }

    /// Normalized constraint violation; 0 when feasible.
    pub fn violation(&self, behav: f64, ppa: f64) -> f64 {
        let span = |(lo, hi): (f64, f64)| if hi > lo { hi - lo } else { 1.0 };
        (behav - self.b_max).max(0.0) / span(self.behav_range) + (ppa - self.p_max).max(0.0) / span(self.ppa_range)
    }

    /// Point in the source dataset's min-max scaled space.
    pub fn scaled(&self, behav: f64, ppa: f64) -> (f64, f64) {
        (unit(behav, self.behav_range), unit(ppa, self.ppa_range))
    }

    /// Hypervolume reference point: the limits in scaled space.
    pub fn reference(&self) -> (f64, f64) {
        self.scaled(self.b_max, self.p_max)
    }

    /// Hypervolume of the feasible subset of `points` in scaled space.
    pub fn hypervolume(&self, points: &[FrontPoint]) -> HypervolumeResult {
        let scaled: Vec<FrontPoint> = points
            .iter()
            .filter(|p| self.feasible(p.behav, p.ppa))
            .map(|p| {
                let (b, q) = self.scaled(p.behav, p.ppa);
                FrontPoint { behav: b, ppa: q, config_uint: p.config_uint }
            })
            .collect();
        crate::dse::hypervolume_2d(&pareto_front(&scaled), self.reference())
    }

    /// Same limits and scaling, ignoring the dataset id.
    pub fn compatible(&self, other: &ConstraintSpec) -> bool {
        self.b_max == other.b_max
            && self.p_max == other.p_max
            && self.behav_metric == other.behav_metric
            && self.ppa_metric == other.ppa_metric
            && self.behav_range == other.behav_range
            && self.ppa_range == other.ppa_range
    }
}

pub fn derive_constraints(train: &CharDataset, factor: f64, behav: Metric, ppa: Metric) -> Result<ConstraintSpec> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::InvalidParam(format!("scaling factor {factor} outside (0, 1]")));
    }
    if train.is_empty() {
        return Err(Error::Empty("cannot derive constraints from an empty dataset".into()));
    }
    let behav_range = bounds(&train.values(behav));
    let ppa_range = bounds(&train.values(ppa));
    Ok(ConstraintSpec {
        b_max: factor * behav_range.1,
        p_max: factor * ppa_range.1,
        scaling_factor: factor,
        behav_metric: behav,
        ppa_metric: ppa,
        source: dataset_id(train),
        behav_range,
        ppa_range,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    All,
    ParetoOnly,
}

/// Low-width configs meeting the same scaling factor against the low
/// dataset's own maxima, ascending by UINT.
pub fn select_seeds(low: &CharDataset, spec: &ConstraintSpec, mode: SeedMode) -> Result<Vec<AxoConfig>> {
    if low.is_empty() {
        return Ok(Vec::new());
    }
    let f = spec.scaling_factor;
    let bb = f * bounds(&low.values(spec.behav_metric)).1;
    let pb = f * bounds(&low.values(spec.ppa_metric)).1;
    let kept: Vec<&CharRecord> =
        low.records.iter().filter(|r| r.metric(spec.behav_metric) <= bb && r.metric(spec.ppa_metric) <= pb).collect();
    let mut uints: Vec<u64> = match mode {
        SeedMode::All => kept.iter().map(|r| r.config_uint()).collect(),
        SeedMode::ParetoOnly => {
            let pts: Vec<FrontPoint> = kept
                .iter()
                .map(|r| FrontPoint {
                    behav: r.metric(spec.behav_metric),
                    ppa: r.metric(spec.ppa_metric),
                    config_uint: r.config_uint(),
                })
                .collect();
            pareto_front(&pts).points.iter().map(|p| p.config_uint).collect()
        }
    };
    uints.sort_unstable();
    uints.into_iter().map(|u| AxoConfig::from_uint(u, low.kind.config_length())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSourceKind {
    None,
    Estimator,
    Proxy,
}

impl fmt::Display for MetricSourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricSourceKind::None => "none",
            MetricSourceKind::Estimator => "estimator",
            MetricSourceKind::Proxy => "proxy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub config: AxoConfig,
    /// First `(seed, noise pattern)` that produced this config.
    pub origin_l_uint: u64,
    pub noise_pattern: u64,
    /// `(behav, ppa)` from estimators.
    pub predicted: Option<(f64, f64)>,
    /// Full proxy characterization.
    pub validated: Option<CharRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConssPool {
    pub kind: OperatorKind,
    pub n_noise: usize,
    pub behav_metric: Metric,
    pub ppa_metric: Metric,
    /// Unique by config, ascending by UINT.
    pub entries: Vec<PoolEntry>,
}

impl ConssPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn configs(&self) -> Vec<AxoConfig> {
        self.entries.iter().map(|e| e.config).collect()
    }

    pub fn source(&self) -> MetricSourceKind {
        match self.entries.first() {
            Some(e) if e.validated.is_some() => MetricSourceKind::Proxy,
            Some(e) if e.predicted.is_some() => MetricSourceKind::Estimator,
            _ => MetricSourceKind::None,
        }
    }

    /// Validated metrics where present, predicted otherwise.
    pub fn points(&self) -> Vec<FrontPoint> {
        self.entries
            .iter()
            .filter_map(|e| {
                let m = match &e.validated {
                    Some(r) => Some((r.metric(self.behav_metric), r.metric(self.ppa_metric))),
                    None => e.predicted,
                }?;
                Some(FrontPoint { behav: m.0, ppa: m.1, config_uint: e.config.to_uint() })
            })
            .collect()
    }

    /// Number of pool configs absent from `known`.
    pub fn validation_count(&self, known: &CharDataset) -> usize {
        self.entries.iter().filter(|e| known.find(e.config.to_uint()).is_none()).count()
    }
}

/// Predicts one high-width config per seed and noise pattern, drops
/// all-zeros predictions and keeps the first occurrence of each config.
pub fn supersample(
    model: &BitClassifier,
    seeds: &[AxoConfig],
    n_noise: usize,
    mode: NoiseMode,
    high_kind: OperatorKind,
    behav: Metric,
    ppa: Metric,
) -> Result<ConssPool> {
    if model.n_outputs != high_kind.config_length() {
        return Err(Error::WidthMismatch { expected: high_kind.config_length(), got: model.n_outputs });
    }
    let mut jobs = Vec::new();
    for (i, s) in seeds.iter().enumerate() {
        if s.len() + n_noise != model.n_features {
            return Err(Error::WidthMismatch { expected: model.n_features, got: s.len() + n_noise });
        }
        for p in noise_patterns(n_noise, mode, i)? {
            jobs.push((*s, p));
        }
    }
    let predicted: Vec<Vec<u8>> =
        jobs.par_iter().map(|(s, p)| model.predict(&append_noise(&s.to_bits(), *p, n_noise))).collect::<Result<_>>()?;
    let mut unique: BTreeMap<u64, PoolEntry> = BTreeMap::new();
    for ((s, p), bits) in jobs.iter().zip(predicted) {
        let config = AxoConfig::from_bits(&bits)?;
        if config.is_all_zeros() {
            continue;
        }
        unique.entry(config.to_uint()).or_insert(PoolEntry {
            config,
            origin_l_uint: s.to_uint(),
            noise_pattern: *p,
            predicted: None,
            validated: None,
        });
    }
    Ok(ConssPool {
        kind: high_kind,
        n_noise,
        behav_metric: behav,
        ppa_metric: ppa,
        entries: unique.into_values().collect(),
    })
}

pub enum MetricSource<'a> {
    Proxy(&'a Characterizer),
    Estimators { behav: &'a ForestRegressor, ppa: &'a ForestRegressor },
}

/// Fills predicted or validated metrics for every entry.
pub fn evaluate_pool(pool: &ConssPool, source: &MetricSource<'_>) -> Result<ConssPool> {
    if pool.is_empty() {
        return Err(Error::Empty("pool has no configurations".into()));
    }
    let entries = pool
        .entries
        .par_iter()
        .map(|e| {
            let mut e = e.clone();
            match source {
                MetricSource::Proxy(c) => e.validated = Some(c.record(&e.config)?),
                MetricSource::Estimators { behav, ppa } => {
                    e.predicted = Some((behav.predict_config(&e.config)?, ppa.predict_config(&e.config)?))
                }
            }
            Ok(e)
        })
        .collect::<Result<_>>()?;
    Ok(ConssPool { entries, ..pool.clone() })
}

pub fn render_pool_csv(pool: &ConssPool) -> String {
    let source = pool.source();
    let pred_b = format!("pred_{}", pool.behav_metric);
    let pred_p = format!("pred_{}", pool.ppa_metric);
    let mut header: Vec<&str> = vec!["config_bits", "config_uint", "origin_l_uint", "noise_pattern", "source"];
    match source {
        MetricSourceKind::Estimator => header.extend([pred_b.as_str(), pred_p.as_str()]),
        MetricSourceKind::Proxy => header.extend(&CSV_HEADER[2..]),
        MetricSourceKind::None => {}
    }
    let rows: Vec<Vec<String>> = pool
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![
                e.config.to_bitstring(),
                e.config.to_uint().to_string(),
                e.origin_l_uint.to_string(),
                e.noise_pattern.to_string(),
                source.to_string(),
            ];
            match source {
                MetricSourceKind::Estimator => {
                    let (b, p) = e.predicted.unwrap_or((f64::NAN, f64::NAN));
                    row.extend([fmt_real(b), fmt_real(p)]);
                }
                MetricSourceKind::Proxy => {
                    if let Some(r) = &e.validated {
                        row.extend(crate::characterize::csv::record_fields(r).into_iter().skip(2));
                    }
                }
                MetricSourceKind::None => {}
            }
            row
        })
        .collect();
    let preamble = [
        ("kind", kind_token(pool.kind)),
        ("n_noise", pool.n_noise.to_string()),
        ("behav", pool.behav_metric.to_string()),
        ("ppa", pool.ppa_metric.to_string()),
    ];
    render_table(&preamble, &header, &rows)
}

pub fn parse_pool_csv(text: &str) -> Result<ConssPool> {
    let tab = table::parse_table(text)?;
    tab.require_header(&["config_bits", "config_uint", "origin_l_uint", "noise_pattern", "source"])?;
    let kind = parse_kind_token(tab.preamble_value("kind")?)?;
    let schema = |e: Error| Error::Schema(e.to_string());
    let n_noise: usize = tab.preamble_value("n_noise")?.parse().map_err(|_| Error::Schema("bad n_noise".into()))?;
    let behav_metric: Metric = tab.preamble_value("behav")?.parse().map_err(schema)?;
    let ppa_metric: Metric = tab.preamble_value("ppa")?.parse().map_err(schema)?;
    let extra = &tab.header[5..];
    let mut entries: Vec<PoolEntry> = Vec::with_capacity(tab.rows.len());
    for (line, f) in &tab.rows {
        let line = *line;
        let config = parse_config(&f[0], &f[1], kind.config_length(), line)?;
        if config.is_all_zeros() {
            return Err(Error::parse(line, "all-zeros configuration in pool"));
        }
        if entries.last().is_some_and(|e| e.config.to_uint() >= config.to_uint()) {
            return Err(Error::parse(line, "pool rows must be unique and ascending by config_uint"));
        }
        let mut entry = PoolEntry {
            config,
            origin_l_uint: parse_uint(&f[2], line, "origin_l_uint")?,
            noise_pattern: parse_uint(&f[3], line, "noise_pattern")?,
            predicted: None,
            validated: None,
        };
        match f[4].as_str() {
            "none" if extra.is_empty() => {}
            "estimator" if extra.len() == 2 => {
                entry.predicted = Some((parse_real(&f[5], line, &extra[0])?, parse_real(&f[6], line, &extra[1])?));
            }
            "proxy" if extra == &CSV_HEADER[2..] => {
                let (behav, ppa) = parse_metrics(f, 5, line)?;
                entry.validated = Some(CharRecord { config, behav, ppa });
            }
            other => return Err(Error::parse(line, format!("source '{other}' does not match the header"))),
        }
        entries.push(entry);
    }
    Ok(ConssPool { kind, n_noise, behav_metric, ppa_metric, entries })
}

pub fn export_pool_csv(pool: &ConssPool, path: &Path) -> Result<()> {
    table::write_text(path, &render_pool_csv(pool))
}

pub fn import_pool_csv(path: &Path) -> Result<ConssPool> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pool_csv(&text)
}

/// Counts of points per cell of a `cells x cells` grid over the scaled
/// space of `spec`'s source. Points outside [0, 1] are clamped to the edge.
pub fn region_grid(points: &[FrontPoint], spec: &ConstraintSpec, cells: usize) -> Vec<Vec<u64>> {
    let cells = cells.max(1);
    let mut grid = vec![vec![0u64; cells]; cells];
    for p in points {
        let (b, q) = spec.scaled(p.behav, p.ppa);
        let idx = |v: f64| ((v.clamp(0.0, 1.0) * cells as f64) as usize).min(cells - 1);
        grid[idx(b)][idx(q)] += 1;
    }
    grid
}

pub fn render_region_grid(grid: &[Vec<u64>]) -> String {
    let mut rows = Vec::new();
    for (i, row) in grid.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            rows.push(vec![i.to_string(), j.to_string(), c.to_string()]);
        }
    }
    render_table(&[("cells", grid.len().to_string())], &["behav_cell", "ppa_cell", "count"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::{BehavMetrics, InputPolicy, PpaMetrics, Provenance};
    use crate::forest::{train_classifier, FeatureSubset, ForestParams};
    use crate::matching::{TrainingRow, TrainingSet};
    use crate::operator::enumerate_configs;

    fn synthetic(kind: OperatorKind, vals: &[(f64, f64)]) -> CharDataset {
        let records = vals
            .iter()
            .enumerate()
            .map(|(i, &(b, p))| CharRecord {
                config: AxoConfig::from_uint(i as u64 + 1, kind.config_length()).unwrap(),
                behav: BehavMetrics { avg_abs_rel_err: b, ..Default::default() },
                ppa: PpaMetrics { pdplut: p, ..Default::default() },
            })
            .collect();
        CharDataset {
            kind,
            records,
            provenance: Provenance::ImportedExternal,
            input_policy: InputPolicy::External,
            activity: None,
            weights: None,
            seed: 0,
        }
    }

    #[test]
    fn constraint_arithmetic() {
        let d = synthetic(OperatorKind::adder(8).unwrap(), &[(0.1, 10.0), (0.8, 40.0), (0.3, 20.0)]);
        let s = derive_constraints(&d, 0.5, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        assert!((s.b_max - 0.4).abs() < 1e-12 && (s.p_max - 20.0).abs() < 1e-12);
        let one = derive_constraints(&d, 1.0, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        assert_eq!((one.b_max, one.p_max), (0.8, 40.0));
        assert_eq!(one.reference(), (1.0, 1.0));
        for f in CANONICAL_FACTORS {
            assert!(derive_constraints(&d, f, Metric::AvgAbsRelErr, Metric::Pdplut).is_ok());
        }
        assert!(derive_constraints(&d, 0.0, Metric::AvgAbsRelErr, Metric::Pdplut).is_err());
        assert!(derive_constraints(&d, 1.5, Metric::AvgAbsRelErr, Metric::Pdplut).is_err());
    }

    fn mul4() -> CharDataset {
        let kind = OperatorKind::multiplier(4).unwrap();
        Characterizer::with_defaults(kind, 2).unwrap().dataset(&enumerate_configs(kind, false).unwrap()).unwrap()
    }

    #[test]
    fn seeds_match_filter_oracle() {
        let low = mul4();
        assert_eq!(low.len(), 1023);
        let high = synthetic(OperatorKind::multiplier(8).unwrap(), &[(0.0, 0.0), (2.0, 50.0), (10.0, 100.0)]);
        let full = derive_constraints(&high, 1.0, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        assert_eq!(select_seeds(&low, &full, SeedMode::All).unwrap().len(), 1023);

        let spec = derive_constraints(&high, 0.5, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        let b = low.values(Metric::AvgAbsRelErr);
        let p = low.values(Metric::Pdplut);
        let bmax = b.iter().cloned().fold(f64::MIN, f64::max);
        let pmax = p.iter().cloned().fold(f64::MIN, f64::max);
        let mut oracle: Vec<u64> = low
            .records
            .iter()
            .enumerate()
            .filter(|(i, _)| b[*i] <= 0.5 * bmax && p[*i] <= 0.5 * pmax)
            .map(|(_, r)| r.config_uint())
            .collect();
        oracle.sort_unstable();
        let all = select_seeds(&low, &spec, SeedMode::All).unwrap();
        assert_eq!(all.iter().map(|c| c.to_uint()).collect::<Vec<_>>(), oracle);
        let pareto = select_seeds(&low, &spec, SeedMode::ParetoOnly).unwrap();
        assert!(!pareto.is_empty() && pareto.iter().all(|c| all.contains(c)));

        let single = synthetic(OperatorKind::multiplier(4).unwrap(), &[(0.3, 3.0)]);
        assert_eq!(select_seeds(&single, &full, SeedMode::ParetoOnly).unwrap().len(), 1);
    }

    fn constant_model(out: Vec<u8>, n_in: usize) -> BitClassifier {
        let rows = (0..8u64)
            .map(|v| TrainingRow {
                input: (0..n_in).map(|i| ((v >> (i % 3)) & 1) as u8).collect(),
                output: out.clone(),
            })
            .collect();
        train_classifier(&TrainingSet::from_rows(rows, 0).unwrap(), &ForestParams { n_trees: 4, ..Default::default() })
            .unwrap()
            .0
    }

    fn identityish(n_noise: usize) -> BitClassifier {
        // Output = low bits, then noise bits, then zeros up to 8.
        let rows = (0..1u64 << (4 + n_noise))
            .map(|v| {
                let input: Vec<u8> = (0..4 + n_noise).map(|i| ((v >> i) & 1) as u8).collect();
                let mut output = input.clone();
                output.resize(8, 0);
                TrainingRow { input, output }
            })
            .collect();
        let p = ForestParams {
            n_trees: 3,
            max_depth: 64,
            features_per_split: FeatureSubset::All,
            bootstrap: false,
            seed: 0,
            min_samples_leaf: 1,
        };
        train_classifier(&TrainingSet::from_rows(rows, n_noise).unwrap(), &p).unwrap().0
    }

    #[test]
    fn supersample_bounds() {
        let k8 = OperatorKind::adder(8).unwrap();
        let seeds: Vec<AxoConfig> = (1..=5).map(|u| AxoConfig::from_uint(u, 4).unwrap()).collect();
        let m = |n| identityish(n);
        let p0 =
            supersample(&m(0), &seeds, 0, NoiseMode::EnumerateAll, k8, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        assert_eq!(p0.len(), 5);
        let p3 = supersample(&m(3), &seeds[..1], 3, NoiseMode::EnumerateAll, k8, Metric::AvgAbsRelErr, Metric::Pdplut)
            .unwrap();
        assert_eq!(p3.len(), 8);
        assert!(p3.entries.windows(2).all(|w| w[0].config.to_uint() < w[1].config.to_uint()));
        let again =
            supersample(&m(3), &seeds[..1], 3, NoiseMode::EnumerateAll, k8, Metric::AvgAbsRelErr, Metric::Pdplut)
                .unwrap();
        assert_eq!(p3, again);

        let c = constant_model(vec![1, 1, 0, 1, 0, 0, 1, 1], 6);
        let pc = supersample(&c, &seeds, 2, NoiseMode::EnumerateAll, k8, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        assert_eq!(pc.len(), 1);
        let z = constant_model(vec![0; 8], 6);
        assert!(supersample(&z, &seeds, 2, NoiseMode::EnumerateAll, k8, Metric::AvgAbsRelErr, Metric::Pdplut)
            .unwrap()
            .is_empty());
        assert!(matches!(
            supersample(&c, &seeds, 1, NoiseMode::EnumerateAll, k8, Metric::AvgAbsRelErr, Metric::Pdplut),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn evaluate_and_round_trip() {
        let k8 = OperatorKind::adder(8).unwrap();
        let c = constant_model(vec![1; 8], 6);
        let seeds = vec![AxoConfig::from_uint(3, 4).unwrap()];
        let pool =
            supersample(&c, &seeds, 2, NoiseMode::EnumerateAll, k8, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        assert_eq!(
            render_pool_csv(&pool).lines().nth(1).unwrap(),
            "config_bits,config_uint,origin_l_uint,noise_pattern,source"
        );
        assert_eq!(parse_pool_csv(&render_pool_csv(&pool)).unwrap(), pool);

        let ch = Characterizer::with_defaults(k8, 1).unwrap();
        let v = evaluate_pool(&pool, &MetricSource::Proxy(&ch)).unwrap();
        let r = v.entries[0].validated.unwrap();
        assert_eq!(r.behav.avg_abs_err, 0.0);
        assert_eq!(r.behav.err_rate, 0.0);
        assert_eq!(evaluate_pool(&v, &MetricSource::Proxy(&ch)).unwrap(), v);
        assert_eq!(parse_pool_csv(&render_pool_csv(&v)).unwrap(), v);

        let d = Characterizer::with_defaults(k8, 1).unwrap().dataset(&enumerate_configs(k8, false).unwrap()).unwrap();
        let fp = crate::forest::ForestParams { n_trees: 4, ..Default::default() };
        let (eb, _) = crate::forest::train_regressor(&d, Metric::AvgAbsRelErr, &fp).unwrap();
        let (ep, _) = crate::forest::train_regressor(&d, Metric::Pdplut, &fp).unwrap();
        let e = evaluate_pool(&pool, &MetricSource::Estimators { behav: &eb, ppa: &ep }).unwrap();
        assert_eq!(e.source(), MetricSourceKind::Estimator);
        assert_eq!(parse_pool_csv(&render_pool_csv(&e)).unwrap(), e);
        assert_eq!(v.validation_count(&d), 0);
    }

    #[test]
    fn grid_counts_total() {
        let d = synthetic(OperatorKind::adder(8).unwrap(), &[(0.0, 0.0), (1.0, 1.0)]);
        let spec = derive_constraints(&d, 1.0, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        let pts: Vec<FrontPoint> =
            (0..10).map(|i| FrontPoint { behav: i as f64 / 9.0, ppa: 0.5, config_uint: i }).collect();
        let g = region_grid(&pts, &spec, 4);
        assert_eq!(g.iter().flatten().sum::<u64>(), 10);
        assert_eq!(g[3][2], 3);
    }
}
