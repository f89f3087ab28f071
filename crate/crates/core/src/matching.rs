//! Nearest-neighbor pairing of high-width designs with low-width designs in
//! the scaled metric plane, and the noise-augmented training sets built
//! from those pairs.

use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;

use crate::characterize::csv::parse_kind_token;
use crate::characterize::{CharDataset, Metric};
use crate::error::{Error, Result};
use crate::operator::{format_bitstring, parse_bitstring, AxoConfig, OperatorKind};
use crate::rng::{self, Purpose};
use crate::stats::{distance, minmax_scale, DistanceKind, SignedDistance};
use crate::table::{self, fmt_real, render_table};

/// Largest noise width for which every pattern is enumerated.
pub const MAX_ENUMERATED_NOISE_BITS: usize = 12;
/// Largest noise width accepted at all.
pub const MAX_NOISE_BITS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub l_config: AxoConfig,
    pub h_config: AxoConfig,
    pub distance: SignedDistance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchDataset {
    pub low_kind: OperatorKind,
    pub high_kind: OperatorKind,
    /// One pair per high-width record, ascending by `h_config` UINT.
    pub pairs: Vec<MatchedPair>,
    pub distance_kind: DistanceKind,
}

impl MatchDataset {
    /// Number of high-width configs matched to each low-width config that
    /// was chosen at least once, ascending by low UINT.
    pub fn multiplicity(&self) -> Vec<(u64, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for p in &self.pairs {
            *counts.entry(p.l_config.to_uint()).or_insert(0) += 1;
        }
        counts.into_iter().collect()
    }
}

/// Matches every record of `high` to its nearest record of `low`. Each
/// dataset is min-max scaled on its own; ties go to the lowest low UINT.
pub fn match_datasets(
    low: &CharDataset,
    high: &CharDataset,
    behav: Metric,
    ppa: Metric,
    kind: DistanceKind,
) -> Result<MatchDataset> {
    let low = low.sorted_by_uint();
    let high = high.sorted_by_uint();
    let l_pts = minmax_scale(&low, behav, ppa)?;
    let h_pts = minmax_scale(&high, behav, ppa)?;

    let pairs = h_pts
        .par_iter()
        .zip(&high.records)
        .map(|(h, h_rec)| {
            let mut best: Option<(usize, SignedDistance)> = None;
            for (i, l) in l_pts.iter().enumerate() {
                // Reference is the candidate L point, so signs read as the
                // position of h relative to l.
                let d = distance(l, h, kind);
                if best.as_ref().is_none_or(|b| d.value < b.1.value) {
                    best = Some((i, d));
                }
            }
            let (i, d) = best.expect("low dataset is non-empty");
            MatchedPair { l_config: low.records[i].config, h_config: h_rec.config, distance: d }
        })
        .collect();
    Ok(MatchDataset { low_kind: low.kind, high_kind: high.kind, pairs, distance_kind: kind })
}

pub fn render_matches(m: &MatchDataset) -> String {
    let rows: Vec<Vec<String>> = m
        .pairs
        .iter()
        .map(|p| {
            vec![
                p.h_config.to_uint().to_string(),
                p.l_config.to_uint().to_string(),
                fmt_real(p.distance.value),
                p.distance.sign_b.to_string(),
                p.distance.sign_p.to_string(),
            ]
        })
        .collect();
    let preamble =
        [("low", kind_token(m.low_kind)), ("high", kind_token(m.high_kind)), ("distance", m.distance_kind.to_string())];
    render_table(&preamble, &["h_uint", "l_uint", "distance", "sign_b", "sign_p"], &rows)
}

fn kind_token(kind: OperatorKind) -> String {
    crate::characterize::csv::kind_token(kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// All `2^n` patterns per pair, ascending.
    EnumerateAll,
    /// `k` distinct patterns per pair drawn from a seeded stream.
    Sample { k: usize, seed: u64 },
}

/// Where a training set came from. Written to the CSV preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingOrigin {
    pub low_kind: OperatorKind,
    pub high_kind: OperatorKind,
    pub distance_kind: DistanceKind,
    pub noise_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingRow {
    /// Low config bits `l_0..l_{L-1}` followed by the noise bits.
    pub input: Vec<u8>,
    pub output: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub input_width: usize,
    pub output_width: usize,
    pub n_noise: usize,
    pub rows: Vec<TrainingRow>,
    pub origin: Option<TrainingOrigin>,
}

impl TrainingSet {
    /// Builds a set from raw rows, checking every row has the same widths.
    pub fn from_rows(rows: Vec<TrainingRow>, n_noise: usize) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Empty("training set has no rows".into()))?;
        let (input_width, output_width) = (first.input.len(), first.output.len());
        if input_width < n_noise {
            return Err(Error::InvalidParam(format!("{n_noise} noise bits exceed input width {input_width}")));
        }
        for r in &rows {
            if r.input.len() != input_width {
                return Err(Error::WidthMismatch { expected: input_width, got: r.input.len() });
            }
            if r.output.len() != output_width {
                return Err(Error::WidthMismatch { expected: output_width, got: r.output.len() });
            }
            if r.input.iter().chain(&r.output).any(|&b| b > 1) {
                return Err(Error::InvalidParam("training bits must be 0 or 1".into()));
            }
        }
        Ok(TrainingSet { input_width, output_width, n_noise, rows, origin: None })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Noise patterns for pair `index`, each as `n_noise` bits (bit 0 first).
pub fn noise_patterns(n_noise: usize, mode: NoiseMode, index: usize) -> Result<Vec<u64>> {
    if n_noise > MAX_NOISE_BITS {
        return Err(Error::Capacity(format!("{n_noise} noise bits exceeds the limit of {MAX_NOISE_BITS}")));
    }
    let space = 1u64 << n_noise;
    match mode {
        NoiseMode::EnumerateAll => {
            if n_noise > MAX_ENUMERATED_NOISE_BITS {
                return Err(Error::Capacity(format!(
                    "enumerating {n_noise} noise bits exceeds the limit of {MAX_ENUMERATED_NOISE_BITS}"
                )));
            }
            Ok((0..space).collect())
        }
        NoiseMode::Sample { k, seed } => {
            if k == 0 || k as u64 > space {
                return Err(Error::InvalidParam(format!("cannot draw {k} distinct patterns from {space}")));
            }
            let mut rng = rng::stream(seed, Purpose::Noise, index as u64);
            let mut p: Vec<u64> = index::sample(&mut rng, space as usize, k).into_iter().map(|v| v as u64).collect();
            p.sort_unstable();
            Ok(p)
        }
    }
}

/// Appends `n_noise` bits of `pattern` to `bits`.
pub fn append_noise(bits: &[u8], pattern: u64, n_noise: usize) -> Vec<u8> {
    let mut v = bits.to_vec();
    v.extend((0..n_noise).map(|i| ((pattern >> i) & 1) as u8));
    v
}

/// Expands every pair into one row per noise pattern.
pub fn augment_with_noise(m: &MatchDataset, n_noise: usize, mode: NoiseMode) -> Result<TrainingSet> {
    if m.pairs.is_empty() {
        return Err(Error::Empty("match dataset has no pairs".into()));
    }
    let mut rows = Vec::new();
    for (i, p) in m.pairs.iter().enumerate() {
        let l_bits = p.l_config.to_bits();
        let out = p.h_config.to_bits();
        for pattern in noise_patterns(n_noise, mode, i)? {
            rows.push(TrainingRow { input: append_noise(&l_bits, pattern, n_noise), output: out.clone() });
        }
    }
    let mut set = TrainingSet::from_rows(rows, n_noise)?;
    set.origin = Some(TrainingOrigin {
        low_kind: m.low_kind,
        high_kind: m.high_kind,
        distance_kind: m.distance_kind,
        noise_seed: match mode {
            NoiseMode::EnumerateAll => None,
            NoiseMode::Sample { seed, .. } => Some(seed),
        },
    });
    Ok(set)
}

pub const TRAINING_HEADER: [&str; 2] = ["input_bits", "output_bits"];

pub fn render_training_csv(t: &TrainingSet) -> String {
    let none = || "none".to_string();
    let o = t.origin;
    let preamble = [
        ("low", o.map_or_else(none, |o| kind_token(o.low_kind))),
        ("high", o.map_or_else(none, |o| kind_token(o.high_kind))),
        ("distance", o.map_or_else(none, |o| o.distance_kind.to_string())),
        ("n_noise", t.n_noise.to_string()),
        ("seed", o.and_then(|o| o.noise_seed).map_or_else(none, |s| s.to_string())),
    ];
    let rows: Vec<Vec<String>> =
        t.rows.iter().map(|r| vec![format_bitstring(&r.input), format_bitstring(&r.output)]).collect();
    render_table(&preamble, &TRAINING_HEADER, &rows)
}

pub fn parse_training_csv(text: &str) -> Result<TrainingSet> {
    let tab = table::parse_table(text)?;
    tab.require_header(&TRAINING_HEADER)?;
    if tab.header.len() != TRAINING_HEADER.len() {
        return Err(Error::Schema(format!("unexpected columns in '{}'", tab.header.join(","))));
    }
    let n_noise: usize =
        tab.preamble_value("n_noise")?.parse().map_err(|_| Error::Schema("n_noise is not a count".into()))?;
    let mut rows = Vec::with_capacity(tab.rows.len());
    for (line, f) in &tab.rows {
        let input = parse_bitstring(&f[0]).map_err(|e| Error::parse(*line, e.to_string()))?;
        let output = parse_bitstring(&f[1]).map_err(|e| Error::parse(*line, e.to_string()))?;
        rows.push(TrainingRow { input, output });
    }
    let mut set = TrainingSet::from_rows(rows, n_noise)?;
    let low = tab.preamble_value("low")?;
    if low != "none" {
        let seed = tab.preamble_value("seed")?;
        set.origin = Some(TrainingOrigin {
            low_kind: parse_kind_token(low)?,
            high_kind: parse_kind_token(tab.preamble_value("high")?)?,
            distance_kind: tab.preamble_value("distance")?.parse().map_err(|e: Error| Error::Schema(e.to_string()))?,
            noise_seed: if seed == "none" {
                None
            } else {
                Some(seed.parse().map_err(|_| Error::Schema(format!("bad seed '{seed}'")))?)
            },
        });
        let low_len = set.origin.unwrap().low_kind.config_length();
        if set.input_width != low_len + n_noise {
            return Err(Error::WidthMismatch { expected: low_len + n_noise, got: set.input_width });
        }
    }
    Ok(set)
}

pub fn export_training_csv(t: &TrainingSet, path: &Path) -> Result<()> {
    table::write_text(path, &render_training_csv(t))
}

pub fn import_training_csv(path: &Path) -> Result<TrainingSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_training_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::Characterizer;
    use crate::operator::enumerate_configs;

    fn adder_dataset(width: usize) -> CharDataset {
        let kind = OperatorKind::adder(width).unwrap();
        Characterizer::with_defaults(kind, 7).unwrap().dataset(&enumerate_configs(kind, false).unwrap()).unwrap()
    }

    fn brute_force(low: &CharDataset, high: &CharDataset, kind: DistanceKind) -> Vec<(u64, u64)> {
        let norm = |d: &CharDataset| {
            let b = crate::stats::minmax(&d.values(Metric::AvgAbsRelErr));
            let p = crate::stats::minmax(&d.values(Metric::Pdplut));
            d.records.iter().enumerate().map(|(i, r)| (r.config_uint(), b[i], p[i])).collect::<Vec<_>>()
        };
        let (l, h) = (norm(low), norm(high));
        let mut out: Vec<(u64, u64)> = h
            .iter()
            .map(|&(hu, hb, hp)| {
                let mut best = (u64::MAX, f64::INFINITY);
                for &(lu, lb, lp) in &l {
                    let d = kind.magnitude(hb - lb, hp - lp);
                    if d < best.1 || (d == best.1 && lu < best.0) {
                        best = (lu, d);
                    }
                }
                (hu, best.0)
            })
            .collect();
        out.sort_unstable();
        out
    }

    #[test]
    fn adder_match_equals_brute_force() {
        let (l, h) = (adder_dataset(4), adder_dataset(8));
        for kind in DistanceKind::ALL {
            let m = match_datasets(&l, &h, Metric::AvgAbsRelErr, Metric::Pdplut, kind).unwrap();
            let got: Vec<(u64, u64)> = m.pairs.iter().map(|p| (p.h_config.to_uint(), p.l_config.to_uint())).collect();
            assert_eq!(got, brute_force(&l, &h, kind));
            assert_eq!(m.multiplicity().iter().map(|c| c.1).sum::<usize>(), h.len());
        }
    }

    #[test]
    fn coincident_point_matches_at_zero() {
        let mut l = adder_dataset(4);
        l.records.truncate(3);
        for (i, r) in l.records.iter_mut().enumerate() {
            r.behav.avg_abs_rel_err = i as f64;
            r.ppa.pdplut = i as f64;
        }
        let mut h = l.clone();
        h.records.truncate(1);
        let m = match_datasets(&l, &h, Metric::AvgAbsRelErr, Metric::Pdplut, DistanceKind::Euclidean).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.pairs[0].l_config, l.records[0].config);
        assert_eq!(m.pairs[0].distance.value, 0.0);
        h.records.clear();
        assert!(match_datasets(&l, &h, Metric::AvgAbsRelErr, Metric::Pdplut, DistanceKind::Euclidean).is_err());
    }

    fn toy_matches(n: usize) -> MatchDataset {
        let (lk, hk) = (OperatorKind::adder(4).unwrap(), OperatorKind::adder(8).unwrap());
        let pairs = (0..n)
            .map(|i| MatchedPair {
                l_config: AxoConfig::from_uint((i % 3 + 1) as u64, 4).unwrap(),
                h_config: AxoConfig::from_uint(i as u64 * 7 + 1, 8).unwrap(),
                distance: SignedDistance { value: 0.0, sign_b: 0, sign_p: 0, kind: DistanceKind::Euclidean },
            })
            .collect();
        MatchDataset { low_kind: lk, high_kind: hk, pairs, distance_kind: DistanceKind::Euclidean }
    }

    #[test]
    fn augmentation_counts() {
        let m = toy_matches(10);
        let t0 = augment_with_noise(&m, 0, NoiseMode::EnumerateAll).unwrap();
        assert_eq!(t0.len(), 10);
        assert_eq!(t0.rows[0].input, m.pairs[0].l_config.to_bits());
        let t2 = augment_with_noise(&m, 2, NoiseMode::EnumerateAll).unwrap();
        assert_eq!(t2.len(), 40);
        assert_eq!(t2.input_width, 6);
        for chunk in t2.rows.chunks(4) {
            assert!(chunk.iter().all(|r| r.output == chunk[0].output && r.input[..4] == chunk[0].input[..4]));
        }
        let s = augment_with_noise(&m, 6, NoiseMode::Sample { k: 5, seed: 3 }).unwrap();
        assert_eq!(s.len(), 50);
        assert_eq!(s, augment_with_noise(&m, 6, NoiseMode::Sample { k: 5, seed: 3 }).unwrap());
        assert!(matches!(augment_with_noise(&m, 13, NoiseMode::EnumerateAll), Err(Error::Capacity(_))));
        assert!(augment_with_noise(&m, 2, NoiseMode::Sample { k: 5, seed: 0 }).is_err());
    }

    #[test]
    fn training_csv_round_trip() {
        let t = augment_with_noise(&toy_matches(4), 2, NoiseMode::Sample { k: 3, seed: 9 }).unwrap();
        let text = render_training_csv(&t);
        assert!(text
            .starts_with("# low=adder:4 high=adder:8 distance=euclidean n_noise=2 seed=9\ninput_bits,output_bits\n"));
        assert_eq!(parse_training_csv(&text).unwrap(), t);
        let bad = text.replacen("n_noise=2", "n_noise=3", 1);
        assert!(matches!(parse_training_csv(&bad), Err(Error::WidthMismatch { .. })));
    }
}
