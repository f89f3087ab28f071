//! Scaling, distance measures, clustering and trend analysis over
//! characterization datasets.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::characterize::{CharDataset, Metric};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::table::{fmt_real, render_table};

/// A design point in the min-max scaled BEHAV-PPA plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPoint {
    pub behav_scaled: f64,
    pub ppa_scaled: f64,
    pub source_uint: u64,
}

impl ScaledPoint {
    pub fn xy(&self) -> (f64, f64) {
        (self.behav_scaled, self.ppa_scaled)
    }
}

/// `(x - min) / (max - min)`; a constant column maps to 0.
pub fn minmax(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = bounds(values);
    let span = hi - lo;
    values.iter().map(|&v| if span > 0.0 { (v - lo) / span } else { 0.0 }).collect()
}

pub(crate) fn bounds(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Scales both metrics of `dataset` into [0, 1] using its own extremes.
pub fn minmax_scale(dataset: &CharDataset, behav: Metric, ppa: Metric) -> Result<Vec<ScaledPoint>> {
    if dataset.is_empty() {
        return Err(Error::Empty("cannot scale an empty dataset".into()));
    }
    let b = minmax(&dataset.values(behav));
    let p = minmax(&dataset.values(ppa));
    Ok(dataset
        .records
        .iter()
        .zip(b.into_iter().zip(p))
        .map(|(r, (behav_scaled, ppa_scaled))| ScaledPoint { behav_scaled, ppa_scaled, source_uint: r.config_uint() })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Euclidean,
    Manhattan,
    Pareto,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [DistanceKind::Euclidean, DistanceKind::Manhattan, DistanceKind::Pareto];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Manhattan => "manhattan",
            DistanceKind::Pareto => "pareto",
        }
    }

    /// Unsigned distance for coordinate deltas `(db, dp)`.
    #[inline]
    pub fn magnitude(self, db: f64, dp: f64) -> f64 {
        match self {
            DistanceKind::Euclidean => (db * db + dp * dp).sqrt(),
            DistanceKind::Manhattan => db.abs() + dp.abs(),
            // One point dominates the other: full L1 separation. A trade-off
            // pair is only as far apart as its smaller delta.
            DistanceKind::Pareto => {
                if db * dp >= 0.0 {
                    db.abs() + dp.abs()
                } else {
                    db.abs().min(dp.abs())
                }
            }
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParam(format!("unknown distance '{s}'")))
    }
}

/// Distance plus the side on which the other point lies on each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedDistance {
    pub value: f64,
    /// `sign(B_other - B_ref)`.
    pub sign_b: i8,
    /// `sign(P_other - P_ref)`.
    pub sign_p: i8,
    pub kind: DistanceKind,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Distance from the reference point `p` to `q`.
pub fn distance(p: &ScaledPoint, q: &ScaledPoint, kind: DistanceKind) -> SignedDistance {
    let db = q.behav_scaled - p.behav_scaled;
    let dp = q.ppa_scaled - p.ppa_scaled;
    SignedDistance { value: kind.magnitude(db, dp), sign_b: sign(db), sign_p: sign(dp), kind }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub centroid: (f64, f64),
    pub member_uints: Vec<u64>,
    /// Counter-clockwise convex hull of the members.
    pub hull: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub clusters: Vec<Cluster>,
    /// Cluster index of every input point.
    pub assignments: Vec<usize>,
    pub sse: f64,
    /// SSE after each assignment step.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    dx * dx + dy * dy
}

fn nearest(p: (f64, f64), centroids: &[(f64, f64)]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Lloyd's algorithm with seeded farthest-point initialization.
pub fn kmeans(points: &[ScaledPoint], k: usize, seed: u64, max_iter: usize) -> Result<KMeansResult> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidParam(format!("k = {k} outside 1..={}", points.len())));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(ScaledPoint::xy).collect();
    let mut rng = rng::stream(seed, Purpose::KMeans, 0);
    let mut centroids = vec![xy[rng.gen_range(0..xy.len())]];
    let mut min_d: Vec<f64> = xy.iter().map(|&p| sq_dist(p, centroids[0])).collect();
    while centroids.len() < k {
        let (far, _) = min_d
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        let c = xy[far];
        centroids.push(c);
        for (m, &p) in min_d.iter_mut().zip(&xy) {
            *m = m.min(sq_dist(p, c));
        }
    }

    let mut assignments = vec![usize::MAX; xy.len()];
    let mut sse_history = Vec::new();
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut sse = 0.0;
        for (a, &p) in assignments.iter_mut().zip(&xy) {
            let (c, d) = nearest(p, &centroids);
            sse += d;
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        sse_history.push(sse);
        iterations += 1;
        if !changed || iterations >= max_iter.max(1) {
            break;
        }
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (&a, &p) in assignments.iter().zip(&xy) {
            sums[a].0 += p.0;
            sums[a].1 += p.1;
            sums[a].2 += 1;
        }
        for (c, s) in centroids.iter_mut().zip(&sums) {
            if s.2 > 0 {
                *c = (s.0 / s.2 as f64, s.1 / s.2 as f64);
            }
        }
    }

    let clusters = (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..xy.len()).filter(|&i| assignments[i] == c).collect();
            let pts: Vec<(f64, f64)> = members.iter().map(|&i| xy[i]).collect();
            let centroid = if pts.is_empty() {
                centroids[c]
            } else {
                let n = pts.len() as f64;
                (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n)
            };
            Cluster {
                centroid,
                member_uints: members.iter().map(|&i| points[i].source_uint).collect(),
                hull: if pts.is_empty() { Vec::new() } else { convex_hull(&pts) },
            }
        })
        .collect();
    let sse = *sse_history.last().expect("at least one iteration");
    Ok(KMeansResult { clusters, assignments, sse, sse_history, iterations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElbowResult {
    pub k: usize,
    /// `sse[i]` is the final SSE for `k = i + 1`.
    pub sse: Vec<f64>,
}

pub const KMEANS_MAX_ITER: usize = 300;

/// Picks `k` in `[1, k_max]` at the largest second difference of SSE.
pub fn elbow_select(points: &[ScaledPoint], k_max: usize, seed: u64) -> Result<ElbowResult> {
    if points.is_empty() || k_max == 0 {
        return Err(Error::InvalidParam("elbow selection needs points and k_max >= 1".into()));
    }
    let k_max = k_max.min(points.len());
    // One extra k so the second difference exists at k_max.
    let k_eval = (k_max + 1).min(points.len());
    let sse: Vec<f64> =
        (1..=k_eval).map(|k| kmeans(points, k, seed, KMEANS_MAX_ITER).map(|r| r.sse)).collect::<Result<_>>()?;
    let mut best = (1, f64::NEG_INFINITY);
    if sse[0] > 0.0 {
        for k in 2..=k_max.min(k_eval - 1) {
            let d2 = sse[k - 2] - 2.0 * sse[k - 1] + sse[k];
            if d2 > best.1 {
                best = (k, d2);
            }
        }
    }
    Ok(ElbowResult { k: best.0, sse: sse[..k_max].to_vec() })
}

/// Means of the min-max scaled `metric` over consecutive disjoint windows
/// of `window` records in ascending UINT order; the last window may be short.
pub fn windowed_trend(dataset: &CharDataset, metric: Metric, window: usize) -> Result<Vec<(usize, f64)>> {
    if window == 0 {
        return Err(Error::InvalidParam("window must be >= 1".into()));
    }
    let sorted = dataset.sorted_by_uint();
    let scaled = minmax(&sorted.values(metric));
    Ok(scaled.chunks(window).enumerate().map(|(i, w)| (i, w.iter().sum::<f64>() / w.len() as f64)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub kind: DistanceKind,
    /// `bins + 1` edges over `[0, max]`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub mean: f64,
    pub excess_kurtosis: f64,
}

/// Histogram of all `|L| x |H|` pairwise distances, each dataset scaled by
/// its own extremes.
pub fn distance_histogram(
    low: &CharDataset,
    high: &CharDataset,
    behav: Metric,
    ppa: Metric,
    kind: DistanceKind,
    bins: usize,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParam("histogram needs >= 1 bin".into()));
    }
    let l = minmax_scale(low, behav, ppa)?;
    let h = minmax_scale(high, behav, ppa)?;
    let row = |p: &ScaledPoint| -> Vec<f64> { h.iter().map(|q| distance(p, q, kind).value).collect() };

    // Pass 1: count, sum, max. Rows are reduced in order for determinism.
    let stats: Vec<(f64, f64)> = l
        .par_iter()
        .map(|p| {
            let r = row(p);
            (r.iter().sum::<f64>(), r.iter().copied().fold(0.0, f64::max))
        })
        .collect();
    let total = (l.len() * h.len()) as u64;
    let mean = stats.iter().map(|s| s.0).sum::<f64>() / total as f64;
    let max = stats.iter().map(|s| s.1).fold(0.0, f64::max);

    // Pass 2: central moments and binning.
    let width = if max > 0.0 { max / bins as f64 } else { 1.0 };
    let rows: Vec<(f64, f64, Vec<u64>)> = l
        .par_iter()
        .map(|p| {
            let mut counts = vec![0u64; bins];
            let (mut m2, mut m4) = (0.0, 0.0);
            for d in row(p) {
                let c = d - mean;
                m2 += c * c;
                m4 += c * c * c * c;
                counts[((d / width) as usize).min(bins - 1)] += 1;
            }
            (m2, m4, counts)
        })
        .collect();
    let mut counts = vec![0u64; bins];
    let (mut m2, mut m4) = (0.0, 0.0);
    for (a, b, c) in rows {
        m2 += a;
        m4 += b;
        for (dst, v) in counts.iter_mut().zip(c) {
            *dst += v;
        }
    }
    let n = total as f64;
    let (m2, m4) = (m2 / n, m4 / n);
    let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    let edges = (0..=bins).map(|i| i as f64 * width).collect();
    Ok(Histogram { kind, edges, counts, total, mean, excess_kurtosis })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counter-clockwise convex hull, starting at the lowest-x (then lowest-y)
/// vertex. Collinear points are dropped, so a collinear set yields its two
/// extreme points.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

// Plot-data emitters. Each returns CSV text.

pub fn render_scaled_points(points: &[ScaledPoint]) -> String {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![p.source_uint.to_string(), fmt_real(p.behav_scaled), fmt_real(p.ppa_scaled)])
        .collect();
    render_table(&[], &["config_uint", "behav_scaled", "ppa_scaled"], &rows)
}

pub fn render_assignments(points: &[ScaledPoint], result: &KMeansResult) -> String {
    let rows: Vec<Vec<String>> =
        points.iter().zip(&result.assignments).map(|(p, a)| vec![p.source_uint.to_string(), a.to_string()]).collect();
    render_table(&[], &["config_uint", "cluster"], &rows)
}

pub fn render_clusters(result: &KMeansResult) -> String {
    let mut rows = Vec::new();
    for (i, c) in result.clusters.iter().enumerate() {
        rows.push(vec![i.to_string(), "centroid".into(), "0".into(), fmt_real(c.centroid.0), fmt_real(c.centroid.1)]);
        for (j, v) in c.hull.iter().enumerate() {
            rows.push(vec![i.to_string(), "hull".into(), j.to_string(), fmt_real(v.0), fmt_real(v.1)]);
        }
    }
    render_table(&[], &["cluster", "role", "vertex", "behav_scaled", "ppa_scaled"], &rows)
}

pub fn render_elbow(elbow: &ElbowResult) -> String {
    let rows: Vec<Vec<String>> = elbow
        .sse
        .iter()
        .enumerate()
        .map(|(i, s)| vec![(i + 1).to_string(), fmt_real(*s), ((i + 1 == elbow.k) as u8).to_string()])
        .collect();
    render_table(&[("chosen_k", elbow.k.to_string())], &["k", "sse", "chosen"], &rows)
}

pub fn render_trend(trend: &[(usize, f64)]) -> String {
    let rows: Vec<Vec<String>> = trend.iter().map(|(i, v)| vec![i.to_string(), fmt_real(*v)]).collect();
    render_table(&[], &["window", "mean_scaled"], &rows)
}

pub fn render_histogram(h: &Histogram) -> String {
    let rows: Vec<Vec<String>> = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| vec![fmt_real(h.edges[i]), fmt_real(h.edges[i + 1]), c.to_string()])
        .collect();
    let preamble = [
        ("distance", h.kind.to_string()),
        ("total", h.total.to_string()),
        ("mean", fmt_real(h.mean)),
        ("excess_kurtosis", fmt_real(h.excess_kurtosis)),
    ];
    render_table(&preamble, &["bin_lo", "bin_hi", "count"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::{CharRecord, Characterizer, InputPolicy, Provenance};
    use crate::operator::{enumerate_configs, AxoConfig, OperatorKind};
    use proptest::prelude::*;

    fn pt(b: f64, p: f64, u: u64) -> ScaledPoint {
        ScaledPoint { behav_scaled: b, ppa_scaled: p, source_uint: u }
    }

    fn dataset_from(kind: OperatorKind, values: &[(f64, f64)]) -> CharDataset {
        let records = values
            .iter()
            .enumerate()
            .map(|(i, &(b, p))| {
                let mut r = CharRecord {
                    config: AxoConfig::from_uint(i as u64, kind.config_length()).unwrap(),
                    behav: Default::default(),
                    ppa: Default::default(),
                };
                r.behav.avg_abs_rel_err = b;
                r.ppa.pdplut = p;
                r
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
    fn minmax_examples() {
        assert_eq!(minmax(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax(&[3.0, 3.0, 3.0]), vec![0.0, 0.0, 0.0]);
        let kind = OperatorKind::adder(4).unwrap();
        assert!(minmax_scale(&dataset_from(kind, &[]), Metric::AvgAbsRelErr, Metric::Pdplut).is_err());
    }

    #[test]
    fn scaled_adder_metrics_in_unit_range() {
        let kind = OperatorKind::adder(8).unwrap();
        let ds =
            Characterizer::with_defaults(kind, 1).unwrap().dataset(&enumerate_configs(kind, true).unwrap()).unwrap();
        let pts = minmax_scale(&ds, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        assert!(pts.iter().all(|p| (0.0..=1.0).contains(&p.behav_scaled) && (0.0..=1.0).contains(&p.ppa_scaled)));
    }

    #[test]
    fn distance_examples() {
        let o = pt(0.0, 0.0, 0);
        let q = pt(0.3, 0.4, 1);
        assert!((distance(&o, &q, DistanceKind::Euclidean).value - 0.5).abs() < 1e-12);
        assert!((distance(&o, &q, DistanceKind::Manhattan).value - 0.7).abs() < 1e-12);
        let d = distance(&o, &q, DistanceKind::Pareto);
        assert!((d.value - 0.7).abs() < 1e-12);
        assert_eq!((d.sign_b, d.sign_p), (1, 1));
        // Trade-off pair: only the smaller delta counts.
        let t = pt(0.3, -0.1, 2);
        assert!((distance(&o, &t, DistanceKind::Pareto).value - 0.1).abs() < 1e-12);
        for kind in DistanceKind::ALL {
            let d = distance(&q, &q, kind);
            assert_eq!((d.value, d.sign_b, d.sign_p), (0.0, 0, 0));
        }
    }

    #[test]
    fn kmeans_single_cluster_is_mean() {
        let pts = [pt(0.0, 0.0, 0), pt(1.0, 0.0, 1), pt(0.5, 1.0, 2)];
        let r = kmeans(&pts, 1, 3, 50).unwrap();
        let c = r.clusters[0].centroid;
        assert!((c.0 - 0.5).abs() < 1e-12 && (c.1 - 1.0 / 3.0).abs() < 1e-12);
        assert!(kmeans(&pts, 0, 3, 50).is_err());
        assert!(kmeans(&pts, 4, 3, 50).is_err());
    }

    #[test]
    fn kmeans_separates_pairs() {
        let pts = [pt(0.0, 0.0, 0), pt(0.01, 0.0, 1), pt(1.0, 1.0, 2), pt(0.99, 1.0, 3)];
        let r = kmeans(&pts, 2, 11, 50).unwrap();
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[2], r.assignments[3]);
        assert_ne!(r.assignments[0], r.assignments[2]);
    }

    #[test]
    fn elbow_finds_three_blobs() {
        let mut pts = Vec::new();
        let centers = [(0.1, 0.1), (0.9, 0.1), (0.5, 0.9)];
        for (ci, c) in centers.iter().enumerate() {
            for j in 0..10 {
                let off = (j as f64 * 0.003, (9 - j) as f64 * 0.002);
                pts.push(pt(c.0 + off.0, c.1 + off.1, (ci * 10 + j) as u64));
            }
        }
        let e = elbow_select(&pts, 8, 1).unwrap();
        assert_eq!(e.k, 3);
        assert_eq!(e.sse.len(), 8);
        let same = vec![pt(0.2, 0.2, 0); 5];
        assert_eq!(elbow_select(&same, 4, 1).unwrap().k, 1);
    }

    #[test]
    fn trend_windows() {
        let kind = OperatorKind::adder(12).unwrap();
        let vals: Vec<(f64, f64)> = (0..4096).map(|i| (i as f64, 0.0)).collect();
        let ds = dataset_from(kind, &vals);
        assert_eq!(windowed_trend(&ds, Metric::AvgAbsRelErr, 16).unwrap().len(), 256);
        let ident = windowed_trend(&ds, Metric::AvgAbsRelErr, 1).unwrap();
        assert_eq!(ident.len(), 4096);
        assert!((ident[4095].1 - 1.0).abs() < 1e-15);
        let flat = windowed_trend(&ds, Metric::Pdplut, 7).unwrap();
        assert_eq!(flat.len(), 4096usize.div_ceil(7));
        assert!(flat.iter().all(|w| w.1 == flat[0].1));
        assert!(windowed_trend(&ds, Metric::Pdplut, 0).is_err());
    }

    #[test]
    fn histogram_counts() {
        let l = dataset_from(
            OperatorKind::adder(4).unwrap(),
            &(0..16).map(|i| (i as f64, (16 - i) as f64)).collect::<Vec<_>>(),
        );
        let h = dataset_from(
            OperatorKind::adder(8).unwrap(),
            &(0..256).map(|i| ((i * 7 % 256) as f64, i as f64)).collect::<Vec<_>>(),
        );
        for kind in DistanceKind::ALL {
            let hist = distance_histogram(&l, &h, Metric::AvgAbsRelErr, Metric::Pdplut, kind, 20).unwrap();
            assert_eq!(hist.total, 4096);
            assert_eq!(hist.counts.iter().sum::<u64>(), 4096);
        }
        let same =
            distance_histogram(&l, &l, Metric::AvgAbsRelErr, Metric::Pdplut, DistanceKind::Euclidean, 10).unwrap();
        assert!(same.counts[0] >= 16);
    }

    #[test]
    fn hull_examples() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)];
        assert_eq!(convex_hull(&sq), vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(convex_hull(&[(0.3, 0.2)]), vec![(0.3, 0.2)]);
        assert_eq!(convex_hull(&[(0.0, 0.0), (1.0, 1.0), (0.5, 0.5)]), vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    fn arb_point() -> impl Strategy<Value = ScaledPoint> {
        (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(b, p)| pt(b, p, 0))
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in arb_point(), b in arb_point(), c in arb_point()) {
            for kind in [DistanceKind::Euclidean, DistanceKind::Manhattan] {
                let ab = distance(&a, &b, kind).value;
                let bc = distance(&b, &c, kind).value;
                let ac = distance(&a, &c, kind).value;
                prop_assert!(ac <= ab + bc + 1e-12);
            }
        }

        #[test]
        fn symmetry(a in arb_point(), b in arb_point()) {
            for kind in DistanceKind::ALL {
                let ab = distance(&a, &b, kind);
                let ba = distance(&b, &a, kind);
                prop_assert_eq!(ab.value, ba.value);
                prop_assert_eq!(ab.sign_b, -ba.sign_b);
                prop_assert_eq!(ab.sign_p, -ba.sign_p);
            }
        }

        #[test]
        fn kmeans_sse_never_increases(pts in prop::collection::vec(arb_point(), 5..60), k in 1usize..5, seed in 0u64..100) {
            let k = k.min(pts.len());
            let r = kmeans(&pts, k, seed, 100).unwrap();
            prop_assert!(r.iterations <= 100);
            for w in r.sse_history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }

        #[test]
        fn hull_contains_all(pts in prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 3..40)) {
            let hull = convex_hull(&pts);
            if hull.len() >= 3 {
                for &p in &pts {
                    for i in 0..hull.len() {
                        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                        prop_assert!(cross(a, b, p) >= -1e-12);
                    }
                }
            }
        }
    }
}
