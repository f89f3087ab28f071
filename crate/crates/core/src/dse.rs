//! Pareto fronts, 2-D hypervolume and a constrained NSGA-II search over
//! configurations, optionally seeded with a supersampled pool.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::characterize::csv::kind_token;
use crate::characterize::{CharDataset, CharRecord, Characterizer, Metric};
use crate::conss::{ConssPool, ConstraintSpec};
use crate::error::{Error, Result};
use crate::forest::ForestRegressor;
use crate::operator::{AxoConfig, OperatorKind};
use crate::rng::{self, Purpose};
use crate::table::{fmt_real, render_table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontPoint {
    pub behav: f64,
    pub ppa: f64,
    pub config_uint: u64,
}

/// Mutually non-dominated points, ascending by behav.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParetoFront {
    pub points: Vec<FrontPoint>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `a` is no worse on both axes and better on one.
pub fn dominates(a: &FrontPoint, b: &FrontPoint) -> bool {
    a.behav <= b.behav && a.ppa <= b.ppa && (a.behav < b.behav || a.ppa < b.ppa)
}

/// Non-dominated subset under minimization. Points with equal metrics
/// collapse to the lowest UINT.
pub fn pareto_front(points: &[FrontPoint]) -> ParetoFront {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.behav.total_cmp(&b.behav).then(a.ppa.total_cmp(&b.ppa)).then(a.config_uint.cmp(&b.config_uint))
    });
    let mut out: Vec<FrontPoint> = Vec::new();
    for p in sorted {
        if out.last().is_none_or(|l| p.ppa < l.ppa) {
            out.push(p);
        }
    }
    ParetoFront { points: out }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypervolumeResult {
    pub value: f64,
    pub reference: (f64, f64),
    /// Points that contribute area.
    pub front_size: usize,
}

/// Area dominated by `front` and bounded by `reference`. Points not
/// strictly inside the reference contribute nothing.
pub fn hypervolume_2d(front: &ParetoFront, reference: (f64, f64)) -> HypervolumeResult {
    let (rb, rp) = reference;
    let inside: Vec<&FrontPoint> = front.points.iter().filter(|p| p.behav < rb && p.ppa < rp).collect();
    let mut value = 0.0;
    for (i, p) in inside.iter().enumerate() {
        let next_b = inside.get(i + 1).map_or(rb, |q| q.behav);
        value += (next_b - p.behav) * (rp - p.ppa);
    }
    HypervolumeResult { value, reference, front_size: inside.len() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population_size: usize,
    pub max_generations: usize,
    pub tournament_k: usize,
    pub crossover_prob: f64,
    /// `None` means `1 / L`.
    pub mutation_prob_per_bit: Option<f64>,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 100,
            max_generations: 250,
            tournament_k: 2,
            crossover_prob: 0.9,
            mutation_prob_per_bit: None,
            seed: 0,
        }
    }
}

impl GaParams {
    pub const MAX_GENERATIONS: usize = 250;

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.population_size < 2 || self.tournament_k == 0 {
            return Err(Error::InvalidParam("population_size >= 2 and tournament_k >= 1 required".into()));
        }
        if self.max_generations > Self::MAX_GENERATIONS {
            return Err(Error::InvalidParam(format!("max_generations is capped at {}", Self::MAX_GENERATIONS)));
        }
        if !prob(self.crossover_prob) || !self.mutation_prob_per_bit.is_none_or(prob) {
            return Err(Error::InvalidParam("probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Individual {
    pub config: AxoConfig,
    pub behav: f64,
    pub ppa: f64,
    pub feasible: bool,
    pub rank: usize,
    pub crowding: f64,
    violation: f64,
}

impl Individual {
    fn point(&self) -> FrontPoint {
        FrontPoint { behav: self.behav, ppa: self.ppa, config_uint: self.config.to_uint() }
    }
}

/// Feasibility first, then lower violation, then Pareto dominance.
fn constrained_dominates(a: &Individual, b: &Individual) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => dominates(&a.point(), &b.point()),
    }
}

/// Fast non-dominated sort. Sets `rank` and returns the fronts.
fn sort_fronts(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if constrained_dominates(&pop[i], &pop[j]) {
                dominated[i].push(j);
                count[j] += 1;
            } else if constrained_dominates(&pop[j], &pop[i]) {
                dominated[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            pop[i].rank = fronts.len();
            for &j in &dominated[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

fn assign_crowding(pop: &mut [Individual], front: &[usize]) {
    for &i in front {
        pop[i].crowding = 0.0;
    }
    if front.len() <= 2 {
        for &i in front {
            pop[i].crowding = f64::INFINITY;
        }
        return;
    }
    for axis in 0..2 {
        let val = |ind: &Individual| if axis == 0 { ind.behav } else { ind.ppa };
        let mut order = front.to_vec();
        order.sort_by(|&a, &b| val(&pop[a]).total_cmp(&val(&pop[b])).then(a.cmp(&b)));
        let (lo, hi) = (val(&pop[order[0]]), val(&pop[*order.last().unwrap()]));
        pop[order[0]].crowding = f64::INFINITY;
        pop[*order.last().unwrap()].crowding = f64::INFINITY;
        if hi > lo {
            for w in 1..order.len() - 1 {
                let d = (val(&pop[order[w + 1]]) - val(&pop[order[w - 1]])) / (hi - lo);
                pop[order[w]].crowding += d;
            }
        }
    }
}

/// Keeps `size` individuals by front, then by crowding within the last front.
fn environmental_selection(mut pop: Vec<Individual>, size: usize) -> Vec<Individual> {
    let fronts = sort_fronts(&mut pop);
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for front in fronts {
        assign_crowding(&mut pop, &front);
        if keep.len() + front.len() <= size {
            keep.extend(front);
        } else {
            let mut f = front;
            f.sort_by(|&a, &b| pop[b].crowding.total_cmp(&pop[a].crowding).then(a.cmp(&b)));
            keep.extend(&f[..size - keep.len()]);
        }
        if keep.len() == size {
            break;
        }
    }
    keep.into_iter().map(|i| pop[i]).collect()
}

fn better(a: &Individual, b: &Individual) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    /// Over every feasible config evaluated so far.
    pub hypervolume: f64,
    pub feasible_count: usize,
}

#[derive(Debug, Clone)]
pub struct GaRun {
    /// Predicted front over the cumulative feasible archive.
    pub front: ParetoFront,
    pub progress: Vec<GenerationStats>,
    /// Every config evaluated, with its fitness, ascending by UINT.
    pub archive: Vec<FrontPoint>,
    pub evaluations: usize,
}

/// Random non-zero config.
fn random_config<R: Rng>(rng: &mut R, len: usize) -> AxoConfig {
    let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
    loop {
        let v = rng.gen::<u64>() & mask;
        if v != 0 {
            return AxoConfig::from_uint(v, len).expect("masked to length");
        }
    }
}

struct Evaluator<'a, F> {
    fitness: &'a F,
    cache: HashMap<u64, (f64, f64)>,
    spec: &'a ConstraintSpec,
}

impl<F> Evaluator<'_, F>
where
    F: Fn(&AxoConfig) -> Result<(f64, f64)> + Sync,
{
    /// Evaluates uncached configs in parallel, then builds individuals.
    fn evaluate(&mut self, configs: &[AxoConfig]) -> Result<Vec<Individual>> {
        let mut fresh: Vec<AxoConfig> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for c in configs {
            if !self.cache.contains_key(&c.to_uint()) && seen.insert(c.to_uint()) {
                fresh.push(*c);
            }
        }
        let fitness = self.fitness;
        let values: Vec<(f64, f64)> = fresh.par_iter().map(fitness).collect::<Result<_>>()?;
        for (c, v) in fresh.iter().zip(values) {
            self.cache.insert(c.to_uint(), v);
        }
        Ok(configs
            .iter()
            .map(|c| {
                let (behav, ppa) = self.cache[&c.to_uint()];
                Individual {
                    config: *c,
                    behav,
                    ppa,
                    feasible: self.spec.feasible(behav, ppa),
                    rank: 0,
                    crowding: 0.0,
                    violation: self.spec.violation(behav, ppa),
                }
            })
            .collect())
    }

    fn archive(&self) -> Vec<FrontPoint> {
        let mut a: Vec<FrontPoint> =
            self.cache.iter().map(|(&u, &(behav, ppa))| FrontPoint { behav, ppa, config_uint: u }).collect();
        a.sort_unstable_by_key(|p| p.config_uint);
        a
    }

    fn stats(&self, generation: usize) -> GenerationStats {
        let archive = self.archive();
        let feasible_count = archive.iter().filter(|p| self.spec.feasible(p.behav, p.ppa)).count();
        GenerationStats { generation, hypervolume: self.spec.hypervolume(&archive).value, feasible_count }
    }
}

/// Constrained NSGA-II. Generation 0 is the pool (pruned by the same
/// selection if larger than the population) together with a full random
/// population, reduced to `population_size` by environmental selection.
pub fn run_ga<F>(
    kind: OperatorKind,
    fitness: &F,
    spec: &ConstraintSpec,
    params: &GaParams,
    initial_pool: Option<&ConssPool>,
) -> Result<GaRun>
where
    F: Fn(&AxoConfig) -> Result<(f64, f64)> + Sync,
{
    params.validate()?;
    let len = kind.config_length();
    if let Some(pool) = initial_pool {
        if pool.kind != kind {
            return Err(Error::InvalidParam(format!("pool is for {}, search is over {kind}", pool.kind)));
        }
    }
    let pm = params.mutation_prob_per_bit.unwrap_or(1.0 / len as f64);
    let size = params.population_size;
    let mut rng = rng::stream(params.seed, Purpose::Genetic, 0);
    let mut eval = Evaluator { fitness, cache: HashMap::new(), spec };

    // The random part is drawn first so a seeded run sees the same random
    // configs as an unseeded run with the same seed.
    let mut taken = std::collections::HashSet::new();
    let mut random = Vec::with_capacity(size);
    let mut attempts = 0;
    while random.len() < size {
        let c = random_config(&mut rng, len);
        attempts += 1;
        // Prefer distinct configs; small spaces repeat after enough tries.
        if taken.insert(c.to_uint()) || attempts > 20 * size {
            random.push(c);
        }
    }
    let mut pop: Vec<Individual> = Vec::new();
    if let Some(pool) = initial_pool {
        let configs: Vec<AxoConfig> = pool.configs().into_iter().filter(|c| !c.is_all_zeros()).collect();
        let seeded = eval.evaluate(&configs)?;
        pop = if seeded.len() > size { environmental_selection(seeded, size) } else { seeded };
        let in_pool: std::collections::HashSet<u64> = pop.iter().map(|i| i.config.to_uint()).collect();
        random.retain(|c| !in_pool.contains(&c.to_uint()));
    }
    pop.extend(eval.evaluate(&random)?);
    let mut progress = vec![eval.stats(0)];
    pop = environmental_selection(pop, size);

    for generation in 1..=params.max_generations {
        let pick = |rng: &mut rand_chacha::ChaCha8Rng, pop: &[Individual]| -> AxoConfig {
            let mut best = pop[rng.gen_range(0..pop.len())];
            for _ in 1..params.tournament_k {
                let c = pop[rng.gen_range(0..pop.len())];
                if better(&c, &best) {
                    best = c;
                }
            }
            best.config
        };
        let mut children = Vec::with_capacity(size);
        while children.len() < size {
            let (a, b) = (pick(&mut rng, &pop).to_uint(), pick(&mut rng, &pop).to_uint());
            let (mut x, mut y) = (a, b);
            if len >= 2 && rng.gen::<f64>() < params.crossover_prob {
                let cut = rng.gen_range(1..len);
                let low = (1u64 << cut) - 1;
                x = (a & low) | (b & !low);
                y = (b & low) | (a & !low);
            }
            for child in [x, y] {
                let mut v = child;
                for i in 0..len {
                    if rng.gen::<f64>() < pm {
                        v ^= 1 << i;
                    }
                }
                if v == 0 {
                    v = 1 << rng.gen_range(0..len);
                }
                if children.len() < size {
                    children.push(AxoConfig::from_uint(v, len)?);
                }
            }
        }
        let offspring = eval.evaluate(&children)?;
        pop.extend(offspring);
        pop = environmental_selection(pop, size);
        progress.push(eval.stats(generation));
    }

    let archive = eval.archive();
    let feasible: Vec<FrontPoint> = archive.iter().copied().filter(|p| spec.feasible(p.behav, p.ppa)).collect();
    Ok(GaRun { front: pareto_front(&feasible), progress, evaluations: archive.len(), archive })
}

/// Fitness from proxy characterization of the chosen metric pair.
pub fn proxy_fitness<'a>(
    characterizer: &'a Characterizer,
    behav: Metric,
    ppa: Metric,
) -> impl Fn(&AxoConfig) -> Result<(f64, f64)> + Sync + 'a {
    move |c| characterizer.record(c).map(|r| (r.metric(behav), r.metric(ppa)))
}

/// Fitness from two trained regressors.
pub fn estimator_fitness<'a>(
    behav: &'a ForestRegressor,
    ppa: &'a ForestRegressor,
) -> impl Fn(&AxoConfig) -> Result<(f64, f64)> + Sync + 'a {
    move |c| Ok((behav.predict_config(c)?, ppa.predict_config(c)?))
}

#[derive(Debug, Clone)]
pub struct Validation {
    pub vpf: ParetoFront,
    /// Ground-truth records for every front config, ascending by UINT.
    pub records: Vec<CharRecord>,
    /// Configs not found in the known dataset and therefore characterized.
    pub validation_count: usize,
}

/// Re-characterizes a predicted front and keeps the feasible non-dominated
/// subset of the true metrics. Records already in `known` are reused.
pub fn validate_front(
    ppf: &ParetoFront,
    characterizer: &Characterizer,
    spec: &ConstraintSpec,
    known: Option<&CharDataset>,
) -> Result<Validation> {
    let len = characterizer.kind().config_length();
    let mut uints: Vec<u64> = ppf.points.iter().map(|p| p.config_uint).collect();
    uints.sort_unstable();
    uints.dedup();
    let lookup = |u: u64| known.and_then(|k| k.find(u)).copied();
    let validation_count = uints.iter().filter(|&&u| lookup(u).is_none()).count();
    let records: Vec<CharRecord> = uints
        .par_iter()
        .map(|&u| match lookup(u) {
            Some(r) => Ok(r),
            None => characterizer.record(&AxoConfig::from_uint(u, len)?),
        })
        .collect::<Result<_>>()?;
    let truth: Vec<FrontPoint> = records
        .iter()
        .map(|r| FrontPoint {
            behav: r.metric(spec.behav_metric),
            ppa: r.metric(spec.ppa_metric),
            config_uint: r.config_uint(),
        })
        .filter(|p| spec.feasible(p.behav, p.ppa))
        .collect();
    Ok(Validation { vpf: pareto_front(&truth), records, validation_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Train,
    GaOnly,
    ConssOnly,
    ConssGa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Train, Method::GaOnly, Method::ConssOnly, Method::ConssGa];

    pub fn name(self) -> &'static str {
        match self {
            Method::Train => "train",
            Method::GaOnly => "ga",
            Method::ConssOnly => "conss",
            Method::ConssGa => "conss+ga",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown method '{s}'")))
    }
}

/// Points produced by one method under one constraint spec.
#[derive(Debug, Clone)]
pub struct MethodFront {
    pub method: Method,
    pub spec: ConstraintSpec,
    pub points: Vec<FrontPoint>,
    pub validation_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub factor: f64,
    pub method: Method,
    pub hypervolume: f64,
    /// Relative to `Train`; `None` when `Train` is absent or has zero volume.
    pub relative: Option<f64>,
    pub front_size: usize,
    pub validation_count: Option<usize>,
}

/// Hypervolume of each method's feasible points under one shared spec.
pub fn compare_hypervolumes(runs: &[MethodFront]) -> Result<Vec<ComparisonRow>> {
    let Some(first) = runs.first() else { return Ok(Vec::new()) };
    if let Some(bad) = runs.iter().find(|r| !r.spec.compatible(&first.spec)) {
        return Err(Error::Schema(format!("run '{}' uses a different constraint spec", bad.method)));
    }
    let hv: Vec<HypervolumeResult> = runs.iter().map(|r| first.spec.hypervolume(&r.points)).collect();
    let train = runs.iter().position(|r| r.method == Method::Train).map(|i| hv[i].value);
    Ok(runs
        .iter()
        .zip(hv)
        .map(|(r, h)| ComparisonRow {
            factor: first.spec.scaling_factor,
            method: r.method,
            hypervolume: h.value,
            relative: train.filter(|&t| t > 0.0).map(|t| h.value / t),
            front_size: h.front_size,
            validation_count: r.validation_count,
        })
        .collect())
}

pub fn render_comparison(rows: &[ComparisonRow]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.factor.to_string(),
                r.method.to_string(),
                fmt_real(r.hypervolume),
                opt(r.relative.map(fmt_real)),
                r.front_size.to_string(),
                opt(r.validation_count.map(|c| c.to_string())),
            ]
        })
        .collect();
    render_table(&[], &["factor", "method", "hypervolume", "relative", "front_size", "validation_count"], &body)
}

pub fn render_progress(progress: &[GenerationStats]) -> String {
    let rows: Vec<Vec<String>> = progress
        .iter()
        .map(|g| vec![g.generation.to_string(), fmt_real(g.hypervolume), g.feasible_count.to_string()])
        .collect();
    render_table(&[], &["generation", "hypervolume", "feasible_count"], &rows)
}

pub fn render_front(kind: OperatorKind, front: &ParetoFront, behav: Metric, ppa: Metric) -> String {
    let len = kind.config_length();
    let rows: Vec<Vec<String>> = front
        .points
        .iter()
        .map(|p| {
            let bits = AxoConfig::from_uint(p.config_uint, len).map(|c| c.to_bitstring()).unwrap_or_default();
            vec![bits, p.config_uint.to_string(), fmt_real(p.behav), fmt_real(p.ppa)]
        })
        .collect();
    render_table(&[("kind", kind_token(kind))], &["config_bits", "config_uint", behav.name(), ppa.name()], &rows)
}

/// Structured-text run manifest, one `key = value` per line.
pub fn render_manifest(entries: &[(&str, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Manifest fields for a GA run.
pub fn ga_manifest(
    kind: OperatorKind,
    spec: &ConstraintSpec,
    params: &GaParams,
    init: &str,
    run: &GaRun,
) -> Vec<(&'static str, String)> {
    vec![
        ("kind", kind_token(kind)),
        ("init", init.to_string()),
        ("seed", params.seed.to_string()),
        ("population_size", params.population_size.to_string()),
        ("max_generations", params.max_generations.to_string()),
        ("tournament_k", params.tournament_k.to_string()),
        ("crossover_prob", params.crossover_prob.to_string()),
        ("mutation_prob_per_bit", fmt_real(params.mutation_prob_per_bit.unwrap_or(1.0 / kind.config_length() as f64))),
        ("behav_metric", spec.behav_metric.to_string()),
        ("ppa_metric", spec.ppa_metric.to_string()),
        ("scaling_factor", spec.scaling_factor.to_string()),
        ("b_max", fmt_real(spec.b_max)),
        ("p_max", fmt_real(spec.p_max)),
        ("constraint_source", spec.source.clone()),
        ("evaluations", run.evaluations.to_string()),
        ("front_size", run.front.len().to_string()),
        ("initial_hypervolume", fmt_real(run.progress.first().map_or(0.0, |g| g.hypervolume))),
        ("final_hypervolume", fmt_real(run.progress.last().map_or(0.0, |g| g.hypervolume))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::{InputPolicy, Provenance};
    use crate::conss::derive_constraints;
    use proptest::prelude::*;

    fn fp(b: f64, p: f64, u: u64) -> FrontPoint {
        FrontPoint { behav: b, ppa: p, config_uint: u }
    }

    #[test]
    fn front_examples() {
        let pts = [fp(1.0, 3.0, 0), fp(2.0, 2.0, 1), fp(3.0, 1.0, 2), fp(3.0, 3.0, 3)];
        let f = pareto_front(&pts);
        assert_eq!(f.points.iter().map(|p| p.config_uint).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(pareto_front(&[fp(1.0, 1.0, 5)]).len(), 1);
        let same = pareto_front(&[fp(1.0, 1.0, 9), fp(1.0, 1.0, 4), fp(1.0, 1.0, 7)]);
        assert_eq!(same.points, vec![fp(1.0, 1.0, 4)]);
    }

    #[test]
    fn hypervolume_examples() {
        let one = hypervolume_2d(&pareto_front(&[fp(0.2, 0.4, 0)]), (1.0, 1.0));
        assert!((one.value - 0.48).abs() < 1e-15);
        assert_eq!(hypervolume_2d(&ParetoFront::default(), (1.0, 1.0)).value, 0.0);
        let two = hypervolume_2d(&pareto_front(&[fp(0.1, 0.8, 0), fp(0.5, 0.3, 1)]), (1.0, 1.0));
        // Union of [0.1,1]x[0.8,1] and [0.5,1]x[0.3,1].
        assert!((two.value - 0.43).abs() < 1e-12);
        let clipped = hypervolume_2d(&pareto_front(&[fp(1.2, 0.1, 0), fp(0.5, 1.0, 1)]), (1.0, 1.0));
        assert_eq!((clipped.value, clipped.front_size), (0.0, 0));
    }

    fn brute_front(pts: &[FrontPoint]) -> Vec<(u64, u64)> {
        let mut v: Vec<(u64, u64)> = pts
            .iter()
            .filter(|p| !pts.iter().any(|q| dominates(q, p)))
            .map(|p| (p.behav.to_bits(), p.ppa.to_bits()))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    proptest! {
        #[test]
        fn front_matches_brute_force(raw in prop::collection::vec((0u8..10, 0u8..10), 1..40)) {
            let pts: Vec<FrontPoint> = raw.iter().enumerate().map(|(i, &(b, p))| fp(b as f64, p as f64, i as u64)).collect();
            let f = pareto_front(&pts);
            let mut got: Vec<(u64, u64)> = f.points.iter().map(|p| (p.behav.to_bits(), p.ppa.to_bits())).collect();
            got.sort_unstable();
            prop_assert_eq!(got, brute_front(&pts));
            prop_assert!(f.points.windows(2).all(|w| w[0].behav < w[1].behav && w[0].ppa > w[1].ppa));
        }

        #[test]
        fn adding_points_never_shrinks_volume(raw in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..20), extra in (0.0..1.0f64, 0.0..1.0f64)) {
            let pts: Vec<FrontPoint> = raw.iter().enumerate().map(|(i, &(b, p))| fp(b, p, i as u64)).collect();
            let base = hypervolume_2d(&pareto_front(&pts), (1.0, 1.0)).value;
            let mut more = pts.clone();
            more.push(fp(extra.0, extra.1, 99));
            prop_assert!(hypervolume_2d(&pareto_front(&more), (1.0, 1.0)).value >= base - 1e-15);
            prop_assert!(base <= 1.0);
        }
    }

    fn popcount_spec(kind: OperatorKind) -> ConstraintSpec {
        let records = crate::operator::enumerate_configs(kind, false)
            .unwrap()
            .into_iter()
            .map(|c| {
                let mut r = CharRecord { config: c, behav: Default::default(), ppa: Default::default() };
                r.behav.avg_abs_rel_err = c.popcount() as f64 / kind.config_length() as f64;
                r.ppa.pdplut = r.behav.avg_abs_rel_err;
                r
            })
            .collect();
        let d = CharDataset {
            kind,
            records,
            provenance: Provenance::ImportedExternal,
            input_policy: InputPolicy::External,
            activity: None,
            weights: None,
            seed: 0,
        };
        derive_constraints(&d, 1.0, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap()
    }

    #[test]
    fn ga_finds_popcount_one() {
        let kind = OperatorKind::adder(4).unwrap();
        let spec = popcount_spec(kind);
        let f = |c: &AxoConfig| Ok((c.popcount() as f64 / 4.0, c.popcount() as f64 / 4.0));
        let params = GaParams { seed: 3, ..Default::default() };
        let run = run_ga(kind, &f, &spec, &params, None).unwrap();
        assert_eq!(run.progress.len(), 251);
        assert!(run.front.points.iter().any(|p| p.config_uint.count_ones() == 1));
        assert!(run.progress.windows(2).all(|w| w[1].hypervolume >= w[0].hypervolume));
        let again = run_ga(kind, &f, &spec, &params, None).unwrap();
        assert_eq!(again.front, run.front);
        assert_eq!(again.progress, run.progress);
        assert!(run_ga(kind, &f, &spec, &GaParams { max_generations: 251, ..params }, None).is_err());
    }

    #[test]
    fn seeded_population_starts_higher() {
        let kind = OperatorKind::adder(12).unwrap();
        let spec = popcount_spec(kind);
        let f = |c: &AxoConfig| {
            Ok((c.popcount() as f64 / 12.0, (12 - c.popcount()) as f64 / 12.0 + 0.01 * c.bit(0) as u8 as f64))
        };
        let params = GaParams { max_generations: 3, seed: 8, ..Default::default() };
        // One config per popcount: the whole trade-off curve.
        let entries = (1..=12u64)
            .map(|k| crate::conss::PoolEntry {
                config: AxoConfig::from_uint(((1 << k) - 1) << (12 - k), 12).unwrap(),
                origin_l_uint: 0,
                noise_pattern: 0,
                predicted: None,
                validated: None,
            })
            .collect::<Vec<_>>();
        let mut entries = entries;
        entries.sort_by_key(|e| e.config.to_uint());
        let pool =
            ConssPool { kind, n_noise: 0, behav_metric: Metric::AvgAbsRelErr, ppa_metric: Metric::Pdplut, entries };
        let seeded = run_ga(kind, &f, &spec, &params, Some(&pool)).unwrap();
        let random = run_ga(kind, &f, &spec, &params, None).unwrap();
        assert!(seeded.progress[0].hypervolume >= random.progress[0].hypervolume);
    }

    #[test]
    fn comparison_ratios() {
        let spec = popcount_spec(OperatorKind::adder(4).unwrap());
        let pts = vec![fp(0.25, 0.25, 1), fp(0.5, 0.5, 3)];
        let mut superset = pts.clone();
        superset.push(fp(0.25, 0.0, 8));
        let runs = vec![
            MethodFront { method: Method::Train, spec: spec.clone(), points: pts.clone(), validation_count: None },
            MethodFront { method: Method::GaOnly, spec: spec.clone(), points: pts, validation_count: Some(2) },
            MethodFront { method: Method::ConssGa, spec: spec.clone(), points: superset, validation_count: Some(3) },
        ];
        let rows = compare_hypervolumes(&runs).unwrap();
        assert_eq!(rows[1].relative, Some(1.0));
        assert!(rows[2].relative.unwrap() >= 1.0);
        let mut other = spec.clone();
        other.b_max *= 0.5;
        let bad = vec![runs[0].clone(), MethodFront { spec: other, ..runs[1].clone() }];
        assert!(matches!(compare_hypervolumes(&bad), Err(Error::Schema(_))));
        assert!(render_comparison(&rows)
            .starts_with("factor,method,hypervolume,relative,front_size,validation_count\n1,train,"));
    }

    #[test]
    fn validation_with_true_fitness_is_identity() {
        let kind = OperatorKind::adder(4).unwrap();
        let ch = Characterizer::with_defaults(kind, 1).unwrap();
        let d = ch.dataset(&crate::operator::enumerate_configs(kind, false).unwrap()).unwrap();
        let spec = derive_constraints(&d, 1.0, Metric::AvgAbsRelErr, Metric::Pdplut).unwrap();
        let f = proxy_fitness(&ch, Metric::AvgAbsRelErr, Metric::Pdplut);
        let run = run_ga(kind, &f, &spec, &GaParams { max_generations: 10, ..Default::default() }, None).unwrap();
        let v = validate_front(&run.front, &ch, &spec, None).unwrap();
        assert_eq!(v.vpf, run.front);
        assert_eq!(v.validation_count, run.front.len());
        assert_eq!(validate_front(&run.front, &ch, &spec, Some(&d)).unwrap().validation_count, 0);

        // Biased predictions do not leak into the validated front.
        let biased = ParetoFront {
            points: run.front.points.iter().map(|p| FrontPoint { behav: p.behav + 0.1, ..*p }).collect(),
        };
        assert_eq!(validate_front(&biased, &ch, &spec, None).unwrap().vpf, run.front);
    }
}
