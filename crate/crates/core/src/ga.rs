//! Genetic search for a `k`-of-`n` sub-ensemble whose structural diversity
//! hits a target.
//!
//! A chromosome is the sorted list of pool indices of the selected
//! classifiers. Fitness is `-(kw - target)^2`, so a perfect match scores 0.
//!
//! Each run draws from a single ChaCha8 stream seeded by [`GaConfig::seed`],
//! in this order:
//!
//! 1. initial population, one individual at a time;
//! 2. per generation, for each offspring pair: two tournaments (each
//!    `tournament_size` draws), one crossover draw, a cut-point draw if the
//!    pair crosses, repair draws for the first then the second child, and
//!    mutation draws for the first then the second child.
//!
//! Fitness evaluation consumes no randomness.

use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diversity::{kw_of, DiversityValue};
use crate::error::{Error, Result};
use crate::ids::IdentityDescriptor;
use crate::pool::Pool;
use crate::seed::{derive_seed, stream_rng};

/// Sorted, distinct pool indices of an odd-sized sub-ensemble.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct EnsembleSelection(Vec<usize>);

impl EnsembleSelection {
    /// Sorts `indices` and checks they are distinct, odd in number and below
    /// `pool_len`.
    pub fn new(mut indices: Vec<usize>, pool_len: usize) -> Result<Self> {
        indices.sort_unstable();
        let sel = Self::try_from(indices)?;
        if let Some(&max) = sel.0.last() {
            if max >= pool_len {
                return Err(Error::IndexOutOfRange {
                    index: max,
                    len: pool_len,
                });
            }
        }
        Ok(sel)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn check_bounds(&self, pool_len: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= pool_len => Err(Error::IndexOutOfRange {
                index: max,
                len: pool_len,
            }),
            _ => Ok(()),
        }
    }

    /// Parses `"3;7;12"` (or comma-separated) index lists.
    pub fn parse(text: &str, pool_len: usize) -> Result<Self> {
        let indices = text
            .split([';', ','])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::InvalidSelection(format!("{s:?} is not an index")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices, pool_len)
    }

    /// Semicolon-separated index list.
    pub fn to_field(&self) -> String {
        join(self.0.iter(), ";")
    }
}

impl TryFrom<Vec<usize>> for EnsembleSelection {
    type Error = Error;

    fn try_from(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.len() % 2 == 0 {
            return Err(Error::InvalidSelection(format!(
                "ensemble size {} must be odd",
                indices.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSelection(
                "indices must be distinct and sorted ascending".into(),
            ));
        }
        Ok(EnsembleSelection(indices))
    }
}

impl From<EnsembleSelection> for Vec<usize> {
    fn from(s: EnsembleSelection) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elitism: usize,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 20,
            generations: 28,
            crossover_rate: 0.08,
            mutation_rate: 0.05,
            tournament_size: 3,
            elitism: 1,
            ensemble_size: 9,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.population < 2 {
            return fail(format!("population {} < 2", self.population));
        }
        if self.generations < 1 {
            return fail("generations must be at least 1".into());
        }
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return fail(format!("{name} {rate} not in [0, 1]"));
            }
        }
        if self.tournament_size < 1 {
            return fail("tournament_size must be at least 1".into());
        }
        if self.elitism > self.population {
            return fail(format!(
                "elitism {} exceeds population {}",
                self.elitism, self.population
            ));
        }
        if self.ensemble_size == 0 || self.ensemble_size % 2 == 0 {
            return fail(format!("ensemble_size {} must be odd", self.ensemble_size));
        }
        Ok(())
    }
}

/// Evaluation of one selection against a target diversity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    pub value: f64,
    pub target: f64,
    pub achieved: DiversityValue,
}

impl Fitness {
    pub fn new(achieved: DiversityValue, target: f64) -> Self {
        let diff = achieved.value() - target;
        Fitness {
            value: 0.0 - diff * diff,
            target,
            achieved,
        }
    }
}

fn subset_kw(descriptors: &[IdentityDescriptor], indices: &[usize]) -> DiversityValue {
    let picked: Vec<_> = indices.iter().map(|&i| descriptors[i]).collect();
    kw_of(&picked)
}

/// Scores `selection` from `pool` against `target`.
pub fn fitness(selection: &EnsembleSelection, pool: &Pool, target: f64) -> Result<Fitness> {
    fitness_of(selection, &pool.descriptors(), target)
}

pub fn fitness_of(
    selection: &EnsembleSelection,
    descriptors: &[IdentityDescriptor],
    target: f64,
) -> Result<Fitness> {
    selection.check_bounds(descriptors.len())?;
    Ok(Fitness::new(subset_kw(descriptors, selection.indices()), target))
}

/// Best fitness seen up to and including one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_achieved_kw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub best: EnsembleSelection,
    pub fitness: Fitness,
    pub history: Vec<GenerationRecord>,
}

impl Evolution {
    /// The history as CSV with header `generation,best_fitness,best_achieved_kw`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,best_achieved_kw\n");
        for r in &self.history {
            let _ = writeln!(out, "{},{},{}", r.generation, r.best_fitness, r.best_achieved_kw);
        }
        out
    }
}

/// Runs the GA over `pool` for one target.
pub fn evolve(pool: &Pool, target: f64, config: &GaConfig) -> Result<Evolution> {
    evolve_descriptors(&pool.descriptors(), target, config, &[])
}

/// Runs the GA over a descriptor list. `seeds` are placed at the front of
/// the initial population in place of random individuals.
pub fn evolve_descriptors(
    descriptors: &[IdentityDescriptor],
    target: f64,
    config: &GaConfig,
    seeds: &[EnsembleSelection],
) -> Result<Evolution> {
    config.validate()?;
    let n = descriptors.len();
    let k = config.ensemble_size;
    if k > n {
        return Err(Error::Config(format!(
            "ensemble size {k} exceeds pool size {n}"
        )));
    }
    if seeds.len() > config.population {
        return Err(Error::Config("more seed individuals than population slots".into()));
    }
    for s in seeds {
        s.check_bounds(n)?;
        if s.k() != k {
            return Err(Error::InvalidSelection(format!(
                "seed individual has {} members, expected {k}",
                s.k()
            )));
        }
    }

    let mut rng = stream_rng(config.seed, 0);
    let mut population: Vec<Vec<usize>> = seeds.iter().map(|s| s.indices().to_vec()).collect();
    while population.len() < config.population {
        let mut genes = index::sample(&mut rng, n, k).into_vec();
        genes.sort_unstable();
        population.push(genes);
    }

    let mut best: Option<(Vec<usize>, Fitness)> = None;
    let mut history = Vec::with_capacity(config.generations);
    for generation in 0..config.generations {
        let scores: Vec<Fitness> = population
            .iter()
            .map(|genes| Fitness::new(subset_kw(descriptors, genes), target))
            .collect();
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| scores[b].value.total_cmp(&scores[a].value).then(a.cmp(&b)));
        let leader = ranked[0];
        if best.as_ref().is_none_or(|(_, f)| scores[leader].value > f.value) {
            best = Some((population[leader].clone(), scores[leader]));
        }
        let (_, best_fit) = best.as_ref().expect("population is nonempty");
        history.push(GenerationRecord {
            generation,
            best_fitness: best_fit.value,
            best_achieved_kw: best_fit.achieved.value(),
        });
        if generation + 1 == config.generations {
            break;
        }
        population = next_generation(&population, &scores, &ranked, config, n, &mut rng);
    }

    let (genes, fitness) = best.expect("generations >= 1");
    Ok(Evolution {
        best: EnsembleSelection(genes),
        fitness,
        history,
    })
}

fn next_generation(
    population: &[Vec<usize>],
    scores: &[Fitness],
    ranked: &[usize],
    config: &GaConfig,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let k = config.ensemble_size;
    let mut next: Vec<Vec<usize>> = ranked[..config.elitism]
        .iter()
        .map(|&i| population[i].clone())
        .collect();
    while next.len() < config.population {
        let a = tournament(scores, config.tournament_size, rng);
        let b = tournament(scores, config.tournament_size, rng);
        let (mut c1, mut c2) = (population[a].clone(), population[b].clone());
        if rng.random_bool(config.crossover_rate) && k >= 2 {
            let cut = rng.random_range(1..k);
            c1 = [&population[a][..cut], &population[b][cut..]].concat();
            c2 = [&population[b][..cut], &population[a][cut..]].concat();
            repair(&mut c1, n, rng);
            repair(&mut c2, n, rng);
        }
        mutate(&mut c1, n, config.mutation_rate, rng);
        mutate(&mut c2, n, config.mutation_rate, rng);
        c1.sort_unstable();
        next.push(c1);
        if next.len() < config.population {
            c2.sort_unstable();
            next.push(c2);
        }
    }
    next
}

// Index of the fittest of `size` uniformly drawn entrants (earliest wins ties).
fn tournament(scores: &[Fitness], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..scores.len());
    for _ in 1..size {
        let c = rng.random_range(0..scores.len());
        if scores[c].value > scores[winner].value
            || (scores[c].value == scores[winner].value && c < winner)
        {
            winner = c;
        }
    }
    winner
}

fn random_unused(genes: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
    let unused: Vec<usize> = (0..n).filter(|i| !genes.contains(i)).collect();
    if unused.is_empty() {
        None
    } else {
        Some(unused[rng.random_range(0..unused.len())])
    }
}

// Replaces repeated genes (left to right) with unused indices.
fn repair(genes: &mut [usize], n: usize, rng: &mut ChaCha8Rng) {
    for p in 1..genes.len() {
        if genes[..p].contains(&genes[p]) {
            genes[p] = random_unused(genes, n, rng).expect("k <= n leaves an unused index");
        }
    }
}

fn mutate(genes: &mut [usize], n: usize, rate: f64, rng: &mut ChaCha8Rng) {
    for p in 0..genes.len() {
        if rng.random_bool(rate) {
            if let Some(fresh) = random_unused(genes, n, rng) {
                genes[p] = fresh;
            }
        }
    }
}

/// A diversity value the GA has been seen to reach, with the selection
/// that reached it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedTarget {
    /// Probe target of the phase-1 run that produced this value.
    pub probe: f64,
    pub kw: f64,
    pub selection: EnsembleSelection,
}

/// Evenly spaced probe targets spanning `[0, max_kw]`; a single probe sits
/// at the midpoint.
pub fn probe_targets(max_kw: f64, probe_count: usize) -> Vec<f64> {
    match probe_count {
        0 => Vec::new(),
        1 => vec![max_kw / 2.0],
        n => (0..n).map(|i| max_kw * i as f64 / (n - 1) as f64).collect(),
    }
}

/// GA seed used for phase-1 probe `i`.
pub fn probe_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, i as u64)
}

/// Tolerance under which two calibrated values count as the same target.
pub const CALIBRATION_DEDUP_TOLERANCE: f64 = 1e-6;

/// Phase 1 of the two-phase search: run the GA against evenly spaced probe
/// targets and return the diversity values it actually reached, sorted and
/// deduplicated. Values above the pool's own diversity are dropped.
pub fn calibrate_targets(
    pool: &Pool,
    probe_count: usize,
    config: &GaConfig,
) -> Result<Vec<CalibratedTarget>> {
    calibrate_descriptors(&pool.descriptors(), pool.pool_kw.value(), probe_count, config)
}

pub fn calibrate_descriptors(
    descriptors: &[IdentityDescriptor],
    max_kw: f64,
    probe_count: usize,
    config: &GaConfig,
) -> Result<Vec<CalibratedTarget>> {
    if probe_count == 0 {
        return Err(Error::Config("probe_count must be at least 1".into()));
    }
    let mut reached = Vec::with_capacity(probe_count);
    for (i, probe) in probe_targets(max_kw, probe_count).into_iter().enumerate() {
        let run_config = GaConfig {
            seed: probe_seed(config.seed, i),
            ..config.clone()
        };
        let evo = evolve_descriptors(descriptors, probe, &run_config, &[])?;
        let kw = evo.fitness.achieved.value();
        if kw <= max_kw + 1e-9 {
            reached.push(CalibratedTarget {
                probe,
                kw,
                selection: evo.best,
            });
        }
    }
    reached.sort_by(|a, b| a.kw.total_cmp(&b.kw).then(a.probe.total_cmp(&b.probe)));
    let mut out: Vec<CalibratedTarget> = Vec::with_capacity(reached.len());
    for t in reached {
        if out
            .last()
            .is_none_or(|last| t.kw - last.kw > CALIBRATION_DEDUP_TOLERANCE)
        {
            out.push(t);
        }
    }
    Ok(out)
}

fn join<T: ToString>(items: impl Iterator<Item = T>, sep: &str) -> String {
    items.map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::{exhaustive_subset_kw, DEFAULT_SUBSET_CAP};
    use proptest::prelude::*;

    fn d(s: &str) -> IdentityDescriptor {
        s.parse().unwrap()
    }

    fn varied(n: u16) -> Vec<IdentityDescriptor> {
        (0..n).map(|i| IdentityDescriptor::from_word(i.wrapping_mul(1597) ^ (i << 3))).collect()
    }

    #[test]
    fn selection_validation() {
        assert!(EnsembleSelection::new(vec![3, 1, 2], 4).is_ok());
        assert_eq!(EnsembleSelection::new(vec![3, 1, 2], 4).unwrap().indices(), &[1, 2, 3]);
        assert!(EnsembleSelection::new(vec![1, 2], 4).is_err());
        assert!(EnsembleSelection::new(vec![1, 1, 2], 4).is_err());
        assert!(matches!(
            EnsembleSelection::new(vec![1, 2, 4], 4),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        ));
        let s = EnsembleSelection::parse("5;0;9", 10).unwrap();
        assert_eq!(s.to_field(), "0;5;9");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[0,5,9]");
        assert!(serde_json::from_str::<EnsembleSelection>("[2,1,0]").is_err());
    }

    #[test]
    fn fitness_examples() {
        let f = Fitness::new(DiversityValue::new(0.16).unwrap(), 0.11);
        assert!((f.value + 0.0025).abs() < 1e-15);
        let f = Fitness::new(DiversityValue::default(), 0.2024);
        assert!((f.value + 0.04096576).abs() < 1e-15);

        let descs = varied(9);
        let sel = EnsembleSelection::new(vec![0, 3, 5], 9).unwrap();
        let own = subset_kw(&descs, sel.indices()).value();
        assert_eq!(fitness_of(&sel, &descs, own).unwrap().value, 0.0);
        let out = EnsembleSelection::new(vec![0, 3, 12], 20).unwrap();
        assert!(fitness_of(&out, &descs, 0.1).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        for bad in [
            GaConfig { population: 1, ..GaConfig::default() },
            GaConfig { generations: 0, ..GaConfig::default() },
            GaConfig { crossover_rate: 1.5, ..GaConfig::default() },
            GaConfig { mutation_rate: -0.1, ..GaConfig::default() },
            GaConfig { ensemble_size: 8, ..GaConfig::default() },
            GaConfig { elitism: 21, ..GaConfig::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
        let descs = varied(5);
        assert!(evolve_descriptors(&descs, 0.1, &GaConfig::default(), &[]).is_err());
    }

    #[test]
    fn unreachable_target_terminates() {
        let descs = varied(12);
        let config = GaConfig { ensemble_size: 3, ..GaConfig::default() };
        let evo = evolve_descriptors(&descs, 0.5, &config, &[]).unwrap();
        assert!(evo.fitness.value < -0.0625);
        assert_eq!(evo.history.len(), 28);
    }

    #[test]
    fn degenerate_run_returns_better_initial() {
        let descs = varied(12);
        let config = GaConfig {
            population: 2,
            generations: 1,
            ensemble_size: 3,
            seed: 99,
            ..GaConfig::default()
        };
        let target = 0.1;
        let evo = evolve_descriptors(&descs, target, &config, &[]).unwrap();
        // replay the initial draws independently
        let mut rng = stream_rng(99, 0);
        let initial: Vec<Vec<usize>> = (0..2)
            .map(|_| {
                let mut g = index::sample(&mut rng, 12, 3).into_vec();
                g.sort_unstable();
                g
            })
            .collect();
        let scores: Vec<f64> = initial
            .iter()
            .map(|g| -(subset_kw(&descs, g).value() - target).powi(2))
            .collect();
        let expected = if scores[1] > scores[0] { &initial[1] } else { &initial[0] };
        assert_eq!(evo.best.indices(), &expected[..]);
    }

    #[test]
    fn seeds_are_kept_by_elitism() {
        let descs = varied(30);
        let seed = EnsembleSelection::new((0..9).collect(), 30).unwrap();
        let target = subset_kw(&descs, seed.indices()).value();
        let evo = evolve_descriptors(&descs, target, &GaConfig::default(), &[seed]).unwrap();
        assert_eq!(evo.fitness.value, 0.0);
    }

    #[test]
    fn history_is_monotone_and_exported() {
        let descs = varied(40);
        let evo = evolve_descriptors(&descs, 0.12, &GaConfig::default(), &[]).unwrap();
        assert!(evo.history.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
        let csv = evo.history_csv();
        assert!(csv.starts_with("generation,best_fitness,best_achieved_kw\n"));
        assert_eq!(csv.lines().count(), 29);
    }

    #[test]
    fn calibration_of_identical_pool() {
        let descs = vec![d("101000010010"); 15];
        let got = calibrate_descriptors(&descs, 0.0, 6, &GaConfig::default()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].kw, 0.0);
    }

    #[test]
    fn calibration_bounds_and_replay() {
        let descs = varied(12);
        let max_kw = kw_of(&descs).value();
        let config = GaConfig { ensemble_size: 3, seed: 4, ..GaConfig::default() };
        let targets = calibrate_descriptors(&descs, max_kw, 6, &config).unwrap();
        assert!(!targets.is_empty() && targets.len() <= 6);
        let all = exhaustive_subset_kw(&descs, 3, DEFAULT_SUBSET_CAP).unwrap();
        for t in &targets {
            assert!(t.kw >= 0.0 && t.kw <= max_kw + 1e-9);
            assert!(all.iter().any(|s| s.kw.value() == t.kw));
            let replay = evolve_descriptors(&descs, t.kw, &config, &[t.selection.clone()]).unwrap();
            assert!(replay.fitness.value >= -1e-6);
        }
        assert!(targets.windows(2).all(|w| w[1].kw - w[0].kw > CALIBRATION_DEDUP_TOLERANCE));
    }

    #[test]
    fn probe_grid() {
        assert_eq!(probe_targets(0.2, 1), vec![0.1]);
        let g = probe_targets(0.2, 6);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[5], 0.2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn operators_keep_chromosomes_valid(seed in any::<u64>(), n in 9usize..25, target in 0.0f64..0.25) {
            let descs = varied(n as u16);
            let config = GaConfig {
                seed,
                generations: 2,
                crossover_rate: 1.0,
                mutation_rate: 0.5,
                ..GaConfig::default()
            };
            let mut rng = stream_rng(seed, 0);
            let mut pop: Vec<Vec<usize>> = (0..config.population)
                .map(|_| { let mut g = index::sample(&mut rng, n, 9).into_vec(); g.sort_unstable(); g })
                .collect();
            for _ in 0..5 {
                let scores: Vec<Fitness> = pop.iter().map(|g| Fitness::new(subset_kw(&descs, g), target)).collect();
                let ranked: Vec<usize> = (0..pop.len()).collect();
                pop = next_generation(&pop, &scores, &ranked, &config, n, &mut rng);
                prop_assert_eq!(pop.len(), config.population);
                for g in &pop {
                    prop_assert!(EnsembleSelection::new(g.clone(), n).is_ok());
                    prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
                }
            }
            let a = evolve_descriptors(&descs, target, &config, &[]).unwrap();
            let b = evolve_descriptors(&descs, target, &config, &[]).unwrap();
            prop_assert_eq!(a.best, b.best);
        }
    }
}
