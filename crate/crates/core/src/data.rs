//! Tabular binary-classification data: CSV I/O, min-max normalization,
//! train/validation/test splitting and a synthetic conflict-style generator.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the label column in CSV files.
pub const LABEL_COLUMN: &str = "label";

/// Feature names of the synthetic conflict data, in column order.
pub const CONFLICT_FEATURES: [&str; 7] = [
    "allies",
    "contiguity",
    "distance",
    "major_power",
    "capability",
    "democracy",
    "dependency",
];

/// Conflict share of the reference population, 875 / (26,846 + 875).
pub const CONFLICT_MINORITY_FRACTION: f64 = 875.0 / 27_721.0;

/// Row-major feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::InvalidParameter("dataset needs at least one feature".into()));
        }
        if features.len() != labels.len() * d {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * d,
                actual: features.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!("label {bad} is not binary")));
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features())
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }
}

/// Per-feature minimum and maximum used by min-max scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl NormalizationStats {
    /// Rejects any feature whose range has zero (or negative) width.
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                actual: max.len(),
            });
        }
        if let Some(j) = (0..min.len()).find(|&j| !(max[j] > min[j])) {
            return Err(Error::ConstantFeature {
                column: format!("#{j}"),
            });
        }
        Ok(NormalizationStats { min, max })
    }

    /// Range of every feature of `data`.
    pub fn fit(data: &Dataset) -> Result<Self> {
        let d = data.n_features();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in data.rows() {
            for j in 0..d {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        if let Some(j) = (0..d).find(|&j| !(max[j] > min[j])) {
            return Err(Error::ConstantFeature {
                column: data.feature_names[j].clone(),
            });
        }
        Ok(NormalizationStats { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

/// Scales every feature of `data` into `[0, 1]` by its own range.
pub fn normalize(data: &Dataset) -> Result<(Dataset, NormalizationStats)> {
    let stats = NormalizationStats::fit(data)?;
    let (scaled, _) = apply_stats(data, &stats)?;
    Ok((scaled, stats))
}

/// Applies `(x - min) / (max - min)` with the given stats. Returns the scaled
/// data and the number of values that landed outside `[0, 1]`.
pub fn apply_stats(data: &Dataset, stats: &NormalizationStats) -> Result<(Dataset, usize)> {
    if stats.dim() != data.n_features() {
        return Err(Error::DimensionMismatch {
            expected: stats.dim(),
            actual: data.n_features(),
        });
    }
    let d = data.n_features();
    let mut out_of_range = 0;
    let features = data
        .features
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let j = k % d;
            let v = (x - stats.min[j]) / (stats.max[j] - stats.min[j]);
            if !(0.0..=1.0).contains(&v) {
                out_of_range += 1;
            }
            v
        })
        .collect();
    Ok((
        Dataset {
            features,
            labels: data.labels.clone(),
            feature_names: data.feature_names.clone(),
        },
        out_of_range,
    ))
}

/// Sizes of the three splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }
}

impl Default for SplitCounts {
    fn default() -> Self {
        SplitCounts {
            train: 1006,
            validation: 317,
            test: 552,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitOrder {
    /// Permute samples with the seeded source before cutting.
    #[default]
    Shuffled,
    /// Contiguous blocks in file order.
    Sequential,
}

/// Which samples the normalization range is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScope {
    #[default]
    TrainOnly,
    /// Fit on all samples used by the three splits.
    Global,
}

/// Normalized train/validation/test splits sharing one set of stats.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    pub stats: NormalizationStats,
    /// Values outside `[0, 1]` in the validation and test splits.
    pub out_of_range: usize,
}

/// The part of a bundle that model building and ensemble selection may see.
#[derive(Debug, Clone, Copy)]
pub struct SelectionData<'a> {
    pub train: &'a Dataset,
    pub validation: &'a Dataset,
}

impl DatasetBundle {
    pub fn selection_view(&self) -> SelectionData<'_> {
        SelectionData {
            train: &self.train,
            validation: &self.validation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.train.n_features()
    }
}

/// Splits `data` into disjoint train/validation/test sets of exactly the
/// requested sizes and normalizes all three with one set of stats.
pub fn split<R: Rng + ?Sized>(
    data: &Dataset,
    counts: SplitCounts,
    order: SplitOrder,
    scope: NormalizationScope,
    rng: &mut R,
) -> Result<DatasetBundle> {
    if counts.total() > data.len() {
        return Err(Error::InsufficientSamples {
            requested: counts.total(),
            available: data.len(),
        });
    }
    let mut order_idx: Vec<usize> = (0..data.len()).collect();
    if order == SplitOrder::Shuffled {
        order_idx.shuffle(rng);
    }
    let (train_idx, rest) = order_idx.split_at(counts.train);
    let (val_idx, rest) = rest.split_at(counts.validation);
    let test_idx = &rest[..counts.test];

    let train = data.subset(train_idx);
    let validation = data.subset(val_idx);
    let test = data.subset(test_idx);

    let stats = match scope {
        NormalizationScope::TrainOnly => NormalizationStats::fit(&train)?,
        NormalizationScope::Global => {
            let used: Vec<usize> = order_idx[..counts.total()].to_vec();
            NormalizationStats::fit(&data.subset(&used))?
        }
    };
    let (train, _) = apply_stats(&train, &stats)?;
    let (validation, oor_val) = apply_stats(&validation, &stats)?;
    let (test, oor_test) = apply_stats(&test, &stats)?;
    Ok(DatasetBundle {
        train,
        validation,
        test,
        stats,
        out_of_range: oor_val + oor_test,
    })
}

/// How to draw a working sample from a larger population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Sampling {
    /// Take the whole population as is.
    All,
    /// `n` samples uniformly without replacement.
    Uniform { n: usize },
    /// `positives` conflict samples and `negatives` others. When fewer
    /// positives exist, all of them are taken and the shortfall is drawn
    /// from the negatives so the sample size stays the same.
    Stratified { positives: usize, negatives: usize },
}

impl Default for Sampling {
    fn default() -> Self {
        // 875 conflict + 1000 peaceful = the 1875-sample working set
        Sampling::Stratified {
            positives: 875,
            negatives: 1000,
        }
    }
}

/// Draws a working sample; the result keeps population order.
pub fn sample<R: Rng + ?Sized>(data: &Dataset, sampling: Sampling, rng: &mut R) -> Result<Dataset> {
    let mut picked = match sampling {
        Sampling::All => return Ok(data.clone()),
        Sampling::Uniform { n } => {
            if n > data.len() {
                return Err(Error::InsufficientSamples {
                    requested: n,
                    available: data.len(),
                });
            }
            rand::seq::index::sample(rng, data.len(), n).into_vec()
        }
        Sampling::Stratified {
            positives,
            negatives,
        } => {
            let (pos, neg): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| data.label(i) == 1);
            let mut draw = |pool: &[usize], n: usize| -> Result<Vec<usize>> {
                if n > pool.len() {
                    return Err(Error::InsufficientSamples {
                        requested: n,
                        available: pool.len(),
                    });
                }
                Ok(rand::seq::index::sample(rng, pool.len(), n)
                    .into_iter()
                    .map(|k| pool[k])
                    .collect())
            };
            let take_pos = positives.min(pos.len());
            let mut chosen = draw(&pos, take_pos)?;
            chosen.extend(draw(&neg, negatives + positives - take_pos)?);
            chosen
        }
    };
    picked.sort_unstable();
    Ok(data.subset(&picked))
}

/// Reads a CSV file with a header row; `label_column` holds 0/1 labels and
/// every other column becomes a feature, in file order.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: label_column.to_string(),
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.trim().to_string())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (i, field) in record.iter().enumerate() {
            let field = field.trim();
            if i == label_idx {
                labels.push(match field {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(Error::NonBinaryLabel {
                            path: path.to_path_buf(),
                            line,
                            value: other.to_string(),
                        })
                    }
                });
            } else {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("field {:?} is not a number", field),
                })?;
                features.push(v);
            }
        }
    }
    Dataset::new(features, labels, feature_names)
}

/// Writes `data` as CSV with a trailing `label` column.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<&str> = data
        .feature_names
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(LABEL_COLUMN))
        .collect();
    writer.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (row, label) in data.rows().zip(&data.labels) {
        let fields: Vec<String> = row
            .iter()
            .map(|v| v.to_string())
            .chain(std::iter::once(label.to_string()))
            .collect();
        writer.write_record(&fields).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Parameters of the synthetic conflict generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_samples: usize,
    pub minority_fraction: f64,
    pub noise: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_samples: 27_721,
            minority_fraction: CONFLICT_MINORITY_FRACTION,
            noise: 0.01,
        }
    }
}

/// Latent conflict propensity of one raw (unnormalized) synthetic row.
///
/// Contiguity and major-power status raise the score, alliances and distance
/// lower it, joint democracy dampens it, and trade dependency has a
/// saturating pacifying effect.
pub fn conflict_score(row: &[f64]) -> f64 {
    let [allies, contiguity, distance, major_power, capability, democracy, dependency] =
        <[f64; 7]>::try_from(row).expect("synthetic rows have 7 features");
    1.6 * contiguity + 1.1 * major_power - 0.9 * allies - 0.8 * (distance - 1.0)
        + 1.2 * (capability - 0.5).powi(2)
        + 0.6 * contiguity * major_power
        - 0.05 * democracy
        - 2.0 * (1.0 - (-20.0 * dependency).exp())
}

/// Generates a synthetic stand-in for the interstate-conflict data.
///
/// Seven raw features: three 0/1 indicators (allies, contiguity, major
/// power), a capability ratio in `[0, 1]`, log10 distance in km, a
/// democracy score in `[-10, 10]` and a non-negative trade dependency.
///
/// Labels come from ranking samples by [`conflict_score`]: the top
/// `round(n * p)` samples are conflicts, where `p` is chosen so that after
/// flipping every label with probability `noise` the expected conflict
/// share equals `minority_fraction` (when `minority_fraction >= noise`).
pub fn synth_conflict<R: Rng + ?Sized>(params: &SynthParams, rng: &mut R) -> Result<Dataset> {
    let SynthParams {
        n_samples,
        minority_fraction,
        noise,
    } = *params;
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    if !(minority_fraction > 0.0 && minority_fraction <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "minority_fraction {minority_fraction} not in (0, 0.5]"
        )));
    }
    if !(0.0..=0.5).contains(&noise) {
        return Err(Error::InvalidParameter(format!("noise {noise} not in [0, 0.5]")));
    }

    let mut features = Vec::with_capacity(n_samples * 7);
    for _ in 0..n_samples {
        let allies = f64::from(u8::from(rng.random_bool(0.3)));
        let contiguity = f64::from(u8::from(rng.random_bool(0.25)));
        let major_power = f64::from(u8::from(rng.random_bool(0.2)));
        let capability: f64 = rng.random();
        let distance = 1.0 + 3.3 * rng.random::<f64>();
        let democracy = f64::from(rng.random_range(-10i32..=10));
        let dependency = -0.05 * (1.0 - rng.random::<f64>()).ln();
        features.extend_from_slice(&[
            allies,
            contiguity,
            distance,
            major_power,
            capability,
            democracy,
            dependency,
        ]);
    }

    let clean_fraction = if noise < 0.5 {
        ((minority_fraction - noise) / (1.0 - 2.0 * noise)).clamp(0.0, 1.0)
    } else {
        minority_fraction
    };
    let n_pos = (n_samples as f64 * clean_fraction).round() as usize;
    let scores: Vec<f64> = features.chunks_exact(7).map(conflict_score).collect();
    let mut ranked: Vec<usize> = (0..n_samples).collect();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut labels = vec![0u8; n_samples];
    for &i in &ranked[..n_pos] {
        labels[i] = 1;
    }
    if noise > 0.0 {
        for l in labels.iter_mut() {
            if rng.random_bool(noise) {
                *l ^= 1;
            }
        }
    }
    Dataset::new(
        features,
        labels,
        CONFLICT_FEATURES.iter().map(|s| s.to_string()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> Dataset {
        Dataset::new(
            vec![1.0, 10.0, 3.0, 20.0, 2.0, 15.0],
            vec![0, 1, 0],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn normalize_anchors() {
        let (n, stats) = normalize(&toy()).unwrap();
        assert_eq!(n.row(0), &[0.0, 0.0]);
        assert_eq!(n.row(1), &[1.0, 1.0]);
        assert_eq!(n.row(2), &[0.5, 0.5]);
        assert_eq!(stats.min(), &[1.0, 10.0]);
    }

    #[test]
    fn normalize_rejects_constant_column() {
        let d = Dataset::new(vec![1.0, 5.0, 2.0, 5.0], vec![0, 1], vec!["x".into(), "flat".into()])
            .unwrap();
        match normalize(&d) {
            Err(Error::ConstantFeature { column }) => assert_eq!(column, "flat"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn apply_stats_extrapolates_and_counts() {
        let stats = NormalizationStats::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let d = Dataset::new(vec![1.0, 4.0], vec![1], vec!["a".into(), "b".into()]).unwrap();
        let (n, oor) = apply_stats(&d, &stats).unwrap();
        assert_eq!(n.row(0), &[0.5, 2.0]);
        assert_eq!(oor, 1);
        let (same, _) = apply_stats(&toy(), &normalize(&toy()).unwrap().1).unwrap();
        assert_eq!(same, normalize(&toy()).unwrap().0);
        assert!(NormalizationStats::new(vec![1.0], vec![1.0]).is_err());
        let wrong_dim = NormalizationStats::new(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(apply_stats(&d, &wrong_dim), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn split_default_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = synth_conflict(
            &SynthParams {
                n_samples: 1875,
                minority_fraction: 0.3,
                noise: 0.0,
            },
            &mut rng,
        )
        .unwrap();
        let b = split(
            &data,
            SplitCounts::default(),
            SplitOrder::Shuffled,
            NormalizationScope::TrainOnly,
            &mut rng,
        )
        .unwrap();
        assert_eq!((b.train.len(), b.validation.len(), b.test.len()), (1006, 317, 552));
        for j in 0..7 {
            let col: Vec<f64> = b.train.column(j).collect();
            assert_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(col.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
        let too_many = SplitCounts {
            train: 1500,
            validation: 317,
            test: 552,
        };
        assert!(matches!(
            split(&data, too_many, SplitOrder::Sequential, NormalizationScope::Global, &mut rng),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn sequential_split_takes_blocks() {
        let d = Dataset::new(
            (0..10).map(f64::from).collect(),
            vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
            vec!["x".into()],
        )
        .unwrap();
        let counts = SplitCounts {
            train: 5,
            validation: 2,
            test: 3,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = split(&d, counts, SplitOrder::Sequential, NormalizationScope::TrainOnly, &mut rng)
            .unwrap();
        assert_eq!(b.stats.min(), &[0.0]);
        assert_eq!(b.stats.max(), &[4.0]);
        assert_eq!(b.validation.row(0), &[1.25]);
        assert_eq!(b.out_of_range, 5);
    }

    #[test]
    fn stratified_sampling_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pop = synth_conflict(&SynthParams::default(), &mut rng).unwrap();
        let s = sample(&pop, Sampling::default(), &mut rng).unwrap();
        assert_eq!(s.len(), 1875);
        assert_eq!(s.positives(), pop.positives().min(875));
        let u = sample(&pop, Sampling::Uniform { n: 100 }, &mut rng).unwrap();
        assert_eq!(u.len(), 100);
        assert!(sample(
            &pop,
            Sampling::Stratified {
                positives: 100_000,
                negatives: 1
            },
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn stratified_sampling_backfills_missing_positives() {
        let d = Dataset::new(
            (0..10).map(f64::from).collect(),
            vec![1, 0, 0, 1, 0, 0, 0, 0, 0, 0],
            vec!["x".into()],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample(&d, Sampling::Stratified { positives: 4, negatives: 3 }, &mut rng).unwrap();
        assert_eq!((s.len(), s.positives()), (7, 2));
    }

    #[test]
    fn synth_rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, noise) in [(0.0, 0.0), (0.6, 0.0), (0.1, 0.7), (0.1, -0.1)] {
            let params = SynthParams {
                n_samples: 10,
                minority_fraction: p,
                noise,
            };
            assert!(synth_conflict(&params, &mut rng).is_err());
        }
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.csv");
        std::fs::write(&good, "a,b,label\n1,2,0\n3.5,-4,1\n").unwrap();
        let d = load_csv(&good, "label").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.row(1), &[3.5, -4.0]);

        let bad_label = dir.path().join("bad_label.csv");
        std::fs::write(&bad_label, "a,label\n1,0\n2,2\n").unwrap();
        match load_csv(&bad_label, "label") {
            Err(Error::NonBinaryLabel { line, value, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(value, "2");
            }
            other => panic!("unexpected {other:?}"),
        }

        assert!(matches!(load_csv(&good, "outcome"), Err(Error::MissingColumn { .. })));

        let bad_num = dir.path().join("bad_num.csv");
        std::fs::write(&bad_num, "a,label\n1,0\nzz,1\n").unwrap();
        assert!(matches!(load_csv(&bad_num, "label"), Err(Error::Parse { line: 3, .. })));

        assert!(matches!(
            load_csv(dir.path().join("nope.csv"), "label"),
            Err(Error::Io { .. })
        ));
    }
}
