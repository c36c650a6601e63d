//! The bank of trained classifiers that sub-ensembles are drawn from.
//!
//! Members are produced by an accept/reject loop: attempt `i` draws a random
//! spec and initial weights from stream `i` of the master seed, trains, and
//! is kept only if its validation error is below the cap. Attempts are
//! trained in parallel batches but accepted strictly in attempt order, so the
//! pool is a pure function of `(config, data, master_seed)`.
//!
//! # File format
//!
//! A pool file is a single ASCII header line followed by a JSON payload:
//!
//! ```text
//! ensemble-forge-pool v1 <payload-bytes> <sha256-of-payload-hex>\n
//! {"config":{...},"master_seed":...,"classifiers":[...],...}
//! ```
//!
//! Floats are written in shortest round-trip form, so loading reproduces
//! every weight bit for bit.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{NormalizationStats, SelectionData};
use crate::diversity::{kw_of, DiversityValue};
use crate::error::{Error, Result};
use crate::ids::{ClassifierSpec, Codec, IdentityDescriptor};
use crate::mlp::{self, TrainedClassifier, DEFAULT_EPOCHS};
use crate::seed::{derive_seed, stream_rng};

pub const POOL_FILE_MAGIC: &str = "ensemble-forge-pool";
pub const POOL_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoolConfig {
    pub size: usize,
    /// Members must have validation error strictly below this.
    pub error_cap: f64,
    /// Defaults to `20 * size` when unset.
    pub max_attempts: Option<usize>,
    pub epochs: usize,
    /// Independent pools built by the max-diversity search.
    pub candidates: usize,
    /// Use this spec for every member instead of drawing at random.
    pub forced_spec: Option<ClassifierSpec>,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            size: 60,
            error_cap: 0.45,
            max_attempts: None,
            epochs: DEFAULT_EPOCHS,
            candidates: 5,
            forced_spec: None,
        }
    }
}

impl PoolConfig {
    pub fn attempt_limit(&self) -> usize {
        self.max_attempts.unwrap_or(20 * self.size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::Config("pool size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.candidates == 0 {
            return Err(Error::Config("candidates must be at least 1".into()));
        }
        if self.attempt_limit() < self.size {
            return Err(Error::Config(format!(
                "max_attempts {} is below pool size {}",
                self.attempt_limit(),
                self.size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub config: PoolConfig,
    pub master_seed: u64,
    pub input_dim: usize,
    pub classifiers: Vec<TrainedClassifier>,
    pub pool_kw: DiversityValue,
    /// Trained classifiers discarded for exceeding the error cap.
    pub rejections: usize,
    /// Normalization applied to the data the pool was trained on, if known.
    pub stats: Option<NormalizationStats>,
}

impl Pool {
    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    pub fn descriptors(&self) -> Vec<IdentityDescriptor> {
        self.classifiers.iter().map(|c| c.descriptor).collect()
    }

    /// Checks the membership constraints and the stored kw.
    pub fn verify(&self) -> Result<()> {
        let codec = Codec::new(self.input_dim)?;
        for (i, c) in self.classifiers.iter().enumerate() {
            if codec.encode(&c.spec)? != c.descriptor {
                return Err(Error::Format(format!("classifier {i}: descriptor does not match spec")));
            }
            if !(c.validation_error < self.config.error_cap) {
                return Err(Error::Format(format!(
                    "classifier {i}: validation error {} not below cap {}",
                    c.validation_error, self.config.error_cap
                )));
            }
            if c.network.hidden_dim() != c.spec.hidden_nodes || c.network.input_dim() != self.input_dim {
                return Err(Error::Format(format!("classifier {i}: network shape does not match spec")));
            }
            c.network.validate()?;
        }
        if kw_of(&self.descriptors()) != self.pool_kw {
            return Err(Error::Format("stored pool kw does not match descriptors".into()));
        }
        Ok(())
    }
}

struct Attempt {
    classifier: TrainedClassifier,
    accepted: bool,
}

fn run_attempt(
    config: &PoolConfig,
    codec: &Codec,
    data: SelectionData<'_>,
    master_seed: u64,
    index: usize,
) -> Result<Attempt> {
    let mut rng = stream_rng(master_seed, index as u64);
    let spec = match config.forced_spec {
        Some(spec) => {
            codec.validate(&spec)?;
            spec
        }
        None => codec.random_spec(&mut rng),
    };
    let training = mlp::train(&spec, data.train, &mut rng, config.epochs)?;
    let validation_error = training.network.classification_error(data.validation)?;
    Ok(Attempt {
        classifier: TrainedClassifier {
            spec,
            descriptor: codec.encode(&spec)?,
            network: training.network,
            validation_error,
        },
        accepted: validation_error < config.error_cap,
    })
}

/// Trains random classifiers until `config.size` of them pass the error cap.
pub fn build_pool(config: &PoolConfig, data: SelectionData<'_>, master_seed: u64) -> Result<Pool> {
    config.validate()?;
    if data.train.n_features() != data.validation.n_features() {
        return Err(Error::DimensionMismatch {
            expected: data.train.n_features(),
            actual: data.validation.n_features(),
        });
    }
    let codec = Codec::new(data.train.n_features())?;
    let limit = config.attempt_limit();
    let batch = rayon::current_num_threads().max(1) * 2;

    let mut accepted = Vec::with_capacity(config.size);
    let mut rejections = 0;
    let mut next = 0;
    'outer: while next < limit {
        let end = (next + batch.max(config.size - accepted.len())).min(limit);
        let attempts: Vec<Attempt> = (next..end)
            .into_par_iter()
            .map(|i| run_attempt(config, &codec, data, master_seed, i))
            .collect::<Result<_>>()?;
        next = end;
        for attempt in attempts {
            if attempt.accepted {
                accepted.push(attempt.classifier);
                if accepted.len() == config.size {
                    break 'outer;
                }
            } else {
                rejections += 1;
            }
        }
    }
    if accepted.len() < config.size {
        return Err(Error::PoolExhausted {
            accepted: accepted.len(),
            requested: config.size,
            attempts: limit,
        });
    }
    let pool_kw = kw_of(&accepted.iter().map(|c| c.descriptor).collect::<Vec<_>>());
    Ok(Pool {
        config: config.clone(),
        master_seed,
        input_dim: codec.input_dim(),
        classifiers: accepted,
        pool_kw,
        rejections,
        stats: None,
    })
}

/// Seed of candidate `index` in the max-diversity search. Candidate 0 uses
/// the master seed itself.
pub fn candidate_seed(master_seed: u64, index: usize) -> u64 {
    if index == 0 {
        master_seed
    } else {
        derive_seed(master_seed, index as u64)
    }
}

/// Builds `candidates` independent pools and keeps the most diverse one
/// (lowest candidate index on ties).
pub fn build_max_diversity_pool(
    config: &PoolConfig,
    data: SelectionData<'_>,
    master_seed: u64,
    candidates: usize,
) -> Result<Pool> {
    if candidates == 0 {
        return Err(Error::Config("candidates must be at least 1".into()));
    }
    let mut best: Option<Pool> = None;
    for c in 0..candidates {
        let pool = build_pool(config, data, candidate_seed(master_seed, c))?;
        if best.as_ref().is_none_or(|b| pool.pool_kw > b.pool_kw) {
            best = Some(pool);
        }
    }
    Ok(best.expect("candidates >= 1"))
}

fn checksum(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

pub fn save_pool(pool: &Pool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let payload = serde_json::to_vec(pool)?;
    let mut bytes = format!(
        "{POOL_FILE_MAGIC} v{POOL_FILE_VERSION} {} {}\n",
        payload.len(),
        checksum(&payload)
    )
    .into_bytes();
    bytes.extend_from_slice(&payload);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_pool(path: impl AsRef<Path>) -> Result<Pool> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pool(&bytes)
}

pub(crate) fn decode_pool(bytes: &[u8]) -> Result<Pool> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let payload = &bytes[newline + 1..];

    let fields: Vec<&str> = header.split(' ').collect();
    let [magic, version, len, digest] = fields[..] else {
        return Err(Error::Format(format!("malformed header {header:?}")));
    };
    if magic != POOL_FILE_MAGIC {
        return Err(Error::Format(format!("not a pool file (magic {magic:?})")));
    }
    let version: u32 = version
        .strip_prefix('v')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format(format!("malformed version {version:?}")))?;
    if version != POOL_FILE_VERSION {
        return Err(Error::Version {
            found: version,
            expected: POOL_FILE_VERSION,
        });
    }
    let len: usize = len
        .parse()
        .map_err(|_| Error::Format(format!("malformed payload length {len:?}")))?;
    if payload.len() != len {
        return Err(Error::Format(format!(
            "payload is {} bytes, header declares {len} (truncated or padded file)",
            payload.len()
        )));
    }
    if checksum(payload) != digest {
        return Err(Error::Checksum);
    }
    let pool: Pool = serde_json::from_slice(payload)?;
    pool.verify()?;
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split, synth_conflict, NormalizationScope, SplitCounts, SplitOrder, SynthParams};
    use crate::ids::{Activation, LearningRate};
    use crate::seed::stream_rng;

    fn bundle(noise: f64) -> crate::data::DatasetBundle {
        let mut rng = stream_rng(1, 0);
        let data = synth_conflict(
            &SynthParams {
                n_samples: 300,
                minority_fraction: 0.3,
                noise,
            },
            &mut rng,
        )
        .unwrap();
        let counts = SplitCounts {
            train: 150,
            validation: 75,
            test: 75,
        };
        split(&data, counts, SplitOrder::Shuffled, NormalizationScope::TrainOnly, &mut rng).unwrap()
    }

    fn small_config(size: usize) -> PoolConfig {
        PoolConfig {
            size,
            epochs: 30,
            ..PoolConfig::default()
        }
    }

    #[test]
    fn single_member_pool_has_zero_kw() {
        let b = bundle(0.0);
        let pool = build_pool(&small_config(1), b.selection_view(), 3).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.pool_kw.value(), 0.0);
        pool.verify().unwrap();
    }

    #[test]
    fn zero_cap_exhausts() {
        let b = bundle(0.3);
        let config = PoolConfig {
            error_cap: 0.0,
            max_attempts: Some(6),
            ..small_config(2)
        };
        assert!(matches!(
            build_pool(&config, b.selection_view(), 3),
            Err(Error::PoolExhausted { accepted: 0, requested: 2, attempts: 6 })
        ));
    }

    #[test]
    fn pool_is_deterministic() {
        let b = bundle(0.05);
        let a = build_pool(&small_config(6), b.selection_view(), 42).unwrap();
        let c = build_pool(&small_config(6), b.selection_view(), 42).unwrap();
        assert_eq!(a, c);
        assert!(a.classifiers.iter().all(|m| m.spec.hidden_nodes > 7));
    }

    #[test]
    fn forced_spec_pool_is_uniform() {
        let b = bundle(0.0);
        let config = PoolConfig {
            forced_spec: Some(ClassifierSpec::mlp(12, Activation::Logistic, LearningRate::Lr003)),
            ..small_config(4)
        };
        let pool = build_pool(&config, b.selection_view(), 5).unwrap();
        assert_eq!(pool.pool_kw.value(), 0.0);
        let bad = PoolConfig {
            forced_spec: Some(ClassifierSpec::mlp(3, Activation::Logistic, LearningRate::Lr003)),
            ..small_config(1)
        };
        assert!(matches!(build_pool(&bad, b.selection_view(), 5), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn max_diversity_selection() {
        let b = bundle(0.0);
        let config = small_config(4);
        let one = build_max_diversity_pool(&config, b.selection_view(), 9, 1).unwrap();
        assert_eq!(one, build_pool(&config, b.selection_view(), 9).unwrap());

        let best = build_max_diversity_pool(&config, b.selection_view(), 9, 4).unwrap();
        for c in 0..4 {
            let p = build_pool(&config, b.selection_view(), candidate_seed(9, c)).unwrap();
            assert!(best.pool_kw >= p.pool_kw);
        }
        assert_eq!(best, build_max_diversity_pool(&config, b.selection_view(), 9, 4).unwrap());
    }

    #[test]
    fn file_round_trip_and_corruption() {
        let b = bundle(0.0);
        let mut pool = build_pool(&small_config(3), b.selection_view(), 11).unwrap();
        pool.stats = Some(b.stats.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pool.efp");
        save_pool(&pool, &path).unwrap();
        let loaded = load_pool(&path).unwrap();
        assert_eq!(loaded, pool);
        for (x, y) in loaded.classifiers.iter().zip(&pool.classifiers) {
            let xs: Vec<u64> = x.network.parameters().iter().map(|v| v.to_bits()).collect();
            let ys: Vec<u64> = y.network.parameters().iter().map(|v| v.to_bits()).collect();
            assert_eq!(xs, ys);
        }

        let bytes = std::fs::read(&path).unwrap();
        assert!(matches!(decode_pool(&bytes[..bytes.len() - 10]), Err(Error::Format(_))));
        assert!(matches!(decode_pool(&bytes[..10]), Err(Error::Format(_))));

        let text = String::from_utf8(bytes.clone()).unwrap();
        let v99 = text.replacen(" v1 ", " v99 ", 1);
        assert!(matches!(
            decode_pool(v99.as_bytes()),
            Err(Error::Version { found: 99, expected: 1 })
        ));

        let mut flipped = bytes.clone();
        let last = flipped.len() - 2;
        flipped[last] = if flipped[last] == b'1' { b'2' } else { b'1' };
        assert!(matches!(decode_pool(&flipped), Err(Error::Checksum)));

        assert!(matches!(load_pool(dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
