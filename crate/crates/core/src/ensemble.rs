//! Hard majority voting over a selected sub-ensemble.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DatasetBundle};
use crate::diversity::kw_of;
use crate::error::{Error, Result};
use crate::ga::EnsembleSelection;
use crate::ids::IdentityDescriptor;
use crate::pool::Pool;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub individual_labels: Vec<u8>,
    pub winner: u8,
    /// Votes for the winner minus votes against it.
    pub margin: usize,
}

/// Majority vote over an odd number of binary labels.
pub fn majority_vote(labels: &[u8]) -> Result<VoteRecord> {
    if labels.is_empty() || labels.len() % 2 == 0 {
        return Err(Error::EvenEnsemble(labels.len()));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidParameter(format!("label {bad} is not binary")));
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    let zeros = labels.len() - ones;
    let (winner, margin) = if ones > zeros {
        (1, ones - zeros)
    } else {
        (0, zeros - ones)
    };
    Ok(VoteRecord {
        individual_labels: labels.to_vec(),
        winner,
        margin,
    })
}

/// Voted labels of the selected members for every sample of `split`.
pub fn ensemble_predictions(selection: &EnsembleSelection, pool: &Pool, split: &Dataset) -> Result<Vec<u8>> {
    selection.check_bounds(pool.len())?;
    let member_predictions = selection
        .indices()
        .iter()
        .map(|&i| pool.classifiers[i].network.predict_all(split))
        .collect::<Result<Vec<_>>>()?;
    let mut ballot = vec![0u8; selection.k()];
    (0..split.len())
        .map(|s| {
            for (slot, preds) in ballot.iter_mut().zip(&member_predictions) {
                *slot = preds[s];
            }
            majority_vote(&ballot).map(|v| v.winner)
        })
        .collect()
}

/// Misclassification rate of the voted labels on `split`.
pub fn ensemble_error(selection: &EnsembleSelection, pool: &Pool, split: &Dataset) -> Result<f64> {
    if split.is_empty() {
        return Err(Error::Empty);
    }
    let voted = ensemble_predictions(selection, pool, split)?;
    Ok(crate::mlp::misclassification_rate(&voted, split.labels()))
}

/// Diversity and voted errors of one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub achieved_kw: f64,
    pub val_error: f64,
    pub test_error: f64,
    pub descriptors: Vec<IdentityDescriptor>,
    pub member_val_errors: Vec<f64>,
}

pub fn evaluate_selection(
    selection: &EnsembleSelection,
    pool: &Pool,
    bundle: &DatasetBundle,
) -> Result<EvaluationRow> {
    selection.check_bounds(pool.len())?;
    let descriptors: Vec<IdentityDescriptor> = selection
        .indices()
        .iter()
        .map(|&i| pool.classifiers[i].descriptor)
        .collect();
    Ok(EvaluationRow {
        achieved_kw: kw_of(&descriptors).value(),
        val_error: ensemble_error(selection, pool, &bundle.validation)?,
        test_error: ensemble_error(selection, pool, &bundle.test)?,
        member_val_errors: selection
            .indices()
            .iter()
            .map(|&i| pool.classifiers[i].validation_error)
            .collect(),
        descriptors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vote_examples() {
        let v = majority_vote(&[1, 1, 1, 1, 1, 0, 0, 0, 0]).unwrap();
        assert_eq!((v.winner, v.margin), (1, 1));
        let v = majority_vote(&[0; 9]).unwrap();
        assert_eq!((v.winner, v.margin), (0, 9));
        assert!(matches!(majority_vote(&[0; 8]), Err(Error::EvenEnsemble(8))));
        assert!(matches!(majority_vote(&[]), Err(Error::EvenEnsemble(0))));
        assert!(majority_vote(&[0, 2, 1]).is_err());
    }

    proptest! {
        #[test]
        fn vote_symmetries(half in 0usize..6, bits in any::<u16>(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let k = 2 * half + 1;
            let labels: Vec<u8> = (0..k).map(|i| ((bits >> i) & 1) as u8).collect();
            let v = majority_vote(&labels).unwrap();
            prop_assert!(v.margin >= 1);
            let mut shuffled = labels.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(majority_vote(&shuffled).unwrap().winner, v.winner);
            let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
            prop_assert_eq!(majority_vote(&flipped).unwrap().winner, 1 - v.winner);
        }
    }
}
