//! Kohavi-Wolpert variance over stacked identity descriptors.
//!
//! For `L` classifiers with descriptors `D[i][j]` and `N = 12` positions,
//! let `l_j` be the number of classifiers with a 1 at position `j`. Then
//!
//! ```text
//! kw = 1 / (N * L^2) * sum_j l_j * (L - l_j)
//! ```
//!
//! Every term `l_j * (L - l_j)` is an exact integer, so the sum is
//! accumulated in `u64` and divided once.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{IdentityDescriptor, DESCRIPTOR_BITS};

/// Default cap on the number of subsets [`exhaustive_subset_kw`] will enumerate.
pub const DEFAULT_SUBSET_CAP: u128 = 10_000;

/// Largest descriptor list [`exhaustive_subset_kw`] accepts.
pub const MAX_EXHAUSTIVE_LEN: usize = 16;

/// A structural diversity value in `[0, 0.25]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiversityValue(f64);

impl DiversityValue {
    pub const MAX: f64 = 0.25;

    pub fn new(kw: f64) -> Result<Self> {
        if (0.0..=Self::MAX).contains(&kw) {
            Ok(DiversityValue(kw))
        } else {
            Err(Error::InvalidParameter(format!("diversity {kw} outside [0, 0.25]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for DiversityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<DiversityValue> for f64 {
    fn from(v: DiversityValue) -> f64 {
        v.0
    }
}

/// `L` rows (classifiers) by 12 columns (descriptor positions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<IdentityDescriptor>,
}

impl BitMatrix {
    pub fn from_descriptors(rows: Vec<IdentityDescriptor>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::MalformedMatrix("need at least one row".into()));
        }
        Ok(BitMatrix { rows })
    }

    /// Builds a matrix from per-classifier rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let descriptors = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let row = row.as_ref();
                if row.len() != DESCRIPTOR_BITS {
                    return Err(Error::MalformedMatrix(format!(
                        "row {i} has {} entries, expected {DESCRIPTOR_BITS}",
                        row.len()
                    )));
                }
                let mut bits = [false; DESCRIPTOR_BITS];
                for (j, &v) in row.iter().enumerate() {
                    bits[j] = match v {
                        0 => false,
                        1 => true,
                        _ => {
                            return Err(Error::MalformedMatrix(format!(
                                "entry ({i}, {j}) is {v}, expected 0 or 1"
                            )))
                        }
                    };
                }
                Ok(IdentityDescriptor::from_bits(bits))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_descriptors(descriptors)
    }

    /// Parses the position-major text layout: 12 lines, one per descriptor
    /// position, each holding one space-separated bit per classifier.
    pub fn from_position_major_text(text: &str) -> Result<Self> {
        let lines: Vec<Vec<u8>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(j, line)| {
                line.split_whitespace()
                    .map(|tok| match tok {
                        "0" => Ok(0),
                        "1" => Ok(1),
                        other => Err(Error::MalformedMatrix(format!(
                            "line {}: token {other:?} is not a bit",
                            j + 1
                        ))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        if lines.len() != DESCRIPTOR_BITS {
            return Err(Error::MalformedMatrix(format!(
                "expected {DESCRIPTOR_BITS} position lines, found {}",
                lines.len()
            )));
        }
        let width = lines[0].len();
        if lines.iter().any(|l| l.len() != width) {
            return Err(Error::MalformedMatrix("ragged position lines".into()));
        }
        let rows: Vec<Vec<u8>> = (0..width)
            .map(|i| lines.iter().map(|line| line[i]).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Number of classifiers, `L`.
    pub fn classifiers(&self) -> usize {
        self.rows.len()
    }

    pub fn positions(&self) -> usize {
        DESCRIPTOR_BITS
    }

    pub fn rows(&self) -> &[IdentityDescriptor] {
        &self.rows
    }

    /// Number of classifiers with a 1 at position `j`.
    pub fn column_count(&self, j: usize) -> Result<usize> {
        if j >= DESCRIPTOR_BITS {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: DESCRIPTOR_BITS,
            });
        }
        Ok(self.rows.iter().filter(|d| d.bit(j)).count())
    }

    pub fn kw_variance(&self) -> DiversityValue {
        kw_of(&self.rows)
    }
}

/// Kohavi-Wolpert variance of a descriptor slice. An empty slice yields 0.
pub fn kw_of(descriptors: &[IdentityDescriptor]) -> DiversityValue {
    let l = descriptors.len() as u64;
    if l == 0 {
        return DiversityValue(0.0);
    }
    let mut counts = [0u64; DESCRIPTOR_BITS];
    for d in descriptors {
        let w = d.word();
        for (j, c) in counts.iter_mut().enumerate() {
            *c += u64::from((w >> (DESCRIPTOR_BITS - 1 - j)) & 1);
        }
    }
    let sum: u64 = counts.iter().map(|&c| c * (l - c)).sum();
    DiversityValue(sum as f64 / (DESCRIPTOR_BITS as u64 * l * l) as f64)
}

/// One enumerated subset and its diversity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetKw {
    pub indices: Vec<usize>,
    pub kw: DiversityValue,
}

/// Enumerates every `k`-subset of `descriptors` with its diversity, sorted by
/// kw ascending and then lexicographically by indices.
pub fn exhaustive_subset_kw(
    descriptors: &[IdentityDescriptor],
    k: usize,
    cap: u128,
) -> Result<Vec<SubsetKw>> {
    let n = descriptors.len();
    if n > MAX_EXHAUSTIVE_LEN {
        return Err(Error::Config(format!(
            "exhaustive enumeration supports at most {MAX_EXHAUSTIVE_LEN} descriptors, got {n}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("subset size {k} not in [1, {n}]")));
    }
    let combinations = binomial(n as u128, k as u128);
    if combinations > cap {
        return Err(Error::SizeLimit { combinations, cap });
    }

    let mut out = Vec::with_capacity(combinations as usize);
    let mut idx: Vec<usize> = (0..k).collect();
    let mut scratch = Vec::with_capacity(k);
    loop {
        scratch.clear();
        scratch.extend(idx.iter().map(|&i| descriptors[i]));
        out.push(SubsetKw {
            indices: idx.clone(),
            kw: kw_of(&scratch),
        });
        // advance to the next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
    // enumeration order is already lexicographic; a stable sort keeps it for ties
    out.sort_by(|a, b| a.kw.0.total_cmp(&b.kw.0));
    Ok(out)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const NINE: &str = include_str!("../tests/fixtures/nine_classifiers.txt");

    fn d(s: &str) -> IdentityDescriptor {
        s.parse().unwrap()
    }

    #[test]
    fn fixture_column_counts() {
        let m = BitMatrix::from_position_major_text(NINE).unwrap();
        assert_eq!(m.classifiers(), 9);
        let counts: Vec<_> = (0..12).map(|j| m.column_count(j).unwrap()).collect();
        assert_eq!(counts, vec![9, 1, 6, 3, 4, 5, 3, 3, 3, 0, 4, 7]);
        assert!(matches!(m.column_count(12), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn fixture_kw() {
        let m = BitMatrix::from_position_major_text(NINE).unwrap();
        assert!((m.kw_variance().value() - 172.0 / 972.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_values() {
        let same = vec![d("101000010010"); 9];
        assert_eq!(kw_of(&same).value(), 0.0);
        let opposite = [d("101010101010"), d("010101010101")];
        assert_eq!(kw_of(&opposite).value(), 0.25);
        assert_eq!(kw_of(&same[..1]).value(), 0.0);
    }

    #[test]
    fn matrix_rejects_bad_entries() {
        assert!(BitMatrix::from_rows(&[[0u8, 1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0]]).is_err());
        assert!(BitMatrix::from_rows(&[vec![0u8; 11]]).is_err());
        assert!(BitMatrix::from_rows::<Vec<u8>>(&[]).is_err());
    }

    #[test]
    fn exhaustive_examples() {
        let same = vec![d("101000010010"); 3];
        let all = exhaustive_subset_kw(&same, 2, DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(all.len(), 3);
        assert!(all.iter().all(|s| s.kw.value() == 0.0));

        let twelve: Vec<_> = (0..12u16).map(|i| IdentityDescriptor::from_word(i * 331)).collect();
        let all = exhaustive_subset_kw(&twelve, 3, DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(all.len(), 220);
        assert!(all.windows(2).all(|w| w[0].kw.value() <= w[1].kw.value()));

        let whole = exhaustive_subset_kw(&twelve, 12, DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].kw, kw_of(&twelve));
    }

    #[test]
    fn exhaustive_limits() {
        let many: Vec<_> = (0..16u16).map(IdentityDescriptor::from_word).collect();
        assert!(matches!(
            exhaustive_subset_kw(&many, 8, DEFAULT_SUBSET_CAP),
            Err(Error::SizeLimit { combinations: 12870, .. })
        ));
        let too_many: Vec<_> = (0..17u16).map(IdentityDescriptor::from_word).collect();
        assert!(exhaustive_subset_kw(&too_many, 1, DEFAULT_SUBSET_CAP).is_err());
        assert!(exhaustive_subset_kw(&many, 0, DEFAULT_SUBSET_CAP).is_err());
    }

    fn descriptors(max_len: usize) -> impl Strategy<Value = Vec<IdentityDescriptor>> {
        prop::collection::vec((0u16..4096).prop_map(IdentityDescriptor::from_word), 1..=max_len)
    }

    proptest! {
        #[test]
        fn bounded(rows in descriptors(20)) {
            let kw = kw_of(&rows).value();
            prop_assert!((0.0..=0.25).contains(&kw));
        }

        #[test]
        fn row_permutation_invariant(rows in descriptors(10), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = rows.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(kw_of(&rows), kw_of(&shuffled));
        }

        #[test]
        fn column_permutation_invariant(rows in descriptors(10), rot in 0u32..12) {
            let rotate = |d: &IdentityDescriptor| {
                let w = d.word();
                IdentityDescriptor::from_word(((w << rot) | (w >> (12 - rot))) & 0x0fff)
            };
            let rotated: Vec<_> = rows.iter().map(rotate).collect();
            prop_assert_eq!(kw_of(&rows), kw_of(&rotated));
        }

        #[test]
        fn column_complement_invariant(rows in descriptors(10), col in 0usize..12) {
            let mask = 1u16 << (11 - col);
            let flipped: Vec<_> = rows
                .iter()
                .map(|d| IdentityDescriptor::from_word(d.word() ^ mask))
                .collect();
            prop_assert_eq!(kw_of(&rows), kw_of(&flipped));
        }

        #[test]
        fn zero_iff_uniform(rows in descriptors(6)) {
            let uniform = rows.iter().all(|r| *r == rows[0]);
            prop_assert_eq!(kw_of(&rows).value() == 0.0, uniform);
        }
    }
}
