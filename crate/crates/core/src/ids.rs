//! Identity descriptors: a 12-bit fingerprint of a classifier's architecture.
//!
//! Layout, most significant position first:
//!
//! | positions | meaning                                       |
//! |-----------|-----------------------------------------------|
//! | 0         | machine type (always 1, MLP)                  |
//! | 1..=5     | hidden node count, 5-bit unsigned big-endian  |
//! | 6..=8     | one-hot activation: Linear, Logistic, Softmax |
//! | 9..=11    | one-hot learning rate: 0.03, 0.02, 0.01       |
//!
//! So an MLP with 5 hidden nodes, linear output and rate 0.01 is
//! `100101100001`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of positions in a descriptor.
pub const DESCRIPTOR_BITS: usize = 12;

/// Largest hidden-layer width a descriptor can carry.
pub const MAX_HIDDEN_NODES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MachineType {
    #[default]
    Mlp,
}

/// Output-layer activation of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Activation {
    Linear,
    Logistic,
    Softmax,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Linear, Activation::Logistic, Activation::Softmax];

    fn one_hot_slot(self) -> usize {
        match self {
            Activation::Linear => 0,
            Activation::Logistic => 1,
            Activation::Softmax => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Logistic => "logistic",
            Activation::Softmax => "softmax",
        }
    }
}

/// One of the three canonical learning rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LearningRate {
    #[serde(rename = "0.01")]
    Lr001,
    #[serde(rename = "0.02")]
    Lr002,
    #[serde(rename = "0.03")]
    Lr003,
}

impl LearningRate {
    pub const ALL: [LearningRate; 3] = [LearningRate::Lr001, LearningRate::Lr002, LearningRate::Lr003];

    pub fn index(self) -> usize {
        match self {
            LearningRate::Lr001 => 0,
            LearningRate::Lr002 => 1,
            LearningRate::Lr003 => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn value(self) -> f64 {
        match self {
            LearningRate::Lr001 => 0.01,
            LearningRate::Lr002 => 0.02,
            LearningRate::Lr003 => 0.03,
        }
    }

    // 0.03 -> slot 0 (100), 0.01 -> slot 2 (001)
    fn one_hot_slot(self) -> usize {
        2 - self.index()
    }
}

/// Decoded architecture parameters of one classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(default)]
    pub machine_type: MachineType,
    pub hidden_nodes: usize,
    pub activation: Activation,
    pub learning_rate: LearningRate,
}

impl ClassifierSpec {
    pub fn mlp(hidden_nodes: usize, activation: Activation, learning_rate: LearningRate) -> Self {
        ClassifierSpec {
            machine_type: MachineType::Mlp,
            hidden_nodes,
            activation,
            learning_rate,
        }
    }
}

/// A raw 12-position bit pattern.
///
/// Any pattern can be held and printed; whether it describes a real
/// classifier is decided by [`Codec::decode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdentityDescriptor(u16);

impl IdentityDescriptor {
    /// Builds a descriptor from a bit array, position 0 first.
    pub fn from_bits(bits: [bool; DESCRIPTOR_BITS]) -> Self {
        let word = bits
            .iter()
            .fold(0u16, |acc, &b| (acc << 1) | u16::from(b));
        IdentityDescriptor(word)
    }

    /// Builds a descriptor from the low 12 bits of `word`; position 0 is bit 11.
    pub fn from_word(word: u16) -> Self {
        IdentityDescriptor(word & 0x0fff)
    }

    pub fn word(self) -> u16 {
        self.0
    }

    pub fn bit(self, position: usize) -> bool {
        assert!(position < DESCRIPTOR_BITS, "descriptor position {position} out of range");
        (self.0 >> (DESCRIPTOR_BITS - 1 - position)) & 1 == 1
    }

    pub fn bits(self) -> [bool; DESCRIPTOR_BITS] {
        std::array::from_fn(|j| self.bit(j))
    }

    fn field(self, start: usize, len: usize) -> u16 {
        let shift = DESCRIPTOR_BITS - start - len;
        (self.0 >> shift) & ((1 << len) - 1)
    }
}

impl fmt::Display for IdentityDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for IdentityDescriptor {
    type Err = Error;

    /// Parses the 12-character text form. Whitespace between characters is
    /// ignored so `"1 00101 100 001"` is accepted too.
    fn from_str(s: &str) -> Result<Self> {
        let malformed = |reason: &str| Error::MalformedDescriptor {
            descriptor: s.to_string(),
            reason: reason.to_string(),
        };
        let mut word = 0u16;
        let mut count = 0;
        for c in s.chars().filter(|c| !c.is_whitespace()) {
            let bit = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(malformed("characters must be '0' or '1'")),
            };
            count += 1;
            if count > DESCRIPTOR_BITS {
                break;
            }
            word = (word << 1) | bit;
        }
        if count != DESCRIPTOR_BITS {
            return Err(malformed("expected exactly 12 bits"));
        }
        Ok(IdentityDescriptor(word))
    }
}

impl Serialize for IdentityDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IdentityDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Encoder/decoder bound to an input-feature count, which fixes the lower
/// bound on hidden nodes (`input_dim + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codec {
    input_dim: usize,
}

impl Codec {
    pub fn new(input_dim: usize) -> Result<Self> {
        if input_dim + 1 > MAX_HIDDEN_NODES {
            return Err(Error::Config(format!(
                "input_dim {input_dim} leaves no legal hidden-node count (need input_dim + 1 <= {MAX_HIDDEN_NODES})"
            )));
        }
        Ok(Codec { input_dim })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn min_hidden(&self) -> usize {
        self.input_dim + 1
    }

    pub fn validate(&self, spec: &ClassifierSpec) -> Result<()> {
        if !(self.min_hidden()..=MAX_HIDDEN_NODES).contains(&spec.hidden_nodes) {
            return Err(Error::InvalidSpec(format!(
                "hidden_nodes {} outside [{}, {}]",
                spec.hidden_nodes,
                self.min_hidden(),
                MAX_HIDDEN_NODES
            )));
        }
        Ok(())
    }

    pub fn encode(&self, spec: &ClassifierSpec) -> Result<IdentityDescriptor> {
        self.validate(spec)?;
        let mut word: u16 = 1 << 11;
        word |= (spec.hidden_nodes as u16) << 6;
        word |= 1 << (5 - spec.activation.one_hot_slot());
        word |= 1 << (2 - spec.learning_rate.one_hot_slot());
        Ok(IdentityDescriptor(word))
    }

    pub fn decode(&self, descriptor: &IdentityDescriptor) -> Result<ClassifierSpec> {
        let malformed = |reason: String| Error::MalformedDescriptor {
            descriptor: descriptor.to_string(),
            reason,
        };
        if !descriptor.bit(0) {
            return Err(malformed("machine-type bit must be 1".into()));
        }
        let hidden = descriptor.field(1, 5) as usize;
        if !(self.min_hidden()..=MAX_HIDDEN_NODES).contains(&hidden) {
            return Err(malformed(format!(
                "hidden node count {hidden} outside [{}, {MAX_HIDDEN_NODES}]",
                self.min_hidden()
            )));
        }
        let activation = one_hot(descriptor.field(6, 3))
            .map(|slot| Activation::ALL[slot])
            .ok_or_else(|| malformed("activation group is not one-hot".into()))?;
        let learning_rate = one_hot(descriptor.field(9, 3))
            .map(|slot| LearningRate::ALL[2 - slot])
            .ok_or_else(|| malformed("learning-rate group is not one-hot".into()))?;
        Ok(ClassifierSpec::mlp(hidden, activation, learning_rate))
    }

    /// Draws every field uniformly over its legal domain.
    pub fn random_spec<R: Rng + ?Sized>(&self, rng: &mut R) -> ClassifierSpec {
        let hidden_nodes = rng.random_range(self.min_hidden()..=MAX_HIDDEN_NODES);
        let activation = Activation::ALL[rng.random_range(0..3)];
        let learning_rate = LearningRate::ALL[rng.random_range(0..3)];
        ClassifierSpec::mlp(hidden_nodes, activation, learning_rate)
    }

    /// All legal specs in a fixed order (hidden, activation, rate).
    pub fn all_specs(&self) -> impl Iterator<Item = ClassifierSpec> + '_ {
        (self.min_hidden()..=MAX_HIDDEN_NODES).flat_map(|h| {
            Activation::ALL.into_iter().flat_map(move |a| {
                LearningRate::ALL
                    .into_iter()
                    .map(move |r| ClassifierSpec::mlp(h, a, r))
            })
        })
    }
}

// Slot (0 = leftmost) of the single set bit in a 3-bit group.
fn one_hot(group: u16) -> Option<usize> {
    match group {
        0b100 => Some(0),
        0b010 => Some(1),
        0b001 => Some(2),
        _ => None,
    }
}
