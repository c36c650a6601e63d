//! Structural diversity of classifier ensembles.
//!
//! Each classifier in a pool of single-hidden-layer perceptrons is described
//! by a 12-bit [identity descriptor](ids) built from its architecture (hidden
//! width, output activation, learning rate). The [Kohavi-Wolpert
//! variance](diversity) of a set of descriptors measures how structurally
//! varied that set is. A [genetic algorithm](ga) picks odd-sized
//! sub-ensembles whose diversity hits chosen targets, and [majority
//! voting](ensemble) scores each pick, so diversity can be mapped against
//! classification error ([`sweep`]).
//!
//! ```
//! use ensemble_forge::diversity::kw_of;
//! use ensemble_forge::ids::{Activation, ClassifierSpec, Codec, LearningRate};
//!
//! let codec = Codec::new(7)?;
//! let a = codec.encode(&ClassifierSpec::mlp(8, Activation::Logistic, LearningRate::Lr002))?;
//! let b = codec.encode(&ClassifierSpec::mlp(30, Activation::Softmax, LearningRate::Lr003))?;
//! assert_eq!(a.to_string(), "101000010010");
//! assert!(kw_of(&[a, b]).value() > 0.0);
//! # Ok::<(), ensemble_forge::Error>(())
//! ```

pub mod cli;
pub mod data;
pub mod diversity;
pub mod ensemble;
pub mod error;
pub mod ga;
pub mod ids;
pub mod mlp;
pub mod pool;
pub mod seed;
pub mod sweep;

pub use error::{Error, Result};

// The guide under book/ is compiled as doc-tests so its snippets stay in
// sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/descriptors.md")]
    mod descriptors {}
    #[doc = include_str!("../../../book/src/diversity.md")]
    mod diversity {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/voting.md")]
    mod voting {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
