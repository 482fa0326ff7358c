//! Tag-free layered unequal-error-protection codebooks.
//!
//! Messages of different importance are mapped to disjoint groups of
//! fixed-length binary codewords. More important groups get a larger
//! intra-group minimum distance, and groups are kept far enough apart that
//! the receiver can recover the importance level from the codeword alone by
//! nearest-group decoding. No header or tag is sent.
//!
//! ```
//! use uep::{build, classify, ConstructionConfig};
//!
//! let cfg = ConstructionConfig::new(12, &[(1, 4), (2, 2)]);
//! let cb = build(&cfg).unwrap();
//! let sent = cb.group(2)[1];
//! let mut received = sent;
//! received.flip(0);
//! received.flip(7);
//! let out = classify(&received, &cb).unwrap();
//! assert_eq!((out.level, out.message_index), (2, 1));
//! ```

pub mod baseline;
pub mod bch;
pub mod channel;
pub mod codebook;
pub mod codeword;
pub mod config;
pub mod construct;
pub mod decoder;
pub mod error;
pub mod format;
pub mod sim;

pub use baseline::{BaselineCodebook, IndicatorBook};
pub use bch::BchCode;
pub use channel::{AwgnChannel, ChannelModel, VlcIsiChannel};
pub use codebook::{verify_codebook, LayeredCodebook, LevelSpec, Rule, VerificationReport};
pub use codeword::{hamming_distance, Codeword};
pub use config::Config;
pub use construct::{build, BuildError, CandidatePolicy, ConstructionConfig};
pub use decoder::{classify, theorem1_check, theorem2_check, DecodeResult, TheoremReport};
pub use error::{Error, Result};
pub use format::{parse_codebook, write_codebook};
pub use sim::{simulate, SimConfig, SimResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/distances.md")]
    mod distances {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/decoding.md")]
    mod decoding {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    mod baseline {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
