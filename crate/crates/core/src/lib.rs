//! Non-binary quantum LDPC codes from affine permutation matrices: field
//! arithmetic, construction, cycle analysis, and a joint belief-propagation
//! decoder over the depolarizing channel.

pub mod affine;
pub mod channel;
pub mod code;
pub mod construct;
pub mod cycles;
pub mod decoder;
pub mod galois;
pub mod harness;
pub mod linalg;

pub use affine::{AffinePerm, BlockCycle, CycleClass, PermArray};
pub use channel::{ChannelError, NoisePair, Prior, SyndromePair};
pub use code::{CodeError, CssCode, NbMatrix, Side, Which};
pub use construct::{ConstructError, ConstructParams, Construction, Design, GeneratorPair};
pub use cycles::{Catalog, CycleRecord, DistanceBound};
pub use decoder::{classify_outcome, decode, DecodeOutcome, DecoderParams, FailureReason, Tag};
pub use galois::{Field, FieldError, Gf};
pub use harness::{Criterion, FerSummary, SweepParams, TrialResult};

/// Splitmix64 finalizer over `(seed, stream)`; used to derive independent sub-seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ stream
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
