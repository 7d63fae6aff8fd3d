//! Per-repetition seed derivation.
//!
//! Every repetition owns independent PRNG streams, one per purpose, derived
//! from the master seed with a SplitMix64 mix. Results therefore do not
//! depend on the order in which repetitions are scheduled.

/// Purpose of a derived PRNG stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Data,
    Split,
    RandomPolicy,
    Counterfactual,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Data => 0x6461_7461,
            Stream::Split => 0x7370_6c69,
            Stream::RandomPolicy => 0x7261_6e64,
            Stream::Counterfactual => 0x6366_7463,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for `stream` of repetition `rep`.
pub fn derive_seed(master: u64, rep: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ rep) ^ stream.tag())
}
