use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::NodeId;

/// What a random stream is used for. Each (purpose, node) pair gets its own
/// stream so that enabling one mechanism never shifts another's draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StreamKind {
    Receiver,
    Sender,
    Backoff,
}

impl StreamKind {
    pub fn stream_id(self, node: NodeId) -> u64 {
        let tag = match self {
            StreamKind::Receiver => 1,
            StreamKind::Sender => 2,
            StreamKind::Backoff => 3,
        };
        (tag << 32) | u64::from(node)
    }
}

/// A ChaCha8 stream keyed by a scenario seed and a stream id.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream { seed, stream_id, rng }
    }

    pub fn for_node(seed: u64, kind: StreamKind, node: NodeId) -> Self {
        Self::new(seed, kind.stream_id(node))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer on `[0, upper]`.
    pub fn up_to(&mut self, upper: u32) -> u32 {
        self.rng.random_range(0..=upper)
    }
}
