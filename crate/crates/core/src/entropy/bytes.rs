//! Byte suppliers behind the quantum-side entropy source: a remote client,
//! a replay file, a seeded simulator, and in-memory stand-ins for tests.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use rand_core::RngCore;

use super::EntropyError;

/// Supplies raw bytes for quantum-origin draws. Implementations are owned
/// by exactly one worker; none of them is required to be `Sync`.
pub trait ByteStream: Send {
    fn fill(&mut self, buf: &mut [u8]) -> Result<(), EntropyError>;
}

/// Replays a recorded byte file, consumed strictly in order.
pub struct ReplayFile {
    reader: BufReader<File>,
}

impl ReplayFile {
    pub fn open(path: &Path) -> Result<ReplayFile, EntropyError> {
        Ok(ReplayFile { reader: BufReader::new(File::open(path)?) })
    }
}

impl ByteStream for ReplayFile {
    fn fill(&mut self, buf: &mut [u8]) -> Result<(), EntropyError> {
        self.reader.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                EntropyError::Exhausted
            } else {
                EntropyError::Io(e)
            }
        })
    }
}

/// Fixed byte sequence; exhausts like a replay file.
pub struct InMemoryBytes {
    data: Vec<u8>,
    pos: usize,
}

impl InMemoryBytes {
    pub fn new(data: Vec<u8>) -> InMemoryBytes {
        InMemoryBytes { data, pos: 0 }
    }
}

impl ByteStream for InMemoryBytes {
    fn fill(&mut self, buf: &mut [u8]) -> Result<(), EntropyError> {
        if self.pos + buf.len() > self.data.len() {
            return Err(EntropyError::Exhausted);
        }
        buf.copy_from_slice(&self.data[self.pos..self.pos + buf.len()]);
        self.pos += buf.len();
        Ok(())
    }
}

/// Deterministic stand-in for a remote quantum service: a seeded stream
/// cipher keystream. Tagged quantum downstream, so offline runs exercise
/// the full mixing path.
pub struct SimulatedQuantumBytes {
    rng: rand_chacha::ChaCha12Rng,
}

impl SimulatedQuantumBytes {
    pub fn from_seed(seed: u64) -> SimulatedQuantumBytes {
        use rand_core::SeedableRng;
        SimulatedQuantumBytes { rng: rand_chacha::ChaCha12Rng::seed_from_u64(seed) }
    }
}

impl ByteStream for SimulatedQuantumBytes {
    fn fill(&mut self, buf: &mut [u8]) -> Result<(), EntropyError> {
        self.rng.fill_bytes(buf);
        Ok(())
    }
}

/// Errors on every request. Stands in for the quantum side when a mix
/// ratio of zero must never touch it, and for outage testing.
pub struct UnavailableBytes;

impl ByteStream for UnavailableBytes {
    fn fill(&mut self, _buf: &mut [u8]) -> Result<(), EntropyError> {
        Err(EntropyError::Unavailable("no quantum byte source configured"))
    }
}
