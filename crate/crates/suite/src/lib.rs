//! Seeded sampling and reporting shared by the acceptance checks.

use std::fmt::Write as _;
use std::io::Write as _;

use cobweb_core::protocol::derive_seed;
use cobweb_core::{UnknownQubit, ZsaAmplitudes};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of random inputs per randomized criterion.
pub const SAMPLES: u64 = 1000;

/// The `index`-th random `(q, z)` pair with `n` parties under `master`.
pub fn sample(master: u64, index: u64, n: usize) -> (UnknownQubit, ZsaAmplitudes) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, index));
    let z = ZsaAmplitudes::random(&mut rng, n).expect("n >= 2");
    (UnknownQubit::random(&mut rng), z)
}

pub fn samples(master: u64, n: usize) -> impl Iterator<Item = (UnknownQubit, ZsaAmplitudes)> {
    (0..SAMPLES).map(move |i| sample(master, i, n))
}

/// Collects the sub-checks of one criterion and prints a single verdict line.
pub struct Verdict {
    id: u8,
    title: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Verdict {
    pub fn new(id: u8, title: &'static str) -> Self {
        Self { id, title, failures: Vec::new(), notes: Vec::new() }
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    pub fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    /// Print the verdict (bypassing test output capture) and panic on failure.
    pub fn finish(self) {
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("acceptance {:02} {status} {}", self.id, self.title);
        for n in &self.notes {
            let _ = write!(line, " | {n}");
        }
        for f in &self.failures {
            let _ = write!(line, " | failed: {f}");
        }
        let _ = writeln!(std::io::stdout(), "{line}");
        assert!(self.failures.is_empty(), "{line}");
    }
}
