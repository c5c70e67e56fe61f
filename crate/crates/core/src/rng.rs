//! Reproducible random streams.
//!
//! A stream is identified by `(seed, stream)`. The generator is ChaCha20 keyed
//! by `seed` (via `SeedableRng::seed_from_u64`) with its 64-bit stream id set
//! to `stream`. The variate algorithms below are fixed and part of the
//! reproducibility contract:
//!
//! * uniform: the top 53 bits of one `next_u64`, giving a value in `[0, 1)`;
//! * standard normal: Marsaglia's polar method, both variates of an accepted
//!   pair are used (second one cached);
//! * gamma(shape `a`, scale 1): Marsaglia–Tsang squeeze for `a >= 1`; for
//!   `a < 1` a gamma(`a + 1`) draw times `U^{1/a}`;
//! * chi-square(`k`): `2 * gamma(k / 2)`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Derived stream for chunk `index`: same seed, stream id
    /// `splitmix64(splitmix64(stream) ^ index)`.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream: splitmix64(splitmix64(self.stream) ^ index),
        }
    }

    pub fn generator(&self) -> Generator {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        Generator { rng, spare_normal: None }
    }
}

/// Mutable sampling state for one [`RngStream`].
pub struct Generator {
    rng: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl Generator {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }

    /// Gamma with the given shape and unit scale.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0);
            let u = loop {
                let u = self.uniform();
                if u > 0.0 {
                    break u;
                }
            };
            return g * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u > 0.0 && u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    pub fn chi_square(&mut self, df: f64) -> f64 {
        2.0 * self.gamma(0.5 * df)
    }
}
