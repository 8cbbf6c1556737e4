//! Deterministic random numbers.
//!
//! The generator is xoshiro256++ seeded from a `u64` through SplitMix64
//! (the reference seeding procedure). On top of the raw 64-bit stream:
//!
//! * uniform: `(next_u64 >> 11) · 2^-53`, in `[0, 1)`;
//! * standard normals: Marsaglia's polar method. Draw `u = 2·uniform - 1`,
//!   then `v` the same way, `s = u·u + v·v`; retry unless `0 < s < 1`;
//!   return `u·f` then `v·f` with `f = sqrt(-2 ln(s) / s)`;
//! * subsets: partial Fisher–Yates over `0..n`, swapping position `i` with
//!   `i + floor(uniform · (n - i))`, first `m` positions sorted ascending.
//!
//! Apart from `ln`, every step is exact IEEE arithmetic, so other
//! implementations reproduce the streams bit for bit given a faithful `ln`.
//! (Box–Muller was avoided: compilers may merge its `cos`/`sin` into one
//! `sincos` call, which can round differently.)

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256PlusPlus,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                return (u * f, v * f);
            }
        }
    }

    /// `count` standard normals, drawn in pairs.
    pub fn normals(&mut self, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count + 1);
        while out.len() < count {
            let (a, b) = self.normal_pair();
            out.push(a);
            out.push(b);
        }
        out.truncate(count);
        out
    }
}

/// Uniformly samples `m` distinct indices from `0..n`, returned ascending.
pub fn sample_subset(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::Config(format!("cannot sample {m} of {n} indices")));
    }
    let mut rng = SeededRng::new(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let span = n - i;
        let j = i + ((rng.uniform() * span as f64) as usize).min(span - 1);
        idx.swap(i, j);
    }
    idx.truncate(m);
    idx.sort_unstable();
    Ok(idx)
}
