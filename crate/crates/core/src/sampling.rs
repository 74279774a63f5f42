//! Deterministic low-discrepancy points in the unit ball.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// `count` points of the open unit ball in `R^dim`: a Halton sequence with a
/// seeded Cranley-Patterson shift, mapped to the cube and rejected outside
/// the ball.
pub fn ball_samples(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    assert!(dim <= PRIMES.len(), "ball sampling supports at most {} dimensions", PRIMES.len());
    if dim == 0 || count == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p = DVector::from_fn(dim, |a, _| {
            let u = (radical_inverse(i, PRIMES[a]) + shift[a]).fract();
            2.0 * u - 1.0
        });
        if p.norm() < 1.0 {
            out.push(p);
        }
        i += 1;
    }
    out
}
