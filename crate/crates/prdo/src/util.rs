//! Small shared helpers: seed derivation and float comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the splitmix64 generator, used as a bijective 64-bit mixer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed so that nested builders never share streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag))
}

/// `a <= b` up to a relative tolerance of 1e-9.
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * b.abs().max(a.abs()).max(1e-300)
}

pub fn approx_eq(a: f64, b: f64) -> bool {
    le_tol(a, b) && le_tol(b, a)
}

/// Integer ceiling of a non-negative float, saturating at `u64::MAX`.
pub fn ceil_u64(x: f64) -> u64 {
    if !(x > 0.0) {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.ceil() as u64
    }
}

/// `base^exp` in saturating u64 arithmetic.
pub fn sat_pow(base: u64, exp: u32) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
