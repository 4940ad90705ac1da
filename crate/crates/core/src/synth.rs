//! Deterministic synthetic light fields for tests and demos.
//!
//! A view grid is generated by sampling a fixed texture T at
//! U_{s,t}(x, y) = T(x + s·d, y + t·d), which satisfies the two-plane
//! light field model with a constant disparity of d pixels between
//! adjacent views along both angular axes.

use crate::lightfield::LightField;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn hash_cell(a: i64, b: i64, seed: u64) -> u64 {
    mix(mix(seed ^ (a as u64)) ^ (b as u64))
}

/// Pseudo-random texture value in {0, 1}; deterministic in (a, b, seed).
pub fn binary_texture(a: i64, b: i64, seed: u64) -> f64 {
    if hash_cell(a, b, seed) >> 63 == 1 {
        1.0
    } else {
        0.0
    }
}

/// Pseudo-random texture value uniform in [0, 1); deterministic in (a, b, seed).
pub fn uniform_texture(a: i64, b: i64, seed: u64) -> f64 {
    (hash_cell(a, b, seed) >> 11) as f64 / (1u64 << 53) as f64
}

/// Light field of M×M views sampled from a texture with constant integer
/// disparity d between adjacent views along both angular axes.
pub fn shifted_field(
    m: usize,
    n_r: usize,
    n_c: usize,
    d: i64,
    texture: impl Fn(i64, i64) -> f64,
) -> LightField {
    LightField::from_fn(m, n_r, n_c, |s0, t0, x0, y0| {
        let s = (s0 + 1) as i64;
        let t = (t0 + 1) as i64;
        texture(x0 as i64 + s * d, y0 as i64 + t * d)
    })
}

/// Shifted field over the binary hash texture: maximal contrast, so patch
/// similarities are essentially 0 or 1 and integer shifts are unambiguous.
pub fn binary_shifted_field(m: usize, n_r: usize, n_c: usize, d: i64, seed: u64) -> LightField {
    shifted_field(m, n_r, n_c, d, |a, b| binary_texture(a, b, seed))
}
