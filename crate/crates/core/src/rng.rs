//! Counter-based normal variates: Philox4x32-10 (Salmon et al., SC'11) followed by Box-Muller.
//!
//! A variate is addressed by `(seed, path, term)`. The seed is the 64-bit
//! key; `path` and `term` fill the 128-bit counter as little-endian 32-bit
//! words `[path_lo, path_hi, term_lo, term_hi]`. Output words 0–1 form the
//! radius uniform `u1 ∈ (0, 1]` and words 2–3 the angle uniform `u2 ∈ [0, 1)`,
//! each from the top 53 bits of a 64-bit word (`word = hi << 32 | lo`).
//! The variate is `√(−2 ln u1) · cos(2π u2)`.
//!
//! This mapping is frozen. Other implementations should match it in
//! distribution; bit equality is only promised within this crate.

const MUL0: u32 = 0xD251_1F53;
const MUL1: u32 = 0xCD9E_8D57;
const WEYL0: u32 = 0x9E37_79B9;
const WEYL1: u32 = 0xBB67_AE85;
const ROUNDS: usize = 10;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32-10 block.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut key = key;
    for round in 0..ROUNDS {
        if round > 0 {
            key[0] = key[0].wrapping_add(WEYL0);
            key[1] = key[1].wrapping_add(WEYL1);
        }
        let (hi0, lo0) = mulhilo(MUL0, ctr[0]);
        let (hi1, lo1) = mulhilo(MUL1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Standard normal variate at stream position `(path, term)` under `seed`.
pub fn standard_normal(seed: u64, path: u64, term: u64) -> f64 {
    let out = philox4x32(
        [path as u32, (path >> 32) as u32, term as u32, (term >> 32) as u32],
        [seed as u32, (seed >> 32) as u32],
    );
    let w1 = (out[1] as u64) << 32 | out[0] as u64;
    let w2 = (out[3] as u64) << 32 | out[2] as u64;
    let u1 = ((w1 >> 11) + 1) as f64 * TWO_POW_M53;
    let u2 = (w2 >> 11) as f64 * TWO_POW_M53;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
