//! Stateless integer hashing for deterministic noise fields.

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub(crate) fn mix(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x51_7C_C1_B7_27_22_0A_95, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Uniform value in `[-1, 1)` derived from `key`.
pub(crate) fn signed_unit(key: u64) -> f64 {
    let bits = splitmix64(key) >> 11;
    (bits as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}
