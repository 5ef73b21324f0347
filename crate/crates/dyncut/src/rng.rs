//! Counter-based hashing used wherever a random draw must be a pure
//! function of its coordinates (priorities, sampling decisions, seeds).

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a tuple of words into one uniform 64-bit value.
#[inline]
pub fn hash(words: &[u64]) -> u64 {
    let mut h = 0x2545_F491_4F6C_DD1D_u64;
    for &w in words {
        h = splitmix(h ^ splitmix(w));
    }
    h
}

/// Map a 64-bit value to [0, 1).
#[inline]
pub fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derive a child seed from a parent seed and a label.
pub fn derive(seed: u64, label: u64) -> u64 {
    hash(&[seed, label, 0x5EED])
}
