//! Stable 64-bit seed derivation.

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `words` into `base`; the result depends on every word and its position.
pub fn hash_seed(base: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix(base), |h, &w| splitmix(h ^ splitmix(w)))
}

/// Seed of one cell: `(base, sweep coordinates, trial)`.
pub fn cell_seed(base: u64, coords: &[u64], trial: u64) -> u64 {
    let mut words = coords.to_vec();
    words.push(trial);
    hash_seed(base, &words)
}

/// Independent stream number `tag` of `seed`.
pub fn substream(seed: u64, tag: u64) -> u64 {
    hash_seed(seed, &[tag])
}

/// Float in `[0, 1)` derived from `seed`.
pub fn unit_float(seed: u64) -> f64 {
    (splitmix(seed) >> 11) as f64 / (1u64 << 53) as f64
}

/// Coordinate word for a float.
pub fn coord(x: f64) -> u64 {
    x.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_and_position_sensitive() {
        assert_eq!(cell_seed(1, &[2, 3], 4), cell_seed(1, &[2, 3], 4));
        assert_ne!(cell_seed(1, &[2, 3], 4), cell_seed(1, &[3, 2], 4));
        assert_ne!(cell_seed(1, &[2, 3], 4), cell_seed(2, &[2, 3], 4));
        assert_ne!(substream(9, 1), substream(9, 2));
        // pinned so that a change of the hash is noticed
        assert_eq!(hash_seed(0, &[]), 0xe220_a839_7b1d_cdaf);
    }

    #[test]
    fn unit_float_range() {
        for s in 0..1000 {
            let u = unit_float(s);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
