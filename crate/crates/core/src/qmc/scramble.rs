/// Smallest value produced for a coordinate.
pub const UNIT_LOW: f64 = 5.421_010_862_427_522e-20; // 2^-64
/// Largest value produced for a coordinate.
pub const UNIT_HIGH: f64 = 1.0 - f64::EPSILON / 2.0; // 1 - 2^-53

/// Keeps a uniform coordinate strictly inside the unit interval.
#[inline]
pub fn clamp_unit(u: f64) -> f64 {
    u.clamp(UNIT_LOW, UNIT_HIGH)
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn combine(a: u64, b: u64) -> u64 {
    mix64(a ^ mix64(b.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Owen nested uniform scrambling of base-2 digits.
///
/// Each node of the binary digit tree carries an independent random bit
/// (flip or keep), obtained by hashing the key
/// `(seed, replicate, dimension, digit prefix)`. No tree is stored.
/// The first 32 digits are scrambled; digits 33 to 53 are filled with random
/// bits that depend on the full 32-digit prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScrambleState {
    key: Option<u64>,
}

impl ScrambleState {
    pub fn new(seed: u64, replicate: u64) -> Self {
        Self {
            key: Some(combine(mix64(seed), replicate)),
        }
    }

    /// All permutations are the identity; coordinates pass through unchanged
    /// apart from clamping.
    pub fn identity() -> Self {
        Self { key: None }
    }

    /// Scrambles the integer digits `x` of coordinate `dim` and returns the
    /// resulting real in `[2^-64, 1 - 2^-53]`.
    #[inline]
    pub fn apply(&self, dim: usize, x: u32) -> f64 {
        let Some(key) = self.key else {
            return clamp_unit(x as f64 / 4_294_967_296.0);
        };
        let dim_key = combine(key, dim as u64);
        let marked = (x as u64) | (1 << 32);
        let mut flips = 0u32;
        for k in 0..32 {
            // Marker bit followed by the k leading digits of x.
            let node = marked >> (32 - k);
            flips |= ((mix64(dim_key ^ node.wrapping_mul(0xd6e8_feb8_6659_fd93)) >> 63) as u32) << (31 - k);
        }
        let y = x ^ flips;
        let tail = combine(dim_key, marked << 1 | 1) >> 43;
        clamp_unit(((y as u64) << 21 | tail) as f64 / 9_007_199_254_740_992.0)
    }

    /// Scrambles a whole point.
    pub fn apply_point(&self, x: &[u32], out: &mut [f64]) {
        for (j, (&b, o)) in x.iter().zip(out.iter_mut()).enumerate() {
            *o = self.apply(j, b);
        }
    }
}

/// Scrambles every point of `net`.
pub fn scramble(net: &super::DigitalNet, state: &ScrambleState) -> Vec<Vec<f64>> {
    let mut bits = vec![0u32; net.dimension()];
    (0..net.len())
        .map(|i| {
            net.point_bits(i, &mut bits);
            let mut p = vec![0.0; net.dimension()];
            state.apply_point(&bits, &mut p);
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmc::DigitalNet;

    #[test]
    fn identity_passes_through() {
        let s = ScrambleState::identity();
        assert_eq!(s.apply(0, 1 << 31), 0.5);
        assert_eq!(s.apply(3, 3 << 30), 0.75);
        assert_eq!(s.apply(0, 0), UNIT_LOW);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = ScrambleState::new(42, 3);
        let b = ScrambleState::new(42, 3);
        let c = ScrambleState::new(42, 4);
        assert_eq!(a.apply(5, 123_456), b.apply(5, 123_456));
        assert_ne!(a.apply(5, 123_456), c.apply(5, 123_456));
    }

    #[test]
    fn depth_one_keeps_one_point_per_half() {
        for seed in 0..200 {
            let s = ScrambleState::new(seed, 0);
            let a = s.apply(0, 0);
            let b = s.apply(0, 1 << 31);
            assert!((a < 0.5) != (b < 0.5));
        }
    }

    #[test]
    fn preserves_dyadic_stratification() {
        let m = 10;
        let net = DigitalNet::new(4, m).unwrap();
        for seed in 0..5 {
            let pts = scramble(&net, &ScrambleState::new(seed, 1));
            for j in 0..4 {
                let mut seen = vec![false; 1 << m];
                for p in &pts {
                    let cell = (p[j] * (1 << m) as f64) as usize;
                    assert!(!seen[cell]);
                    seen[cell] = true;
                }
            }
        }
    }

    #[test]
    fn origin_mean_over_seeds() {
        let n = 10_000;
        let mean = (0..n).map(|s| ScrambleState::new(s, 0).apply(0, 0)).sum::<f64>() / n as f64;
        let sigma = (1.0f64 / 12.0).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma / 100.0);
    }
}
