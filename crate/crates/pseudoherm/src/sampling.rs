//! Deterministic quasi-random sampling (Halton sequence).

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in base `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// `count` Halton points in `[-radius, radius]^dim`, skipping the first
/// `seed + 1` entries so different seeds give disjoint runs.
pub fn halton_box(count: usize, dim: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "halton dimension too large");
    (0..count as u64)
        .map(|i| {
            let idx = i + seed + 1;
            (0..dim)
                .map(|d| radius * (2.0 * radical_inverse(idx, PRIMES[d]) - 1.0))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn halton_points_stay_in_box() {
        for p in halton_box(100, 5, 2.0, 0) {
            assert!(p.iter().all(|c| c.abs() <= 2.0));
        }
    }

    #[test]
    fn seeds_shift_sequence() {
        let a = halton_box(3, 2, 1.0, 0);
        let b = halton_box(3, 2, 1.0, 1);
        assert_eq!(a[1], b[0]);
    }
}
