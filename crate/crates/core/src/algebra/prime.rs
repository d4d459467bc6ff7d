use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{PrimeField, PRIME_LOWER, PRIME_UPPER};
use crate::error::{Error, Result};

fn pow_mod(mut b: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1u64;
    b %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % n as u128) as u64;
        }
        b = (b as u128 * b as u128 % n as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all `n < 2^32` (witnesses 2, 7, 61).
pub fn is_prime(n: u64) -> bool {
    assert!(n < 1 << 32, "witness set only certifies n < 2^32");
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 61] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 7, 61] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniformly sampled prime in `[max(lower_bound, 2^20), 2^31)`, a pure
/// function of `seed`.
pub fn random_prime(seed: u64, lower_bound: u64) -> Result<PrimeField> {
    let lo = lower_bound.max(PRIME_LOWER);
    if lo >= PRIME_UPPER {
        return Err(Error::InvalidConfig(format!(
            "prime lower bound {lower_bound} leaves an empty range below 2^31"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let candidate = rng.gen_range(lo..PRIME_UPPER);
        if is_prime(candidate) {
            return PrimeField::new(candidate);
        }
    }
}
