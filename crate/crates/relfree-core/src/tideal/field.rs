//! Prime-field arithmetic for modular membership runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Arithmetic modulo a prime below 2^62.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modp {
    pub p: u64,
}

impl Modp {
    pub fn new(p: u64) -> Self {
        debug_assert!(p < 1 << 62);
        Modp { p }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        b %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    #[inline]
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        self.pow(a, self.p - 2)
    }

    /// Image of a signed integer.
    pub fn from_i64(&self, v: i64) -> u64 {
        let r = v.rem_euclid(self.p as i64) as u64;
        r
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let m = Modp::new(n);
    // deterministic witness set for the full u64 range
    'w: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = m.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = m.mul(x, x);
            if x == n - 1 {
                continue 'w;
            }
        }
        return false;
    }
    true
}

/// Seeded random primes with the given bit size (distinct).
pub fn random_primes(count: usize, seed: u64, bits: u32) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let lo = 1u64 << (bits - 1);
    let hi = 1u64 << bits;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c = rng.gen_range(lo..hi) | 1;
        if is_prime_u64(c) && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_and_field_ops() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(4033)); // 37 * 109
        assert!(!is_prime_u64((1 << 31) - 1 + 2));
        let ps = random_primes(3, 42, 60);
        assert_eq!(ps.len(), 3);
        for &p in &ps {
            assert!(is_prime_u64(p));
            assert!(p >= 1 << 59 && p < 1 << 60);
            let m = Modp::new(p);
            for a in [1u64, 2, 12345, p - 1] {
                assert_eq!(m.mul(a, m.inv(a)), 1);
            }
            assert_eq!(m.add(p - 1, 1), 0);
            assert_eq!(m.sub(0, 1), p - 1);
        }
        assert_eq!(random_primes(2, 7, 60), random_primes(2, 7, 60));
    }
}
