//! Primality, classical modular inverse and Euclid traces.
//!
//! Everything here is deliberately independent of the reversible Euclid
//! machine so the two can check each other.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

const SMALL_PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &sp in &SMALL_PRIMES[..12] {
        if n == sp {
            return true;
        }
        if n % sp == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES[..12] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with the fixed witness set of the first 24 primes.
/// Exact below 2^64, probabilistic (but reproducible) above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    for &sp in SMALL_PRIMES.iter() {
        if (n % sp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for &a in SMALL_PRIMES.iter() {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniform sample among the primes in [2^(bits-1), 2^bits), by rejection.
pub fn random_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 2, "no primes with fewer than 2 bits");
    let lo = BigUint::one() << (bits - 1);
    let hi = BigUint::one() << bits;
    loop {
        let c = rng.gen_biguint_range(&lo, &hi);
        if is_prime(&c) {
            return c;
        }
    }
}

/// Classical extended Euclid inverse; `None` when gcd(x, m) != 1.
pub fn mod_inverse(x: &BigUint, m: &BigUint) -> Option<BigUint> {
    let m_int = BigInt::from(m.clone());
    let e = BigInt::from(x % m).extended_gcd(&m_int);
    if !e.gcd.is_one() {
        return None;
    }
    let r = e.x.mod_floor(&m_int);
    r.to_biguint()
}

/// Quotient sequence and gcd of the plain Euclidean algorithm on (a, b).
pub fn euclid_quotients(a: &BigUint, b: &BigUint) -> (BigUint, Vec<BigUint>) {
    let (mut x, mut y) = (a.clone(), b.clone());
    let mut qs = Vec::new();
    while !y.is_zero() {
        let (q, r) = x.div_rem(&y);
        qs.push(q);
        x = std::mem::replace(&mut y, r);
    }
    (x, qs)
}

/// Rows (a, A) of the extended Euclidean table for x^-1 mod p, starting at
/// (0, p), (1, x) and ending with the pair whose second entry is 0.
pub fn extended_euclid_rows(p: &BigUint, x: &BigUint) -> Vec<(BigInt, BigUint)> {
    let mut rows = vec![(BigInt::zero(), p.clone()), (BigInt::one(), x.clone())];
    loop {
        let n = rows.len();
        let (a0, r0) = rows[n - 2].clone();
        let (a1, r1) = rows[n - 1].clone();
        if r1.is_zero() {
            return rows;
        }
        let (q, r) = r0.div_rem(&r1);
        let qi = BigInt::from_biguint(Sign::Plus, q);
        rows.push((a0 - qi * a1, r));
    }
}

/// Number of bits needed to write `v` (0 for 0).
pub fn bitlen(v: &BigUint) -> u64 {
    v.bits()
}

/// floor(log2 v) for v >= 1.
pub fn floor_log2(v: &BigUint) -> u64 {
    debug_assert!(!v.is_zero());
    v.bits() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primality() {
        let brute = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), brute(n), "{n}");
        }
    }

    #[test]
    fn big_primality() {
        // 2^89 - 1 and 2^127 - 1 are Mersenne primes; 2^67 - 1 is not.
        let m = |e: u32| (BigUint::one() << e) - 1u32;
        assert!(is_prime(&m(89)));
        assert!(is_prime(&m(127)));
        assert!(!is_prime(&m(67)));
    }

    #[test]
    fn gcd_trace() {
        let (g, qs) = euclid_quotients(&BigUint::from(1085u32), &BigUint::from(378u32));
        assert_eq!(g, BigUint::from(7u32));
        let qs: Vec<u32> = qs.iter().map(|q| q.to_u32().unwrap()).collect();
        assert_eq!(qs, vec![2, 1, 6, 1, 2, 2]);
    }

    #[test]
    fn inverse_oracle() {
        let p = BigUint::from(257u32);
        assert_eq!(mod_inverse(&BigUint::from(96u32), &p), Some(BigUint::from(83u32)));
        assert_eq!(mod_inverse(&BigUint::from(2u32), &BigUint::from(4u32)), None);
    }
}
