use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::machine::{default_cap, default_margin, expected_big, expected_small};
use crate::numtheory::random_prime;
use crate::rng::stream;

/// t(p, x) = r + 4 sum floor(log2 q_i) from the classical quotients.
pub fn cycle_count(p: &BigUint, x: &BigUint) -> u64 {
    let (mut a, mut b) = (p.clone(), x.clone());
    let mut t = 0;
    while !b.is_zero() {
        let (q, r) = a.div_rem(&b);
        t += 1 + 4 * (q.bits() - 1);
        a = std::mem::replace(&mut b, r);
    }
    t
}

pub fn cycle_count_u64(mut a: u64, mut b: u64) -> u64 {
    let mut t = 0;
    while b != 0 {
        let q = a / b;
        t += 1 + 4 * (63 - q.leading_zeros() as u64);
        (a, b) = (b, a - q * b);
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub p_max: u64,
    pub pairs_checked: u64,
    pub prime_pairs_checked: u64,
    pub violations: Vec<(u64, u64, u64)>,
    pub max_ratio: f64,
    pub argmax: (u64, u64),
    pub argmax_cycles: u64,
}

/// 2t <= 9 log2 p, i.e. 4^t <= p^9, decided exactly.
pub fn within_bound(p: u64, t: u64) -> bool {
    let lhs = BigUint::one() << (2 * t);
    let rhs = BigUint::from(p).pow(9);
    lhs <= rhs
}

/// Checks t(p, x) <= 4.5 log2 p for every 2 < p <= p_max and coprime
/// 1 <= x < p (composite p included).
pub fn verify_bound(p_max: u64) -> BoundReport {
    let mut rep = BoundReport {
        p_max,
        pairs_checked: 0,
        prime_pairs_checked: 0,
        violations: Vec::new(),
        max_ratio: 0.0,
        argmax: (0, 0),
        argmax_cycles: 0,
    };
    for p in 3..=p_max {
        let lg = (p as f64).log2();
        let prime = crate::numtheory::is_prime_u64(p);
        let limit = 4.5 * lg;
        for x in 1..p {
            if !prime && x.gcd(&p) != 1 {
                continue;
            }
            let t = cycle_count_u64(p, x);
            rep.pairs_checked += 1;
            rep.prime_pairs_checked += prime as u64;
            if t as f64 >= limit - 1e-9 && !within_bound(p, t) {
                rep.violations.push((p, x, t));
            }
            let ratio = t as f64 / lg;
            if ratio > rep.max_ratio {
                rep.max_ratio = ratio;
                rep.argmax = (p, x);
                rep.argmax_cycles = t;
            }
        }
    }
    rep
}

/// Calls `visit(r, sizes)` with the bit lengths of |a|, A, |b|, B at the end
/// of every cycle r = 0..=t(p, x), following the machine's schedule: an
/// iteration with z quotient bits spans 4z - 3 cycles; its k-th remainder
/// step lands in cycle z - 1 + k and its k-th coefficient step in cycle
/// 2z - 2 + k (1-based within the iteration), the SWAP in the last one.
pub fn size_trajectory<F: FnMut(u64, [u64; 4])>(p: &BigUint, x: &BigUint, mut visit: F) {
    let mut a = num_bigint::BigInt::zero();
    let mut big_a = p.clone();
    let mut b = num_bigint::BigInt::one();
    let mut big_b = x.clone();
    let mut r = 0u64;
    visit(0, [0, big_a.bits(), 1, big_b.bits()]);
    while !big_b.is_zero() {
        let q = &big_a / &big_b;
        let z = q.bits();
        let qi = num_bigint::BigInt::from(q.clone());
        let (sa0, sb, sbb) = (a.magnitude().bits(), b.magnitude().bits(), big_b.bits());
        let mut s_big_a = big_a.bits();
        let mut s_a = sa0;
        let mut k2 = 0;
        let mut k3 = 0;
        for u in 0..(4 * z - 3) {
            let want2 = (u + 2).saturating_sub(z).min(z);
            if want2 != k2 {
                k2 = want2;
                let high = (&q >> (z - k2)) << (z - k2);
                s_big_a = (&big_a - high * &big_b).bits();
            }
            let want3 = (u + 3).saturating_sub(2 * z).min(z);
            if want3 != k3 {
                k3 = want3;
                let low = num_bigint::BigInt::from(&q & ((BigUint::one() << k3) - 1u32));
                s_a = (&a - low * &b).magnitude().bits();
            }
            r += 1;
            if u == 4 * z - 4 {
                visit(r, [sb, sbb, s_a, s_big_a]);
            } else {
                visit(r, [s_a, s_big_a, sb, sbb]);
            }
        }
        let f = &a - qi * &b;
        let rem = &big_a % &big_b;
        a = std::mem::replace(&mut b, f);
        big_a = std::mem::replace(&mut big_b, rem);
    }
}

/// Largest excess of any of |a|, A, |b|, B over its expected size, over all
/// cycles until termination.
pub fn perturbation(p: &BigUint, x: &BigUint) -> u64 {
    let n = p.bits();
    let mut best: i64 = i64::MIN;
    size_trajectory(p, x, |r, s| {
        let es = expected_small(n, r) as i64;
        let eb = expected_big(n, r) as i64;
        let d = (s[0] as i64 - es).max(s[2] as i64 - es).max(s[1] as i64 - eb).max(s[3] as i64 - eb);
        best = best.max(d);
    });
    best.max(0) as u64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl SampleStats {
    pub fn of(xs: &[f64]) -> SampleStats {
        let count = xs.len() as u64;
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
        } else {
            0.0
        };
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        SampleStats { count, mean, std_dev: var.sqrt(), min, max }
    }
}

/// Endless stream of random (p, x): primes uniform in [2^(n-1), 2^n) with
/// p > 2, each followed by `per_prime` values of x uniform in (1, p).
/// Prime j and its x values come from rng stream j.
pub struct InstanceStream {
    n: u64,
    seed: u64,
    per_prime: u64,
    j: u64,
    left: u64,
    p: BigUint,
    rng: crate::rng::Rng,
}

impl InstanceStream {
    pub fn new(n: u64, seed: u64, per_prime: u64) -> Self {
        assert!(n >= 2 && per_prime >= 1);
        InstanceStream { n, seed, per_prime, j: 0, left: 0, p: BigUint::zero(), rng: stream(seed, 0) }
    }

    /// ceil(sqrt(trials)) x values per prime.
    pub fn for_trials(n: u64, seed: u64, trials: u64) -> Self {
        Self::new(n, seed, ((trials as f64).sqrt().ceil() as u64).max(1))
    }
}

impl Iterator for InstanceStream {
    type Item = (BigUint, BigUint);

    fn next(&mut self) -> Option<Self::Item> {
        if self.left == 0 {
            self.rng = stream(self.seed, self.j);
            self.j += 1;
            self.p = loop {
                let p = random_prime(self.n, &mut self.rng);
                if p > BigUint::from(2u32) {
                    break p;
                }
            };
            self.left = self.per_prime;
        }
        self.left -= 1;
        let x = self.rng.gen_biguint_range(&BigUint::from(2u32), &self.p);
        Some((self.p.clone(), x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationStats {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub max: u64,
    pub margin: u64,
    /// Trials whose perturbation exceeds the sharing margin.
    pub over_margin: u64,
}

pub fn perturbation_stats(n: u64, trials: u64, seed: u64) -> PerturbationStats {
    let xs: Vec<f64> = InstanceStream::for_trials(n, seed, trials)
        .take(trials as usize)
        .map(|(p, x)| perturbation(&p, &x) as f64)
        .collect();
    let s = SampleStats::of(&xs);
    let margin = default_margin(n);
    PerturbationStats {
        n,
        trials,
        seed,
        mean: s.mean,
        std_dev: s.std_dev,
        max: s.max as u64,
        margin,
        over_margin: xs.iter().filter(|&&v| v > margin as f64).count() as u64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub q0: u64,
    pub empirical: f64,
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuotientLaw {
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub tail: Vec<TailRow>,
    pub cap_bits: u64,
    pub over_cap: u64,
    pub over_cap_rate: f64,
    pub predicted_rate: f64,
}

/// Tail law of Euclid quotients over random (p, x), compared with
/// log2(1 + 1/q0), and incidence of quotients wider than the cap.
pub fn quotient_distribution(n: u64, samples: u64, seed: u64) -> QuotientLaw {
    const Q0_MAX: u64 = 64;
    let mut ge = vec![0u64; Q0_MAX as usize + 1];
    let cap_bits = default_cap(n);
    let mut over_cap = 0;
    let mut seen = 0u64;
    'outer: for (p, x) in InstanceStream::new(n, seed, 1000) {
        let (mut a, mut b) = (p, x);
        while !b.is_zero() {
            let (q, r) = a.div_rem(&b);
            let qs = q.to_u64().unwrap_or(u64::MAX);
            for q0 in 1..=Q0_MAX.min(qs) {
                ge[q0 as usize] += 1;
            }
            if q.bits() > cap_bits {
                over_cap += 1;
            }
            seen += 1;
            if seen == samples {
                break 'outer;
            }
            a = std::mem::replace(&mut b, r);
        }
    }
    let tail = (1..=Q0_MAX)
        .map(|q0| TailRow {
            q0,
            empirical: ge[q0 as usize] as f64 / samples as f64,
            predicted: (1.0 + 1.0 / q0 as f64).log2(),
        })
        .collect();
    let cap = 2f64.powi(cap_bits as i32);
    QuotientLaw {
        n,
        samples,
        seed,
        tail,
        cap_bits,
        over_cap,
        over_cap_rate: over_cap as f64 / samples as f64,
        predicted_rate: (1.0 + 1.0 / cap).log2(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleStats {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub max: u64,
    pub estimate_3_5n: f64,
    pub quotient_law_prediction: f64,
}

/// sum_q ln((q+1)^2 / ((q+1)^2 - 1)) (4 floor(log2 q) + 1), with an
/// integral estimate for the tail beyond 2^20.
pub fn quotient_law_constant() -> f64 {
    let top = 1u64 << 20;
    let mut s = 0.0;
    for q in 1..=top {
        let k = (q + 1) as f64;
        s += (k * k / (k * k - 1.0)).ln() * (4.0 * (63 - q.leading_zeros()) as f64 + 1.0);
    }
    let t = top as f64;
    s + (4.0 * t.log2() + 1.0 + 4.0 / std::f64::consts::LN_2) / t
}

/// Mean cycles predicted from the quotient frequencies L_q(p), for a mean
/// ln p taken over the sampled primes.
pub fn quotient_law_mean_cycles(mean_ln_p: f64) -> f64 {
    12.0 / std::f64::consts::PI.powi(2) * mean_ln_p * quotient_law_constant()
}

pub fn average_cycles(n: u64, trials: u64, seed: u64) -> CycleStats {
    let mut ts = Vec::with_capacity(trials as usize);
    let mut ln_sum = 0.0;
    for (p, x) in InstanceStream::for_trials(n, seed, trials).take(trials as usize) {
        ts.push(cycle_count(&p, &x) as f64);
        ln_sum += ln_big(&p);
    }
    let s = SampleStats::of(&ts);
    CycleStats {
        n,
        trials,
        seed,
        mean: s.mean,
        std_dev: s.std_dev,
        max: s.max as u64,
        estimate_3_5n: 3.5 * n as f64,
        quotient_law_prediction: quotient_law_mean_cycles(ln_sum / trials as f64),
    }
}

fn ln_big(p: &BigUint) -> f64 {
    let shift = p.bits().saturating_sub(60);
    (p >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact mean of t(p, x) under the sampling law (p uniform among the primes
/// in [2^(n-1), 2^n) with p > 2, x uniform in (1, p)), by enumeration.
pub fn exact_average_cycles(n: u64) -> Option<f64> {
    assert!((2..=20).contains(&n), "exhaustive average limited to n <= 20");
    let mut per_prime = Vec::new();
    for p in (1u64 << (n - 1))..(1u64 << n) {
        if p < 3 || !crate::numtheory::is_prime_u64(p) {
            continue;
        }
        let xs: Vec<u64> = if p == 3 { vec![2] } else { (2..p).collect() };
        let sum: u64 = xs.iter().map(|&x| cycle_count_u64(p, x)).sum();
        per_prime.push(sum as f64 / xs.len() as f64);
    }
    if per_prime.is_empty() {
        return None;
    }
    Some(per_prime.iter().sum::<f64>() / per_prime.len() as f64)
}
