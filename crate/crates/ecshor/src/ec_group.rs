//! Elliptic-curve group law over GF(p), used as the classical oracle and as
//! the toy-instance generator.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numtheory::{is_prime, is_prime_u64, mod_inverse};
use crate::rng::stream;

/// Cap on brute-force order computation.
pub const ORDER_CAP: u64 = 1 << 24;
/// Below this modulus the group order is counted point by point.
pub const EXHAUSTIVE_COUNT_LIMIT: u64 = 1 << 14;
/// Curves tried by the instance searches before giving up.
pub const SEARCH_BUDGET: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EcError {
    #[error("modulus must be a prime greater than 3")]
    BadModulus,
    #[error("singular curve: 4a^3 + 27b^2 = 0 mod p")]
    Singular,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("order exceeds the iteration cap of {0}")]
    SizeLimit(u64),
    #[error("instance search exhausted after {0} curves")]
    SearchExhausted(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(BigUint, BigUint),
}

impl Point {
    pub fn affine(x: u64, y: u64) -> Point {
        Point::Affine(BigUint::from(x), BigUint::from(y))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

/// Why the generic slope formula does not apply to a pair of points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExceptionalCase {
    Identity,
    Doubling,
    InversePair,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveParams {
    p: BigUint,
    a: BigUint,
    b: BigUint,
}

impl CurveParams {
    pub fn new(p: BigUint, a: BigUint, b: BigUint) -> Result<Self, EcError> {
        if p <= BigUint::from(3u32) || !is_prime(&p) {
            return Err(EcError::BadModulus);
        }
        let a = a % &p;
        let b = b % &p;
        let disc = (BigUint::from(4u32) * &a * &a * &a + BigUint::from(27u32) * &b * &b) % &p;
        if disc.is_zero() {
            return Err(EcError::Singular);
        }
        Ok(CurveParams { p, a, b })
    }

    pub fn small(p: u64, a: u64, b: u64) -> Result<Self, EcError> {
        Self::new(p.into(), a.into(), b.into())
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }
    pub fn a(&self) -> &BigUint {
        &self.a
    }
    pub fn b(&self) -> &BigUint {
        &self.b
    }

    fn add(&self, x: &BigUint, y: &BigUint) -> BigUint {
        (x + y) % &self.p
    }
    fn sub(&self, x: &BigUint, y: &BigUint) -> BigUint {
        ((x + &self.p) - (y % &self.p)) % &self.p
    }
    fn mul(&self, x: &BigUint, y: &BigUint) -> BigUint {
        (x * y) % &self.p
    }
    fn inv(&self, x: &BigUint) -> BigUint {
        mod_inverse(x, &self.p).expect("nonzero field element")
    }
    pub fn neg(&self, y: &BigUint) -> BigUint {
        self.sub(&BigUint::zero(), y)
    }

    /// Right-hand side x^3 + ax + b.
    pub fn rhs(&self, x: &BigUint) -> BigUint {
        let x2 = self.mul(x, x);
        self.add(&self.add(&self.mul(&x2, x), &self.mul(&self.a, x)), &self.b)
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine(x, y) => x < &self.p && y < &self.p && self.mul(y, y) == self.rhs(x),
        }
    }

    pub fn negate(&self, pt: &Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x.clone(), self.neg(y)),
        }
    }

    fn from_slope(&self, lambda: &BigUint, x1: &BigUint, y1: &BigUint, x2: &BigUint) -> Point {
        let x3 = self.sub(&self.sub(&self.mul(lambda, lambda), x1), x2);
        let y3 = self.sub(&self.mul(lambda, &self.sub(x1, &x3)), y1);
        Point::Affine(x3, y3)
    }

    /// Full group law.
    pub fn point_add(&self, p1: &Point, p2: &Point) -> Point {
        match (p1, p2) {
            (Point::Infinity, _) => p2.clone(),
            (_, Point::Infinity) => p1.clone(),
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => {
                if x1 == x2 {
                    if self.add(y1, y2).is_zero() {
                        return Point::Infinity;
                    }
                    let num = self.add(&self.mul(&BigUint::from(3u32), &self.mul(x1, x1)), &self.a);
                    let den = self.inv(&self.mul(&BigUint::from(2u32), y1));
                    self.from_slope(&self.mul(&num, &den), x1, y1, x2)
                } else {
                    let lambda = self.mul(&self.sub(y2, y1), &self.inv(&self.sub(x2, x1)));
                    self.from_slope(&lambda, x1, y1, x2)
                }
            }
        }
    }

    /// Addition restricted to the generic chord case.
    pub fn point_add_generic(&self, p1: &Point, p2: &Point) -> Result<Point, ExceptionalCase> {
        match (p1, p2) {
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => {
                if x1 == x2 {
                    if y1 == y2 {
                        Err(ExceptionalCase::Doubling)
                    } else {
                        Err(ExceptionalCase::InversePair)
                    }
                } else {
                    let lambda = self.mul(&self.sub(y2, y1), &self.inv(&self.sub(x2, x1)));
                    Ok(self.from_slope(&lambda, x1, y1, x2))
                }
            }
            _ => Err(ExceptionalCase::Identity),
        }
    }

    /// Double-and-add over the doublings P_i = 2^i P.
    pub fn scalar_mul(&self, k: &BigUint, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        let mut pi = pt.clone();
        for i in 0..k.bits() {
            if k.bit(i) {
                acc = self.point_add(&acc, &pi);
            }
            pi = self.point_add(&pi, &pi);
        }
        acc
    }

    pub fn point_order(&self, pt: &Point) -> Result<u64, EcError> {
        let mut acc = pt.clone();
        let mut r = 1u64;
        while !acc.is_infinity() {
            if r >= ORDER_CAP {
                return Err(EcError::SizeLimit(ORDER_CAP));
            }
            acc = self.point_add(&acc, pt);
            r += 1;
        }
        Ok(r)
    }

    /// All points, Infinity first, then affine points by (x, y).
    pub fn enumerate_points(&self) -> Vec<Point> {
        let p = self.p.to_u64().expect("enumeration needs a small modulus");
        let mut sqrt_of: Vec<Vec<u64>> = vec![Vec::new(); p as usize];
        for y in 0..p {
            sqrt_of[((y * y) % p) as usize].push(y);
        }
        let mut pts = vec![Point::Infinity];
        for x in 0..p {
            let r = self.rhs(&BigUint::from(x)).to_u64().unwrap();
            for &y in &sqrt_of[r as usize] {
                pts.push(Point::affine(x, y));
            }
        }
        pts
    }

    /// #E by Legendre symbols (small p) or by locating the unique multiple of
    /// a random point's order inside the Hasse interval.
    pub fn group_order<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u64> {
        let p = self.p.to_u64()?;
        if p < EXHAUSTIVE_COUNT_LIMIT {
            let mut count = p + 1;
            let mut is_square = vec![false; p as usize];
            for y in 1..p {
                is_square[((y * y) % p) as usize] = true;
            }
            for x in 0..p {
                let r = self.rhs(&BigUint::from(x)).to_u64().unwrap();
                if r == 0 {
                    continue;
                } else if is_square[r as usize] {
                    count += 1;
                } else {
                    count -= 1;
                }
            }
            return Some(count);
        }
        let s = (4 * p).sqrt();
        let lo = p + 1 - s;
        let hi = p + 1 + s;
        for _ in 0..8 {
            let r = self.random_point(rng);
            let mut acc = self.scalar_mul(&BigUint::from(lo), &r);
            let mut hits = Vec::new();
            for m in lo..=hi {
                if acc.is_infinity() {
                    hits.push(m);
                }
                acc = self.point_add(&acc, &r);
            }
            if hits.len() == 1 {
                return Some(hits[0]);
            }
        }
        None
    }

    /// Uniform-ish affine point (uniform x among those with a square rhs).
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let x = rng.gen_biguint_below(&self.p);
            if let Some(y) = self.sqrt(&self.rhs(&x)) {
                let y = if rng.gen::<bool>() { self.neg(&y) } else { y };
                return Point::Affine(x, y);
            }
        }
    }

    /// Square root mod p by Tonelli-Shanks.
    pub fn sqrt(&self, v: &BigUint) -> Option<BigUint> {
        let p = &self.p;
        let v = v % p;
        if v.is_zero() {
            return Some(v);
        }
        let one = BigUint::one();
        let pm1 = p - &one;
        if v.modpow(&(&pm1 >> 1), p) != one {
            return None;
        }
        let s = pm1.trailing_zeros().unwrap();
        let q = &pm1 >> s;
        let mut z = BigUint::from(2u32);
        while z.modpow(&(&pm1 >> 1), p) == one {
            z += 1u32;
        }
        let mut m = s;
        let mut c = z.modpow(&q, p);
        let mut t = v.modpow(&q, p);
        let mut r = v.modpow(&((&q + &one) >> 1), p);
        while t != one {
            let mut i = 0;
            let mut t2 = t.clone();
            while t2 != one {
                t2 = (&t2 * &t2) % p;
                i += 1;
            }
            let b = c.modpow(&(BigUint::one() << (m - i - 1)), p);
            m = i;
            c = (&b * &b) % p;
            t = (&t * &c) % p;
            r = (&r * &b) % p;
        }
        Some(r)
    }
}

/// A discrete-logarithm instance Q = dP with P of prime order q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DlpInstance {
    pub curve: CurveParams,
    pub base: Point,
    pub q: u64,
    pub d: u64,
    pub target: Point,
    /// #E, kept for reporting.
    pub group_order: u64,
}

impl DlpInstance {
    /// Builds and validates an instance; Q is always recomputed from d.
    pub fn new(curve: CurveParams, base: Point, q: u64, d: u64) -> Result<Self, EcError> {
        if !curve.contains(&base) || base.is_infinity() {
            return Err(EcError::NotOnCurve);
        }
        if !is_prime_u64(q) {
            return Err(EcError::InvalidInstance("q is not prime".into()));
        }
        if !curve.scalar_mul(&BigUint::from(q), &base).is_infinity() {
            return Err(EcError::InvalidInstance("qP != O".into()));
        }
        if d >= q {
            return Err(EcError::InvalidInstance("d out of range".into()));
        }
        let target = curve.scalar_mul(&BigUint::from(d), &base);
        let group_order = curve
            .group_order(&mut stream(0, 0))
            .ok_or_else(|| EcError::InvalidInstance("group order unavailable".into()))?;
        check_hasse(curve.p(), group_order)?;
        Ok(DlpInstance { curve, base, q, d, target, group_order })
    }

    pub fn to_json(&self) -> InstanceJson {
        let (px, py) = coords(&self.base);
        let (qx, qy) = coords(&self.target);
        InstanceJson {
            p: self.curve.p().to_string(),
            a: self.curve.a().to_string(),
            b: self.curve.b().to_string(),
            px,
            py,
            q: self.q.to_string(),
            d: self.d.to_string(),
            qx,
            qy,
        }
    }

    /// Parses and re-validates; a Q that disagrees with dP is rejected.
    pub fn from_json(j: &InstanceJson) -> Result<Self, EcError> {
        let big = |s: &str| {
            s.parse::<BigUint>().map_err(|_| EcError::InvalidInstance(format!("bad integer {s:?}")))
        };
        let small = |s: &str| {
            s.parse::<u64>().map_err(|_| EcError::InvalidInstance(format!("bad integer {s:?}")))
        };
        let curve = CurveParams::new(big(&j.p)?, big(&j.a)?, big(&j.b)?)?;
        let base = Point::Affine(big(&j.px)?, big(&j.py)?);
        let inst = DlpInstance::new(curve, base, small(&j.q)?, small(&j.d)?)?;
        let claimed = if j.qx.is_empty() {
            Point::Infinity
        } else {
            Point::Affine(big(&j.qx)?, big(&j.qy)?)
        };
        if claimed != inst.target {
            return Err(EcError::InvalidInstance("Q != dP".into()));
        }
        Ok(inst)
    }
}

fn coords(pt: &Point) -> (String, String) {
    match pt {
        Point::Infinity => (String::new(), String::new()),
        Point::Affine(x, y) => (x.to_string(), y.to_string()),
    }
}

/// Serialized instance; big integers as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub p: String,
    pub a: String,
    pub b: String,
    #[serde(rename = "Px")]
    pub px: String,
    #[serde(rename = "Py")]
    pub py: String,
    pub q: String,
    pub d: String,
    #[serde(rename = "Qx")]
    pub qx: String,
    #[serde(rename = "Qy")]
    pub qy: String,
}

fn check_hasse(p: &BigUint, order: u64) -> Result<(), EcError> {
    let p = p.to_u64().unwrap();
    let diff = (order as i128 - (p as i128 + 1)).unsigned_abs();
    // |t| <= 2 sqrt(p)  <=>  t^2 <= 4p
    if diff * diff > 4 * p as u128 {
        return Err(EcError::InvalidInstance(format!("#E = {order} violates the Hasse bound")));
    }
    Ok(())
}

fn largest_prime_factor(mut m: u64) -> u64 {
    let mut best = 1;
    let mut f = 2;
    while f * f <= m {
        while m % f == 0 {
            best = f;
            m /= f;
        }
        f += 1;
    }
    if m > 1 {
        best = best.max(m);
    }
    best
}

fn random_small_prime<R: Rng + ?Sized>(lo: u64, hi: u64, rng: &mut R) -> u64 {
    loop {
        let c = rng.gen_range(lo..hi);
        if c > 3 && is_prime_u64(c) {
            return c;
        }
    }
}

struct Candidate {
    curve: CurveParams,
    order: u64,
}

fn random_curve<R: Rng + ?Sized>(p: u64, rng: &mut R) -> Option<Candidate> {
    let a = rng.gen_range(0..p);
    let b = rng.gen_range(0..p);
    let curve = CurveParams::small(p, a, b).ok()?;
    let order = curve.group_order(rng)?;
    Some(Candidate { curve, order })
}

fn finish<R: Rng + ?Sized>(c: Candidate, q: u64, rng: &mut R) -> Result<DlpInstance, EcError> {
    check_hasse(c.curve.p(), c.order)?;
    let cofactor = BigUint::from(c.order / q);
    let base = loop {
        let r = c.curve.random_point(rng);
        let pt = c.curve.scalar_mul(&cofactor, &r);
        if !pt.is_infinity() {
            break pt;
        }
    };
    let d = rng.gen_range(1..q);
    DlpInstance::new(c.curve, base, q, d)
}

/// Deterministic search for an instance whose base point has prime order of
/// exactly `target_q_bits` bits. d is drawn from [1, q) so that Q != O.
pub fn find_toy_instance(target_q_bits: u32, seed: u64) -> Result<DlpInstance, EcError> {
    assert!((2..=24).contains(&target_q_bits), "target_q_bits must be in 2..=24");
    let mut rng = stream(seed, 0xec);
    let lo = (1u64 << (target_q_bits - 1)).max(5);
    let hi = (1u64 << (target_q_bits + 1)).max(lo + 8);
    for _ in 0..SEARCH_BUDGET {
        let p = random_small_prime(lo, hi, &mut rng);
        let Some(c) = random_curve(p, &mut rng) else { continue };
        let q = largest_prime_factor(c.order);
        if 64 - q.leading_zeros() == target_q_bits && q > 2 {
            return finish(c, q, &mut rng);
        }
    }
    Err(EcError::SearchExhausted(SEARCH_BUDGET))
}

/// Deterministic search for an instance whose base point has order exactly q.
pub fn find_instance_with_order(q: u64, seed: u64) -> Result<DlpInstance, EcError> {
    assert!(q > 2 && is_prime_u64(q) && q < (1 << 24), "q must be an odd prime below 2^24");
    let mut rng = stream(seed, q);
    let lo = (q / 2).max(5);
    let hi = (4 * q).max(lo + 16);
    for _ in 0..SEARCH_BUDGET {
        let p = random_small_prime(lo, hi, &mut rng);
        let Some(c) = random_curve(p, &mut rng) else { continue };
        if c.order % q == 0 {
            return finish(c, q, &mut rng);
        }
    }
    Err(EcError::SearchExhausted(SEARCH_BUDGET))
}
