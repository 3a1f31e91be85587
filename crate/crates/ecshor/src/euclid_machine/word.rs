use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;

/// Signed integer type the machine registers are held in.
pub trait Word: Clone + Ord + Debug + Send + Sync {
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn abs(&self) -> Self;
    /// Bit length of |self|.
    fn bits(&self) -> u64;
    fn bit(&self, i: u32) -> bool;
    fn shl(&self, k: u32) -> Option<Self>;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn pow2(k: u32) -> Option<Self> {
        Self::one().shl(k)
    }
}

impl Word for i128 {
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
    fn abs(&self) -> Self {
        i128::abs(*self)
    }
    fn bits(&self) -> u64 {
        (128 - self.unsigned_abs().leading_zeros()) as u64
    }
    fn bit(&self, i: u32) -> bool {
        i < 127 && (*self >> i) & 1 == 1
    }
    fn shl(&self, k: u32) -> Option<Self> {
        if *self == 0 {
            return Some(0);
        }
        if k >= 127 || self.unsigned_abs().leading_zeros() < k + 1 {
            return None;
        }
        Some(*self << k)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
}

impl Word for BigInt {
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_neg(&self) -> bool {
        self.sign() == Sign::Minus
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn bits(&self) -> u64 {
        self.magnitude().bits()
    }
    fn bit(&self, i: u32) -> bool {
        self.magnitude().bit(i as u64)
    }
    fn shl(&self, k: u32) -> Option<Self> {
        Some(self << k)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
}

pub fn to_biguint(v: &BigInt) -> BigUint {
    v.to_biguint().expect("nonnegative")
}
