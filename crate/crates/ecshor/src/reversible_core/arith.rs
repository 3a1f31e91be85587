//! Reversible modular arithmetic on words. Every forward map has an explicit
//! backward map; costs go to the ledger in both directions.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use super::{CostClass, CostLedger, Fault, RegId, RegisterFile};

fn check_range(v: &BigUint, p: &BigUint, what: &str) -> Result<(), Fault> {
    if v >= p {
        return Err(Fault::Domain(format!("{what} = {v} not below modulus {p}")));
    }
    Ok(())
}

fn width(p: &BigUint) -> u64 {
    p.bits()
}

/// 2A mod p. Charged as one quantum-quantum addition of width bitlen(p).
pub fn mod_double(a: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(a, p, "A")?;
    if !p.bit(0) {
        return Err(Fault::Domain("modulus must be odd".into()));
    }
    ledger.charge(CostClass::QuantumQuantumAdd, width(p));
    let d = a << 1u32;
    Ok(if &d >= p { d - p } else { d })
}

/// Inverse of `mod_double`: an even result means no reduction happened.
pub fn mod_halve(a: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(a, p, "A")?;
    if !p.bit(0) {
        return Err(Fault::Domain("modulus must be odd".into()));
    }
    ledger.charge(CostClass::QuantumQuantumAdd, width(p));
    Ok(if a.bit(0) { (a + p) >> 1u32 } else { a >> 1u32 })
}

/// (x, y) -> (x, x + y mod p). Two quantum-quantum additions.
pub fn mod_add(x: &BigUint, y: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(x, p, "x")?;
    check_range(y, p, "y")?;
    ledger.charge_n(CostClass::QuantumQuantumAdd, width(p), 2);
    let s = x + y;
    Ok(if &s >= p { s - p } else { s })
}

/// (x, y) -> (x, y - x mod p), the inverse of `mod_add`.
pub fn mod_sub(x: &BigUint, y: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(x, p, "x")?;
    check_range(y, p, "y")?;
    ledger.charge_n(CostClass::QuantumQuantumAdd, width(p), 2);
    Ok(if y >= x { y - x } else { y + p - x })
}

/// Adds a classical constant mod p. Charged at the quantum-quantum rate,
/// as the group-shift cost formula counts its five constant additions.
pub fn mod_add_const(c: &BigUint, y: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(c, p, "constant")?;
    check_range(y, p, "y")?;
    ledger.charge(CostClass::QuantumQuantumAdd, width(p));
    let s = c + y;
    Ok(if &s >= p { s - p } else { s })
}

pub fn mod_sub_const(c: &BigUint, y: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(c, p, "constant")?;
    check_range(y, p, "y")?;
    ledger.charge(CostClass::QuantumQuantumAdd, width(p));
    Ok(if y >= c { y - c } else { y + p - c })
}

/// The n-step schedule acc <- 2acc + x_i y, top bit of x first, from 0;
/// n = bitlen(p). Each step is a mod_double and a controlled mod_add, so
/// the whole product costs 3n additions.
fn product_schedule(x: &BigUint, y: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(x, p, "x")?;
    check_range(y, p, "y")?;
    let mut r = BigUint::zero();
    for i in (0..width(p)).rev() {
        r = mod_double(&r, p, ledger)?;
        // The controlled add is paid for whether or not x_i is set.
        let t = mod_add(y, &r, p, ledger)?;
        if x.bit(i) {
            r = t;
        }
    }
    Ok(r)
}

/// (x, y, z) -> (x, y, z + x*y mod p), costed as one multiplication.
pub fn mod_mul_add(x: &BigUint, y: &BigUint, z: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(z, p, "z")?;
    let s = z + product_schedule(x, y, p, ledger)?;
    Ok(if &s >= p { s - p } else { s })
}

/// (x, y, z) -> (x, y, z - x*y mod p).
pub fn mod_mul_sub(x: &BigUint, y: &BigUint, z: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(z, p, "z")?;
    let t = product_schedule(x, y, p, ledger)?;
    Ok(if z >= &t { z - t } else { z + p - t })
}

/// (x, y, 0) -> (x, y, x*y mod p).
pub fn mod_mul(x: &BigUint, y: &BigUint, out: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    if !out.is_zero() {
        return Err(Fault::NonzeroTarget);
    }
    product_schedule(x, y, p, ledger)
}

/// Backward run of `mod_mul`: undoes the n steps from the lowest bit up.
/// Reaching anything but 0 means `out` was not x*y.
pub fn mod_mul_reverse(x: &BigUint, y: &BigUint, out: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    check_range(x, p, "x")?;
    check_range(y, p, "y")?;
    check_range(out, p, "out")?;
    let mut r = out.clone();
    for i in 0..width(p) {
        let t = mod_sub(y, &r, p, ledger)?;
        if x.bit(i) {
            r = t;
        }
        r = mod_halve(&r, p, ledger)?;
    }
    if !r.is_zero() {
        return Err(Fault::Irreversible(format!("mod_mul reverse left {r}")));
    }
    Ok(r)
}

/// A reversible operation over some state type.
pub trait ReversibleOp<S> {
    fn name(&self) -> &str;
    fn forward(&self, s: &mut S, ledger: &mut CostLedger) -> Result<(), Fault>;
    fn backward(&self, s: &mut S, ledger: &mut CostLedger) -> Result<(), Fault>;
}

/// Applies the backward action.
pub fn reverse<S, O: ReversibleOp<S> + ?Sized>(op: &O, s: &mut S, ledger: &mut CostLedger) -> Result<(), Fault> {
    op.backward(s, ledger)
}

/// forward then backward must be the identity, bit for bit.
pub fn round_trip<S: Clone + PartialEq + std::fmt::Debug, O: ReversibleOp<S> + ?Sized>(
    op: &O,
    s: &S,
) -> Result<(), Fault> {
    let mut t = s.clone();
    let mut ledger = CostLedger::new();
    op.forward(&mut t, &mut ledger)?;
    op.backward(&mut t, &mut ledger)?;
    if &t != s {
        return Err(Fault::Irreversible(format!("{} round trip changed {:?} into {:?}", op.name(), s, t)));
    }
    Ok(())
}

fn read(rf: &RegisterFile, id: RegId) -> Result<BigUint, Fault> {
    rf.get(id).to_biguint().ok_or_else(|| Fault::Domain("negative modular register".into()))
}

fn write(rf: &mut RegisterFile, id: RegId, v: BigUint) -> Result<(), Fault> {
    rf.set(id, BigInt::from(v))
}

/// Register-level wrappers over the word operations.
pub struct ModDouble {
    pub reg: RegId,
    pub p: BigUint,
}

impl ReversibleOp<RegisterFile> for ModDouble {
    fn name(&self) -> &str {
        "mod_double"
    }
    fn forward(&self, s: &mut RegisterFile, l: &mut CostLedger) -> Result<(), Fault> {
        let v = mod_double(&read(s, self.reg)?, &self.p, l)?;
        write(s, self.reg, v)
    }
    fn backward(&self, s: &mut RegisterFile, l: &mut CostLedger) -> Result<(), Fault> {
        let v = mod_halve(&read(s, self.reg)?, &self.p, l)?;
        write(s, self.reg, v)
    }
}

pub struct ModAdd {
    pub src: RegId,
    pub dst: RegId,
    pub p: BigUint,
}

impl ReversibleOp<RegisterFile> for ModAdd {
    fn name(&self) -> &str {
        "mod_add"
    }
    fn forward(&self, s: &mut RegisterFile, l: &mut CostLedger) -> Result<(), Fault> {
        let v = mod_add(&read(s, self.src)?, &read(s, self.dst)?, &self.p, l)?;
        write(s, self.dst, v)
    }
    fn backward(&self, s: &mut RegisterFile, l: &mut CostLedger) -> Result<(), Fault> {
        let v = mod_sub(&read(s, self.src)?, &read(s, self.dst)?, &self.p, l)?;
        write(s, self.dst, v)
    }
}

pub struct ModMul {
    pub x: RegId,
    pub y: RegId,
    pub out: RegId,
    pub p: BigUint,
}

impl ReversibleOp<RegisterFile> for ModMul {
    fn name(&self) -> &str {
        "mod_mul"
    }
    fn forward(&self, s: &mut RegisterFile, l: &mut CostLedger) -> Result<(), Fault> {
        let v = mod_mul(&read(s, self.x)?, &read(s, self.y)?, &read(s, self.out)?, &self.p, l)?;
        write(s, self.out, v)
    }
    fn backward(&self, s: &mut RegisterFile, l: &mut CostLedger) -> Result<(), Fault> {
        let v = mod_mul_reverse(&read(s, self.x)?, &read(s, self.y)?, &read(s, self.out)?, &self.p, l)?;
        write(s, self.out, v)
    }
}
