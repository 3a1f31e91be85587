//! Reversible constant-point group shift |S> -> |S + A> built from
//! constant additions, two reversible divisions and one squaring.
//!
//! Exceptional basis states are flagged classically instead of being run
//! through the generic formula.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ec_group::{CurveParams, DlpInstance, ExceptionalCase, Point};
use crate::euclid_machine::{EuclidMachine, EuclidState, MachineConfig, ModeledLoss, Word};
use crate::reversible_core::{
    mod_add_const, mod_mul, mod_mul_add, mod_mul_reverse, mod_sub_const, CostClass, CostLedger, Fault,
};
use crate::rng::stream;

/// Largest modulus run on the i128 Euclid path.
const FAST_BITS: u64 = 120;

/// A classical shift point (alpha, beta).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftConstant {
    pub alpha: BigUint,
    pub beta: BigUint,
}

impl ShiftConstant {
    pub fn from_point(pt: &Point) -> Result<Self, Fault> {
        match pt {
            Point::Infinity => Err(Fault::Domain("shift constant must be affine".into())),
            Point::Affine(x, y) => Ok(ShiftConstant { alpha: x.clone(), beta: y.clone() }),
        }
    }

    pub fn point(&self) -> Point {
        Point::Affine(self.alpha.clone(), self.beta.clone())
    }
}

/// Precomputed P_i = 2^i P and Q_i = 2^i Q for i < n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftTable {
    pub p_multiples: Vec<ShiftConstant>,
    pub q_multiples: Vec<ShiftConstant>,
}

impl ShiftTable {
    pub fn new(inst: &DlpInstance, n: u32) -> Result<Self, Fault> {
        let build = |base: &Point| -> Result<Vec<ShiftConstant>, Fault> {
            let mut out = Vec::with_capacity(n as usize);
            let mut cur = base.clone();
            for _ in 0..n {
                if cur.is_infinity() {
                    return Err(Fault::Domain("table entry is the point at infinity".into()));
                }
                out.push(ShiftConstant::from_point(&cur)?);
                cur = inst.curve.point_add(&cur, &cur);
            }
            Ok(out)
        };
        Ok(ShiftTable { p_multiples: build(&inst.base)?, q_multiples: build(&inst.target)? })
    }
}

/// Why a basis state was not shifted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShiftLoss {
    /// S = O, S = A or S = -A.
    Exceptional(ExceptionalCase),
    /// S = -2A: the result has x' = alpha, so the uncomputing division
    /// would divide by zero.
    DegenerateUncompute,
    /// One of the Euclid runs hit a modeled loss.
    Euclid(ModeledLoss),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftOutcome {
    pub result: Point,
    pub lost: Option<ShiftLoss>,
    pub ledger: CostLedger,
    /// Largest number of Euclid garbage bits held between paired runs.
    pub garbage_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivOutcome {
    /// y/x, or the unchanged y when lost.
    pub value: BigUint,
    pub lost: Option<ModeledLoss>,
    pub ledger: CostLedger,
    pub garbage_bits: u64,
}

fn garbage_bits<W: Word>(st: &EuclidState<W>) -> u64 {
    let r = &st.regs;
    r.b.bits() + r.big_a.bits() + r.big_b.bits() + r.q.bits() + (32 - r.i.leading_zeros()) as u64
        + (64 - r.h.leading_zeros()) as u64
}

fn neg(v: &BigUint, p: &BigUint) -> BigUint {
    if v.is_zero() {
        v.clone()
    } else {
        p - v
    }
}

struct Euclid<'a, W> {
    m: EuclidMachine<W>,
    x: &'a BigUint,
}

impl<'a, W: Word> Euclid<'a, W> {
    /// x -> 1/x, leaving the machine state as garbage.
    fn forward(&self, ledger: &mut CostLedger) -> Result<Result<(BigUint, EuclidState<W>, u64), ModeledLoss>, Fault> {
        let (res, st) = self.m.run(self.x, None)?;
        ledger.absorb(&self.m.run_ledger());
        match (res.failure, res.inverse) {
            (None, Some(inv)) => {
                let g = garbage_bits(&st);
                Ok(Ok((inv, st, g)))
            }
            (Some(f), _) => Ok(Err(f)),
            (None, None) => Err(Fault::Invariant("successful run without an inverse".into())),
        }
    }

    /// Consumes the garbage by running the machine backward to its start.
    fn backward(&self, mut st: EuclidState<W>, ledger: &mut CostLedger) -> Result<(), Fault> {
        let budget = self.m.config().budget;
        self.m.replay_backward(&mut st, budget, ledger)?;
        if st != self.m.initial(self.x)? {
            return Err(Fault::Irreversible("Euclid ancillae not restored".into()));
        }
        Ok(())
    }
}

fn div_with<W: Word>(x: &BigUint, y: &BigUint, p: &BigUint, cfg: &MachineConfig, inverse_direction: bool) -> Result<DivOutcome, Fault> {
    let e = Euclid { m: EuclidMachine::<W>::new(p, cfg)?, x };
    let mut ledger = CostLedger::new();
    let mul_ledger = || {
        let mut l = CostLedger::new();
        mod_mul(&BigUint::zero(), &BigUint::zero(), &BigUint::zero(), p, &mut l).map(|_| l)
    };
    if !inverse_direction {
        // x, y -> 1/x, y -> 1/x, y, y/x -> x, y, y/x -> x, 0, y/x
        let (inv, st, g) = match e.forward(&mut ledger)? {
            Ok(v) => v,
            Err(loss) => return lost_div(y, loss, ledger, &mul_ledger()?, p, cfg),
        };
        let z = mod_mul(&inv, y, &BigUint::zero(), p, &mut ledger)?;
        e.backward(st, &mut ledger)?;
        mod_mul_reverse(x, &z, y, p, &mut ledger)?;
        Ok(DivOutcome { value: z, lost: None, ledger, garbage_bits: g })
    } else {
        // x, 0, z -> x, xz, z -> 1/x, xz, z -> 1/x, xz -> x, xz
        let z = y;
        let prod = mod_mul(x, z, &BigUint::zero(), p, &mut ledger)?;
        let (inv, st, g) = match e.forward(&mut ledger)? {
            Ok(v) => v,
            Err(loss) => return lost_div(z, loss, ledger, &CostLedger::new(), p, cfg),
        };
        mod_mul_reverse(&inv, &prod, z, p, &mut ledger)?;
        e.backward(st, &mut ledger)?;
        Ok(DivOutcome { value: prod, lost: None, ledger, garbage_bits: g })
    }
}

/// A lost branch still pays for the whole circuit.
fn lost_div(
    y: &BigUint,
    loss: ModeledLoss,
    mut ledger: CostLedger,
    extra: &CostLedger,
    p: &BigUint,
    cfg: &MachineConfig,
) -> Result<DivOutcome, Fault> {
    let euclid = EuclidMachine::<BigInt>::new(p, cfg)?.run_ledger();
    let mut one_mul = CostLedger::new();
    mod_mul(&BigUint::zero(), &BigUint::zero(), &BigUint::zero(), p, &mut one_mul)?;
    ledger.absorb(extra);
    ledger.absorb(&euclid);
    ledger.absorb(&one_mul);
    Ok(DivOutcome { value: y.clone(), lost: Some(loss), ledger, garbage_bits: 0 })
}

fn check_operands(x: &BigUint, y: &BigUint, p: &BigUint) -> Result<(), Fault> {
    if x.is_zero() {
        return Err(Fault::DivByZero);
    }
    if x >= p || y >= p {
        return Err(Fault::Domain("operands must be reduced mod p".into()));
    }
    Ok(())
}

/// (x, y) -> (x, y/x): two Euclid runs and two multiplications.
pub fn div_quantum(x: &BigUint, y: &BigUint, p: &BigUint, cfg: &MachineConfig) -> Result<DivOutcome, Fault> {
    check_operands(x, y, p)?;
    if p.bits() <= FAST_BITS {
        div_with::<i128>(x, y, p, cfg, false)
    } else {
        div_with::<BigInt>(x, y, p, cfg, false)
    }
}

/// (x, z) -> (x, xz): the division run in the opposite direction.
pub fn div_quantum_reverse(x: &BigUint, z: &BigUint, p: &BigUint, cfg: &MachineConfig) -> Result<DivOutcome, Fault> {
    check_operands(x, z, p)?;
    if p.bits() <= FAST_BITS {
        div_with::<i128>(x, z, p, cfg, true)
    } else {
        div_with::<BigInt>(x, z, p, cfg, true)
    }
}

/// Cost components of one shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftCost {
    pub euclid: CostLedger,
    pub multiplication: CostLedger,
    pub addition: CostLedger,
}

impl ShiftCost {
    pub fn new(p: &BigUint, cfg: &MachineConfig) -> Result<Self, Fault> {
        let euclid = EuclidMachine::<BigInt>::new(p, cfg)?.run_ledger();
        let mut multiplication = CostLedger::new();
        mod_mul(&BigUint::zero(), &BigUint::zero(), &BigUint::zero(), p, &mut multiplication)?;
        let mut addition = CostLedger::new();
        addition.charge(CostClass::QuantumQuantumAdd, p.bits());
        Ok(ShiftCost { euclid, multiplication, addition })
    }

    /// 2 divisions of (2 Euclid + 2 multiplications), one squaring, 5 additions.
    pub fn total(&self) -> CostLedger {
        let mut l = CostLedger::new();
        for _ in 0..4 {
            l.absorb(&self.euclid);
        }
        for _ in 0..5 {
            l.absorb(&self.multiplication);
            l.absorb(&self.addition);
        }
        l
    }
}

/// Classifies S for the shift by A; `None` means the generic chain applies.
pub fn classify(curve: &CurveParams, s: &Point, a: &ShiftConstant) -> Option<ShiftLoss> {
    let Point::Affine(x, y) = s else {
        return Some(ShiftLoss::Exceptional(ExceptionalCase::Identity));
    };
    if *x == a.alpha {
        return Some(ShiftLoss::Exceptional(if *y == a.beta {
            ExceptionalCase::Doubling
        } else {
            ExceptionalCase::InversePair
        }));
    }
    match curve.point_add(s, &a.point()) {
        Point::Affine(x2, _) if x2 == a.alpha => Some(ShiftLoss::DegenerateUncompute),
        _ => None,
    }
}

/// |S> -> |S + A> through the five-stage chain
/// x,y -> x-a,y-b -> x-a,l -> x'-a,l -> x'-a,y'+b -> x',y'.
pub fn group_shift(curve: &CurveParams, s: &Point, a: &ShiftConstant, cfg: &MachineConfig) -> Result<ShiftOutcome, Fault> {
    let p = curve.p();
    if !curve.contains(s) {
        return Err(Fault::Domain("S is not on the curve".into()));
    }
    if !curve.contains(&a.point()) {
        return Err(Fault::Domain("A is not on the curve".into()));
    }
    if let Some(loss) = classify(curve, s, a) {
        return Ok(lost_shift(s, loss, p, cfg)?);
    }
    let Point::Affine(x, y) = s else { unreachable!() };
    let mut ledger = CostLedger::new();
    let three_alpha = (&a.alpha * 3u32) % p;

    let u = mod_sub_const(&a.alpha, x, p, &mut ledger)?;
    let v = mod_sub_const(&a.beta, y, p, &mut ledger)?;
    let d1 = div_quantum(&u, &v, p, cfg)?;
    ledger.absorb(&d1.ledger);
    if let Some(l) = d1.lost {
        return Ok(lost_shift(s, ShiftLoss::Euclid(l), p, cfg)?);
    }
    let lambda = d1.value;
    // u' = l^2 - u - 3a = x' - a; the negation folds into the constant add.
    let u2 = mod_mul_add(&lambda, &lambda, &neg(&u, p), p, &mut ledger)?;
    let u2 = mod_sub_const(&three_alpha, &u2, p, &mut ledger)?;
    // l (x' - a) = -(y' + b)
    let d2 = div_quantum_reverse(&u2, &lambda, p, cfg)?;
    ledger.absorb(&d2.ledger);
    if let Some(l) = d2.lost {
        return Ok(lost_shift(s, ShiftLoss::Euclid(l), p, cfg)?);
    }
    let w = neg(&d2.value, p);
    let x2 = mod_add_const(&a.alpha, &u2, p, &mut ledger)?;
    let y2 = mod_sub_const(&a.beta, &w, p, &mut ledger)?;
    Ok(ShiftOutcome {
        result: Point::Affine(x2, y2),
        lost: None,
        ledger,
        garbage_bits: d1.garbage_bits.max(d2.garbage_bits),
    })
}

/// Inverse chain x',y' -> x,y, used to check reversibility.
pub fn group_shift_reverse(curve: &CurveParams, s2: &Point, a: &ShiftConstant, cfg: &MachineConfig) -> Result<Point, Fault> {
    let p = curve.p();
    let Point::Affine(x2, y2) = s2 else {
        return Err(Fault::Domain("reverse shift of the point at infinity".into()));
    };
    let mut ledger = CostLedger::new();
    let three_alpha = (&a.alpha * 3u32) % p;
    let u2 = mod_sub_const(&a.alpha, x2, p, &mut ledger)?;
    let w = mod_add_const(&a.beta, y2, p, &mut ledger)?;
    if u2.is_zero() {
        return Err(Fault::DivByZero);
    }
    let d2 = div_quantum(&u2, &neg(&w, p), p, cfg)?;
    if d2.lost.is_some() {
        return Err(Fault::Domain("reverse shift hit a modeled loss".into()));
    }
    let lambda = d2.value;
    let t = mod_add_const(&three_alpha, &u2, p, &mut ledger)?;
    let u = neg(&mod_mul_reverse_sub(&lambda, &t, p, &mut ledger)?, p);
    let d1 = div_quantum_reverse(&u, &lambda, p, cfg)?;
    if d1.lost.is_some() {
        return Err(Fault::Domain("reverse shift hit a modeled loss".into()));
    }
    let x = mod_add_const(&a.alpha, &u, p, &mut ledger)?;
    let y = mod_add_const(&a.beta, &d1.value, p, &mut ledger)?;
    Ok(Point::Affine(x, y))
}

/// t -> t - l^2, the inverse of the squaring accumulation.
fn mod_mul_reverse_sub(lambda: &BigUint, t: &BigUint, p: &BigUint, ledger: &mut CostLedger) -> Result<BigUint, Fault> {
    crate::reversible_core::mod_mul_sub(lambda, lambda, t, p, ledger)
}

fn lost_shift(s: &Point, loss: ShiftLoss, p: &BigUint, cfg: &MachineConfig) -> Result<ShiftOutcome, Fault> {
    Ok(ShiftOutcome { result: s.clone(), lost: Some(loss), ledger: ShiftCost::new(p, cfg)?.total(), garbage_bits: 0 })
}

/// Shift controlled by a classical bit. The circuit is data independent,
/// so both branches pay the shift plus one control event per field bit.
pub fn controlled_shift(
    control: bool,
    curve: &CurveParams,
    s: &Point,
    a: &ShiftConstant,
    cfg: &MachineConfig,
) -> Result<ShiftOutcome, Fault> {
    let p = curve.p();
    let mut out = if control {
        group_shift(curve, s, a, cfg)?
    } else {
        if !curve.contains(s) {
            return Err(Fault::Domain("S is not on the curve".into()));
        }
        ShiftOutcome { result: s.clone(), lost: None, ledger: ShiftCost::new(p, cfg)?.total(), garbage_bits: 0 }
    };
    out.ledger.charge(CostClass::Control, p.bits());
    Ok(out)
}

/// Exceptional-case statistics over random DLP walks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityAudit {
    pub q: u64,
    pub n: u32,
    pub walks: u64,
    pub seed: u64,
    /// Mean per-walk count of steps with S = +-A_i, whatever the control bit.
    pub mean_loss: f64,
    pub std_error: f64,
    /// 4n/q.
    pub predicted: f64,
    /// As `mean_loss`, counting only steps whose control bit is set.
    pub controlled_mean_loss: f64,
    /// Mean count of controlled steps with S = -2A_i.
    pub degenerate_mean_loss: f64,
    /// Walks in which O appeared without a preceding inverse addition.
    pub infinity_violations: u64,
}

/// Walks the 2n controlled shifts of random runs in exponent space
/// (S = sP); exact since P has prime order q.
pub fn fidelity_audit(inst: &DlpInstance, n: u32, walks: u64, seed: u64) -> FidelityAudit {
    let q = inst.q;
    let mut rng = stream(seed, 0xa0d1);
    let shifts: Vec<u64> = (0..n)
        .map(|i| pow2_mod(i, q))
        .chain((0..n).map(|i| mulmod(pow2_mod(i, q), inst.d, q)))
        .collect();
    let (mut sum, mut sumsq, mut ctrl, mut degen, mut viol) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for _ in 0..walks {
        let mut s = rng.gen_range(1..q);
        let mut hits = 0u64;
        // How S last changed; the offset start is never O.
        let mut reached_by_inverse = false;
        let mut bad = false;
        for &a in &shifts {
            let c: bool = rng.gen();
            if s == 0 && !reached_by_inverse {
                bad = true;
            }
            let inverse = s == (q - a) % q;
            let hit = s == a || inverse;
            hits += hit as u64;
            if c {
                ctrl += hit as u64;
                degen += (s == (2 * (q - a)) % q) as u64;
                s = (s + a) % q;
                reached_by_inverse = inverse;
            }
        }
        viol += bad as u64;
        sum += hits;
        sumsq += hits * hits;
    }
    let w = walks as f64;
    let mean = sum as f64 / w;
    let var = if walks > 1 { (sumsq as f64 - w * mean * mean) / (w - 1.0) } else { 0.0 };
    FidelityAudit {
        q,
        n,
        walks,
        seed,
        mean_loss: mean,
        std_error: (var / w).sqrt(),
        predicted: 4.0 * n as f64 / q as f64,
        controlled_mean_loss: ctrl as f64 / w,
        degenerate_mean_loss: degen as f64 / w,
        infinity_violations: viol,
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow2_mod(i: u32, q: u64) -> u64 {
    (0..i).fold(1 % q, |acc, _| mulmod(acc, 2, q))
}

impl FidelityAudit {
    pub const CSV_HEADER: &'static str =
        "q,n,walks,seed,mean_loss,std_error,predicted,controlled_mean_loss,degenerate_mean_loss,infinity_violations";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}",
            self.q,
            self.n,
            self.walks,
            self.seed,
            self.mean_loss,
            self.std_error,
            self.predicted,
            self.controlled_mean_loss,
            self.degenerate_mean_loss,
            self.infinity_violations
        )
    }
}
