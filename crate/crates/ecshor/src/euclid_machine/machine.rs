use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::word::{to_biguint, Word};
use crate::reversible_core::{
    schedule_step, unschedule_step, CostClass, CostLedger, DesyncMachine, Fault, SchedulerState,
};

pub const OPS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineConfig {
    pub sharing: bool,
    /// Defaults to ceil(3 log2 n).
    pub quotient_cap_bits: Option<u64>,
    /// Defaults to ceil(4.5 n).
    pub cycle_budget: Option<u64>,
    /// Defaults to ceil(2 sqrt n).
    pub sharing_margin: Option<u64>,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig { sharing: true, quotient_cap_bits: None, cycle_budget: None, sharing_margin: None }
    }
}

impl MachineConfig {
    /// No sharing and no quotient cap: every input runs to completion.
    pub fn unbounded() -> Self {
        MachineConfig { sharing: false, quotient_cap_bits: Some(u64::MAX), ..Default::default() }
    }

    pub fn no_sharing() -> Self {
        MachineConfig { sharing: false, ..Default::default() }
    }

    pub fn resolve(&self, n: u64) -> Result<Resolved, Fault> {
        let cap = self.quotient_cap_bits.unwrap_or_else(|| default_cap(n)).min(n);
        let budget = self.cycle_budget.unwrap_or_else(|| default_budget(n));
        let margin = self.sharing_margin.unwrap_or_else(|| default_margin(n));
        if cap < 1 || budget < 1 {
            return Err(Fault::Domain("cycle budget and quotient cap must be at least 1".into()));
        }
        Ok(Resolved { n, cap, budget, margin, sharing: self.sharing })
    }
}

pub fn default_cap(n: u64) -> u64 {
    ((3.0 * (n as f64).log2()).ceil() as u64).max(1)
}

pub fn default_budget(n: u64) -> u64 {
    (9 * n).div_ceil(2)
}

pub fn default_margin(n: u64) -> u64 {
    (2.0 * (n as f64).sqrt()).ceil() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub n: u64,
    pub cap: u64,
    pub budget: u64,
    pub margin: u64,
    pub sharing: bool,
}

/// Expected bit length of a and b after r cycles: ceil(r / 3.5), at most n.
pub fn expected_small(n: u64, r: u64) -> u64 {
    (2 * r).div_ceil(7).min(n)
}

/// Expected bit length of A and B after r cycles: ceil(n - r / 3.5), at least 0.
pub fn expected_big(n: u64, r: u64) -> u64 {
    n.saturating_sub((2 * r) / 7)
}

/// Modeled loss: the basis state is flagged, not a simulator fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeledLoss {
    BoundedQuotientOverflow,
    SharingOverflow,
    BudgetExhausted,
}

/// Registers of the machine; `a` and `b` are signed, the rest nonnegative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EuclidRegs<W> {
    pub a: W,
    pub big_a: W,
    pub b: W,
    pub big_b: W,
    pub i: u32,
    pub q: W,
    pub h: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EuclidState<W> {
    pub regs: EuclidRegs<W>,
    pub sched: SchedulerState,
}

impl<W: Word> EuclidState<W> {
    /// Bit lengths of |a|, A, |b|, B.
    pub fn sizes(&self) -> [u64; 4] {
        let r = &self.regs;
        [r.a.bits(), r.big_a.bits(), r.b.bits(), r.big_b.bits()]
    }

    pub fn halted(&self) -> bool {
        self.regs.big_b.is_zero()
    }
}

#[derive(Clone, Debug)]
pub struct EuclidMachine<W> {
    p: W,
    cfg: Resolved,
}

fn pfault(msg: &str) -> Fault {
    Fault::Predicate(msg.to_string())
}

fn shl<W: Word>(v: &W, k: u32) -> Result<W, Fault> {
    v.shl(k).ok_or_else(|| pfault("shift overflows the word type"))
}

/// |a| - [b < 0], the sign-corrected magnitude used by the phase-4 and
/// phase-3-reverse comparisons.
fn corrected<W: Word>(a: &W, b: &W) -> W {
    let m = a.abs();
    if b.is_neg() {
        m.sub(&W::one())
    } else {
        m
    }
}

impl<W: Word> DesyncMachine for EuclidMachine<W> {
    type Data = EuclidRegs<W>;

    fn op_count(&self) -> usize {
        OPS
    }

    fn enabled(&self, d: &EuclidRegs<W>) -> bool {
        d.h == 0
    }

    fn forward(&self, op: usize, d: &mut EuclidRegs<W>) -> Result<(), Fault> {
        match op {
            1 => d.i += 1,
            2 => {
                let j = d.i.checked_sub(1).ok_or_else(|| pfault("op2 with i = 0"))?;
                let t = shl(&d.big_b, j)?;
                if d.big_a >= t {
                    d.big_a = d.big_a.sub(&t);
                    d.q = d.q.add(&shl(&W::one(), j)?);
                }
                d.i = j;
            }
            3 => {
                if d.q.bit(d.i) {
                    d.a = d.a.sub(&shl(&d.b, d.i)?);
                    d.q = d.q.sub(&shl(&W::one(), d.i)?);
                }
                d.i += 1;
            }
            4 => d.i = d.i.checked_sub(1).ok_or_else(|| pfault("op4 with i = 0"))?,
            5 => {
                std::mem::swap(&mut d.a, &mut d.b);
                std::mem::swap(&mut d.big_a, &mut d.big_b);
            }
            _ => return Err(pfault("no such operation")),
        }
        Ok(())
    }

    fn backward(&self, op: usize, d: &mut EuclidRegs<W>) -> Result<(), Fault> {
        match op {
            1 => d.i = d.i.checked_sub(1).ok_or_else(|| pfault("op1 reverse with i = 0"))?,
            2 => {
                let j = d.i;
                if d.q.bit(j) {
                    d.big_a = d.big_a.add(&shl(&d.big_b, j)?);
                    d.q = d.q.sub(&shl(&W::one(), j)?);
                }
                d.i = j + 1;
            }
            3 => {
                let i = d.i.checked_sub(1).ok_or_else(|| pfault("op3 reverse with i = 0"))?;
                if corrected(&d.a, &d.b) >= shl(&d.b.abs(), i)? {
                    d.a = d.a.add(&shl(&d.b, i)?);
                    d.q = d.q.add(&shl(&W::one(), i)?);
                }
                d.i = i;
            }
            4 => d.i += 1,
            5 => {
                std::mem::swap(&mut d.a, &mut d.b);
                std::mem::swap(&mut d.big_a, &mut d.big_b);
            }
            _ => return Err(pfault("no such operation")),
        }
        Ok(())
    }

    fn is_first(&self, op: usize, d: &EuclidRegs<W>) -> Result<bool, Fault> {
        Ok(match op {
            1 | 3 => d.i == 0,
            2 => d.q.is_zero(),
            4 => corrected(&d.a, &d.b) < shl(&d.b.abs(), d.i)?,
            5 => true,
            _ => return Err(pfault("no such operation")),
        })
    }

    fn is_last(&self, op: usize, d: &EuclidRegs<W>) -> Result<bool, Fault> {
        Ok(match op {
            1 => shl(&d.big_b, d.i)? > d.big_a,
            2 | 4 => d.i == 0,
            3 => d.q.is_zero(),
            5 => true,
            _ => return Err(pfault("no such operation")),
        })
    }
}

/// What happened during one cycle.
#[derive(Clone, Debug, Default)]
pub struct CycleInfo<W> {
    pub fired: [bool; OPS],
    /// Quotient as it stood when its extraction finished.
    pub quotient: Option<W>,
    /// An iteration ended with the SWAP in this cycle.
    pub boundary: bool,
    /// Largest shift index reached inside the cycle.
    pub max_i: u32,
}

/// One line of the per-cycle trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub step: u64,
    pub c: usize,
    pub f: bool,
    pub a: BigInt,
    pub big_a: BigInt,
    pub b: BigInt,
    pub big_b: BigInt,
    pub i: u32,
    pub q: BigInt,
    pub h: u64,
    pub ledger_tenths: u128,
}

impl TraceRow {
    pub const HEADER: &'static str = "step,c,f,a,A,b,B,i,q,h,ledger_units";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:x},{:x},{:x},{:x},{:x},{:x},{:x},{}.{}",
            self.step,
            self.c,
            self.f as u8,
            self.a,
            self.big_a,
            self.b,
            self.big_b,
            self.i,
            self.q,
            self.h,
            self.ledger_tenths / 10,
            self.ledger_tenths % 10
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseResult {
    /// x^-1 mod p; absent when the run was lost.
    pub inverse: Option<BigUint>,
    /// First component of the leading pair at termination: x^-1 or x^-1 - p.
    pub raw_output: Option<BigInt>,
    /// Set when the raw output is x^-1 - p.
    pub correction_flag: bool,
    pub cycles_used: u64,
    pub halting_count: u64,
    pub budget: u64,
    pub ledger: CostLedger,
    pub failure: Option<ModeledLoss>,
    pub quotients: Vec<BigUint>,
}

impl<W: Word> EuclidMachine<W> {
    pub fn new(p: &BigUint, cfg: &MachineConfig) -> Result<Self, Fault> {
        if p < &BigUint::from(2u32) {
            return Err(Fault::Domain("modulus must be at least 2".into()));
        }
        let n = p.bits();
        let pw = W::from_big(&BigInt::from(p.clone()))
            .ok_or_else(|| Fault::Domain("modulus too large for the word type".into()))?;
        Ok(EuclidMachine { p: pw, cfg: cfg.resolve(n)? })
    }

    pub fn config(&self) -> &Resolved {
        &self.cfg
    }

    /// (a, A) = (0, p), (b, B) = (1, x), all other registers clear, f = 1, c = 1.
    pub fn initial(&self, x: &BigUint) -> Result<EuclidState<W>, Fault> {
        let xw = W::from_big(&BigInt::from(x.clone())).ok_or_else(|| Fault::Domain("x too large".into()))?;
        if xw.is_zero() || xw >= self.p {
            return Err(Fault::Domain(format!("x = {x} must satisfy 0 < x < p")));
        }
        let p = to_biguint(&self.p.to_big());
        if !x.gcd(&p).is_one() {
            return Err(Fault::Domain(format!("x = {x} is not invertible mod {p}")));
        }
        Ok(EuclidState {
            regs: EuclidRegs {
                a: W::zero(),
                big_a: self.p.clone(),
                b: W::one(),
                big_b: xw,
                i: 0,
                q: W::zero(),
                h: 0,
            },
            sched: SchedulerState::start(),
        })
    }

    /// Halting check at the cycle start, then the five scheduled steps.
    pub fn forward_cycle(&self, st: &mut EuclidState<W>) -> Result<CycleInfo<W>, Fault> {
        if st.regs.big_b.is_zero() {
            st.regs.h += 1;
        }
        let mut info = CycleInfo { fired: [false; OPS], quotient: None, boundary: false, max_i: st.regs.i };
        for k in 1..=OPS {
            let fired = schedule_step(self, &mut st.regs, &mut st.sched, k)?;
            info.fired[k - 1] = fired;
            info.max_i = info.max_i.max(st.regs.i);
            if fired && k == 2 && st.regs.i == 0 {
                info.quotient = Some(st.regs.q.clone());
            }
            if fired && k == 5 {
                info.boundary = true;
            }
        }
        Ok(info)
    }

    pub fn backward_cycle(&self, st: &mut EuclidState<W>) -> Result<(), Fault> {
        for k in (1..=OPS).rev() {
            unschedule_step(self, &mut st.regs, &mut st.sched, k)?;
        }
        if st.regs.big_b.is_zero() {
            st.regs.h = st.regs.h.checked_sub(1).ok_or_else(|| pfault("halting counter underflow"))?;
        }
        Ok(())
    }

    /// Width budgets (a/b, A/B) for the state after r cycles with sharing.
    pub fn sharing_widths(&self, r: u64) -> (u64, u64) {
        let n = self.cfg.n;
        let m = self.cfg.margin;
        ((expected_small(n, r) + m).min(n), (expected_big(n, r) + m).min(n))
    }

    /// Operand width used for the arithmetic of cycle r (0-based).
    pub fn cycle_width(&self, r: u64) -> u64 {
        if self.cfg.sharing {
            let (s, b) = self.sharing_widths(r);
            (s + b).div_ceil(2)
        } else {
            self.cfg.n
        }
    }

    /// One cycle: four additions/subtractions, a compare-to-zero, a SWAP and
    /// the small-register control work, all at the cycle width.
    pub fn cycle_ledger(&self, r: u64, ledger: &mut CostLedger) {
        let w = self.cycle_width(r);
        ledger.charge_n(CostClass::QuantumQuantumAdd, w, 4);
        ledger.charge(CostClass::CompareZero, w);
        ledger.charge(CostClass::Swap, w);
        ledger.charge(CostClass::Control, w);
    }

    /// Cost of a complete run, which is data independent.
    pub fn run_ledger(&self) -> CostLedger {
        let mut l = CostLedger::new();
        for r in 0..self.cfg.budget {
            self.cycle_ledger(r, &mut l);
        }
        l
    }

    fn check_boundary(&self, st: &EuclidState<W>, q: &W, iterations: u64) -> Result<(), Fault> {
        let r = &st.regs;
        let bad = |m: &str| Err(Fault::Invariant(format!("{m} at iteration {iterations}: {r:?}")));
        let (a, aa, b, bb) = (r.a.to_big(), r.big_a.to_big(), r.b.to_big(), r.big_b.to_big());
        let p = self.p.to_big();
        let cons = &b * &aa - &a * &bb;
        if cons.magnitude() != p.magnitude() {
            return bad("|bA - aB| != p");
        }
        if (r.a.is_neg() && r.b.is_neg()) || (!r.a.is_neg() && !r.a.is_zero() && !r.b.is_neg() && !r.b.is_zero()) {
            return bad("a and b share a sign");
        }
        if a.magnitude() * aa.magnitude() > *p.magnitude() || b.magnitude() * bb.magnitude() > *p.magnitude() {
            return bad("|a|A or |b|B exceeds p");
        }
        if aa <= bb {
            return bad("pairs out of order");
        }
        let (ma, mb) = (r.a.abs(), r.b.abs());
        if ma > mb || (ma == mb && ma != W::one()) {
            return bad("|a| < |b| fails outside the equal-unit case");
        }
        // q = floor((|a - qb| - [b < 0]) / |b|), with b the new leading coefficient.
        let num = corrected(&r.b, &r.a).to_big();
        let recomputed = num.div_floor(&ma.to_big());
        if recomputed != q.to_big() {
            return bad("quotient does not recompute from the coefficients");
        }
        if 2 * iterations > 3 * self.cfg.n + 1 {
            return bad("more than 1.5n iterations");
        }
        Ok(())
    }

    /// Runs the whole cycle budget on input x; returns the result and the
    /// final state (which a backward replay turns into the initial state).
    pub fn run(&self, x: &BigUint, mut trace: Option<&mut Vec<TraceRow>>) -> Result<(InverseResult, EuclidState<W>), Fault> {
        let mut st = self.initial(x)?;
        let mut quotients = Vec::new();
        let mut pending_q: Option<W> = None;
        let mut failure = None;
        let mut ledger = CostLedger::new();
        let mut ran = 0;
        for r in 0..self.cfg.budget {
            let info = self.forward_cycle(&mut st)?;
            self.cycle_ledger(r, &mut ledger);
            ran = r + 1;
            if let Some(q) = info.quotient {
                pending_q = Some(q);
            }
            if info.boundary {
                let q = pending_q.take().ok_or_else(|| Fault::Invariant("SWAP before a quotient".into()))?;
                self.check_boundary(&st, &q, quotients.len() as u64 + 1)?;
                quotients.push(to_biguint(&q.to_big()));
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.trace_row(&st, ran, &ledger));
            }
            if info.max_i as u64 > self.cfg.cap {
                failure = Some(ModeledLoss::BoundedQuotientOverflow);
                break;
            }
            if self.cfg.sharing {
                let (ws, wb) = self.sharing_widths(ran);
                let s = st.sizes();
                if s[0] > ws || s[2] > ws || s[1] > wb || s[3] > wb {
                    failure = Some(ModeledLoss::SharingOverflow);
                    break;
                }
            }
        }
        if failure.is_none() && !st.halted() {
            failure = Some(ModeledLoss::BudgetExhausted);
        }
        let (inverse, raw_output, correction_flag) = if failure.is_none() {
            let raw = st.regs.a.to_big();
            let p = self.p.to_big();
            (Some(to_biguint(&raw.mod_floor(&p))), Some(raw.clone()), raw < BigInt::from(0))
        } else {
            (None, None, false)
        };
        let res = InverseResult {
            inverse,
            raw_output,
            correction_flag,
            cycles_used: ran - st.regs.h,
            halting_count: st.regs.h,
            budget: self.cfg.budget,
            ledger,
            failure,
            quotients,
        };
        Ok((res, st))
    }

    /// Replays `cycles` cycles backward, charging the same cost as forward.
    pub fn replay_backward(&self, st: &mut EuclidState<W>, cycles: u64, ledger: &mut CostLedger) -> Result<(), Fault> {
        for r in (0..cycles).rev() {
            self.backward_cycle(st)?;
            self.cycle_ledger(r, ledger);
        }
        Ok(())
    }

    fn trace_row(&self, st: &EuclidState<W>, step: u64, ledger: &CostLedger) -> TraceRow {
        let r = &st.regs;
        TraceRow {
            step,
            c: st.sched.c,
            f: st.sched.f,
            a: r.a.to_big(),
            big_a: r.big_a.to_big(),
            b: r.b.to_big(),
            big_b: r.big_b.to_big(),
            i: r.i,
            q: r.q.to_big(),
            h: r.h,
            ledger_tenths: ledger.total_tenths(),
        }
    }
}

/// Largest modulus handled on the fixed-width fast path.
const FAST_BITS: u64 = 120;

/// Runs the machine for x^-1 mod p.
pub fn run_inverse(x: &BigUint, p: &BigUint, cfg: &MachineConfig) -> Result<InverseResult, Fault> {
    if p.bits() <= FAST_BITS {
        Ok(EuclidMachine::<i128>::new(p, cfg)?.run(x, None)?.0)
    } else {
        Ok(EuclidMachine::<BigInt>::new(p, cfg)?.run(x, None)?.0)
    }
}

/// As `run_inverse`, also returning the per-cycle trace.
pub fn run_inverse_traced(x: &BigUint, p: &BigUint, cfg: &MachineConfig) -> Result<(InverseResult, Vec<TraceRow>), Fault> {
    let mut trace = Vec::new();
    let res = EuclidMachine::<BigInt>::new(p, cfg)?.run(x, Some(&mut trace))?.0;
    Ok((res, trace))
}
