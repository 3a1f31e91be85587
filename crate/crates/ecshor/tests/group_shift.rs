use ecshor::ec_group::{find_instance_with_order, CurveParams, ExceptionalCase, Point};
use ecshor::euclid_machine::{EuclidMachine, MachineConfig};
use ecshor::group_shift::*;
use ecshor::numtheory::{mod_inverse, random_prime};
use ecshor::reversible_core::{CostClass, CostLedger, Fault};
use ecshor::rng::stream;
use num_bigint::{BigInt, BigUint, RandBigInt};
use proptest::prelude::*;
use rand::Rng;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn toy() -> CurveParams {
    CurveParams::small(23, 1, 1).unwrap()
}

#[test]
fn div_of_zero_is_zero() {
    let r = div_quantum(&big(5), &big(0), &big(23), &MachineConfig::default()).unwrap();
    assert_eq!(r.value, big(0));
    assert!(r.lost.is_none());
}

#[test]
fn div_worked_example() {
    let r = div_quantum(&big(96), &big(1), &big(257), &MachineConfig::default()).unwrap();
    assert_eq!(r.value, big(83));
    assert!(r.garbage_bits > 0);
}

#[test]
fn div_by_zero_is_a_fault() {
    let e = div_quantum(&big(0), &big(3), &big(23), &MachineConfig::default()).unwrap_err();
    assert_eq!(e, Fault::DivByZero);
}

#[test]
fn div_matches_oracle_on_random_inputs() {
    let mut rng = stream(21, 0);
    let cfg = MachineConfig::unbounded();
    for _ in 0..10_000 {
        let bits = rng.gen_range(3..64);
        let p = random_prime(bits, &mut rng);
        let x = rng.gen_biguint_range(&big(1), &p);
        let y = rng.gen_biguint_range(&big(0), &p);
        let r = div_quantum(&x, &y, &p, &cfg).unwrap();
        let want = (&y * mod_inverse(&x, &p).unwrap()) % &p;
        assert_eq!(r.value, want);
        let back = div_quantum_reverse(&x, &r.value, &p, &cfg).unwrap();
        assert_eq!(back.value, y);
    }
}

#[test]
fn div_ledger_is_two_euclid_runs_and_two_products() {
    let p = big(257);
    let cfg = MachineConfig::default();
    let r = div_quantum(&big(96), &big(5), &p, &cfg).unwrap();
    let cost = ShiftCost::new(&p, &cfg).unwrap();
    let mut want = CostLedger::new();
    for _ in 0..2 {
        want.absorb(&cost.euclid);
        want.absorb(&cost.multiplication);
    }
    assert_eq!(r.ledger, want);
    assert_eq!(cost.multiplication.events(CostClass::QuantumQuantumAdd), 3 * 9);
}

#[test]
fn exhaustive_toy_curve_against_group_law() {
    let c = toy();
    let pts = c.enumerate_points();
    let cfg = MachineConfig::default();
    let (mut generic, mut flagged) = (0, 0);
    for s in &pts {
        for a_pt in pts.iter().filter(|p| !p.is_infinity()) {
            let a = ShiftConstant::from_point(a_pt).unwrap();
            let out = group_shift(&c, s, &a, &cfg).unwrap();
            match out.lost {
                None => {
                    generic += 1;
                    assert_eq!(out.result, c.point_add(s, a_pt), "S = {s:?}, A = {a_pt:?}");
                    assert_eq!(c.point_add_generic(s, a_pt).unwrap(), out.result);
                    assert_eq!(group_shift_reverse(&c, &out.result, &a, &cfg).unwrap(), *s);
                }
                Some(loss) => {
                    flagged += 1;
                    assert_eq!(out.result, *s);
                    match loss {
                        ShiftLoss::Exceptional(ExceptionalCase::Identity) => assert!(s.is_infinity()),
                        ShiftLoss::Exceptional(ExceptionalCase::Doubling) => assert_eq!(s, a_pt),
                        ShiftLoss::Exceptional(ExceptionalCase::InversePair) => assert_eq!(*s, c.negate(a_pt)),
                        ShiftLoss::DegenerateUncompute => {
                            assert_eq!(c.point_add(s, a_pt), c.negate(a_pt))
                        }
                        ShiftLoss::Euclid(l) => panic!("unexpected Euclid loss {l:?}"),
                    }
                }
            }
        }
    }
    assert!(generic > 0 && flagged > 0);
}

#[test]
fn inverse_pair_is_flagged_and_untouched() {
    let c = toy();
    let a_pt = Point::affine(3, 10);
    assert!(c.contains(&a_pt));
    let a = ShiftConstant::from_point(&a_pt).unwrap();
    let s = c.negate(&a_pt);
    let out = group_shift(&c, &s, &a, &MachineConfig::default()).unwrap();
    assert_eq!(out.lost, Some(ShiftLoss::Exceptional(ExceptionalCase::InversePair)));
    assert_eq!(out.result, s);
}

#[test]
fn shift_ledger_is_the_fixed_decomposition() {
    let c = toy();
    let cfg = MachineConfig::default();
    let p = c.p();
    let n = p.bits();
    let euclid = EuclidMachine::<BigInt>::new(p, &cfg).unwrap().run_ledger();
    let mut want = CostLedger::new();
    for _ in 0..4 {
        want.absorb(&euclid);
    }
    // 5 products of 3n additions plus 5 constant additions
    want.charge_n(CostClass::QuantumQuantumAdd, n, 5 * 3 * n + 5);
    assert_eq!(ShiftCost::new(p, &cfg).unwrap().total(), want);
    for s in c.enumerate_points() {
        let a = ShiftConstant::from_point(&Point::affine(0, 1)).unwrap();
        let out = group_shift(&c, &s, &a, &cfg).unwrap();
        assert_eq!(out.ledger, want, "ledger must not depend on the data");
    }
}

#[test]
fn controlled_shift_branches() {
    let c = toy();
    let cfg = MachineConfig::default();
    let s = Point::affine(0, 1);
    let a = ShiftConstant::from_point(&Point::affine(1, 7)).unwrap();
    let off = controlled_shift(false, &c, &s, &a, &cfg).unwrap();
    assert_eq!(off.result, s);
    assert!(off.lost.is_none());
    let on = controlled_shift(true, &c, &s, &a, &cfg).unwrap();
    let plain = group_shift(&c, &s, &a, &cfg).unwrap();
    assert_eq!(on.result, plain.result);
    assert_eq!(on.ledger, off.ledger);
    assert_eq!(on.ledger.events(CostClass::Control), plain.ledger.events(CostClass::Control) + 1);
}

#[test]
fn shift_table_entries_are_doublings() {
    let inst = find_instance_with_order(101, 3).unwrap();
    let t = ShiftTable::new(&inst, 7).unwrap();
    for i in 0..7u32 {
        let want = inst.curve.scalar_mul(&(BigUint::from(1u32) << i), &inst.base);
        assert_eq!(t.p_multiples[i as usize].point(), want);
        let want_q = inst.curve.scalar_mul(&(BigUint::from(1u32) << i), &inst.target);
        assert_eq!(t.q_multiples[i as usize].point(), want_q);
    }
}

#[test]
fn exponent_space_classification_matches_points() {
    let inst = find_instance_with_order(101, 4).unwrap();
    let q = inst.q;
    let c = &inst.curve;
    let multiples: Vec<Point> = (0..q).map(|k| c.scalar_mul(&big(k), &inst.base)).collect();
    for a_idx in [1u64, 2, 37, 100] {
        let a = ShiftConstant::from_point(&multiples[a_idx as usize]).unwrap();
        for s in 0..q {
            let want = if s == 0 {
                Some(ShiftLoss::Exceptional(ExceptionalCase::Identity))
            } else if s == a_idx {
                Some(ShiftLoss::Exceptional(ExceptionalCase::Doubling))
            } else if s == q - a_idx {
                Some(ShiftLoss::Exceptional(ExceptionalCase::InversePair))
            } else if s == (2 * (q - a_idx)) % q {
                Some(ShiftLoss::DegenerateUncompute)
            } else {
                None
            };
            assert_eq!(classify(c, &multiples[s as usize], &a), want);
        }
    }
}

#[test]
fn audit_matches_four_n_over_q() {
    let inst = find_instance_with_order(1009, 1).unwrap();
    let a = fidelity_audit(&inst, 10, 200_000, 7);
    assert_eq!(a.infinity_violations, 0);
    assert!((a.mean_loss - a.predicted).abs() < 4.0 * a.std_error, "{a:?}");
    assert!((a.predicted - 0.0396).abs() < 1e-3);
    // Only half the steps are controlled on.
    assert!((a.controlled_mean_loss / a.mean_loss - 0.5).abs() < 0.05);
    let b = fidelity_audit(&inst, 20, 200_000, 8);
    let ratio = b.mean_loss / a.mean_loss;
    assert!((ratio - 2.0).abs() < 0.15, "ratio {ratio}");
}

#[test]
fn audit_is_deterministic() {
    let inst = find_instance_with_order(101, 2).unwrap();
    assert_eq!(fidelity_audit(&inst, 7, 1000, 5), fidelity_audit(&inst, 7, 1000, 5));
}

fn instances_1009() -> &'static [ecshor::ec_group::DlpInstance] {
    static CELL: std::sync::OnceLock<Vec<ecshor::ec_group::DlpInstance>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| (0..4).map(|s| find_instance_with_order(1009, s).unwrap()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_instance_shifts_agree_with_group_law(seed in any::<u64>(), s in 1u64..1009, ai in 0u32..10) {
        let inst = &instances_1009()[(seed % 4) as usize];
        let c = &inst.curve;
        let sp = c.scalar_mul(&big(s), &inst.base);
        let table = ShiftTable::new(&inst, 10).unwrap();
        let a = &table.p_multiples[ai as usize];
        let cfg = MachineConfig::default();
        let out = group_shift(c, &sp, a, &cfg).unwrap();
        if out.lost.is_none() {
            prop_assert_eq!(&out.result, &c.point_add(&sp, &a.point()));
            prop_assert_eq!(group_shift_reverse(c, &out.result, a, &cfg).unwrap(), sp);
        }
    }
}
