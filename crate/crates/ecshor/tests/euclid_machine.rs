use ecshor::euclid_machine::*;
use ecshor::reversible_core::Fault;
use ecshor::numtheory::{extended_euclid_rows, mod_inverse, random_prime};
use ecshor::rng::stream;
use num_bigint::{BigInt, BigUint, RandBigInt};
use proptest::prelude::*;
use rand::Rng;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

#[test]
fn worked_inverse_96_mod_257() {
    let r = run_inverse(&big(96), &big(257), &MachineConfig::default()).unwrap();
    assert_eq!(r.inverse, Some(big(83)));
    let qs: Vec<u64> = r.quotients.iter().map(|q| q.try_into().unwrap()).collect();
    assert_eq!(qs, vec![2, 1, 2, 10, 3]);
    assert_eq!(r.cycles_used, 29);
    assert_eq!(r.budget, 41);
    assert_eq!(r.halting_count, 12);
    assert!(r.failure.is_none());
}

#[test]
fn table_rows_match_classical_extended_euclid() {
    let rows = extended_euclid_rows(&big(257), &big(96));
    let want: Vec<(i64, u64)> = vec![(0, 257), (1, 96), (-2, 65), (3, 31), (-8, 3), (83, 1), (-257, 0)];
    let got: Vec<(i64, u64)> =
        rows.iter().map(|(a, r)| (a.try_into().unwrap(), r.try_into().unwrap())).collect();
    assert_eq!(got, want);
}

#[test]
fn first_iteration_matches_worked_row() {
    let m = EuclidMachine::<i128>::new(&big(257), &MachineConfig::default()).unwrap();
    let mut st = m.initial(&big(96)).unwrap();
    loop {
        let info = m.forward_cycle(&mut st).unwrap();
        if info.boundary {
            break;
        }
    }
    let r = &st.regs;
    assert_eq!((r.a, r.big_a, r.b, r.big_b), (1, 96, -2, 65));
}

#[test]
fn self_inverse_of_one() {
    let r = run_inverse(&big(1), &big(5), &MachineConfig::default()).unwrap();
    assert_eq!(r.inverse, Some(big(1)));
    assert_eq!(r.cycles_used, cycle_count(&big(5), &big(1)));
}

#[test]
fn domain_faults() {
    assert!(run_inverse(&big(0), &big(257), &MachineConfig::default()).is_err());
    assert!(run_inverse(&big(257), &big(257), &MachineConfig::default()).is_err());
    assert!(matches!(run_inverse(&big(2), &big(4), &MachineConfig::default()), Err(Fault::Domain(_))));
    assert_eq!(run_inverse(&big(3), &big(4), &MachineConfig::default()).unwrap().inverse, Some(big(3)));
}

#[test]
fn closed_form_cycle_counts() {
    assert_eq!(cycle_count(&big(4), &big(1)), 9);
    assert_eq!(cycle_count(&big(2), &big(1)), 5);
    assert_eq!(cycle_count(&big(257), &big(96)), 29);
    assert_eq!(cycle_count_u64(257, 96), 29);
}

#[test]
fn exhaustive_small_prime_against_oracle() {
    let p = big(10007);
    let mf = EuclidMachine::<i128>::new(&p, &MachineConfig::unbounded()).unwrap();
    for x in 1..10007u64 {
        let (r, _) = mf.run(&big(x), None).unwrap();
        assert_eq!(r.inverse, mod_inverse(&big(x), &p), "x = {x}");
        assert_eq!(r.cycles_used, cycle_count_u64(10007, x));
    }
}

#[test]
fn default_cap_flags_huge_quotients_at_p_10007() {
    // x = 1 and x = 2 have 14- and 13-bit first quotients, above the 12-bit cap.
    let p = big(10007);
    for x in [1u64, 2] {
        let r = run_inverse(&big(x), &p, &MachineConfig::no_sharing()).unwrap();
        assert_eq!(r.failure, Some(ModeledLoss::BoundedQuotientOverflow));
        assert!(r.inverse.is_none());
    }
    let r = run_inverse(&big(3), &p, &MachineConfig::no_sharing()).unwrap();
    assert!(r.failure.is_none());
}

#[test]
fn big_and_fast_words_agree() {
    let mut rng = stream(11, 0);
    for _ in 0..50 {
        let p = random_prime(100, &mut rng);
        let x = rng.gen_biguint_range(&big(1), &p);
        let cfg = MachineConfig::default();
        let (fast, _) = EuclidMachine::<i128>::new(&p, &cfg).unwrap().run(&x, None).unwrap();
        let (slow, _) = EuclidMachine::<BigInt>::new(&p, &cfg).unwrap().run(&x, None).unwrap();
        assert_eq!(fast, slow);
    }
}

#[test]
fn large_modulus_uses_big_words() {
    let mut rng = stream(12, 0);
    let p = random_prime(256, &mut rng);
    for _ in 0..5 {
        let x = rng.gen_biguint_range(&big(1), &p);
        let r = run_inverse(&x, &p, &MachineConfig::unbounded()).unwrap();
        assert_eq!(r.inverse, mod_inverse(&x, &p));
        assert_eq!(r.cycles_used, cycle_count(&p, &x));
    }
}

#[test]
fn backward_replay_restores_initial_state() {
    let mut rng = stream(13, 0);
    for _ in 0..300 {
        let bits = rng.gen_range(3..64);
        let p = random_prime(bits, &mut rng);
        let x = rng.gen_biguint_range(&big(1), &p);
        let m = EuclidMachine::<i128>::new(&p, &MachineConfig::unbounded()).unwrap();
        let (res, mut st) = m.run(&x, None).unwrap();
        let mut l = ecshor::reversible_core::CostLedger::new();
        m.replay_backward(&mut st, res.budget, &mut l).unwrap();
        assert_eq!(st, m.initial(&x).unwrap());
        assert_eq!(l, res.ledger);
    }
}

#[test]
fn tracker_sizes_match_machine_registers() {
    let mut rng = stream(14, 0);
    for _ in 0..200 {
        let bits = rng.gen_range(3..40);
        let p = random_prime(bits, &mut rng);
        let x = rng.gen_biguint_range(&big(1), &p);
        let m = EuclidMachine::<i128>::new(&p, &MachineConfig::unbounded()).unwrap();
        let mut st = m.initial(&x).unwrap();
        let mut machine_sizes = vec![st.sizes()];
        while !st.halted() {
            m.forward_cycle(&mut st).unwrap();
            machine_sizes.push(st.sizes());
        }
        let mut tracked = Vec::new();
        size_trajectory(&p, &x, |r, s| {
            assert_eq!(r as usize, tracked.len());
            tracked.push(s);
        });
        assert_eq!(tracked, machine_sizes, "p = {p}, x = {x}");
    }
}

#[test]
fn verify_bound_tight_case() {
    let rep = verify_bound(4);
    assert!(rep.violations.is_empty());
    assert_eq!(rep.argmax, (4, 1));
    assert_eq!(rep.argmax_cycles, 9);
    assert_eq!(rep.max_ratio, 4.5);
    let rep3 = verify_bound(3);
    assert_eq!(rep3.pairs_checked, 2);
    assert!(rep3.violations.is_empty());
}

#[test]
fn p_equal_two_is_outside_the_lemma() {
    assert!(!within_bound(2, cycle_count_u64(2, 1)));
}

#[test]
fn exact_average_for_two_bits() {
    // Only p = 3, x = 2 qualifies: quotients 1, 2.
    assert_eq!(exact_average_cycles(2), Some(6.0));
    let s = average_cycles(2, 1000, 1);
    assert_eq!(s.mean, 6.0);
}

#[test]
fn quotient_tail_is_one_at_q0_one() {
    let law = quotient_distribution(64, 100_000, 3);
    assert_eq!(law.tail[0].empirical, 1.0);
    assert!((law.tail[1].predicted - 1.5f64.log2()).abs() < 1e-15);
}

#[test]
fn perturbation_at_least_one() {
    // b = 1 is one bit above its expected size of 0 at the start.
    assert!(perturbation(&big(257), &big(96)) >= 1);
}

#[test]
fn sharing_overflow_is_rare_at_163_bits() {
    let mut rng = stream(15, 0);
    let mut lost = 0;
    let trials = 300;
    for _ in 0..trials {
        let p = random_prime(163, &mut rng);
        let x = rng.gen_biguint_range(&big(2), &p);
        let r = run_inverse(&x, &p, &MachineConfig::default()).unwrap();
        if r.failure == Some(ModeledLoss::SharingOverflow) {
            lost += 1;
        } else if r.failure.is_none() {
            assert_eq!(r.inverse, mod_inverse(&x, &p));
        }
    }
    assert_eq!(lost, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn machine_agrees_with_oracle(seed in any::<u64>(), bits in 3u64..64) {
        let mut rng = stream(seed, 0);
        let p = random_prime(bits, &mut rng);
        let x = rng.gen_biguint_range(&big(1), &p);
        let r = run_inverse(&x, &p, &MachineConfig::unbounded()).unwrap();
        prop_assert_eq!(r.inverse, mod_inverse(&x, &p));
        prop_assert_eq!(r.cycles_used, cycle_count(&p, &x));
        prop_assert_eq!(r.cycles_used + r.halting_count, r.budget);
    }

    #[test]
    fn cycle_count_within_lemma(p in 3u64..100_000, x in 1u64..100_000) {
        let x = x % p;
        prop_assume!(x > 0 && num_integer::gcd(p, x) == 1);
        prop_assert!(within_bound(p, cycle_count_u64(p, x)));
    }

    #[test]
    fn step_then_unstep_is_identity(seed in any::<u64>(), bits in 3u64..64, steps in 0u64..200) {
        let mut rng = stream(seed, 1);
        let p = random_prime(bits, &mut rng);
        let x = rng.gen_biguint_range(&big(1), &p);
        let m = EuclidMachine::<i128>::new(&p, &MachineConfig::unbounded()).unwrap();
        let mut st = m.initial(&x).unwrap();
        for _ in 0..steps.min(m.config().budget) {
            m.forward_cycle(&mut st).unwrap();
        }
        let before = st.clone();
        m.forward_cycle(&mut st).unwrap();
        m.backward_cycle(&mut st).unwrap();
        prop_assert_eq!(st, before);
    }
}

#[test]
fn bounded_quotient_rate_below_two_over_n_cubed() {
    let n = 16u64;
    let law = quotient_distribution(n, 1_000_000, 5);
    assert!(law.over_cap > 0);
    assert!(law.over_cap_rate <= 2.0 / (n as f64).powi(3), "{}", law.over_cap_rate);
}
