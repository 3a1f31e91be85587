//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAILURES` are reproduced faithfully and are
//! known not to meet their target; they print FAIL (or XPASS) without
//! failing the run. Any other FAIL makes the process exit nonzero.

use std::f64::consts::PI;
use std::time::Instant;

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use ecshor::dlp_sim::*;
use ecshor::ec_group::{find_instance_with_order, find_toy_instance};
use ecshor::euclid_machine::*;
use ecshor::group_shift::fidelity_audit;
use ecshor::numtheory::{euclid_quotients, is_prime_u64, mod_inverse, random_prime};
use ecshor::resource_model::*;
use ecshor::reversible_core::CostLedger;
use ecshor::rng::stream;

/// Perturbation table, frozen success value and the RSA 15360 time cell.
const EXPECTED_FAILURES: [u32; 3] = [6, 10, 13];

const SEED: u64 = 2026;

/// Exact window-3 success probability at q = 1009, d = 756, n = 12.
const FROZEN_SUCCESS: f64 = 0.98850056023154154;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1() -> Outcome {
    let r = run_inverse(&big(96), &big(257), &MachineConfig::default()).unwrap();
    let qs: Vec<u64> = r.quotients.iter().map(|q| q.try_into().unwrap()).collect();
    let (g, gq) = euclid_quotients(&big(1085), &big(378));
    let gq: Vec<u64> = gq.iter().map(|q| q.try_into().unwrap()).collect();
    let pass = r.inverse == Some(big(83)) && qs == [2, 1, 2, 10, 3] && g == big(7) && gq == [2, 1, 6, 1, 2, 2];
    outcome(pass, format!("96^-1 mod 257 = {:?}, quotients {qs:?}; gcd(1085, 378) = {g}, quotients {gq:?}", r.inverse))
}

/// Random (p, x) with p a prime of 3..=64 bits.
fn random_inputs(n: usize, id: u64) -> Vec<(BigUint, BigUint)> {
    let mut rng = stream(SEED, id);
    (0..n)
        .map(|_| {
            let bits = rng.gen_range(3..=64);
            let p = random_prime(bits, &mut rng);
            let x = rng.gen_biguint_range(&big(1), &p);
            (p, x)
        })
        .collect()
}

/// Machine runs checked against the cycle formula: (runs, mismatches).
static CYCLE_MISMATCHES: std::sync::Mutex<(u64, u64)> = std::sync::Mutex::new((0, 0));

fn record_cycles(used: u64, want: u64) {
    let mut m = CYCLE_MISMATCHES.lock().unwrap();
    m.0 += 1;
    m.1 += (used != want) as u64;
}

fn c2() -> Outcome {
    let cfg = MachineConfig::unbounded();
    let p = big(10007);
    let m = EuclidMachine::<i128>::new(&p, &cfg).unwrap();
    let mut bad = 0;
    for x in 1..10007u64 {
        let (r, _) = m.run(&big(x), None).unwrap();
        bad += (r.inverse != mod_inverse(&big(x), &p)) as u64;
        record_cycles(r.cycles_used, cycle_count_u64(10007, x));
    }
    let mut bad_random = 0;
    for (p, x) in random_inputs(10_000, 1) {
        let r = run_inverse(&x, &p, &cfg).unwrap();
        bad_random += (r.inverse != mod_inverse(&x, &p)) as u64;
        record_cycles(r.cycles_used, cycle_count(&p, &x));
    }
    outcome(
        bad == 0 && bad_random == 0,
        format!("p = 10007: {bad} mismatches over 10006 x; random p <= 64 bits: {bad_random} mismatches over 10^4"),
    )
}

fn c3() -> Outcome {
    let cfg = MachineConfig::unbounded();
    let mut bad = 0;
    for (p, x) in random_inputs(10_000, 2) {
        let m = EuclidMachine::<i128>::new(&p, &cfg).unwrap();
        let (res, mut st) = m.run(&x, None).unwrap();
        record_cycles(res.cycles_used, cycle_count(&p, &x));
        let mut l = CostLedger::new();
        m.replay_backward(&mut st, res.cycles_used + res.halting_count, &mut l).unwrap();
        bad += (st != m.initial(&x).unwrap() || l != res.ledger) as u64;
    }
    outcome(bad == 0, format!("{bad} of 10^4 backward replays differ from the initial state"))
}

fn c4() -> Outcome {
    let r = verify_bound(10_000);
    let tight = cycle_count_u64(4, 1);
    let pass = r.violations.is_empty() && tight == 9 && r.max_ratio == 4.5 && r.argmax == (4, 1);
    outcome(
        pass,
        format!(
            "{} pairs, {} violations, max ratio {} at {:?} (t = {})",
            r.pairs_checked,
            r.violations.len(),
            r.max_ratio,
            r.argmax,
            r.argmax_cycles
        ),
    )
}

fn c5() -> Outcome {
    // The inputs of the bound check, on the machine itself.
    let cfg = MachineConfig::unbounded();
    for p in 3..=10_000u64 {
        let m = EuclidMachine::<i128>::new(&big(p), &cfg).unwrap();
        let prime = is_prime_u64(p);
        for x in 1..p {
            if !prime && num_integer::gcd(x, p) != 1 {
                continue;
            }
            let (res, _) = m.run(&big(x), None).unwrap();
            record_cycles(res.cycles_used, cycle_count_u64(p, x));
        }
    }
    let (checked, bad) = *CYCLE_MISMATCHES.lock().unwrap();
    outcome(checked > 0 && bad == 0, format!("{bad} mismatches between cycles_used and the formula over {checked} runs"))
}

fn c6() -> Outcome {
    let targets = [(110u64, 11.90, 1.589), (163, 14.13, 1.878), (512, 24.20, 3.084)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, mean, sd) in targets {
        let s = perturbation_stats(n, 100_000, SEED);
        let ok = (s.mean / mean - 1.0).abs() <= 0.03 && (s.std_dev / sd - 1.0).abs() <= 0.15;
        pass &= ok;
        parts.push(format!("n={n}: mean {:.2} (want {mean}), sd {:.3} (want {sd})", s.mean, s.std_dev));
    }
    outcome(pass, parts.join("; "))
}

fn c7() -> Outcome {
    let law = quotient_distribution(163, 1_000_000, SEED);
    let worst = law.tail[..16].iter().map(|t| (t.empirical - t.predicted).abs()).fold(0.0, f64::max);
    outcome(worst <= 0.01, format!("max |P(q >= q0) - log2(1 + 1/q0)| over q0 = 1..16 is {worst:.5}"))
}

fn c8() -> Outcome {
    let s = average_cycles(163, 10_000, SEED);
    let rel = s.mean / 570.5 - 1.0;
    outcome(rel.abs() <= 0.03, format!("mean t = {:.2} vs 570.5 ({:+.2}%)", s.mean, 100.0 * rel))
}

fn c9() -> Outcome {
    let pk = PeakDistribution::new(1, 2, 1 << 20).unwrap();
    let want = 4.0 / (PI * PI);
    let e_pair = (pk.pmf(0) - want).abs().max((pk.pmf(1) - want).abs());
    let e_norm = (pk.total_mass() - 1.0).abs();
    let mut rng = stream(SEED, 9);
    let c = PeakDistribution::from_real(rng.gen::<f64>() * 1024.0, 1024).unwrap();
    let samples: Vec<f64> = (0..100_000).map(|_| c.offset(c.sample(&mut rng)).abs()).collect();
    let mut tails = Vec::new();
    let mut tail_ok = true;
    for delta in [10.0, 20.0, 50.0] {
        let t = samples.iter().filter(|&&o| o > delta).count() as f64 / samples.len() as f64;
        tail_ok &= t <= 2.0 / delta;
        tails.push(format!("{t:.4} <= {:.3}", 2.0 / delta));
    }
    outcome(
        e_pair < 1e-9 && e_norm < 1e-9 && tail_ok,
        format!("|pmf - 4/pi^2| = {e_pair:.1e}, |mass - 1| = {e_norm:.1e}, tails {}", tails.join(", ")),
    )
}

fn c10() -> Outcome {
    let inst = find_instance_with_order(1009, 1).unwrap();
    let n = 64 - (inst.q - 1).leading_zeros() + 2;
    let exact = success_probability(inst.q, inst.d, n, 3).unwrap();
    let frozen_ok = (exact.probability - FROZEN_SUCCESS).abs() < 1e-12 && exact.truncation_bound == 0.0;
    let runs = 10_000u64;
    let mut hits = 0u64;
    let mut wrong = 0u64;
    for t in 0..runs {
        let rec = run_trial(&inst, n, 3, SimMode::Analytic, t, &mut stream(SEED, t)).unwrap();
        if let Some(d) = rec.recovered_d {
            hits += 1;
            wrong += (inst.curve.scalar_mul(&big(d), &inst.base) != inst.target) as u64;
        }
    }
    let rate = hits as f64 / runs as f64;
    let p = exact.probability;
    let half = 2.5758293035489 * (p * (1.0 - p) / runs as f64).sqrt();
    let in_ci = (rate - p).abs() <= half;
    outcome(
        p >= 0.99 && frozen_ok && in_ci && wrong == 0,
        format!(
            "q = {}, d = {}, n = {n}, window 3: exact {p:.6} (target >= 0.99), sampled {rate:.4} in [{:.4}, {:.4}]: {in_ci}, {wrong} unverified",
            inst.q,
            inst.d,
            p - half,
            p + half
        ),
    )
}

fn c11() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (q, n) in [(5u64, 4u32), (11, 5), (101, 7)] {
        let inst = find_instance_with_order(q, 1).unwrap();
        let a = analytic_law(q, inst.d, n).unwrap();
        let s = semiclassical_law(q, inst.d, n, MeasureOrder::HighestFirst).unwrap();
        let neg = semiclassical_law(q, inst.d, n, MeasureOrder::LowestFirst).unwrap();
        let tv = a.total_variation(&s);
        let tv_neg = a.total_variation(&neg);
        let mut rng = stream(SEED, 11);
        let recs: Vec<_> = (0..100_000)
            .map(|t| simulate_semiclassical(&inst, n, t, &mut rng, false, MeasureOrder::HighestFirst).unwrap())
            .collect();
        let counts = histogram(&recs, 1 << n);
        let (stat, dof) = chi_square(&a, &counts, 5.0);
        let pval = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
        let ok = tv < 0.01 && tv_neg > 0.01 && pval > 0.001;
        pass &= ok;
        parts.push(format!(
            "q={q}: TV {tv:.1e}, reversed order {tv_neg:.3}, 10^5-sample chi2 p = {pval:.3} (sample TV {:.3})",
            empirical_tv(&a, &counts)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c12() -> Outcome {
    let inst = find_instance_with_order(1009, 1).unwrap();
    let a = fidelity_audit(&inst, 10, 200_000, SEED);
    let z = (a.mean_loss - a.predicted) / a.std_error;
    outcome(
        z.abs() <= 3.0 && a.infinity_violations == 0,
        format!(
            "q = {}, n = 10: loss {:.5} vs 4n/q = {:.5} ({z:+.2} SE); controlled {:.5}, S = -2A {:.5}",
            a.q, a.mean_loss, a.predicted, a.controlled_mean_loss, a.degenerate_mean_loss
        ),
    )
}

fn c13() -> Outcome {
    let rows = comparison_table();
    let mut bad = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let (rsa, qubits, ecc) = printed_row(i);
        for (got, want) in [(&r.rsa_time_display, &rsa), (&r.ecc_qubits_display, &qubits), (&r.ecc_time_display, &ecc)] {
            if got != want {
                bad.push(format!("{got} printed as {want}"));
            }
        }
    }
    let q = qubit_estimate(163, true, 10.0);
    let pass = bad.is_empty() && (950.0..=1050.0).contains(&q);
    let cells = if bad.is_empty() { "all 15 cells match".to_string() } else { format!("mismatched: {}", bad.join(", ")) };
    outcome(pass, format!("{cells}; qubit_estimate(163, sharing) = {q:.2}"))
}

fn c14() -> Outcome {
    let inst = find_toy_instance(16, 2).unwrap();
    let run = simulated_run(&inst, &MachineConfig::default(), SEED).unwrap();
    let est = time_estimate(16, true);
    let ratio = run.nbit_additions / est;
    let plain = simulated_run(&inst, &MachineConfig::no_sharing(), SEED).unwrap();
    let plain_ratio = plain.nbit_additions / time_estimate(16, false);
    outcome(
        (ratio - 1.0).abs() <= 0.15,
        format!(
            "n = 16: ledger {:.0} vs estimate {est:.0} n-bit additions (ratio {ratio:.3}); without sharing {plain_ratio:.4}; \
             shared widths are capped at n bits, which the average-width formula ignores",
            run.nbit_additions
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 14] = [
        (1, "worked examples", c1),
        (2, "inverse correctness", c2),
        (3, "reversibility", c3),
        (4, "cycle bound", c4),
        (5, "cycle formula", c5),
        (6, "size perturbation table", c6),
        (7, "quotient law", c7),
        (8, "average cycles", c8),
        (9, "peak law", c9),
        (10, "end-to-end DLP", c10),
        (11, "simulator equivalence", c11),
        (12, "fidelity loss", c12),
        (13, "resource table", c13),
        (14, "cost ledger", c14),
    ];
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        let expected = EXPECTED_FAILURES.contains(&id);
        let tag = match (o.pass, expected) {
            (true, false) => "PASS",
            (true, true) => "XPASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag}: {name}: {} [{secs:.1}s]", o.detail);
        if !o.pass && !expected {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
