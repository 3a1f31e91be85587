//! Closed-form qubit and time estimates and the RSA-vs-ECC comparison.
//!
//! Time is counted in n-bit classical-quantum additions; multiplying by n
//! gives 1-qubit additions, the unit of the comparison table.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ec_group::{DlpInstance, Point};
use crate::euclid_machine::MachineConfig;
use crate::group_shift::{controlled_shift, ShiftTable};
use crate::reversible_core::{CostLedger, Fault};
use crate::rng::stream;

/// Ratio of a quantum-quantum to a classical-quantum addition.
pub const QQ_FACTOR: f64 = 1.7;
/// Quantum gates per 1-qubit addition, of which a third are Toffoli.
pub const GATES_PER_ADDITION: f64 = 9.0;
pub const TOFFOLI_PER_ADDITION: f64 = 3.0;
pub const DEFAULT_EPSILON: f64 = 10.0;

/// Average a/A/b/B width with register sharing.
pub fn average_width(n: f64, sharing: bool) -> f64 {
    if sharing {
        n / 2.0 + 2.0 * n.sqrt()
    } else {
        n
    }
}

/// T = 2n [5 + 3n + 2(6n + 2(4.5 * 5w))] * 1.7 n-bit additions.
pub fn time_estimate(n: u64, sharing: bool) -> f64 {
    let nf = n as f64;
    let w = average_width(nf, sharing);
    2.0 * nf * (5.0 + 3.0 * nf + 2.0 * (6.0 * nf + 2.0 * (4.5 * 5.0 * w))) * QQ_FACTOR
}

/// 360 n^2 or 205 n^2 + 615 n^1.5.
pub fn time_estimate_rounded(n: u64, sharing: bool) -> f64 {
    let nf = n as f64;
    if sharing {
        205.0 * nf * nf + 615.0 * nf.powf(1.5)
    } else {
        360.0 * nf * nf
    }
}

/// Euclid working space: 5n + 4 log2 n + eps, or 3n + 8 sqrt n + 4 log2 n + eps.
pub fn euclid_space(n: u64, sharing: bool, epsilon: f64) -> f64 {
    let nf = n as f64;
    let pairs = if sharing { 2.0 * nf + 8.0 * nf.sqrt() } else { 4.0 * nf };
    pairs + nf + 4.0 * nf.log2() + epsilon
}

/// f(n) = 7n + 4 log2 n + eps and f'(n) = 5n + 8 sqrt n + 4 log2 n + eps:
/// two n-bit registers plus the Euclid space.
pub fn qubit_estimate(n: u64, sharing: bool, epsilon: f64) -> f64 {
    2.0 * n as f64 + euclid_space(n, sharing, epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub n: u64,
    pub sharing: bool,
    pub epsilon: f64,
    pub qubits_no_sharing: f64,
    pub qubits_sharing: f64,
    pub nbit_additions: f64,
    pub nbit_additions_rounded: f64,
    pub one_qubit_additions: f64,
    pub gates: f64,
    pub toffoli_gates: f64,
}

pub fn estimate(n: u64, sharing: bool, epsilon: f64) -> Result<ResourceEstimate, Fault> {
    if n < 8 {
        return Err(Fault::Domain(format!("n = {n} below 8")));
    }
    let nbit = time_estimate(n, sharing);
    let one = nbit * n as f64;
    Ok(ResourceEstimate {
        n,
        sharing,
        epsilon,
        qubits_no_sharing: qubit_estimate(n, false, epsilon),
        qubits_sharing: qubit_estimate(n, true, epsilon),
        nbit_additions: nbit,
        nbit_additions_rounded: time_estimate_rounded(n, sharing),
        one_qubit_additions: one,
        gates: one * GATES_PER_ADDITION,
        toffoli_gates: one * TOFFOLI_PER_ADDITION,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoringEstimate {
    pub n: u64,
    pub qubits: u64,
    /// 4 n^3 1-qubit additions.
    pub time: f64,
}

pub fn factoring_comparison(n_rsa: u64) -> Result<FactoringEstimate, Fault> {
    if n_rsa < 512 {
        return Err(Fault::Domain(format!("RSA size {n_rsa} below 512")));
    }
    let nf = n_rsa as f64;
    Ok(FactoringEstimate { n: n_rsa, qubits: 2 * n_rsa, time: 4.0 * nf * nf * nf })
}

/// Key sizes of comparable security and the classical effort annotation.
pub const SECURITY_PAIRS: [(u64, u64, &str); 5] = [
    (512, 110, "C"),
    (1024, 163, "C*10^8"),
    (2048, 224, "C*10^17"),
    (3072, 256, "C*10^22"),
    (15360, 512, "C*10^60"),
];

/// Printed table values: RSA time, ECC f'(n), ECC f(n), ECC time.
pub const PRINTED: [(&str, u64, u64, &str); 5] = [
    ("0.54e9", 700, 800, "0.5e9"),
    ("4.3e9", 1000, 1200, "1.6e9"),
    ("34e9", 1300, 1600, "4.0e9"),
    ("120e9", 1500, 1800, "6.0e9"),
    ("1.5e13", 2800, 3600, "50e9"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub rsa_n: u64,
    pub rsa_qubits: u64,
    pub rsa_time: f64,
    pub rsa_time_display: String,
    pub ecc_n: u64,
    pub ecc_qubits_sharing: f64,
    pub ecc_qubits_no_sharing: f64,
    pub ecc_qubits_display: String,
    /// 360 n^3, as printed.
    pub ecc_time: f64,
    pub ecc_time_display: String,
    /// Exact bracket with sharing, times n.
    pub ecc_time_sharing_exact: f64,
    pub classical: String,
}

/// Significant digits of a printed mantissa ("0.54e9" has 2, "50e9" has 1).
pub fn display_digits(printed: &str) -> (usize, i32) {
    let (mant, exp) = printed.split_once('e').expect("printed value has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let trimmed = digits.trim_start_matches('0');
    let sig = if mant.contains('.') { trimmed.len() } else { trimmed.trim_end_matches('0').len() };
    (sig.max(1), exp)
}

/// True when v lies within half a unit of the printed value's last digit.
pub fn within_display(v: f64, printed: &str) -> bool {
    let (sig, _) = display_digits(printed);
    let target: f64 = printed.parse().expect("printed value parses");
    let mag = target.abs().log10().floor() as i32;
    let half_unit = 0.5 * 10f64.powi(mag + 1 - sig as i32);
    (v - target).abs() <= half_unit * (1.0 + 1e-12)
}

/// Rounds to `sig` significant digits, half away from zero.
pub fn round_sig(v: f64, sig: usize) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let mag = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(sig as i32 - 1 - mag);
    // The epsilon guards values such as 1450 that sit exactly on a half.
    (v * scale + 0.5 * v.signum() * (1.0 + 1e-12)).trunc() / scale
}

/// Qubit counts shown to the nearest hundred.
pub fn round_hundreds(v: f64) -> u64 {
    ((v / 100.0 + 0.5 + 1e-12).floor() as u64) * 100
}

/// Renders v in the printed style: mantissa scaled to the printed exponent.
pub fn render_like(v: f64, printed: &str) -> String {
    let (sig, exp) = display_digits(printed);
    let r = round_sig(v, sig);
    let mant = r / 10f64.powi(exp);
    let (m, _) = printed.split_once('e').unwrap();
    let decimals = m.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
    format!("{mant:.decimals$}e{exp}")
}

pub fn comparison_table() -> Vec<TableRow> {
    SECURITY_PAIRS
        .iter()
        .zip(PRINTED.iter())
        .map(|(&(rsa_n, ecc_n, classical), &(rsa_t, _, _, ecc_t))| {
            let f = factoring_comparison(rsa_n).expect("table sizes are valid");
            let e = ecc_n as f64;
            let ecc_time = 360.0 * e * e * e;
            let f_sh = qubit_estimate(ecc_n, true, DEFAULT_EPSILON);
            let f_no = qubit_estimate(ecc_n, false, DEFAULT_EPSILON);
            TableRow {
                rsa_n,
                rsa_qubits: f.qubits,
                rsa_time: f.time,
                rsa_time_display: render_like(f.time, rsa_t),
                ecc_n,
                ecc_qubits_sharing: f_sh,
                ecc_qubits_no_sharing: f_no,
                ecc_qubits_display: format!("{} ({})", round_hundreds(f_sh), round_hundreds(f_no)),
                ecc_time,
                ecc_time_display: render_like(ecc_time, ecc_t),
                ecc_time_sharing_exact: time_estimate(ecc_n, true) * e,
                classical: classical.to_string(),
            }
        })
        .collect()
}

/// Printed strings of one row, for comparison with `comparison_table`.
pub fn printed_row(i: usize) -> (String, String, String) {
    let (rsa_t, fs, fno, ecc_t) = PRINTED[i];
    (rsa_t.to_string(), format!("{fs} ({fno})"), ecc_t.to_string())
}

pub const TABLE_CSV_HEADER: &str =
    "rsa_n,rsa_qubits,rsa_time,rsa_time_display,ecc_n,ecc_qubits_sharing,ecc_qubits_no_sharing,ecc_qubits_display,ecc_time,ecc_time_display,ecc_time_sharing_exact,classical";

impl TableRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{:.6e},{},{},{:.3},{:.3},{},{:.6e},{},{:.6e},{}",
            self.rsa_n,
            self.rsa_qubits,
            self.rsa_time,
            self.rsa_time_display,
            self.ecc_n,
            self.ecc_qubits_sharing,
            self.ecc_qubits_no_sharing,
            self.ecc_qubits_display,
            self.ecc_time,
            self.ecc_time_display,
            self.ecc_time_sharing_exact,
            self.classical
        )
    }
}

/// Aligned text rendering of the table.
pub fn render_table_text(rows: &[TableRow]) -> String {
    let mut s = format!(
        "{:>6} {:>7} {:>8} | {:>4} {:>12} {:>7} | {}\n",
        "RSA n", "qubits", "time", "ECC n", "qubits", "time", "classical"
    );
    for r in rows {
        s.push_str(&format!(
            "{:>6} {:>7} {:>8} | {:>5} {:>12} {:>7} | {}\n",
            r.rsa_n, r.rsa_qubits, r.rsa_time_display, r.ecc_n, r.ecc_qubits_display, r.ecc_time_display, r.classical
        ));
    }
    s
}

/// Ledger of one full run: 2n controlled shifts on the accumulator, with
/// random exponent bits.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedRun {
    pub n: u64,
    pub shifts: u64,
    pub lost_shifts: u64,
    pub ledger: CostLedger,
    /// Ledger total in n-bit classical-quantum additions.
    pub nbit_additions: f64,
}

pub fn simulated_run(inst: &DlpInstance, cfg: &MachineConfig, seed: u64) -> Result<SimulatedRun, Fault> {
    let n = inst.curve.p().bits();
    let table = ShiftTable::new(inst, n as u32)?;
    let mut rng = stream(seed, 0x5e5);
    let k = rng.gen_range(1..inst.q);
    let mut acc = inst.curve.scalar_mul(&k.into(), &inst.base);
    let mut ledger = CostLedger::new();
    let mut lost = 0;
    for a in table.p_multiples.iter().chain(&table.q_multiples) {
        let bit: bool = rng.gen();
        let out = controlled_shift(bit, &inst.curve, &acc, a, cfg)?;
        ledger.absorb(&out.ledger);
        if out.lost.is_some() {
            lost += 1;
            // A lost branch is reset to a fresh random point to keep walking.
            acc = inst.curve.scalar_mul(&rng.gen_range(1..inst.q).into(), &inst.base);
        } else {
            acc = out.result;
        }
        debug_assert!(acc != Point::Infinity || bit);
    }
    let units = ledger.one_qubit_additions();
    Ok(SimulatedRun {
        n,
        shifts: 2 * n,
        lost_shifts: lost,
        nbit_additions: units / n as f64,
        ledger,
    })
}
