//! Discrete-log simulation on toy instances: the peak-mixture law of the
//! size-2^n Fourier transform, a semiclassical step-by-step simulator,
//! classical post-processing and exact success probabilities.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ec_group::DlpInstance;
use crate::group_shift::ShiftLoss;

/// Largest q for the analytic sampler and exact success probabilities.
pub const MAX_ANALYTIC_Q: u64 = 1 << 20;
/// Largest q for the semiclassical simulator.
pub const MAX_SEMICLASSICAL_Q: u64 = 1 << 14;
/// Largest Fourier size handled.
pub const MAX_FOURIER_BITS: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("size limit: {0}")]
    SizeLimit(String),
    #[error("bad parameter: {0}")]
    Parameter(String),
}

/// Peak |sin(pi(x - c)) / (N sin(pi(x - c)/N))|^2 over x in Z_N, with the
/// center c = num/den kept exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeakDistribution {
    size: u64,
    num: i128,
    den: u64,
}

/// Dyadic scale used for real-valued centers.
const REAL_DEN: u64 = 1 << 40;

impl PeakDistribution {
    pub fn new(num: i128, den: u64, size: u64) -> Result<Self, SimError> {
        if !size.is_power_of_two() || size.trailing_zeros() > MAX_FOURIER_BITS {
            return Err(SimError::Parameter(format!("N = {size} must be a power of two up to 2^40")));
        }
        if den == 0 {
            return Err(SimError::Parameter("zero denominator".into()));
        }
        let m = size as i128 * den as i128;
        Ok(PeakDistribution { size, num: num.rem_euclid(m), den })
    }

    /// Peak at N k / q.
    pub fn for_peak(k: u64, q: u64, size: u64) -> Result<Self, SimError> {
        Self::new(size as i128 * k as i128, q, size)
    }

    /// Center given as a real number, rounded to a multiple of 2^-40.
    pub fn from_real(center: f64, size: u64) -> Result<Self, SimError> {
        Self::new((center * REAL_DEN as f64).round() as i128, REAL_DEN, size)
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn center(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Largest integer not above the center.
    pub fn floor(&self) -> u64 {
        (self.num / self.den as i128) as u64
    }

    pub fn has_integer_center(&self) -> bool {
        self.num % self.den as i128 == 0
    }

    /// (x - c) * den reduced into (-N den / 2, N den / 2].
    fn offset_scaled(&self, x: u64) -> i128 {
        let m = self.size as i128 * self.den as i128;
        let mut r = (x as i128 * self.den as i128 - self.num).rem_euclid(m);
        if 2 * r > m {
            r -= m;
        }
        r
    }

    /// Signed circular distance x - c.
    pub fn offset(&self, x: u64) -> f64 {
        self.offset_scaled(x) as f64 / self.den as f64
    }

    pub fn pmf(&self, x: u64) -> f64 {
        let r = self.offset_scaled(x % self.size);
        if r == 0 {
            return 1.0;
        }
        let den = self.den as i128;
        let frac = r.rem_euclid(den) as f64 / den as f64;
        let s1 = (PI * frac).sin();
        let n = self.size as f64;
        let s2 = (PI * (r as f64 / den as f64) / n).sin();
        let v = s1 / (n * s2);
        v * v
    }

    /// Outcomes ordered by distance from the center: floor, floor+1,
    /// floor-1, floor+2, ...
    fn walk(&self) -> impl Iterator<Item = u64> + '_ {
        let f = self.floor();
        let n = self.size;
        (0..n).map(move |t| {
            let step = t.div_ceil(2);
            if t % 2 == 1 {
                (f + step) % n
            } else {
                (f + n - step % n) % n
            }
        })
    }

    /// Exact inverse-CDF sample, walking outward from the center.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.has_integer_center() {
            return self.floor();
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for x in self.walk() {
            acc += self.pmf(x);
            if u < acc {
                return x;
            }
        }
        self.floor()
    }

    /// Probability of landing more than `delta` away from the center.
    pub fn tail_mass(&self, delta: f64) -> f64 {
        let inside: f64 = (0..self.size).filter(|&x| self.offset(x).abs() <= delta).map(|x| self.pmf(x)).sum();
        (1.0 - inside).max(0.0)
    }

    /// Sum of the pmf over all N outcomes.
    pub fn total_mass(&self) -> f64 {
        (0..self.size).map(|x| self.pmf(x)).sum()
    }
}

/// Window half-width whose tail bound 2/delta is below `tol`.
pub fn truncation_for(tol: f64) -> u64 {
    (2.0 / tol).ceil() as u64 + 1
}

/// Sample from the peak centered at `center` in Z_N.
pub fn peak_sample<R: Rng + ?Sized>(center: f64, size: u64, rng: &mut R) -> Result<u64, SimError> {
    Ok(PeakDistribution::from_real(center, size)?.sample(rng))
}

/// One run of the algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    #[serde(rename = "x'")]
    pub x: u64,
    #[serde(rename = "y'")]
    pub y: u64,
    /// Latent peak index; diagnostics only, absent for the semiclassical run.
    pub k: Option<u64>,
    pub recovered_d: Option<u64>,
    pub window: u64,
    pub n: u32,
    pub q: u64,
    pub seed: u64,
    /// Norm lost to modeled shortcuts (semiclassical run with losses).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_deficit: Option<f64>,
}

fn check_sizes(q: u64, n: u32, max_q: u64) -> Result<(), SimError> {
    if q > max_q {
        return Err(SimError::SizeLimit(format!("q = {q} above {max_q}")));
    }
    if n > MAX_FOURIER_BITS {
        return Err(SimError::SizeLimit(format!("n = {n} above {MAX_FOURIER_BITS}")));
    }
    if q < 2 || (1u64 << n) < q {
        return Err(SimError::Parameter(format!("need 2 <= q <= 2^n (q = {q}, n = {n})")));
    }
    Ok(())
}

/// Draws k uniformly and the two independent peaks at Nk/q and N(dk mod q)/q.
pub fn simulate_analytic<R: Rng + ?Sized>(inst: &DlpInstance, n: u32, seed: u64, rng: &mut R) -> Result<MeasurementRecord, SimError> {
    let q = inst.q;
    check_sizes(q, n, MAX_ANALYTIC_Q)?;
    let size = 1u64 << n;
    let k = rng.gen_range(0..q);
    let x = PeakDistribution::for_peak(k, q, size)?.sample(rng);
    let dk = mulmod(inst.d, k, q);
    let y = PeakDistribution::for_peak(dk, q, size)?.sample(rng);
    Ok(MeasurementRecord { x, y, k: Some(k), recovered_d: None, window: 0, n, q, seed, norm_deficit: None })
}

/// Order in which the control qubits of one register are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureOrder {
    /// Highest-index control first: the order the transform requires.
    HighestFirst,
    /// Lowest first, with the same phase rule; a negative control.
    LowestFirst,
}

/// Accumulator amplitudes over discrete logs in Z_q, plus the transcript.
#[derive(Clone, Debug)]
pub struct SemiclassicalState {
    pub amplitudes: Vec<Complex64>,
    /// Outcome bits of the completed register (x') and the current one.
    pub measured_bits: Vec<u8>,
    /// Rotation angle (in turns) to apply to the next control.
    pub pending_phase: f64,
    pub survival: f64,
    q: u64,
}

impl SemiclassicalState {
    pub fn at(q: u64, offset: u64) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); q as usize];
        amplitudes[(offset % q) as usize] = Complex64::new(1.0, 0.0);
        SemiclassicalState { amplitudes, measured_bits: Vec::new(), pending_phase: 0.0, survival: 1.0, q }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Shifted copy T psi for the shift by `a`, dropping lost basis states.
    fn shifted(&self, a: u64, lossy: bool) -> Vec<Complex64> {
        let q = self.q as usize;
        let a = a as usize % q;
        let mut out = vec![Complex64::new(0.0, 0.0); q];
        for (s, amp) in self.amplitudes.iter().enumerate() {
            if lossy && exceptional_index(s as u64, a as u64, self.q).is_some() {
                continue;
            }
            out[(s + a) % q] = *amp;
        }
        out
    }

    /// The two unnormalized outcome branches of one controlled shift by
    /// `a` followed by the rotated measurement of its control.
    fn branches(&self, a: u64, lossy: bool) -> [Vec<Complex64>; 2] {
        let t = self.shifted(a, lossy);
        let rot = Complex64::from_polar(1.0, 2.0 * PI * self.pending_phase);
        let mk = |sign: f64| {
            self.amplitudes.iter().zip(&t).map(|(p, s)| (p + s * rot * sign) * 0.5).collect::<Vec<_>>()
        };
        [mk(1.0), mk(-1.0)]
    }
}

/// Loss class of basis state s under the shift by a, in exponent space.
pub fn exceptional_index(s: u64, a: u64, q: u64) -> Option<ShiftLoss> {
    use crate::ec_group::ExceptionalCase::*;
    let a = a % q;
    if s == 0 {
        Some(ShiftLoss::Exceptional(Identity))
    } else if s == a {
        Some(ShiftLoss::Exceptional(Doubling))
    } else if (s + a) % q == 0 {
        Some(ShiftLoss::Exceptional(InversePair))
    } else if (s + 2 * a) % q == 0 {
        Some(ShiftLoss::DegenerateUncompute)
    } else {
        None
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Control index j handled at measurement step t of an n-bit register.
fn control_index(t: u32, n: u32, order: MeasureOrder) -> u32 {
    match order {
        MeasureOrder::HighestFirst => n - 1 - t,
        MeasureOrder::LowestFirst => t,
    }
}

/// Phase (in turns) for control j given the outcome bits known so far:
/// sum over l < n-1-j of x'_l 2^(j+l-n).
fn rotation(bits: &[Option<u8>], j: u32, n: u32) -> f64 {
    let mut phi = 0.0;
    for l in 0..(n - 1 - j) {
        if bits[l as usize] == Some(1) {
            phi += 2f64.powi(j as i32 + l as i32 - n as i32);
        }
    }
    phi
}

/// Parameters of one register pass.
#[derive(Clone, Copy)]
struct Pass {
    generator: u64,
    n: u32,
    order: MeasureOrder,
    lossy: bool,
}

fn pass_shift(p: &Pass, j: u32, q: u64) -> u64 {
    mulmod(p.generator, pow2_mod(j, q), q)
}

/// Measures one register's n controls, sampling each outcome.
fn sample_register<R: Rng + ?Sized>(st: &mut SemiclassicalState, p: Pass, rng: &mut R) -> u64 {
    let mut bits: Vec<Option<u8>> = vec![None; p.n as usize];
    for t in 0..p.n {
        let j = control_index(t, p.n, p.order);
        st.pending_phase = rotation(&bits, j, p.n);
        let br = st.branches(pass_shift(&p, j, st.q), p.lossy);
        let w = [norm_sqr(&br[0]), norm_sqr(&br[1])];
        let total = w[0] + w[1];
        let b = if rng.gen::<f64>() * total < w[0] { 0 } else { 1 };
        st.survival *= total / st.norm_sqr();
        let scale = 1.0 / w[b].sqrt();
        st.amplitudes = br[b].iter().map(|a| a * scale).collect();
        bits[(p.n - 1 - j) as usize] = Some(b as u8);
        st.measured_bits.push(b as u8);
    }
    assemble(&bits)
}

fn assemble(bits: &[Option<u8>]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (l, b)| acc | ((b.unwrap_or(0) as u64) << l))
}

/// Full 2n-step protocol from a random offset kP != O: x register with
/// shifts 2^j P, then y register with shifts 2^j Q.
pub fn simulate_semiclassical<R: Rng + ?Sized>(
    inst: &DlpInstance,
    n: u32,
    seed: u64,
    rng: &mut R,
    loss_model: bool,
    order: MeasureOrder,
) -> Result<MeasurementRecord, SimError> {
    let q = inst.q;
    check_sizes(q, n, MAX_SEMICLASSICAL_Q)?;
    let offset = rng.gen_range(1..q);
    let mut st = SemiclassicalState::at(q, offset);
    let x = sample_register(&mut st, Pass { generator: 1, n, order, lossy: loss_model }, rng);
    let y = sample_register(&mut st, Pass { generator: inst.d % q, n, order, lossy: loss_model }, rng);
    Ok(MeasurementRecord {
        x,
        y,
        k: None,
        recovered_d: None,
        window: 0,
        n,
        q,
        seed,
        norm_deficit: loss_model.then(|| 1.0 - st.survival),
    })
}

/// Exact (x', y') law, dense over N x N, row-major in x'.
#[derive(Clone, Debug, PartialEq)]
pub struct JointLaw {
    pub size: u64,
    pub probs: Vec<f64>,
}

impl JointLaw {
    pub fn prob(&self, x: u64, y: u64) -> f64 {
        self.probs[(x * self.size + y) as usize]
    }

    pub fn total_variation(&self, other: &JointLaw) -> f64 {
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Largest N^2 for dense joint laws.
const MAX_JOINT_CELLS: u64 = 1 << 24;

fn check_joint(q: u64, n: u32) -> Result<u64, SimError> {
    check_sizes(q, n, MAX_SEMICLASSICAL_Q)?;
    let size = 1u64 << n;
    if size * size > MAX_JOINT_CELLS {
        return Err(SimError::SizeLimit(format!("joint law over 2^{} cells", 2 * n)));
    }
    Ok(size)
}

/// (1/q) sum_k pmf(x' | Nk/q) pmf(y' | N(dk mod q)/q).
pub fn analytic_law(q: u64, d: u64, n: u32) -> Result<JointLaw, SimError> {
    let size = check_joint(q, n)?;
    let mut probs = vec![0.0; (size * size) as usize];
    for k in 0..q {
        let px: Vec<f64> = {
            let pk = PeakDistribution::for_peak(k, q, size)?;
            (0..size).map(|x| pk.pmf(x)).collect()
        };
        let pd = PeakDistribution::for_peak(mulmod(d, k, q), q, size)?;
        let py: Vec<f64> = (0..size).map(|y| pd.pmf(y)).collect();
        for (x, a) in px.iter().enumerate() {
            let row = &mut probs[x * size as usize..(x + 1) * size as usize];
            for (cell, b) in row.iter_mut().zip(&py) {
                *cell += a * b / q as f64;
            }
        }
    }
    Ok(JointLaw { size, probs })
}

/// Exact law of the semiclassical protocol by enumerating every outcome
/// branch. Loss-free runs do not depend on the offset, so it starts at 0.
pub fn semiclassical_law(q: u64, d: u64, n: u32, order: MeasureOrder) -> Result<JointLaw, SimError> {
    let size = check_joint(q, n)?;
    let mut probs = vec![0.0; (size * size) as usize];
    let st = SemiclassicalState::at(q, 0);
    let passes = [
        Pass { generator: 1, n, order, lossy: false },
        Pass { generator: d % q, n, order, lossy: false },
    ];
    let mut bits = [vec![None; n as usize], vec![None; n as usize]];
    dfs(&st, 1.0, &passes, 0, 0, &mut bits, &mut probs, size);
    Ok(JointLaw { size, probs })
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    st: &SemiclassicalState,
    weight: f64,
    passes: &[Pass; 2],
    reg: usize,
    t: u32,
    bits: &mut [Vec<Option<u8>>; 2],
    probs: &mut [f64],
    size: u64,
) {
    if weight == 0.0 {
        return;
    }
    let p = passes[reg];
    if t == p.n {
        if reg == 1 {
            let (x, y) = (assemble(&bits[0]), assemble(&bits[1]));
            probs[(x * size + y) as usize] += weight;
        } else {
            dfs(st, weight, passes, 1, 0, bits, probs, size);
        }
        return;
    }
    let j = control_index(t, p.n, p.order);
    let mut s = st.clone();
    s.pending_phase = rotation(&bits[reg], j, p.n);
    let br = s.branches(pass_shift(&p, j, st.q), false);
    for (b, v) in br.into_iter().enumerate() {
        let w = norm_sqr(&v);
        if w < 1e-300 {
            continue;
        }
        let scale = 1.0 / w.sqrt();
        let next = SemiclassicalState {
            amplitudes: v.iter().map(|a| a * scale).collect(),
            measured_bits: Vec::new(),
            pending_phase: 0.0,
            survival: 1.0,
            q: st.q,
        };
        let slot = (p.n - 1 - j) as usize;
        bits[reg][slot] = Some(b as u8);
        dfs(&next, weight * w, passes, reg, t + 1, bits, probs, size);
        bits[reg][slot] = None;
    }
}

/// round(v q / N) mod q.
pub fn round_to_zq(v: u64, q: u64, size: u64) -> u64 {
    let num = 2 * v as u128 * q as u128 + size as u128;
    ((num / (2 * size as u128)) % q as u128) as u64
}

/// Offsets 0, -1, 1, -2, 2, ... up to +-w.
fn by_distance(w: u64) -> impl Iterator<Item = i64> {
    (0..=2 * w as i64).map(|t| if t % 2 == 1 { -(t + 1) / 2 } else { t / 2 })
}

/// Tries the candidates around the rounded peaks and returns the first d
/// that passes the d P = Q check.
pub fn postprocess(rec: &MeasurementRecord, inst: &DlpInstance, window: u64) -> Option<u64> {
    let q = inst.q;
    let size = 1u64 << rec.n;
    let kh = round_to_zq(rec.x, q, size) as i64;
    let mh = round_to_zq(rec.y, q, size) as i64;
    let qi = q as i64;
    for d1 in by_distance(window) {
        let k = (kh + d1).rem_euclid(qi) as u64;
        if k == 0 {
            continue;
        }
        let kinv = inv_mod_prime(k, q);
        for d2 in by_distance(window) {
            let m = (mh + d2).rem_euclid(qi) as u64;
            let cand = mulmod(m, kinv, q);
            if inst.curve.scalar_mul(&BigUint::from(cand), &inst.base) == inst.target {
                return Some(cand);
            }
        }
    }
    None
}

/// Runs `runs` analytic or semiclassical trials and post-processes them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Analytic,
    Semiclassical,
}

pub fn run_trial<R: Rng + ?Sized>(
    inst: &DlpInstance,
    n: u32,
    window: u64,
    mode: SimMode,
    seed: u64,
    rng: &mut R,
) -> Result<MeasurementRecord, SimError> {
    let mut rec = match mode {
        SimMode::Analytic => simulate_analytic(inst, n, seed, rng)?,
        SimMode::Semiclassical => simulate_semiclassical(inst, n, seed, rng, false, MeasureOrder::HighestFirst)?,
    };
    rec.window = window;
    rec.recovered_d = postprocess(&rec, inst, window);
    Ok(rec)
}

/// Exact success probability with its truncation bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbability {
    pub q: u64,
    pub d: u64,
    pub n: u32,
    pub window: u64,
    /// Lower bound on the true value; exact when `truncation_bound` is 0.
    pub probability: f64,
    /// Peak half-width used, or 0 when the full support was summed.
    pub peak_window: u64,
    /// The true value lies in [probability, probability + truncation_bound].
    pub truncation_bound: f64,
}

/// Work cap for summing full peak supports.
const FULL_SUPPORT_CELLS: u128 = 1 << 28;

/// Distribution of round(x' q / N) for the peak at c, as (value, mass).
fn rounded_law(pk: &PeakDistribution, q: u64, half: Option<u64>) -> Vec<(u64, f64)> {
    let size = pk.size();
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    let mut add = |x: u64| *acc.entry(round_to_zq(x, q, size)).or_insert(0.0) += pk.pmf(x);
    match half {
        None => (0..size).for_each(&mut add),
        Some(h) => pk.walk().take((2 * h + 2).min(size) as usize).for_each(&mut add),
    }
    acc.into_iter().collect()
}

/// (1/q) sum_k P(post-processing succeeds | k), from the peak laws.
pub fn success_probability(q: u64, d: u64, n: u32, window: u64) -> Result<SuccessProbability, SimError> {
    check_sizes(q, n, MAX_ANALYTIC_Q)?;
    if !crate::numtheory::is_prime_u64(q) {
        return Err(SimError::Parameter(format!("q = {q} is not prime")));
    }
    let d = d % q;
    let size = 1u64 << n;
    let full = (q as u128) * (size as u128) <= FULL_SUPPORT_CELLS;
    let half = if full { None } else { Some(((FULL_SUPPORT_CELLS / q as u128) as u64 / 2).max(64)) };
    let w = window as i64;
    let qi = q as i64;
    let mut py_dense = vec![0.0f64; q as usize];
    let mut set: Vec<u64> = Vec::new();
    let mut total = 0.0;
    for k in 0..q {
        let px = rounded_law(&PeakDistribution::for_peak(k, q, size)?, q, half);
        let py = rounded_law(&PeakDistribution::for_peak(mulmod(d, k, q), q, size)?, q, half);
        for &(b, m) in &py {
            py_dense[b as usize] = m;
        }
        let mut sk = 0.0;
        for &(a, pa) in &px {
            set.clear();
            for d1 in -w..=w {
                let kk = (a as i64 + d1).rem_euclid(qi) as u64;
                if kk == 0 {
                    continue;
                }
                let centre = mulmod(d, kk, q) as i64;
                for d2 in -w..=w {
                    set.push((centre - d2).rem_euclid(qi) as u64);
                }
            }
            set.sort_unstable();
            set.dedup();
            sk += pa * set.iter().map(|&b| py_dense[b as usize]).sum::<f64>();
        }
        for &(b, _) in &py {
            py_dense[b as usize] = 0.0;
        }
        total += sk;
    }
    let (peak_window, bound) = match half {
        None => (0, 0.0),
        Some(h) => (h, 2.0 * 2.0 / h as f64),
    };
    Ok(SuccessProbability {
        q,
        d,
        n,
        window,
        probability: (total / q as f64).min(1.0),
        peak_window,
        truncation_bound: bound,
    })
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow2_mod(i: u32, q: u64) -> u64 {
    let mut r = 1 % q;
    for _ in 0..i {
        r = mulmod(r, 2, q);
    }
    r
}

fn inv_mod_prime(k: u64, q: u64) -> u64 {
    let mut r = 1u64;
    let mut b = k % q;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, q);
        }
        b = mulmod(b, b, q);
        e >>= 1;
    }
    r
}

/// Chi-square statistic and degrees of freedom of sampled counts against
/// an exact law, pooling cells with expected count below `min_expected`.
pub fn chi_square(law: &JointLaw, counts: &[u64], min_expected: f64) -> (f64, u64) {
    let total: u64 = counts.iter().sum();
    let t = total as f64;
    let (mut stat, mut cells) = (0.0, 0u64);
    let (mut pool_e, mut pool_o) = (0.0, 0.0);
    for (p, &c) in law.probs.iter().zip(counts) {
        let e = p * t;
        if e >= min_expected {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pool_e += e;
            pool_o += c as f64;
        }
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e;
        cells += 1;
    }
    (stat, cells.saturating_sub(1))
}

/// Histogram of sampled (x', y') over the dense joint grid.
pub fn histogram(records: &[MeasurementRecord], size: u64) -> Vec<u64> {
    let mut h = vec![0u64; (size * size) as usize];
    for r in records {
        h[(r.x * size + r.y) as usize] += 1;
    }
    h
}

/// TV distance between a sample histogram and an exact law.
pub fn empirical_tv(law: &JointLaw, counts: &[u64]) -> f64 {
    let t: u64 = counts.iter().sum();
    0.5 * law.probs.iter().zip(counts).map(|(p, &c)| (c as f64 / t as f64 - p).abs()).sum::<f64>()
}
