use serde::{Deserialize, Serialize};
use std::fmt;

/// Operation classes tracked by the ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CostClass {
    ClassicalQuantumAdd,
    QuantumQuantumAdd,
    CompareZero,
    Swap,
    Control,
}

impl CostClass {
    pub const ALL: [CostClass; 5] = [
        CostClass::ClassicalQuantumAdd,
        CostClass::QuantumQuantumAdd,
        CostClass::CompareZero,
        CostClass::Swap,
        CostClass::Control,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            CostClass::ClassicalQuantumAdd => "classical_quantum_add",
            CostClass::QuantumQuantumAdd => "quantum_quantum_add",
            CostClass::CompareZero => "compare_zero",
            CostClass::Swap => "swap",
            CostClass::Control => "control",
        }
    }
}

/// Units charged per bit of operand width, in tenths of a 1-qubit addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostWeights {
    pub tenths: [u64; 5],
}

impl Default for CostWeights {
    /// CQ add 1.0, QQ add 1.7, compare 1.0, swap 0.2, control 0.5 per bit.
    /// One Euclid cycle (4 QQ adds, compare, swap, control) is then 8.5w,
    /// i.e. exactly five QQ additions.
    fn default() -> Self {
        CostWeights { tenths: [10, 17, 10, 2, 5] }
    }
}

/// Additive cost record. Stores, per class, the number of events and the
/// total operand width, so totals are exact integers in tenths of units.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    events: [u64; 5],
    bits: [u128; 5],
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, class: CostClass, width: u64) {
        self.charge_n(class, width, 1);
    }

    pub fn charge_n(&mut self, class: CostClass, width: u64, count: u64) {
        let i = class.index();
        self.events[i] += count;
        self.bits[i] += width as u128 * count as u128;
    }

    pub fn absorb(&mut self, other: &CostLedger) {
        for i in 0..5 {
            self.events[i] += other.events[i];
            self.bits[i] += other.bits[i];
        }
    }

    pub fn events(&self, class: CostClass) -> u64 {
        self.events[class.index()]
    }

    pub fn width_sum(&self, class: CostClass) -> u128 {
        self.bits[class.index()]
    }

    pub fn total_tenths_with(&self, w: &CostWeights) -> u128 {
        (0..5).map(|i| self.bits[i] * w.tenths[i] as u128).sum()
    }

    pub fn total_tenths(&self) -> u128 {
        self.total_tenths_with(&CostWeights::default())
    }

    /// Total in 1-qubit additions under the default weights.
    pub fn one_qubit_additions(&self) -> f64 {
        self.total_tenths() as f64 / 10.0
    }

    pub fn is_empty(&self) -> bool {
        self.events.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for CostLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1} units", self.one_qubit_additions())?;
        for c in CostClass::ALL {
            if self.events(c) > 0 {
                write!(f, " {}={}x/{}b", c.name(), self.events(c), self.width_sum(c))?;
            }
        }
        Ok(())
    }
}
