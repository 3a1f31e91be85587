use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::Fault;

pub type RegId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    /// Magnitude bits; signed registers carry one extra sign bit.
    pub width: u64,
    pub signed: bool,
    value: BigInt,
}

impl Register {
    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn total_width(&self) -> u64 {
        self.width + self.signed as u64
    }
}

/// Named, fixed-width registers. Writes that do not fit are hard faults.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegisterFile {
    regs: Vec<Register>,
}

impl RegisterFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, width: u64, signed: bool) -> Result<RegId, Fault> {
        if self.regs.iter().any(|r| r.name == name) {
            return Err(Fault::Domain(format!("duplicate register {name}")));
        }
        self.regs.push(Register { name: name.to_string(), width, signed, value: BigInt::zero() });
        Ok(self.regs.len() - 1)
    }

    pub fn id(&self, name: &str) -> Option<RegId> {
        self.regs.iter().position(|r| r.name == name)
    }

    pub fn get(&self, id: RegId) -> &BigInt {
        &self.regs[id].value
    }

    pub fn register(&self, id: RegId) -> &Register {
        &self.regs[id]
    }

    pub fn set(&mut self, id: RegId, v: BigInt) -> Result<(), Fault> {
        let r = &self.regs[id];
        if v.is_negative() && !r.signed {
            return Err(Fault::Width { register: r.name.clone(), width: r.width, needed: None });
        }
        let bits = v.magnitude().bits();
        if bits > r.width {
            return Err(Fault::Width { register: r.name.clone(), width: r.width, needed: Some(bits) });
        }
        self.regs[id].value = v;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Register> {
        self.regs.iter()
    }

    pub fn total_width(&self) -> u64 {
        self.regs.iter().map(|r| r.total_width()).sum()
    }
}
