use super::Fault;

/// Flag bit and control counter of a desynchronized machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SchedulerState {
    pub f: bool,
    /// In 1..=m.
    pub c: usize,
}

impl SchedulerState {
    /// Start of the first series of operation 1.
    pub fn start() -> Self {
        SchedulerState { f: true, c: 1 }
    }

    /// Advance counter: c <- (c + f) mod m, on the range 1..=m.
    pub fn advance(&mut self, m: usize) {
        self.c = (self.c - 1 + self.f as usize) % m + 1;
    }

    pub fn retreat(&mut self, m: usize) {
        self.c = (self.c - 1 + m - self.f as usize) % m + 1;
    }
}

/// A machine whose per-basis-state program is a concatenation of series of
/// operations 1..=m taken in cyclic order. Operation k is 1-based.
pub trait DesyncMachine {
    type Data;

    fn op_count(&self) -> usize;

    /// Global gate; must not be changed by any operation.
    fn enabled(&self, _d: &Self::Data) -> bool {
        true
    }

    fn forward(&self, op: usize, d: &mut Self::Data) -> Result<(), Fault>;
    fn backward(&self, op: usize, d: &mut Self::Data) -> Result<(), Fault>;

    /// Is this application the first of its series? Evaluated on the input.
    fn is_first(&self, op: usize, d: &Self::Data) -> Result<bool, Fault>;
    /// Is this application the last of its series? Evaluated on the output.
    fn is_last(&self, op: usize, d: &Self::Data) -> Result<bool, Fault>;
}

/// o'_k followed by ac: op k runs only when c = k, toggling f by first ^ last.
pub fn schedule_step<M: DesyncMachine>(
    m: &M,
    d: &mut M::Data,
    s: &mut SchedulerState,
    k: usize,
) -> Result<bool, Fault> {
    if !m.enabled(d) {
        return Ok(false);
    }
    let mut applied = false;
    if s.c == k {
        let first = m.is_first(k, d)?;
        m.forward(k, d)?;
        let last = m.is_last(k, d)?;
        s.f ^= first ^ last;
        applied = true;
    }
    s.advance(m.op_count());
    Ok(applied)
}

/// Exact inverse of `schedule_step` for the same k.
pub fn unschedule_step<M: DesyncMachine>(
    m: &M,
    d: &mut M::Data,
    s: &mut SchedulerState,
    k: usize,
) -> Result<bool, Fault> {
    if !m.enabled(d) {
        return Ok(false);
    }
    s.retreat(m.op_count());
    if s.c == k {
        let last = m.is_last(k, d)?;
        m.backward(k, d)?;
        let first = m.is_first(k, d)?;
        s.f ^= first ^ last;
        return Ok(true);
    }
    Ok(false)
}

/// One full cycle: steps for k = 1..=m. Returns the ops that fired.
pub fn cycle<M: DesyncMachine>(m: &M, d: &mut M::Data, s: &mut SchedulerState) -> Result<Vec<usize>, Fault> {
    let mut fired = Vec::new();
    for k in 1..=m.op_count() {
        if schedule_step(m, d, s, k)? {
            fired.push(k);
        }
    }
    Ok(fired)
}

pub fn uncycle<M: DesyncMachine>(m: &M, d: &mut M::Data, s: &mut SchedulerState) -> Result<(), Fault> {
    for k in (1..=m.op_count()).rev() {
        unschedule_step(m, d, s, k)?;
    }
    Ok(())
}
