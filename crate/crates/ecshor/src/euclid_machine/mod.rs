//! The desynchronized, stepwise-reversible extended Euclid machine for
//! x^-1 mod p, with its cycle accounting and statistics.

mod machine;
mod stats;
mod word;

pub use machine::*;
pub use stats::*;
pub use word::Word;
