//! Cycle-accurate two-phase simulator with runtime assertion checking.
//!
//! Scheduling per cycle: apply row inputs, honor asynchronous resets,
//! settle combinational logic (topological order), sample every scalar
//! signal (preponed sample, the value just before the rising edge),
//! evaluate concurrent attempts on the sample, execute clocked blocks
//! against pre-edge values (immediate assertions evaluate in statement
//! order), then commit all nonblocking updates at once.
//!
//! Values are two-state with a per-signal uninitialized flag that clears
//! on first write. Immediate assertions over uninitialized values abort
//! with `XPropagationToAssertion`; concurrent attempts touching
//! uninitialized samples are recorded as `NotAttempted`.

pub mod concurrent;
pub mod engine;
pub mod vectors;

use thiserror::Error;

pub use concurrent::{eval_concurrent, AssertionVerdict, AttemptStatus, ConcurrentProperty};
pub use engine::{run, BoundAssertion, Simulator, Trace};
pub use vectors::{load_vectors, random_stimulus, InputMode, StimulusSpec, TestVectorSet};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("vector line {line}: {message}")]
    FormatError { line: usize, message: String },
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("value {value:#x} does not fit `{signal}` ({width} bits)")]
    WidthMismatch {
        signal: String,
        value: u64,
        width: u32,
    },
    #[error("vector set does not drive input `{0}`")]
    MissingInput(String),
    #[error("combinational logic failed to converge at cycle {cycle}")]
    CombinationalNonConvergence { cycle: usize },
    #[error("assertion `{id}` read an uninitialized signal at cycle {cycle}")]
    XPropagationToAssertion { cycle: usize, id: String },
    #[error("too many input bits: {0} (limit {1})")]
    TooManyInputBits(u32, u32),
    #[error(transparent)]
    Frontend(#[from] crate::frontend::FrontendError),
}

pub type Result<T> = std::result::Result<T, SimError>;
