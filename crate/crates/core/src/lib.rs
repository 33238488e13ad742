//! RTL security assertion toolchain.
//!
//! This crate statically analyzes designs written in a synthesizable Verilog
//! subset, generates security assertions for seven vulnerability classes,
//! injects vulnerabilities by seeded mutation, and verifies by simulation
//! that the generated assertions catch the injected vulnerabilities.
//!
//! # Pipeline
//!
//! - `frontend` — lex, parse, elaborate, and re-render the Verilog subset
//! - `analysis` — FSM extraction, rarity estimation, taint propagation,
//!   buffer-access and numeric-hazard discovery
//! - `assertgen` — per-class assertion generators and source instrumentation
//! - `mutate` — seeded mutation operators and vulnerability campaigns
//! - `sim` — cycle-accurate two-phase simulation with assertion checking
//! - `mine` — trace-implication mining baseline
//! - `harness` — benchmark corpus, detection experiment, report emission

pub mod analysis;
pub mod assertgen;
pub mod frontend;
pub mod harness;
pub mod mine;
pub mod mutate;
pub mod rng;
pub mod sim;
pub mod span;

pub use frontend::ast::{AstModule, Expr, NetDecl};
pub use frontend::elaborate::ElaboratedDesign;
pub use span::SourceSpan;
