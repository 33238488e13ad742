//! Test vector sets: the on-disk format and seeded random stimulus.

use std::collections::BTreeMap;

use super::{Result, SimError};
use crate::frontend::ast::Edge;
use crate::frontend::elaborate::ElaboratedDesign;
use crate::rng::SplitMix64;

/// Per-cycle input rows. One row is applied before each rising clock
/// edge; the clock itself never appears.
#[derive(Debug, Clone)]
pub struct TestVectorSet {
    pub name: String,
    pub input_names: Vec<String>,
    pub rows: Vec<Vec<u64>>,
    /// First cycle at which assertions are evaluated. Derived from the
    /// reset protocol; 0 when no reset precedes the payload.
    pub arm_cycle: usize,
    /// Marks vector sets that deliberately drive a rare trigger; such
    /// sets are excluded from golden-cleanliness checks.
    pub trigger_test: bool,
}

impl TestVectorSet {
    pub fn cycles(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.input_names.iter().position(|n| n == name)
    }
}

/// Parses the vector file format:
/// line 1 `signals: <comma-separated input names>`, then one row of
/// comma-separated values per line (`<decimal>`, `0x<hex>`, `0b<binary>`).
/// `#` starts a comment; blank lines are skipped.
pub fn load_vectors(text: &str, name: &str) -> Result<TestVectorSet> {
    let mut input_names: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        match &input_names {
            None => {
                let rest = line.strip_prefix("signals:").ok_or_else(|| {
                    SimError::FormatError {
                        line: line_no,
                        message: "expected `signals: <names>` header".into(),
                    }
                })?;
                let names: Vec<String> = rest
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if names.is_empty() {
                    return Err(SimError::FormatError {
                        line: line_no,
                        message: "empty signal list".into(),
                    });
                }
                input_names = Some(names);
            }
            Some(names) => {
                let values: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
                if values.len() != names.len() {
                    return Err(SimError::FormatError {
                        line: line_no,
                        message: format!(
                            "row has {} values, header names {} signals",
                            values.len(),
                            names.len()
                        ),
                    });
                }
                let mut row = Vec::with_capacity(values.len());
                for v in values {
                    row.push(parse_value(v).ok_or_else(|| SimError::FormatError {
                        line: line_no,
                        message: format!("bad value `{v}`"),
                    })?);
                }
                rows.push(row);
            }
        }
    }
    let input_names = input_names.ok_or(SimError::FormatError {
        line: 1,
        message: "missing `signals:` header".into(),
    })?;
    Ok(TestVectorSet {
        name: name.to_string(),
        input_names,
        rows,
        arm_cycle: 0,
        trigger_test: false,
    })
}

fn parse_value(s: &str) -> Option<u64> {
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()
    } else if let Some(bin) = s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        u64::from_str_radix(bin, 2).ok()
    } else {
        s.parse().ok()
    }
}

/// Renders a vector set in the on-disk format.
pub fn render_vectors(set: &TestVectorSet) -> String {
    let mut out = format!("signals: {}\n", set.input_names.join(","));
    for row in &set.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// How one input is driven by `random_stimulus`.
#[derive(Debug, Clone, Copy)]
pub enum InputMode {
    /// Uniform over the declared width.
    Random,
    /// Uniform over the low `n` bits.
    RandomBits(u32),
    /// Constant value every cycle.
    Const(u64),
}

/// Stimulus shape: reset protocol plus per-input overrides.
#[derive(Debug, Clone, Default)]
pub struct StimulusSpec {
    pub reset_cycles: usize,
    pub overrides: BTreeMap<String, InputMode>,
}

impl StimulusSpec {
    pub fn reset(cycles: usize) -> Self {
        StimulusSpec {
            reset_cycles: cycles,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with(mut self, input: &str, mode: InputMode) -> Self {
        self.overrides.insert(input.to_string(), mode);
        self
    }
}

/// Seeded uniform stimulus over every non-clock input. Asynchronous
/// reset inputs are held active for `spec.reset_cycles` rows and
/// deasserted afterwards; the arm point is set past the reset.
pub fn random_stimulus(
    design: &ElaboratedDesign,
    clock: &str,
    cycles: usize,
    seed: u64,
    spec: &StimulusSpec,
) -> TestVectorSet {
    let mut rng = SplitMix64::new(seed);
    let inputs = design.top_inputs(clock);
    let resets: BTreeMap<String, Edge> = design.async_resets(clock).into_iter().collect();
    let mut rows = Vec::with_capacity(cycles);
    for cycle in 0..cycles {
        let mut row = Vec::with_capacity(inputs.len());
        for (name, width) in &inputs {
            if let Some(edge) = resets.get(name) {
                let active = cycle < spec.reset_cycles;
                let value = match edge {
                    Edge::Pos => active as u64,
                    Edge::Neg => (!active) as u64,
                };
                row.push(value);
                continue;
            }
            let mode = spec.overrides.get(name).copied().unwrap_or(InputMode::Random);
            let value = match mode {
                InputMode::Random => rng.next_bits(*width),
                InputMode::RandomBits(bits) => rng.next_bits(bits.min(*width)),
                InputMode::Const(v) => v,
            };
            row.push(value);
        }
        rows.push(row);
    }
    TestVectorSet {
        name: format!("random/seed{seed}/{cycles}"),
        input_names: inputs.into_iter().map(|(n, _)| n).collect(),
        rows,
        arm_cycle: spec.reset_cycles,
        trigger_test: false,
    }
}
