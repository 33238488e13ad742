//! Functional-assertion mining baseline: propositional same-cycle
//! implications extracted from simulation traces. Only rules with
//! perfect confidence on the mining trace are emitted, minimal rules
//! only, in deterministic order.
//!
//! This is intentionally a lightweight stand-in for trace-mining tools:
//! equality literals over observed values, no temporal depth, no formal
//! confirmation. Mined rules reflect only the simulated golden behavior.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::ast::{BinOp, Expr};
use crate::frontend::elaborate::ElaboratedDesign;
use crate::sim::{BoundAssertion, ConcurrentProperty, Trace};

#[derive(Debug, Error)]
pub enum MineError {
    #[error("cannot mine an empty trace")]
    EmptyTrace,
    #[error("rule references unknown signal `{0}`")]
    UnknownSignal(String),
}

/// One mined implication: a conjunction of equality literals over
/// distinct signals implying one output literal, all same-cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinedRule {
    /// Sorted by signal name; empty means `true`.
    pub antecedent: Vec<(String, u64)>,
    pub consequent: (String, u64),
    /// Cycles where the antecedent held (and the consequent was
    /// observable).
    pub support: usize,
}

impl MinedRule {
    /// Listing-style surface syntax:
    /// `(a == v & b == w) |-> (out == u)`.
    pub fn render(&self) -> String {
        let ant = if self.antecedent.is_empty() {
            "true".to_string()
        } else {
            let parts: Vec<String> = self
                .antecedent
                .iter()
                .map(|(s, v)| format!("{s} == {v}"))
                .collect();
            format!("({})", parts.join(" & "))
        };
        format!(
            "{ant} |-> ({} == {})",
            self.consequent.0, self.consequent.1
        )
    }

    pub fn id(&self, index: usize) -> String {
        format!("rule-{index}")
    }
}

/// Renders the rule dump, one rule per line.
pub fn dump_rules(rules: &[MinedRule]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&r.render());
        out.push('\n');
    }
    out
}

/// Mines all perfect-confidence implications with up to `max_antecedent`
/// literals (at most 2 supported) over the armed portion of the trace.
pub fn mine(
    trace: &Trace,
    outputs: &[String],
    max_antecedent: usize,
    min_support: usize,
) -> Result<Vec<MinedRule>, MineError> {
    if trace.cycle_count() == 0 {
        return Err(MineError::EmptyTrace);
    }
    let k = max_antecedent.min(2);
    let rows: Vec<&Vec<Option<u64>>> = trace.rows[trace.arm_cycle..].iter().collect();
    let names = &trace.signal_names;
    let out_cols: Vec<usize> = outputs
        .iter()
        .filter_map(|o| trace.column(o))
        .collect();

    // Literal viability: a literal (signal == value) participates only
    // when it holds often enough to ever reach min_support.
    let mut value_counts: Vec<BTreeMap<u64, usize>> = vec![BTreeMap::new(); names.len()];
    for row in &rows {
        for (col, sample) in row.iter().enumerate() {
            if let Some(v) = sample {
                *value_counts[col].entry(*v).or_insert(0) += 1;
            }
        }
    }
    let viable: Vec<BTreeMap<u64, ()>> = value_counts
        .iter()
        .map(|m| {
            m.iter()
                .filter(|(_, c)| **c >= min_support)
                .map(|(v, _)| (*v, ()))
                .collect()
        })
        .collect();

    // Joint counts per antecedent (by column/value) and consequent.
    type Ant = Vec<(usize, u64)>;
    let mut stats: BTreeMap<(Ant, usize), BTreeMap<u64, usize>> = BTreeMap::new();
    for row in &rows {
        // The single viable literal each signal contributes this cycle.
        let lits: Vec<(usize, u64)> = row
            .iter()
            .enumerate()
            .filter_map(|(col, sample)| {
                let v = (*sample)?;
                viable[col].contains_key(&v).then_some((col, v))
            })
            .collect();
        for &oc in &out_cols {
            let Some(ov) = row[oc] else { continue };
            if k >= 1 {
                for &(c, v) in &lits {
                    if c == oc {
                        continue;
                    }
                    *stats
                        .entry((vec![(c, v)], oc))
                        .or_default()
                        .entry(ov)
                        .or_insert(0) += 1;
                }
            }
            if k >= 2 {
                for i in 0..lits.len() {
                    for j in (i + 1)..lits.len() {
                        let (a, b) = (lits[i], lits[j]);
                        if a.0 == oc || b.0 == oc {
                            continue;
                        }
                        *stats
                            .entry((vec![a, b], oc))
                            .or_default()
                            .entry(ov)
                            .or_insert(0) += 1;
                    }
                }
            }
            // Empty antecedent: the consequent alone.
            *stats
                .entry((Vec::new(), oc))
                .or_default()
                .entry(ov)
                .or_insert(0) += 1;
        }
    }

    // Perfect confidence: a single observed consequent value.
    let mut rules: Vec<MinedRule> = Vec::new();
    for ((ant, oc), dist) in &stats {
        if dist.len() != 1 {
            continue;
        }
        let (&value, &count) = dist.iter().next().unwrap();
        if count < min_support {
            continue;
        }
        rules.push(MinedRule {
            antecedent: ant
                .iter()
                .map(|(c, v)| (names[*c].clone(), *v))
                .collect(),
            consequent: (names[*oc].clone(), value),
            support: count,
        });
    }

    // Minimality: drop any rule whose antecedent strictly contains an
    // emitted rule's antecedent with the same consequent literal.
    let minimal: Vec<MinedRule> = rules
        .iter()
        .filter(|r| {
            !rules.iter().any(|other| {
                other.consequent == r.consequent
                    && other.antecedent.len() < r.antecedent.len()
                    && other
                        .antecedent
                        .iter()
                        .all(|lit| r.antecedent.contains(lit))
            })
        })
        .cloned()
        .collect();

    let mut out = minimal;
    out.sort_by(|a, b| {
        a.consequent
            .cmp(&b.consequent)
            .then_with(|| a.antecedent.cmp(&b.antecedent))
    });
    Ok(out)
}

/// Binds mined rules as concurrent same-cycle checks on a design. The
/// mutation operators never rename signals, so golden rules bind on
/// every instance.
pub fn bind_rules(
    rules: &[MinedRule],
    design: &ElaboratedDesign,
) -> Result<Vec<BoundAssertion>, MineError> {
    let mut out = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        for (name, _) in rule
            .antecedent
            .iter()
            .chain(std::iter::once(&rule.consequent))
        {
            if design.signal(name).is_none() {
                return Err(MineError::UnknownSignal(name.clone()));
            }
        }
        let antecedent = rule
            .antecedent
            .iter()
            .map(|(s, v)| Expr::binary(BinOp::Eq, Expr::ident(s), Expr::number(*v)))
            .reduce(|a, b| Expr::binary(BinOp::LogAnd, a, b));
        let consequent = Expr::binary(
            BinOp::Eq,
            Expr::ident(&rule.consequent.0),
            Expr::number(rule.consequent.1),
        );
        out.push(BoundAssertion::Concurrent {
            id: rule.id(i),
            scope: String::new(),
            property: ConcurrentProperty {
                antecedent,
                consequent,
                next_cycle: false,
            },
        });
    }
    Ok(out)
}
