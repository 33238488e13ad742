//! Two-level taint propagation: seeds are secure, and the destination
//! of any assignment whose right-hand side reads a secure signal
//! becomes secure. Propagation crosses direct port bindings.

use std::collections::{BTreeMap, BTreeSet};

use super::{AnalysisError, Result};
use crate::frontend::ast::*;
use crate::frontend::elaborate::ElaboratedDesign;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Secure,
    Normal,
}

/// Per-signal tags over hierarchical names; two-level lattice with
/// Secure above Normal.
#[derive(Debug, Clone)]
pub struct TagMap {
    pub tags: BTreeMap<String, Tag>,
    pub seeds: BTreeSet<String>,
}

impl TagMap {
    pub fn tag(&self, name: &str) -> Tag {
        self.tags.get(name).copied().unwrap_or(Tag::Normal)
    }

    pub fn is_secure(&self, name: &str) -> bool {
        self.tag(name) == Tag::Secure
    }

    /// Secure signals in deterministic order.
    pub fn secure_signals(&self) -> Vec<String> {
        self.tags
            .iter()
            .filter(|(_, t)| **t == Tag::Secure)
            .map(|(n, _)| n.clone())
            .collect()
    }
}

/// One dataflow edge: `dest` is assigned from `sources`.
struct Flow {
    dest: String,
    sources: Vec<String>,
}

fn join(path: &str, local: &str) -> String {
    if path.is_empty() {
        local.to_string()
    } else {
        format!("{path}.{local}")
    }
}

fn rhs_sources(expr: &Expr, path: &str, out: &mut Vec<String>) {
    expr.walk_idents(&mut |n| {
        let full = join(path, n);
        if !out.contains(&full) {
            out.push(full);
        }
    });
}

fn stmt_flows(stmt: &Stmt, path: &str, out: &mut Vec<Flow>) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for s in stmts {
                stmt_flows(s, path, out);
            }
        }
        Stmt::Blocking { target, value, .. } | Stmt::NonBlocking { target, value, .. } => {
            let mut sources = Vec::new();
            rhs_sources(value, path, &mut sources);
            out.push(Flow {
                dest: join(path, &target.base),
                sources,
            });
        }
        Stmt::If {
            then_stmt,
            else_stmt,
            ..
        } => {
            stmt_flows(then_stmt, path, out);
            if let Some(e) = else_stmt {
                stmt_flows(e, path, out);
            }
        }
        Stmt::Case { items, default, .. } => {
            for item in items {
                stmt_flows(&item.body, path, out);
            }
            if let Some(d) = default {
                stmt_flows(d, path, out);
            }
        }
        Stmt::ImmediateAssert { .. } | Stmt::For { .. } => {}
    }
}

/// Fixpoint propagation from `secure_seeds` (top-scope signal names).
pub fn propagate_tags(design: &ElaboratedDesign, secure_seeds: &[String]) -> Result<TagMap> {
    for seed in secure_seeds {
        if design.signal(seed).is_none() {
            return Err(AnalysisError::UnknownSeedSignal(seed.clone()));
        }
    }

    // Collect every direct assignment flow in the flattened design.
    let mut flows = Vec::new();
    for (path, module) in &design.instances {
        let info = &design.modules[module];
        for item in &info.ast.items {
            match item {
                ModuleItem::ContinuousAssign(a) => {
                    let mut sources = Vec::new();
                    rhs_sources(&a.value, path, &mut sources);
                    flows.push(Flow {
                        dest: join(path, &a.target.base),
                        sources,
                    });
                }
                ModuleItem::Always(b) => stmt_flows(&b.body, path, &mut flows),
                _ => {}
            }
        }
    }
    // Port bindings are direct flows in both directions.
    for unit in &design.comb_schedule {
        match unit {
            crate::frontend::elaborate::CombUnit::InputBind {
                child_path,
                formal,
                parent_path,
                actual,
            } => {
                let mut sources = Vec::new();
                rhs_sources(actual, parent_path, &mut sources);
                flows.push(Flow {
                    dest: join(child_path, formal),
                    sources,
                });
            }
            crate::frontend::elaborate::CombUnit::OutputBind {
                parent_path,
                target,
                child_path,
                formal,
            } => {
                flows.push(Flow {
                    dest: join(parent_path, &target.base),
                    sources: vec![join(child_path, formal)],
                });
            }
            _ => {}
        }
    }

    let mut tags: BTreeMap<String, Tag> = BTreeMap::new();
    for sig in &design.signals {
        tags.insert(sig.name.clone(), Tag::Normal);
    }
    for seed in secure_seeds {
        tags.insert(seed.clone(), Tag::Secure);
    }

    // Monotone fixpoint; terminates within |signals| iterations.
    for _ in 0..design.signals.len() + 1 {
        let mut changed = false;
        for flow in &flows {
            if tags.get(&flow.dest) == Some(&Tag::Secure) {
                continue;
            }
            if flow
                .sources
                .iter()
                .any(|s| tags.get(s) == Some(&Tag::Secure))
            {
                tags.insert(flow.dest.clone(), Tag::Secure);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    Ok(TagMap {
        tags,
        seeds: secure_seeds.iter().cloned().collect(),
    })
}
