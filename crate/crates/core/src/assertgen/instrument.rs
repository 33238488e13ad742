//! Embeds generated assertions into RTL source: immediate candidates
//! become the statement right before their target (single-statement
//! bodies gain begin/end), concurrent candidates land at module scope
//! before `endmodule`, and leakage candidates bring their shadow-tag
//! registers and update statements along.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::*;
use crate::frontend::{parse_source, render_source};
use crate::span::SourceSpan;

use super::candidate::{AssertionCandidate, CandidateKind, CandidateLocation};
use super::{AssertgenError, Result};

struct ModulePlan {
    /// Assertion statements inserted before the statement at each path.
    before: BTreeMap<StmtPath, Vec<Stmt>>,
    /// Shadow updates inserted right after the statement at each path.
    after: BTreeMap<StmtPath, Vec<Stmt>>,
    concurrent: Vec<ConcurrentAssert>,
    shadow_decls: BTreeSet<String>,
}

impl ModulePlan {
    fn new() -> ModulePlan {
        ModulePlan {
            before: BTreeMap::new(),
            after: BTreeMap::new(),
            concurrent: Vec::new(),
            shadow_decls: BTreeSet::new(),
        }
    }
}

fn assert_stmt(cond: Expr, rendered: &str) -> Stmt {
    Stmt::ImmediateAssert {
        cond,
        rendered: rendered.to_string(),
        span: SourceSpan::synthetic(),
    }
}

/// The strict-bound twin of a range check `idx >= 0 && idx <= limit`.
fn alt_condition(consequent: &Expr) -> Option<Expr> {
    let Expr::Binary {
        op: BinOp::LogAnd,
        rhs,
        ..
    } = consequent
    else {
        return None;
    };
    let Expr::Binary {
        op: BinOp::Le,
        lhs: idx,
        rhs: limit,
        ..
    } = rhs.as_ref()
    else {
        return None;
    };
    let count = limit.const_value()? + 1;
    Some(Expr::binary(BinOp::Lt, (**idx).clone(), Expr::number(count)))
}

fn stmt_at<'a>(module: &'a AstModule, at: &StmtPath) -> Option<&'a Stmt> {
    let item = module.items.get(at.item)?;
    let ModuleItem::Always(a) = item else {
        return None;
    };
    let mut stmt = &a.body;
    for idx in &at.path {
        stmt = match stmt {
            Stmt::Block { stmts, .. } => stmts.get(*idx)?,
            Stmt::If {
                then_stmt,
                else_stmt,
                ..
            } => match idx {
                0 => then_stmt.as_ref(),
                1 => else_stmt.as_deref()?,
                _ => return None,
            },
            Stmt::Case { items, default, .. } => {
                if *idx < items.len() {
                    &items[*idx].body
                } else if *idx == items.len() {
                    default.as_deref()?
                } else {
                    return None;
                }
            }
            _ => return None,
        };
    }
    Some(stmt)
}

/// Rewrites `source` with `candidates` embedded. The output re-parses
/// cleanly; with zero candidates it is the canonical render of the
/// original.
pub fn instrument(
    source: &str,
    origin: &str,
    candidates: &[AssertionCandidate],
) -> Result<String> {
    let mut modules = parse_source(source, origin)?;

    let mut plans: BTreeMap<String, ModulePlan> = BTreeMap::new();
    for cand in candidates {
        let module = modules
            .iter()
            .find(|m| m.name == cand.module)
            .ok_or_else(|| AssertgenError::SpanStale {
                id: cand.id.clone(),
                detail: format!("module `{}` not in source", cand.module),
            })?;
        let plan = plans.entry(cand.module.clone()).or_insert_with(ModulePlan::new);
        match (&cand.kind, &cand.location) {
            (CandidateKind::Immediate, CandidateLocation::Before { at }) => {
                if stmt_at(module, at).is_none() && !at.path.is_empty() {
                    return Err(AssertgenError::SpanStale {
                        id: cand.id.clone(),
                        detail: "target statement no longer exists".into(),
                    });
                }
                if at.path.is_empty() && !matches!(module.items.get(at.item), Some(ModuleItem::Always(_))) {
                    return Err(AssertgenError::SpanStale {
                        id: cand.id.clone(),
                        detail: "target block no longer exists".into(),
                    });
                }
                let entry = plan.before.entry(at.clone()).or_default();
                entry.push(assert_stmt(cand.consequent.clone(), &cand.rendered));
                if let Some(alt) = &cand.alt_rendered {
                    let cond = alt_condition(&cand.consequent)
                        .unwrap_or_else(|| cand.consequent.clone());
                    entry.push(assert_stmt(cond, alt));
                }
                if let Some(shadow) = &cand.shadow {
                    plan.shadow_decls.insert(shadow.dest.clone());
                    for s in &shadow.sources {
                        plan.shadow_decls.insert(s.clone());
                    }
                    let value = shadow
                        .sources
                        .iter()
                        .map(|s| Expr::ident(format!("{s}_t")))
                        .reduce(|a, b| Expr::binary(BinOp::Or, a, b))
                        .expect("shadow has at least one source");
                    plan.after.entry(shadow.after.clone()).or_default().push(
                        Stmt::NonBlocking {
                            target: LValue::ident(
                                format!("{}_t", shadow.dest),
                                SourceSpan::synthetic(),
                            ),
                            value,
                            span: SourceSpan::synthetic(),
                        },
                    );
                }
            }
            (CandidateKind::Concurrent, _) => {
                let clock = cand.clock.clone().unwrap_or_else(|| "clk".to_string());
                plan.concurrent.push(ConcurrentAssert {
                    clock: EdgeSpec {
                        edge: Edge::Pos,
                        signal: clock,
                        span: SourceSpan::synthetic(),
                    },
                    antecedent: cand.antecedent.clone(),
                    delay: cand.delay,
                    consequent: cand.consequent.clone(),
                    rendered: cand.rendered.clone(),
                    span: SourceSpan::synthetic(),
                });
            }
            (CandidateKind::Immediate, CandidateLocation::ModuleScope) => {
                return Err(AssertgenError::SpanStale {
                    id: cand.id.clone(),
                    detail: "immediate candidate without a statement location".into(),
                });
            }
        }
    }

    for module in &mut modules {
        let Some(plan) = plans.get(&module.name) else {
            continue;
        };
        for (item_idx, item) in module.items.iter_mut().enumerate() {
            if let ModuleItem::Always(a) = item {
                let root = StmtPath::new(item_idx, Vec::new());
                let body = std::mem::replace(
                    &mut a.body,
                    Stmt::Block {
                        stmts: Vec::new(),
                        span: SourceSpan::synthetic(),
                    },
                );
                a.body = wrap(transform(&body, &root, plan));
            }
        }
        // Shadow registers: one-bit, statically secure, so they start 1.
        for name in &plan.shadow_decls {
            let shadow = format!("{name}_t");
            if module.decl(&shadow).is_none() {
                module.decls.push(NetDecl {
                    name: shadow,
                    kind: NetKind::Reg,
                    signed: false,
                    width: None,
                    array_dim: None,
                    init: Some(Expr::sized(1, 1, LiteralBase::Bin)),
                    span: SourceSpan::synthetic(),
                });
            }
        }
        for c in &plan.concurrent {
            module.items.push(ModuleItem::ConcurrentAssert(c.clone()));
        }
    }

    Ok(render_source(&modules))
}

fn wrap(mut stmts: Vec<Stmt>) -> Stmt {
    if stmts.len() == 1 {
        stmts.pop().unwrap()
    } else {
        Stmt::Block {
            stmts,
            span: SourceSpan::synthetic(),
        }
    }
}

/// Rebuilds a statement with inserts applied, keyed on original paths.
fn transform(stmt: &Stmt, path: &StmtPath, plan: &ModulePlan) -> Vec<Stmt> {
    let mut out: Vec<Stmt> = plan.before.get(path).cloned().unwrap_or_default();
    let inner = match stmt {
        Stmt::Block { stmts, span } => Stmt::Block {
            stmts: stmts
                .iter()
                .enumerate()
                .flat_map(|(i, s)| transform(s, &path.child(i), plan))
                .collect(),
            span: span.clone(),
        },
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            span,
        } => Stmt::If {
            cond: cond.clone(),
            then_stmt: Box::new(wrap(transform(then_stmt, &path.child(0), plan))),
            else_stmt: else_stmt
                .as_ref()
                .map(|e| Box::new(wrap(transform(e, &path.child(1), plan)))),
            span: span.clone(),
        },
        Stmt::Case {
            selector,
            items,
            default,
            span,
        } => Stmt::Case {
            selector: selector.clone(),
            items: items
                .iter()
                .enumerate()
                .map(|(i, item)| CaseItem {
                    labels: item.labels.clone(),
                    body: wrap(transform(&item.body, &path.child(i), plan)),
                    span: item.span.clone(),
                })
                .collect(),
            default: default
                .as_ref()
                .map(|d| Box::new(wrap(transform(d, &path.child(items.len()), plan)))),
            span: span.clone(),
        },
        other => other.clone(),
    };
    out.push(inner);
    out.extend(plan.after.get(path).cloned().unwrap_or_default());
    out
}
