//! Numeric-hazard discovery: divisions with non-constant divisors and
//! signed/unsigned conversions across assignments.

use crate::frontend::ast::*;
use crate::frontend::elaborate::{infer_width, ElaboratedDesign, SymbolTable};
use crate::frontend::render::render_expr;
use crate::span::SourceSpan;

#[derive(Debug, Clone)]
pub enum HazardKind {
    Division { divisor: Expr, divisor_text: String },
    Modulo { divisor: Expr, divisor_text: String },
    /// A value crosses a signedness boundary; `sign_bit` names the bit
    /// of `base` whose value flips the numeric interpretation.
    SignConversion {
        base: String,
        sign_bit: u32,
        /// `true` when an unsigned source lands in a signed destination.
        to_signed: bool,
    },
}

#[derive(Debug, Clone)]
pub struct NumericHazard {
    pub kind: HazardKind,
    pub module: String,
    pub span: SourceSpan,
    /// Procedural statement the check is inserted before, when one
    /// exists (continuous-assign hazards anchor at their first
    /// procedural reader).
    pub at: Option<StmtPath>,
}

impl NumericHazard {
    /// The bit reference checked by the generated assertion, e.g.
    /// `mul1[32]`.
    pub fn sign_bit_text(&self) -> Option<String> {
        match &self.kind {
            HazardKind::SignConversion { base, sign_bit, .. } => {
                Some(format!("{base}[{sign_bit}]"))
            }
            _ => None,
        }
    }
}

/// One hazard per `/`/`%` with a non-constant-nonzero divisor, plus one
/// per assignment whose source and destination signedness differ.
pub fn find_numeric_hazards(design: &ElaboratedDesign) -> Vec<NumericHazard> {
    let mut out = Vec::new();
    let mut module_order: Vec<&str> = Vec::new();
    for (_, module) in &design.instances {
        if !module_order.contains(&module.as_str()) {
            module_order.push(module);
        }
    }
    for module in module_order {
        let info = &design.modules[module];
        let m = &info.ast;
        let symbols = &info.symbols;
        for (item_idx, item) in m.items.iter().enumerate() {
            match item {
                ModuleItem::ContinuousAssign(a) => {
                    let anchor = first_procedural_reader(m, &a.target.base);
                    scan_assignment(
                        design, module, symbols, &a.target, &a.value, &a.span, anchor, &mut out,
                    );
                }
                ModuleItem::Always(b) if matches!(b.sensitivity, Sensitivity::Edges(_)) => {
                    scan_stmt(
                        design,
                        module,
                        symbols,
                        &b.body,
                        StmtPath::new(item_idx, Vec::new()),
                        &mut out,
                    );
                }
                _ => {}
            }
        }
    }
    out
}

fn scan_stmt(
    design: &ElaboratedDesign,
    module: &str,
    symbols: &SymbolTable,
    stmt: &Stmt,
    path: StmtPath,
    out: &mut Vec<NumericHazard>,
) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for (i, s) in stmts.iter().enumerate() {
                scan_stmt(design, module, symbols, s, path.child(i), out);
            }
        }
        Stmt::Blocking { target, value, span }
        | Stmt::NonBlocking { target, value, span } => {
            scan_assignment(
                design,
                module,
                symbols,
                target,
                value,
                span,
                Some(path.clone()),
                out,
            );
        }
        Stmt::If {
            then_stmt,
            else_stmt,
            ..
        } => {
            scan_stmt(design, module, symbols, then_stmt, path.child(0), out);
            if let Some(e) = else_stmt {
                scan_stmt(design, module, symbols, e, path.child(1), out);
            }
        }
        Stmt::Case { items, default, .. } => {
            for (i, item) in items.iter().enumerate() {
                scan_stmt(design, module, symbols, &item.body, path.child(i), out);
            }
            if let Some(d) = default {
                scan_stmt(design, module, symbols, d, path.child(items.len()), out);
            }
        }
        Stmt::ImmediateAssert { .. } | Stmt::For { .. } => {}
    }
}

#[allow(clippy::too_many_arguments)]
fn scan_assignment(
    design: &ElaboratedDesign,
    module: &str,
    symbols: &SymbolTable,
    target: &LValue,
    value: &Expr,
    span: &SourceSpan,
    at: Option<StmtPath>,
    out: &mut Vec<NumericHazard>,
) {
    collect_divisions(design, module, value, span, &at, out);

    // One sign-conversion hazard per assignment, not per bit. A bit or
    // part select target is an unsigned view regardless of the base.
    let whole_net = target.index.is_none() && target.part.is_none();
    let dest_signed = whole_net
        && symbols
            .get(&target.base)
            .map(|t| t.signed)
            .unwrap_or(false);
    let (src_width, src_signed) = match infer_width(value, symbols) {
        Ok(ws) => ws,
        Err(_) => return,
    };
    if dest_signed && !src_signed {
        // Unsigned source into a signed destination: the top delivered
        // bit flips the interpretation.
        if let Some((base, bit)) = top_bit_of(value, src_width) {
            out.push(NumericHazard {
                kind: HazardKind::SignConversion {
                    base,
                    sign_bit: bit,
                    to_signed: true,
                },
                module: module.to_string(),
                span: span.clone(),
                at,
            });
        }
    } else if !dest_signed && !src_signed {
        // A signed base truncated through a select into an unsigned
        // destination loses its sign bit.
        if let Some((base, bit)) = signed_base_select(value, symbols) {
            out.push(NumericHazard {
                kind: HazardKind::SignConversion {
                    base,
                    sign_bit: bit,
                    to_signed: false,
                },
                module: module.to_string(),
                span: span.clone(),
                at,
            });
        }
    } else if !dest_signed && src_signed {
        if let Some((base, bit)) = top_signed_source(value, symbols) {
            out.push(NumericHazard {
                kind: HazardKind::SignConversion {
                    base,
                    sign_bit: bit,
                    to_signed: false,
                },
                module: module.to_string(),
                span: span.clone(),
                at,
            });
        }
    }
}

/// Names the top bit of a source expression when it is a plain net or
/// slice reference: `mul1[32:19]` -> ("mul1", 32).
fn top_bit_of(expr: &Expr, width: u32) -> Option<(String, u32)> {
    match expr {
        Expr::Ident { name, .. } => Some((name.clone(), width - 1)),
        Expr::PartSelect { base, msb, .. } => {
            Some((base.clone(), msb.const_value()? as u32))
        }
        _ => None,
    }
}

/// Finds a select of a signed base inside the source expression and
/// returns the base's declared sign bit.
fn signed_base_select(expr: &Expr, symbols: &SymbolTable) -> Option<(String, u32)> {
    match expr {
        Expr::PartSelect { base, .. } | Expr::BitSelect { base, .. } => {
            let ty = symbols.get(base)?;
            (ty.signed && ty.array_len.is_none()).then(|| (base.clone(), ty.width - 1))
        }
        Expr::Unary { operand, .. } => signed_base_select(operand, symbols),
        Expr::Binary { lhs, rhs, .. } => {
            signed_base_select(lhs, symbols).or_else(|| signed_base_select(rhs, symbols))
        }
        Expr::Ternary {
            then_expr,
            else_expr,
            ..
        } => signed_base_select(then_expr, symbols)
            .or_else(|| signed_base_select(else_expr, symbols)),
        Expr::Concat { parts, .. } => {
            parts.iter().find_map(|p| signed_base_select(p, symbols))
        }
        _ => None,
    }
}

/// Names a signed identifier feeding an unsigned destination.
fn top_signed_source(expr: &Expr, symbols: &SymbolTable) -> Option<(String, u32)> {
    match expr {
        Expr::Ident { name, .. } => {
            let ty = symbols.get(name)?;
            (ty.signed && ty.array_len.is_none()).then(|| (name.clone(), ty.width - 1))
        }
        Expr::Unary { operand, .. } | Expr::SignedCast { operand, .. } => {
            top_signed_source(operand, symbols)
        }
        Expr::Binary { lhs, rhs, .. } => {
            top_signed_source(lhs, symbols).or_else(|| top_signed_source(rhs, symbols))
        }
        _ => None,
    }
}

fn collect_divisions(
    design: &ElaboratedDesign,
    module: &str,
    expr: &Expr,
    span: &SourceSpan,
    at: &Option<StmtPath>,
    out: &mut Vec<NumericHazard>,
) {
    if let Expr::Binary { op, rhs, .. } = expr {
        if matches!(op, BinOp::Div | BinOp::Mod) {
            // Constant nonzero divisors are excluded by definition.
            let const_nonzero = rhs.const_value().map(|v| v != 0).unwrap_or(false);
            if !const_nonzero {
                let text = design
                    .slice(rhs.span())
                    .unwrap_or_else(|| render_expr(rhs));
                let kind = if *op == BinOp::Div {
                    HazardKind::Division {
                        divisor: (**rhs).clone(),
                        divisor_text: text,
                    }
                } else {
                    HazardKind::Modulo {
                        divisor: (**rhs).clone(),
                        divisor_text: text,
                    }
                };
                out.push(NumericHazard {
                    kind,
                    module: module.to_string(),
                    span: span.clone(),
                    at: at.clone(),
                });
            }
        }
    }
    match expr {
        Expr::Unary { operand, .. } | Expr::SignedCast { operand, .. } => {
            collect_divisions(design, module, operand, span, at, out)
        }
        Expr::Binary { lhs, rhs, .. } => {
            collect_divisions(design, module, lhs, span, at, out);
            collect_divisions(design, module, rhs, span, at, out);
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            collect_divisions(design, module, cond, span, at, out);
            collect_divisions(design, module, then_expr, span, at, out);
            collect_divisions(design, module, else_expr, span, at, out);
        }
        Expr::Concat { parts, .. } => {
            for p in parts {
                collect_divisions(design, module, p, span, at, out);
            }
        }
        Expr::BitSelect { index, .. } => {
            collect_divisions(design, module, index, span, at, out)
        }
        _ => {}
    }
}

/// First clocked statement whose right-hand side reads `name`.
fn first_procedural_reader(m: &AstModule, name: &str) -> Option<StmtPath> {
    fn reads(e: &Expr, name: &str) -> bool {
        let mut found = false;
        e.walk_idents(&mut |n| {
            if n == name {
                found = true;
            }
        });
        found
    }
    fn search(stmt: &Stmt, name: &str, path: StmtPath) -> Option<StmtPath> {
        match stmt {
            Stmt::Block { stmts, .. } => stmts
                .iter()
                .enumerate()
                .find_map(|(i, s)| search(s, name, path.child(i))),
            Stmt::Blocking { value, .. } | Stmt::NonBlocking { value, .. } => {
                reads(value, name).then_some(path)
            }
            Stmt::If {
                cond,
                then_stmt,
                else_stmt,
                ..
            } => {
                if reads(cond, name) {
                    return Some(path);
                }
                search(then_stmt, name, path.child(0)).or_else(|| {
                    else_stmt
                        .as_ref()
                        .and_then(|e| search(e, name, path.child(1)))
                })
            }
            Stmt::Case { items, default, .. } => items
                .iter()
                .enumerate()
                .find_map(|(i, item)| search(&item.body, name, path.child(i)))
                .or_else(|| {
                    default
                        .as_ref()
                        .and_then(|d| search(d, name, path.child(items.len())))
                }),
            _ => None,
        }
    }
    for (item_idx, item) in m.items.iter().enumerate() {
        if let ModuleItem::Always(a) = item {
            if matches!(a.sensitivity, Sensitivity::Edges(_)) {
                if let Some(p) = search(&a.body, name, StmtPath::new(item_idx, Vec::new())) {
                    return Some(p);
                }
            }
        }
    }
    None
}
