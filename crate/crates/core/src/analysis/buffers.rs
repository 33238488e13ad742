//! Discovery of indexed memory accesses, one entry per syntactic access
//! site, with bounds taken from the declaration.

use crate::frontend::ast::*;
use crate::frontend::elaborate::ElaboratedDesign;
use crate::frontend::render::render_expr;
use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
}

#[derive(Debug, Clone)]
pub struct BufferAccess {
    pub array: String,
    pub module: String,
    pub index_expr: Expr,
    /// Highest legal index (element count − 1).
    pub limit: u64,
    /// Source form of the declared bound, e.g. `2**20-1`.
    pub limit_text: String,
    pub element_count: u64,
    pub kind: AccessKind,
    pub span: SourceSpan,
    /// Statement containing the access (insertion point for checks).
    pub at: StmtPath,
}

/// All indexed accesses to array-declared nets, module by module in
/// declaration order, statement order within each module.
pub fn find_buffer_accesses(design: &ElaboratedDesign) -> Vec<BufferAccess> {
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
        for (item_idx, item) in m.items.iter().enumerate() {
            if let ModuleItem::Always(a) = item {
                if matches!(a.sensitivity, Sensitivity::Edges(_)) {
                    walk_stmt(
                        design,
                        module,
                        m,
                        &a.body,
                        StmtPath::new(item_idx, Vec::new()),
                        &mut out,
                    );
                }
            }
        }
    }
    out
}

fn array_info(design: &ElaboratedDesign, m: &AstModule, name: &str) -> Option<(u64, String)> {
    let decl = m.decl(name)?;
    let dim = decl.array_dim.as_ref()?;
    let count = dim.msb.const_value()? - dim.lsb.const_value()? + 1;
    let text = design
        .slice(dim.msb.span())
        .unwrap_or_else(|| render_expr(&dim.msb));
    Some((count, text))
}

fn walk_stmt(
    design: &ElaboratedDesign,
    module: &str,
    m: &AstModule,
    stmt: &Stmt,
    path: StmtPath,
    out: &mut Vec<BufferAccess>,
) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for (i, s) in stmts.iter().enumerate() {
                walk_stmt(design, module, m, s, path.child(i), out);
            }
        }
        Stmt::Blocking { target, value, span }
        | Stmt::NonBlocking { target, value, span } => {
            if let (Some(index), Some((count, text))) =
                (&target.index, array_info(design, m, &target.base))
            {
                out.push(BufferAccess {
                    array: target.base.clone(),
                    module: module.to_string(),
                    index_expr: (**index).clone(),
                    limit: count - 1,
                    limit_text: text,
                    element_count: count,
                    kind: AccessKind::Write,
                    span: span.clone(),
                    at: path.clone(),
                });
            }
            collect_reads(design, module, m, value, span, &path, out);
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            span,
        } => {
            collect_reads(design, module, m, cond, span, &path, out);
            walk_stmt(design, module, m, then_stmt, path.child(0), out);
            if let Some(e) = else_stmt {
                walk_stmt(design, module, m, e, path.child(1), out);
            }
        }
        Stmt::Case {
            selector,
            items,
            default,
            span,
        } => {
            collect_reads(design, module, m, selector, span, &path, out);
            for (i, item) in items.iter().enumerate() {
                walk_stmt(design, module, m, &item.body, path.child(i), out);
            }
            if let Some(d) = default {
                walk_stmt(design, module, m, d, path.child(items.len()), out);
            }
        }
        Stmt::ImmediateAssert { .. } | Stmt::For { .. } => {}
    }
}

fn collect_reads(
    design: &ElaboratedDesign,
    module: &str,
    m: &AstModule,
    expr: &Expr,
    stmt_span: &SourceSpan,
    at: &StmtPath,
    out: &mut Vec<BufferAccess>,
) {
    if let Expr::BitSelect { base, index, .. } = expr {
        if let Some((count, text)) = array_info(design, m, base) {
            out.push(BufferAccess {
                array: base.clone(),
                module: module.to_string(),
                index_expr: (**index).clone(),
                limit: count - 1,
                limit_text: text,
                element_count: count,
                kind: AccessKind::Read,
                span: stmt_span.clone(),
                at: at.clone(),
            });
        }
    }
    match expr {
        Expr::BitSelect { index, .. } => {
            collect_reads(design, module, m, index, stmt_span, at, out)
        }
        Expr::Unary { operand, .. } => {
            collect_reads(design, module, m, operand, stmt_span, at, out)
        }
        Expr::Binary { lhs, rhs, .. } => {
            collect_reads(design, module, m, lhs, stmt_span, at, out);
            collect_reads(design, module, m, rhs, stmt_span, at, out);
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            collect_reads(design, module, m, cond, stmt_span, at, out);
            collect_reads(design, module, m, then_expr, stmt_span, at, out);
            collect_reads(design, module, m, else_expr, stmt_span, at, out);
        }
        Expr::Concat { parts, .. } => {
            for p in parts {
                collect_reads(design, module, m, p, stmt_span, at, out);
            }
        }
        Expr::SignedCast { operand, .. } => {
            collect_reads(design, module, m, operand, stmt_span, at, out)
        }
        _ => {}
    }
}
