//! Mutation operators: site enumeration and application. Every operator
//! is decidable from the AST alone and applying the same spec to the
//! same source yields byte-identical output.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::analysis::find_rare_conditions;
use crate::assertgen::VulnClass;
use crate::frontend::ast::*;
use crate::frontend::elaborate::{elaborate, ElaboratedDesign};
use crate::frontend::{parse_source, render_source};
use crate::span::SourceSpan;

use super::{MutationError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MutationOperator {
    /// Negate one signal use in an expression.
    InvertSignal,
    /// Replace one binary operator by a same-arity peer.
    SwapOperator,
    /// Delete one guard conjunct/disjunct or a whole if-guard.
    RemoveGuard,
    /// Forward a stored value to an output during an unrelated write.
    LeakWire,
    /// Force one guard condition to constant true.
    BypassCheck,
    /// Corrupt an output under a rare trigger condition.
    InsertTrojan,
    /// Replace one case-item constant with a foreign constant.
    MisassignConstant,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 7] = [
        MutationOperator::InvertSignal,
        MutationOperator::SwapOperator,
        MutationOperator::RemoveGuard,
        MutationOperator::LeakWire,
        MutationOperator::BypassCheck,
        MutationOperator::InsertTrojan,
        MutationOperator::MisassignConstant,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MutationOperator::InvertSignal => "InvertSignal",
            MutationOperator::SwapOperator => "SwapOperator",
            MutationOperator::RemoveGuard => "RemoveGuard",
            MutationOperator::LeakWire => "LeakWire",
            MutationOperator::BypassCheck => "BypassCheck",
            MutationOperator::InsertTrojan => "InsertTrojan",
            MutationOperator::MisassignConstant => "MisassignConstant",
        }
    }

    pub fn intended_class(&self) -> VulnClass {
        match self {
            MutationOperator::InvertSignal | MutationOperator::SwapOperator => {
                VulnClass::IllegalStatesTransitions
            }
            MutationOperator::RemoveGuard => VulnClass::PermissionsPrivileges,
            MutationOperator::LeakWire => VulnClass::InformationLeakage,
            MutationOperator::BypassCheck | MutationOperator::MisassignConstant => {
                VulnClass::ResourceManagement
            }
            MutationOperator::InsertTrojan => VulnClass::MaliciousImplants,
        }
    }
}

/// Which expression of a module hosts a mutation point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExprHost {
    AssignValue { item: usize },
    AssignTargetIndex { item: usize },
    StmtValue { at: StmtPath },
    StmtTargetIndex { at: StmtPath },
    StmtCond { at: StmtPath },
    CaseSelector { at: StmtPath },
}

/// One place an operator applies.
#[derive(Debug, Clone)]
pub struct MutationSite {
    pub module: String,
    pub kind: SiteKind,
    pub span: SourceSpan,
    pub description: String,
}

#[derive(Debug, Clone)]
pub enum SiteKind {
    /// Preorder node `node` of the host expression.
    ExprNode { host: ExprHost, node: usize },
    /// The guard of the if at `at`: the whole condition or one
    /// top-level conjunct/disjunct.
    Guard { at: StmtPath, part: GuardPart },
    /// A clocked memory-write statement (LeakWire anchor).
    ArrayWrite { at: StmtPath },
    /// A rare condition (InsertTrojan trigger).
    RareCondition { cond: Expr, text: String },
    /// A case-item constant assignment.
    CaseConstant { at: StmtPath, current: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardPart {
    Whole,
    Operand(usize),
}

/// Operator-specific parameters carried by a mutation.
#[derive(Debug, Clone, PartialEq)]
pub enum MutationParams {
    None,
    SwapTo(BinOp),
    LeakAddress(u64),
    TrojanPayload { xor_mask: u64 },
    ReplaceConstant(u64),
}

impl MutationParams {
    pub fn describe(&self) -> String {
        match self {
            MutationParams::None => "-".to_string(),
            MutationParams::SwapTo(op) => format!("op := {}", op.symbol()),
            MutationParams::LeakAddress(a) => format!("leak address {a}"),
            MutationParams::TrojanPayload { xor_mask } => {
                format!("payload xor {xor_mask:#x}")
            }
            MutationParams::ReplaceConstant(v) => format!("constant := {v:#x}"),
        }
    }
}

/// One reproducible design edit.
#[derive(Debug, Clone)]
pub struct MutationSpec {
    pub operator: MutationOperator,
    pub site: MutationSite,
    pub parameters: MutationParams,
    pub seed: u64,
}

/// A vulnerable design variant produced by one mutation.
#[derive(Debug, Clone)]
pub struct VulnInstance {
    pub instance_id: String,
    pub base_design: String,
    pub spec: MutationSpec,
    pub mutated_source: String,
    pub intended_class: VulnClass,
}

// ----------------------------------------------------------------------
// Host/expression walking
// ----------------------------------------------------------------------

fn preorder<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    out.push(e);
    match e {
        Expr::BitSelect { index, .. } => preorder(index, out),
        Expr::PartSelect { msb, lsb, .. } => {
            preorder(msb, out);
            preorder(lsb, out);
        }
        Expr::Unary { operand, .. } | Expr::SignedCast { operand, .. } => preorder(operand, out),
        Expr::Binary { lhs, rhs, .. } => {
            preorder(lhs, out);
            preorder(rhs, out);
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            preorder(cond, out);
            preorder(then_expr, out);
            preorder(else_expr, out);
        }
        Expr::Concat { parts, .. } => {
            for p in parts {
                preorder(p, out);
            }
        }
        Expr::Const { .. } | Expr::Ident { .. } => {}
    }
}

fn rewrite_nth(e: &Expr, counter: &mut usize, target: usize, f: &dyn Fn(&Expr) -> Expr) -> Expr {
    let here = *counter;
    *counter += 1;
    if here == target {
        return f(e);
    }
    match e {
        Expr::BitSelect { base, index, span } => Expr::BitSelect {
            base: base.clone(),
            index: Box::new(rewrite_nth(index, counter, target, f)),
            span: span.clone(),
        },
        Expr::PartSelect { base, msb, lsb, span } => Expr::PartSelect {
            base: base.clone(),
            msb: Box::new(rewrite_nth(msb, counter, target, f)),
            lsb: Box::new(rewrite_nth(lsb, counter, target, f)),
            span: span.clone(),
        },
        Expr::Unary { op, operand, span } => Expr::Unary {
            op: *op,
            operand: Box::new(rewrite_nth(operand, counter, target, f)),
            span: span.clone(),
        },
        Expr::SignedCast { operand, span } => Expr::SignedCast {
            operand: Box::new(rewrite_nth(operand, counter, target, f)),
            span: span.clone(),
        },
        Expr::Binary { op, lhs, rhs, span } => Expr::Binary {
            op: *op,
            lhs: Box::new(rewrite_nth(lhs, counter, target, f)),
            rhs: Box::new(rewrite_nth(rhs, counter, target, f)),
            span: span.clone(),
        },
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            span,
        } => Expr::Ternary {
            cond: Box::new(rewrite_nth(cond, counter, target, f)),
            then_expr: Box::new(rewrite_nth(then_expr, counter, target, f)),
            else_expr: Box::new(rewrite_nth(else_expr, counter, target, f)),
            span: span.clone(),
        },
        Expr::Concat { parts, span } => Expr::Concat {
            parts: parts
                .iter()
                .map(|p| rewrite_nth(p, counter, target, f))
                .collect(),
            span: span.clone(),
        },
        other => other.clone(),
    }
}

/// Every expression host of the top module, in source order.
fn hosts(m: &AstModule) -> Vec<(ExprHost, Expr)> {
    let mut out = Vec::new();
    for (item_idx, item) in m.items.iter().enumerate() {
        match item {
            ModuleItem::ContinuousAssign(a) => {
                if let Some(idx) = &a.target.index {
                    out.push((
                        ExprHost::AssignTargetIndex { item: item_idx },
                        (**idx).clone(),
                    ));
                }
                out.push((ExprHost::AssignValue { item: item_idx }, a.value.clone()));
            }
            ModuleItem::Always(b) => {
                stmt_hosts(&b.body, StmtPath::new(item_idx, Vec::new()), &mut out);
            }
            _ => {}
        }
    }
    out
}

fn stmt_hosts(stmt: &Stmt, path: StmtPath, out: &mut Vec<(ExprHost, Expr)>) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for (i, s) in stmts.iter().enumerate() {
                stmt_hosts(s, path.child(i), out);
            }
        }
        Stmt::Blocking { target, value, .. } | Stmt::NonBlocking { target, value, .. } => {
            if let Some(idx) = &target.index {
                out.push((
                    ExprHost::StmtTargetIndex { at: path.clone() },
                    (**idx).clone(),
                ));
            }
            out.push((ExprHost::StmtValue { at: path.clone() }, value.clone()));
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            ..
        } => {
            out.push((ExprHost::StmtCond { at: path.clone() }, cond.clone()));
            stmt_hosts(then_stmt, path.child(0), out);
            if let Some(e) = else_stmt {
                stmt_hosts(e, path.child(1), out);
            }
        }
        Stmt::Case {
            selector,
            items,
            default,
            ..
        } => {
            out.push((ExprHost::CaseSelector { at: path.clone() }, selector.clone()));
            for (i, item) in items.iter().enumerate() {
                stmt_hosts(&item.body, path.child(i), out);
            }
            if let Some(d) = default {
                stmt_hosts(d, path.child(items.len()), out);
            }
        }
        Stmt::ImmediateAssert { .. } | Stmt::For { .. } => {}
    }
}

pub(crate) fn swap_peers_of(op: BinOp) -> Vec<BinOp> {
    match op {
        BinOp::And => vec![BinOp::Or, BinOp::Xor],
        BinOp::Or => vec![BinOp::And, BinOp::Xor],
        BinOp::Xor => vec![BinOp::And, BinOp::Or],
        BinOp::LogAnd => vec![BinOp::LogOr],
        BinOp::LogOr => vec![BinOp::LogAnd],
        BinOp::Eq => vec![BinOp::Neq],
        BinOp::Neq => vec![BinOp::Eq],
        BinOp::Lt => vec![BinOp::Le, BinOp::Gt, BinOp::Ge],
        BinOp::Le => vec![BinOp::Lt, BinOp::Gt, BinOp::Ge],
        BinOp::Gt => vec![BinOp::Lt, BinOp::Le, BinOp::Ge],
        BinOp::Ge => vec![BinOp::Lt, BinOp::Le, BinOp::Gt],
        BinOp::Add => vec![BinOp::Sub],
        BinOp::Sub => vec![BinOp::Add],
        _ => Vec::new(),
    }
}

/// Top-level operands of an `&&`/`||`/`&`/`|` chain.
fn guard_operands(cond: &Expr) -> Vec<&Expr> {
    fn walk<'a>(e: &'a Expr, root_op: BinOp, out: &mut Vec<&'a Expr>) {
        match e {
            Expr::Binary { op, lhs, rhs, .. } if *op == root_op => {
                walk(lhs, root_op, out);
                walk(rhs, root_op, out);
            }
            other => out.push(other),
        }
    }
    match cond {
        Expr::Binary { op, .. }
            if matches!(op, BinOp::LogAnd | BinOp::LogOr | BinOp::And | BinOp::Or) =>
        {
            let mut out = Vec::new();
            walk(cond, *op, &mut out);
            out
        }
        _ => Vec::new(),
    }
}

/// Deterministic, source-ordered enumeration of all sites where `op`
/// applies in the top module of the design.
pub fn list_sites(design: &ElaboratedDesign, op: MutationOperator) -> Vec<MutationSite> {
    let info = design.top_module();
    let m = &info.ast;
    let module = m.name.clone();
    let mut out = Vec::new();
    match op {
        MutationOperator::InvertSignal => {
            for (host, expr) in hosts(m) {
                let mut nodes = Vec::new();
                preorder(&expr, &mut nodes);
                for (i, node) in nodes.iter().enumerate() {
                    if let Expr::Ident { name, .. } = node {
                        out.push(MutationSite {
                            module: module.clone(),
                            kind: SiteKind::ExprNode {
                                host: host.clone(),
                                node: i,
                            },
                            span: node.span().clone(),
                            description: format!("invert use of `{name}`"),
                        });
                    }
                }
            }
        }
        MutationOperator::SwapOperator => {
            for (host, expr) in hosts(m) {
                let mut nodes = Vec::new();
                preorder(&expr, &mut nodes);
                for (i, node) in nodes.iter().enumerate() {
                    if let Expr::Binary { op, .. } = node {
                        if !swap_peers_of(*op).is_empty() {
                            out.push(MutationSite {
                                module: module.clone(),
                                kind: SiteKind::ExprNode {
                                    host: host.clone(),
                                    node: i,
                                },
                                span: node.span().clone(),
                                description: format!("swap `{}`", op.symbol()),
                            });
                        }
                    }
                }
            }
        }
        MutationOperator::RemoveGuard => {
            collect_guard_sites(m, &module, &mut out);
        }
        MutationOperator::BypassCheck => {
            for (host, expr) in hosts(m) {
                if let ExprHost::StmtCond { at } = host {
                    out.push(MutationSite {
                        module: module.clone(),
                        kind: SiteKind::Guard {
                            at,
                            part: GuardPart::Whole,
                        },
                        span: expr.span().clone(),
                        description: "force guard to 1'b1".to_string(),
                    });
                }
            }
        }
        MutationOperator::LeakWire => {
            collect_array_writes(m, &module, &mut out);
        }
        MutationOperator::InsertTrojan => {
            let threshold = BigRational::new(BigInt::one(), BigInt::from(2u8).pow(16));
            let rare = find_rare_conditions(design, &threshold);
            for cond in rare.into_iter().take(10) {
                if cond.module != module {
                    continue;
                }
                out.push(MutationSite {
                    module: module.clone(),
                    kind: SiteKind::RareCondition {
                        cond: cond.condition.clone(),
                        text: cond.rendered.clone(),
                    },
                    span: SourceSpan::synthetic(),
                    description: format!("trojan trigger `{}`", cond.rendered),
                });
            }
        }
        MutationOperator::MisassignConstant => {
            collect_case_constants(m, &module, &mut out);
        }
    }
    out
}

fn collect_guard_sites(m: &AstModule, module: &str, out: &mut Vec<MutationSite>) {
    fn walk(stmt: &Stmt, path: StmtPath, module: &str, out: &mut Vec<MutationSite>) {
        match stmt {
            Stmt::Block { stmts, .. } => {
                for (i, s) in stmts.iter().enumerate() {
                    walk(s, path.child(i), module, out);
                }
            }
            Stmt::If {
                cond,
                then_stmt,
                else_stmt,
                span,
            } => {
                for (i, operand) in guard_operands(cond).iter().enumerate() {
                    out.push(MutationSite {
                        module: module.to_string(),
                        kind: SiteKind::Guard {
                            at: path.clone(),
                            part: GuardPart::Operand(i),
                        },
                        span: operand.span().clone(),
                        description: "drop one guard term".to_string(),
                    });
                }
                if else_stmt.is_none() {
                    out.push(MutationSite {
                        module: module.to_string(),
                        kind: SiteKind::Guard {
                            at: path.clone(),
                            part: GuardPart::Whole,
                        },
                        span: span.clone(),
                        description: "remove whole guard".to_string(),
                    });
                }
                walk(then_stmt, path.child(0), module, out);
                if let Some(e) = else_stmt {
                    walk(e, path.child(1), module, out);
                }
            }
            Stmt::Case { items, default, .. } => {
                for (i, item) in items.iter().enumerate() {
                    walk(&item.body, path.child(i), module, out);
                }
                if let Some(d) = default {
                    walk(d, path.child(items.len()), module, out);
                }
            }
            _ => {}
        }
    }
    for (item_idx, item) in m.items.iter().enumerate() {
        if let ModuleItem::Always(a) = item {
            walk(&a.body, StmtPath::new(item_idx, Vec::new()), module, out);
        }
    }
}

fn collect_array_writes(m: &AstModule, module: &str, out: &mut Vec<MutationSite>) {
    fn walk(
        stmt: &Stmt,
        path: StmtPath,
        m: &AstModule,
        module: &str,
        out: &mut Vec<MutationSite>,
    ) {
        match stmt {
            Stmt::Block { stmts, .. } => {
                for (i, s) in stmts.iter().enumerate() {
                    walk(s, path.child(i), m, module, out);
                }
            }
            Stmt::NonBlocking { target, span, .. } if target.index.is_some() => {
                let is_array = m
                    .decl(&target.base)
                    .map(|d| d.array_dim.is_some())
                    .unwrap_or(false);
                if is_array {
                    out.push(MutationSite {
                        module: module.to_string(),
                        kind: SiteKind::ArrayWrite { at: path },
                        span: span.clone(),
                        description: format!("forward {}[k] to the output port", target.base),
                    });
                }
            }
            Stmt::If {
                then_stmt,
                else_stmt,
                ..
            } => {
                walk(then_stmt, path.child(0), m, module, out);
                if let Some(e) = else_stmt {
                    walk(e, path.child(1), m, module, out);
                }
            }
            Stmt::Case { items, default, .. } => {
                for (i, item) in items.iter().enumerate() {
                    walk(&item.body, path.child(i), m, module, out);
                }
                if let Some(d) = default {
                    walk(d, path.child(items.len()), m, module, out);
                }
            }
            _ => {}
        }
    }
    for (item_idx, item) in m.items.iter().enumerate() {
        if let ModuleItem::Always(a) = item {
            if matches!(a.sensitivity, Sensitivity::Edges(_)) {
                walk(
                    &a.body,
                    StmtPath::new(item_idx, Vec::new()),
                    m,
                    module,
                    out,
                );
            }
        }
    }
}

fn collect_case_constants(m: &AstModule, module: &str, out: &mut Vec<MutationSite>) {
    fn walk(stmt: &Stmt, path: StmtPath, module: &str, out: &mut Vec<MutationSite>) {
        match stmt {
            Stmt::Block { stmts, .. } => {
                for (i, s) in stmts.iter().enumerate() {
                    walk(s, path.child(i), module, out);
                }
            }
            Stmt::Case { items, default, .. } => {
                for (i, item) in items.iter().enumerate() {
                    if let Stmt::NonBlocking { value, span, .. } = &item.body {
                        if let Some(current) = value.const_value() {
                            out.push(MutationSite {
                                module: module.to_string(),
                                kind: SiteKind::CaseConstant {
                                    at: path.child(i),
                                    current,
                                },
                                span: span.clone(),
                                description: format!("replace constant {current:#x}"),
                            });
                            continue;
                        }
                    }
                    walk(&item.body, path.child(i), module, out);
                }
                if let Some(d) = default {
                    walk(d, path.child(items.len()), module, out);
                }
            }
            Stmt::If {
                then_stmt,
                else_stmt,
                ..
            } => {
                walk(then_stmt, path.child(0), module, out);
                if let Some(e) = else_stmt {
                    walk(e, path.child(1), module, out);
                }
            }
            _ => {}
        }
    }
    for (item_idx, item) in m.items.iter().enumerate() {
        if let ModuleItem::Always(a) = item {
            walk(&a.body, StmtPath::new(item_idx, Vec::new()), module, out);
        }
    }
}

// ----------------------------------------------------------------------
// Application
// ----------------------------------------------------------------------

fn host_expr_mut<'a>(m: &'a mut AstModule, host: &ExprHost) -> Option<&'a mut Expr> {
    fn stmt_at_mut<'a>(m: &'a mut AstModule, at: &StmtPath) -> Option<&'a mut Stmt> {
        let item = m.items.get_mut(at.item)?;
        let ModuleItem::Always(a) = item else {
            return None;
        };
        let mut stmt = &mut a.body;
        for idx in &at.path {
            stmt = match stmt {
                Stmt::Block { stmts, .. } => stmts.get_mut(*idx)?,
                Stmt::If {
                    then_stmt,
                    else_stmt,
                    ..
                } => match idx {
                    0 => then_stmt.as_mut(),
                    1 => else_stmt.as_deref_mut()?,
                    _ => return None,
                },
                Stmt::Case { items, default, .. } => {
                    let n = items.len();
                    if *idx < n {
                        &mut items[*idx].body
                    } else if *idx == n {
                        default.as_deref_mut()?
                    } else {
                        return None;
                    }
                }
                _ => return None,
            };
        }
        Some(stmt)
    }
    match host {
        ExprHost::AssignValue { item } => match m.items.get_mut(*item)? {
            ModuleItem::ContinuousAssign(a) => Some(&mut a.value),
            _ => None,
        },
        ExprHost::AssignTargetIndex { item } => match m.items.get_mut(*item)? {
            ModuleItem::ContinuousAssign(a) => a.target.index.as_deref_mut(),
            _ => None,
        },
        ExprHost::StmtValue { at } => match stmt_at_mut(m, at)? {
            Stmt::Blocking { value, .. } | Stmt::NonBlocking { value, .. } => Some(value),
            _ => None,
        },
        ExprHost::StmtTargetIndex { at } => match stmt_at_mut(m, at)? {
            Stmt::Blocking { target, .. } | Stmt::NonBlocking { target, .. } => {
                target.index.as_deref_mut()
            }
            _ => None,
        },
        ExprHost::StmtCond { at } => match stmt_at_mut(m, at)? {
            Stmt::If { cond, .. } => Some(cond),
            _ => None,
        },
        ExprHost::CaseSelector { at } => match stmt_at_mut(m, at)? {
            Stmt::Case { selector, .. } => Some(selector),
            _ => None,
        },
    }
}

/// First output port declared as a register in the module.
fn first_output_reg(m: &AstModule) -> Option<(String, u32)> {
    for port in &m.ports {
        if port.direction != Direction::Output {
            continue;
        }
        if let Some(decl) = m.decl(&port.name) {
            if decl.kind == NetKind::Reg && decl.array_dim.is_none() {
                let width = decl
                    .width
                    .as_ref()
                    .and_then(|r| r.msb.const_value().map(|m| m as u32 + 1))
                    .unwrap_or(1);
                return Some((port.name.clone(), width));
            }
        }
    }
    None
}

/// Applies one mutation to the source, returning a parsing, elaborating
/// instance.
pub fn apply(source: &str, origin: &str, top: &str, spec: &MutationSpec) -> Result<VulnInstance> {
    let mut modules = parse_source(source, origin)?;
    let module = modules
        .iter_mut()
        .find(|m| m.name == spec.site.module)
        .ok_or(MutationError::InvalidSite)?;

    match (&spec.operator, &spec.site.kind) {
        (MutationOperator::InvertSignal, SiteKind::ExprNode { host, node }) => {
            let expr = host_expr_mut(module, host).ok_or(MutationError::InvalidSite)?;
            let mut counter = 0;
            *expr = rewrite_nth(expr, &mut counter, *node, &|e| {
                Expr::unary(UnaryOp::BitNot, e.clone())
            });
        }
        (MutationOperator::SwapOperator, SiteKind::ExprNode { host, node }) => {
            let MutationParams::SwapTo(new_op) = &spec.parameters else {
                return Err(MutationError::InvalidSite);
            };
            let new_op = *new_op;
            let expr = host_expr_mut(module, host).ok_or(MutationError::InvalidSite)?;
            let mut counter = 0;
            *expr = rewrite_nth(expr, &mut counter, *node, &move |e| match e {
                Expr::Binary { lhs, rhs, span, .. } => Expr::Binary {
                    op: new_op,
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                    span: span.clone(),
                },
                other => other.clone(),
            });
        }
        (MutationOperator::RemoveGuard, SiteKind::Guard { at, part }) => {
            apply_guard_edit(module, at, *part, None)?;
        }
        (MutationOperator::BypassCheck, SiteKind::Guard { at, .. }) => {
            apply_guard_edit(
                module,
                at,
                GuardPart::Whole,
                Some(Expr::sized(1, 1, LiteralBase::Bin)),
            )?;
        }
        (MutationOperator::LeakWire, SiteKind::ArrayWrite { at }) => {
            let MutationParams::LeakAddress(addr) = &spec.parameters else {
                return Err(MutationError::InvalidSite);
            };
            let (out_port, _) = first_output_reg(module).ok_or(MutationError::InvalidSite)?;
            let (array, leak) = {
                let stmt = stmt_at(module, at).ok_or(MutationError::InvalidSite)?;
                let Stmt::NonBlocking { target, .. } = stmt else {
                    return Err(MutationError::InvalidSite);
                };
                let array = target.base.clone();
                (
                    array.clone(),
                    Stmt::NonBlocking {
                        target: LValue::ident(out_port, SourceSpan::synthetic()),
                        value: Expr::BitSelect {
                            base: array,
                            index: Box::new(Expr::number(*addr)),
                            span: SourceSpan::synthetic(),
                        },
                        span: SourceSpan::synthetic(),
                    },
                )
            };
            let _ = array;
            insert_after(module, at, leak)?;
        }
        (MutationOperator::InsertTrojan, SiteKind::RareCondition { cond, .. }) => {
            let MutationParams::TrojanPayload { xor_mask } = &spec.parameters else {
                return Err(MutationError::InvalidSite);
            };
            let (out_port, width) = first_output_reg(module).ok_or(MutationError::InvalidSite)?;
            let clock = clock_of(module).ok_or(MutationError::InvalidSite)?;
            let mask = if width >= 64 {
                u64::MAX
            } else {
                (1u64 << width) - 1
            };
            let payload = Stmt::If {
                cond: cond.clone(),
                then_stmt: Box::new(Stmt::NonBlocking {
                    target: LValue::ident(out_port.clone(), SourceSpan::synthetic()),
                    value: Expr::binary(
                        BinOp::Xor,
                        Expr::ident(&out_port),
                        Expr::sized(*xor_mask & mask, width, LiteralBase::Hex),
                    ),
                    span: SourceSpan::synthetic(),
                }),
                else_stmt: None,
                span: SourceSpan::synthetic(),
            };
            module.items.push(ModuleItem::Always(AlwaysBlock {
                sensitivity: Sensitivity::Edges(vec![EdgeSpec {
                    edge: Edge::Pos,
                    signal: clock,
                    span: SourceSpan::synthetic(),
                }]),
                body: payload,
                span: SourceSpan::synthetic(),
            }));
        }
        (MutationOperator::MisassignConstant, SiteKind::CaseConstant { at, .. }) => {
            let MutationParams::ReplaceConstant(value) = &spec.parameters else {
                return Err(MutationError::InvalidSite);
            };
            let stmt = stmt_at_mut_pub(module, at).ok_or(MutationError::InvalidSite)?;
            let Stmt::NonBlocking { value: v, .. } = stmt else {
                return Err(MutationError::InvalidSite);
            };
            let width = match v {
                Expr::Const { width, .. } => *width,
                _ => return Err(MutationError::InvalidSite),
            };
            *v = Expr::Const {
                value: *value,
                width,
                base: LiteralBase::Hex,
                span: SourceSpan::synthetic(),
            };
        }
        _ => return Err(MutationError::InvalidSite),
    }

    let mutated_source = render_source(&modules);
    // Validity gate: the instance must re-parse and elaborate.
    let reparsed = parse_source(&mutated_source, origin)
        .map_err(|e| MutationError::MutantRejected(e.to_string()))?;
    elaborate(reparsed, top).map_err(|e| MutationError::MutantRejected(e.to_string()))?;

    Ok(VulnInstance {
        instance_id: String::new(),
        base_design: top.to_string(),
        spec: spec.clone(),
        mutated_source,
        intended_class: spec.operator.intended_class(),
    })
}

fn clock_of(m: &AstModule) -> Option<String> {
    for item in &m.items {
        if let ModuleItem::Always(a) = item {
            if let Sensitivity::Edges(edges) = &a.sensitivity {
                if let Some(e) = edges.first() {
                    return Some(e.signal.clone());
                }
            }
        }
    }
    None
}

fn stmt_at<'a>(m: &'a AstModule, at: &StmtPath) -> Option<&'a Stmt> {
    let item = m.items.get(at.item)?;
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

fn stmt_at_mut_pub<'a>(m: &'a mut AstModule, at: &StmtPath) -> Option<&'a mut Stmt> {
    let item = m.items.get_mut(at.item)?;
    let ModuleItem::Always(a) = item else {
        return None;
    };
    let mut stmt = &mut a.body;
    for idx in &at.path {
        stmt = match stmt {
            Stmt::Block { stmts, .. } => stmts.get_mut(*idx)?,
            Stmt::If {
                then_stmt,
                else_stmt,
                ..
            } => match idx {
                0 => then_stmt.as_mut(),
                1 => else_stmt.as_deref_mut()?,
                _ => return None,
            },
            Stmt::Case { items, default, .. } => {
                let n = items.len();
                if *idx < n {
                    &mut items[*idx].body
                } else if *idx == n {
                    default.as_deref_mut()?
                } else {
                    return None;
                }
            }
            _ => return None,
        };
    }
    Some(stmt)
}

/// Removes (replacement = None) or replaces an if-guard / one of its
/// top-level operands.
fn apply_guard_edit(
    m: &mut AstModule,
    at: &StmtPath,
    part: GuardPart,
    replacement: Option<Expr>,
) -> Result<()> {
    let stmt = stmt_at_mut_pub(m, at).ok_or(MutationError::InvalidSite)?;
    let Stmt::If {
        cond,
        then_stmt,
        else_stmt,
        ..
    } = stmt
    else {
        return Err(MutationError::InvalidSite);
    };
    match (part, replacement) {
        (GuardPart::Whole, Some(new_cond)) => {
            *cond = new_cond;
        }
        (GuardPart::Whole, None) => {
            if else_stmt.is_some() {
                return Err(MutationError::InvalidSite);
            }
            let body = (**then_stmt).clone();
            *stmt = body;
        }
        (GuardPart::Operand(i), _) => {
            let ops = guard_operands(cond);
            if ops.is_empty() || i >= ops.len() {
                return Err(MutationError::InvalidSite);
            }
            let kept: Vec<Expr> = ops
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| (*e).clone())
                .collect();
            let root_op = match cond {
                Expr::Binary { op, .. } => *op,
                _ => return Err(MutationError::InvalidSite),
            };
            *cond = kept
                .into_iter()
                .reduce(|a, b| Expr::binary(root_op, a, b))
                .expect("at least one operand remains");
        }
    }
    Ok(())
}

fn insert_after(m: &mut AstModule, at: &StmtPath, new_stmt: Stmt) -> Result<()> {
    if at.path.is_empty() {
        return Err(MutationError::InvalidSite);
    }
    let mut parent_path = at.clone();
    let last = parent_path.path.pop().unwrap();
    // The parent may be a Block (insert into it) or a branch holder
    // (wrap the single statement in a block).
    if parent_path.path.is_empty() {
        let ModuleItem::Always(a) = m
            .items
            .get_mut(parent_path.item)
            .ok_or(MutationError::InvalidSite)?
        else {
            return Err(MutationError::InvalidSite);
        };
        insert_after_in(&mut a.body, &[], last, new_stmt)
    } else {
        let holder = stmt_at_mut_pub(m, &parent_path).ok_or(MutationError::InvalidSite)?;
        insert_after_in(holder, &[], last, new_stmt)
    }
}

fn insert_after_in(
    stmt: &mut Stmt,
    _unused: &[usize],
    child_idx: usize,
    new_stmt: Stmt,
) -> Result<()> {
    match stmt {
        Stmt::Block { stmts, .. } => {
            if child_idx >= stmts.len() {
                return Err(MutationError::InvalidSite);
            }
            stmts.insert(child_idx + 1, new_stmt);
            Ok(())
        }
        Stmt::If {
            then_stmt,
            else_stmt,
            ..
        } => {
            let slot = match child_idx {
                0 => then_stmt.as_mut(),
                1 => else_stmt.as_deref_mut().ok_or(MutationError::InvalidSite)?,
                _ => return Err(MutationError::InvalidSite),
            };
            let original = slot.clone();
            *slot = Stmt::Block {
                stmts: vec![original, new_stmt],
                span: SourceSpan::synthetic(),
            };
            Ok(())
        }
        Stmt::Case { items, default, .. } => {
            let n = items.len();
            let slot = if child_idx < n {
                &mut items[child_idx].body
            } else if child_idx == n {
                default.as_deref_mut().ok_or(MutationError::InvalidSite)?
            } else {
                return Err(MutationError::InvalidSite);
            };
            let original = slot.clone();
            *slot = Stmt::Block {
                stmts: vec![original, new_stmt],
                span: SourceSpan::synthetic(),
            };
            Ok(())
        }
        _ => Err(MutationError::InvalidSite),
    }
}
