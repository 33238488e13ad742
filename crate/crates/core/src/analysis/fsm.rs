//! Finite-state-machine extraction from clocked logic, plus the
//! brute-force enumeration oracle used to validate it.
//!
//! A register qualifies as a state variable when it is assigned only in
//! clocked blocks and either (a) the register itself is compared against
//! constants (case selector, equality, or a bare 1-bit condition), or
//! (b) its next value, after inlining combinational definitions, is an
//! expression over the inputs that refers back to the register.
//! Transition guards are path conditions with case labels lowered to
//! equality tests; reset branches define the reset state and are
//! excluded from the relation.

use std::collections::{BTreeMap, BTreeSet};

use super::Result;
use crate::frontend::ast::*;
use crate::frontend::elaborate::{ElaboratedDesign, SymbolTable};
use crate::sim::{SimError, Simulator};

#[derive(Debug, Clone)]
pub struct Transition {
    pub from: u64,
    pub guard: Expr,
    pub to: u64,
}

/// A combinational output pinned by the state: in state `state`,
/// `output` must equal `expr` (an expression over the inputs).
#[derive(Debug, Clone)]
pub struct OutputDef {
    pub state: u64,
    pub output: String,
    pub expr: Expr,
}

#[derive(Debug, Clone)]
pub struct FsmModel {
    pub state_var: String,
    pub state_width: u32,
    pub states: Vec<u64>,
    pub transitions: Vec<Transition>,
    pub reset_state: Option<u64>,
    pub output_defs: Vec<OutputDef>,
}

impl FsmModel {
    /// Next state under concrete input values; `None` if no guard holds
    /// (cannot happen for a well-formed extraction).
    pub fn next_state(&self, from: u64, inputs: &BTreeMap<String, u64>) -> Option<u64> {
        for t in &self.transitions {
            if t.from == from && eval_input_expr(&t.guard, inputs)? != 0 {
                return Some(t.to);
            }
        }
        None
    }
}

/// Evaluates an expression over concrete input values (1-bit semantics
/// are enough for guards; wider idents take their full value).
pub fn eval_input_expr(expr: &Expr, env: &BTreeMap<String, u64>) -> Option<u64> {
    Some(match expr {
        Expr::Const { value, .. } => *value,
        Expr::Ident { name, .. } => *env.get(name)?,
        Expr::BitSelect { base, index, .. } => {
            let v = *env.get(base)?;
            let i = eval_input_expr(index, env)?;
            (v >> i) & 1
        }
        Expr::PartSelect { base, msb, lsb, .. } => {
            let v = *env.get(base)?;
            let m = msb.const_value()?;
            let l = lsb.const_value()?;
            (v >> l) & ((1u64 << (m - l + 1)) - 1)
        }
        Expr::Unary { op, operand, .. } => {
            let v = eval_input_expr(operand, env)?;
            match op {
                UnaryOp::Not => (v == 0) as u64,
                UnaryOp::BitNot => (!v) & 1,
                UnaryOp::Neg => v.wrapping_neg(),
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let a = eval_input_expr(lhs, env)?;
            let b = eval_input_expr(rhs, env)?;
            match op {
                BinOp::Add => a.wrapping_add(b),
                BinOp::Sub => a.wrapping_sub(b),
                BinOp::Mul => a.wrapping_mul(b),
                BinOp::Div => a.checked_div(b).unwrap_or(u64::MAX),
                BinOp::Mod => a.checked_rem(b).unwrap_or(u64::MAX),
                BinOp::Pow => a.checked_pow(b as u32)?,
                BinOp::And => a & b,
                BinOp::Or => a | b,
                BinOp::Xor => a ^ b,
                BinOp::LogAnd => ((a != 0) && (b != 0)) as u64,
                BinOp::LogOr => ((a != 0) || (b != 0)) as u64,
                BinOp::Eq => (a == b) as u64,
                BinOp::Neq => (a != b) as u64,
                BinOp::Lt => (a < b) as u64,
                BinOp::Le => (a <= b) as u64,
                BinOp::Gt => (a > b) as u64,
                BinOp::Ge => (a >= b) as u64,
                BinOp::Shl => a << b.min(63),
                BinOp::Shr => a >> b.min(63),
            }
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            if eval_input_expr(cond, env)? != 0 {
                eval_input_expr(then_expr, env)?
            } else {
                eval_input_expr(else_expr, env)?
            }
        }
        Expr::Concat { .. } | Expr::SignedCast { .. } => return None,
    })
}

// ----------------------------------------------------------------------
// Symbolic partial evaluation
// ----------------------------------------------------------------------

fn is_const(e: &Expr, v: u64) -> bool {
    e.const_value() == Some(v)
}

/// Substitutes `var := value` and folds.
fn subst(expr: &Expr, var: &str, value: u64, width: u32) -> Expr {
    let rec = |e: &Expr| subst(e, var, value, width);
    match expr {
        Expr::Ident { name, span } => {
            if name == var {
                Expr::Const {
                    value,
                    width: Some(width),
                    base: LiteralBase::Dec,
                    span: span.clone(),
                }
            } else {
                expr.clone()
            }
        }
        Expr::Const { .. } => expr.clone(),
        Expr::BitSelect { base, index, span } => Expr::BitSelect {
            base: base.clone(),
            index: Box::new(rec(index)),
            span: span.clone(),
        },
        Expr::PartSelect { .. } => expr.clone(),
        Expr::Unary { op, operand, span } => Expr::Unary {
            op: *op,
            operand: Box::new(rec(operand)),
            span: span.clone(),
        },
        Expr::Binary { op, lhs, rhs, span } => Expr::Binary {
            op: *op,
            lhs: Box::new(rec(lhs)),
            rhs: Box::new(rec(rhs)),
            span: span.clone(),
        },
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            span,
        } => Expr::Ternary {
            cond: Box::new(rec(cond)),
            then_expr: Box::new(rec(then_expr)),
            else_expr: Box::new(rec(else_expr)),
            span: span.clone(),
        },
        Expr::Concat { parts, span } => Expr::Concat {
            parts: parts.iter().map(rec).collect(),
            span: span.clone(),
        },
        Expr::SignedCast { operand, span } => Expr::SignedCast {
            operand: Box::new(rec(operand)),
            span: span.clone(),
        },
    }
}

/// Is this expression 1-bit wide under `env`? Errors count as "no".
fn is_one_bit(e: &Expr, env: &SymbolTable) -> bool {
    crate::frontend::elaborate::infer_width(e, env)
        .map(|(w, _)| w == 1)
        .unwrap_or(false)
}

/// Folds constants and normalizes 1-bit logic so extracted guards read
/// like hand-written boolean conditions (`&&`, `||`, `!`).
pub fn simplify(expr: &Expr, env: &SymbolTable) -> Expr {
    if let Some(v) = expr.const_value() {
        if let Expr::Const { .. } = expr {
            return expr.clone();
        }
        return Expr::Const {
            value: v,
            width: None,
            base: LiteralBase::Dec,
            span: expr.span().clone(),
        };
    }
    match expr {
        Expr::Unary { op, operand, span } => {
            let o = simplify(operand, env);
            match op {
                UnaryOp::Not | UnaryOp::BitNot if is_one_bit(&o, env) || *op == UnaryOp::Not => {
                    if is_const(&o, 0) {
                        return Expr::number(1);
                    }
                    if let Some(v) = o.const_value() {
                        return Expr::number((v == 0) as u64);
                    }
                    // !!e => e
                    if let Expr::Unary {
                        op: UnaryOp::Not,
                        operand: inner,
                        ..
                    } = &o
                    {
                        return (**inner).clone();
                    }
                    Expr::Unary {
                        op: UnaryOp::Not,
                        operand: Box::new(o),
                        span: span.clone(),
                    }
                }
                _ => Expr::Unary {
                    op: *op,
                    operand: Box::new(o),
                    span: span.clone(),
                },
            }
        }
        Expr::Binary { op, lhs, rhs, span } => {
            let a = simplify(lhs, env);
            let b = simplify(rhs, env);
            let both_one_bit = is_one_bit(&a, env) && is_one_bit(&b, env);
            // Normalize 1-bit bitwise ops to logical form.
            let op = match op {
                BinOp::And if both_one_bit => BinOp::LogAnd,
                BinOp::Or if both_one_bit => BinOp::LogOr,
                other => *other,
            };
            match op {
                BinOp::LogAnd => {
                    if is_const(&a, 0) || is_const(&b, 0) {
                        return Expr::number(0);
                    }
                    if a.const_value().is_some_and(|v| v != 0) {
                        return b;
                    }
                    if b.const_value().is_some_and(|v| v != 0) {
                        return a;
                    }
                }
                BinOp::LogOr => {
                    if a.const_value().is_some_and(|v| v != 0)
                        || b.const_value().is_some_and(|v| v != 0)
                    {
                        return Expr::number(1);
                    }
                    if is_const(&a, 0) {
                        return b;
                    }
                    if is_const(&b, 0) {
                        return a;
                    }
                }
                BinOp::Eq if is_one_bit(&a, env) => {
                    if is_const(&b, 1) {
                        return a;
                    }
                    if is_const(&b, 0) {
                        return simplify(&Expr::unary(UnaryOp::Not, a), env);
                    }
                }
                BinOp::Neq if is_one_bit(&a, env) => {
                    if is_const(&b, 0) {
                        return a;
                    }
                    if is_const(&b, 1) {
                        return simplify(&Expr::unary(UnaryOp::Not, a), env);
                    }
                }
                _ => {}
            }
            if let (Some(x), Some(y)) = (a.const_value(), b.const_value()) {
                let folded = Expr::binary(op, Expr::number(x), Expr::number(y));
                if let Some(v) = folded.const_value() {
                    return Expr::number(v);
                }
            }
            Expr::Binary {
                op,
                lhs: Box::new(a),
                rhs: Box::new(b),
                span: span.clone(),
            }
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            span,
        } => {
            let c = simplify(cond, env);
            if let Some(v) = c.const_value() {
                return if v != 0 {
                    simplify(then_expr, env)
                } else {
                    simplify(else_expr, env)
                };
            }
            Expr::Ternary {
                cond: Box::new(c),
                then_expr: Box::new(simplify(then_expr, env)),
                else_expr: Box::new(simplify(else_expr, env)),
                span: span.clone(),
            }
        }
        other => other.clone(),
    }
}

// ----------------------------------------------------------------------
// Combinational inlining
// ----------------------------------------------------------------------

/// Builds, per combinationally-driven signal of the top module, its
/// definition as a single expression (blocked if/else definitions
/// become nested ternaries).
fn comb_definitions(m: &AstModule) -> BTreeMap<String, Expr> {
    let mut defs = BTreeMap::new();
    for item in &m.items {
        match item {
            ModuleItem::ContinuousAssign(a) => {
                if a.target.index.is_none() && a.target.part.is_none() {
                    defs.insert(a.target.base.clone(), a.value.clone());
                }
            }
            ModuleItem::Always(b) if matches!(b.sensitivity, Sensitivity::Combinational) => {
                let mut written = BTreeSet::new();
                crate::frontend::elaborate::written_signals(&b.body, &mut written);
                for w in written {
                    if let Some(def) = stmt_to_expr(&b.body, &w) {
                        defs.insert(w, def);
                    }
                }
            }
            _ => {}
        }
    }
    defs
}

/// Definition of `target` as an expression over the block's reads, or
/// `None` when a path leaves it unassigned (latch shape).
fn stmt_to_expr(stmt: &Stmt, target: &str) -> Option<Expr> {
    match stmt {
        Stmt::Block { stmts, .. } => {
            // Last assignment on the straight-line path wins.
            let mut def = None;
            for s in stmts {
                if let Some(e) = stmt_to_expr(s, target) {
                    def = Some(e);
                }
            }
            def
        }
        Stmt::Blocking { target: lv, value, .. } if lv.base == target && lv.index.is_none() => {
            Some(value.clone())
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            span,
        } => {
            let t = stmt_to_expr(then_stmt, target)?;
            let e = stmt_to_expr(else_stmt.as_deref()?, target)?;
            Some(Expr::Ternary {
                cond: Box::new(cond.clone()),
                then_expr: Box::new(t),
                else_expr: Box::new(e),
                span: span.clone(),
            })
        }
        _ => None,
    }
}

/// Replaces combinationally-defined identifiers by their definitions.
fn inline_comb(expr: &Expr, defs: &BTreeMap<String, Expr>, depth: usize) -> Expr {
    if depth == 0 {
        return expr.clone();
    }
    match expr {
        Expr::Ident { name, .. } => match defs.get(name) {
            Some(def) => inline_comb(def, defs, depth - 1),
            None => expr.clone(),
        },
        Expr::Unary { op, operand, span } => Expr::Unary {
            op: *op,
            operand: Box::new(inline_comb(operand, defs, depth)),
            span: span.clone(),
        },
        Expr::Binary { op, lhs, rhs, span } => Expr::Binary {
            op: *op,
            lhs: Box::new(inline_comb(lhs, defs, depth)),
            rhs: Box::new(inline_comb(rhs, defs, depth)),
            span: span.clone(),
        },
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            span,
        } => Expr::Ternary {
            cond: Box::new(inline_comb(cond, defs, depth)),
            then_expr: Box::new(inline_comb(then_expr, defs, depth)),
            else_expr: Box::new(inline_comb(else_expr, defs, depth)),
            span: span.clone(),
        },
        other => other.clone(),
    }
}

// ----------------------------------------------------------------------
// Extraction
// ----------------------------------------------------------------------

/// One guarded assignment reached in a clocked block:
/// `(path condition, assigned value, via reset branch)`.
struct GuardedAssign {
    guard: Vec<Expr>,
    rhs: Expr,
    is_reset: bool,
}

fn collect_assigns(
    stmt: &Stmt,
    target: &str,
    resets: &BTreeSet<String>,
    guard: &mut Vec<Expr>,
    on_reset_path: bool,
    out: &mut Vec<GuardedAssign>,
) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for s in stmts {
                collect_assigns(s, target, resets, guard, on_reset_path, out);
            }
        }
        Stmt::NonBlocking { target: lv, value, .. } | Stmt::Blocking { target: lv, value, .. } => {
            if lv.base == target && lv.index.is_none() && lv.part.is_none() {
                out.push(GuardedAssign {
                    guard: guard.clone(),
                    rhs: value.clone(),
                    is_reset: on_reset_path,
                });
            }
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            ..
        } => {
            // A guard that is exactly the asserted reset signal marks
            // the reset branch; the protocol keeps it deasserted during
            // operation so neither polarity joins the relation guards.
            let reset_then = match cond {
                Expr::Ident { name, .. } => resets.contains(name),
                Expr::Unary {
                    op: UnaryOp::Not | UnaryOp::BitNot,
                    operand,
                    ..
                } => matches!(operand.as_ref(), Expr::Ident { name, .. } if resets.contains(name)),
                _ => false,
            };
            if reset_then {
                collect_assigns(then_stmt, target, resets, guard, true, out);
                if let Some(e) = else_stmt {
                    collect_assigns(e, target, resets, guard, on_reset_path, out);
                }
            } else {
                guard.push(cond.clone());
                collect_assigns(then_stmt, target, resets, guard, on_reset_path, out);
                guard.pop();
                if let Some(e) = else_stmt {
                    guard.push(Expr::unary(UnaryOp::Not, cond.clone()));
                    collect_assigns(e, target, resets, guard, on_reset_path, out);
                    guard.pop();
                }
            }
        }
        Stmt::Case {
            selector,
            items,
            default,
            ..
        } => {
            for item in items {
                let mut label_eq: Option<Expr> = None;
                for label in &item.labels {
                    let eq = Expr::binary(BinOp::Eq, selector.clone(), label.clone());
                    label_eq = Some(match label_eq {
                        None => eq,
                        Some(prev) => Expr::binary(BinOp::LogOr, prev, eq),
                    });
                }
                guard.push(label_eq.expect("case items have labels"));
                collect_assigns(&item.body, target, resets, guard, on_reset_path, out);
                guard.pop();
            }
            if let Some(d) = default {
                let mut none_match: Option<Expr> = None;
                for item in items {
                    for label in &item.labels {
                        let ne = Expr::binary(BinOp::Neq, selector.clone(), label.clone());
                        none_match = Some(match none_match {
                            None => ne,
                            Some(prev) => Expr::binary(BinOp::LogAnd, prev, ne),
                        });
                    }
                }
                if let Some(g) = none_match {
                    guard.push(g);
                    collect_assigns(d, target, resets, guard, on_reset_path, out);
                    guard.pop();
                } else {
                    collect_assigns(d, target, resets, guard, on_reset_path, out);
                }
            }
        }
        Stmt::ImmediateAssert { .. } | Stmt::For { .. } => {}
    }
}

fn conjoin(parts: &[Expr]) -> Expr {
    match parts.len() {
        0 => Expr::number(1),
        _ => {
            let mut it = parts.iter().cloned();
            let first = it.next().unwrap();
            it.fold(first, |acc, e| Expr::binary(BinOp::LogAnd, acc, e))
        }
    }
}

/// Does the register feed back into its own next value?
fn self_dependent(rhs: &Expr, var: &str, defs: &BTreeMap<String, Expr>) -> bool {
    inline_comb(rhs, defs, 8)
        .referenced_idents()
        .iter()
        .any(|n| n == var)
}

/// Is the register compared against constants (or used bare in a
/// condition) anywhere in the module?
fn compared_to_constant(m: &AstModule, var: &str) -> bool {
    fn expr_compares(e: &Expr, var: &str) -> bool {
        match e {
            Expr::Binary { op, lhs, rhs, .. } => {
                let direct = op.is_comparison()
                    && ((matches!(lhs.as_ref(), Expr::Ident { name, .. } if name == var)
                        && rhs.const_value().is_some())
                        || (matches!(rhs.as_ref(), Expr::Ident { name, .. } if name == var)
                            && lhs.const_value().is_some()));
                direct || expr_compares(lhs, var) || expr_compares(rhs, var)
            }
            Expr::Unary { operand, .. } => expr_compares(operand, var),
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
                ..
            } => {
                expr_compares(cond, var)
                    || expr_compares(then_expr, var)
                    || expr_compares(else_expr, var)
            }
            _ => false,
        }
    }
    fn cond_uses(e: &Expr, var: &str) -> bool {
        // A bare (or negated) use as a condition counts as a compare.
        match e {
            Expr::Ident { name, .. } => name == var,
            Expr::Unary {
                op: UnaryOp::Not | UnaryOp::BitNot,
                operand,
                ..
            } => matches!(operand.as_ref(), Expr::Ident { name, .. } if name == var),
            _ => expr_compares(e, var),
        }
    }
    fn stmt_compares(s: &Stmt, var: &str) -> bool {
        match s {
            Stmt::Block { stmts, .. } => stmts.iter().any(|s| stmt_compares(s, var)),
            Stmt::If {
                cond,
                then_stmt,
                else_stmt,
                ..
            } => {
                cond_uses(cond, var)
                    || stmt_compares(then_stmt, var)
                    || else_stmt.as_ref().is_some_and(|e| stmt_compares(e, var))
            }
            Stmt::Case {
                selector,
                items,
                default,
                ..
            } => {
                matches!(selector, Expr::Ident { name, .. } if name == var)
                    || items.iter().any(|i| stmt_compares(&i.body, var))
                    || default.as_ref().is_some_and(|d| stmt_compares(d, var))
            }
            _ => false,
        }
    }
    m.items.iter().any(|item| match item {
        ModuleItem::Always(a) => stmt_compares(&a.body, var),
        _ => false,
    })
}

/// Extracts one FSM per detected state register of the top module.
/// `hint` forces consideration of one register name.
pub fn extract_fsm(design: &ElaboratedDesign, hint: Option<&str>) -> Vec<FsmModel> {
    let info = design.top_module();
    let m = &info.ast;
    let symbols = &info.symbols;
    let defs = comb_definitions(m);
    let resets: BTreeSet<String> = design
        .async_resets("clk")
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let inputs: BTreeSet<String> = m
        .ports
        .iter()
        .filter(|p| p.direction == Direction::Input)
        .map(|p| p.name.clone())
        .collect();

    // Which registers are written where?
    let mut clocked_targets: BTreeSet<String> = BTreeSet::new();
    let mut other_targets: BTreeSet<String> = BTreeSet::new();
    for item in &m.items {
        match item {
            ModuleItem::Always(a) => {
                let mut w = BTreeSet::new();
                crate::frontend::elaborate::written_signals(&a.body, &mut w);
                match a.sensitivity {
                    Sensitivity::Edges(_) => clocked_targets.extend(w),
                    Sensitivity::Combinational => other_targets.extend(w),
                }
            }
            ModuleItem::ContinuousAssign(a) => {
                other_targets.insert(a.target.base.clone());
            }
            _ => {}
        }
    }

    let mut models = Vec::new();
    for decl in &m.decls {
        let name = &decl.name;
        let ty = symbols[name];
        if ty.array_len.is_some() || ty.width > 12 {
            continue;
        }
        if !clocked_targets.contains(name) || other_targets.contains(name) {
            continue;
        }
        if m.port(name).map(|p| p.direction) == Some(Direction::Input) {
            continue;
        }

        // Gather guarded assignments across clocked blocks.
        let mut assigns = Vec::new();
        for (item_idx, item) in m.items.iter().enumerate() {
            let _ = item_idx;
            if let ModuleItem::Always(a) = item {
                if matches!(a.sensitivity, Sensitivity::Edges(_)) {
                    let mut guard = Vec::new();
                    collect_assigns(&a.body, name, &resets, &mut guard, false, &mut assigns);
                }
            }
        }
        if assigns.is_empty() {
            continue;
        }

        let hinted = hint == Some(name.as_str());
        let qualifies = hinted || {
            let compared = compared_to_constant(m, name);
            let input_fed = assigns.iter().filter(|a| !a.is_reset).all(|a| {
                inline_comb(&a.rhs, &defs, 8)
                    .referenced_idents()
                    .iter()
                    .all(|n| inputs.contains(n) || n == name)
            });
            let self_dep = assigns
                .iter()
                .filter(|a| !a.is_reset)
                .any(|a| self_dependent(&a.rhs, name, &defs));
            compared || (input_fed && self_dep)
        };
        if !qualifies {
            continue;
        }

        // The non-reset next-state logic must also be expressible over
        // inputs and the state variable itself.
        let expressible = assigns.iter().filter(|a| !a.is_reset).all(|a| {
            let full = inline_comb(&conjoin(&a.guard), &defs, 8);
            let rhs = inline_comb(&a.rhs, &defs, 8);
            full.referenced_idents()
                .iter()
                .chain(rhs.referenced_idents().iter())
                .all(|n| inputs.contains(n) || n == name)
        });
        if !expressible {
            continue;
        }

        let reset_state = assigns
            .iter()
            .find(|a| a.is_reset)
            .and_then(|a| a.rhs.const_value());

        let mut seeds: BTreeSet<u64> = BTreeSet::new();
        if let Some(r) = reset_state {
            seeds.insert(r);
        }
        for a in &assigns {
            if let Some(c) = a.rhs.const_value() {
                seeds.insert(c & crate::sim::engine::mask(ty.width));
            }
        }
        if seeds.is_empty() {
            seeds.insert(0);
        }

        // Breadth-first closure over reachable states.
        let mut states: BTreeSet<u64> = BTreeSet::new();
        let mut worklist: Vec<u64> = seeds.iter().copied().collect();
        let mut transitions = Vec::new();
        let max_states = 1usize << ty.width.min(6);
        while let Some(from) = worklist.pop() {
            if !states.insert(from) {
                continue;
            }
            if states.len() > max_states {
                break;
            }
            let mut taken_guards: Vec<Expr> = Vec::new();
            for a in assigns.iter().filter(|a| !a.is_reset) {
                let guard_full = inline_comb(&conjoin(&a.guard), &defs, 8);
                let guard_sub = simplify(&subst(&guard_full, name, from, ty.width), symbols);
                if is_const(&guard_sub, 0) {
                    continue;
                }
                let rhs_full = inline_comb(&a.rhs, &defs, 8);
                let rhs_sub = simplify(&subst(&rhs_full, name, from, ty.width), symbols);
                if let Some(to) = rhs_sub.const_value() {
                    let to = to & crate::sim::engine::mask(ty.width);
                    taken_guards.push(guard_sub.clone());
                    transitions.push(Transition {
                        from,
                        guard: guard_sub,
                        to,
                    });
                    if !states.contains(&to) {
                        worklist.push(to);
                    }
                } else {
                    // Value-bearing next state: split per target value.
                    // The split covers every value, so the assignment's
                    // own guard is what counts toward exhaustiveness.
                    taken_guards.push(guard_sub.clone());
                    for to in 0..(1u64 << ty.width) {
                        let eq = Expr::binary(
                            BinOp::Eq,
                            rhs_sub.clone(),
                            Expr::number(to),
                        );
                        let g = simplify(
                            &Expr::binary(BinOp::LogAnd, guard_sub.clone(), eq),
                            symbols,
                        );
                        if is_const(&g, 0) {
                            continue;
                        }
                        transitions.push(Transition {
                            from,
                            guard: g,
                            to,
                        });
                        if !states.contains(&to) {
                            worklist.push(to);
                        }
                    }
                }
            }
            // Implicit retention when no guard fires.
            if !taken_guards.is_empty() {
                let any = taken_guards
                    .into_iter()
                    .reduce(|a, b| Expr::binary(BinOp::LogOr, a, b))
                    .unwrap();
                if any.const_value() != Some(1) {
                    let stay = simplify(&Expr::unary(UnaryOp::Not, any), symbols);
                    if !is_const(&stay, 0) {
                        transitions.push(Transition {
                            from,
                            guard: stay,
                            to: from,
                        });
                    }
                }
            }
        }

        // Merge ties (two paths assigning the same from->to) by
        // disjunction, ordering the relation by (from, to).
        let mut merged: BTreeMap<(u64, u64), Expr> = BTreeMap::new();
        for t in transitions {
            match merged.entry((t.from, t.to)) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(t.guard);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let g = Expr::binary(BinOp::LogOr, e.get().clone(), t.guard);
                    *e.get_mut() = simplify(&g, symbols);
                }
            }
        }
        let transitions: Vec<Transition> = merged
            .into_iter()
            .map(|((from, to), guard)| Transition { from, guard, to })
            .collect();

        // Combinational outputs pinned by the state value.
        let mut output_defs = Vec::new();
        for (out_name, def) in &defs {
            let full = inline_comb(def, &defs, 8);
            let refs = full.referenced_idents();
            if !refs.iter().any(|n| n == name) {
                continue;
            }
            if !refs.iter().all(|n| inputs.contains(n) || n == name) {
                continue;
            }
            for &s in &states {
                let pinned = simplify(&subst(&full, name, s, ty.width), symbols);
                output_defs.push(OutputDef {
                    state: s,
                    output: out_name.clone(),
                    expr: pinned,
                });
            }
        }

        models.push(FsmModel {
            state_var: name.clone(),
            state_width: ty.width,
            states: states.into_iter().collect(),
            transitions,
            reset_state,
            output_defs,
        });
    }
    models
}

/// One enumerated step: (state value, input assignment, next state).
pub type OracleEntry = (u64, BTreeMap<String, u64>, u64);

/// Brute-force transition relation: simulate one clock step from every
/// (state value, input combination). Reset inputs are held inactive and
/// excluded from the enumeration.
pub fn fsm_oracle(
    design: &ElaboratedDesign,
    clock: &str,
    state_var: &str,
    max_input_bits: u32,
) -> Result<Vec<OracleEntry>> {
    let resets: BTreeMap<String, Edge> = design.async_resets(clock).into_iter().collect();
    let inputs: Vec<(String, u32)> = design
        .top_inputs(clock)
        .into_iter()
        .filter(|(n, _)| !resets.contains_key(n))
        .collect();
    let total_bits: u32 = inputs.iter().map(|(_, w)| w).sum();
    if total_bits > max_input_bits {
        return Err(SimError::TooManyInputBits(total_bits, max_input_bits).into());
    }
    let width = design
        .top_module()
        .symbols
        .get(state_var)
        .map(|t| t.width)
        .unwrap_or(1);

    let mut relation = Vec::new();
    for state in 0..(1u64 << width) {
        for combo in 0..(1u64 << total_bits) {
            let mut sim = Simulator::new(design, clock);
            for (name, edge) in &resets {
                sim.set_input(name, matches!(edge, Edge::Neg) as u64)?;
            }
            let mut env = BTreeMap::new();
            let mut shift = 0;
            for (name, w) in &inputs {
                let v = (combo >> shift) & crate::sim::engine::mask(*w);
                shift += w;
                sim.set_input(name, v)?;
                env.insert(name.clone(), v);
            }
            sim.poke("", state_var, state)?;
            sim.apply_async_resets()?;
            sim.settle()?;
            sim.step_clock()?;
            // Next-state registers may feed combinational paths; the
            // post-edge value is what the relation records.
            let next = sim
                .read("", state_var)?
                .expect("state register written every cycle");
            relation.push((state, env, next));
        }
    }
    Ok(relation)
}
