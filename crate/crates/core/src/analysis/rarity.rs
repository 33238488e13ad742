//! Trigger-probability estimation under uniform independent inputs.
//!
//! Conditions with at most 16 free bits are counted exactly by
//! enumeration; wider conditions use structural rules (equality over w
//! free bits is 2^-w, conjunction multiplies, disjunction saturating-
//! adds, negation complements, anything else falls back to 1/2).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::frontend::ast::*;
use crate::frontend::elaborate::{infer_width, ElaboratedDesign, SymbolTable};
use crate::frontend::render::render_expr;

pub const UNIFORM_ASSUMPTION: &str = "uniform independent inputs";

#[derive(Debug, Clone)]
pub struct RarityEstimate {
    pub condition: Expr,
    pub probability: BigRational,
    pub assumptions: &'static str,
}

fn ratio(num: u64, denom_log2: u32) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(2u8).pow(denom_log2))
}

fn pow2_inv(bits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2u8).pow(bits))
}

/// Free variables of a condition with their full declared widths.
fn free_vars(cond: &Expr, env: &SymbolTable) -> Option<Vec<(String, u32)>> {
    let mut vars: Vec<(String, u32)> = Vec::new();
    let mut ok = true;
    cond.walk_idents(&mut |n| {
        if vars.iter().any(|(v, _)| v == n) {
            return;
        }
        match env.get(n) {
            Some(t) if t.array_len.is_none() => vars.push((n.to_string(), t.width)),
            _ => ok = false,
        }
    });
    ok.then_some(vars)
}

/// Width-aware constant evaluation matching the simulator's value
/// rules: operands widen to the operator width (sign-extending only
/// signed values), arithmetic wraps at that width.
fn eval_sized(
    expr: &Expr,
    env: &BTreeMap<String, u64>,
    symbols: &SymbolTable,
) -> Option<(u64, u32, bool)> {
    use crate::sim::engine::{mask, sign_extend};
    let extend = |bits: u64, from: u32, signed: bool, to: u32| -> u64 {
        if to <= from {
            bits & mask(to)
        } else if signed {
            (sign_extend(bits, from) as u64) & mask(to)
        } else {
            bits
        }
    };
    Some(match expr {
        Expr::Const { value, width, .. } => {
            let w = width.unwrap_or(32);
            (*value & mask(w), w, false)
        }
        Expr::Ident { name, .. } => {
            let ty = symbols.get(name)?;
            (*env.get(name)? & mask(ty.width), ty.width, ty.signed)
        }
        Expr::BitSelect { base, index, .. } => {
            let ty = symbols.get(base)?;
            if ty.array_len.is_some() {
                return None;
            }
            let v = *env.get(base)?;
            let (i, _, _) = eval_sized(index, env, symbols)?;
            let bit = if i < ty.width as u64 { (v >> i) & 1 } else { 0 };
            (bit, 1, false)
        }
        Expr::PartSelect { base, msb, lsb, .. } => {
            let v = *env.get(base)?;
            let m = msb.const_value()? as u32;
            let l = lsb.const_value()? as u32;
            ((v >> l) & mask(m - l + 1), m - l + 1, false)
        }
        Expr::Unary { op, operand, .. } => {
            let (v, w, s) = eval_sized(operand, env, symbols)?;
            match op {
                UnaryOp::Not => ((v == 0) as u64, 1, false),
                UnaryOp::BitNot => (!v & mask(w), w, s),
                UnaryOp::Neg => (v.wrapping_neg() & mask(w), w, s),
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let (a, wa, sa) = eval_sized(lhs, env, symbols)?;
            let (b, wb, sb) = eval_sized(rhs, env, symbols)?;
            if op.is_logical() {
                let v = match op {
                    BinOp::LogAnd => (a != 0 && b != 0) as u64,
                    _ => (a != 0 || b != 0) as u64,
                };
                return Some((v, 1, false));
            }
            if op.is_comparison() {
                let v = if sa && sb {
                    let (x, y) = (sign_extend(a, wa), sign_extend(b, wb));
                    match op {
                        BinOp::Eq => x == y,
                        BinOp::Neq => x != y,
                        BinOp::Lt => x < y,
                        BinOp::Le => x <= y,
                        BinOp::Gt => x > y,
                        BinOp::Ge => x >= y,
                        _ => unreachable!(),
                    }
                } else {
                    match op {
                        BinOp::Eq => a == b,
                        BinOp::Neq => a != b,
                        BinOp::Lt => a < b,
                        BinOp::Le => a <= b,
                        BinOp::Gt => a > b,
                        BinOp::Ge => a >= b,
                        _ => unreachable!(),
                    }
                };
                return Some((v as u64, 1, false));
            }
            match op {
                BinOp::Shl | BinOp::Shr => {
                    let v = if b >= 64 {
                        0
                    } else if *op == BinOp::Shl {
                        (a << b) & mask(wa)
                    } else {
                        a >> b
                    };
                    (v, wa, sa)
                }
                BinOp::Pow => (expr.const_value()?, 32, false),
                _ => {
                    let w = wa.max(wb);
                    let signed = sa && sb;
                    let (x, y) = (extend(a, wa, sa, w), extend(b, wb, sb, w));
                    let v = match op {
                        BinOp::Add => x.wrapping_add(y),
                        BinOp::Sub => x.wrapping_sub(y),
                        BinOp::Mul => x.wrapping_mul(y),
                        BinOp::Div => x.checked_div(y).unwrap_or(mask(w)),
                        BinOp::Mod => x.checked_rem(y).unwrap_or(mask(w)),
                        BinOp::And => x & y,
                        BinOp::Or => x | y,
                        BinOp::Xor => x ^ y,
                        _ => unreachable!(),
                    } & mask(w);
                    (v, w, signed)
                }
            }
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            let (c, _, _) = eval_sized(cond, env, symbols)?;
            let (t, wt, st) = eval_sized(then_expr, env, symbols)?;
            let (e, we, se) = eval_sized(else_expr, env, symbols)?;
            let w = wt.max(we);
            let pick = if c != 0 { (t, wt, st) } else { (e, we, se) };
            (extend(pick.0, pick.1, pick.2, w), w, st && se)
        }
        Expr::Concat { parts, .. } => {
            let mut bits = 0u64;
            let mut width = 0;
            for p in parts {
                let (v, w, _) = eval_sized(p, env, symbols)?;
                bits = (bits << w) | (v & mask(w));
                width += w;
            }
            (bits, width, false)
        }
        Expr::SignedCast { operand, .. } => {
            let (v, w, _) = eval_sized(operand, env, symbols)?;
            (v, w, true)
        }
    })
}

/// Exact satisfying-assignment count over the free variables; `None`
/// when the condition reads memories or unknown names.
fn count_exact(cond: &Expr, vars: &[(String, u32)], symbols: &SymbolTable) -> Option<(u64, u32)> {
    let total_bits: u32 = vars.iter().map(|(_, w)| w).sum();
    debug_assert!(total_bits <= 16);
    let mut count = 0u64;
    for combo in 0..(1u64 << total_bits) {
        let mut env = BTreeMap::new();
        let mut shift = 0;
        for (name, w) in vars {
            env.insert(name.clone(), (combo >> shift) & crate::sim::engine::mask(*w));
            shift += w;
        }
        let (v, _, _) = eval_sized(cond, &env, symbols)?;
        if v != 0 {
            count += 1;
        }
    }
    Some((count, total_bits))
}

fn structural(cond: &Expr, env: &SymbolTable) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2u8));
    match cond {
        Expr::Const { value, .. } => {
            if *value != 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }
        Expr::Binary { op, lhs, rhs, .. } => match op {
            BinOp::Eq => {
                let w = infer_width(lhs, env)
                    .map(|(w, _)| w)
                    .or_else(|_| infer_width(rhs, env).map(|(w, _)| w))
                    .unwrap_or(1);
                match (lhs.const_value(), rhs.const_value()) {
                    (Some(k), None) | (None, Some(k)) => {
                        let w = if lhs.const_value().is_some() {
                            infer_width(rhs, env).map(|(w, _)| w).unwrap_or(w)
                        } else {
                            infer_width(lhs, env).map(|(w, _)| w).unwrap_or(w)
                        };
                        if w < 64 && k > crate::sim::engine::mask(w) {
                            BigRational::zero()
                        } else {
                            pow2_inv(w)
                        }
                    }
                    _ => {
                        let wl = infer_width(lhs, env).map(|(w, _)| w).unwrap_or(1);
                        let wr = infer_width(rhs, env).map(|(w, _)| w).unwrap_or(1);
                        pow2_inv(wl.max(wr))
                    }
                }
            }
            BinOp::Neq => {
                let eq = Expr::binary(BinOp::Eq, (**lhs).clone(), (**rhs).clone());
                BigRational::one() - structural(&eq, env)
            }
            BinOp::LogAnd | BinOp::And => {
                structural(lhs, env) * structural(rhs, env)
            }
            BinOp::LogOr | BinOp::Or => {
                let sum = structural(lhs, env) + structural(rhs, env);
                if sum > BigRational::one() {
                    BigRational::one()
                } else {
                    sum
                }
            }
            _ => half,
        },
        Expr::Unary { op, operand, .. } => match op {
            UnaryOp::Not => BigRational::one() - structural(operand, env),
            UnaryOp::BitNot => {
                if matches!(infer_width(operand, env), Ok((1, _))) {
                    BigRational::one() - structural(operand, env)
                } else {
                    half
                }
            }
            UnaryOp::Neg => half,
        },
        // A bare 1-bit value is an unbiased coin under the assumption.
        Expr::Ident { .. } | Expr::BitSelect { .. } => half,
        _ => half,
    }
}

/// Probability that a 1-bit condition holds under uniform independent
/// inputs. Exact model counting is used whenever the condition's free
/// bits total at most 16.
pub fn estimate_rarity(cond: &Expr, env: &SymbolTable) -> RarityEstimate {
    let probability = match free_vars(cond, env) {
        Some(vars) => {
            let total: u32 = vars.iter().map(|(_, w)| w).sum();
            if total <= 16 {
                match count_exact(cond, &vars, env) {
                    Some((count, bits)) => ratio(count, bits),
                    None => structural(cond, env),
                }
            } else {
                structural(cond, env)
            }
        }
        None => structural(cond, env),
    };
    RarityEstimate {
        condition: cond.clone(),
        probability,
        assumptions: UNIFORM_ASSUMPTION,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RareKind {
    /// An explicit branch condition in the source.
    Branch,
    /// A synthesized equality over an output assembled from lookup-table
    /// instance lanes.
    CompositeOutput,
}

/// One candidate rare-trigger condition.
#[derive(Debug, Clone)]
pub struct RareCondition {
    pub condition: Expr,
    pub rendered: String,
    pub module: String,
    pub kind: RareKind,
    pub estimate: RarityEstimate,
    /// Discovery order within its kind, used for deterministic ranking.
    pub order: usize,
}

/// Finds branch conditions and composite output equalities whose
/// probability falls below `threshold`. Explicit branches rank before
/// synthesized composites; within a kind, source order is kept.
pub fn find_rare_conditions(
    design: &ElaboratedDesign,
    threshold: &BigRational,
) -> Vec<RareCondition> {
    let mut branches = Vec::new();
    let mut module_order: Vec<&str> = Vec::new();
    for (_, module) in &design.instances {
        if !module_order.contains(&module.as_str()) {
            module_order.push(module);
        }
    }
    for module in &module_order {
        let info = &design.modules[*module];
        for item in &info.ast.items {
            if let ModuleItem::Always(a) = item {
                collect_branch_conditions(&a.body, design, module, &mut branches);
            }
        }
    }
    let mut out = Vec::new();
    let mut order = 0;
    for (module, cond, rendered) in branches {
        if cond.const_value().is_some() {
            continue;
        }
        let est = {
            let env = &design.modules[&module].symbols;
            estimate_rarity(&cond, env)
        };
        if est.probability < *threshold && !est.probability.is_zero() {
            out.push(RareCondition {
                condition: cond,
                rendered,
                module,
                kind: RareKind::Branch,
                estimate: est,
                order,
            });
            order += 1;
        }
    }

    let mut order = 0;
    for comp in composite_output_equalities(design) {
        if comp.estimate.probability < *threshold && !comp.estimate.probability.is_zero() {
            out.push(RareCondition { order, ..comp });
            order += 1;
        }
    }
    out
}

fn collect_branch_conditions(
    stmt: &Stmt,
    design: &ElaboratedDesign,
    module: &str,
    out: &mut Vec<(String, Expr, String)>,
) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for s in stmts {
                collect_branch_conditions(s, design, module, out);
            }
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            ..
        } => {
            let rendered = design
                .slice(cond.span())
                .unwrap_or_else(|| render_expr(cond));
            out.push((module.to_string(), cond.clone(), rendered));
            collect_branch_conditions(then_stmt, design, module, out);
            if let Some(e) = else_stmt {
                collect_branch_conditions(e, design, module, out);
            }
        }
        Stmt::Case {
            selector, items, default, ..
        } => {
            for item in items {
                for label in &item.labels {
                    let cond = Expr::binary(BinOp::Eq, selector.clone(), label.clone());
                    let rendered = format!(
                        "{} == {}",
                        design
                            .slice(selector.span())
                            .unwrap_or_else(|| render_expr(selector)),
                        design
                            .slice(label.span())
                            .unwrap_or_else(|| render_expr(label))
                    );
                    out.push((module.to_string(), cond, rendered));
                }
                collect_branch_conditions(&item.body, design, module, out);
            }
            if let Some(d) = default {
                collect_branch_conditions(d, design, module, out);
            }
        }
        _ => {}
    }
}

/// A child module consisting of a single clocked constant lookup table.
struct LookupTable {
    out_port: String,
    in_width: u32,
    /// (key, value) rows in source order.
    rows: Vec<(u64, u64)>,
}

fn lookup_table_of(m: &AstModule, symbols: &SymbolTable) -> Option<LookupTable> {
    let mut clocked = m.items.iter().filter_map(|i| match i {
        ModuleItem::Always(a) if matches!(a.sensitivity, Sensitivity::Edges(_)) => Some(a),
        _ => None,
    });
    let block = clocked.next()?;
    if clocked.next().is_some() {
        return None;
    }
    let Stmt::Case {
        selector,
        items,
        default,
        ..
    } = &block.body
    else {
        return None;
    };
    if default.is_some() {
        return None;
    }
    let Expr::Ident { name: in_port, .. } = selector else {
        return None;
    };
    let mut out_port = None;
    let mut rows = Vec::new();
    for item in items {
        let Stmt::NonBlocking { target, value, .. } = &item.body else {
            return None;
        };
        match &out_port {
            None => out_port = Some(target.base.clone()),
            Some(o) if *o == target.base => {}
            _ => return None,
        }
        let v = value.const_value()?;
        for label in &item.labels {
            rows.push((label.const_value()?, v));
        }
    }
    let in_width = symbols.get(in_port)?.width;
    Some(LookupTable {
        out_port: out_port?,
        in_width,
        rows,
    })
}

/// Synthesizes `out == {v,v,...,v}` equalities for module outputs tiled
/// by lookup-table instance lanes, one per table value in table order.
/// Each lane contributes `count(v)/2^in_width`.
fn composite_output_equalities(design: &ElaboratedDesign) -> Vec<RareCondition> {
    let mut out = Vec::new();
    for (path, module) in &design.instances {
        if !path.is_empty() {
            continue; // composites are synthesized per instantiating module
        }
        let info = &design.modules[module];
        let m = &info.ast;
        // Group child output bindings per parent net.
        struct Lane {
            msb: u64,
            lsb: u64,
            table_module: String,
        }
        let mut nets: BTreeMap<String, Vec<Lane>> = BTreeMap::new();
        for item in &m.items {
            let ModuleItem::Instantiation(inst) = item else {
                continue;
            };
            let Some(child) = design.modules.get(&inst.module) else {
                continue;
            };
            if lookup_table_of(&child.ast, &child.symbols).is_none() {
                continue;
            }
            let table = lookup_table_of(&child.ast, &child.symbols).unwrap();
            for i in &inst.instances {
                for (pos, conn) in i.connections.iter().enumerate() {
                    let formal = match &conn.formal {
                        Some(f) => f.clone(),
                        None => child.ast.ports[pos].name.clone(),
                    };
                    if formal != table.out_port {
                        continue;
                    }
                    if let Expr::PartSelect { base, msb, lsb, .. } = &conn.actual {
                        if let (Some(mv), Some(lv)) = (msb.const_value(), lsb.const_value()) {
                            nets.entry(base.clone()).or_default().push(Lane {
                                msb: mv,
                                lsb: lv,
                                table_module: inst.module.clone(),
                            });
                        }
                    }
                }
            }
        }
        for (net, mut lanes) in nets {
            let Some(net_ty) = info.symbols.get(&net) else {
                continue;
            };
            lanes.sort_by_key(|l| l.lsb);
            // Lanes must tile the net exactly and share one table module.
            let table_module = lanes[0].table_module.clone();
            if lanes.iter().any(|l| l.table_module != table_module) {
                continue;
            }
            let mut covered = 0u64;
            let mut contiguous = true;
            for lane in &lanes {
                if lane.lsb != covered {
                    contiguous = false;
                    break;
                }
                covered = lane.msb + 1;
            }
            if !contiguous || covered != net_ty.width as u64 {
                continue;
            }
            let child = &design.modules[&table_module];
            let table = lookup_table_of(&child.ast, &child.symbols).unwrap();
            // Distinct table values in row order.
            let mut values: Vec<u64> = Vec::new();
            for (_, v) in &table.rows {
                if !values.contains(v) {
                    values.push(*v);
                }
            }
            for (order, v) in values.iter().enumerate() {
                let count = table.rows.iter().filter(|(_, rv)| rv == v).count() as u64;
                let lane_p = ratio(count, table.in_width);
                let mut probability = BigRational::one();
                let mut composite = 0u64;
                for lane in &lanes {
                    probability *= lane_p.clone();
                    composite |= v << lane.lsb;
                }
                let cond = Expr::binary(
                    BinOp::Eq,
                    Expr::ident(&net),
                    Expr::sized(composite, net_ty.width, LiteralBase::Hex),
                );
                let rendered = format!(
                    "{net} == {}",
                    crate::frontend::render::render_literal(
                        composite,
                        Some(net_ty.width),
                        LiteralBase::Hex
                    )
                );
                out.push(RareCondition {
                    estimate: RarityEstimate {
                        condition: cond.clone(),
                        probability,
                        assumptions: UNIFORM_ASSUMPTION,
                    },
                    condition: cond,
                    rendered,
                    module: module.clone(),
                    kind: RareKind::CompositeOutput,
                    order,
                });
            }
        }
    }
    out
}
