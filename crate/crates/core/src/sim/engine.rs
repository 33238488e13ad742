//! The simulation engine: flattened state, expression evaluation, the
//! per-cycle schedule, and assertion checking.

use std::collections::BTreeMap;

use super::concurrent::{AssertionVerdict, AttemptStatus, ConcurrentProperty, OnlineChecker};
use super::vectors::TestVectorSet;
use super::{Result, SimError};
use crate::frontend::ast::*;
use crate::frontend::elaborate::{CombUnit, ElaboratedDesign, InitValue};

/// An assertion bound to design signals for runtime evaluation.
#[derive(Debug, Clone)]
pub enum BoundAssertion {
    /// Immediate check evaluated right before the statement at `at` in
    /// every instance of `module`.
    Immediate {
        id: String,
        module: String,
        at: StmtPath,
        cond: Expr,
    },
    /// Clocked implication sampled each cycle in instance `scope`.
    Concurrent {
        id: String,
        scope: String,
        property: ConcurrentProperty,
    },
}

impl BoundAssertion {
    pub fn id(&self) -> &str {
        match self {
            BoundAssertion::Immediate { id, .. } => id,
            BoundAssertion::Concurrent { id, .. } => id,
        }
    }
}

/// One sampled value: `None` until the signal's first write.
pub type Sample = Option<u64>;

/// Per-cycle samples of every scalar signal, taken just before each
/// rising clock edge.
#[derive(Debug, Clone)]
pub struct Trace {
    pub signal_names: Vec<String>,
    pub rows: Vec<Vec<Sample>>,
    pub arm_cycle: usize,
    pub diagnostics: Vec<String>,
    name_index: BTreeMap<String, usize>,
}

impl Trace {
    pub fn cycle_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn value(&self, cycle: usize, name: &str) -> Option<Sample> {
        let col = self.column(name)?;
        self.rows.get(cycle).map(|r| r[col])
    }

    /// Tab-separated dump: header of signal names, one row per cycle,
    /// hex values, `x` for uninitialized samples.
    pub fn dump_tsv(&self) -> String {
        let mut out = self.signal_names.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|s| match s {
                    Some(v) => format!("{v:x}"),
                    None => "x".to_string(),
                })
                .collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Scalar signal names in flatten order (the trace column order).
pub fn scalar_signal_names(design: &ElaboratedDesign) -> Vec<String> {
    design
        .signals
        .iter()
        .filter(|s| s.ty.array_len.is_none())
        .map(|s| s.name.clone())
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Value {
    bits: u64,
    width: u32,
    signed: bool,
    known: bool,
}

impl Value {
    fn truthy(&self) -> bool {
        self.bits != 0
    }
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub(crate) fn sign_extend(bits: u64, width: u32) -> i64 {
    if width == 0 || width >= 64 {
        bits as i64
    } else if bits & (1u64 << (width - 1)) != 0 {
        (bits | !mask(width)) as i64
    } else {
        bits as i64
    }
}

/// Widens `v` to `width` bits, sign-extending only signed values.
fn extend(v: Value, width: u32) -> u64 {
    if width <= v.width {
        v.bits & mask(width)
    } else if v.signed {
        (sign_extend(v.bits, v.width) as u64) & mask(width)
    } else {
        v.bits
    }
}

#[derive(Debug, Clone)]
enum SignalState {
    Scalar { bits: u64, init: bool },
    Array { data: Vec<u64>, init: Vec<bool> },
}

/// Ready-to-run simulation of one elaborated design.
pub struct Simulator<'d> {
    design: &'d ElaboratedDesign,
    clock: String,
    state: Vec<SignalState>,
    /// instance path -> (local name -> flat signal id)
    scopes: BTreeMap<&'d str, BTreeMap<&'d str, usize>>,
    path_module: BTreeMap<&'d str, &'d str>,
    /// Scalar targets per comb unit, for the stability fingerprint.
    comb_targets: Vec<Vec<usize>>,
    nba_queue: Vec<(usize, Option<u64>, u64)>,
    pub diagnostics: Vec<String>,
    cycle: usize,
    armed_from: usize,
    /// (module, stmt path) -> indices into the bound immediate list.
    immediate_index: BTreeMap<(String, StmtPath), Vec<usize>>,
    immediates: Vec<(String, Expr)>,
    immediate_results: Vec<Vec<(usize, AttemptStatus)>>,
}

impl<'d> Simulator<'d> {
    pub fn new(design: &'d ElaboratedDesign, clock: &str) -> Self {
        let mut state = Vec::with_capacity(design.signals.len());
        for sig in &design.signals {
            let st = match sig.ty.array_len {
                Some(len) => {
                    let len = len as usize;
                    match sig.init {
                        Some(InitValue::ArrayFill(v)) => SignalState::Array {
                            data: vec![v & mask(sig.ty.width); len],
                            init: vec![true; len],
                        },
                        _ => SignalState::Array {
                            data: vec![0; len],
                            init: vec![false; len],
                        },
                    }
                }
                None => match sig.init {
                    Some(InitValue::Scalar(v)) => SignalState::Scalar {
                        bits: v & mask(sig.ty.width),
                        init: true,
                    },
                    _ => SignalState::Scalar {
                        bits: 0,
                        init: false,
                    },
                },
            };
            state.push(st);
        }
        let mut scopes: BTreeMap<&'d str, BTreeMap<&'d str, usize>> = BTreeMap::new();
        for (id, sig) in design.signals.iter().enumerate() {
            scopes
                .entry(sig.instance.as_str())
                .or_default()
                .insert(sig.local.as_str(), id);
        }
        let path_module = design
            .instances
            .iter()
            .map(|(p, m)| (p.as_str(), m.as_str()))
            .collect();

        let mut sim = Simulator {
            design,
            clock: clock.to_string(),
            state,
            scopes,
            path_module,
            comb_targets: Vec::new(),
            nba_queue: Vec::new(),
            diagnostics: Vec::new(),
            cycle: 0,
            armed_from: 0,
            immediate_index: BTreeMap::new(),
            immediates: Vec::new(),
            immediate_results: Vec::new(),
        };
        sim.comb_targets = sim.compute_comb_targets();
        sim
    }

    fn compute_comb_targets(&self) -> Vec<Vec<usize>> {
        let design = self.design;
        let mut out = Vec::with_capacity(design.comb_schedule.len());
        for unit in &design.comb_schedule {
            let targets: Vec<usize> = match unit {
                CombUnit::Assign { path, item } => {
                    let module = self.path_module[path.as_str()];
                    match &design.modules[module].ast.items[*item] {
                        ModuleItem::ContinuousAssign(a) => {
                            vec![self.sig_id(path, &a.target.base).unwrap()]
                        }
                        _ => Vec::new(),
                    }
                }
                CombUnit::Block { path, item } => {
                    let module = self.path_module[path.as_str()];
                    match &design.modules[module].ast.items[*item] {
                        ModuleItem::Always(b) => {
                            let mut w = std::collections::BTreeSet::new();
                            crate::frontend::elaborate::written_signals(&b.body, &mut w);
                            w.iter()
                                .map(|n| self.sig_id(path, n).unwrap())
                                .collect()
                        }
                        _ => Vec::new(),
                    }
                }
                CombUnit::InputBind {
                    child_path, formal, ..
                } => vec![self.sig_id(child_path, formal).unwrap()],
                CombUnit::OutputBind {
                    parent_path, target, ..
                } => vec![self.sig_id(parent_path, &target.base).unwrap()],
            };
            out.push(targets);
        }
        out
    }

    pub fn cycle(&self) -> usize {
        self.cycle
    }

    pub fn set_armed_from(&mut self, cycle: usize) {
        self.armed_from = cycle;
    }

    fn sig_id(&self, scope: &str, local: &str) -> Result<usize> {
        if let Some(id) = self.scopes.get(scope).and_then(|m| m.get(local)) {
            return Ok(*id);
        }
        // Dotted names resolve hierarchically (mined-rule literals).
        if local.contains('.') {
            let full = if scope.is_empty() {
                local.to_string()
            } else {
                format!("{scope}.{local}")
            };
            if let Some(id) = self.design.signal_id(&full) {
                return Ok(id);
            }
        }
        Err(SimError::UnknownSignal(if scope.is_empty() {
            local.to_string()
        } else {
            format!("{scope}.{local}")
        }))
    }

    /// Directly overwrites a register (used by enumeration oracles).
    pub fn poke(&mut self, scope: &str, local: &str, value: u64) -> Result<()> {
        let id = self.sig_id(scope, local)?;
        let width = self.design.signals[id].ty.width;
        match &mut self.state[id] {
            SignalState::Scalar { bits, init } => {
                *bits = value & mask(width);
                *init = true;
            }
            SignalState::Array { .. } => {
                return Err(SimError::UnknownSignal(format!(
                    "cannot poke memory `{local}`"
                )))
            }
        }
        Ok(())
    }

    pub fn read(&self, scope: &str, local: &str) -> Result<Sample> {
        let id = self.sig_id(scope, local)?;
        match &self.state[id] {
            SignalState::Scalar { bits, init } => Ok(init.then_some(*bits)),
            SignalState::Array { .. } => Err(SimError::UnknownSignal(format!(
                "cannot read memory `{local}` as a scalar"
            ))),
        }
    }

    pub fn set_input(&mut self, name: &str, value: u64) -> Result<()> {
        let id = self.sig_id("", name)?;
        let width = self.design.signals[id].ty.width;
        if width < 64 && value > mask(width) {
            return Err(SimError::WidthMismatch {
                signal: name.to_string(),
                value,
                width,
            });
        }
        self.store_scalar(id, value & mask(width));
        Ok(())
    }

    // ------------------------------------------------------------------
    // Expression evaluation
    // ------------------------------------------------------------------

    fn read_scalar(&self, id: usize) -> Value {
        let ty = self.design.signals[id].ty;
        match &self.state[id] {
            SignalState::Scalar { bits, init } => Value {
                bits: *bits,
                width: ty.width,
                signed: ty.signed,
                known: *init,
            },
            SignalState::Array { .. } => Value {
                bits: 0,
                width: ty.width,
                signed: ty.signed,
                known: false,
            },
        }
    }

    fn eval(&mut self, expr: &Expr, scope: &str) -> Result<Value> {
        Ok(match expr {
            Expr::Const { value, width, .. } => {
                let w = width.unwrap_or(32);
                Value {
                    bits: *value & mask(w),
                    width: w,
                    signed: false,
                    known: true,
                }
            }
            Expr::Ident { name, .. } => {
                let id = self.sig_id(scope, name)?;
                self.read_scalar(id)
            }
            Expr::BitSelect { base, index, .. } => {
                let id = self.sig_id(scope, base)?;
                let idx = self.eval(index, scope)?;
                let ty = self.design.signals[id].ty;
                if let Some(len) = ty.array_len {
                    if !idx.known {
                        return Ok(Value {
                            bits: 0,
                            width: ty.width,
                            signed: ty.signed,
                            known: false,
                        });
                    }
                    if idx.bits >= len {
                        self.diagnostics.push(format!(
                            "cycle {}: read of {base}[{:#x}] is out of range",
                            self.cycle, idx.bits
                        ));
                        return Ok(Value {
                            bits: 0,
                            width: ty.width,
                            signed: ty.signed,
                            known: true,
                        });
                    }
                    match &self.state[id] {
                        SignalState::Array { data, init } => Value {
                            bits: data[idx.bits as usize],
                            width: ty.width,
                            signed: ty.signed,
                            known: init[idx.bits as usize],
                        },
                        _ => unreachable!(),
                    }
                } else {
                    let v = self.read_scalar(id);
                    let bit = if idx.known && idx.bits < v.width as u64 {
                        (v.bits >> idx.bits) & 1
                    } else {
                        0
                    };
                    Value {
                        bits: bit,
                        width: 1,
                        signed: false,
                        known: v.known && idx.known,
                    }
                }
            }
            Expr::PartSelect { base, msb, lsb, .. } => {
                let id = self.sig_id(scope, base)?;
                let v = self.read_scalar(id);
                let m = msb.const_value().expect("elaboration checked") as u32;
                let l = lsb.const_value().expect("elaboration checked") as u32;
                let width = m - l + 1;
                Value {
                    bits: (v.bits >> l) & mask(width),
                    width,
                    signed: false,
                    known: v.known,
                }
            }
            Expr::Unary { op, operand, .. } => {
                let v = self.eval(operand, scope)?;
                match op {
                    UnaryOp::Not => Value {
                        bits: (!v.truthy()) as u64,
                        width: 1,
                        signed: false,
                        known: v.known,
                    },
                    UnaryOp::BitNot => Value {
                        bits: !v.bits & mask(v.width),
                        ..v
                    },
                    UnaryOp::Neg => Value {
                        bits: v.bits.wrapping_neg() & mask(v.width),
                        ..v
                    },
                }
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let a = self.eval(lhs, scope)?;
                let b = self.eval(rhs, scope)?;
                let known = a.known && b.known;
                if op.is_logical() {
                    let bits = match op {
                        BinOp::LogAnd => (a.truthy() && b.truthy()) as u64,
                        _ => (a.truthy() || b.truthy()) as u64,
                    };
                    Value {
                        bits,
                        width: 1,
                        signed: false,
                        known,
                    }
                } else if op.is_comparison() {
                    let bits = if a.signed && b.signed {
                        compare_i(*op, sign_extend(a.bits, a.width), sign_extend(b.bits, b.width))
                    } else {
                        compare_u(*op, a.bits, b.bits)
                    };
                    Value {
                        bits,
                        width: 1,
                        signed: false,
                        known,
                    }
                } else {
                    match op {
                        BinOp::Shl | BinOp::Shr => {
                            let width = a.width;
                            let sh = if b.known { b.bits } else { 0 };
                            let bits = if sh >= 64 {
                                0
                            } else if *op == BinOp::Shl {
                                (a.bits << sh) & mask(width)
                            } else {
                                a.bits >> sh
                            };
                            Value {
                                bits,
                                width,
                                signed: a.signed,
                                known,
                            }
                        }
                        BinOp::Pow => {
                            // Restricted to constant contexts by elaboration.
                            let bits = expr.const_value().unwrap_or(0);
                            Value {
                                bits,
                                width: 32,
                                signed: false,
                                known: true,
                            }
                        }
                        _ => {
                            let width = a.width.max(b.width);
                            let signed = a.signed && b.signed;
                            let x = extend(a, width);
                            let y = extend(b, width);
                            let bits = match op {
                                BinOp::Add => x.wrapping_add(y),
                                BinOp::Sub => x.wrapping_sub(y),
                                BinOp::Mul => x.wrapping_mul(y),
                                BinOp::Div | BinOp::Mod => {
                                    if y == 0 {
                                        self.diagnostics.push(format!(
                                            "cycle {}: division by zero",
                                            self.cycle
                                        ));
                                        mask(width)
                                    } else if signed {
                                        let sx = sign_extend(x, width);
                                        let sy = sign_extend(y, width);
                                        (if *op == BinOp::Div {
                                            sx.wrapping_div(sy)
                                        } else {
                                            sx.wrapping_rem(sy)
                                        }) as u64
                                    } else if *op == BinOp::Div {
                                        x / y
                                    } else {
                                        x % y
                                    }
                                }
                                BinOp::And => x & y,
                                BinOp::Or => x | y,
                                BinOp::Xor => x ^ y,
                                _ => unreachable!(),
                            } & mask(width);
                            Value {
                                bits,
                                width,
                                signed,
                                known,
                            }
                        }
                    }
                }
            }
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
                ..
            } => {
                let c = self.eval(cond, scope)?;
                let t = self.eval(then_expr, scope)?;
                let e = self.eval(else_expr, scope)?;
                let width = t.width.max(e.width);
                let taken = if c.truthy() { t } else { e };
                Value {
                    bits: extend(taken, width),
                    width,
                    signed: t.signed && e.signed,
                    known: c.known && taken.known,
                }
            }
            Expr::Concat { parts, .. } => {
                let mut bits = 0u64;
                let mut width = 0u32;
                let mut known = true;
                for p in parts {
                    let v = self.eval(p, scope)?;
                    bits = (bits << v.width) | (v.bits & mask(v.width));
                    width += v.width;
                    known &= v.known;
                }
                Value {
                    bits,
                    width,
                    signed: false,
                    known,
                }
            }
            Expr::SignedCast { operand, .. } => {
                let v = self.eval(operand, scope)?;
                Value { signed: true, ..v }
            }
        })
    }

    /// Evaluates a 1-bit condition; `None` when any read is uninitialized.
    pub fn eval_condition(&mut self, expr: &Expr, scope: &str) -> Result<Option<bool>> {
        let v = self.eval(expr, scope)?;
        Ok(v.known.then_some(v.truthy()))
    }

    // ------------------------------------------------------------------
    // Assignment
    // ------------------------------------------------------------------

    fn write_target(
        &mut self,
        lv: &LValue,
        scope: &str,
        value: Value,
        nonblocking: bool,
    ) -> Result<()> {
        let id = self.sig_id(scope, &lv.base)?;
        let ty = self.design.signals[id].ty;
        if let Some(idx_expr) = &lv.index {
            let idx = self.eval(idx_expr, scope)?;
            if let Some(len) = ty.array_len {
                if !idx.known {
                    self.diagnostics.push(format!(
                        "cycle {}: write to {} with uninitialized index dropped",
                        self.cycle, lv.base
                    ));
                    return Ok(());
                }
                if idx.bits >= len {
                    self.diagnostics.push(format!(
                        "cycle {}: write of {}[{:#x}] is out of range",
                        self.cycle, lv.base, idx.bits
                    ));
                    return Ok(());
                }
                let bits = resize_for_target(value, ty.width);
                if nonblocking {
                    self.nba_queue.push((id, Some(idx.bits), bits));
                } else {
                    match &mut self.state[id] {
                        SignalState::Array { data, init } => {
                            data[idx.bits as usize] = bits;
                            init[idx.bits as usize] = true;
                        }
                        _ => unreachable!(),
                    }
                }
                return Ok(());
            }
            // Bit write on a vector.
            if !idx.known || idx.bits >= ty.width as u64 {
                return Ok(());
            }
            let current = match &self.state[id] {
                SignalState::Scalar { bits, .. } => *bits,
                _ => unreachable!(),
            };
            let bits = (current & !(1 << idx.bits)) | ((value.bits & 1) << idx.bits);
            if nonblocking {
                self.nba_queue.push((id, None, bits));
            } else {
                self.store_scalar(id, bits);
            }
            return Ok(());
        }
        if let Some((msb, lsb)) = &lv.part {
            let m = msb.const_value().expect("elaboration checked") as u32;
            let l = lsb.const_value().expect("elaboration checked") as u32;
            let w = m - l + 1;
            let current = match &self.state[id] {
                SignalState::Scalar { bits, .. } => *bits,
                _ => unreachable!(),
            };
            let field = resize_for_target(value, w);
            let bits = (current & !(mask(w) << l)) | (field << l);
            if nonblocking {
                self.nba_queue.push((id, None, bits));
            } else {
                self.store_scalar(id, bits);
            }
            return Ok(());
        }
        let bits = resize_for_target(value, ty.width);
        if nonblocking {
            self.nba_queue.push((id, None, bits));
        } else {
            self.store_scalar(id, bits);
        }
        Ok(())
    }

    fn store_scalar(&mut self, id: usize, value: u64) {
        match &mut self.state[id] {
            SignalState::Scalar { bits, init } => {
                *bits = value;
                *init = true;
            }
            _ => unreachable!(),
        }
    }

    fn commit_nba(&mut self) {
        let queue = std::mem::take(&mut self.nba_queue);
        for (id, index, value) in queue {
            match index {
                Some(i) => match &mut self.state[id] {
                    SignalState::Array { data, init } => {
                        data[i as usize] = value;
                        init[i as usize] = true;
                    }
                    _ => unreachable!(),
                },
                None => self.store_scalar(id, value),
            }
        }
    }

    // ------------------------------------------------------------------
    // Statement execution
    // ------------------------------------------------------------------

    fn exec_stmt(
        &mut self,
        stmt: &Stmt,
        scope: &str,
        module: &str,
        path: &StmtPath,
        check_asserts: bool,
    ) -> Result<()> {
        if check_asserts {
            self.run_immediates_at(module, path, scope)?;
        }
        match stmt {
            Stmt::Block { stmts, .. } => {
                for (i, s) in stmts.iter().enumerate() {
                    self.exec_stmt(s, scope, module, &path.child(i), check_asserts)?;
                }
            }
            Stmt::Blocking { target, value, .. } => {
                let v = self.eval(value, scope)?;
                self.write_target(target, scope, v, false)?;
            }
            Stmt::NonBlocking { target, value, .. } => {
                let v = self.eval(value, scope)?;
                self.write_target(target, scope, v, true)?;
            }
            Stmt::If {
                cond,
                then_stmt,
                else_stmt,
                ..
            } => {
                let c = self.eval(cond, scope)?;
                if c.truthy() {
                    self.exec_stmt(then_stmt, scope, module, &path.child(0), check_asserts)?;
                } else if let Some(e) = else_stmt {
                    self.exec_stmt(e, scope, module, &path.child(1), check_asserts)?;
                }
            }
            Stmt::Case {
                selector,
                items,
                default,
                ..
            } => {
                let sel = self.eval(selector, scope)?;
                let mut taken = None;
                'outer: for (i, item) in items.iter().enumerate() {
                    for label in &item.labels {
                        let lv = self.eval(label, scope)?;
                        let width = sel.width.max(lv.width);
                        if extend(sel, width) == extend(lv, width) {
                            taken = Some((i, &item.body));
                            break 'outer;
                        }
                    }
                }
                match taken {
                    Some((i, body)) => {
                        self.exec_stmt(body, scope, module, &path.child(i), check_asserts)?
                    }
                    None => {
                        if let Some(d) = default {
                            self.exec_stmt(
                                d,
                                scope,
                                module,
                                &path.child(items.len()),
                                check_asserts,
                            )?;
                        }
                    }
                }
            }
            Stmt::ImmediateAssert { cond, span, .. } => {
                if check_asserts && self.cycle >= self.armed_from {
                    let id = format!("{module}@{}:{}", span.line, span.column);
                    let v = self.eval(cond, scope)?;
                    if !v.known {
                        return Err(SimError::XPropagationToAssertion {
                            cycle: self.cycle,
                            id,
                        });
                    }
                    self.record_inline(&id, v.truthy());
                }
            }
            Stmt::For { .. } => {
                // Initial-only; lowered during elaboration.
            }
        }
        Ok(())
    }

    fn run_immediates_at(&mut self, module: &str, path: &StmtPath, scope: &str) -> Result<()> {
        let key = (module.to_string(), path.clone());
        let Some(ids) = self.immediate_index.get(&key).cloned() else {
            return Ok(());
        };
        if self.cycle < self.armed_from {
            return Ok(());
        }
        for i in ids {
            let (id, cond) = self.immediates[i].clone();
            let v = self.eval(&cond, scope)?;
            if !v.known {
                return Err(SimError::XPropagationToAssertion {
                    cycle: self.cycle,
                    id,
                });
            }
            let status = if v.truthy() {
                AttemptStatus::Pass
            } else {
                AttemptStatus::Fail
            };
            self.immediate_results[i].push((self.cycle, status));
        }
        Ok(())
    }

    fn record_inline(&mut self, id: &str, pass: bool) {
        let idx = match self.immediates.iter().position(|(i, _)| i == id) {
            Some(i) => i,
            None => {
                self.immediates.push((id.to_string(), Expr::number(0)));
                self.immediate_results.push(Vec::new());
                self.immediates.len() - 1
            }
        };
        let status = if pass {
            AttemptStatus::Pass
        } else {
            AttemptStatus::Fail
        };
        self.immediate_results[idx].push((self.cycle, status));
    }

    // ------------------------------------------------------------------
    // Cycle phases
    // ------------------------------------------------------------------

    /// Executes blocks whose non-clock edge signal is active (level
    /// semantics at row-application time), then commits.
    pub fn apply_async_resets(&mut self) -> Result<()> {
        let design = self.design;
        for cb in &design.clocked_blocks {
            let ModuleItem::Always(a) = &design.modules[&cb.module].ast.items[cb.item] else {
                continue;
            };
            let Sensitivity::Edges(edges) = &a.sensitivity else {
                continue;
            };
            let mut active = false;
            for e in edges {
                if e.signal == self.clock {
                    continue;
                }
                let id = self.sig_id(&cb.path, &e.signal)?;
                let v = self.read_scalar(id);
                let is_active = match e.edge {
                    Edge::Pos => v.known && v.truthy(),
                    Edge::Neg => v.known && !v.truthy(),
                };
                if is_active {
                    active = true;
                }
            }
            if active {
                let path = StmtPath::new(cb.item, Vec::new());
                self.exec_stmt(&a.body, &cb.path, &cb.module, &path, false)?;
            }
        }
        self.commit_nba();
        Ok(())
    }

    /// Runs the combinational schedule to a fixpoint. The topological
    /// order converges in one pass for acyclic designs; iteration up to
    /// the cap guards the invariant.
    pub fn settle(&mut self) -> Result<()> {
        const CAP: usize = 1000;
        let design = self.design;
        for _ in 0..CAP {
            let before = self.comb_fingerprint();
            for unit in &design.comb_schedule {
                self.run_comb_unit(unit)?;
            }
            if self.comb_fingerprint() == before {
                return Ok(());
            }
        }
        Err(SimError::CombinationalNonConvergence { cycle: self.cycle })
    }

    fn comb_fingerprint(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for targets in &self.comb_targets {
            for &id in targets {
                if let SignalState::Scalar { bits, init } = &self.state[id] {
                    h ^= bits.wrapping_add(*init as u64).wrapping_add((id as u64) << 32);
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }

    fn run_comb_unit(&mut self, unit: &'d CombUnit) -> Result<()> {
        let design = self.design;
        match unit {
            CombUnit::Assign { path, item } => {
                let module = self.path_module[path.as_str()];
                let ModuleItem::ContinuousAssign(a) = &design.modules[module].ast.items[*item]
                else {
                    return Ok(());
                };
                let v = self.eval(&a.value, path)?;
                if v.known {
                    self.write_target(&a.target, path, v, false)?;
                }
            }
            CombUnit::Block { path, item } => {
                let module = self.path_module[path.as_str()].to_string();
                let ModuleItem::Always(b) = &design.modules[module.as_str()].ast.items[*item]
                else {
                    return Ok(());
                };
                let p = StmtPath::new(*item, Vec::new());
                self.exec_stmt(&b.body, path, &module, &p, false)?;
            }
            CombUnit::InputBind {
                child_path,
                formal,
                parent_path,
                actual,
            } => {
                let v = self.eval(actual, parent_path)?;
                if v.known {
                    let id = self.sig_id(child_path, formal)?;
                    let width = design.signals[id].ty.width;
                    self.store_scalar(id, resize_for_target(v, width));
                }
            }
            CombUnit::OutputBind {
                parent_path,
                target,
                child_path,
                formal,
            } => {
                let id = self.sig_id(child_path, formal)?;
                let v = self.read_scalar(id);
                if v.known {
                    self.write_target(target, parent_path, v, false)?;
                }
            }
        }
        Ok(())
    }

    /// Executes every clocked block for one rising edge, then commits.
    pub fn step_clock(&mut self) -> Result<()> {
        let design = self.design;
        for cb in &design.clocked_blocks {
            let ModuleItem::Always(a) = &design.modules[&cb.module].ast.items[cb.item] else {
                continue;
            };
            let Sensitivity::Edges(edges) = &a.sensitivity else {
                continue;
            };
            if !edges.iter().any(|e| e.signal == self.clock) {
                continue;
            }
            let path = StmtPath::new(cb.item, Vec::new());
            self.exec_stmt(&a.body, &cb.path, &cb.module, &path, true)?;
        }
        self.commit_nba();
        self.cycle += 1;
        Ok(())
    }

    pub fn sample_row(&self) -> Vec<Sample> {
        let mut row = Vec::new();
        for (id, sig) in self.design.signals.iter().enumerate() {
            if sig.ty.array_len.is_some() {
                continue;
            }
            match &self.state[id] {
                SignalState::Scalar { bits, init } => row.push(init.then_some(*bits)),
                _ => unreachable!(),
            }
        }
        row
    }
}

fn resize_for_target(v: Value, width: u32) -> u64 {
    extend(v, width) & mask(width)
}

fn compare_i(op: BinOp, x: i64, y: i64) -> u64 {
    (match op {
        BinOp::Eq => x == y,
        BinOp::Neq => x != y,
        BinOp::Lt => x < y,
        BinOp::Le => x <= y,
        BinOp::Gt => x > y,
        BinOp::Ge => x >= y,
        _ => unreachable!(),
    }) as u64
}

fn compare_u(op: BinOp, x: u64, y: u64) -> u64 {
    (match op {
        BinOp::Eq => x == y,
        BinOp::Neq => x != y,
        BinOp::Lt => x < y,
        BinOp::Le => x <= y,
        BinOp::Gt => x > y,
        BinOp::Ge => x >= y,
        _ => unreachable!(),
    }) as u64
}

/// Runs `vectors` against the design, checking `assertions` plus any
/// assertion statements already embedded in the source.
pub fn run(
    design: &ElaboratedDesign,
    clock: &str,
    vectors: &TestVectorSet,
    assertions: &[BoundAssertion],
) -> Result<(Trace, Vec<AssertionVerdict>)> {
    let mut sim = Simulator::new(design, clock);

    // Bind: vector columns must cover exactly the non-clock inputs.
    let inputs = design.top_inputs(clock);
    for (name, _) in &inputs {
        if vectors.column(name).is_none() {
            return Err(SimError::MissingInput(name.clone()));
        }
    }
    for name in &vectors.input_names {
        if !inputs.iter().any(|(n, _)| n == name) {
            return Err(SimError::UnknownSignal(name.clone()));
        }
    }
    for row in &vectors.rows {
        for (name, width) in &inputs {
            let v = row[vectors.column(name).unwrap()];
            if *width < 64 && v > mask(*width) {
                return Err(SimError::WidthMismatch {
                    signal: name.clone(),
                    value: v,
                    width: *width,
                });
            }
        }
    }

    // Embedded source-level concurrent assertions join the explicit set.
    let mut all = assertions.to_vec();
    collect_source_assertions(design, &mut all);

    let mut concurrent: Vec<(String, String, ConcurrentProperty)> = Vec::new();
    for a in &all {
        match a {
            BoundAssertion::Immediate {
                id,
                module,
                at,
                cond,
            } => {
                sim.immediates.push((id.clone(), cond.clone()));
                sim.immediate_results.push(Vec::new());
                sim.immediate_index
                    .entry((module.clone(), at.clone()))
                    .or_default()
                    .push(sim.immediates.len() - 1);
            }
            BoundAssertion::Concurrent {
                id,
                scope,
                property,
            } => {
                concurrent.push((id.clone(), scope.clone(), property.clone()));
            }
        }
    }

    sim.set_armed_from(vectors.arm_cycle);
    let mut checker = OnlineChecker::new(
        concurrent.iter().map(|(id, _, _)| id.clone()).collect(),
    );

    let mut rows = Vec::with_capacity(vectors.cycles());
    for row in &vectors.rows {
        for (name, _) in &inputs {
            sim.set_input(name, row[vectors.column(name).unwrap()])?;
        }
        sim.apply_async_resets()?;
        sim.settle()?;
        let cycle = sim.cycle();
        if cycle >= vectors.arm_cycle {
            for (i, (_, scope, prop)) in concurrent.iter().enumerate() {
                let ant_val = match &prop.antecedent {
                    Some(a) => sim.eval_condition(a, scope)?,
                    None => Some(true),
                };
                let cons_val = sim.eval_condition(&prop.consequent, scope)?;
                checker.step(i, cycle, prop.next_cycle, ant_val, cons_val);
            }
        }
        rows.push(sim.sample_row());
        sim.step_clock()?;
    }

    let mut verdicts = checker.finish();
    for (i, (id, _)) in sim.immediates.iter().enumerate() {
        let attempts = sim.immediate_results[i].clone();
        let first_fail_cycle = attempts
            .iter()
            .find(|(_, s)| *s == AttemptStatus::Fail)
            .map(|(c, _)| *c);
        verdicts.push(AssertionVerdict {
            id: id.clone(),
            attempts,
            first_fail_cycle,
        });
    }

    let names = scalar_signal_names(design);
    let name_index = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    Ok((
        Trace {
            signal_names: names,
            rows,
            arm_cycle: vectors.arm_cycle,
            diagnostics: sim.diagnostics.clone(),
            name_index,
        },
        verdicts,
    ))
}

fn collect_source_assertions(design: &ElaboratedDesign, out: &mut Vec<BoundAssertion>) {
    use crate::frontend::ast::Delay as AstDelay;
    for (path, module) in &design.instances {
        let info = &design.modules[module];
        for (i, item) in info.ast.items.iter().enumerate() {
            if let ModuleItem::ConcurrentAssert(c) = item {
                let suffix = if path.is_empty() {
                    String::new()
                } else {
                    format!("/{path}")
                };
                out.push(BoundAssertion::Concurrent {
                    id: format!("{module}@item{i}{suffix}"),
                    scope: path.clone(),
                    property: ConcurrentProperty {
                        antecedent: c.antecedent.clone(),
                        consequent: c.consequent.clone(),
                        next_cycle: c.delay == AstDelay::NextCycle,
                    },
                });
            }
        }
    }
}
