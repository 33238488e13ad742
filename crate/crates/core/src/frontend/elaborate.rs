//! Elaboration: instance-tree construction, symbol resolution, width
//! inference, lint checks, initialization lowering, and combinational
//! scheduling for the simulator.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::{FrontendError, Result};
use crate::span::SourceSpan;

/// Resolved type of one declared signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigType {
    pub width: u32,
    pub signed: bool,
    /// Element count for memories; `None` for plain nets.
    pub array_len: Option<u64>,
    pub kind: NetKind,
    pub is_input: bool,
    pub is_output: bool,
}

pub type SymbolTable = BTreeMap<String, SigType>;

/// Lowered initialization for one signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitValue {
    Scalar(u64),
    /// Whole-array fill with one value (the memory zero-fill idiom).
    ArrayFill(u64),
}

#[derive(Debug, Clone)]
pub struct ModuleInfo {
    pub ast: AstModule,
    pub symbols: SymbolTable,
    pub init_values: BTreeMap<String, InitValue>,
}

/// One node of the resolved instance tree.
#[derive(Debug, Clone)]
pub struct InstanceNode {
    /// Hierarchical path, empty for the top instance.
    pub path: String,
    pub module: String,
    pub children: Vec<InstanceNode>,
}

impl InstanceNode {
    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|c| c.depth())
            .max()
            .unwrap_or(0)
    }
}

/// A signal in the flattened design.
#[derive(Debug, Clone)]
pub struct FlatSignal {
    /// Hierarchical name (`out`, `S_0.out`).
    pub name: String,
    pub instance: String,
    pub module: String,
    pub local: String,
    pub ty: SigType,
    pub init: Option<InitValue>,
}

/// One unit of combinational work, scheduled topologically.
#[derive(Debug, Clone)]
pub enum CombUnit {
    /// `assign` item `item` of the module instantiated at `path`.
    Assign { path: String, item: usize },
    /// `always @(*)` item `item` at `path`.
    Block { path: String, item: usize },
    /// Child input port fed by an expression in the parent scope.
    InputBind {
        child_path: String,
        formal: String,
        parent_path: String,
        actual: Expr,
    },
    /// Parent lvalue driven by a child output port.
    OutputBind {
        parent_path: String,
        target: LValue,
        child_path: String,
        formal: String,
    },
}

/// A clocked `always` block in the flattened design.
#[derive(Debug, Clone)]
pub struct ClockedBlock {
    pub path: String,
    pub module: String,
    pub item: usize,
}

#[derive(Debug, Clone)]
pub struct ElaboratedDesign {
    pub top: String,
    pub modules: BTreeMap<String, ModuleInfo>,
    pub tree: InstanceNode,
    /// Breadth-first instance list, top first.
    pub instances: Vec<(String, String)>,
    pub signals: Vec<FlatSignal>,
    signal_index: BTreeMap<String, usize>,
    pub comb_schedule: Vec<CombUnit>,
    pub clocked_blocks: Vec<ClockedBlock>,
    /// Original source text keyed by span origin, for slice-based rendering.
    pub sources: BTreeMap<String, String>,
}

impl ElaboratedDesign {
    pub fn top_module(&self) -> &ModuleInfo {
        &self.modules[&self.top]
    }

    pub fn signal_id(&self, name: &str) -> Option<usize> {
        self.signal_index.get(name).copied()
    }

    pub fn signal(&self, name: &str) -> Option<&FlatSignal> {
        self.signal_id(name).map(|i| &self.signals[i])
    }

    pub fn attach_source(&mut self, origin: &str, text: &str) {
        self.sources.insert(origin.to_string(), text.to_string());
    }

    /// Source slice for a span, when the origin text was attached.
    pub fn slice(&self, span: &SourceSpan) -> Option<String> {
        self.sources
            .get(span.file.as_ref())
            .and_then(|text| span.slice(text))
            .map(|s| s.to_string())
    }

    /// Input ports of the top module, in port order, excluding `clock`.
    pub fn top_inputs(&self, clock: &str) -> Vec<(String, u32)> {
        let m = self.top_module();
        m.ast
            .ports
            .iter()
            .filter(|p| p.direction == Direction::Input && p.name != clock)
            .map(|p| {
                let ty = &m.symbols[&p.name];
                (p.name.clone(), ty.width)
            })
            .collect()
    }

    /// Signals edge-sensitized by non-clock edges anywhere in the design
    /// (asynchronous resets), as top-level names when they are top inputs.
    pub fn async_resets(&self, clock: &str) -> Vec<(String, Edge)> {
        let mut out: Vec<(String, Edge)> = Vec::new();
        let m = self.top_module();
        for item in &m.ast.items {
            if let ModuleItem::Always(a) = item {
                if let Sensitivity::Edges(edges) = &a.sensitivity {
                    for e in edges {
                        if e.signal != clock && !out.iter().any(|(n, _)| *n == e.signal) {
                            out.push((e.signal.clone(), e.edge));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Computes `(width, signedness)` of an expression under a symbol table.
pub fn infer_width(expr: &Expr, env: &SymbolTable) -> Result<(u32, bool)> {
    match expr {
        Expr::Const { width, .. } => Ok((width.unwrap_or(32), false)),
        Expr::Ident { name, span } => {
            let ty = env.get(name).ok_or_else(|| FrontendError::UnresolvedIdentifier {
                span: span.clone(),
                name: name.clone(),
            })?;
            if ty.array_len.is_some() {
                return Err(FrontendError::semantic(
                    span.clone(),
                    format!("memory `{name}` used without an index"),
                ));
            }
            Ok((ty.width, ty.signed))
        }
        Expr::BitSelect { base, index, span } => {
            let ty = env.get(base).ok_or_else(|| FrontendError::UnresolvedIdentifier {
                span: span.clone(),
                name: base.clone(),
            })?;
            infer_width(index, env)?;
            if ty.array_len.is_some() {
                // Element access of a memory.
                Ok((ty.width, ty.signed))
            } else {
                Ok((1, false))
            }
        }
        Expr::PartSelect { base, msb, lsb, span } => {
            let ty = env.get(base).ok_or_else(|| FrontendError::UnresolvedIdentifier {
                span: span.clone(),
                name: base.clone(),
            })?;
            if ty.array_len.is_some() {
                return Err(FrontendError::unsupported(
                    span.clone(),
                    "part-select of a memory",
                ));
            }
            let m = msb.const_value().ok_or_else(|| {
                FrontendError::semantic(span.clone(), "part-select bounds must be constant")
            })?;
            let l = lsb.const_value().ok_or_else(|| {
                FrontendError::semantic(span.clone(), "part-select bounds must be constant")
            })?;
            if m < l {
                return Err(FrontendError::semantic(
                    span.clone(),
                    format!("part-select [{m}:{l}] is reversed"),
                ));
            }
            Ok(((m - l + 1) as u32, false))
        }
        Expr::Unary { op, operand, .. } => {
            let (w, s) = infer_width(operand, env)?;
            Ok(match op {
                UnaryOp::Not => (1, false),
                UnaryOp::BitNot | UnaryOp::Neg => (w, s),
            })
        }
        Expr::Binary { op, lhs, rhs, span } => {
            let (wl, sl) = infer_width(lhs, env)?;
            let (wr, sr) = infer_width(rhs, env)?;
            if *op == BinOp::Pow {
                if expr.const_value().is_none() {
                    return Err(FrontendError::unsupported(
                        span.clone(),
                        "non-constant `**`",
                    ));
                }
                return Ok((32, false));
            }
            if op.is_comparison() || op.is_logical() {
                Ok((1, false))
            } else if matches!(op, BinOp::Shl | BinOp::Shr) {
                Ok((wl, sl))
            } else {
                Ok((wl.max(wr), sl && sr))
            }
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            infer_width(cond, env)?;
            let (wt, st) = infer_width(then_expr, env)?;
            let (we, se) = infer_width(else_expr, env)?;
            Ok((wt.max(we), st && se))
        }
        Expr::Concat { parts, span } => {
            let mut total = 0u32;
            for p in parts {
                if let Expr::Const { width: None, .. } = p {
                    return Err(FrontendError::unsupported(
                        span.clone(),
                        "unsized literal in concatenation",
                    ));
                }
                let (w, _) = infer_width(p, env)?;
                total += w;
            }
            if total > 64 {
                return Err(FrontendError::unsupported(
                    span.clone(),
                    format!("{total}-bit concatenation (64-bit limit)"),
                ));
            }
            Ok((total, false))
        }
        Expr::SignedCast { operand, .. } => {
            let (w, _) = infer_width(operand, env)?;
            Ok((w, true))
        }
    }
}

fn range_bounds(r: &Range) -> Result<(u64, u64)> {
    let msb = r.msb.const_value().ok_or_else(|| {
        FrontendError::semantic(r.span.clone(), "range bounds must be constant")
    })?;
    let lsb = r.lsb.const_value().ok_or_else(|| {
        FrontendError::semantic(r.span.clone(), "range bounds must be constant")
    })?;
    if msb < lsb {
        return Err(FrontendError::semantic(
            r.span.clone(),
            format!("range [{msb}:{lsb}] is reversed"),
        ));
    }
    Ok((msb, lsb))
}

fn build_symbols(m: &AstModule) -> Result<SymbolTable> {
    let mut table = SymbolTable::new();
    for decl in &m.decls {
        let width = match &decl.width {
            Some(r) => {
                let (msb, lsb) = range_bounds(r)?;
                let w = msb - lsb + 1;
                if lsb != 0 {
                    return Err(FrontendError::unsupported(
                        r.span.clone(),
                        format!("nonzero range base [{msb}:{lsb}]"),
                    ));
                }
                if w > 64 {
                    return Err(FrontendError::unsupported(
                        r.span.clone(),
                        format!("{w}-bit vector (64-bit limit)"),
                    ));
                }
                w as u32
            }
            None => 1,
        };
        let array_len = match &decl.array_dim {
            Some(r) => {
                let (msb, lsb) = range_bounds(r)?;
                if lsb != 0 {
                    return Err(FrontendError::unsupported(
                        r.span.clone(),
                        "array dimension with nonzero base",
                    ));
                }
                Some(msb - lsb + 1)
            }
            None => None,
        };
        let port = m.port(&decl.name);
        if table
            .insert(
                decl.name.clone(),
                SigType {
                    width,
                    signed: decl.signed,
                    array_len,
                    kind: decl.kind,
                    is_input: matches!(port.map(|p| p.direction), Some(Direction::Input)),
                    is_output: matches!(port.map(|p| p.direction), Some(Direction::Output)),
                },
            )
            .is_some()
        {
            return Err(FrontendError::semantic(
                decl.span.clone(),
                format!("duplicate declaration of `{}`", decl.name),
            ));
        }
    }
    Ok(table)
}

fn check_lvalue(lv: &LValue, env: &SymbolTable) -> Result<()> {
    let ty = env.get(&lv.base).ok_or_else(|| FrontendError::UnresolvedIdentifier {
        span: lv.span.clone(),
        name: lv.base.clone(),
    })?;
    if let Some(idx) = &lv.index {
        infer_width(idx, env)?;
    } else if ty.array_len.is_some() {
        return Err(FrontendError::semantic(
            lv.span.clone(),
            format!("memory `{}` assigned without an index", lv.base),
        ));
    }
    if let Some((msb, lsb)) = &lv.part {
        for b in [msb.as_ref(), lsb.as_ref()] {
            if b.const_value().is_none() {
                return Err(FrontendError::semantic(
                    lv.span.clone(),
                    "part-select target bounds must be constant",
                ));
            }
        }
    }
    Ok(())
}

/// Walks every expression in a statement tree.
fn check_stmt(
    stmt: &Stmt,
    env: &SymbolTable,
    clocked: bool,
    in_initial: bool,
) -> Result<()> {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for s in stmts {
                check_stmt(s, env, clocked, in_initial)?;
            }
            Ok(())
        }
        Stmt::Blocking { target, value, span } => {
            if clocked && !in_initial {
                return Err(FrontendError::semantic(
                    span.clone(),
                    "blocking assignment in a clocked block",
                ));
            }
            check_lvalue(target, env)?;
            infer_width(value, env)?;
            Ok(())
        }
        Stmt::NonBlocking { target, value, span } => {
            if !clocked && !in_initial {
                return Err(FrontendError::semantic(
                    span.clone(),
                    "nonblocking assignment in a combinational block",
                ));
            }
            check_lvalue(target, env)?;
            infer_width(value, env)?;
            Ok(())
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            ..
        } => {
            infer_width(cond, env)?;
            check_stmt(then_stmt, env, clocked, in_initial)?;
            if let Some(e) = else_stmt {
                check_stmt(e, env, clocked, in_initial)?;
            }
            Ok(())
        }
        Stmt::Case {
            selector,
            items,
            default,
            span,
        } => {
            infer_width(selector, env)?;
            for item in items {
                for label in &item.labels {
                    if label.const_value().is_none() {
                        return Err(FrontendError::semantic(
                            span.clone(),
                            "case labels must be constant",
                        ));
                    }
                }
                check_stmt(&item.body, env, clocked, in_initial)?;
            }
            if let Some(d) = default {
                check_stmt(d, env, clocked, in_initial)?;
            }
            Ok(())
        }
        Stmt::ImmediateAssert { cond, span, .. } => {
            if !clocked {
                return Err(FrontendError::unsupported(
                    span.clone(),
                    "immediate assertion outside a clocked block",
                ));
            }
            infer_width(cond, env)?;
            Ok(())
        }
        Stmt::For { span, .. } => {
            if !in_initial {
                return Err(FrontendError::unsupported(
                    span.clone(),
                    "for loop outside an initial block",
                ));
            }
            Ok(())
        }
    }
}

/// Interprets an initial block into per-signal init values. Only constant
/// scalar assignments and the whole-array constant fill loop are accepted.
fn lower_initial_stmt(
    stmt: &Stmt,
    env: &SymbolTable,
    out: &mut BTreeMap<String, InitValue>,
) -> Result<()> {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for s in stmts {
                lower_initial_stmt(s, env, out)?;
            }
            Ok(())
        }
        Stmt::Blocking { target, value, span }
        | Stmt::NonBlocking { target, value, span } => {
            let v = value.const_value().ok_or_else(|| {
                FrontendError::unsupported(span.clone(), "non-constant initial value")
            })?;
            if target.index.is_some() || target.part.is_some() {
                return Err(FrontendError::unsupported(
                    span.clone(),
                    "indexed initial assignment outside the fill loop",
                ));
            }
            if !env.contains_key(&target.base) {
                return Err(FrontendError::UnresolvedIdentifier {
                    span: span.clone(),
                    name: target.base.clone(),
                });
            }
            out.insert(target.base.clone(), InitValue::Scalar(v));
            Ok(())
        }
        Stmt::For {
            var,
            init,
            cond,
            step,
            body,
            span,
        } => lower_initial_for(var, init, cond, step, body, span, env, out),
        other => Err(FrontendError::unsupported(
            other.span().clone(),
            "general initial block",
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn lower_initial_for(
    var: &str,
    init: &Expr,
    cond: &Expr,
    step: &Expr,
    body: &Stmt,
    span: &SourceSpan,
    env: &SymbolTable,
    out: &mut BTreeMap<String, InitValue>,
) -> Result<()> {
    let unsupported = |msg: &str| FrontendError::unsupported(span.clone(), msg.to_string());
    let start = init
        .const_value()
        .ok_or_else(|| unsupported("non-constant fill-loop start"))?;
    // Condition must be `var < LIMIT` or `var <= LIMIT`.
    let (limit, inclusive) = match cond {
        Expr::Binary { op, lhs, rhs, .. } if matches!(op, BinOp::Lt | BinOp::Le) => {
            match lhs.as_ref() {
                Expr::Ident { name, .. } if name == var => {}
                _ => return Err(unsupported("fill-loop condition shape")),
            }
            let lim = rhs
                .const_value()
                .ok_or_else(|| unsupported("non-constant fill-loop bound"))?;
            (lim, *op == BinOp::Le)
        }
        _ => return Err(unsupported("fill-loop condition shape")),
    };
    // Step must be `var = var + 1`.
    match step {
        Expr::Binary { op: BinOp::Add, lhs, rhs, .. } => {
            let ok = matches!(lhs.as_ref(), Expr::Ident { name, .. } if name == var)
                && rhs.const_value() == Some(1);
            if !ok {
                return Err(unsupported("fill-loop step shape"));
            }
        }
        _ => return Err(unsupported("fill-loop step shape")),
    }
    // Body must assign one constant to `arr[var]`.
    let inner = match body {
        Stmt::Block { stmts, .. } if stmts.len() == 1 => &stmts[0],
        other => other,
    };
    let (target, value) = match inner {
        Stmt::Blocking { target, value, .. } | Stmt::NonBlocking { target, value, .. } => {
            (target, value)
        }
        _ => return Err(unsupported("fill-loop body shape")),
    };
    let fill = value
        .const_value()
        .ok_or_else(|| unsupported("non-constant fill value"))?;
    let indexed_by_var = matches!(
        target.index.as_deref(),
        Some(Expr::Ident { name, .. }) if name == var
    );
    if !indexed_by_var {
        return Err(unsupported("fill-loop body must index by the loop variable"));
    }
    let ty = env.get(&target.base).ok_or_else(|| FrontendError::UnresolvedIdentifier {
        span: span.clone(),
        name: target.base.clone(),
    })?;
    let len = ty
        .array_len
        .ok_or_else(|| unsupported("fill-loop target is not a memory"))?;
    let end = if inclusive { limit + 1 } else { limit };
    if start != 0 || end < len {
        return Err(unsupported("fill loop must cover the whole memory"));
    }
    out.insert(target.base.clone(), InitValue::ArrayFill(fill));
    Ok(())
}

/// Signals written by a statement tree (base names).
pub fn written_signals(stmt: &Stmt, out: &mut BTreeSet<String>) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for s in stmts {
                written_signals(s, out);
            }
        }
        Stmt::Blocking { target, .. } | Stmt::NonBlocking { target, .. } => {
            out.insert(target.base.clone());
        }
        Stmt::If {
            then_stmt,
            else_stmt,
            ..
        } => {
            written_signals(then_stmt, out);
            if let Some(e) = else_stmt {
                written_signals(e, out);
            }
        }
        Stmt::Case { items, default, .. } => {
            for i in items {
                written_signals(&i.body, out);
            }
            if let Some(d) = default {
                written_signals(d, out);
            }
        }
        Stmt::ImmediateAssert { .. } => {}
        Stmt::For { body, .. } => written_signals(body, out),
    }
}

/// Signals read by a statement tree (conditions, RHS values, indices).
pub fn read_signals(stmt: &Stmt, out: &mut BTreeSet<String>) {
    let add_expr = |e: &Expr, out: &mut BTreeSet<String>| {
        e.walk_idents(&mut |n| {
            out.insert(n.to_string());
        })
    };
    match stmt {
        Stmt::Block { stmts, .. } => {
            for s in stmts {
                read_signals(s, out);
            }
        }
        Stmt::Blocking { target, value, .. } | Stmt::NonBlocking { target, value, .. } => {
            add_expr(value, out);
            if let Some(i) = &target.index {
                add_expr(i, out);
            }
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            ..
        } => {
            add_expr(cond, out);
            read_signals(then_stmt, out);
            if let Some(e) = else_stmt {
                read_signals(e, out);
            }
        }
        Stmt::Case {
            selector,
            items,
            default,
            ..
        } => {
            add_expr(selector, out);
            for i in items {
                read_signals(&i.body, out);
            }
            if let Some(d) = default {
                read_signals(d, out);
            }
        }
        Stmt::ImmediateAssert { cond, .. } => add_expr(cond, out),
        Stmt::For { body, .. } => read_signals(body, out),
    }
}

fn join_path(path: &str, local: &str) -> String {
    if path.is_empty() {
        local.to_string()
    } else {
        format!("{path}.{local}")
    }
}

/// Elaborates parsed modules into a flattened, simulation-ready design.
pub fn elaborate(modules: Vec<AstModule>, top: &str) -> Result<ElaboratedDesign> {
    let mut table: BTreeMap<String, ModuleInfo> = BTreeMap::new();
    for m in modules {
        if table.contains_key(&m.name) {
            return Err(FrontendError::semantic(
                m.span.clone(),
                format!("duplicate module `{}`", m.name),
            ));
        }
        let symbols = build_symbols(&m)?;
        check_module(&m, &symbols, &table)?;
        let mut init_values = BTreeMap::new();
        for decl in &m.decls {
            if let Some(init) = &decl.init {
                let v = init.const_value().ok_or_else(|| {
                    FrontendError::semantic(
                        decl.span.clone(),
                        "declaration initializer must be constant",
                    )
                })?;
                init_values.insert(decl.name.clone(), InitValue::Scalar(v));
            }
        }
        for item in &m.items {
            if let ModuleItem::Initial(init) = item {
                lower_initial_stmt(&init.body, &symbols, &mut init_values)?;
            }
        }
        table.insert(
            m.name.clone(),
            ModuleInfo {
                ast: m,
                symbols,
                init_values,
            },
        );
    }

    if !table.contains_key(top) {
        return Err(FrontendError::UnknownModule(top.to_string()));
    }

    // Instance arity/name checks, then flatten.
    for info in table.values() {
        for item in &info.ast.items {
            if let ModuleItem::Instantiation(inst) = item {
                let child = table
                    .get(&inst.module)
                    .ok_or_else(|| FrontendError::UnknownModule(inst.module.clone()))?;
                for i in &inst.instances {
                    if i.connections.len() != child.ast.ports.len() {
                        return Err(FrontendError::PortArityMismatch {
                            span: i.span.clone(),
                            module: inst.module.clone(),
                            expected: child.ast.ports.len(),
                            actual: i.connections.len(),
                        });
                    }
                    for conn in &i.connections {
                        if let Some(f) = &conn.formal {
                            if child.ast.port(f).is_none() {
                                return Err(FrontendError::semantic(
                                    conn.span.clone(),
                                    format!("no port `{f}` on module `{}`", inst.module),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    let tree = build_tree(&table, top, "", 0)?;
    let mut instances = Vec::new();
    collect_instances(&tree, &mut instances);

    let mut signals = Vec::new();
    let mut signal_index = BTreeMap::new();
    for (path, module) in &instances {
        let info = &table[module];
        for decl in &info.ast.decls {
            let name = join_path(path, &decl.name);
            signal_index.insert(name.clone(), signals.len());
            signals.push(FlatSignal {
                name,
                instance: path.clone(),
                module: module.clone(),
                local: decl.name.clone(),
                ty: info.symbols[&decl.name],
                init: info.init_values.get(&decl.name).copied(),
            });
        }
    }

    let comb_schedule = schedule_comb(&table, &tree)?;
    let mut clocked_blocks = Vec::new();
    for (path, module) in &instances {
        let info = &table[module];
        for (idx, item) in info.ast.items.iter().enumerate() {
            if let ModuleItem::Always(a) = item {
                if matches!(a.sensitivity, Sensitivity::Edges(_)) {
                    clocked_blocks.push(ClockedBlock {
                        path: path.clone(),
                        module: module.clone(),
                        item: idx,
                    });
                }
            }
        }
    }

    Ok(ElaboratedDesign {
        top: top.to_string(),
        modules: table,
        tree,
        instances,
        signals,
        signal_index,
        comb_schedule,
        clocked_blocks,
        sources: BTreeMap::new(),
    })
}

fn build_tree(
    table: &BTreeMap<String, ModuleInfo>,
    module: &str,
    path: &str,
    depth: usize,
) -> Result<InstanceNode> {
    if depth > 32 {
        return Err(FrontendError::semantic(
            table[module].ast.span.clone(),
            format!("instantiation of `{module}` exceeds depth 32 (recursive?)"),
        ));
    }
    let info = &table[module];
    let mut children = Vec::new();
    for item in &info.ast.items {
        if let ModuleItem::Instantiation(inst) = item {
            for i in &inst.instances {
                let child_path = join_path(path, &i.name);
                children.push(build_tree(table, &inst.module, &child_path, depth + 1)?);
            }
        }
    }
    Ok(InstanceNode {
        path: path.to_string(),
        module: module.to_string(),
        children,
    })
}

fn collect_instances(node: &InstanceNode, out: &mut Vec<(String, String)>) {
    out.push((node.path.clone(), node.module.clone()));
    for c in &node.children {
        collect_instances(c, out);
    }
}

fn check_module(
    m: &AstModule,
    symbols: &SymbolTable,
    _known: &BTreeMap<String, ModuleInfo>,
) -> Result<()> {
    // Every port must resolve to a declaration.
    for p in &m.ports {
        if !symbols.contains_key(&p.name) {
            return Err(FrontendError::semantic(
                p.span.clone(),
                format!("port `{}` is never declared", p.name),
            ));
        }
    }

    let mut cont_targets: BTreeMap<String, Vec<(u64, u64)>> = BTreeMap::new();
    let mut proc_targets: BTreeSet<String> = BTreeSet::new();
    let mut comb_targets: BTreeSet<String> = BTreeSet::new();

    for item in &m.items {
        match item {
            ModuleItem::ContinuousAssign(a) => {
                check_lvalue(&a.target, symbols)?;
                infer_width(&a.value, symbols)?;
                let ty = &symbols[&a.target.base];
                if ty.kind == NetKind::Reg {
                    return Err(FrontendError::semantic(
                        a.span.clone(),
                        format!("continuous assign drives reg `{}`", a.target.base),
                    ));
                }
                let range = match (&a.target.part, &a.target.index) {
                    (Some((msb, lsb)), _) => {
                        (msb.const_value().unwrap(), lsb.const_value().unwrap())
                    }
                    (None, Some(_)) => {
                        return Err(FrontendError::unsupported(
                            a.span.clone(),
                            "indexed continuous assign target",
                        ))
                    }
                    (None, None) => ((ty.width - 1) as u64, 0),
                };
                let entries = cont_targets.entry(a.target.base.clone()).or_default();
                for (msb, lsb) in entries.iter() {
                    if range.0 >= *lsb && *msb >= range.1 {
                        return Err(FrontendError::semantic(
                            a.span.clone(),
                            format!("multiple continuous drivers for `{}`", a.target.base),
                        ));
                    }
                }
                entries.push(range);
            }
            ModuleItem::Always(a) => {
                let clocked = matches!(a.sensitivity, Sensitivity::Edges(_));
                if let Sensitivity::Edges(edges) = &a.sensitivity {
                    for e in edges {
                        if !symbols.contains_key(&e.signal) {
                            return Err(FrontendError::UnresolvedIdentifier {
                                span: e.span.clone(),
                                name: e.signal.clone(),
                            });
                        }
                    }
                }
                check_stmt(&a.body, symbols, clocked, false)?;
                let mut written = BTreeSet::new();
                written_signals(&a.body, &mut written);
                for w in written {
                    if clocked {
                        proc_targets.insert(w);
                    } else {
                        comb_targets.insert(w);
                    }
                }
            }
            ModuleItem::Initial(_) => {}
            ModuleItem::Instantiation(inst) => {
                for i in &inst.instances {
                    for conn in &i.connections {
                        infer_width(&conn.actual, symbols)?;
                    }
                }
            }
            ModuleItem::ConcurrentAssert(c) => {
                if !symbols.contains_key(&c.clock.signal) {
                    return Err(FrontendError::UnresolvedIdentifier {
                        span: c.clock.span.clone(),
                        name: c.clock.signal.clone(),
                    });
                }
                if let Some(a) = &c.antecedent {
                    infer_width(a, symbols)?;
                }
                infer_width(&c.consequent, symbols)?;
            }
        }
    }

    for name in cont_targets.keys() {
        if proc_targets.contains(name) || comb_targets.contains(name) {
            return Err(FrontendError::semantic(
                m.span.clone(),
                format!("`{name}` driven by both continuous assign and always block"),
            ));
        }
    }
    for name in &comb_targets {
        if proc_targets.contains(name) {
            return Err(FrontendError::semantic(
                m.span.clone(),
                format!("`{name}` driven by both clocked and combinational blocks"),
            ));
        }
    }
    Ok(())
}

/// Builds the flattened combinational schedule:
/// units ordered so every read value is final before its reader runs.
fn schedule_comb(
    table: &BTreeMap<String, ModuleInfo>,
    tree: &InstanceNode,
) -> Result<Vec<CombUnit>> {
    struct UnitInfo {
        unit: CombUnit,
        reads: Vec<String>,
        writes: Vec<String>,
    }
    let mut units: Vec<UnitInfo> = Vec::new();

    fn visit(
        table: &BTreeMap<String, ModuleInfo>,
        node: &InstanceNode,
        units: &mut Vec<UnitInfo>,
    ) {
        let info = &table[&node.module];
        let mut child_iter = node.children.iter();
        for (idx, item) in info.ast.items.iter().enumerate() {
            match item {
                ModuleItem::ContinuousAssign(a) => {
                    let mut reads = Vec::new();
                    a.value.walk_idents(&mut |n| reads.push(join_path(&node.path, n)));
                    if let Some(i) = &a.target.index {
                        i.walk_idents(&mut |n| reads.push(join_path(&node.path, n)));
                    }
                    units.push(UnitInfo {
                        unit: CombUnit::Assign {
                            path: node.path.clone(),
                            item: idx,
                        },
                        reads,
                        writes: vec![join_path(&node.path, &a.target.base)],
                    });
                }
                ModuleItem::Always(a) if matches!(a.sensitivity, Sensitivity::Combinational) => {
                    let mut r = BTreeSet::new();
                    read_signals(&a.body, &mut r);
                    let mut w = BTreeSet::new();
                    written_signals(&a.body, &mut w);
                    units.push(UnitInfo {
                        unit: CombUnit::Block {
                            path: node.path.clone(),
                            item: idx,
                        },
                        reads: r.iter().map(|n| join_path(&node.path, n)).collect(),
                        writes: w.iter().map(|n| join_path(&node.path, n)).collect(),
                    });
                }
                ModuleItem::Instantiation(inst) => {
                    let child_info = &table[&inst.module];
                    for i in &inst.instances {
                        let child = child_iter.next().expect("tree matches items");
                        // Resolve positional/named connections to formals.
                        for (pos, conn) in i.connections.iter().enumerate() {
                            let formal = match &conn.formal {
                                Some(f) => f.clone(),
                                None => child_info.ast.ports[pos].name.clone(),
                            };
                            let dir = child_info.ast.port(&formal).unwrap().direction;
                            match dir {
                                Direction::Input => {
                                    let mut reads = Vec::new();
                                    conn.actual
                                        .walk_idents(&mut |n| reads.push(join_path(&node.path, n)));
                                    units.push(UnitInfo {
                                        unit: CombUnit::InputBind {
                                            child_path: child.path.clone(),
                                            formal: formal.clone(),
                                            parent_path: node.path.clone(),
                                            actual: conn.actual.clone(),
                                        },
                                        reads,
                                        writes: vec![join_path(&child.path, &formal)],
                                    });
                                }
                                Direction::Output => {
                                    let target = match &conn.actual {
                                        Expr::Ident { name, span } => LValue {
                                            base: name.clone(),
                                            index: None,
                                            part: None,
                                            span: span.clone(),
                                        },
                                        Expr::PartSelect { base, msb, lsb, span } => LValue {
                                            base: base.clone(),
                                            index: None,
                                            part: Some((msb.clone(), lsb.clone())),
                                            span: span.clone(),
                                        },
                                        Expr::BitSelect { base, index, span } => LValue {
                                            base: base.clone(),
                                            index: Some(index.clone()),
                                            part: None,
                                            span: span.clone(),
                                        },
                                        other => {
                                            // Reported after the walk completes.
                                            LValue {
                                                base: "<bad output bind>".to_string(),
                                                index: None,
                                                part: None,
                                                span: other.span().clone(),
                                            }
                                        }
                                    };
                                    units.push(UnitInfo {
                                        unit: CombUnit::OutputBind {
                                            parent_path: node.path.clone(),
                                            target: target.clone(),
                                            child_path: child.path.clone(),
                                            formal: formal.clone(),
                                        },
                                        reads: vec![join_path(&child.path, &formal)],
                                        writes: vec![join_path(&node.path, &target.base)],
                                    });
                                }
                            }
                        }
                        visit(table, child, units);
                    }
                }
                _ => {}
            }
        }
    }
    visit(table, tree, &mut units);

    for u in &units {
        if let CombUnit::OutputBind { target, .. } = &u.unit {
            if target.base.starts_with('<') {
                return Err(FrontendError::semantic(
                    target.span.clone(),
                    "output port must be bound to a net, bit, or part select",
                ));
            }
        }
    }

    // Kahn-style ordering: a unit is ready once no remaining unit writes
    // any signal it reads. Writer multiplicity is respected.
    let mut writer_count: BTreeMap<String, usize> = BTreeMap::new();
    for u in &units {
        for w in &u.writes {
            *writer_count.entry(w.clone()).or_insert(0) += 1;
        }
    }
    let mut scheduled = Vec::new();
    let mut done = vec![false; units.len()];
    loop {
        let mut progressed = false;
        for (i, u) in units.iter().enumerate() {
            if done[i] {
                continue;
            }
            // A procedural block may read a value it wrote earlier in the
            // same block; a continuous assign reading its own target is a
            // genuine cycle.
            let self_read_ok = matches!(u.unit, CombUnit::Block { .. });
            let ready = u.reads.iter().all(|r| {
                writer_count.get(r).copied().unwrap_or(0) == 0
                    || (self_read_ok && u.writes.contains(r) && writer_count[r] == 1)
            });
            if ready {
                done[i] = true;
                progressed = true;
                for w in &u.writes {
                    *writer_count.get_mut(w).unwrap() -= 1;
                }
                scheduled.push(u.unit.clone());
            }
        }
        if scheduled.len() == units.len() {
            break;
        }
        if !progressed {
            let stuck = units
                .iter()
                .enumerate()
                .find(|(i, _)| !done[*i])
                .map(|(_, u)| u.writes.first().cloned().unwrap_or_default())
                .unwrap_or_default();
            return Err(FrontendError::CombinationalCycle(stuck));
        }
    }
    Ok(scheduled)
}
