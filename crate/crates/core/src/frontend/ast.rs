//! AST for the Verilog subset. Every node carries a [`SourceSpan`].

use crate::span::SourceSpan;

/// One parsed module.
#[derive(Debug, Clone)]
pub struct AstModule {
    pub name: String,
    /// Header port order; positional instantiation binds in this order.
    pub ports: Vec<PortDecl>,
    /// All net declarations, ports included.
    pub decls: Vec<NetDecl>,
    pub items: Vec<ModuleItem>,
    pub span: SourceSpan,
}

impl AstModule {
    pub fn decl(&self, name: &str) -> Option<&NetDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct PortDecl {
    pub name: String,
    pub direction: Direction,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    Wire,
    Reg,
}

/// A `reg`/`wire` declaration, one name per entry (grouped declarations
/// are split during parsing).
#[derive(Debug, Clone)]
pub struct NetDecl {
    pub name: String,
    pub kind: NetKind,
    pub signed: bool,
    /// Bit range `[msb:lsb]`; `None` means a 1-bit scalar.
    pub width: Option<Range>,
    /// Optional single array dimension (memories).
    pub array_dim: Option<Range>,
    /// Declaration initializer, used by instrumentation shadow registers.
    pub init: Option<Expr>,
    pub span: SourceSpan,
}

/// A constant `[msb:lsb]` range.
#[derive(Debug, Clone)]
pub struct Range {
    pub msb: Expr,
    pub lsb: Expr,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub enum ModuleItem {
    ContinuousAssign(Assign),
    Always(AlwaysBlock),
    Initial(InitialBlock),
    Instantiation(Instantiation),
    ConcurrentAssert(ConcurrentAssert),
}

impl ModuleItem {
    pub fn span(&self) -> &SourceSpan {
        match self {
            ModuleItem::ContinuousAssign(a) => &a.span,
            ModuleItem::Always(a) => &a.span,
            ModuleItem::Initial(i) => &i.span,
            ModuleItem::Instantiation(i) => &i.span,
            ModuleItem::ConcurrentAssert(c) => &c.span,
        }
    }
}

/// `assign target = value;`
#[derive(Debug, Clone)]
pub struct Assign {
    pub target: LValue,
    pub value: Expr,
    pub span: SourceSpan,
}

/// Assignment target: a net, one indexed element, or a constant part.
#[derive(Debug, Clone)]
pub struct LValue {
    pub base: String,
    pub index: Option<Box<Expr>>,
    pub part: Option<(Box<Expr>, Box<Expr>)>,
    pub span: SourceSpan,
}

impl LValue {
    pub fn ident(name: impl Into<String>, span: SourceSpan) -> Self {
        LValue {
            base: name.into(),
            index: None,
            part: None,
            span,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlwaysBlock {
    pub sensitivity: Sensitivity,
    pub body: Stmt,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub enum Sensitivity {
    /// `@(*)` or `@*`
    Combinational,
    /// `@(posedge a or negedge b ...)`
    Edges(Vec<EdgeSpec>),
}

#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub edge: Edge,
    pub signal: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Pos,
    Neg,
}

#[derive(Debug, Clone)]
pub struct InitialBlock {
    pub body: Stmt,
    pub span: SourceSpan,
}

/// One instantiation item; may declare several instances of one module.
#[derive(Debug, Clone)]
pub struct Instantiation {
    pub module: String,
    pub instances: Vec<Instance>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub connections: Vec<PortConn>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct PortConn {
    /// Formal port name for named connections, `None` for positional.
    pub formal: Option<String>,
    pub actual: Expr,
    pub span: SourceSpan,
}

/// Module-scope `assert property (@(posedge clk) [ant |-> / |=>] cons);`
#[derive(Debug, Clone)]
pub struct ConcurrentAssert {
    pub clock: EdgeSpec,
    pub antecedent: Option<Expr>,
    pub delay: Delay,
    pub consequent: Expr,
    /// Exact statement text; the renderer emits this verbatim.
    pub rendered: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delay {
    /// `|->`: consequent checked on the same sample as the antecedent.
    SameCycle,
    /// `|=>`: consequent checked one sample later.
    NextCycle,
}

#[derive(Debug, Clone)]
pub enum Stmt {
    /// `begin ... end`
    Block { stmts: Vec<Stmt>, span: SourceSpan },
    Blocking {
        target: LValue,
        value: Expr,
        span: SourceSpan,
    },
    NonBlocking {
        target: LValue,
        value: Expr,
        span: SourceSpan,
    },
    If {
        cond: Expr,
        then_stmt: Box<Stmt>,
        else_stmt: Option<Box<Stmt>>,
        span: SourceSpan,
    },
    Case {
        selector: Expr,
        items: Vec<CaseItem>,
        default: Option<Box<Stmt>>,
        span: SourceSpan,
    },
    /// Immediate `assert(cond);` — `rendered` holds the exact statement text.
    ImmediateAssert {
        cond: Expr,
        rendered: String,
        span: SourceSpan,
    },
    /// `for` loop, accepted only inside `initial` blocks (zero-fill idiom).
    For {
        var: String,
        init: Expr,
        cond: Expr,
        step: Expr,
        body: Box<Stmt>,
        span: SourceSpan,
    },
}

impl Stmt {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Stmt::Block { span, .. }
            | Stmt::Blocking { span, .. }
            | Stmt::NonBlocking { span, .. }
            | Stmt::If { span, .. }
            | Stmt::Case { span, .. }
            | Stmt::ImmediateAssert { span, .. }
            | Stmt::For { span, .. } => span,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaseItem {
    pub labels: Vec<Expr>,
    pub body: Stmt,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralBase {
    Bin,
    Dec,
    Hex,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Const {
        value: u64,
        /// Declared width for sized literals (`8'h7c`), `None` when unsized.
        width: Option<u32>,
        base: LiteralBase,
        span: SourceSpan,
    },
    Ident {
        name: String,
        span: SourceSpan,
    },
    BitSelect {
        base: String,
        index: Box<Expr>,
        span: SourceSpan,
    },
    PartSelect {
        base: String,
        msb: Box<Expr>,
        lsb: Box<Expr>,
        span: SourceSpan,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
        span: SourceSpan,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: SourceSpan,
    },
    Ternary {
        cond: Box<Expr>,
        then_expr: Box<Expr>,
        else_expr: Box<Expr>,
        span: SourceSpan,
    },
    Concat {
        parts: Vec<Expr>,
        span: SourceSpan,
    },
    /// `$signed(expr)`
    SignedCast {
        operand: Box<Expr>,
        span: SourceSpan,
    },
}

impl Expr {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Expr::Const { span, .. }
            | Expr::Ident { span, .. }
            | Expr::BitSelect { span, .. }
            | Expr::PartSelect { span, .. }
            | Expr::Unary { span, .. }
            | Expr::Binary { span, .. }
            | Expr::Ternary { span, .. }
            | Expr::Concat { span, .. }
            | Expr::SignedCast { span, .. } => span,
        }
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Expr::Ident {
            name: name.into(),
            span: SourceSpan::synthetic(),
        }
    }

    pub fn number(value: u64) -> Self {
        Expr::Const {
            value,
            width: None,
            base: LiteralBase::Dec,
            span: SourceSpan::synthetic(),
        }
    }

    pub fn sized(value: u64, width: u32, base: LiteralBase) -> Self {
        Expr::Const {
            value,
            width: Some(width),
            base,
            span: SourceSpan::synthetic(),
        }
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Self {
        Expr::Unary {
            op,
            operand: Box::new(operand),
            span: SourceSpan::synthetic(),
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            span: SourceSpan::synthetic(),
        }
    }

    /// Folded constant value, if this expression is constant.
    pub fn const_value(&self) -> Option<u64> {
        match self {
            Expr::Const { value, .. } => Some(*value),
            Expr::Unary { op, operand, .. } => {
                let v = operand.const_value()?;
                Some(match op {
                    UnaryOp::Not => (v == 0) as u64,
                    UnaryOp::BitNot => !v,
                    UnaryOp::Neg => v.wrapping_neg(),
                })
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let a = lhs.const_value()?;
                let b = rhs.const_value()?;
                Some(match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    BinOp::Div => {
                        if b == 0 {
                            return None;
                        }
                        a / b
                    }
                    BinOp::Mod => {
                        if b == 0 {
                            return None;
                        }
                        a % b
                    }
                    BinOp::Pow => {
                        if b >= 64 && a > 1 {
                            return None;
                        }
                        a.checked_pow(b.min(63) as u32)?
                    }
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
                    BinOp::Shl => {
                        if b >= 64 {
                            0
                        } else {
                            a << b
                        }
                    }
                    BinOp::Shr => {
                        if b >= 64 {
                            0
                        } else {
                            a >> b
                        }
                    }
                })
            }
            _ => None,
        }
    }

    /// All identifiers referenced by this expression, in first-use order.
    pub fn referenced_idents(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk_idents(&mut |name| {
            if !out.iter().any(|n| n == name) {
                out.push(name.to_string());
            }
        });
        out
    }

    pub fn walk_idents(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Const { .. } => {}
            Expr::Ident { name, .. } => f(name),
            Expr::BitSelect { base, index, .. } => {
                f(base);
                index.walk_idents(f);
            }
            Expr::PartSelect { base, msb, lsb, .. } => {
                f(base);
                msb.walk_idents(f);
                lsb.walk_idents(f);
            }
            Expr::Unary { operand, .. } => operand.walk_idents(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk_idents(f);
                rhs.walk_idents(f);
            }
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
                ..
            } => {
                cond.walk_idents(f);
                then_expr.walk_idents(f);
                else_expr.walk_idents(f);
            }
            Expr::Concat { parts, .. } => {
                for p in parts {
                    p.walk_idents(f);
                }
            }
            Expr::SignedCast { operand, .. } => operand.walk_idents(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    /// `!`
    Not,
    /// `~`
    BitNot,
    /// `-`
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    And,
    Or,
    Xor,
    LogAnd,
    LogOr,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Shl,
    Shr,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::LogAnd => "&&",
            BinOp::LogOr => "||",
            BinOp::Eq => "==",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
        }
    }

    /// True for operators whose result is a 1-bit flag.
    pub fn is_comparison(&self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_logical(&self) -> bool {
        matches!(self, BinOp::LogAnd | BinOp::LogOr)
    }
}

/// Addresses one statement inside a module: item index plus a path of
/// child indices through the statement tree. `If` children are 0 (then)
/// and 1 (else); `Case` children are item indices with the default arm
/// at `items.len()`; `Block` children are positional.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StmtPath {
    pub item: usize,
    pub path: Vec<usize>,
}

impl StmtPath {
    pub fn new(item: usize, path: Vec<usize>) -> Self {
        StmtPath { item, path }
    }

    pub fn child(&self, idx: usize) -> Self {
        let mut path = self.path.clone();
        path.push(idx);
        StmtPath {
            item: self.item,
            path,
        }
    }
}
