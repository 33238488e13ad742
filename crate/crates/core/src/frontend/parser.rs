//! Recursive-descent parser for the Verilog subset.
//!
//! First error aborts the file; there is no recovery mode. Constructs
//! outside the subset produce `UnsupportedConstruct` naming the span.

use super::ast::*;
use super::lexer::{Tok, Token};
use super::{FrontendError, Result};
use crate::span::SourceSpan;

/// Keywords that are recognized so they can be rejected with a precise
/// diagnostic instead of a generic syntax error.
const REJECTED_KEYWORDS: &[&str] = &[
    "function", "task", "generate", "endgenerate", "genvar", "integer", "real", "time",
    "parameter", "localparam", "specify", "fork", "join", "defparam", "casex", "casez",
    "forever", "while", "repeat", "wait", "disable", "deassign", "force", "release",
    "event", "tri", "supply0", "supply1", "trireg", "inout",
];

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    text: &'a str,
    /// Byte offset of the start of each 1-based line.
    line_starts: Vec<usize>,
    origin: &'a str,
}

/// Parses a single expression covering the whole token stream.
pub fn parse_standalone_expr(tokens: Vec<Token>, text: &str, origin: &str) -> Result<Expr> {
    let mut line_starts = vec![0usize];
    for (i, b) in text.bytes().enumerate() {
        if b == b'\n' {
            line_starts.push(i + 1);
        }
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        text,
        line_starts,
        origin,
    };
    let expr = p.parse_expr()?;
    if !p.at_end() {
        return Err(FrontendError::syntax(
            p.here(),
            "trailing tokens after expression",
        ));
    }
    Ok(expr)
}

pub fn parse_modules(tokens: Vec<Token>, text: &str, origin: &str) -> Result<Vec<AstModule>> {
    let mut line_starts = vec![0usize];
    for (i, b) in text.bytes().enumerate() {
        if b == b'\n' {
            line_starts.push(i + 1);
        }
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        text,
        line_starts,
        origin,
    };
    let mut modules = Vec::new();
    while !p.at_end() {
        modules.push(p.parse_module()?);
    }
    Ok(modules)
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.span.clone())
            .unwrap_or_else(|| SourceSpan::new(self.origin, 1, 1, 0))
    }

    fn bump(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| FrontendError::syntax(self.here(), "unexpected end of file"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token> {
        let t = self.bump()?;
        if t.tok == tok {
            Ok(t)
        } else {
            Err(FrontendError::syntax(
                t.span,
                format!("expected {what}, found {}", t.tok.describe()),
            ))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan)> {
        let t = self.bump()?;
        match t.tok {
            Tok::Ident(s) => Ok((s, t.span)),
            other => Err(FrontendError::syntax(
                t.span,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<SourceSpan> {
        let t = self.bump()?;
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(t.span),
            other => Err(FrontendError::syntax(
                t.span.clone(),
                format!("expected `{kw}`, found {}", other.describe()),
            )),
        }
    }

    /// Byte offset of a (line, column) position.
    fn offset_of(&self, line: u32, col: u32) -> usize {
        let ls = self
            .line_starts
            .get(line as usize - 1)
            .copied()
            .unwrap_or(self.text.len());
        // Columns count characters, not bytes.
        let mut off = ls;
        let mut remaining = col as usize - 1;
        for ch in self.text[ls..].chars() {
            if remaining == 0 {
                break;
            }
            off += ch.len_utf8();
            remaining -= 1;
        }
        off
    }

    /// Source text from the start of `from` through the end of `to`.
    fn slice_between(&self, from: &SourceSpan, to: &SourceSpan) -> String {
        let start = self.offset_of(from.line, from.column);
        let end = self.offset_of(to.line, to.column + to.length);
        self.text[start..end.min(self.text.len())].to_string()
    }

    fn span_between(&self, from: &SourceSpan, to: &SourceSpan) -> SourceSpan {
        let start = self.offset_of(from.line, from.column);
        let end = self.offset_of(to.line, to.column + to.length);
        SourceSpan::new(
            self.origin,
            from.line,
            from.column,
            self.text[start..end.min(self.text.len())].chars().count() as u32,
        )
    }

    fn last_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    // ------------------------------------------------------------------
    // Modules
    // ------------------------------------------------------------------

    fn parse_module(&mut self) -> Result<AstModule> {
        let start = self.expect_keyword("module")?;
        let (name, _) = self.expect_ident("module name")?;
        let mut ports: Vec<PortDecl> = Vec::new();
        let mut decls: Vec<NetDecl> = Vec::new();

        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            if matches!(self.peek(), Some(Tok::Ident(s)) if s == "input" || s == "output" || s == "inout")
            {
                self.parse_ansi_ports(&mut ports, &mut decls)?;
            } else {
                loop {
                    let (pname, pspan) = self.expect_ident("port name")?;
                    ports.push(PortDecl {
                        name: pname,
                        // Direction is resolved from the body declarations.
                        direction: Direction::Input,
                        span: pspan,
                    });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
            }
        }
        self.expect(Tok::Semi, "`;`")?;

        let mut directions: Vec<(String, Direction, SourceSpan)> = Vec::new();
        for d in &decls {
            // ANSI ports already captured their direction.
            let dir = ports
                .iter()
                .find(|p| p.name == d.name)
                .map(|p| p.direction);
            if let Some(dir) = dir {
                directions.push((d.name.clone(), dir, d.span.clone()));
            }
        }

        let mut items = Vec::new();
        loop {
            if self.eat_keyword("endmodule") {
                break;
            }
            if self.at_end() {
                return Err(FrontendError::syntax(self.here(), "missing `endmodule`"));
            }
            self.parse_module_entry(&mut decls, &mut directions, &mut items)?;
        }

        // Attach directions collected from body declarations.
        for port in ports.iter_mut() {
            if let Some((_, dir, _)) = directions.iter().find(|(n, _, _)| *n == port.name) {
                port.direction = *dir;
            } else {
                return Err(FrontendError::semantic(
                    port.span.clone(),
                    format!("port `{}` has no direction declaration", port.name),
                ));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for port in &ports {
            if !seen.insert(port.name.clone()) {
                return Err(FrontendError::semantic(
                    port.span.clone(),
                    format!("duplicate port `{}`", port.name),
                ));
            }
        }

        let end = self.last_span();
        Ok(AstModule {
            name,
            ports,
            decls,
            items,
            span: self.span_between(&start, &end),
        })
    }

    fn parse_ansi_ports(
        &mut self,
        ports: &mut Vec<PortDecl>,
        decls: &mut Vec<NetDecl>,
    ) -> Result<()> {
        let mut direction = Direction::Input;
        let mut kind = NetKind::Wire;
        let mut signed = false;
        let mut width: Option<Range> = None;
        loop {
            if matches!(self.peek(), Some(Tok::Ident(s)) if s == "input" || s == "output" || s == "inout")
            {
                let t = self.bump()?;
                direction = match &t.tok {
                    Tok::Ident(s) if s == "input" => Direction::Input,
                    Tok::Ident(s) if s == "output" => Direction::Output,
                    _ => {
                        return Err(FrontendError::unsupported(t.span, "inout port"));
                    }
                };
                kind = if self.eat_keyword("reg") {
                    NetKind::Reg
                } else {
                    NetKind::Wire
                };
                signed = self.eat_keyword("signed");
                width = if self.peek() == Some(&Tok::LBracket) {
                    Some(self.parse_range()?)
                } else {
                    None
                };
            }
            let (name, span) = self.expect_ident("port name")?;
            ports.push(PortDecl {
                name: name.clone(),
                direction,
                span: span.clone(),
            });
            decls.push(NetDecl {
                name,
                kind,
                signed,
                width: width.clone(),
                array_dim: None,
                init: None,
                span,
            });
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(());
        }
    }

    fn parse_module_entry(
        &mut self,
        decls: &mut Vec<NetDecl>,
        directions: &mut Vec<(String, Direction, SourceSpan)>,
        items: &mut Vec<ModuleItem>,
    ) -> Result<()> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Ident(kw)) if kw == "input" || kw == "output" => {
                self.bump()?;
                let dir = if kw == "input" {
                    Direction::Input
                } else {
                    Direction::Output
                };
                let kind = if self.eat_keyword("reg") {
                    NetKind::Reg
                } else {
                    NetKind::Wire
                };
                let signed = self.eat_keyword("signed");
                let width = if self.peek() == Some(&Tok::LBracket) {
                    Some(self.parse_range()?)
                } else {
                    None
                };
                loop {
                    let (name, span) = self.expect_ident("port name")?;
                    directions.push((name.clone(), dir, span.clone()));
                    self.merge_decl(
                        decls,
                        NetDecl {
                            name,
                            kind,
                            signed,
                            width: width.clone(),
                            array_dim: None,
                            init: None,
                            span,
                        },
                    )?;
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi, "`;`")?;
            }
            Some(Tok::Ident(kw)) if kw == "reg" || kw == "wire" => {
                self.bump()?;
                let kind = if kw == "reg" { NetKind::Reg } else { NetKind::Wire };
                let signed = self.eat_keyword("signed");
                let width = if self.peek() == Some(&Tok::LBracket) {
                    Some(self.parse_range()?)
                } else {
                    None
                };
                loop {
                    let (name, span) = self.expect_ident("net name")?;
                    let array_dim = if self.peek() == Some(&Tok::LBracket) {
                        Some(self.parse_range()?)
                    } else {
                        None
                    };
                    let init = if self.eat(&Tok::Assign) {
                        Some(self.parse_expr()?)
                    } else {
                        None
                    };
                    self.merge_decl(
                        decls,
                        NetDecl {
                            name,
                            kind,
                            signed,
                            width: width.clone(),
                            array_dim,
                            init,
                            span,
                        },
                    )?;
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi, "`;`")?;
            }
            Some(Tok::Ident(kw)) if kw == "assign" => {
                let start = self.here();
                self.bump()?;
                let target = self.parse_lvalue()?;
                self.expect(Tok::Assign, "`=`")?;
                let value = self.parse_expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let end = self.last_span();
                items.push(ModuleItem::ContinuousAssign(Assign {
                    target,
                    value,
                    span: self.span_between(&start, &end),
                }));
            }
            Some(Tok::Ident(kw)) if kw == "always" => {
                let start = self.here();
                self.bump()?;
                self.expect(Tok::At, "`@`")?;
                let sensitivity = self.parse_sensitivity()?;
                let body = self.parse_stmt()?;
                let end = self.last_span();
                items.push(ModuleItem::Always(AlwaysBlock {
                    sensitivity,
                    body,
                    span: self.span_between(&start, &end),
                }));
            }
            Some(Tok::Ident(kw)) if kw == "initial" => {
                let start = self.here();
                self.bump()?;
                let body = self.parse_stmt()?;
                let end = self.last_span();
                items.push(ModuleItem::Initial(InitialBlock {
                    body,
                    span: self.span_between(&start, &end),
                }));
            }
            Some(Tok::Ident(kw)) if kw == "assert" => {
                let item = self.parse_concurrent_assert()?;
                items.push(ModuleItem::ConcurrentAssert(item));
            }
            Some(Tok::Ident(kw)) if REJECTED_KEYWORDS.contains(&kw.as_str()) => {
                return Err(FrontendError::unsupported(self.here(), kw));
            }
            Some(Tok::Ident(_)) => {
                // Module instantiation: `Mod inst (...), inst2 (...);`
                let start = self.here();
                let (module, _) = self.expect_ident("module name")?;
                let mut instances = Vec::new();
                loop {
                    let (iname, ispan) = self.expect_ident("instance name")?;
                    self.expect(Tok::LParen, "`(`")?;
                    let mut connections = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            let cstart = self.here();
                            if self.eat(&Tok::Dot) {
                                let (formal, _) = self.expect_ident("port name")?;
                                self.expect(Tok::LParen, "`(`")?;
                                let actual = self.parse_expr()?;
                                self.expect(Tok::RParen, "`)`")?;
                                let end = self.last_span();
                                connections.push(PortConn {
                                    formal: Some(formal),
                                    actual,
                                    span: self.span_between(&cstart, &end),
                                });
                            } else {
                                let actual = self.parse_expr()?;
                                let end = self.last_span();
                                connections.push(PortConn {
                                    formal: None,
                                    actual,
                                    span: self.span_between(&cstart, &end),
                                });
                            }
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(Tok::RParen, "`)`")?;
                    }
                    let end = self.last_span();
                    instances.push(Instance {
                        name: iname,
                        connections,
                        span: self.span_between(&ispan, &end),
                    });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi, "`;`")?;
                let end = self.last_span();
                items.push(ModuleItem::Instantiation(Instantiation {
                    module,
                    instances,
                    span: self.span_between(&start, &end),
                }));
            }
            Some(Tok::SysIdent(name)) => {
                return Err(FrontendError::unsupported(self.here(), format!("${name}")));
            }
            Some(other) => {
                return Err(FrontendError::syntax(
                    self.here(),
                    format!("unexpected {} at module scope", other.describe()),
                ));
            }
            None => return Err(FrontendError::syntax(self.here(), "unexpected end of file")),
        }
        Ok(())
    }

    fn merge_decl(&self, decls: &mut Vec<NetDecl>, new: NetDecl) -> Result<()> {
        if let Some(existing) = decls.iter_mut().find(|d| d.name == new.name) {
            // `output gnt1;` followed by `reg gnt1;` merges into an output reg.
            if new.kind == NetKind::Reg {
                existing.kind = NetKind::Reg;
            }
            existing.signed |= new.signed;
            match (&existing.width, &new.width) {
                (None, Some(_)) => existing.width = new.width.clone(),
                (Some(a), Some(b)) => {
                    let same = a.msb.const_value() == b.msb.const_value()
                        && a.lsb.const_value() == b.lsb.const_value();
                    if !same {
                        return Err(FrontendError::semantic(
                            new.span,
                            format!("conflicting widths for `{}`", new.name),
                        ));
                    }
                }
                _ => {}
            }
            if new.array_dim.is_some() {
                existing.array_dim = new.array_dim.clone();
            }
            if new.init.is_some() {
                existing.init = new.init.clone();
            }
            Ok(())
        } else {
            decls.push(new);
            Ok(())
        }
    }

    fn parse_range(&mut self) -> Result<Range> {
        let start = self.expect(Tok::LBracket, "`[`")?.span;
        let msb = self.parse_expr()?;
        self.expect(Tok::Colon, "`:`")?;
        let lsb = self.parse_expr()?;
        self.expect(Tok::RBracket, "`]`")?;
        let end = self.last_span();
        Ok(Range {
            msb,
            lsb,
            span: self.span_between(&start, &end),
        })
    }

    fn parse_sensitivity(&mut self) -> Result<Sensitivity> {
        if self.eat(&Tok::Star) {
            return Ok(Sensitivity::Combinational);
        }
        self.expect(Tok::LParen, "`(` or `*`")?;
        if self.eat(&Tok::Star) {
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Sensitivity::Combinational);
        }
        let mut edges = Vec::new();
        loop {
            let t = self.bump()?;
            let edge = match &t.tok {
                Tok::Ident(s) if s == "posedge" => Edge::Pos,
                Tok::Ident(s) if s == "negedge" => Edge::Neg,
                other => {
                    return Err(FrontendError::unsupported(
                        t.span.clone(),
                        format!("sensitivity item {}", other.describe()),
                    ))
                }
            };
            let (signal, sspan) = self.expect_ident("edge signal")?;
            edges.push(EdgeSpec {
                edge,
                signal,
                span: sspan,
            });
            if self.eat_keyword("or") || self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RParen, "`)`")?;
            break;
        }
        Ok(Sensitivity::Edges(edges))
    }

    fn parse_concurrent_assert(&mut self) -> Result<ConcurrentAssert> {
        let start = self.expect_keyword("assert")?;
        self.expect_keyword("property")?;
        self.expect(Tok::LParen, "`(`")?;
        self.expect(Tok::At, "`@`")?;
        self.expect(Tok::LParen, "`(`")?;
        let t = self.bump()?;
        let edge = match &t.tok {
            Tok::Ident(s) if s == "posedge" => Edge::Pos,
            Tok::Ident(s) if s == "negedge" => Edge::Neg,
            other => {
                return Err(FrontendError::syntax(
                    t.span.clone(),
                    format!("expected clock edge, found {}", other.describe()),
                ))
            }
        };
        let (signal, sspan) = self.expect_ident("clock signal")?;
        self.expect(Tok::RParen, "`)`")?;
        let first = self.parse_expr()?;
        let (antecedent, delay, consequent) = if self.eat(&Tok::Implies) {
            let cons = self.parse_expr()?;
            (Some(first), Delay::SameCycle, cons)
        } else if self.eat(&Tok::ImpliesNext) {
            let cons = self.parse_expr()?;
            (Some(first), Delay::NextCycle, cons)
        } else {
            (None, Delay::SameCycle, first)
        };
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Semi, "`;`")?;
        let end = self.last_span();
        let span = self.span_between(&start, &end);
        let rendered = self.slice_between(&start, &end);
        Ok(ConcurrentAssert {
            clock: EdgeSpec {
                edge,
                signal,
                span: sspan,
            },
            antecedent,
            delay,
            consequent,
            rendered,
            span,
        })
    }

    // ------------------------------------------------------------------
    // Statements
    // ------------------------------------------------------------------

    fn parse_stmt(&mut self) -> Result<Stmt> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Ident(kw)) if kw == "begin" => {
                let start = self.here();
                self.bump()?;
                let mut stmts = Vec::new();
                while !self.at_keyword("end") {
                    if self.at_end() {
                        return Err(FrontendError::syntax(self.here(), "missing `end`"));
                    }
                    stmts.push(self.parse_stmt()?);
                }
                self.expect_keyword("end")?;
                let end = self.last_span();
                Ok(Stmt::Block {
                    stmts,
                    span: self.span_between(&start, &end),
                })
            }
            Some(Tok::Ident(kw)) if kw == "if" => {
                let start = self.here();
                self.bump()?;
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let then_stmt = Box::new(self.parse_stmt()?);
                let else_stmt = if self.eat_keyword("else") {
                    Some(Box::new(self.parse_stmt()?))
                } else {
                    None
                };
                let end = self.last_span();
                Ok(Stmt::If {
                    cond,
                    then_stmt,
                    else_stmt,
                    span: self.span_between(&start, &end),
                })
            }
            Some(Tok::Ident(kw)) if kw == "case" => {
                let start = self.here();
                self.bump()?;
                self.expect(Tok::LParen, "`(`")?;
                let selector = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let mut case_items = Vec::new();
                let mut default = None;
                loop {
                    if self.eat_keyword("endcase") {
                        break;
                    }
                    if self.at_end() {
                        return Err(FrontendError::syntax(self.here(), "missing `endcase`"));
                    }
                    if self.eat_keyword("default") {
                        self.eat(&Tok::Colon);
                        default = Some(Box::new(self.parse_stmt()?));
                        continue;
                    }
                    let istart = self.here();
                    let mut labels = vec![self.parse_expr()?];
                    while self.eat(&Tok::Comma) {
                        labels.push(self.parse_expr()?);
                    }
                    self.expect(Tok::Colon, "`:`")?;
                    let body = self.parse_stmt()?;
                    let end = self.last_span();
                    case_items.push(CaseItem {
                        labels,
                        body,
                        span: self.span_between(&istart, &end),
                    });
                }
                let end = self.last_span();
                Ok(Stmt::Case {
                    selector,
                    items: case_items,
                    default,
                    span: self.span_between(&start, &end),
                })
            }
            Some(Tok::Ident(kw)) if kw == "assert" => {
                let start = self.here();
                self.bump()?;
                if self.at_keyword("property") {
                    return Err(FrontendError::unsupported(
                        self.here(),
                        "assert property inside procedural code",
                    ));
                }
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Semi, "`;`")?;
                let end = self.last_span();
                let span = self.span_between(&start, &end);
                let rendered = self.slice_between(&start, &end);
                Ok(Stmt::ImmediateAssert {
                    cond,
                    rendered,
                    span,
                })
            }
            Some(Tok::Ident(kw)) if kw == "for" => {
                let start = self.here();
                self.bump()?;
                self.expect(Tok::LParen, "`(`")?;
                let (var, _) = self.expect_ident("loop variable")?;
                self.expect(Tok::Assign, "`=`")?;
                let init = self.parse_expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let cond = self.parse_expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let (var2, vspan) = self.expect_ident("loop variable")?;
                if var2 != var {
                    return Err(FrontendError::unsupported(
                        vspan,
                        "for loop stepping a different variable",
                    ));
                }
                self.expect(Tok::Assign, "`=`")?;
                let step = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = Box::new(self.parse_stmt()?);
                let end = self.last_span();
                Ok(Stmt::For {
                    var,
                    init,
                    cond,
                    step,
                    body,
                    span: self.span_between(&start, &end),
                })
            }
            Some(Tok::Ident(kw)) if REJECTED_KEYWORDS.contains(&kw.as_str()) => {
                Err(FrontendError::unsupported(self.here(), kw))
            }
            Some(Tok::SysIdent(name)) => {
                Err(FrontendError::unsupported(self.here(), format!("${name}")))
            }
            Some(Tok::Ident(_)) => {
                let start = self.here();
                let target = self.parse_lvalue()?;
                let t = self.bump()?;
                let nonblocking = match t.tok {
                    Tok::Assign => false,
                    Tok::LtEq => true,
                    other => {
                        return Err(FrontendError::syntax(
                            t.span,
                            format!("expected `=` or `<=`, found {}", other.describe()),
                        ))
                    }
                };
                let value = self.parse_expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let end = self.last_span();
                let span = self.span_between(&start, &end);
                Ok(if nonblocking {
                    Stmt::NonBlocking {
                        target,
                        value,
                        span,
                    }
                } else {
                    Stmt::Blocking {
                        target,
                        value,
                        span,
                    }
                })
            }
            Some(other) => Err(FrontendError::syntax(
                self.here(),
                format!("unexpected {} in statement", other.describe()),
            )),
            None => Err(FrontendError::syntax(self.here(), "unexpected end of file")),
        }
    }

    fn parse_lvalue(&mut self) -> Result<LValue> {
        let (base, bspan) = self.expect_ident("assignment target")?;
        let mut index = None;
        let mut part = None;
        if self.eat(&Tok::LBracket) {
            let first = self.parse_expr()?;
            if self.eat(&Tok::Colon) {
                let lsb = self.parse_expr()?;
                part = Some((Box::new(first), Box::new(lsb)));
            } else {
                index = Some(Box::new(first));
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        let end = self.last_span();
        Ok(LValue {
            base,
            index,
            part,
            span: self.span_between(&bspan, &end),
        })
    }

    // ------------------------------------------------------------------
    // Expressions
    // ------------------------------------------------------------------

    pub(crate) fn parse_expr(&mut self) -> Result<Expr> {
        self.parse_ternary()
    }

    fn parse_ternary(&mut self) -> Result<Expr> {
        let cond = self.parse_binary(0)?;
        if self.eat(&Tok::Question) {
            let then_expr = self.parse_expr()?;
            self.expect(Tok::Colon, "`:`")?;
            let else_expr = self.parse_ternary()?;
            let span = self.span_between(cond.span(), else_expr.span());
            Ok(Expr::Ternary {
                cond: Box::new(cond),
                then_expr: Box::new(then_expr),
                else_expr: Box::new(else_expr),
                span,
            })
        } else {
            Ok(cond)
        }
    }

    /// Binding power table; higher binds tighter.
    fn binop_of(tok: &Tok) -> Option<(BinOp, u8)> {
        Some(match tok {
            Tok::PipePipe => (BinOp::LogOr, 1),
            Tok::AmpAmp => (BinOp::LogAnd, 2),
            Tok::Pipe => (BinOp::Or, 3),
            Tok::Caret => (BinOp::Xor, 4),
            Tok::Amp => (BinOp::And, 5),
            Tok::EqEq => (BinOp::Eq, 6),
            Tok::BangEq => (BinOp::Neq, 6),
            Tok::Lt => (BinOp::Lt, 7),
            Tok::LtEq => (BinOp::Le, 7),
            Tok::Gt => (BinOp::Gt, 7),
            Tok::GtEq => (BinOp::Ge, 7),
            Tok::Shl => (BinOp::Shl, 8),
            Tok::Shr => (BinOp::Shr, 8),
            Tok::Plus => (BinOp::Add, 9),
            Tok::Minus => (BinOp::Sub, 9),
            Tok::Star => (BinOp::Mul, 10),
            Tok::Slash => (BinOp::Div, 10),
            Tok::Percent => (BinOp::Mod, 10),
            Tok::StarStar => (BinOp::Pow, 11),
            _ => return None,
        })
    }

    fn parse_binary(&mut self, min_bp: u8) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        while let Some(tok) = self.peek() {
            let Some((op, bp)) = Self::binop_of(tok) else {
                break;
            };
            if bp < min_bp {
                break;
            }
            self.bump()?;
            let rhs = self.parse_binary(bp + 1)?;
            let span = self.span_between(lhs.span(), rhs.span());
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Bang) => {
                let start = self.here();
                self.bump()?;
                let operand = self.parse_unary()?;
                let span = self.span_between(&start, operand.span());
                Ok(Expr::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                    span,
                })
            }
            Some(Tok::Tilde) => {
                let start = self.here();
                self.bump()?;
                let operand = self.parse_unary()?;
                let span = self.span_between(&start, operand.span());
                Ok(Expr::Unary {
                    op: UnaryOp::BitNot,
                    operand: Box::new(operand),
                    span,
                })
            }
            Some(Tok::Minus) => {
                let start = self.here();
                self.bump()?;
                let operand = self.parse_unary()?;
                let span = self.span_between(&start, operand.span());
                Ok(Expr::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(operand),
                    span,
                })
            }
            Some(Tok::SysIdent(name)) if name == "signed" => {
                let start = self.here();
                self.bump()?;
                self.expect(Tok::LParen, "`(`")?;
                let operand = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let end = self.last_span();
                Ok(Expr::SignedCast {
                    operand: Box::new(operand),
                    span: self.span_between(&start, &end),
                })
            }
            Some(Tok::SysIdent(name)) => Err(FrontendError::unsupported(
                self.here(),
                format!("${name}"),
            )),
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Expr> {
        let t = self.bump()?;
        match t.tok {
            Tok::Number { value, width, base } => {
                let base = match base {
                    Some('b') => LiteralBase::Bin,
                    Some('h') => LiteralBase::Hex,
                    _ => LiteralBase::Dec,
                };
                Ok(Expr::Const {
                    value,
                    width,
                    base,
                    span: t.span,
                })
            }
            Tok::Ident(name) => {
                if REJECTED_KEYWORDS.contains(&name.as_str()) {
                    return Err(FrontendError::unsupported(t.span, name));
                }
                if self.eat(&Tok::LBracket) {
                    let first = self.parse_expr()?;
                    if self.eat(&Tok::Colon) {
                        let lsb = self.parse_expr()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        let end = self.last_span();
                        let span = self.span_between(&t.span, &end);
                        Ok(Expr::PartSelect {
                            base: name,
                            msb: Box::new(first),
                            lsb: Box::new(lsb),
                            span,
                        })
                    } else {
                        self.expect(Tok::RBracket, "`]`")?;
                        let end = self.last_span();
                        let span = self.span_between(&t.span, &end);
                        Ok(Expr::BitSelect {
                            base: name,
                            index: Box::new(first),
                            span,
                        })
                    }
                } else {
                    Ok(Expr::Ident { name, span: t.span })
                }
            }
            Tok::LParen => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::LBrace => {
                let mut parts = vec![self.parse_expr()?];
                while self.eat(&Tok::Comma) {
                    parts.push(self.parse_expr()?);
                }
                self.expect(Tok::RBrace, "`}`")?;
                let end = self.last_span();
                let span = self.span_between(&t.span, &end);
                Ok(Expr::Concat { parts, span })
            }
            other => Err(FrontendError::syntax(
                t.span,
                format!("expected expression, found {}", other.describe()),
            )),
        }
    }
}
