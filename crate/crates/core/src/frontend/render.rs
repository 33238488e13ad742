//! Canonical source renderer: 4-space indentation, one statement per
//! line. `parse(render(parse(x)))` is structurally identical to
//! `parse(x)`; assertion statements are emitted verbatim from their
//! recorded text so instrumented templates survive byte for byte.

use super::ast::*;

pub fn render_modules(modules: &[AstModule]) -> String {
    let mut out = String::new();
    for (i, m) in modules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        render_module(m, &mut out);
    }
    out
}

pub fn render_module(m: &AstModule, out: &mut String) {
    out.push_str("module ");
    out.push_str(&m.name);
    out.push('(');
    for (i, p) in m.ports.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&p.name);
    }
    out.push_str(");\n");

    for port in &m.ports {
        let decl = m
            .decl(&port.name)
            .expect("port must have a merged declaration");
        out.push_str("    ");
        out.push_str(match port.direction {
            Direction::Input => "input",
            Direction::Output => "output",
        });
        if decl.kind == NetKind::Reg {
            out.push_str(" reg");
        }
        render_decl_tail(decl, out);
    }
    for decl in &m.decls {
        if m.port(&decl.name).is_some() {
            continue;
        }
        out.push_str("    ");
        out.push_str(match decl.kind {
            NetKind::Reg => "reg",
            NetKind::Wire => "wire",
        });
        render_decl_tail(decl, out);
    }

    for item in &m.items {
        render_item(item, out);
    }
    out.push_str("endmodule\n");
}

fn render_decl_tail(decl: &NetDecl, out: &mut String) {
    if decl.signed {
        out.push_str(" signed");
    }
    if let Some(r) = &decl.width {
        out.push_str(&format!(" [{}:{}]", render_expr(&r.msb), render_expr(&r.lsb)));
    }
    out.push(' ');
    out.push_str(&decl.name);
    if let Some(r) = &decl.array_dim {
        out.push_str(&format!(" [{}:{}]", render_expr(&r.msb), render_expr(&r.lsb)));
    }
    if let Some(init) = &decl.init {
        out.push_str(" = ");
        out.push_str(&render_expr(init));
    }
    out.push_str(";\n");
}

fn render_item(item: &ModuleItem, out: &mut String) {
    match item {
        ModuleItem::ContinuousAssign(a) => {
            out.push_str("    assign ");
            out.push_str(&render_lvalue(&a.target));
            out.push_str(" = ");
            out.push_str(&render_expr(&a.value));
            out.push_str(";\n");
        }
        ModuleItem::Always(a) => {
            out.push_str("    always @");
            match &a.sensitivity {
                Sensitivity::Combinational => out.push_str("(*)"),
                Sensitivity::Edges(edges) => {
                    out.push('(');
                    for (i, e) in edges.iter().enumerate() {
                        if i > 0 {
                            out.push_str(" or ");
                        }
                        out.push_str(match e.edge {
                            Edge::Pos => "posedge ",
                            Edge::Neg => "negedge ",
                        });
                        out.push_str(&e.signal);
                    }
                    out.push(')');
                }
            }
            out.push('\n');
            render_stmt(&a.body, 2, out);
        }
        ModuleItem::Initial(i) => {
            if let Stmt::Blocking { target, value, .. } = &i.body {
                out.push_str("    initial ");
                out.push_str(&render_lvalue(target));
                out.push_str(" = ");
                out.push_str(&render_expr(value));
                out.push_str(";\n");
            } else {
                out.push_str("    initial\n");
                render_stmt(&i.body, 2, out);
            }
        }
        ModuleItem::Instantiation(inst) => {
            if inst.instances.len() == 1 {
                out.push_str("    ");
                out.push_str(&inst.module);
                out.push(' ');
                render_instance(&inst.instances[0], out);
                out.push_str(";\n");
            } else {
                out.push_str("    ");
                out.push_str(&inst.module);
                out.push('\n');
                for (i, item) in inst.instances.iter().enumerate() {
                    out.push_str("        ");
                    render_instance(item, out);
                    if i + 1 < inst.instances.len() {
                        out.push_str(",\n");
                    } else {
                        out.push_str(";\n");
                    }
                }
            }
        }
        ModuleItem::ConcurrentAssert(c) => {
            out.push_str("    ");
            out.push_str(&c.rendered);
            out.push('\n');
        }
    }
}

fn render_instance(inst: &Instance, out: &mut String) {
    out.push_str(&inst.name);
    out.push_str(" (");
    for (i, conn) in inst.connections.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if let Some(f) = &conn.formal {
            out.push('.');
            out.push_str(f);
            out.push('(');
            out.push_str(&render_expr(&conn.actual));
            out.push(')');
        } else {
            out.push_str(&render_expr(&conn.actual));
        }
    }
    out.push(')');
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

pub fn render_stmt(stmt: &Stmt, level: usize, out: &mut String) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            indent(level, out);
            out.push_str("begin\n");
            for s in stmts {
                render_stmt(s, level + 1, out);
            }
            indent(level, out);
            out.push_str("end\n");
        }
        Stmt::Blocking { target, value, .. } => {
            indent(level, out);
            out.push_str(&render_lvalue(target));
            out.push_str(" = ");
            out.push_str(&render_expr(value));
            out.push_str(";\n");
        }
        Stmt::NonBlocking { target, value, .. } => {
            indent(level, out);
            out.push_str(&render_lvalue(target));
            out.push_str(" <= ");
            out.push_str(&render_expr(value));
            out.push_str(";\n");
        }
        Stmt::If {
            cond,
            then_stmt,
            else_stmt,
            ..
        } => {
            indent(level, out);
            out.push_str("if (");
            out.push_str(&render_expr(cond));
            out.push_str(")\n");
            render_stmt(then_stmt, level + 1, out);
            if let Some(e) = else_stmt {
                indent(level, out);
                out.push_str("else\n");
                render_stmt(e, level + 1, out);
            }
        }
        Stmt::Case {
            selector,
            items,
            default,
            ..
        } => {
            indent(level, out);
            out.push_str("case (");
            out.push_str(&render_expr(selector));
            out.push_str(")\n");
            for item in items {
                indent(level + 1, out);
                let labels: Vec<String> = item.labels.iter().map(render_expr).collect();
                out.push_str(&labels.join(", "));
                out.push_str(":\n");
                render_stmt(&item.body, level + 2, out);
            }
            if let Some(d) = default {
                indent(level + 1, out);
                out.push_str("default:\n");
                render_stmt(d, level + 2, out);
            }
            indent(level, out);
            out.push_str("endcase\n");
        }
        Stmt::ImmediateAssert { rendered, .. } => {
            indent(level, out);
            out.push_str(rendered);
            out.push('\n');
        }
        Stmt::For {
            var,
            init,
            cond,
            step,
            body,
            ..
        } => {
            indent(level, out);
            out.push_str(&format!(
                "for ({var} = {}; {}; {var} = {})\n",
                render_expr(init),
                render_expr(cond),
                render_expr(step)
            ));
            render_stmt(body, level + 1, out);
        }
    }
}

pub fn render_lvalue(lv: &LValue) -> String {
    let mut s = lv.base.clone();
    if let Some(idx) = &lv.index {
        s.push_str(&format!("[{}]", render_expr(idx)));
    }
    if let Some((msb, lsb)) = &lv.part {
        s.push_str(&format!("[{}:{}]", render_expr(msb), render_expr(lsb)));
    }
    s
}

fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::LogOr => 1,
        BinOp::LogAnd => 2,
        BinOp::Or => 3,
        BinOp::Xor => 4,
        BinOp::And => 5,
        BinOp::Eq | BinOp::Neq => 6,
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 7,
        BinOp::Shl | BinOp::Shr => 8,
        BinOp::Add | BinOp::Sub => 9,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 10,
        BinOp::Pow => 11,
    }
}

pub fn render_expr(expr: &Expr) -> String {
    render_prec(expr, 0)
}

fn render_prec(expr: &Expr, min_bp: u8) -> String {
    match expr {
        Expr::Const {
            value,
            width,
            base,
            ..
        } => render_literal(*value, *width, *base),
        Expr::Ident { name, .. } => name.clone(),
        Expr::BitSelect { base, index, .. } => {
            format!("{base}[{}]", render_prec(index, 0))
        }
        Expr::PartSelect { base, msb, lsb, .. } => {
            format!("{base}[{}:{}]", render_prec(msb, 0), render_prec(lsb, 0))
        }
        Expr::Unary { op, operand, .. } => {
            let sym = match op {
                UnaryOp::Not => "!",
                UnaryOp::BitNot => "~",
                UnaryOp::Neg => "-",
            };
            let inner = match operand.as_ref() {
                Expr::Binary { .. } | Expr::Ternary { .. } => {
                    format!("({})", render_prec(operand, 0))
                }
                _ => render_prec(operand, u8::MAX),
            };
            format!("{sym}{inner}")
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let bp = precedence(*op);
            let l = render_prec(lhs, bp);
            let r = render_prec(rhs, bp + 1);
            let s = format!("{l} {} {r}", op.symbol());
            if bp < min_bp {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            let c = match cond.as_ref() {
                Expr::Ternary { .. } => format!("({})", render_prec(cond, 0)),
                _ => render_prec(cond, 1),
            };
            let s = format!(
                "{c} ? {} : {}",
                render_prec(then_expr, 0),
                render_prec(else_expr, 0)
            );
            if min_bp > 0 {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Concat { parts, .. } => {
            let inner: Vec<String> = parts.iter().map(|p| render_prec(p, 0)).collect();
            format!("{{{}}}", inner.join(", "))
        }
        Expr::SignedCast { operand, .. } => {
            format!("$signed({})", render_prec(operand, 0))
        }
    }
}

pub fn render_literal(value: u64, width: Option<u32>, base: LiteralBase) -> String {
    match (width, base) {
        (None, _) => format!("{value}"),
        (Some(w), LiteralBase::Dec) => format!("{w}'d{value}"),
        (Some(w), LiteralBase::Hex) => {
            let digits = (w as usize).div_ceil(4);
            format!("{w}'h{value:0digits$x}")
        }
        (Some(w), LiteralBase::Bin) => {
            let digits = w as usize;
            format!("{w}'b{value:0digits$b}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_forms() {
        assert_eq!(render_literal(0x7c, Some(8), LiteralBase::Hex), "8'h7c");
        assert_eq!(render_literal(0, Some(2), LiteralBase::Bin), "2'b00");
        assert_eq!(render_literal(3, Some(4), LiteralBase::Dec), "4'd3");
        assert_eq!(render_literal(1024, None, LiteralBase::Dec), "1024");
        assert_eq!(
            render_literal(0x7c7c7c7c, Some(32), LiteralBase::Hex),
            "32'h7c7c7c7c"
        );
    }

    #[test]
    fn minimal_parens() {
        // (a + b) * c keeps its grouping, a + b * c does not gain parens.
        let a = Expr::ident("a");
        let b = Expr::ident("b");
        let c = Expr::ident("c");
        let grouped = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, a.clone(), b.clone()),
            c.clone(),
        );
        assert_eq!(render_expr(&grouped), "(a + b) * c");
        let flat = Expr::binary(BinOp::Add, a, Expr::binary(BinOp::Mul, b, c));
        assert_eq!(render_expr(&flat), "a + b * c");
    }

    #[test]
    fn power_form() {
        let e = Expr::binary(
            BinOp::Sub,
            Expr::binary(BinOp::Pow, Expr::number(2), Expr::number(20)),
            Expr::number(1),
        );
        assert_eq!(render_expr(&e), "2 ** 20 - 1");
    }

    #[test]
    fn unary_over_binary_parenthesizes() {
        let e = Expr::unary(
            UnaryOp::Not,
            Expr::binary(BinOp::LogAnd, Expr::ident("gnt1"), Expr::ident("gnt2")),
        );
        assert_eq!(render_expr(&e), "!(gnt1 && gnt2)");
        let f = Expr::binary(
            BinOp::And,
            Expr::ident("req1"),
            Expr::unary(UnaryOp::BitNot, Expr::ident("req2")),
        );
        assert_eq!(render_expr(&f), "req1 & ~req2");
    }
}
