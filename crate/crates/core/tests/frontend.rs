//! Frontend tests over the benchmark corpus: subset closure, golden AST
//! shapes, width inference, and render/parse round trips.

use rtlsec::frontend::ast::*;
use rtlsec::frontend::elaborate::{elaborate, infer_width, InitValue};
use rtlsec::frontend::{parse_source, render_source, FrontendError};
use rtlsec::harness::corpus;

fn parse_fixture(fixture: &str) -> Vec<AstModule> {
    let (text, origin, _) = corpus::golden_source(fixture).unwrap();
    parse_source(text, origin).unwrap_or_else(|e| panic!("{fixture}: {e}"))
}

#[test]
fn empty_text_parses_to_no_modules() {
    assert!(parse_source("", "empty.v").unwrap().is_empty());
}

#[test]
fn mem_listing_shape() {
    let modules = parse_fixture("mem");
    assert_eq!(modules.len(), 1);
    let m = &modules[0];
    assert_eq!(m.name, "mem");
    assert_eq!(m.ports.len(), 7);
    let port_names: Vec<&str> = m.ports.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(
        port_names,
        ["clk", "rst", "wr", "sc", "address", "in", "out"]
    );
    let mem = m.decl("mem").unwrap();
    let dim = mem.array_dim.as_ref().unwrap();
    assert_eq!(dim.msb.const_value(), Some((1 << 20) - 1));
    assert_eq!(dim.lsb.const_value(), Some(0));
}

#[test]
fn arbiter_listing_shape() {
    let modules = parse_fixture("arbiter");
    assert_eq!(modules.len(), 1);
    let m = &modules[0];
    assert_eq!(m.name, "arb2");
    let port_names: Vec<&str> = m.ports.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(port_names, ["clk", "rst", "req1", "req2", "gnt1", "gnt2"]);
    for reg in ["state", "gnt1", "gnt2"] {
        assert_eq!(m.decl(reg).unwrap().kind, NetKind::Reg, "{reg} must be reg");
    }
    let always: Vec<_> = m
        .items
        .iter()
        .filter(|i| matches!(i, ModuleItem::Always(_)))
        .collect();
    assert_eq!(always.len(), 2);
    // First block is clocked with async reset, second is combinational.
    match (&always[0], &always[1]) {
        (ModuleItem::Always(a), ModuleItem::Always(b)) => {
            match &a.sensitivity {
                Sensitivity::Edges(edges) => {
                    assert_eq!(edges.len(), 2);
                    assert_eq!(edges[0].signal, "clk");
                    assert_eq!(edges[1].signal, "rst");
                }
                _ => panic!("first block must be clocked"),
            }
            assert!(matches!(b.sensitivity, Sensitivity::Combinational));
        }
        _ => unreachable!(),
    }
}

#[test]
fn all_corpus_fixtures_parse_and_elaborate() {
    for fixture in corpus::FIXTURE_NAMES {
        let (text, origin, top) = corpus::golden_source(fixture).unwrap();
        let modules = parse_source(text, origin).unwrap_or_else(|e| panic!("{fixture}: {e}"));
        elaborate(modules, top).unwrap_or_else(|e| panic!("{fixture}: {e}"));
    }
}

#[test]
fn corpus_round_trips_exactly() {
    for fixture in corpus::FIXTURE_NAMES {
        let (text, origin, _) = corpus::golden_source(fixture).unwrap();
        let first = parse_source(text, origin).unwrap();
        let rendered = render_source(&first);
        let second = parse_source(&rendered, origin)
            .unwrap_or_else(|e| panic!("{fixture} re-parse: {e}\n{rendered}"));
        let rendered_again = render_source(&second);
        assert_eq!(rendered, rendered_again, "{fixture} round trip");
    }
}

#[test]
fn render_of_empty_module_is_canonical() {
    let modules = parse_source("module m; endmodule", "t.v").unwrap();
    assert_eq!(render_source(&modules), "module m();\nendmodule\n");
}

#[test]
fn aes_instance_tree_depth_two_with_four_children() {
    let modules = parse_fixture("aes");
    let design = elaborate(modules, "S4").unwrap();
    assert_eq!(design.tree.depth(), 2);
    assert_eq!(design.tree.children.len(), 4);
    let names: Vec<&str> = design
        .tree
        .children
        .iter()
        .map(|c| c.path.as_str())
        .collect();
    assert_eq!(names, ["S_0", "S_1", "S_2", "S_3"]);
}

#[test]
fn single_module_tree_depth_one() {
    let modules = parse_fixture("arbiter");
    let design = elaborate(modules, "arb2").unwrap();
    assert_eq!(design.tree.depth(), 1);
}

#[test]
fn gng_widths_match_declarations() {
    let modules = parse_fixture("gng");
    let design = elaborate(modules, "gng_interp").unwrap();
    let symbols = &design.top_module().symbols;

    // Part-select width: mul1[32:19] is 14 bits, unsigned.
    let slice = Expr::PartSelect {
        base: "mul1".into(),
        msb: Box::new(Expr::number(32)),
        lsb: Box::new(Expr::number(19)),
        span: rtlsec::SourceSpan::synthetic(),
    };
    assert_eq!(infer_width(&slice, symbols).unwrap(), (14, false));

    // {1'b0, c0_r5} is 19 bits unsigned; $signed(...) + mul1_new is
    // evaluated in a 19-bit signed context.
    let concat = Expr::Concat {
        parts: vec![
            Expr::sized(0, 1, LiteralBase::Bin),
            Expr::ident("c0_r5"),
        ],
        span: rtlsec::SourceSpan::synthetic(),
    };
    assert_eq!(infer_width(&concat, symbols).unwrap(), (19, false));
    let sum = Expr::binary(
        BinOp::Add,
        Expr::SignedCast {
            operand: Box::new(concat),
            span: rtlsec::SourceSpan::synthetic(),
        },
        Expr::ident("mul1_new"),
    );
    assert_eq!(infer_width(&sum, symbols).unwrap(), (19, true));

    // Comparisons are 1-bit unsigned.
    let cmp = Expr::binary(BinOp::Eq, Expr::ident("valid_in"), Expr::ident("valid_out"));
    assert_eq!(infer_width(&cmp, symbols).unwrap(), (1, false));
}

#[test]
fn mem_initial_blocks_lower_to_init_values() {
    let modules = parse_fixture("mem");
    let design = elaborate(modules, "mem").unwrap();
    let init = &design.top_module().init_values;
    assert_eq!(init.get("out"), Some(&InitValue::Scalar(0)));
    assert_eq!(init.get("mem"), Some(&InitValue::ArrayFill(0)));
}

#[test]
fn unsupported_constructs_are_named() {
    let cases = [
        ("module m; function f; endfunction endmodule", "function"),
        ("module m; generate endgenerate endmodule", "generate"),
        ("module m(clk); input clk; always @(posedge clk) $display(clk); endmodule", "$display"),
        ("module m; initial x = y; endmodule", "initial"),
    ];
    for (src, _needle) in cases {
        let err = parse_source(src, "t.v")
            .and_then(|m| elaborate(m, "m"))
            .map(|_| ())
            .err();
        match err {
            Some(FrontendError::UnsupportedConstruct { .. }) => {}
            Some(FrontendError::SyntaxError { .. }) => {}
            Some(FrontendError::UnresolvedIdentifier { .. }) => {}
            other => panic!("expected a diagnostic for {src:?}, got {other:?}"),
        }
    }
}

#[test]
fn lint_rejects_blocking_in_clocked_block() {
    let src = "module m(clk, a, q); input clk, a; output reg q;\n\
               always @(posedge clk) q = a; endmodule";
    let modules = parse_source(src, "t.v").unwrap();
    assert!(elaborate(modules, "m").is_err());
}

#[test]
fn lint_rejects_nonblocking_in_comb_block() {
    let src = "module m(a, q); input a; output reg q;\n\
               always @(*) q <= a; endmodule";
    let modules = parse_source(src, "t.v").unwrap();
    assert!(elaborate(modules, "m").is_err());
}

#[test]
fn elaborate_detects_combinational_cycle() {
    let src = "module m(a, q); input a; output q; wire x, y;\n\
               assign x = y & a; assign y = x; assign q = y; endmodule";
    let modules = parse_source(src, "t.v").unwrap();
    match elaborate(modules, "m") {
        Err(FrontendError::CombinationalCycle(_)) => {}
        other => panic!("expected CombinationalCycle, got {other:?}"),
    }
}

#[test]
fn elaborate_rejects_unknown_module_and_arity() {
    let src = "module top(a); input a; sub u0 (a); endmodule";
    let modules = parse_source(src, "t.v").unwrap();
    assert!(matches!(
        elaborate(modules, "top"),
        Err(FrontendError::UnknownModule(_))
    ));

    let src = "module sub(x, y); input x, y; endmodule\n\
               module top(a); input a; sub u0 (a); endmodule";
    let modules = parse_source(src, "t.v").unwrap();
    assert!(matches!(
        elaborate(modules, "top"),
        Err(FrontendError::PortArityMismatch { .. })
    ));
}

#[test]
fn unresolved_identifier_is_reported() {
    let src = "module m(a, q); input a; output q; assign q = a & ghost; endmodule";
    let modules = parse_source(src, "t.v").unwrap();
    assert!(matches!(
        elaborate(modules, "m"),
        Err(FrontendError::UnresolvedIdentifier { .. })
    ));
}

#[test]
fn span_slices_reproduce_source_text() {
    let (text, origin, _) = corpus::golden_source("gng").unwrap();
    let modules = parse_source(text, origin).unwrap();
    let m = &modules[0];
    // The whole-module span slices back to text that parses to the
    // same module shape.
    let slice = m.span.slice(text).unwrap();
    let again = parse_source(slice, origin).unwrap();
    assert_eq!(again.len(), 1);
    assert_eq!(again[0].name, m.name);
    assert_eq!(again[0].ports.len(), m.ports.len());
    assert_eq!(again[0].items.len(), m.items.len());
}

#[test]
fn assert_statements_round_trip_verbatim() {
    let src = "module m(clk, a, q);\n\
               input clk, a;\n\
               output reg q;\n\
               assert property (@(posedge clk) a |=> (q == 0));\n\
               always @(posedge clk) begin\n\
                   assert((a >= 0) || q);\n\
                   q <= a;\n\
               end\n\
               endmodule\n";
    let modules = parse_source(src, "t.v").unwrap();
    let rendered = render_source(&modules);
    assert!(rendered.contains("assert property (@(posedge clk) a |=> (q == 0));"));
    assert!(rendered.contains("assert((a >= 0) || q);"));
    // Instrumented text re-parses cleanly.
    parse_source(&rendered, "t.v").unwrap();
}
