//! Property tests: renderer/parser round trips, vector format symmetry,
//! taint monotonicity, and the independence law behind rarity products.

use proptest::prelude::*;

use rtlsec::analysis::{estimate_rarity, propagate_tags};
use rtlsec::frontend::ast::{BinOp, Expr, LiteralBase, UnaryOp};
use rtlsec::frontend::render::render_expr;
use rtlsec::frontend::{compile, parse_expr_text};
use rtlsec::harness::corpus;
use rtlsec::sim::{load_vectors, vectors::render_vectors};

fn arb_expr(depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u64..1u64 << 16).prop_map(Expr::number),
        (0u64..256, 1u32..9).prop_map(|(v, w)| Expr::sized(
            v & ((1 << w) - 1),
            w,
            LiteralBase::Hex
        )),
        prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(Expr::ident),
        (prop_oneof![Just("a"), Just("b")], 0u64..8).prop_map(|(n, i)| Expr::BitSelect {
            base: n.to_string(),
            index: Box::new(Expr::number(i)),
            span: rtlsec::SourceSpan::synthetic(),
        }),
    ];
    leaf.prop_recursive(depth, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), arb_binop())
                .prop_map(|(l, r, op)| Expr::binary(op, l, r)),
            (inner.clone(), arb_unop()).prop_map(|(e, op)| Expr::unary(op, e)),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, t, e)| Expr::Ternary {
                cond: Box::new(c),
                then_expr: Box::new(t),
                else_expr: Box::new(e),
                span: rtlsec::SourceSpan::synthetic(),
            }),
            proptest::collection::vec(inner, 2..4).prop_map(|parts| {
                // Concatenations require sized operands.
                let sized: Vec<Expr> = parts
                    .into_iter()
                    .enumerate()
                    .map(|(i, _)| Expr::sized(i as u64 & 0xf, 4, LiteralBase::Bin))
                    .collect();
                Expr::Concat {
                    parts: sized,
                    span: rtlsec::SourceSpan::synthetic(),
                }
            }),
        ]
    })
}

fn arb_binop() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::And),
        Just(BinOp::Or),
        Just(BinOp::Xor),
        Just(BinOp::LogAnd),
        Just(BinOp::LogOr),
        Just(BinOp::Eq),
        Just(BinOp::Neq),
        Just(BinOp::Lt),
        Just(BinOp::Le),
        Just(BinOp::Gt),
        Just(BinOp::Ge),
        Just(BinOp::Shl),
        Just(BinOp::Shr),
    ]
}

fn arb_unop() -> impl Strategy<Value = UnaryOp> {
    prop_oneof![Just(UnaryOp::Not), Just(UnaryOp::BitNot), Just(UnaryOp::Neg)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The renderer emits exactly enough parentheses: re-parsing a
    /// rendered expression reproduces the same rendering.
    #[test]
    fn expr_render_parse_round_trip(e in arb_expr(4)) {
        let text = render_expr(&e);
        let back = parse_expr_text(&text, "prop").unwrap();
        prop_assert_eq!(render_expr(&back), text);
    }

    /// Vector sets survive a render/load cycle.
    #[test]
    fn vector_round_trip(rows in proptest::collection::vec(
        proptest::collection::vec(0u64..1 << 32, 3), 1..20
    )) {
        let set = rtlsec::sim::TestVectorSet {
            name: "prop".into(),
            input_names: vec!["a".into(), "b".into(), "c".into()],
            rows: rows.clone(),
            arm_cycle: 0,
            trigger_test: false,
        };
        let text = render_vectors(&set);
        let back = load_vectors(&text, "prop").unwrap();
        prop_assert_eq!(back.rows, rows);
    }

    /// Adding a seed never removes a secure tag.
    #[test]
    fn taint_monotone(extra in prop_oneof![
        Just("in"), Just("address"), Just("wr"), Just("sc")
    ]) {
        let (text, origin, top) = corpus::golden_source("mem").unwrap();
        let design = compile(text, origin, top).unwrap();
        let base = propagate_tags(&design, &["mem".to_string()]).unwrap();
        let grown = propagate_tags(
            &design,
            &["mem".to_string(), extra.to_string()],
        ).unwrap();
        for s in base.secure_signals() {
            prop_assert!(grown.is_secure(&s));
        }
    }

    /// Conjunctions over disjoint variables multiply exactly, the
    /// independence assumption the trigger arithmetic rests on.
    #[test]
    fn rarity_conjunction_multiplies(ka in 0u64..256, kb in 0u64..256) {
        let src = "module t(a, b); input [7:0] a, b; endmodule";
        let env = compile(src, "t.v", "t").unwrap().top_module().symbols.clone();
        let eq = |n: &str, k: u64| Expr::binary(
            BinOp::Eq,
            Expr::ident(n),
            Expr::sized(k, 8, LiteralBase::Hex),
        );
        let a = eq("a", ka);
        let b = eq("b", kb);
        let both = Expr::binary(BinOp::LogAnd, a.clone(), b.clone());
        let pa = estimate_rarity(&a, &env).probability;
        let pb = estimate_rarity(&b, &env).probability;
        let pab = estimate_rarity(&both, &env).probability;
        prop_assert_eq!(pab, pa * pb);
    }

    /// Width inference is a pure function of (expr, env).
    #[test]
    fn width_inference_is_deterministic(e in arb_expr(3)) {
        let src = "module t(a, b, c); input [7:0] a, b; input c; endmodule";
        let env = compile(src, "t.v", "t").unwrap().top_module().symbols.clone();
        let first = rtlsec::frontend::elaborate::infer_width(&e, &env).ok();
        let second = rtlsec::frontend::elaborate::infer_width(&e, &env).ok();
        prop_assert_eq!(first, second);
    }
}
