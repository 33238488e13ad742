//! Simulator semantics tests: arbiter behavior, two-phase scheduling,
//! concurrent verdicts, determinism, and online/offline agreement.

use rtlsec::frontend::ast::{BinOp, Expr, UnaryOp};
use rtlsec::frontend::compile;
use rtlsec::harness::corpus;
use rtlsec::rng::SplitMix64;
use rtlsec::sim::{
    eval_concurrent, load_vectors, random_stimulus, run, AttemptStatus, BoundAssertion,
    ConcurrentProperty, StimulusSpec,
};

fn arbiter() -> rtlsec::ElaboratedDesign {
    let (text, origin, top) = corpus::golden_source("arbiter").unwrap();
    compile(text, origin, top).unwrap()
}

fn prop(ant: Option<Expr>, cons: Expr, next: bool) -> ConcurrentProperty {
    ConcurrentProperty {
        antecedent: ant,
        consequent: cons,
        next_cycle: next,
    }
}

fn concurrent(id: &str, p: ConcurrentProperty) -> BoundAssertion {
    BoundAssertion::Concurrent {
        id: id.to_string(),
        scope: String::new(),
        property: p,
    }
}

fn eq(name: &str, value: u64) -> Expr {
    Expr::binary(BinOp::Eq, Expr::ident(name), Expr::number(value))
}

/// The eight implications of the mined-baseline listing for the arbiter.
fn listing_rules() -> Vec<(Option<Expr>, Expr)> {
    let and = |a: Expr, b: Expr| Expr::binary(BinOp::LogAnd, a, b);
    vec![
        (Some(and(eq("state", 1), eq("req2", 1))), eq("gnt1", 0)),
        (Some(and(eq("req1", 1), eq("state", 0))), eq("gnt1", 1)),
        (Some(eq("req1", 0)), eq("gnt1", 0)),
        (Some(and(eq("req1", 1), eq("req2", 0))), eq("gnt1", 1)),
        (Some(and(eq("req1", 1), eq("state", 0))), eq("gnt2", 0)),
        (Some(and(eq("req2", 1), eq("state", 1))), eq("gnt2", 1)),
        (Some(eq("req2", 0)), eq("gnt2", 0)),
        (Some(and(eq("req2", 1), eq("req1", 0))), eq("gnt2", 1)),
    ]
}

#[test]
fn golden_arbiter_satisfies_mined_style_implication() {
    let design = arbiter();
    let vectors = random_stimulus(&design, "clk", 1000, 11, &StimulusSpec::reset(2));
    let a = concurrent(
        "p0",
        prop(Some(eq("req1", 0)), eq("gnt1", 0), false),
    );
    let (_, verdicts) = run(&design, "clk", &vectors, &[a]).unwrap();
    let v = verdicts.iter().find(|v| v.id == "p0").unwrap();
    assert!(!v.fired());
    assert!(v.count(AttemptStatus::Pass) > 0);
}

#[test]
fn golden_arbiter_never_grants_both() {
    let design = arbiter();
    let vectors = random_stimulus(&design, "clk", 1000, 23, &StimulusSpec::reset(2));
    let never_both = Expr::unary(
        UnaryOp::Not,
        Expr::binary(BinOp::LogAnd, Expr::ident("gnt1"), Expr::ident("gnt2")),
    );
    let a = concurrent("safety", prop(None, never_both, false));
    let (_, verdicts) = run(&design, "clk", &vectors, &[a]).unwrap();
    assert!(!verdicts[0].fired());
}

#[test]
fn golden_arbiter_satisfies_all_eight_listing_rules_over_10k_cycles() {
    let design = arbiter();
    let vectors = random_stimulus(&design, "clk", 10_000, 1, &StimulusSpec::reset(2));
    let assertions: Vec<BoundAssertion> = listing_rules()
        .into_iter()
        .enumerate()
        .map(|(i, (ant, cons))| concurrent(&format!("rule{i}"), prop(ant, cons, false)))
        .collect();
    let (_, verdicts) = run(&design, "clk", &vectors, &assertions).unwrap();
    for v in &verdicts {
        assert!(!v.fired(), "{} fired: {:?}", v.id, v.first_fail_cycle);
    }
}

#[test]
fn inverted_req2_mutant_grants_when_it_must_not() {
    // gnt2 = ~req2 & ~req1 in the idle branch.
    let mutant = corpus::ARBITER_V.replace("gnt2 = req2 & ~req1;", "gnt2 = ~req2 & ~req1;");
    let design = compile(&mutant, "arb_mut.v", "arb2").unwrap();
    let vectors = load_vectors(
        "signals: rst,req1,req2\n1,0,0\n0,0,0\n0,0,0\n",
        "directed",
    )
    .unwrap();
    let (trace, verdicts) = run(
        &design,
        "clk",
        &vectors,
        &[concurrent("r6", prop(Some(eq("req2", 0)), eq("gnt2", 0), false))],
    )
    .unwrap();
    // With state=0, req1=0, req2=0 the mutant drives gnt2 = 1.
    assert_eq!(trace.value(1, "gnt2"), Some(Some(1)));
    assert!(verdicts[0].fired());
}

#[test]
fn eval_concurrent_next_cycle_semantics() {
    let design = arbiter();
    // Hand trace via a directed run: req1 pulses high at cycle 1.
    let vectors = load_vectors(
        "signals: rst,req1,req2\n1,0,0\n0,1,0\n0,0,0\n0,0,0\n",
        "directed",
    )
    .unwrap();
    let p = prop(Some(eq("req1", 1)), eq("state", 1), true);
    let online = run(
        &design,
        "clk",
        &vectors,
        &[concurrent("p", p.clone())],
    )
    .unwrap();
    let offline = eval_concurrent(&design, "", "p", &p, &online.0);
    let on = online.1.iter().find(|v| v.id == "p").unwrap();
    assert_eq!(on.attempts, offline.attempts);
    assert_eq!(on.first_fail_cycle, offline.first_fail_cycle);
    // req1=1 at cycle 1 -> state must be 1 at cycle 2 (it is).
    assert!(!on.fired());
    assert_eq!(on.count(AttemptStatus::Pass), 1);
}

#[test]
fn eval_concurrent_fail_records_consequent_cycle() {
    let design = arbiter();
    let vectors = load_vectors(
        "signals: rst,req1,req2\n1,0,0\n0,1,1\n0,1,1\n0,1,1\n",
        "directed",
    )
    .unwrap();
    // From idle with both requests, gnt1 wins so state goes to 1; the
    // bogus claim "state stays 0" must fail at the following sample.
    let p = prop(Some(eq("state", 0)), eq("state", 0), true);
    let (trace, verdicts) = run(&design, "clk", &vectors, &[concurrent("p", p.clone())]).unwrap();
    let v = &verdicts[0];
    assert!(v.fired());
    assert_eq!(v.first_fail_cycle, Some(2));
    let offline = eval_concurrent(&design, "", "p", &p, &trace);
    assert_eq!(v.attempts, offline.attempts);
}

#[test]
fn vacuous_attempts_never_fire() {
    let design = arbiter();
    let vectors = load_vectors(
        "signals: rst,req1,req2\n1,0,0\n0,0,0\n0,0,0\n",
        "directed",
    )
    .unwrap();
    let p = prop(Some(eq("req1", 1)), eq("gnt1", 1), false);
    let (_, verdicts) = run(&design, "clk", &vectors, &[concurrent("p", p)]).unwrap();
    let v = &verdicts[0];
    assert!(!v.fired());
    assert_eq!(v.count(AttemptStatus::Vacuous), 3);
}

#[test]
fn pending_attempt_at_trace_end_is_not_attempted() {
    let design = arbiter();
    let vectors = load_vectors("signals: rst,req1,req2\n1,0,0\n0,1,0\n", "t").unwrap();
    let p = prop(Some(eq("req1", 1)), eq("state", 1), true);
    let (_, verdicts) = run(&design, "clk", &vectors, &[concurrent("p", p)]).unwrap();
    let v = &verdicts[0];
    assert!(!v.fired());
    assert_eq!(v.count(AttemptStatus::NotAttempted), 1);
}

#[test]
fn random_stimulus_is_deterministic() {
    let design = arbiter();
    let a = random_stimulus(&design, "clk", 16, 7, &StimulusSpec::reset(2));
    let b = random_stimulus(&design, "clk", 16, 7, &StimulusSpec::reset(2));
    assert_eq!(a.rows, b.rows);
    let c = random_stimulus(&design, "clk", 16, 8, &StimulusSpec::reset(2));
    assert_ne!(a.rows, c.rows);
}

#[test]
fn thousand_random_cycles_cover_every_state_and_request_combo() {
    let design = arbiter();
    let vectors = random_stimulus(&design, "clk", 1000, 5, &StimulusSpec::reset(2));
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for c in trace.arm_cycle..trace.cycle_count() {
        let state = trace.value(c, "state").unwrap().unwrap();
        let r1 = trace.value(c, "req1").unwrap().unwrap();
        let r2 = trace.value(c, "req2").unwrap().unwrap();
        seen.insert((state, r1, r2));
    }
    assert_eq!(seen.len(), 8, "missing combos: {seen:?}");
}

#[test]
fn identical_runs_produce_identical_traces() {
    let design = arbiter();
    let vectors = random_stimulus(&design, "clk", 200, 3, &StimulusSpec::reset(2));
    let (a, _) = run(&design, "clk", &vectors, &[]).unwrap();
    let (b, _) = run(&design, "clk", &vectors, &[]).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.dump_tsv(), b.dump_tsv());
}

#[test]
fn swapping_independent_nonblocking_assigns_preserves_the_trace() {
    let a_src = "module m(clk, a, b, x, y);\n\
                 input clk, a, b; output reg x, y;\n\
                 always @(posedge clk) begin x <= a; y <= b; end\n\
                 endmodule";
    let b_src = "module m(clk, a, b, x, y);\n\
                 input clk, a, b; output reg x, y;\n\
                 always @(posedge clk) begin y <= b; x <= a; end\n\
                 endmodule";
    let da = compile(a_src, "a.v", "m").unwrap();
    let db = compile(b_src, "b.v", "m").unwrap();
    let vectors = random_stimulus(&da, "clk", 64, 9, &StimulusSpec::default());
    let (ta, _) = run(&da, "clk", &vectors, &[]).unwrap();
    let (tb, _) = run(&db, "clk", &vectors, &[]).unwrap();
    assert_eq!(ta.rows, tb.rows);
}

#[test]
fn nonblocking_reads_pre_edge_values() {
    // Classic swap: both registers exchange values on one edge.
    let src = "module m(clk, rst, x, y);\n\
               input clk, rst; output reg x, y;\n\
               always @(posedge clk)\n\
                   if (rst) begin x <= 0; y <= 1; end\n\
                   else begin x <= y; y <= x; end\n\
               endmodule";
    let design = compile(src, "swap.v", "m").unwrap();
    let vectors = load_vectors("signals: rst\n1\n0\n0\n0\n", "t").unwrap();
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    // After reset: (0,1); each edge swaps.
    assert_eq!(trace.value(1, "x"), Some(Some(0)));
    assert_eq!(trace.value(1, "y"), Some(Some(1)));
    assert_eq!(trace.value(2, "x"), Some(Some(1)));
    assert_eq!(trace.value(2, "y"), Some(Some(0)));
    assert_eq!(trace.value(3, "x"), Some(Some(0)));
    assert_eq!(trace.value(3, "y"), Some(Some(1)));
}

#[test]
fn memory_write_then_read_round_trips() {
    let (text, origin, top) = corpus::golden_source("mem").unwrap();
    let design = compile(text, origin, top).unwrap();
    // Write 0xab to 2048 with sc, read it back two cycles later.
    let vectors = load_vectors(
        "signals: rst,wr,sc,address,in\n\
         0,0,1,4096,0\n\
         0,1,1,2048,0xab\n\
         0,0,1,2048,0\n\
         0,0,1,4096,0\n",
        "t",
    )
    .unwrap();
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    assert_eq!(trace.value(1, "out"), Some(Some(0)));
    assert_eq!(trace.value(3, "out"), Some(Some(0xab)));
    // Final read of an untouched (zero-filled) location returns 0.
    assert_eq!(trace.value(3, "out"), Some(Some(0xab)));
}

#[test]
fn aes_sbox_lanes_substitute_bytes() {
    let (text, origin, top) = corpus::golden_source("aes").unwrap();
    let design = compile(text, origin, top).unwrap();
    let vectors = load_vectors(
        "signals: JTAG,in\n0,0x01010101\n0,0x00030200\n0,0\n",
        "t",
    )
    .unwrap();
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    assert_eq!(trace.value(1, "out"), Some(Some(0x7c7c7c7c)));
    assert_eq!(trace.value(2, "out"), Some(Some(0x637b7763)));
    // JTAG low: the dump register keeps its initialized zero.
    assert_eq!(trace.value(2, "JTAG_out"), Some(Some(0)));
}

#[test]
fn gng_pipeline_computes_signed_sum() {
    let (text, origin, top) = corpus::golden_source("gng").unwrap();
    let design = compile(text, origin, top).unwrap();
    // data_in fields: [16:0]=a, [33:17]=b, [51:34]=c0.
    let a = 0x1ffffu64;
    let b = 0x1ffffu64;
    let c0 = 0x100u64;
    let data_in = a | (b << 17) | (c0 << 34);
    let text_vec = format!(
        "signals: rstn,valid_in,data_in\n1,1,{data_in}\n1,1,{data_in}\n1,1,{data_in}\n1,1,{data_in}\n"
    );
    let vectors = load_vectors(&text_vec, "t").unwrap();
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    // mul1 = a*b = 0x3fffc0001; mul1[32] = 1; mul1_new = mul1[32:19]
    // = 0x3fff, i.e. -1 as a 14-bit signed value.
    assert_eq!(trace.value(0, "mul1"), Some(Some(0x3fffc0001)));
    assert_eq!(trace.value(0, "mul1_new"), Some(Some(0x3fff)));
    let sum2 = trace.value(2, "sum2").unwrap().unwrap();
    let expected = (0x100i64 - 1) as u64 & 0x7ffff;
    assert_eq!(sum2, expected);
}

#[test]
fn division_by_zero_raises_diagnostic_and_all_ones() {
    let src = "module m(clk, a, b, q);\n\
               input clk; input [7:0] a, b; output reg [7:0] q;\n\
               always @(posedge clk) q <= a / b;\n\
               endmodule";
    let design = compile(src, "div.v", "m").unwrap();
    let vectors = load_vectors("signals: a,b\n8,2\n8,0\n0,1\n", "t").unwrap();
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    assert_eq!(trace.value(1, "q"), Some(Some(4)));
    assert_eq!(trace.value(2, "q"), Some(Some(0xff)));
    assert!(trace
        .diagnostics
        .iter()
        .any(|d| d.contains("division by zero")));
}

#[test]
fn immediate_assert_on_uninitialized_signal_is_an_error() {
    let src = "module m(clk, a, q);\n\
               input clk, a; output reg q;\n\
               reg ghost;\n\
               always @(posedge clk) begin\n\
                   assert(ghost == 0);\n\
                   q <= a;\n\
               end\n\
               endmodule";
    let design = compile(src, "x.v", "m").unwrap();
    let vectors = load_vectors("signals: a\n0\n", "t").unwrap();
    match run(&design, "clk", &vectors, &[]) {
        Err(rtlsec::sim::SimError::XPropagationToAssertion { .. }) => {}
        other => panic!("expected XPropagationToAssertion, got {other:?}"),
    }
}

#[test]
fn concurrent_attempt_over_uninitialized_sample_is_skipped() {
    let src = "module m(clk, wr, out);\n\
               input clk, wr; output reg out;\n\
               always @(posedge clk) if (wr) out <= 0;\n\
               endmodule";
    let design = compile(src, "x.v", "m").unwrap();
    // out stays uninitialized while wr=0.
    let vectors = load_vectors("signals: wr\n0\n0\n", "t").unwrap();
    let p = prop(None, eq("out", 0), false);
    let (_, verdicts) = run(&design, "clk", &vectors, &[concurrent("p", p)]).unwrap();
    assert_eq!(verdicts[0].count(AttemptStatus::NotAttempted), 2);
    assert!(!verdicts[0].fired());
}

#[test]
fn online_and_offline_verdicts_agree_on_random_properties() {
    for fixture in ["arbiter", "usb_lite"] {
        let (text, origin, top) = corpus::golden_source(fixture).unwrap();
        let design = compile(text, origin, top).unwrap();
        let vectors = random_stimulus(&design, "clk", 300, 77, &StimulusSpec::reset(2));
        let names: Vec<String> = rtlsec::sim::engine::scalar_signal_names(&design)
            .into_iter()
            .filter(|n| !n.contains('.') && n != "clk")
            .collect();
        let mut rng = SplitMix64::new(99);
        let mut props = Vec::new();
        for i in 0..25 {
            let pick = |r: &mut SplitMix64| {
                let n = &names[r.next_below(names.len() as u64) as usize];
                eq(n, r.next_bits(1))
            };
            let ant = (rng.next_bits(1) == 1).then(|| pick(&mut rng));
            let cons = pick(&mut rng);
            props.push((
                format!("rnd{i}"),
                prop(ant, cons, rng.next_bits(1) == 1),
            ));
        }
        let assertions: Vec<BoundAssertion> = props
            .iter()
            .map(|(id, p)| concurrent(id, p.clone()))
            .collect();
        let (trace, online) = run(&design, "clk", &vectors, &assertions).unwrap();
        for (id, p) in &props {
            let off = eval_concurrent(&design, "", id, p, &trace);
            let on = online.iter().find(|v| &v.id == id).unwrap();
            assert_eq!(on.attempts, off.attempts, "{fixture}/{id}");
            assert_eq!(on.first_fail_cycle, off.first_fail_cycle, "{fixture}/{id}");
        }
    }
}

#[test]
fn vector_binding_errors() {
    let design = arbiter();
    // Missing req2 column.
    let v = load_vectors("signals: rst,req1\n0,0\n", "t").unwrap();
    assert!(matches!(
        run(&design, "clk", &v, &[]),
        Err(rtlsec::sim::SimError::MissingInput(_))
    ));
    // Unknown signal.
    let v = load_vectors("signals: rst,req1,req2,zzz\n0,0,0,0\n", "t").unwrap();
    assert!(matches!(
        run(&design, "clk", &v, &[]),
        Err(rtlsec::sim::SimError::UnknownSignal(_))
    ));
    // Width overflow.
    let v = load_vectors("signals: rst,req1,req2\n0,2,0\n", "t").unwrap();
    assert!(matches!(
        run(&design, "clk", &v, &[]),
        Err(rtlsec::sim::SimError::WidthMismatch { .. })
    ));
}
