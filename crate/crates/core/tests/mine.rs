//! Miner tests: the arbiter listing reproduction, soundness on the
//! mining trace, minimality, and binding.

use rtlsec::frontend::compile;
use rtlsec::harness::corpus;
use rtlsec::mine::{bind_rules, dump_rules, mine, MinedRule};
use rtlsec::sim::{eval_concurrent, random_stimulus, run, StimulusSpec};

fn arbiter_trace(cycles: usize, seed: u64) -> (rtlsec::ElaboratedDesign, rtlsec::sim::Trace) {
    let (text, origin, top) = corpus::golden_source("arbiter").unwrap();
    let design = compile(text, origin, top).unwrap();
    let vectors = random_stimulus(&design, "clk", cycles, seed, &StimulusSpec::reset(2));
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    (design, trace)
}

/// The eight published implications, in the trace-miner's normalized
/// form (antecedent literals sorted by signal name).
fn expected_listing() -> Vec<&'static str> {
    vec![
        "(req2 == 1 & state == 1) |-> (gnt1 == 0)",
        "(req1 == 1 & state == 0) |-> (gnt1 == 1)",
        "(req1 == 0) |-> (gnt1 == 0)",
        "(req1 == 1 & req2 == 0) |-> (gnt1 == 1)",
        "(req1 == 1 & state == 0) |-> (gnt2 == 0)",
        "(req2 == 1 & state == 1) |-> (gnt2 == 1)",
        "(req2 == 0) |-> (gnt2 == 0)",
        "(req1 == 0 & req2 == 1) |-> (gnt2 == 1)",
    ]
}

#[test]
fn arbiter_mining_reproduces_the_published_rule_set() {
    let (_, trace) = arbiter_trace(10_000, 1);
    let rules = mine(
        &trace,
        &["gnt1".to_string(), "gnt2".to_string()],
        2,
        10,
    )
    .unwrap();
    let rendered: Vec<String> = rules.iter().map(|r| r.render()).collect();
    for want in expected_listing() {
        assert!(
            rendered.iter().any(|r| r == want),
            "missing `{want}` in:\n{}",
            rendered.join("\n")
        );
    }
}

#[test]
fn mined_rules_have_zero_counterexamples_on_their_own_trace() {
    let (design, trace) = arbiter_trace(10_000, 1);
    let rules = mine(&trace, &["gnt1".to_string(), "gnt2".to_string()], 2, 10).unwrap();
    // Independent check through the offline concurrent evaluator.
    let bound = bind_rules(&rules, &design).unwrap();
    for (i, b) in bound.iter().enumerate() {
        let rtlsec::sim::BoundAssertion::Concurrent { id, property, .. } = b else {
            unreachable!()
        };
        let verdict = eval_concurrent(&design, "", id, property, &trace);
        assert!(!verdict.fired(), "rule {} fired: {}", i, rules[i].render());
    }
}

#[test]
fn no_emitted_rule_is_subsumed_by_another() {
    let (_, trace) = arbiter_trace(4_000, 9);
    let rules = mine(&trace, &["gnt1".to_string(), "gnt2".to_string()], 2, 10).unwrap();
    for r in &rules {
        for other in &rules {
            if r == other || other.consequent != r.consequent {
                continue;
            }
            let subset = other.antecedent.len() < r.antecedent.len()
                && other.antecedent.iter().all(|l| r.antecedent.contains(l));
            assert!(!subset, "{} subsumed by {}", r.render(), other.render());
        }
    }
}

#[test]
fn constant_zero_output_yields_the_empty_antecedent_rule() {
    let src = "module m(clk, a, out);\n\
               input clk, a; output reg out;\n\
               initial out = 0;\n\
               always @(posedge clk) out <= 0;\n\
               endmodule";
    let design = compile(src, "t.v", "m").unwrap();
    let vectors = random_stimulus(&design, "clk", 100, 3, &StimulusSpec::default());
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    let rules = mine(&trace, &["out".to_string()], 2, 10).unwrap();
    assert!(rules.iter().any(|r| r.render() == "true |-> (out == 0)"));
}

#[test]
fn support_filter_rejects_short_traces() {
    let (_, trace) = arbiter_trace(3, 5);
    let rules = mine(&trace, &["gnt1".to_string()], 2, 2).unwrap();
    // One armed cycle only: nothing reaches support 2.
    assert!(rules.is_empty());
}

#[test]
fn empty_trace_is_an_error() {
    let (design, _) = arbiter_trace(4, 5);
    let empty = {
        let vectors = random_stimulus(&design, "clk", 0, 1, &StimulusSpec::default());
        run(&design, "clk", &vectors, &[]).unwrap().0
    };
    assert!(mine(&empty, &["gnt1".to_string()], 2, 1).is_err());
}

#[test]
fn mining_is_deterministic() {
    let (_, t1) = arbiter_trace(10_000, 1);
    let (_, t2) = arbiter_trace(10_000, 1);
    let outputs = ["gnt1".to_string(), "gnt2".to_string()];
    let a = mine(&t1, &outputs, 2, 10).unwrap();
    let b = mine(&t2, &outputs, 2, 10).unwrap();
    assert_eq!(dump_rules(&a), dump_rules(&b));
}

#[test]
fn rules_bind_on_mutants_because_mutations_never_rename() {
    let (text, origin, top) = corpus::golden_source("arbiter").unwrap();
    let (design, trace) = arbiter_trace(10_000, 1);
    let rules = mine(&trace, &["gnt1".to_string(), "gnt2".to_string()], 2, 10).unwrap();
    assert!(bind_rules(&rules, &design).is_ok());
    let mutant_src = text.replace("gnt2 = req2 & ~req1;", "gnt2 = ~req2 & ~req1;");
    let mutant = compile(&mutant_src, origin, top).unwrap();
    let bound = bind_rules(&rules, &mutant).unwrap();
    assert_eq!(bound.len(), rules.len());
}

#[test]
fn unknown_signal_in_rule_is_rejected() {
    let (design, _) = arbiter_trace(4, 5);
    let rule = MinedRule {
        antecedent: vec![("ghost".to_string(), 1)],
        consequent: ("gnt1".to_string(), 0),
        support: 4,
    };
    assert!(bind_rules(&[rule], &design).is_err());
}
