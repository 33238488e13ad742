//! Acceptance suite: one test per criterion, each printing its own
//! pass line. Everything runs offline from the embedded corpus.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use rtlsec::analysis::{estimate_rarity, extract_fsm, fsm_oracle};
use rtlsec::assertgen::{generate_all, parse_config, SecurityConfig, VulnClass};
use rtlsec::frontend::ast::{BinOp, Expr, UnaryOp};
use rtlsec::frontend::{compile, parse_source, render_source};
use rtlsec::harness::{
    report_tsv, run_experiment, verify_golden_cleanliness, verify_non_interference,
};
use rtlsec::mine::mine;
use rtlsec::rng::SplitMix64;
use rtlsec::sim::{
    eval_concurrent, random_stimulus, run, BoundAssertion, ConcurrentProperty, StimulusSpec,
};

const SEED: u64 = 1;

fn fixture(name: &str) -> (rtlsec::ElaboratedDesign, &'static str, &'static str, &'static str) {
    let (text, origin, top) = rtlsec::harness::corpus::golden_source(name).unwrap();
    (compile(text, origin, top).unwrap(), text, origin, top)
}

fn pow2_inv(bits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2u8).pow(bits))
}

#[test]
fn criterion_1_corpus_fidelity() {
    for name in ["arbiter", "mem", "gng", "aes", "usb_lite"] {
        let (design, text, origin, top) = fixture(name);
        // Round trip: parse(render(parse(F))) is structurally identical.
        let first = parse_source(text, origin).unwrap();
        let rendered = render_source(&first);
        let second = parse_source(&rendered, origin).unwrap();
        assert_eq!(rendered, render_source(&second), "{name} round trip");
        // And the design simulates.
        let cfg = parse_config(rtlsec::harness::corpus::config_text(name).unwrap()).unwrap();
        let vectors = random_stimulus(&design, &cfg.clock, 50, SEED, &StimulusSpec::reset(2));
        run(&design, &cfg.clock, &vectors, &[]).unwrap();
        let _ = top;
    }
    eprintln!("criterion 1 PASS: corpus parses, elaborates, simulates, and round-trips exactly");
}

#[test]
fn criterion_2_listing_reproduction() {
    let (design, _, _, _) = fixture("arbiter");
    let vectors = random_stimulus(&design, "clk", 10_000, SEED, &StimulusSpec::reset(2));
    let (trace, _) = run(&design, "clk", &vectors, &[]).unwrap();
    let rules = mine(&trace, &["gnt1".into(), "gnt2".into()], 2, 10).unwrap();
    let rendered: Vec<String> = rules.iter().map(|r| r.render()).collect();
    let expected = [
        "(req2 == 1 & state == 1) |-> (gnt1 == 0)",
        "(req1 == 1 & state == 0) |-> (gnt1 == 1)",
        "(req1 == 0) |-> (gnt1 == 0)",
        "(req1 == 1 & req2 == 0) |-> (gnt1 == 1)",
        "(req1 == 1 & state == 0) |-> (gnt2 == 0)",
        "(req2 == 1 & state == 1) |-> (gnt2 == 1)",
        "(req2 == 0) |-> (gnt2 == 0)",
        "(req1 == 0 & req2 == 1) |-> (gnt2 == 1)",
    ];
    for want in expected {
        assert!(rendered.iter().any(|r| r == want), "missing {want}");
    }
    // Zero counterexamples over the mining trace itself.
    let bound = rtlsec::mine::bind_rules(&rules, &design).unwrap();
    for b in &bound {
        let BoundAssertion::Concurrent { id, property, .. } = b else {
            unreachable!()
        };
        assert!(!eval_concurrent(&design, "", id, property, &trace).fired());
    }
    eprintln!(
        "criterion 2 PASS: all 8 published implications mined verbatim ({} rules total)",
        rules.len()
    );
}

#[test]
fn criterion_3_rarity_math() {
    // The four-byte trigger probability.
    let (design, _, _, _) = fixture("aes");
    let threshold = pow2_inv(16);
    let rare = rtlsec::analysis::find_rare_conditions(&design, &threshold);
    let trigger = rare
        .iter()
        .find(|r| r.rendered == "out == 32'h7c7c7c7c")
        .expect("paper trigger present");
    assert_eq!(trigger.estimate.probability, pow2_inv(32));

    // 200 random conditions with at most 16 free bits: the estimate
    // equals independent enumeration exactly.
    let mut rng = SplitMix64::new(0xace5);
    let mut checked = 0;
    while checked < 200 {
        let vars = random_vars(&mut rng);
        let env = env_for(&vars);
        let cond = random_condition(&mut rng, &vars, 3);
        let est = estimate_rarity(&cond, &env);
        let oracle = oracle_probability(&cond, &vars);
        assert_eq!(
            est.probability,
            oracle,
            "condition {}",
            rtlsec::frontend::render::render_expr(&cond)
        );
        checked += 1;
    }
    eprintln!("criterion 3 PASS: 2^-32 trigger probability and 200/200 exact-count matches");
}

fn random_vars(rng: &mut SplitMix64) -> Vec<(String, u32)> {
    let n = 1 + rng.next_below(3) as usize;
    let mut budget = 16u32;
    let names = ["a", "b", "c"];
    let mut out = Vec::new();
    for name in names.iter().take(n) {
        let w = 1 + rng.next_below(budget.min(8) as u64) as u32;
        budget -= w;
        out.push((name.to_string(), w));
        if budget == 0 {
            break;
        }
    }
    out
}

fn env_for(vars: &[(String, u32)]) -> rtlsec::frontend::elaborate::SymbolTable {
    let ports: Vec<String> = vars.iter().map(|(n, _)| n.clone()).collect();
    let decls: Vec<String> = vars
        .iter()
        .map(|(n, w)| {
            if *w == 1 {
                format!("input {n};")
            } else {
                format!("input [{}:0] {n};", w - 1)
            }
        })
        .collect();
    let src = format!(
        "module t({});\n{}\nendmodule",
        ports.join(", "),
        decls.join("\n")
    );
    compile(&src, "synth.v", "t").unwrap().top_module().symbols.clone()
}

fn random_condition(rng: &mut SplitMix64, vars: &[(String, u32)], depth: usize) -> Expr {
    let var = |rng: &mut SplitMix64| {
        let (n, w) = &vars[rng.next_below(vars.len() as u64) as usize];
        (Expr::ident(n), *w)
    };
    let leaf_cmp = |rng: &mut SplitMix64| {
        let (v, w) = var(rng);
        let k = Expr::number(rng.next_bits(w.min(63)));
        let op = match rng.next_below(6) {
            0 => BinOp::Eq,
            1 => BinOp::Neq,
            2 => BinOp::Lt,
            3 => BinOp::Le,
            4 => BinOp::Gt,
            _ => BinOp::Ge,
        };
        Expr::binary(op, v, k)
    };
    if depth == 0 || rng.next_below(3) == 0 {
        return leaf_cmp(rng);
    }
    match rng.next_below(4) {
        0 => Expr::binary(
            BinOp::LogAnd,
            random_condition(rng, vars, depth - 1),
            random_condition(rng, vars, depth - 1),
        ),
        1 => Expr::binary(
            BinOp::LogOr,
            random_condition(rng, vars, depth - 1),
            random_condition(rng, vars, depth - 1),
        ),
        2 => Expr::unary(UnaryOp::Not, random_condition(rng, vars, depth - 1)),
        _ => {
            // Arithmetic inside a comparison.
            let (x, wx) = var(rng);
            let (y, _) = var(rng);
            let sum = Expr::binary(
                if rng.next_bits(1) == 1 {
                    BinOp::Add
                } else {
                    BinOp::Xor
                },
                x,
                y,
            );
            Expr::binary(BinOp::Eq, sum, Expr::number(rng.next_bits(wx.min(63))))
        }
    }
}

/// Test-side oracle: enumerate every assignment with a dedicated
/// evaluator, independent of the implementation's counting path.
fn oracle_probability(cond: &Expr, vars: &[(String, u32)]) -> BigRational {
    fn mask(w: u32) -> u64 {
        if w >= 64 {
            u64::MAX
        } else {
            (1 << w) - 1
        }
    }
    fn width_of(e: &Expr, vars: &[(String, u32)]) -> u32 {
        match e {
            Expr::Const { width, .. } => width.unwrap_or(32),
            Expr::Ident { name, .. } => {
                vars.iter().find(|(n, _)| n == name).map(|(_, w)| *w).unwrap_or(1)
            }
            Expr::Unary { operand, .. } => width_of(operand, vars),
            Expr::Binary { op, lhs, rhs, .. } => {
                if op.is_comparison() || op.is_logical() {
                    1
                } else {
                    width_of(lhs, vars).max(width_of(rhs, vars))
                }
            }
            _ => 32,
        }
    }
    fn eval(e: &Expr, env: &BTreeMap<String, u64>, vars: &[(String, u32)]) -> u64 {
        match e {
            Expr::Const { value, .. } => *value,
            Expr::Ident { name, .. } => env[name],
            Expr::Unary { op, operand, .. } => {
                let v = eval(operand, env, vars);
                match op {
                    UnaryOp::Not => (v == 0) as u64,
                    UnaryOp::BitNot => !v & mask(width_of(operand, vars)),
                    UnaryOp::Neg => v.wrapping_neg() & mask(width_of(operand, vars)),
                }
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let w = width_of(e, vars);
                let a = eval(lhs, env, vars);
                let b = eval(rhs, env, vars);
                match op {
                    BinOp::Eq => (a == b) as u64,
                    BinOp::Neq => (a != b) as u64,
                    BinOp::Lt => (a < b) as u64,
                    BinOp::Le => (a <= b) as u64,
                    BinOp::Gt => (a > b) as u64,
                    BinOp::Ge => (a >= b) as u64,
                    BinOp::LogAnd => (a != 0 && b != 0) as u64,
                    BinOp::LogOr => (a != 0 || b != 0) as u64,
                    BinOp::Add => a.wrapping_add(b) & mask(w),
                    BinOp::Xor => (a ^ b) & mask(w),
                    BinOp::And => (a & b) & mask(w),
                    BinOp::Or => (a | b) & mask(w),
                    _ => 0,
                }
            }
            _ => 0,
        }
    }
    let total: u32 = vars.iter().map(|(_, w)| w).sum();
    let mut hits = 0u64;
    for combo in 0..(1u64 << total) {
        let mut env = BTreeMap::new();
        let mut shift = 0;
        for (n, w) in vars {
            env.insert(n.clone(), (combo >> shift) & mask(*w));
            shift += w;
        }
        if eval(cond, &env, vars) != 0 {
            hits += 1;
        }
    }
    BigRational::new(BigInt::from(hits), BigInt::from(2u8).pow(total))
}

#[test]
fn criterion_4_template_fidelity() {
    // Memory templates.
    let (mem, _, _, _) = fixture("mem");
    let cfg = parse_config(rtlsec::harness::corpus::MEM_CFG).unwrap();
    let mem_rendered: Vec<String> = generate_all(&mem, &cfg)
        .unwrap()
        .iter()
        .map(|c| c.rendered.clone())
        .collect();
    assert!(mem_rendered.contains(&"assert((address >= 1024) || sc);".to_string()));
    assert!(mem_rendered.contains(&"assert(address >= 0 && address <= 2**20-1);".to_string()));
    assert!(mem_rendered
        .contains(&"assert property (@(posedge clk) wr |=> (out == 0));".to_string()));

    // AES resource and implant templates.
    let (aes, _, _, _) = fixture("aes");
    let cfg = parse_config(rtlsec::harness::corpus::AES_CFG).unwrap();
    let aes_rendered: Vec<String> = generate_all(&aes, &cfg)
        .unwrap()
        .iter()
        .map(|c| c.rendered.clone())
        .collect();
    assert!(aes_rendered
        .contains(&"assert property (@(posedge clk) (!JTAG) |-> (JTAG_out == 0));".to_string()));
    assert!(aes_rendered.contains(&"assert(out != 32'h7c7c7c7c);".to_string()));

    // Numeric templates.
    let (gng, _, _, _) = fixture("gng");
    let gng_rendered: Vec<String> = generate_all(&gng, &SecurityConfig::default())
        .unwrap()
        .iter()
        .map(|c| c.rendered.clone())
        .collect();
    assert!(gng_rendered.contains(&"assert(mul1[32] != 1);".to_string()));

    // Divide-by-zero template, byte for byte.
    let src = "module m(clk, numerator, divisor, quotient);\n\
               input clk; input [7:0] numerator, divisor;\n\
               output reg [7:0] quotient;\n\
               always @(posedge clk) quotient <= numerator / divisor;\n\
               endmodule";
    let div = compile(src, "div.v", "m").unwrap();
    let div_rendered: Vec<String> = generate_all(&div, &SecurityConfig::default())
        .unwrap()
        .iter()
        .map(|c| c.rendered.clone())
        .collect();
    assert_eq!(div_rendered, vec!["assert(divisor != 0);".to_string()]);
    eprintln!("criterion 4 PASS: all seven class templates byte-match the published forms");
}

#[test]
fn criterion_5_non_interference_and_golden_cleanliness() {
    for name in ["arbiter", "mem", "gng", "aes", "usb_lite"] {
        verify_non_interference(name, SEED).unwrap_or_else(|e| panic!("{name}: {e}"));
        verify_golden_cleanliness(name, SEED).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    eprintln!(
        "criterion 5 PASS: instrumented traces identical and golden designs clean on all fixtures"
    );
}

#[test]
fn criterion_6_detection_experiment() {
    // Arbiter: ten inverted-signal instances, all caught.
    let arbiter = run_experiment("arbiter", SEED).unwrap();
    assert_eq!(arbiter.report.summary.instances, 10);
    assert_eq!(arbiter.report.summary.detected_by_security, 10);

    // Memory: guard-removal, leakage, out-of-range mix; baseline blind.
    let mem = run_experiment("mem", SEED).unwrap();
    assert_eq!(mem.report.summary.instances, 10);
    assert_eq!(mem.report.summary.detected_by_security, 10);
    assert_eq!(mem.report.summary.detected_by_baseline, 0);

    // AES: one bypass plus nine Trojans; baseline blind.
    let aes = run_experiment("aes", SEED).unwrap();
    assert_eq!(aes.report.summary.instances, 10);
    assert_eq!(aes.report.summary.detected_by_security, 10);
    assert_eq!(aes.report.summary.detected_by_baseline, 0);

    // GNG: ten directed runs each trip the sign-conversion check.
    let gng = run_experiment("gng", SEED).unwrap();
    assert_eq!(gng.report.summary.instances, 10);
    for r in &gng.report.instances {
        assert!(
            r.security_fired.iter().any(|id| id.starts_with("num-")),
            "{}: numeric assertion must fire",
            r.instance_id
        );
    }
    assert_eq!(gng.report.summary.detected_by_baseline, 0);

    // USB: the eight family rules collectively detect their targets.
    let usb = run_experiment("usb_lite", SEED).unwrap();
    assert_eq!(usb.report.summary.instances, 10);
    assert_eq!(usb.report.summary.detected_by_security, 10);
    assert!(usb.report.summary.detected_by_baseline <= 1);
    let mut fired_rules = std::collections::BTreeSet::new();
    for r in usb
        .report
        .instances
        .iter()
        .filter(|r| r.operator == "MisassignConstant")
    {
        assert!(
            r.security_fired.iter().any(|id| id.starts_with("res-")),
            "{} must trip a family rule",
            r.instance_id
        );
        for id in &r.security_fired {
            if id.starts_with("res-") {
                fired_rules.insert(id.clone());
            }
        }
    }
    assert_eq!(fired_rules.len(), 8, "all eight family rules participate");

    eprintln!(
        "criterion 6 PASS: arbiter 10/10, mem 10/10 vs 0, aes 10/10 vs 0, gng 10/10 vs 0, usb 10/10 (8 family rules)"
    );
}

#[test]
fn criterion_7_semantics_oracles() {
    // (a) Arbiter extraction equals the 8-case enumeration oracle.
    let (design, _, _, _) = fixture("arbiter");
    let fsm = extract_fsm(&design, None).remove(0);
    let relation = fsm_oracle(&design, "clk", "state", 12).unwrap();
    assert_eq!(relation.len(), 8);
    for (from, inputs, to) in relation {
        assert_eq!(fsm.next_state(from, &inputs), Some(to));
    }

    // (b) Online and offline concurrent verdicts agree on 100 random
    // properties sampled across the fixtures.
    let mut rng = SplitMix64::new(0xbeef);
    let mut total = 0;
    for name in ["arbiter", "mem", "gng", "aes", "usb_lite"] {
        let (design, _, _, _) = fixture(name);
        let cfg = parse_config(rtlsec::harness::corpus::config_text(name).unwrap()).unwrap();
        let vectors =
            random_stimulus(&design, &cfg.clock, 200, rng.next_u64(), &StimulusSpec::reset(2));
        let names: Vec<String> = rtlsec::sim::engine::scalar_signal_names(&design)
            .into_iter()
            .filter(|n| *n != cfg.clock)
            .collect();
        let mut props = Vec::new();
        for i in 0..20 {
            let lit = |rng: &mut SplitMix64| {
                let n = &names[rng.next_below(names.len() as u64) as usize];
                let w = design.signal(n).map(|s| s.ty.width).unwrap_or(1);
                Expr::binary(
                    BinOp::Eq,
                    Expr::ident(n),
                    Expr::number(rng.next_bits(w.min(8))),
                )
            };
            let ant = (rng.next_bits(1) == 1).then(|| lit(&mut rng));
            props.push((
                format!("rnd-{i}"),
                ConcurrentProperty {
                    antecedent: ant,
                    consequent: lit(&mut rng),
                    next_cycle: rng.next_bits(1) == 1,
                },
            ));
        }
        let bound: Vec<BoundAssertion> = props
            .iter()
            .map(|(id, p)| BoundAssertion::Concurrent {
                id: id.clone(),
                scope: String::new(),
                property: p.clone(),
            })
            .collect();
        let (trace, online) = run(&design, &cfg.clock, &vectors, &bound).unwrap();
        for (id, p) in &props {
            let off = eval_concurrent(&design, "", id, p, &trace);
            let on = online.iter().find(|v| &v.id == id).unwrap();
            assert_eq!(on.attempts, off.attempts, "{name}/{id}");
            assert_eq!(on.first_fail_cycle, off.first_fail_cycle, "{name}/{id}");
            total += 1;
        }
    }
    assert_eq!(total, 100);

    // (c) Identical seeds reproduce byte-identical reports.
    for name in ["arbiter", "mem", "gng", "aes", "usb_lite"] {
        let a = report_tsv(&run_experiment(name, SEED).unwrap().report);
        let b = report_tsv(&run_experiment(name, SEED).unwrap().report);
        assert_eq!(a, b, "{name} report determinism");
    }
    eprintln!(
        "criterion 7 PASS: extraction matches the oracle, online equals offline on 100 properties, reports reproduce byte-identically"
    );
}

#[test]
fn criterion_8_runs_standalone() {
    // The suite reaches this point using only the embedded corpus: no
    // network, no external tools. The memory-fixture coverage row is
    // re-checked as the final gate.
    let (mem, _, _, _) = fixture("mem");
    let cfg = parse_config(rtlsec::harness::corpus::MEM_CFG).unwrap();
    let classes: Vec<VulnClass> = {
        let mut cs: Vec<VulnClass> = generate_all(&mem, &cfg)
            .unwrap()
            .iter()
            .map(|c| c.vuln_class)
            .collect();
        cs.dedup();
        cs
    };
    assert_eq!(
        classes,
        vec![
            VulnClass::PermissionsPrivileges,
            VulnClass::BufferIssues,
            VulnClass::InformationLeakage
        ]
    );
    eprintln!("criterion 8 PASS: suite runs standalone from the embedded corpus");
}
