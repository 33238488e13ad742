//! Generator tests: byte-exact template fidelity, per-fixture candidate
//! sets, determinism, and instrumentation round trips.

use rtlsec::assertgen::{
    generate_all, instrument, parse_config, sidecar_report, SecurityConfig, VulnClass,
};
use rtlsec::frontend::{compile, parse_source, render_source};
use rtlsec::harness::corpus;

fn fixture(name: &str) -> (rtlsec::ElaboratedDesign, SecurityConfig, &'static str, &'static str) {
    let (text, origin, top) = corpus::golden_source(name).unwrap();
    let design = compile(text, origin, top).unwrap();
    let cfg = parse_config(corpus::config_text(name).unwrap()).unwrap();
    cfg.validate(&design).unwrap();
    (design, cfg, text, origin)
}

fn rendered_of(design: &rtlsec::ElaboratedDesign, cfg: &SecurityConfig) -> Vec<String> {
    generate_all(design, cfg)
        .unwrap()
        .iter()
        .map(|c| c.rendered.clone())
        .collect()
}

#[test]
fn mem_candidates_are_exactly_the_five_expected() {
    let (design, cfg, _, _) = fixture("mem");
    let candidates = generate_all(&design, &cfg).unwrap();
    let summary: Vec<(&str, &str)> = candidates
        .iter()
        .map(|c| (c.vuln_class.slug(), c.rendered.as_str()))
        .collect();
    assert_eq!(
        summary,
        vec![
            ("priv", "assert((address >= 1024) || sc);"),
            ("priv", "assert((address >= 1024) || sc);"),
            ("buf", "assert(address >= 0 && address <= 2**20-1);"),
            ("buf", "assert(address >= 0 && address <= 2**20-1);"),
            ("leak", "assert property (@(posedge clk) wr |=> (out == 0));"),
        ]
    );
    // The strict-bound twin rides along on buffer candidates.
    let alts: Vec<&str> = candidates
        .iter()
        .filter_map(|c| c.alt_rendered.as_deref())
        .collect();
    assert_eq!(
        alts,
        vec!["assert(address < 2**20);", "assert(address < 2**20);"]
    );
    // Coverage: exactly the three classes the memory explores.
    let mut classes: Vec<VulnClass> = candidates.iter().map(|c| c.vuln_class).collect();
    classes.dedup();
    assert_eq!(
        classes,
        vec![
            VulnClass::PermissionsPrivileges,
            VulnClass::BufferIssues,
            VulnClass::InformationLeakage
        ]
    );
}

#[test]
fn aes_resource_template_matches_the_case_study() {
    let (design, cfg, _, _) = fixture("aes");
    let rendered = rendered_of(&design, &cfg);
    assert!(rendered
        .contains(&"assert property (@(posedge clk) (!JTAG) |-> (JTAG_out == 0));".to_string()));
}

#[test]
fn aes_implants_are_capped_at_ten_lowest_probability_first() {
    let (design, cfg, _, _) = fixture("aes");
    let candidates = generate_all(&design, &cfg).unwrap();
    let implants: Vec<&str> = candidates
        .iter()
        .filter(|c| c.vuln_class == VulnClass::MaliciousImplants)
        .map(|c| c.rendered.as_str())
        .collect();
    assert_eq!(implants.len(), 10);
    assert_eq!(implants[0], "assert(out != 32'h63636363);");
    assert!(implants.contains(&"assert(out != 32'h7c7c7c7c);"));
    // One resource rule + ten implants in total.
    assert_eq!(candidates.len(), 11);
}

#[test]
fn gng_numeric_templates_match() {
    let (design, cfg, _, _) = fixture("gng");
    let candidates = generate_all(&design, &cfg).unwrap();
    let rendered: Vec<&str> = candidates.iter().map(|c| c.rendered.as_str()).collect();
    assert_eq!(
        rendered,
        vec!["assert(mul1[32] != 1);", "assert(sum2[18] != 1);"]
    );
    assert!(candidates
        .iter()
        .all(|c| c.vuln_class == VulnClass::NumericExceptions));
}

#[test]
fn divisor_template_is_byte_exact() {
    let src = "module m(clk, numerator, divisor, quotient);\n\
               input clk; input [7:0] numerator, divisor;\n\
               output reg [7:0] quotient;\n\
               always @(posedge clk) quotient <= numerator / divisor;\n\
               endmodule";
    let design = compile(src, "div.v", "m").unwrap();
    let cfg = SecurityConfig::default();
    let rendered = rendered_of(&design, &cfg);
    assert_eq!(rendered, vec!["assert(divisor != 0);"]);
}

#[test]
fn arbiter_fsm_candidates_cover_transitions_and_outputs() {
    let (design, cfg, _, _) = fixture("arbiter");
    let candidates = generate_all(&design, &cfg).unwrap();
    let rendered: Vec<&str> = candidates.iter().map(|c| c.rendered.as_str()).collect();
    assert_eq!(
        rendered,
        vec![
            "assert property (@(posedge clk) (state == 0 && !req1) |=> (state == 0));",
            "assert property (@(posedge clk) (state == 0 && req1) |=> (state == 1));",
            "assert property (@(posedge clk) (state == 1 && !(req1 && !req2)) |=> (state == 0));",
            "assert property (@(posedge clk) (state == 1 && req1 && !req2) |=> (state == 1));",
            "assert property (@(posedge clk) (state == 0) |-> (gnt1 == req1));",
            "assert property (@(posedge clk) (state == 1) |-> (gnt1 == (req1 && !req2)));",
            "assert property (@(posedge clk) (state == 0) |-> (gnt2 == (req2 && !req1)));",
            "assert property (@(posedge clk) (state == 1) |-> (gnt2 == req2));",
        ]
    );
    assert!(candidates.len() <= cfg.caps.illegal);
}

#[test]
fn usb_candidates_cap_fsm_and_keep_all_eight_resource_rules() {
    let (design, cfg, _, _) = fixture("usb_lite");
    let candidates = generate_all(&design, &cfg).unwrap();
    let resource: Vec<&str> = candidates
        .iter()
        .filter(|c| c.vuln_class == VulnClass::ResourceManagement)
        .map(|c| c.rendered.as_str())
        .collect();
    assert_eq!(resource.len(), 8);
    assert_eq!(
        resource[0],
        "assert property (@(posedge clk) (sel_type == 2'd0) |=> (tx_data != 8'hc3));"
    );
    let fsm_count = candidates
        .iter()
        .filter(|c| c.vuln_class == VulnClass::IllegalStatesTransitions)
        .count();
    assert_eq!(fsm_count, 10, "five transitions, three outputs, two pairs");
}

#[test]
fn empty_config_yields_only_config_independent_classes() {
    let (design, _, _, _) = fixture("mem");
    let cfg = SecurityConfig::default();
    let candidates = generate_all(&design, &cfg).unwrap();
    // Only buffer checks remain; privilege/resource/leakage need config.
    assert!(candidates
        .iter()
        .all(|c| c.vuln_class == VulnClass::BufferIssues));
    assert_eq!(candidates.len(), 2);
}

#[test]
fn leakage_tags_produce_shadow_checks() {
    let (design, _, _, _) = fixture("mem");
    let cfg = SecurityConfig {
        secure_seeds: vec!["mem".to_string()],
        ..SecurityConfig::default()
    };
    let candidates = generate_all(&design, &cfg).unwrap();
    let leak: Vec<_> = candidates
        .iter()
        .filter(|c| c.vuln_class == VulnClass::InformationLeakage)
        .collect();
    assert_eq!(leak.len(), 1);
    assert_eq!(leak[0].rendered, "assert(out_t == 1'b1);");
    let shadow = leak[0].shadow.as_ref().unwrap();
    assert_eq!(shadow.dest, "out");
    assert_eq!(shadow.sources, vec!["mem".to_string()]);
}

#[test]
fn declassified_destinations_are_skipped() {
    let (design, _, _, _) = fixture("mem");
    let cfg = SecurityConfig {
        secure_seeds: vec!["mem".to_string()],
        declassify: vec!["out".to_string()],
        ..SecurityConfig::default()
    };
    let candidates = generate_all(&design, &cfg).unwrap();
    assert!(!candidates
        .iter()
        .any(|c| c.vuln_class == VulnClass::InformationLeakage));
}

#[test]
fn generation_is_deterministic() {
    for name in corpus::FIXTURE_NAMES {
        let (design, cfg, _, _) = fixture(name);
        let a = generate_all(&design, &cfg).unwrap();
        let b = generate_all(&design, &cfg).unwrap();
        let fmt = |v: &[rtlsec::assertgen::AssertionCandidate]| -> Vec<String> {
            v.iter().map(|c| format!("{}|{}", c.id, c.rendered)).collect()
        };
        assert_eq!(fmt(&a), fmt(&b), "{name}");
        // Ids are unique.
        let mut ids: Vec<&str> = a.iter().map(|c| c.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), a.len(), "{name}");
    }
}

#[test]
fn sidecar_report_lists_every_candidate() {
    let (design, cfg, _, _) = fixture("mem");
    let candidates = generate_all(&design, &cfg).unwrap();
    let report = sidecar_report(&candidates);
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "id\tclass\tkind\tfile\tline\trendered");
    assert_eq!(lines.len(), candidates.len() + 1);
    assert!(lines[1].starts_with("priv-0\tpriv\timmediate\tmem/golden.v\t"));
}

// ----------------------------------------------------------------------
// Instrumentation
// ----------------------------------------------------------------------

#[test]
fn zero_candidates_instruments_to_the_canonical_render() {
    let (_, _, text, origin) = fixture("mem");
    let out = instrument(text, origin, &[]).unwrap();
    let canonical = render_source(&parse_source(text, origin).unwrap());
    assert_eq!(out, canonical);
}

#[test]
fn mem_instrumentation_embeds_all_five_candidates() {
    let (design, cfg, text, origin) = fixture("mem");
    let candidates = generate_all(&design, &cfg).unwrap();
    let out = instrument(text, origin, &candidates).unwrap();
    // Both privilege asserts inside the clocked block, template-exact.
    assert_eq!(out.matches("assert((address >= 1024) || sc);").count(), 2);
    assert_eq!(
        out.matches("assert(address >= 0 && address <= 2**20-1);").count(),
        2
    );
    assert_eq!(out.matches("assert(address < 2**20);").count(), 2);
    assert!(out.contains("assert property (@(posedge clk) wr |=> (out == 0));"));
    // The result re-parses and re-elaborates cleanly.
    let modules = parse_source(&out, origin).unwrap();
    rtlsec::frontend::elaborate::elaborate(modules, "mem").unwrap();
}

#[test]
fn arbiter_instrumentation_places_properties_before_endmodule() {
    let (design, cfg, text, origin) = fixture("arbiter");
    let candidates = generate_all(&design, &cfg).unwrap();
    let out = instrument(text, origin, &candidates).unwrap();
    let endmodule = out.rfind("endmodule").unwrap();
    for c in &candidates {
        let pos = out.find(&c.rendered).unwrap_or_else(|| {
            panic!("missing template: {}", c.rendered);
        });
        assert!(pos < endmodule);
    }
    parse_source(&out, origin).unwrap();
}

#[test]
fn shadow_instrumentation_declares_and_updates_tags() {
    let (design, _, text, origin) = fixture("mem");
    let cfg = SecurityConfig {
        secure_seeds: vec!["mem".to_string()],
        ..SecurityConfig::default()
    };
    let candidates = generate_all(&design, &cfg).unwrap();
    let out = instrument(text, origin, &candidates).unwrap();
    assert!(out.contains("reg out_t = 1'b1;"));
    assert!(out.contains("reg mem_t = 1'b1;"));
    assert!(out.contains("assert(out_t == 1'b1);"));
    assert!(out.contains("out_t <= mem_t;"));
    let modules = parse_source(&out, origin).unwrap();
    rtlsec::frontend::elaborate::elaborate(modules, "mem").unwrap();
}

#[test]
fn single_statement_bodies_gain_begin_end() {
    let (design, cfg, text, origin) = fixture("gng");
    let candidates = generate_all(&design, &cfg).unwrap();
    let out = instrument(text, origin, &candidates).unwrap();
    // The sum2 always block had a single statement; the inserted check
    // forces a begin/end wrapper.
    assert!(out.contains("begin\n            assert(mul1[32] != 1);\n            sum2 <="));
    parse_source(&out, origin).unwrap();
}

#[test]
fn stale_candidates_are_rejected() {
    let (design, cfg, _, origin) = fixture("mem");
    let candidates = generate_all(&design, &cfg).unwrap();
    // Instrument a different source: the target paths no longer exist.
    let other = "module mem(clk); input clk; endmodule";
    match instrument(other, origin, &candidates) {
        Err(rtlsec::assertgen::AssertgenError::SpanStale { .. }) => {}
        other => panic!("expected SpanStale, got {other:?}"),
    }
}

#[test]
fn mutant_regeneration_keeps_privilege_candidates() {
    // Dropping the guard does not change what the generator emits:
    // generation reads the config, not the guard.
    let (_, cfg, text, origin) = fixture("mem");
    let mutant = text.replace("if (address >= 1024 || sc) begin", "begin");
    assert_ne!(mutant, text);
    let design = compile(&mutant, origin, "mem").unwrap();
    let candidates = generate_all(&design, &cfg).unwrap();
    let priv_count = candidates
        .iter()
        .filter(|c| c.vuln_class == VulnClass::PermissionsPrivileges)
        .count();
    assert_eq!(priv_count, 2);
}

