//! Mutation engine tests: site enumeration snapshots, operator edits,
//! campaign reproducibility, validity, and locality.

use rtlsec::frontend::compile;
use rtlsec::harness::corpus;
use rtlsec::mutate::{
    apply, campaign, campaign_with, list_sites, CampaignSpec, MutationOperator, MutationParams,
    MutationSpec, OperatorDraw, ParamPool, SiteFilter, SiteKind,
};
use rtlsec::sim::load_vectors;

fn fixture(name: &str) -> (rtlsec::ElaboratedDesign, &'static str, &'static str, &'static str) {
    let (text, origin, top) = corpus::golden_source(name).unwrap();
    (compile(text, origin, top).unwrap(), text, origin, top)
}

#[test]
fn arbiter_has_nine_signal_use_sites() {
    let (design, text, _, _) = fixture("arbiter");
    let sites = list_sites(&design, MutationOperator::InvertSignal);
    assert_eq!(sites.len(), 9);
    // Every site's span slices back to the signal it names.
    for s in &sites {
        let slice = s.span.slice(text).unwrap();
        assert!(s.description.contains(slice), "{} vs {slice}", s.description);
    }
}

#[test]
fn trojan_sites_match_the_capped_rare_condition_set() {
    let (design, _, _, _) = fixture("aes");
    let sites = list_sites(&design, MutationOperator::InsertTrojan);
    assert_eq!(sites.len(), 10);
    assert!(sites
        .iter()
        .all(|s| matches!(s.kind, SiteKind::RareCondition { .. })));
    assert!(sites[0].description.contains("out == 32'h63636363"));
}

#[test]
fn empty_module_has_no_sites_for_any_operator() {
    let design = compile("module m(); endmodule", "t.v", "m").unwrap();
    for op in MutationOperator::ALL {
        assert!(list_sites(&design, op).is_empty(), "{}", op.name());
    }
}

#[test]
fn remove_guard_drops_the_privilege_disjunct() {
    let (design, text, origin, top) = fixture("mem");
    let sites = list_sites(&design, MutationOperator::RemoveGuard);
    // Three sites: two operands of the disjunction plus the whole guard.
    assert_eq!(sites.len(), 3);
    let sc_site = sites
        .iter()
        .find(|s| s.span.slice(text) == Some("sc"))
        .unwrap();
    let instance = apply(
        text,
        origin,
        top,
        &MutationSpec {
            operator: MutationOperator::RemoveGuard,
            site: sc_site.clone(),
            parameters: MutationParams::None,
            seed: 0,
        },
    )
    .unwrap();
    assert!(instance.mutated_source.contains("if (address >= 1024)"));
    assert!(!instance.mutated_source.contains("|| sc"));
}

#[test]
fn whole_guard_removal_unconditionally_exposes_the_body() {
    let (design, text, origin, top) = fixture("mem");
    let sites = list_sites(&design, MutationOperator::RemoveGuard);
    let whole = sites
        .iter()
        .find(|s| s.description == "remove whole guard")
        .unwrap();
    let instance = apply(
        text,
        origin,
        top,
        &MutationSpec {
            operator: MutationOperator::RemoveGuard,
            site: whole.clone(),
            parameters: MutationParams::None,
            seed: 0,
        },
    )
    .unwrap();
    assert!(!instance.mutated_source.contains("address >= 1024 ||"));
    assert!(instance.mutated_source.contains("mem[address] <= in;"));
}

#[test]
fn bypass_check_forces_the_jtag_guard_true() {
    let (design, text, origin, top) = fixture("aes");
    let sites = list_sites(&design, MutationOperator::BypassCheck);
    let jtag = sites
        .iter()
        .find(|s| s.span.slice(text) == Some("JTAG"))
        .unwrap();
    let instance = apply(
        text,
        origin,
        top,
        &MutationSpec {
            operator: MutationOperator::BypassCheck,
            site: jtag.clone(),
            parameters: MutationParams::None,
            seed: 0,
        },
    )
    .unwrap();
    assert!(instance.mutated_source.contains("if (1'b1)"));
}

#[test]
fn invert_signal_textual_diff_matches_the_expected_edit() {
    let (design, text, origin, top) = fixture("arbiter");
    let sites = list_sites(&design, MutationOperator::InvertSignal);
    // The req2 use inside `gnt2 = req2 & ~req1;` is the 8th site
    // (source order); find it structurally to stay robust.
    let site = sites
        .iter()
        .filter(|s| s.description.contains("`req2`"))
        .nth(2)
        .unwrap();
    let instance = apply(
        text,
        origin,
        top,
        &MutationSpec {
            operator: MutationOperator::InvertSignal,
            site: site.clone(),
            parameters: MutationParams::None,
            seed: 0,
        },
    )
    .unwrap();
    assert!(instance.mutated_source.contains("gnt2 = ~req2 & ~req1;"));
}

#[test]
fn misassign_constant_swaps_pid_family() {
    let (design, text, origin, top) = fixture("usb_lite");
    let sites = list_sites(&design, MutationOperator::MisassignConstant);
    let out_pid = sites
        .iter()
        .find(|s| matches!(s.kind, SiteKind::CaseConstant { current: 0xe1, .. }))
        .unwrap();
    let instance = apply(
        text,
        origin,
        top,
        &MutationSpec {
            operator: MutationOperator::MisassignConstant,
            site: out_pid.clone(),
            parameters: MutationParams::ReplaceConstant(0xc3),
            seed: 0,
        },
    )
    .unwrap();
    // The OUT slot now emits DATA0's byte instead of its own.
    assert!(!instance.mutated_source.contains("8'he1"));
    let golden_c3 = text.matches("tx_data <= 8'hc3;").count();
    let mutant_c3 = instance.mutated_source.matches("tx_data <= 8'hc3;").count();
    assert_eq!(mutant_c3, golden_c3 + 1);
}

#[test]
fn trojan_insertion_adds_a_guarded_corruption_block() {
    let (design, text, origin, top) = fixture("aes");
    let sites = list_sites(&design, MutationOperator::InsertTrojan);
    let site = sites
        .iter()
        .find(|s| s.description.contains("7c7c7c7c"))
        .unwrap();
    let instance = apply(
        text,
        origin,
        top,
        &MutationSpec {
            operator: MutationOperator::InsertTrojan,
            site: site.clone(),
            parameters: MutationParams::TrojanPayload { xor_mask: 0xdeadbeef },
            seed: 0,
        },
    )
    .unwrap();
    assert!(instance
        .mutated_source
        .contains("if (out == 32'h7c7c7c7c)"));
    assert!(instance
        .mutated_source
        .contains("JTAG_out <= JTAG_out ^ 32'hdeadbeef;"));
    compile(&instance.mutated_source, origin, top).unwrap();
}

#[test]
fn leak_wire_forwards_a_fixed_location_on_writes() {
    let (design, text, origin, top) = fixture("mem");
    let sites = list_sites(&design, MutationOperator::LeakWire);
    assert_eq!(sites.len(), 1);
    let instance = apply(
        text,
        origin,
        top,
        &MutationSpec {
            operator: MutationOperator::LeakWire,
            site: sites[0].clone(),
            parameters: MutationParams::LeakAddress(2048),
            seed: 0,
        },
    )
    .unwrap();
    assert!(instance.mutated_source.contains("out <= mem[2048];"));
    compile(&instance.mutated_source, origin, top).unwrap();
}

#[test]
fn arbiter_campaign_is_reproducible_and_valid() {
    let (_, text, origin, top) = fixture("arbiter");
    let a = campaign(text, origin, top, "clk", "arb", &[MutationOperator::InvertSignal], 10, 1)
        .unwrap();
    let b = campaign(text, origin, top, "clk", "arb", &[MutationOperator::InvertSignal], 10, 1)
        .unwrap();
    assert_eq!(a.len(), 10);
    let srcs: Vec<&str> = a.iter().map(|i| i.mutated_source.as_str()).collect();
    let srcs_b: Vec<&str> = b.iter().map(|i| i.mutated_source.as_str()).collect();
    assert_eq!(srcs, srcs_b, "same seed reproduces byte-identically");
    let c = campaign(text, origin, top, "clk", "arb", &[MutationOperator::InvertSignal], 10, 2)
        .unwrap();
    let srcs_c: Vec<&str> = c.iter().map(|i| i.mutated_source.as_str()).collect();
    assert_ne!(srcs, srcs_c, "different seed draws differently");
    for inst in &a {
        compile(&inst.mutated_source, origin, top).unwrap();
        assert_eq!(inst.intended_class, rtlsec::assertgen::VulnClass::IllegalStatesTransitions);
    }
    // Ten draws over nine sites: at least nine distinct mutants.
    let mut uniq: Vec<&str> = srcs.clone();
    uniq.sort();
    uniq.dedup();
    assert!(uniq.len() >= 9);
}

#[test]
fn zero_quota_campaign_is_empty() {
    let (_, text, origin, top) = fixture("arbiter");
    let out = campaign(text, origin, top, "clk", "arb", &[MutationOperator::InvertSignal], 0, 1)
        .unwrap();
    assert!(out.is_empty());
}

#[test]
fn aes_campaign_mixes_one_bypass_and_nine_trojans() {
    let (_, text, origin, top) = fixture("aes");
    // Witness needs the triggers driven: two cycles per table key.
    let mut rows = String::from("signals: JTAG,in\n");
    for k in 0..16u64 {
        let word = k | (k << 8) | (k << 16) | (k << 24);
        rows.push_str(&format!("0,{word}\n0,{word}\n"));
    }
    let directed = load_vectors(&rows, "aes_triggers").unwrap();
    let spec = CampaignSpec {
        draws: vec![
            OperatorDraw {
                operator: MutationOperator::BypassCheck,
                quota: 1,
                filter: SiteFilter::SpanSlice("JTAG".to_string()),
                params: ParamPool::None,
            },
            OperatorDraw {
                operator: MutationOperator::InsertTrojan,
                quota: 9,
                filter: SiteFilter::All,
                params: ParamPool::TrojanMask(0xdeadbeef),
            },
        ],
        witness_directed: vec![directed],
        ..CampaignSpec::new(Vec::new())
    };
    let instances = campaign_with(text, origin, top, "clk", "aes", &spec, 1).unwrap();
    assert_eq!(instances.len(), 10);
    let bypass = instances
        .iter()
        .filter(|i| i.spec.operator == MutationOperator::BypassCheck)
        .count();
    let trojans = instances
        .iter()
        .filter(|i| i.spec.operator == MutationOperator::InsertTrojan)
        .count();
    assert_eq!((bypass, trojans), (1, 9));
    // Nine distinct triggers drawn without replacement.
    let mut triggers: Vec<&str> = instances
        .iter()
        .filter_map(|i| match &i.spec.site.kind {
            SiteKind::RareCondition { text, .. } => Some(text.as_str()),
            _ => None,
        })
        .collect();
    triggers.sort();
    triggers.dedup();
    assert_eq!(triggers.len(), 9);
}

#[test]
fn mutants_differ_from_golden_in_one_statement_except_insertions() {
    let (_, text, origin, top) = fixture("arbiter");
    let golden_render =
        rtlsec::frontend::render_source(&rtlsec::frontend::parse_source(text, origin).unwrap());
    let instances =
        campaign(text, origin, top, "clk", "arb", &[MutationOperator::InvertSignal], 9, 3)
            .unwrap();
    for inst in &instances {
        let golden_lines: Vec<&str> = golden_render.lines().collect();
        let mutant_lines: Vec<&str> = inst.mutated_source.lines().collect();
        assert_eq!(golden_lines.len(), mutant_lines.len());
        let changed = golden_lines
            .iter()
            .zip(&mutant_lines)
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, 1, "{}", inst.instance_id);
    }
}
