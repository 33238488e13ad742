//! Report emission: per-fixture TSV and markdown, plus the consolidated
//! class-by-benchmark matrix and detection-count tables.

use std::collections::BTreeMap;

use crate::assertgen::VulnClass;

use super::experiment::{DetectionReport, DetectionSummary, InstanceRecord};

/// Machine-readable report: typed rows, tab-separated.
pub fn report_tsv(report: &DetectionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("meta\tbenchmark\t{}\n", report.benchmark));
    out.push_str(&format!("meta\tseed\t{}\n", report.seed));
    out.push_str(&format!("meta\tcandidates\t{}\n", report.candidate_count));
    out.push_str(&format!("meta\trules\t{}\n", report.rule_count));
    for class in &report.classes {
        out.push_str(&format!("class\t{}\n", class.slug()));
    }
    for r in &report.instances {
        out.push_str(&format!(
            "instance\t{}\t{}\t{}\t{}\t{}\n",
            r.instance_id,
            r.operator,
            r.intended_class.slug(),
            r.security_fired.join(","),
            r.baseline_fired.join(","),
        ));
    }
    out.push_str(&format!(
        "summary\t{}\t{}\t{}\n",
        report.summary.instances,
        report.summary.detected_by_security,
        report.summary.detected_by_baseline
    ));
    out
}

/// Parses a TSV report back (used by the consolidation command).
pub fn parse_report_tsv(text: &str) -> Option<DetectionReport> {
    let mut benchmark = String::new();
    let mut seed = 0u64;
    let mut candidate_count = 0;
    let mut rule_count = 0;
    let mut classes = Vec::new();
    let mut instances = Vec::new();
    let mut summary = None;
    for line in text.lines() {
        let cells: Vec<&str> = line.split('\t').collect();
        match cells.as_slice() {
            ["meta", "benchmark", v] => benchmark = v.to_string(),
            ["meta", "seed", v] => seed = v.parse().ok()?,
            ["meta", "candidates", v] => candidate_count = v.parse().ok()?,
            ["meta", "rules", v] => rule_count = v.parse().ok()?,
            ["class", slug] => classes.push(VulnClass::from_slug(slug)?),
            ["instance", id, op, class, sec, base] => instances.push(InstanceRecord {
                instance_id: id.to_string(),
                operator: op.to_string(),
                intended_class: VulnClass::from_slug(class)?,
                security_fired: split_ids(sec),
                baseline_fired: split_ids(base),
            }),
            ["summary", i, s, b] => {
                summary = Some(DetectionSummary {
                    instances: i.parse().ok()?,
                    detected_by_security: s.parse().ok()?,
                    detected_by_baseline: b.parse().ok()?,
                })
            }
            _ => return None,
        }
    }
    Some(DetectionReport {
        benchmark,
        seed,
        classes,
        candidate_count,
        rule_count,
        instances,
        summary: summary?,
    })
}

fn split_ids(s: &str) -> Vec<String> {
    s.split(',')
        .map(|x| x.trim().to_string())
        .filter(|x| !x.is_empty())
        .collect()
}

/// Human-readable per-fixture report.
pub fn report_markdown(report: &DetectionReport) -> String {
    let mut out = format!("# {} detection report\n\n", report.benchmark);
    out.push_str(&format!(
        "Seed {}, {} security candidates, {} mined baseline rules.\n\n",
        report.seed, report.candidate_count, report.rule_count
    ));
    out.push_str("Explored classes: ");
    let names: Vec<&str> = report.classes.iter().map(|c| c.title()).collect();
    out.push_str(&names.join(", "));
    out.push_str("\n\n| instance | operator | intended class | security | baseline |\n");
    out.push_str("|---|---|---|---|---|\n");
    for r in &report.instances {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            r.instance_id,
            r.operator,
            r.intended_class.title(),
            if r.security_fired.is_empty() {
                "-".to_string()
            } else {
                r.security_fired.join(", ")
            },
            if r.baseline_fired.is_empty() {
                "-".to_string()
            } else {
                r.baseline_fired.join(", ")
            },
        ));
    }
    out.push_str(&format!(
        "\n{} instances: {} detected by security assertions, {} by the mined baseline.\n",
        report.summary.instances,
        report.summary.detected_by_security,
        report.summary.detected_by_baseline
    ));
    out
}

/// Consolidated tables over several reports: the class-by-benchmark
/// checkmark matrix and per-benchmark detection counts, in markdown
/// with tab-separated twins.
pub fn consolidate(reports: &[DetectionReport]) -> String {
    let by_name: BTreeMap<&str, &DetectionReport> = reports
        .iter()
        .map(|r| (r.benchmark.as_str(), r))
        .collect();
    let order: Vec<&str> = reports.iter().map(|r| r.benchmark.as_str()).collect();

    let mut out = String::from("# Vulnerability classes by benchmark\n\n");
    out.push_str("| Vulnerability |");
    for name in &order {
        out.push_str(&format!(" {name} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(order.len()));
    out.push('\n');
    for class in VulnClass::ALL {
        out.push_str(&format!("| {} |", class.title()));
        for name in &order {
            let has = by_name[name].classes.contains(&class);
            out.push_str(if has { " x |" } else { "   |" });
        }
        out.push('\n');
    }

    out.push_str("\n# Detected instances\n\n");
    out.push_str("| benchmark | instances | security | baseline |\n|---|---|---|---|\n");
    for name in &order {
        let s = &by_name[name].summary;
        out.push_str(&format!(
            "| {name} | {} | {} | {} |\n",
            s.instances, s.detected_by_security, s.detected_by_baseline
        ));
    }

    out.push_str("\n## Tab-separated\n\nclass");
    for name in &order {
        out.push_str(&format!("\t{name}"));
    }
    out.push('\n');
    for class in VulnClass::ALL {
        out.push_str(class.slug());
        for name in &order {
            let has = by_name[name].classes.contains(&class);
            out.push_str(if has { "\tx" } else { "\t" });
        }
        out.push('\n');
    }
    out.push_str("\nbenchmark\tinstances\tsecurity\tbaseline\n");
    for name in &order {
        let s = &by_name[name].summary;
        out.push_str(&format!(
            "{name}\t{}\t{}\t{}\n",
            s.instances, s.detected_by_security, s.detected_by_baseline
        ));
    }
    out
}

/// Minimal line-based unified diff for instance bundles.
pub fn unified_diff(golden: &str, mutant: &str, golden_label: &str, mutant_label: &str) -> String {
    let a: Vec<&str> = golden.lines().collect();
    let b: Vec<&str> = mutant.lines().collect();
    // LCS table; fixture sources are small.
    let mut lcs = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut out = format!("--- {golden_label}\n+++ {mutant_label}\n");
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            out.push_str(&format!(" {}\n", a[i]));
            i += 1;
            j += 1;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            out.push_str(&format!("-{}\n", a[i]));
            i += 1;
        } else {
            out.push_str(&format!("+{}\n", b[j]));
            j += 1;
        }
    }
    while i < a.len() {
        out.push_str(&format!("-{}\n", a[i]));
        i += 1;
    }
    while j < b.len() {
        out.push_str(&format!("+{}\n", b[j]));
        j += 1;
    }
    out
}
