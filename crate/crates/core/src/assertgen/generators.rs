//! The seven per-class assertion generators. Template texts follow the
//! case-study forms exactly; candidates are deterministic in id, order,
//! and rendering for identical (design, config) inputs.

use crate::analysis::{
    find_buffer_accesses, find_numeric_hazards, find_rare_conditions, propagate_tags,
    AccessKind, BufferAccess, FsmModel, HazardKind, NumericHazard, RareCondition, RareKind,
    TagMap,
};
use crate::frontend::ast::*;
use crate::frontend::elaborate::ElaboratedDesign;
use crate::frontend::render::render_expr;
use crate::span::SourceSpan;

use super::candidate::{
    AssertionCandidate, CandidateKind, CandidateLocation, ShadowSpec, VulnClass,
};
use super::config::{ConditionRule, SecurityConfig};
use super::Result;

fn ids(class: VulnClass) -> impl FnMut() -> String {
    let mut n = 0usize;
    move || {
        let id = format!("{}-{n}", class.slug());
        n += 1;
        id
    }
}

/// Antecedents render bare when they are a lone identifier and
/// parenthesized otherwise, matching the case-study texts.
fn antecedent_text(text: &str, expr: &Expr) -> String {
    match expr {
        Expr::Ident { .. } => text.to_string(),
        _ => format!("({text})"),
    }
}

fn concurrent_text(clock: &str, ant: &str, arrow: &str, cons: &str) -> String {
    format!("assert property (@(posedge {clock}) {ant} {arrow} {cons});")
}

fn span_of_stmt(design: &ElaboratedDesign, module: &str, at: &StmtPath) -> SourceSpan {
    let info = &design.modules[module];
    let item = &info.ast.items[at.item];
    let mut span = item.span().clone();
    if let ModuleItem::Always(a) = item {
        let mut stmt = &a.body;
        for idx in &at.path {
            let next = match stmt {
                Stmt::Block { stmts, .. } => stmts.get(*idx),
                Stmt::If {
                    then_stmt,
                    else_stmt,
                    ..
                } => match idx {
                    0 => Some(then_stmt.as_ref()),
                    _ => else_stmt.as_deref(),
                },
                Stmt::Case { items, default, .. } => {
                    if *idx < items.len() {
                        Some(&items[*idx].body)
                    } else {
                        default.as_deref()
                    }
                }
                _ => None,
            };
            match next {
                Some(s) => stmt = s,
                None => return span,
            }
        }
        span = stmt.span().clone();
    }
    span
}

// ----------------------------------------------------------------------
// Permissions and privileges
// ----------------------------------------------------------------------

/// One immediate candidate per access to the protected region:
/// `assert((<target> >= <bound>) || <priv>);` before the access.
pub fn gen_privilege(
    design: &ElaboratedDesign,
    cfg: &SecurityConfig,
) -> Result<Vec<AssertionCandidate>> {
    let Some(rule) = &cfg.privilege else {
        return Ok(Vec::new());
    };
    let mut next_id = ids(VulnClass::PermissionsPrivileges);
    let mut out = Vec::new();
    for access in find_buffer_accesses(design) {
        let reads_target = access
            .index_expr
            .referenced_idents()
            .contains(&rule.target);
        if !reads_target {
            continue;
        }
        let cond = Expr::binary(
            BinOp::LogOr,
            Expr::binary(
                BinOp::Ge,
                Expr::ident(&rule.target),
                Expr::number(rule.below),
            ),
            Expr::ident(&rule.priv_signal),
        );
        let rendered = format!(
            "assert(({} >= {}) || {});",
            rule.target, rule.below, rule.priv_signal
        );
        out.push(AssertionCandidate {
            id: next_id(),
            vuln_class: VulnClass::PermissionsPrivileges,
            kind: CandidateKind::Immediate,
            module: access.module.clone(),
            span: span_of_stmt(design, &access.module, &access.at),
            location: CandidateLocation::Before { at: access.at },
            antecedent: None,
            consequent: cond,
            delay: Delay::SameCycle,
            clock: None,
            rendered,
            alt_rendered: None,
            shadow: None,
        });
        if out.len() >= cfg.caps.privilege {
            break;
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Resource management
// ----------------------------------------------------------------------

fn rule_candidate(
    rule: &ConditionRule,
    class: VulnClass,
    id: String,
    clock: &str,
    top: &str,
) -> AssertionCandidate {
    let cons = Expr::binary(rule.op.bin_op(), Expr::ident(&rule.signal), rule.value.clone());
    let arrow = if rule.next_cycle { "|=>" } else { "|->" };
    let rendered = concurrent_text(
        clock,
        &antecedent_text(&rule.antecedent_text, &rule.antecedent),
        arrow,
        &format!("({} {} {})", rule.signal, rule.op.symbol(), rule.value_text),
    );
    AssertionCandidate {
        id,
        vuln_class: class,
        kind: CandidateKind::Concurrent,
        module: top.to_string(),
        location: CandidateLocation::ModuleScope,
        antecedent: Some(rule.antecedent.clone()),
        consequent: cons,
        delay: if rule.next_cycle {
            Delay::NextCycle
        } else {
            Delay::SameCycle
        },
        clock: Some(clock.to_string()),
        rendered,
        alt_rendered: None,
        shadow: None,
        span: SourceSpan::synthetic(),
    }
}

/// One concurrent candidate per configured resource rule.
pub fn gen_resource(
    design: &ElaboratedDesign,
    cfg: &SecurityConfig,
) -> Result<Vec<AssertionCandidate>> {
    let mut next_id = ids(VulnClass::ResourceManagement);
    Ok(cfg
        .resources
        .iter()
        .take(cfg.caps.resource)
        .map(|rule| {
            rule_candidate(
                rule,
                VulnClass::ResourceManagement,
                next_id(),
                &cfg.clock,
                &design.top,
            )
        })
        .collect())
}

// ----------------------------------------------------------------------
// Illegal states and transitions
// ----------------------------------------------------------------------

/// Valid transitions become next-cycle implications, combinational
/// outputs pinned by the state become same-cycle checks, and state
/// pairs absent from the relation become exclusion checks; the total is
/// capped with that priority order.
pub fn gen_illegal_transitions(
    fsm: &FsmModel,
    cfg: &SecurityConfig,
    top: &str,
) -> Vec<AssertionCandidate> {
    let mut next_id = ids(VulnClass::IllegalStatesTransitions);
    let clock = &cfg.clock;
    let state = &fsm.state_var;
    let mut out = Vec::new();

    for t in &fsm.transitions {
        let ant_expr = match t.guard.const_value() {
            Some(v) if v != 0 => Expr::binary(BinOp::Eq, Expr::ident(state), Expr::number(t.from)),
            _ => Expr::binary(
                BinOp::LogAnd,
                Expr::binary(BinOp::Eq, Expr::ident(state), Expr::number(t.from)),
                t.guard.clone(),
            ),
        };
        let ant_text = match t.guard.const_value() {
            Some(v) if v != 0 => format!("({state} == {})", t.from),
            _ => format!("({state} == {} && {})", t.from, render_expr(&t.guard)),
        };
        let cons = Expr::binary(BinOp::Eq, Expr::ident(state), Expr::number(t.to));
        let rendered = concurrent_text(
            clock,
            &ant_text,
            "|=>",
            &format!("({state} == {})", t.to),
        );
        out.push(AssertionCandidate {
            id: next_id(),
            vuln_class: VulnClass::IllegalStatesTransitions,
            kind: CandidateKind::Concurrent,
            module: top.to_string(),
            location: CandidateLocation::ModuleScope,
            antecedent: Some(ant_expr),
            consequent: cons,
            delay: Delay::NextCycle,
            clock: Some(clock.clone()),
            rendered,
            alt_rendered: None,
            shadow: None,
            span: SourceSpan::synthetic(),
        });
    }

    for def in &fsm.output_defs {
        let ant = Expr::binary(BinOp::Eq, Expr::ident(state), Expr::number(def.state));
        let cons = Expr::binary(BinOp::Eq, Expr::ident(&def.output), def.expr.clone());
        let expr_text = match &def.expr {
            Expr::Ident { .. } | Expr::Const { .. } => render_expr(&def.expr),
            other => format!("({})", render_expr(other)),
        };
        let rendered = concurrent_text(
            clock,
            &format!("({state} == {})", def.state),
            "|->",
            &format!("({} == {expr_text})", def.output),
        );
        out.push(AssertionCandidate {
            id: next_id(),
            vuln_class: VulnClass::IllegalStatesTransitions,
            kind: CandidateKind::Concurrent,
            module: top.to_string(),
            location: CandidateLocation::ModuleScope,
            antecedent: Some(ant),
            consequent: cons,
            delay: Delay::SameCycle,
            clock: Some(clock.clone()),
            rendered,
            alt_rendered: None,
            shadow: None,
            span: SourceSpan::synthetic(),
        });
    }

    // Illegal pairs: (from, to) absent from the relation, deterministic
    // state order.
    for &from in &fsm.states {
        for &to in &fsm.states {
            let present = fsm
                .transitions
                .iter()
                .any(|t| t.from == from && t.to == to);
            if present {
                continue;
            }
            let ant = Expr::binary(BinOp::Eq, Expr::ident(state), Expr::number(from));
            let cons = Expr::binary(BinOp::Neq, Expr::ident(state), Expr::number(to));
            let rendered = concurrent_text(
                clock,
                &format!("({state} == {from})"),
                "|=>",
                &format!("({state} != {to})"),
            );
            out.push(AssertionCandidate {
                id: next_id(),
                vuln_class: VulnClass::IllegalStatesTransitions,
                kind: CandidateKind::Concurrent,
                module: top.to_string(),
                location: CandidateLocation::ModuleScope,
                antecedent: Some(ant),
                consequent: cons,
                delay: Delay::NextCycle,
                clock: Some(clock.clone()),
                rendered,
                alt_rendered: None,
                shadow: None,
                span: SourceSpan::synthetic(),
            });
        }
    }

    out.truncate(cfg.caps.illegal);
    out
}

// ----------------------------------------------------------------------
// Buffer issues
// ----------------------------------------------------------------------

fn power_form(count: u64) -> String {
    if count.is_power_of_two() {
        format!("2**{}", count.trailing_zeros())
    } else {
        format!("{count}")
    }
}

/// Immediate bounds check before each access, with the equivalent
/// strict-bound form emitted alongside, plus configured global rules.
pub fn gen_buffer(
    design: &ElaboratedDesign,
    accesses: &[BufferAccess],
    cfg: &SecurityConfig,
) -> Result<Vec<AssertionCandidate>> {
    let mut next_id = ids(VulnClass::BufferIssues);
    let mut out = Vec::new();
    for access in accesses {
        let idx_text = design
            .slice(access.index_expr.span())
            .unwrap_or_else(|| render_expr(&access.index_expr));
        let cond = Expr::binary(
            BinOp::LogAnd,
            Expr::binary(BinOp::Ge, access.index_expr.clone(), Expr::number(0)),
            Expr::binary(BinOp::Le, access.index_expr.clone(), Expr::number(access.limit)),
        );
        let rendered = format!(
            "assert({idx_text} >= 0 && {idx_text} <= {});",
            access.limit_text
        );
        // The low bound is vacuous on unsigned indices, so the strict
        // upper-bound form is equivalent and emitted alongside.
        let alt = format!("assert({idx_text} < {});", power_form(access.element_count));
        out.push(AssertionCandidate {
            id: next_id(),
            vuln_class: VulnClass::BufferIssues,
            kind: CandidateKind::Immediate,
            module: access.module.clone(),
            span: access.span.clone(),
            location: CandidateLocation::Before {
                at: access.at.clone(),
            },
            antecedent: None,
            consequent: cond,
            delay: Delay::SameCycle,
            clock: None,
            rendered,
            alt_rendered: Some(alt),
            shadow: None,
        });
        if out.len() >= cfg.caps.buffer {
            break;
        }
    }
    for rule in &cfg.buffer_rules {
        if out.len() >= cfg.caps.buffer {
            break;
        }
        let rendered = concurrent_text(
            &cfg.clock,
            &rule.antecedent,
            "|->",
            &rule.consequent,
        );
        out.push(AssertionCandidate {
            id: next_id(),
            vuln_class: VulnClass::BufferIssues,
            kind: CandidateKind::Concurrent,
            module: design.top.clone(),
            location: CandidateLocation::ModuleScope,
            antecedent: Some(Expr::ident(&rule.antecedent)),
            consequent: Expr::ident(&rule.consequent),
            delay: Delay::SameCycle,
            clock: Some(cfg.clock.clone()),
            rendered,
            alt_rendered: None,
            shadow: None,
            span: SourceSpan::synthetic(),
        });
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Information leakage
// ----------------------------------------------------------------------

/// Tag-based immediate checks before assignments that move secure data,
/// plus configured concurrent leakage rules. Shadow registers carry the
/// tag at runtime.
pub fn gen_leakage(
    design: &ElaboratedDesign,
    tags: &TagMap,
    cfg: &SecurityConfig,
) -> Result<Vec<AssertionCandidate>> {
    let mut next_id = ids(VulnClass::InformationLeakage);
    let mut out = Vec::new();
    let top = design.top.clone();
    let info = design.top_module();

    // Flows inside the top module whose source is secure.
    for (item_idx, item) in info.ast.items.iter().enumerate() {
        let ModuleItem::Always(a) = item else { continue };
        if !matches!(a.sensitivity, Sensitivity::Edges(_)) {
            continue;
        }
        collect_tagged_assignments(
            design,
            &a.body,
            StmtPath::new(item_idx, Vec::new()),
            tags,
            cfg,
            &top,
            &mut next_id,
            &mut out,
        );
    }
    out.truncate(cfg.caps.leakage);

    for rule in &cfg.leakage_rules {
        if out.len() >= cfg.caps.leakage {
            break;
        }
        out.push(rule_candidate(
            rule,
            VulnClass::InformationLeakage,
            next_id(),
            &cfg.clock,
            &top,
        ));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn collect_tagged_assignments(
    design: &ElaboratedDesign,
    stmt: &Stmt,
    path: StmtPath,
    tags: &TagMap,
    cfg: &SecurityConfig,
    top: &str,
    next_id: &mut impl FnMut() -> String,
    out: &mut Vec<AssertionCandidate>,
) {
    match stmt {
        Stmt::Block { stmts, .. } => {
            for (i, s) in stmts.iter().enumerate() {
                collect_tagged_assignments(
                    design,
                    s,
                    path.child(i),
                    tags,
                    cfg,
                    top,
                    next_id,
                    out,
                );
            }
        }
        Stmt::NonBlocking { target, value, span }
        | Stmt::Blocking { target, value, span } => {
            let dest = &target.base;
            if cfg.declassify.iter().any(|d| d == dest) {
                return;
            }
            let mut secure_sources: Vec<String> = Vec::new();
            value.walk_idents(&mut |n| {
                if tags.is_secure(n) && !secure_sources.iter().any(|s| s == n) {
                    secure_sources.push(n.to_string());
                }
            });
            if secure_sources.is_empty() {
                return;
            }
            let cond = Expr::binary(
                BinOp::Eq,
                Expr::ident(format!("{dest}_t")),
                Expr::sized(1, 1, LiteralBase::Bin),
            );
            out.push(AssertionCandidate {
                id: next_id(),
                vuln_class: VulnClass::InformationLeakage,
                kind: CandidateKind::Immediate,
                module: top.to_string(),
                location: CandidateLocation::Before { at: path.clone() },
                antecedent: None,
                consequent: cond,
                delay: Delay::SameCycle,
                clock: None,
                rendered: format!("assert({dest}_t == 1'b1);"),
                alt_rendered: None,
                shadow: Some(ShadowSpec {
                    dest: dest.clone(),
                    sources: secure_sources,
                    after: path.clone(),
                }),
                span: span.clone(),
            });
            let _ = design;
        }
        Stmt::If {
            then_stmt,
            else_stmt,
            ..
        } => {
            collect_tagged_assignments(design, then_stmt, path.child(0), tags, cfg, top, next_id, out);
            if let Some(e) = else_stmt {
                collect_tagged_assignments(design, e, path.child(1), tags, cfg, top, next_id, out);
            }
        }
        Stmt::Case { items, default, .. } => {
            for (i, item) in items.iter().enumerate() {
                collect_tagged_assignments(
                    design,
                    &item.body,
                    path.child(i),
                    tags,
                    cfg,
                    top,
                    next_id,
                    out,
                );
            }
            if let Some(d) = default {
                collect_tagged_assignments(
                    design,
                    d,
                    path.child(items.len()),
                    tags,
                    cfg,
                    top,
                    next_id,
                    out,
                );
            }
        }
        Stmt::ImmediateAssert { .. } | Stmt::For { .. } => {}
    }
}

// ----------------------------------------------------------------------
// Numeric exceptions
// ----------------------------------------------------------------------

/// `assert(<divisor> != 0);` per division hazard and
/// `assert(<base>[<bit>] != 1);` per sign conversion.
pub fn gen_numeric(
    hazards: &[NumericHazard],
    cfg: &SecurityConfig,
    design: &ElaboratedDesign,
) -> Result<Vec<AssertionCandidate>> {
    let mut next_id = ids(VulnClass::NumericExceptions);
    let mut out = Vec::new();
    for hazard in hazards {
        if out.len() >= cfg.caps.numeric {
            break;
        }
        let Some(at) = &hazard.at else {
            // No procedural anchor reachable; nothing to instrument.
            continue;
        };
        let (cond, rendered) = match &hazard.kind {
            HazardKind::Division { divisor, divisor_text }
            | HazardKind::Modulo { divisor, divisor_text } => (
                Expr::binary(BinOp::Neq, divisor.clone(), Expr::number(0)),
                format!("assert({divisor_text} != 0);"),
            ),
            HazardKind::SignConversion { base, sign_bit, .. } => (
                Expr::binary(
                    BinOp::Neq,
                    Expr::BitSelect {
                        base: base.clone(),
                        index: Box::new(Expr::number(*sign_bit as u64)),
                        span: SourceSpan::synthetic(),
                    },
                    Expr::number(1),
                ),
                format!("assert({base}[{sign_bit}] != 1);"),
            ),
        };
        out.push(AssertionCandidate {
            id: next_id(),
            vuln_class: VulnClass::NumericExceptions,
            kind: CandidateKind::Immediate,
            module: hazard.module.clone(),
            span: span_of_stmt(design, &hazard.module, at),
            location: CandidateLocation::Before { at: at.clone() },
            antecedent: None,
            consequent: cond,
            delay: Delay::SameCycle,
            clock: None,
            rendered,
            alt_rendered: None,
            shadow: None,
        });
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Malicious implants
// ----------------------------------------------------------------------

/// `assert(!(<cond>));` per rare condition, equalities rendered in
/// their `!=` form, ranked by ascending probability then source order,
/// capped. The checks sit at the head of the module's first clocked
/// block so every cycle evaluates them.
pub fn gen_implants(
    design: &ElaboratedDesign,
    rare: &[RareCondition],
    cfg: &SecurityConfig,
) -> Result<Vec<AssertionCandidate>> {
    let mut next_id = ids(VulnClass::MaliciousImplants);
    let mut ranked: Vec<&RareCondition> = rare.iter().collect();
    ranked.sort_by(|a, b| {
        a.estimate
            .probability
            .cmp(&b.estimate.probability)
            .then_with(|| rank_kind(a.kind).cmp(&rank_kind(b.kind)))
            .then_with(|| a.order.cmp(&b.order))
    });
    let mut out = Vec::new();
    for cond in ranked.into_iter().take(cfg.caps.implants) {
        let Some(at) = first_clocked_block(design, &cond.module) else {
            continue;
        };
        let (check, rendered) = match &cond.condition {
            Expr::Binary {
                op: BinOp::Eq,
                lhs,
                rhs,
                ..
            } => {
                let (lhs_text, rhs_text) = match cond.rendered.split_once(" == ") {
                    Some((l, r)) => (l.to_string(), r.to_string()),
                    None => (render_expr(lhs), render_expr(rhs)),
                };
                (
                    Expr::binary(BinOp::Neq, (**lhs).clone(), (**rhs).clone()),
                    format!("assert({lhs_text} != {rhs_text});"),
                )
            }
            other => (
                Expr::unary(UnaryOp::Not, other.clone()),
                format!("assert(!({}));", cond.rendered),
            ),
        };
        out.push(AssertionCandidate {
            id: next_id(),
            vuln_class: VulnClass::MaliciousImplants,
            kind: CandidateKind::Immediate,
            module: cond.module.clone(),
            span: span_of_stmt(design, &cond.module, &at),
            location: CandidateLocation::Before { at },
            antecedent: None,
            consequent: check,
            delay: Delay::SameCycle,
            clock: None,
            rendered,
            alt_rendered: None,
            shadow: None,
        });
    }
    Ok(out)
}

fn rank_kind(kind: RareKind) -> u8 {
    match kind {
        RareKind::Branch => 0,
        RareKind::CompositeOutput => 1,
    }
}

fn first_clocked_block(design: &ElaboratedDesign, module: &str) -> Option<StmtPath> {
    let info = design.modules.get(module)?;
    for (idx, item) in info.ast.items.iter().enumerate() {
        if let ModuleItem::Always(a) = item {
            if matches!(a.sensitivity, Sensitivity::Edges(_)) {
                return Some(StmtPath::new(idx, Vec::new()));
            }
        }
    }
    None
}

// ----------------------------------------------------------------------
// Orchestration
// ----------------------------------------------------------------------

/// Runs all seven generators in class order and merges deterministically.
pub fn generate_all(
    design: &ElaboratedDesign,
    cfg: &SecurityConfig,
) -> Result<Vec<AssertionCandidate>> {
    let mut out = Vec::new();
    out.extend(gen_privilege(design, cfg)?);
    out.extend(gen_resource(design, cfg)?);
    for fsm in crate::analysis::extract_fsm(design, None) {
        out.extend(gen_illegal_transitions(&fsm, cfg, &design.top));
    }
    let accesses = find_buffer_accesses(design);
    out.extend(gen_buffer(design, &accesses, cfg)?);
    let tags = propagate_tags(design, &cfg.secure_seeds)?;
    out.extend(gen_leakage(design, &tags, cfg)?);
    let hazards = find_numeric_hazards(design);
    out.extend(gen_numeric(&hazards, cfg, design)?);
    let rare = find_rare_conditions(design, &cfg.rarity_threshold);
    out.extend(gen_implants(design, &rare, cfg)?);
    Ok(out)
}

/// Tab-separated sidecar: id, class, kind, file, line, rendered text.
pub fn sidecar_report(candidates: &[AssertionCandidate]) -> String {
    let mut out = String::from("id\tclass\tkind\tfile\tline\trendered\n");
    for c in candidates {
        let kind = match c.kind {
            CandidateKind::Immediate => "immediate",
            CandidateKind::Concurrent => "concurrent",
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            c.id,
            c.vuln_class.slug(),
            kind,
            c.span.file,
            c.span.line,
            c.rendered
        ));
    }
    out
}

/// Accesses for use by callers that need the raw list (mutation sites).
pub fn buffer_accesses_of(design: &ElaboratedDesign) -> Vec<BufferAccess> {
    find_buffer_accesses(design)
}

/// Read/write split helper for reports.
pub fn access_kind_name(kind: AccessKind) -> &'static str {
    match kind {
        AccessKind::Read => "read",
        AccessKind::Write => "write",
    }
}
