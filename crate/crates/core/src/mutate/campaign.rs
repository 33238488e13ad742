//! Seeded vulnerability campaigns: draw mutation sites, apply them, and
//! keep only instances that provably differ from the golden design on
//! witness stimulus.

use crate::frontend::compile;
use crate::frontend::elaborate::ElaboratedDesign;
use crate::rng::SplitMix64;
use crate::sim::{random_stimulus, run, StimulusSpec, TestVectorSet, Trace};

use super::operators::{
    apply, list_sites, MutationOperator, MutationParams, MutationSite, MutationSpec, SiteKind,
    VulnInstance,
};
use super::{MutationError, Result};
use crate::frontend::ast::BinOp;

/// Restricts which enumerated sites a draw may use.
#[derive(Debug, Clone)]
pub enum SiteFilter {
    All,
    /// Only whole-guard removal sites.
    WholeGuard,
    /// Site description contains the needle.
    DescriptionContains(String),
    /// The site's source span slices to exactly this text.
    SpanSlice(String),
}

impl SiteFilter {
    fn keep(&self, site: &MutationSite, source: &str) -> bool {
        match self {
            SiteFilter::All => true,
            SiteFilter::WholeGuard => matches!(
                site.kind,
                SiteKind::Guard {
                    part: super::operators::GuardPart::Whole,
                    ..
                }
            ),
            SiteFilter::DescriptionContains(needle) => site.description.contains(needle),
            SiteFilter::SpanSlice(text) => {
                site.span.slice(source).map(|s| s == text).unwrap_or(false)
            }
        }
    }
}

/// Operator parameter pool for a draw.
#[derive(Debug, Clone)]
pub enum ParamPool {
    None,
    SwapTo(Vec<BinOp>),
    LeakAddresses(Vec<u64>),
    TrojanMask(u64),
    /// Allowed (original, replacement) constant pairs.
    Misassign(Vec<(u64, u64)>),
}

#[derive(Debug, Clone)]
pub struct OperatorDraw {
    pub operator: MutationOperator,
    pub quota: usize,
    pub filter: SiteFilter,
    pub params: ParamPool,
}

impl OperatorDraw {
    pub fn uniform(operator: MutationOperator, quota: usize) -> Self {
        OperatorDraw {
            operator,
            quota,
            filter: SiteFilter::All,
            params: ParamPool::None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub draws: Vec<OperatorDraw>,
    pub witness_cycles: usize,
    pub witness_stimulus: StimulusSpec,
    /// Extra directed stimulus for witnessing (rare triggers).
    pub witness_directed: Vec<TestVectorSet>,
}

impl CampaignSpec {
    pub fn new(draws: Vec<OperatorDraw>) -> Self {
        CampaignSpec {
            draws,
            witness_cycles: 1000,
            witness_stimulus: StimulusSpec::reset(2),
            witness_directed: Vec::new(),
        }
    }
}

/// Per-spec parameter expansion: every (site, params) combination in
/// deterministic order.
fn combos(
    operator: MutationOperator,
    sites: &[MutationSite],
    pool: &ParamPool,
) -> Vec<(MutationSite, MutationParams)> {
    let mut out = Vec::new();
    for site in sites {
        match (operator, pool) {
            (MutationOperator::SwapOperator, ParamPool::SwapTo(ops)) => {
                for op in ops {
                    out.push((site.clone(), MutationParams::SwapTo(*op)));
                }
            }
            (MutationOperator::SwapOperator, _) => {
                // Default: all same-family peers of the site's operator.
                if let SiteKind::ExprNode { .. } = &site.kind {
                    for op in default_swaps(site) {
                        out.push((site.clone(), MutationParams::SwapTo(op)));
                    }
                }
            }
            (MutationOperator::LeakWire, ParamPool::LeakAddresses(addrs)) => {
                for a in addrs {
                    out.push((site.clone(), MutationParams::LeakAddress(*a)));
                }
            }
            (MutationOperator::LeakWire, _) => {
                out.push((site.clone(), MutationParams::LeakAddress(4096)));
            }
            (MutationOperator::InsertTrojan, pool) => {
                let mask = match pool {
                    ParamPool::TrojanMask(m) => *m,
                    _ => 0xdeadbeef,
                };
                out.push((site.clone(), MutationParams::TrojanPayload { xor_mask: mask }));
            }
            (MutationOperator::MisassignConstant, ParamPool::Misassign(pairs)) => {
                if let SiteKind::CaseConstant { current, .. } = &site.kind {
                    for (orig, repl) in pairs {
                        if orig == current {
                            out.push((site.clone(), MutationParams::ReplaceConstant(*repl)));
                        }
                    }
                }
            }
            (MutationOperator::MisassignConstant, _) => {}
            _ => out.push((site.clone(), MutationParams::None)),
        }
    }
    out
}

fn default_swaps(site: &MutationSite) -> Vec<BinOp> {
    // The description carries the symbol; map it back to peers.
    for op in [
        BinOp::And,
        BinOp::Or,
        BinOp::Xor,
        BinOp::LogAnd,
        BinOp::LogOr,
        BinOp::Eq,
        BinOp::Neq,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Add,
        BinOp::Sub,
    ] {
        if site.description == format!("swap `{}`", op.symbol()) {
            return super::operators::swap_peers_of(op);
        }
    }
    Vec::new()
}

fn output_columns(design: &ElaboratedDesign, trace: &Trace) -> Vec<usize> {
    design
        .top_module()
        .ast
        .ports
        .iter()
        .filter(|p| p.direction == crate::frontend::ast::Direction::Output)
        .filter_map(|p| trace.column(&p.name))
        .collect()
}

fn traces_differ(golden: &Trace, mutant: &Trace, columns: &[usize]) -> bool {
    if golden.cycle_count() != mutant.cycle_count() {
        return true;
    }
    for (grow, mrow) in golden.rows.iter().zip(&mutant.rows) {
        for &c in columns {
            if grow[c] != mrow[c] {
                return true;
            }
        }
    }
    false
}

/// Runs a curated campaign. Instances are drawn without replacement
/// within each draw's combination pool (cycling when the quota exceeds
/// it), and each kept instance is witnessed to differ from golden on at
/// least one output sample.
pub fn campaign_with(
    source: &str,
    origin: &str,
    top: &str,
    clock: &str,
    instance_prefix: &str,
    spec: &CampaignSpec,
    seed: u64,
) -> Result<Vec<VulnInstance>> {
    let golden = compile(source, origin, top)?;
    let mut rng = SplitMix64::new(seed);

    let mut witness_sets = vec![random_stimulus(
        &golden,
        clock,
        spec.witness_cycles,
        rng.fork("witness").next_u64(),
        &spec.witness_stimulus,
    )];
    witness_sets.extend(spec.witness_directed.iter().cloned());
    let mut golden_traces = Vec::new();
    for vs in &witness_sets {
        let (trace, _) = run(&golden, clock, vs, &[])?;
        golden_traces.push(trace);
    }

    let mut instances = Vec::new();
    for draw in &spec.draws {
        let sites: Vec<MutationSite> = list_sites(&golden, draw.operator)
            .into_iter()
            .filter(|s| draw.filter.keep(s, source))
            .collect();
        let mut pool = combos(draw.operator, &sites, &draw.params);
        if pool.is_empty() {
            return Err(MutationError::NoApplicableSites);
        }
        // Seeded shuffle, then walk the pool cycling as needed.
        for i in (1..pool.len()).rev() {
            let j = rng.next_below(i as u64 + 1) as usize;
            pool.swap(i, j);
        }
        let mut produced = 0;
        let mut attempts = 0;
        let mut cursor = 0;
        while produced < draw.quota {
            if attempts > 100 * draw.quota.max(1) {
                return Err(MutationError::MutantRejected(format!(
                    "{}: no non-equivalent mutant found after {attempts} attempts",
                    draw.operator.name()
                )));
            }
            attempts += 1;
            let (site, params) = pool[cursor % pool.len()].clone();
            cursor += 1;
            let mspec = MutationSpec {
                operator: draw.operator,
                site,
                parameters: params,
                seed,
            };
            let mut instance = match apply(source, origin, top, &mspec) {
                Ok(i) => i,
                Err(MutationError::MutantRejected(_)) => continue,
                Err(e) => return Err(e),
            };
            // Witness: at least one differing output sample.
            let mutant = match compile(&instance.mutated_source, origin, top) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let mut distinct = false;
            for (vs, gt) in witness_sets.iter().zip(&golden_traces) {
                let Ok((mt, _)) = run(&mutant, clock, vs, &[]) else {
                    continue;
                };
                let cols = output_columns(&golden, gt);
                if traces_differ(gt, &mt, &cols) {
                    distinct = true;
                    break;
                }
            }
            if !distinct {
                continue;
            }
            produced += 1;
            instance.instance_id = format!("{instance_prefix}-{:02}", instances.len() + 1);
            instances.push(instance);
        }
    }
    Ok(instances)
}

/// Uniform campaign: `n` draws across all applicable sites of the given
/// operators, reproducible from `seed`.
#[allow(clippy::too_many_arguments)]
pub fn campaign(
    source: &str,
    origin: &str,
    top: &str,
    clock: &str,
    instance_prefix: &str,
    operators: &[MutationOperator],
    n: usize,
    seed: u64,
) -> Result<Vec<VulnInstance>> {
    let per = n / operators.len().max(1);
    let mut rem = n % operators.len().max(1);
    let mut draws = Vec::new();
    for op in operators {
        let quota = per + if rem > 0 { 1 } else { 0 };
        rem = rem.saturating_sub(1);
        if quota > 0 {
            draws.push(OperatorDraw::uniform(*op, quota));
        }
    }
    campaign_with(
        source,
        origin,
        top,
        clock,
        instance_prefix,
        &CampaignSpec::new(draws),
        seed,
    )
}
