//! Generated security assertions: the seven vulnerability classes and
//! the candidate records the generators produce.

use crate::frontend::ast::{Delay, Expr, StmtPath};
use crate::sim::{BoundAssertion, ConcurrentProperty};
use crate::span::SourceSpan;

/// The seven vulnerability classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VulnClass {
    PermissionsPrivileges,
    ResourceManagement,
    IllegalStatesTransitions,
    BufferIssues,
    InformationLeakage,
    NumericExceptions,
    MaliciousImplants,
}

impl VulnClass {
    pub const ALL: [VulnClass; 7] = [
        VulnClass::PermissionsPrivileges,
        VulnClass::ResourceManagement,
        VulnClass::IllegalStatesTransitions,
        VulnClass::BufferIssues,
        VulnClass::InformationLeakage,
        VulnClass::NumericExceptions,
        VulnClass::MaliciousImplants,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            VulnClass::PermissionsPrivileges => "priv",
            VulnClass::ResourceManagement => "res",
            VulnClass::IllegalStatesTransitions => "fsm",
            VulnClass::BufferIssues => "buf",
            VulnClass::InformationLeakage => "leak",
            VulnClass::NumericExceptions => "num",
            VulnClass::MaliciousImplants => "imp",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            VulnClass::PermissionsPrivileges => "Permissions and Privileges",
            VulnClass::ResourceManagement => "Resource Management",
            VulnClass::IllegalStatesTransitions => "Illegal States & Transitions",
            VulnClass::BufferIssues => "Buffer Issues",
            VulnClass::InformationLeakage => "Information Leakage",
            VulnClass::NumericExceptions => "Numeric Exceptions",
            VulnClass::MaliciousImplants => "Malicious Implants",
        }
    }

    pub fn from_slug(s: &str) -> Option<VulnClass> {
        VulnClass::ALL.iter().copied().find(|c| c.slug() == s)
    }
}

impl std::fmt::Display for VulnClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.title())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    Immediate,
    Concurrent,
}

/// Where an assertion lands in the design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateLocation {
    /// Immediately before the statement at `at`.
    Before { at: StmtPath },
    /// At module scope, before `endmodule`.
    ModuleScope,
}

/// Instrumentation support for tag-based leakage checks: declare
/// one-bit shadow registers and update the destination's shadow right
/// after the tracked assignment.
#[derive(Debug, Clone)]
pub struct ShadowSpec {
    pub dest: String,
    /// Tagged signals read by the assignment; their shadows feed the
    /// destination's shadow.
    pub sources: Vec<String>,
    pub after: StmtPath,
}

/// One generated security assertion.
#[derive(Debug, Clone)]
pub struct AssertionCandidate {
    pub id: String,
    pub vuln_class: VulnClass,
    pub kind: CandidateKind,
    /// Module the assertion lives in.
    pub module: String,
    pub location: CandidateLocation,
    pub antecedent: Option<Expr>,
    pub consequent: Expr,
    pub delay: Delay,
    /// Sampling clock for concurrent candidates.
    pub clock: Option<String>,
    /// Exact statement/item text inserted by instrumentation.
    pub rendered: String,
    /// Equivalent alternate form emitted alongside (buffer `<` bound).
    pub alt_rendered: Option<String>,
    pub shadow: Option<ShadowSpec>,
    pub span: SourceSpan,
}

impl AssertionCandidate {
    /// Binds the candidate for runtime checking on a design.
    pub fn to_bound(&self) -> BoundAssertion {
        match self.kind {
            CandidateKind::Immediate => {
                let at = match &self.location {
                    CandidateLocation::Before { at } => at.clone(),
                    CandidateLocation::ModuleScope => StmtPath::new(0, Vec::new()),
                };
                BoundAssertion::Immediate {
                    id: self.id.clone(),
                    module: self.module.clone(),
                    at,
                    cond: self.consequent.clone(),
                }
            }
            CandidateKind::Concurrent => BoundAssertion::Concurrent {
                id: self.id.clone(),
                scope: String::new(),
                property: ConcurrentProperty {
                    antecedent: self.antecedent.clone(),
                    consequent: self.consequent.clone(),
                    next_cycle: self.delay == Delay::NextCycle,
                },
            },
        }
    }
}

impl std::fmt::Display for AssertionCandidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}\t{}\t{}", self.id, self.vuln_class.slug(), self.rendered)
    }
}
