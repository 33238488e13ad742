//! Frontend for the synthesizable Verilog subset: lexing, parsing,
//! elaboration, and source rendering.
//!
//! The accepted subset covers modules, ports, `reg`/`wire` declarations
//! (vectored, signed, one array dimension), continuous assigns, `always`
//! blocks with edge or `@(*)` sensitivity, `if`/`else`, `case`/`default`,
//! blocking and nonblocking assignments, positional and named
//! instantiation, sized/unsized integer literals, `$signed` casts,
//! immediate `assert(...)` statements, clocked `assert property` items,
//! and `initial` blocks restricted to constant initialization (including
//! the for-loop memory zero-fill idiom). Everything else is rejected
//! with a spanned diagnostic.

pub mod ast;
pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod render;

use crate::span::SourceSpan;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("{span}: syntax error: {message}")]
    SyntaxError { span: SourceSpan, message: String },
    #[error("{span}: unsupported construct: {construct}")]
    UnsupportedConstruct { span: SourceSpan, construct: String },
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("{span}: instance of `{module}` has {actual} connections, expected {expected}")]
    PortArityMismatch {
        span: SourceSpan,
        module: String,
        expected: usize,
        actual: usize,
    },
    #[error("combinational cycle through `{0}`")]
    CombinationalCycle(String),
    #[error("{span}: unresolved identifier `{name}`")]
    UnresolvedIdentifier { span: SourceSpan, name: String },
    #[error("{span}: {message}")]
    Semantic { span: SourceSpan, message: String },
}

impl FrontendError {
    pub fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        FrontendError::SyntaxError {
            span,
            message: message.into(),
        }
    }

    pub fn unsupported(span: SourceSpan, construct: impl Into<String>) -> Self {
        FrontendError::UnsupportedConstruct {
            span,
            construct: construct.into(),
        }
    }

    pub fn semantic(span: SourceSpan, message: impl Into<String>) -> Self {
        FrontendError::Semantic {
            span,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, FrontendError>;

/// Parses all modules in `text`. `origin` names the file in spans.
pub fn parse_source(text: &str, origin: &str) -> Result<Vec<ast::AstModule>> {
    let tokens = lexer::lex(text, origin)?;
    parser::parse_modules(tokens, text, origin)
}

/// Renders a module list back to canonical source text.
pub fn render_source(modules: &[ast::AstModule]) -> String {
    render::render_modules(modules)
}

/// Parse + elaborate + attach source text in one step.
pub fn compile(text: &str, origin: &str, top: &str) -> Result<elaborate::ElaboratedDesign> {
    let modules = parse_source(text, origin)?;
    let mut design = elaborate::elaborate(modules, top)?;
    design.attach_source(origin, text);
    Ok(design)
}

/// Parses one expression from free-standing text (configuration values).
pub fn parse_expr_text(text: &str, origin: &str) -> Result<ast::Expr> {
    let tokens = lexer::lex(text, origin)?;
    parser::parse_standalone_expr(tokens, text, origin)
}
