//! Source locations attached to every AST node and diagnostic.

use std::fmt;
use std::sync::Arc;

/// A half-open region of a named source file, tracked as 1-based
/// line/column plus character length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    /// Origin of the text, usually a file path or a fixture name.
    pub file: Arc<str>,
    /// 1-based line of the first character.
    pub line: u32,
    /// 1-based column of the first character.
    pub column: u32,
    /// Number of characters covered.
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<Arc<str>>, line: u32, column: u32, length: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        Self {
            file: file.into(),
            line,
            column,
            length,
        }
    }

    /// Span for text that has no real origin (synthesized nodes).
    pub fn synthetic() -> Self {
        Self::new("<synthetic>", 1, 1, 0)
    }

    /// Slices the covered text out of `source`, which must be the full
    /// text of the file this span points into.
    pub fn slice<'a>(&self, source: &'a str) -> Option<&'a str> {
        let mut line = 1u32;
        let mut col = 1u32;
        let mut start = None;
        let mut taken = 0u32;
        let mut end = source.len();
        for (idx, ch) in source.char_indices() {
            if start.is_none() && line == self.line && col == self.column {
                start = Some(idx);
            }
            if start.is_some() {
                if taken == self.length {
                    end = idx;
                    break;
                }
                taken += 1;
            }
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        start.map(|s| {
            if taken < self.length {
                &source[s..]
            } else {
                &source[s..end]
            }
        })
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_picks_the_spanned_text() {
        let src = "module m;\nwire a;\nendmodule\n";
        let span = SourceSpan::new("t.v", 2, 6, 1);
        assert_eq!(span.slice(src), Some("a"));
    }

    #[test]
    fn slice_spans_across_columns() {
        let src = "assign x = a + b;\n";
        let span = SourceSpan::new("t.v", 1, 12, 5);
        assert_eq!(span.slice(src), Some("a + b"));
    }
}
