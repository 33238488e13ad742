//! Security configuration: the line-oriented sectioned text format that
//! names the privilege signal, resource rules, secure seeds, buffer
//! rules, implant threshold, and per-class candidate caps.
//!
//! ```text
//! [design]
//! clock = clk
//!
//! [privilege]
//! signal = sc          # the privilege signal
//! target = address     # protected region predicate: target < below
//! below = 1024
//!
//! [resources]
//! # rule = <antecedent>, <signal>, <==|!=>, <value> [, next]
//! rule = !JTAG, JTAG_out, ==, 0
//!
//! [secure]
//! seeds = mem
//! declassify =
//! # rule = <antecedent>, <signal>, <==|!=>, <value> [, next]
//! rule = wr, out, ==, 0, next
//!
//! [buffers]
//! # rule = <antecedent signal>, <consequent signal>
//! rule = Pre_fail, IB_Empty
//!
//! [implants]
//! threshold = 2^-16
//!
//! [caps]
//! illegal = 10
//! implants = 10
//! ```
//!
//! `#` starts a comment. Unknown sections or keys are errors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::frontend::ast::{BinOp, Expr};
use crate::frontend::elaborate::ElaboratedDesign;
use crate::frontend::parse_expr_text;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config references missing signal `{0}`")]
    ConfigSignalMissing(String),
}

#[derive(Debug, Clone)]
pub struct PrivilegeRule {
    pub priv_signal: String,
    pub target: String,
    /// Protected region is `target < below`.
    pub below: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOp {
    Eq,
    Neq,
}

impl RuleOp {
    pub fn bin_op(&self) -> BinOp {
        match self {
            RuleOp::Eq => BinOp::Eq,
            RuleOp::Neq => BinOp::Neq,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            RuleOp::Eq => "==",
            RuleOp::Neq => "!=",
        }
    }
}

/// `antecedent |-> (signal op value)` with optional next-cycle delay.
#[derive(Debug, Clone)]
pub struct ConditionRule {
    pub antecedent_text: String,
    pub antecedent: Expr,
    pub signal: String,
    pub op: RuleOp,
    pub value_text: String,
    pub value: Expr,
    pub next_cycle: bool,
}

/// `antecedent |-> consequent` over two bare signals.
#[derive(Debug, Clone)]
pub struct BufferRule {
    pub antecedent: String,
    pub consequent: String,
}

#[derive(Debug, Clone)]
pub struct Caps {
    pub privilege: usize,
    pub resource: usize,
    pub illegal: usize,
    pub buffer: usize,
    pub leakage: usize,
    pub numeric: usize,
    pub implants: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            privilege: 10,
            resource: 10,
            illegal: 10,
            buffer: 10,
            leakage: 10,
            numeric: 10,
            implants: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SecurityConfig {
    pub clock: String,
    pub privilege: Option<PrivilegeRule>,
    pub resources: Vec<ConditionRule>,
    pub secure_seeds: Vec<String>,
    pub declassify: Vec<String>,
    pub leakage_rules: Vec<ConditionRule>,
    pub buffer_rules: Vec<BufferRule>,
    pub rarity_threshold: BigRational,
    pub caps: Caps,
}

impl Default for SecurityConfig {
    fn default() -> Self {
        SecurityConfig {
            clock: "clk".to_string(),
            privilege: None,
            resources: Vec::new(),
            secure_seeds: Vec::new(),
            declassify: Vec::new(),
            leakage_rules: Vec::new(),
            buffer_rules: Vec::new(),
            rarity_threshold: pow2_inv(16),
            caps: Caps::default(),
        }
    }
}

fn pow2_inv(bits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2u8).pow(bits))
}

fn parse_rule(value: &str, line: usize) -> Result<ConditionRule, ConfigError> {
    let parts: Vec<&str> = value.split(',').map(|s| s.trim()).collect();
    if parts.len() < 4 || parts.len() > 5 {
        return Err(ConfigError::Parse {
            line,
            message: "rule needs `<antecedent>, <signal>, <op>, <value>[, next]`".into(),
        });
    }
    let antecedent = parse_expr_text(parts[0], "config").map_err(|e| ConfigError::Parse {
        line,
        message: format!("bad antecedent: {e}"),
    })?;
    let op = match parts[2] {
        "==" => RuleOp::Eq,
        "!=" => RuleOp::Neq,
        other => {
            return Err(ConfigError::Parse {
                line,
                message: format!("bad operator `{other}` (expected == or !=)"),
            })
        }
    };
    let value_expr = parse_expr_text(parts[3], "config").map_err(|e| ConfigError::Parse {
        line,
        message: format!("bad value: {e}"),
    })?;
    let next_cycle = match parts.get(4) {
        None => false,
        Some(&"next") => true,
        Some(other) => {
            return Err(ConfigError::Parse {
                line,
                message: format!("bad delay `{other}` (expected `next`)"),
            })
        }
    };
    Ok(ConditionRule {
        antecedent_text: parts[0].to_string(),
        antecedent,
        signal: parts[1].to_string(),
        op,
        value_text: parts[3].to_string(),
        value: value_expr,
        next_cycle,
    })
}

fn parse_threshold(value: &str, line: usize) -> Result<BigRational, ConfigError> {
    let bad = || ConfigError::Parse {
        line,
        message: format!("bad threshold `{value}` (expected `2^-N`)"),
    };
    let exp = value.strip_prefix("2^-").ok_or_else(bad)?;
    let bits: u32 = exp.parse().map_err(|_| bad())?;
    Ok(pow2_inv(bits))
}

fn ident_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parses the sectioned config text. Unknown sections and keys are
/// errors; every section is optional.
pub fn parse_config(text: &str) -> Result<SecurityConfig, ConfigError> {
    let mut cfg = SecurityConfig::default();
    let mut section = String::new();
    let mut priv_signal = None;
    let mut priv_target = None;
    let mut priv_below = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(ConfigError::Parse {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            match name {
                "design" | "privilege" | "resources" | "secure" | "buffers" | "implants"
                | "caps" => section = name.to_string(),
                other => {
                    return Err(ConfigError::Parse {
                        line: line_no,
                        message: format!("unknown section `[{other}]`"),
                    })
                }
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match (section.as_str(), key) {
            ("design", "clock") => cfg.clock = value.to_string(),
            ("privilege", "signal") => priv_signal = Some(value.to_string()),
            ("privilege", "target") => priv_target = Some(value.to_string()),
            ("privilege", "below") => {
                priv_below = Some(value.parse().map_err(|_| ConfigError::Parse {
                    line: line_no,
                    message: format!("bad bound `{value}`"),
                })?)
            }
            ("resources", "rule") => cfg.resources.push(parse_rule(value, line_no)?),
            ("secure", "seeds") => cfg.secure_seeds = ident_list(value),
            ("secure", "declassify") => cfg.declassify = ident_list(value),
            ("secure", "rule") => cfg.leakage_rules.push(parse_rule(value, line_no)?),
            ("buffers", "rule") => {
                let parts: Vec<&str> = value.split(',').map(|s| s.trim()).collect();
                if parts.len() != 2 {
                    return Err(ConfigError::Parse {
                        line: line_no,
                        message: "buffer rule needs `<antecedent>, <consequent>`".into(),
                    });
                }
                cfg.buffer_rules.push(BufferRule {
                    antecedent: parts[0].to_string(),
                    consequent: parts[1].to_string(),
                });
            }
            ("implants", "threshold") => {
                cfg.rarity_threshold = parse_threshold(value, line_no)?
            }
            ("caps", cap) => {
                let n: usize = value.parse().map_err(|_| ConfigError::Parse {
                    line: line_no,
                    message: format!("bad cap `{value}`"),
                })?;
                match cap {
                    "privilege" => cfg.caps.privilege = n,
                    "resource" => cfg.caps.resource = n,
                    "illegal" => cfg.caps.illegal = n,
                    "buffer" => cfg.caps.buffer = n,
                    "leakage" => cfg.caps.leakage = n,
                    "numeric" => cfg.caps.numeric = n,
                    "implants" => cfg.caps.implants = n,
                    other => {
                        return Err(ConfigError::Parse {
                            line: line_no,
                            message: format!("unknown cap `{other}`"),
                        })
                    }
                }
            }
            (sec, key) => {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: if sec.is_empty() {
                        format!("key `{key}` outside any section")
                    } else {
                        format!("unknown key `{key}` in section `[{sec}]`")
                    },
                })
            }
        }
    }

    match (priv_signal, priv_target, priv_below) {
        (Some(priv_signal), Some(target), Some(below)) => {
            cfg.privilege = Some(PrivilegeRule {
                priv_signal,
                target,
                below,
            });
        }
        (None, None, None) => {}
        _ => {
            return Err(ConfigError::Parse {
                line: 0,
                message: "[privilege] needs all of signal, target, below".into(),
            })
        }
    }
    Ok(cfg)
}

impl SecurityConfig {
    /// Every referenced identifier must exist in the design.
    pub fn validate(&self, design: &ElaboratedDesign) -> Result<(), ConfigError> {
        let missing = |name: &str| ConfigError::ConfigSignalMissing(name.to_string());
        let check = |name: &str| -> Result<(), ConfigError> {
            if design.signal(name).is_none() {
                Err(missing(name))
            } else {
                Ok(())
            }
        };
        check(&self.clock)?;
        if let Some(p) = &self.privilege {
            check(&p.priv_signal)?;
            check(&p.target)?;
        }
        for rule in self.resources.iter().chain(&self.leakage_rules) {
            check(&rule.signal)?;
            for name in rule.antecedent.referenced_idents() {
                check(&name)?;
            }
        }
        for seed in &self.secure_seeds {
            check(seed)?;
        }
        for d in &self.declassify {
            check(d)?;
        }
        for rule in &self.buffer_rules {
            check(&rule.antecedent)?;
            check(&rule.consequent)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sections() {
        let text = "\
# memory fixture
[design]
clock = clk

[privilege]
signal = sc
target = address
below = 1024

[secure]
seeds =
rule = wr, out, ==, 0, next

[implants]
threshold = 2^-16

[caps]
illegal = 10
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.clock, "clk");
        let p = cfg.privilege.unwrap();
        assert_eq!((p.priv_signal.as_str(), p.target.as_str(), p.below), ("sc", "address", 1024));
        assert_eq!(cfg.leakage_rules.len(), 1);
        assert!(cfg.leakage_rules[0].next_cycle);
        assert_eq!(cfg.rarity_threshold, pow2_inv(16));
        assert_eq!(cfg.caps.illegal, 10);
    }

    #[test]
    fn unknown_keys_and_sections_error() {
        assert!(parse_config("[designs]\n").is_err());
        assert!(parse_config("[design]\nclocks = clk\n").is_err());
        assert!(parse_config("clock = clk\n").is_err());
    }

    #[test]
    fn rule_shapes_are_checked() {
        assert!(parse_config("[resources]\nrule = a, b\n").is_err());
        assert!(parse_config("[resources]\nrule = a, b, ~~, 0\n").is_err());
        assert!(parse_config("[resources]\nrule = !JTAG, JTAG_out, ==, 0\n").is_ok());
    }
}
