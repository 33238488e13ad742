//! Concurrent assertion semantics: the boolean-implication subset over
//! sampled values, evaluated both online (inside the engine) and
//! offline (over an emitted trace). The two routes are implemented
//! separately and checked against each other.

use super::engine::{sign_extend, Sample, Trace};
use crate::frontend::ast::{BinOp, Expr, UnaryOp};
use crate::frontend::elaborate::ElaboratedDesign;

/// A clocked implication property over sampled values.
#[derive(Debug, Clone)]
pub struct ConcurrentProperty {
    /// `None` means the consequent is checked every sampled cycle.
    pub antecedent: Option<Expr>,
    pub consequent: Expr,
    /// `true` for `|=>` (consequent on the following sample).
    pub next_cycle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptStatus {
    Pass,
    Fail,
    /// Antecedent sampled false.
    Vacuous,
    /// Attempt could not complete: uninitialized sample or end of trace.
    NotAttempted,
}

/// Outcome of one assertion over one run.
#[derive(Debug, Clone)]
pub struct AssertionVerdict {
    pub id: String,
    /// `(attempt start cycle, status)` in cycle order.
    pub attempts: Vec<(usize, AttemptStatus)>,
    /// Cycle at which the first violation was observed (the consequent
    /// cycle for next-cycle properties).
    pub first_fail_cycle: Option<usize>,
}

impl AssertionVerdict {
    /// True when the assertion failed at least once.
    pub fn fired(&self) -> bool {
        self.attempts
            .iter()
            .any(|(_, s)| *s == AttemptStatus::Fail)
    }

    pub fn count(&self, status: AttemptStatus) -> usize {
        self.attempts.iter().filter(|(_, s)| *s == status).count()
    }
}

/// Incremental checker driven by the engine with per-cycle
/// (antecedent, consequent) sample values.
pub struct OnlineChecker {
    ids: Vec<String>,
    attempts: Vec<Vec<(usize, AttemptStatus)>>,
    first_fail: Vec<Option<usize>>,
    /// Start cycle of a pending next-cycle attempt.
    pending: Vec<Option<usize>>,
}

impl OnlineChecker {
    pub fn new(ids: Vec<String>) -> Self {
        let n = ids.len();
        OnlineChecker {
            ids,
            attempts: vec![Vec::new(); n],
            first_fail: vec![None; n],
            pending: vec![None; n],
        }
    }

    /// Feeds the sample of `cycle` for property `i`. `ant`/`cons` are
    /// `None` when their expression read an uninitialized signal.
    pub fn step(
        &mut self,
        i: usize,
        cycle: usize,
        next_cycle: bool,
        ant: Option<bool>,
        cons: Option<bool>,
    ) {
        if let Some(start) = self.pending[i].take() {
            let status = match cons {
                Some(true) => AttemptStatus::Pass,
                Some(false) => AttemptStatus::Fail,
                None => AttemptStatus::NotAttempted,
            };
            if status == AttemptStatus::Fail && self.first_fail[i].is_none() {
                self.first_fail[i] = Some(cycle);
            }
            self.attempts[i].push((start, status));
        }
        match ant {
            None => self.attempts[i].push((cycle, AttemptStatus::NotAttempted)),
            Some(false) => self.attempts[i].push((cycle, AttemptStatus::Vacuous)),
            Some(true) => {
                if next_cycle {
                    self.pending[i] = Some(cycle);
                } else {
                    let status = match cons {
                        Some(true) => AttemptStatus::Pass,
                        Some(false) => AttemptStatus::Fail,
                        None => AttemptStatus::NotAttempted,
                    };
                    if status == AttemptStatus::Fail && self.first_fail[i].is_none() {
                        self.first_fail[i] = Some(cycle);
                    }
                    self.attempts[i].push((cycle, status));
                }
            }
        }
    }

    /// Closes the run: a next-cycle attempt still pending at the end of
    /// the trace is not attempted.
    pub fn finish(mut self) -> Vec<AssertionVerdict> {
        let mut out = Vec::with_capacity(self.ids.len());
        for i in 0..self.ids.len() {
            if let Some(start) = self.pending[i].take() {
                self.attempts[i].push((start, AttemptStatus::NotAttempted));
            }
            out.push(AssertionVerdict {
                id: self.ids[i].clone(),
                attempts: std::mem::take(&mut self.attempts[i]),
                first_fail_cycle: self.first_fail[i],
            });
        }
        out
    }
}

/// Offline row-expression value: bits plus width/signedness, `None`
/// when any contributing sample is uninitialized or out of the trace.
fn eval_row(
    expr: &Expr,
    trace: &Trace,
    cycle: usize,
    scope: &str,
    design: &ElaboratedDesign,
) -> Option<(u64, u32, bool)> {
    let mask = |w: u32| -> u64 {
        if w >= 64 {
            u64::MAX
        } else {
            (1u64 << w) - 1
        }
    };
    let lookup = |name: &str| -> Option<(u64, u32, bool)> {
        let full = if scope.is_empty() {
            name.to_string()
        } else {
            format!("{scope}.{name}")
        };
        let sig = design.signal(&full)?;
        let sample: Sample = trace.value(cycle, &full)?;
        sample.map(|bits| (bits, sig.ty.width, sig.ty.signed))
    };
    match expr {
        Expr::Const { value, width, .. } => {
            let w = width.unwrap_or(32);
            Some((*value & mask(w), w, false))
        }
        Expr::Ident { name, .. } => lookup(name),
        Expr::BitSelect { base, index, .. } => {
            let (bits, width, _) = lookup(base)?;
            let (idx, _, _) = eval_row(index, trace, cycle, scope, design)?;
            let bit = if idx < width as u64 {
                (bits >> idx) & 1
            } else {
                0
            };
            Some((bit, 1, false))
        }
        Expr::PartSelect { base, msb, lsb, .. } => {
            let (bits, _, _) = lookup(base)?;
            let m = msb.const_value()? as u32;
            let l = lsb.const_value()? as u32;
            let w = m - l + 1;
            Some(((bits >> l) & mask(w), w, false))
        }
        Expr::Unary { op, operand, .. } => {
            let (bits, w, s) = eval_row(operand, trace, cycle, scope, design)?;
            Some(match op {
                UnaryOp::Not => ((bits == 0) as u64, 1, false),
                UnaryOp::BitNot => (!bits & mask(w), w, s),
                UnaryOp::Neg => (bits.wrapping_neg() & mask(w), w, s),
            })
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let (xa, wa, sa) = eval_row(lhs, trace, cycle, scope, design)?;
            let (xb, wb, sb) = eval_row(rhs, trace, cycle, scope, design)?;
            if op.is_logical() {
                let v = match op {
                    BinOp::LogAnd => (xa != 0 && xb != 0) as u64,
                    _ => (xa != 0 || xb != 0) as u64,
                };
                return Some((v, 1, false));
            }
            if op.is_comparison() {
                let v = if sa && sb {
                    let (ia, ib) = (sign_extend(xa, wa), sign_extend(xb, wb));
                    match op {
                        BinOp::Eq => ia == ib,
                        BinOp::Neq => ia != ib,
                        BinOp::Lt => ia < ib,
                        BinOp::Le => ia <= ib,
                        BinOp::Gt => ia > ib,
                        BinOp::Ge => ia >= ib,
                        _ => unreachable!(),
                    }
                } else {
                    match op {
                        BinOp::Eq => xa == xb,
                        BinOp::Neq => xa != xb,
                        BinOp::Lt => xa < xb,
                        BinOp::Le => xa <= xb,
                        BinOp::Gt => xa > xb,
                        BinOp::Ge => xa >= xb,
                        _ => unreachable!(),
                    }
                };
                return Some((v as u64, 1, false));
            }
            let w = wa.max(wb);
            let ext = |bits: u64, from: u32, signed: bool| -> u64 {
                if w <= from {
                    bits & mask(w)
                } else if signed {
                    (sign_extend(bits, from) as u64) & mask(w)
                } else {
                    bits
                }
            };
            let (x, y) = (ext(xa, wa, sa), ext(xb, wb, sb));
            let signed = sa && sb;
            let bits = match op {
                BinOp::Add => x.wrapping_add(y),
                BinOp::Sub => x.wrapping_sub(y),
                BinOp::Mul => x.wrapping_mul(y),
                BinOp::Div => {
                    if y == 0 {
                        mask(w)
                    } else if signed {
                        sign_extend(x, w).wrapping_div(sign_extend(y, w)) as u64
                    } else {
                        x / y
                    }
                }
                BinOp::Mod => {
                    if y == 0 {
                        mask(w)
                    } else if signed {
                        sign_extend(x, w).wrapping_rem(sign_extend(y, w)) as u64
                    } else {
                        x % y
                    }
                }
                BinOp::And => x & y,
                BinOp::Or => x | y,
                BinOp::Xor => x ^ y,
                BinOp::Shl => {
                    if y >= 64 {
                        0
                    } else {
                        x << y
                    }
                }
                BinOp::Shr => {
                    if y >= 64 {
                        0
                    } else {
                        x >> y
                    }
                }
                BinOp::Pow => expr.const_value()?,
                _ => unreachable!(),
            } & mask(w);
            Some((bits, w, signed))
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
            ..
        } => {
            let (c, _, _) = eval_row(cond, trace, cycle, scope, design)?;
            let (t, wt, st) = eval_row(then_expr, trace, cycle, scope, design)?;
            let (e, we, se) = eval_row(else_expr, trace, cycle, scope, design)?;
            let w = wt.max(we);
            let pick = if c != 0 { (t, wt, st) } else { (e, we, se) };
            let ext = if w <= pick.1 {
                pick.0 & mask(w)
            } else if pick.2 {
                (sign_extend(pick.0, pick.1) as u64) & mask(w)
            } else {
                pick.0
            };
            Some((ext, w, st && se))
        }
        Expr::Concat { parts, .. } => {
            let mut bits = 0u64;
            let mut width = 0u32;
            for p in parts {
                let (b, w, _) = eval_row(p, trace, cycle, scope, design)?;
                bits = (bits << w) | (b & mask(w));
                width += w;
            }
            Some((bits, width, false))
        }
        Expr::SignedCast { operand, .. } => {
            let (b, w, _) = eval_row(operand, trace, cycle, scope, design)?;
            Some((b, w, true))
        }
    }
}

/// Offline evaluation of one property over an emitted trace. Produces
/// the same verdict as the engine's online checking of the same run.
pub fn eval_concurrent(
    design: &ElaboratedDesign,
    scope: &str,
    id: &str,
    property: &ConcurrentProperty,
    trace: &Trace,
) -> AssertionVerdict {
    let mut attempts = Vec::new();
    let mut first_fail = None;
    let total = trace.cycle_count();
    for cycle in trace.arm_cycle..total {
        let ant = match &property.antecedent {
            Some(a) => eval_row(a, trace, cycle, scope, design).map(|(b, _, _)| b != 0),
            None => Some(true),
        };
        match ant {
            None => attempts.push((cycle, AttemptStatus::NotAttempted)),
            Some(false) => attempts.push((cycle, AttemptStatus::Vacuous)),
            Some(true) => {
                let check_cycle = if property.next_cycle { cycle + 1 } else { cycle };
                if check_cycle >= total {
                    attempts.push((cycle, AttemptStatus::NotAttempted));
                    continue;
                }
                let cons = eval_row(&property.consequent, trace, check_cycle, scope, design)
                    .map(|(b, _, _)| b != 0);
                let status = match cons {
                    Some(true) => AttemptStatus::Pass,
                    Some(false) => AttemptStatus::Fail,
                    None => AttemptStatus::NotAttempted,
                };
                if status == AttemptStatus::Fail && first_fail.is_none() {
                    first_fail = Some(check_cycle);
                }
                attempts.push((cycle, status));
            }
        }
    }
    AssertionVerdict {
        id: id.to_string(),
        attempts,
        first_fail_cycle: first_fail,
    }
}
