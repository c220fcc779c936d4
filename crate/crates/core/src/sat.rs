//! DIMACS CNF parsing and rendering, formula evaluation, oracle compilation
//! and desk-scale brute force.
//!
//! Variable 1 maps to the most significant bit of an assignment label, the
//! same convention as qubit 1 in a register.

use std::fmt;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::oracle::PhaseOracle;
use crate::state::{BasisLabel, RandomSource};

/// Largest variable count [`brute_force_solutions`] will enumerate.
pub const MAX_BRUTE_FORCE_VARS: u32 = 24;

const GENERATION_ATTEMPTS: u32 = 16;
const CLAUSE_DRAWS_PER_VAR: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: u32) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: u32) -> Self {
        Literal { var, negated: true }
    }

    /// Signed DIMACS integer.
    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -i64::from(self.var)
        } else {
            i64::from(self.var)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

pub type Clause = Vec<Literal>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Self {
        CnfFormula { num_vars, clauses }
    }

    /// Largest clause width, 0 for an empty formula.
    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Truth assignment packed into a label, variable 1 in the top bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub num_vars: u32,
    pub bits: BasisLabel,
}

impl Assignment {
    pub fn new(num_vars: u32, bits: u64) -> Self {
        Assignment {
            num_vars,
            bits: BasisLabel(bits),
        }
    }

    /// Value of variable `var` (1-based).
    #[inline]
    pub fn value(&self, var: u32) -> bool {
        self.bits.bit(var, self.num_vars)
    }

    pub fn bit_string(&self) -> String {
        self.bits.bit_string(self.num_vars)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("input is not valid UTF-8 (byte {offset})")]
    Utf8 { offset: usize },
    #[error("line {line}: clause data before the `p cnf` header")]
    MissingHeader { line: usize },
    #[error("no `p cnf` header found")]
    NoHeader,
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: second `p` line")]
    DuplicateHeader { line: usize },
    #[error("line {line}: `{token}` is not an integer literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {literal} outside the {num_vars} declared variables")]
    LiteralOutOfRange {
        line: usize,
        literal: i64,
        num_vars: u32,
    },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: clause is missing its terminating 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: clause of width {width} is not allowed in strict 3-SAT mode")]
    ClauseTooWide { line: usize, width: usize },
    #[error("line {line}: clause contains variable {var} and its negation")]
    Tautology { line: usize, var: u32 },
}

impl DimacsError {
    /// Errors that only strict 3-SAT mode raises; the input is otherwise
    /// well-formed DIMACS.
    pub fn is_strict_violation(&self) -> bool {
        matches!(
            self,
            DimacsError::ClauseTooWide { .. } | DimacsError::Tautology { .. }
        )
    }

    pub fn line(&self) -> Option<usize> {
        match *self {
            DimacsError::Utf8 { .. } | DimacsError::NoHeader => None,
            DimacsError::MissingHeader { line }
            | DimacsError::MalformedHeader { line, .. }
            | DimacsError::DuplicateHeader { line }
            | DimacsError::BadToken { line, .. }
            | DimacsError::LiteralOutOfRange { line, .. }
            | DimacsError::EmptyClause { line }
            | DimacsError::MissingTerminator { line }
            | DimacsError::ClauseCountMismatch { line, .. }
            | DimacsError::ClauseTooWide { line, .. }
            | DimacsError::Tautology { line, .. } => Some(line),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("{num_vars} variables exceeds the limit of {max}")]
    Capacity { num_vars: u32, max: u32 },
    #[error("formula has no variables")]
    NoVariables,
    #[error("instance generation needs at least 2 variables, got {0}")]
    TooSmall(u32),
    #[error("no uniquely satisfiable instance on {n} variables after {attempts} attempts")]
    GenerationFailed { n: u32, attempts: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Reject clauses wider than 3 and tautological clauses.
    pub strict_3sat: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { strict_3sat: true }
    }
}

impl ParseOptions {
    pub fn relaxed() -> Self {
        ParseOptions { strict_3sat: false }
    }
}

fn tautology(clause: &[Literal]) -> Option<u32> {
    clause.iter().enumerate().find_map(|(i, a)| {
        clause[i + 1..]
            .iter()
            .any(|b| b.var == a.var && b.negated != a.negated)
            .then_some(a.var)
    })
}

/// Parses raw bytes, rejecting invalid UTF-8 with a structured error.
pub fn parse_dimacs_bytes(bytes: &[u8], opts: ParseOptions) -> Result<CnfFormula, DimacsError> {
    let text = std::str::from_utf8(bytes).map_err(|e| DimacsError::Utf8 {
        offset: e.valid_up_to(),
    })?;
    parse_dimacs(text, opts)
}

/// Parses DIMACS CNF. Clauses may span lines; a `%` line ends the input, as
/// in the SATLIB benchmark files.
pub fn parse_dimacs(text: &str, opts: ParseOptions) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Clause = Vec::new();
    let mut clause_start = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        last_line = line;
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line });
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader { line })?;
        for token in trimmed.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| DimacsError::BadToken {
                line,
                token: token.to_string(),
            })?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(DimacsError::EmptyClause { line });
                }
                check_clause(&current, clause_start, opts)?;
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if lit.unsigned_abs() > u64::from(num_vars) {
                return Err(DimacsError::LiteralOutOfRange {
                    line,
                    literal: lit,
                    num_vars,
                });
            }
            if current.is_empty() {
                clause_start = line;
            }
            current.push(Literal {
                var: lit.unsigned_abs() as u32,
                negated: lit < 0,
            });
        }
    }

    let (num_vars, declared) = header.ok_or(DimacsError::NoHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::MissingTerminator { line: clause_start });
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCountMismatch {
            line: last_line,
            declared,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula { num_vars, clauses })
}

fn parse_header(line_text: &str, line: usize) -> Result<(u32, usize), DimacsError> {
    let malformed = |reason: &str| DimacsError::MalformedHeader {
        line,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line_text.split_whitespace().collect();
    match fields.as_slice() {
        ["p", "cnf", vars, clauses] => {
            let vars = vars
                .parse()
                .map_err(|_| malformed("variable count is not a non-negative integer"))?;
            let clauses = clauses
                .parse()
                .map_err(|_| malformed("clause count is not a non-negative integer"))?;
            Ok((vars, clauses))
        }
        ["p", fmt, ..] if *fmt != "cnf" => Err(malformed("only the `cnf` format is supported")),
        _ => Err(malformed("expected `p cnf <vars> <clauses>`")),
    }
}

fn check_clause(clause: &[Literal], line: usize, opts: ParseOptions) -> Result<(), DimacsError> {
    if opts.strict_3sat && clause.len() > 3 {
        return Err(DimacsError::ClauseTooWide {
            line,
            width: clause.len(),
        });
    }
    if let Some(var) = tautology(clause) {
        if opts.strict_3sat {
            return Err(DimacsError::Tautology { line, var });
        }
        log::warn!("line {line}: tautological clause on variable {var}");
    }
    Ok(())
}

/// Canonical DIMACS text: header, then one zero-terminated clause per line in
/// the original order. No comments.
pub fn render_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars, formula.clauses.len());
    for clause in &formula.clauses {
        for lit in clause {
            out.push_str(&lit.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

#[inline]
fn satisfied_by(clause: &[Literal], num_vars: u32, bits: u64) -> bool {
    clause
        .iter()
        .any(|l| ((bits >> (num_vars - l.var)) & 1 == 1) != l.negated)
}

/// True iff every clause has a satisfied literal.
pub fn evaluate(formula: &CnfFormula, assignment: Assignment) -> bool {
    formula
        .clauses
        .iter()
        .all(|c| satisfied_by(c, formula.num_vars, assignment.bits.0))
}

/// Phase oracle marking exactly the satisfying assignments.
pub fn compile_oracle(formula: &CnfFormula) -> Result<PhaseOracle, SatError> {
    if formula.num_vars == 0 {
        return Err(SatError::NoVariables);
    }
    if formula.num_vars > 63 {
        return Err(SatError::Capacity {
            num_vars: formula.num_vars,
            max: 63,
        });
    }
    let f = Arc::new(formula.clone());
    let n = formula.num_vars;
    Ok(PhaseOracle::from_predicate(n, move |x| {
        evaluate(&f, Assignment::new(n, x))
    })
    .expect("arity checked above"))
}

/// All satisfying assignments in ascending label order, at most `cap`.
pub fn brute_force_solutions(formula: &CnfFormula, cap: usize) -> Result<Vec<Assignment>, SatError> {
    let n = formula.num_vars;
    if n > MAX_BRUTE_FORCE_VARS {
        return Err(SatError::Capacity {
            num_vars: n,
            max: MAX_BRUTE_FORCE_VARS,
        });
    }
    const CHUNK: u64 = 1 << 14;
    let total = 1u64 << n;
    let mut found = Vec::new();
    let mut start = 0;
    while start < total && found.len() < cap {
        let end = (start + CHUNK).min(total);
        let hits: Vec<u64> = (start..end)
            .into_par_iter()
            .filter(|&x| evaluate(formula, Assignment::new(n, x)))
            .collect();
        found.extend(hits.into_iter().map(|x| Assignment::new(n, x)));
        start = end;
    }
    found.truncate(cap);
    Ok(found)
}

/// Plants a random assignment and adds random 3-clauses it satisfies (each
/// one cutting at least one surviving assignment) until the planted one is
/// the only survivor. Verified by [`brute_force_solutions`] before returning.
pub fn generate_unique_instance(n: u32, rng: &mut RandomSource) -> Result<(CnfFormula, Assignment), SatError> {
    if n < 2 {
        return Err(SatError::TooSmall(n));
    }
    if n > MAX_BRUTE_FORCE_VARS {
        return Err(SatError::Capacity {
            num_vars: n,
            max: MAX_BRUTE_FORCE_VARS,
        });
    }
    let width = n.min(3) as usize;
    for _ in 0..GENERATION_ATTEMPTS {
        let planted = rng.gen_range(0..1u64 << n);
        let mut survivors: Vec<u64> = (0..1u64 << n).collect();
        let mut clauses = Vec::new();
        for _ in 0..CLAUSE_DRAWS_PER_VAR * n {
            if survivors.len() == 1 {
                break;
            }
            let clause: Clause = index::sample(rng, n as usize, width)
                .into_iter()
                .map(|v| Literal {
                    var: v as u32 + 1,
                    negated: rng.gen(),
                })
                .collect();
            if !satisfied_by(&clause, n, planted) {
                continue;
            }
            let before = survivors.len();
            survivors.retain(|&x| satisfied_by(&clause, n, x));
            if survivors.len() < before {
                clauses.push(clause);
            }
        }
        if survivors.len() != 1 {
            continue;
        }
        let formula = CnfFormula::new(n, clauses);
        let solutions = brute_force_solutions(&formula, 2)?;
        if solutions.len() == 1 && solutions[0].bits.0 == planted {
            return Ok((formula, Assignment::new(n, planted)));
        }
    }
    Err(SatError::GenerationFailed {
        n,
        attempts: GENERATION_ATTEMPTS,
    })
}
