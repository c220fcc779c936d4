//! `signlab search` and `signlab grover`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use signlab::state::MAX_QUBITS;
use signlab::{
    brute_force_solutions, compile_oracle, evaluate, grover_search, marked_oracle, parse_dimacs_bytes,
    recover_marked_state, Assignment, BasisLabel, CnfFormula, MarkedSpec, Omniscient, ParseOptions,
    PhaseOracle, RandomSource, ReductionError, RunReport,
};

use crate::error::to_json;
use crate::{CliError, Format, Target, GROVER_STREAM};

/// A resolved search problem with a known unique answer.
struct Problem {
    n: u32,
    answer: BasisLabel,
    cnf: Option<(PathBuf, CnfFormula)>,
}

impl Problem {
    /// A fresh oracle with its own query counter.
    fn oracle(&self) -> PhaseOracle {
        match &self.cnf {
            Some((_, f)) => compile_oracle(f).expect("width checked during resolve"),
            None => marked_oracle(MarkedSpec::new(self.n, self.answer).expect("checked during resolve"))
                .expect("checked during resolve"),
        }
    }

    fn succeeded(&self, label: BasisLabel) -> bool {
        match &self.cnf {
            Some((_, f)) => evaluate(f, Assignment::new(self.n, label.0)),
            None => label == self.answer,
        }
    }
}

#[derive(Debug, Serialize)]
struct Refusal<'a> {
    command: &'a str,
    refused: bool,
    cnf: String,
    solutions: usize,
    reason: String,
}

fn width_cap() -> u32 {
    MAX_QUBITS - 1
}

fn load_cnf(path: &Path, relaxed: bool) -> Result<CnfFormula, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let opts = if relaxed { ParseOptions::relaxed() } else { ParseOptions::default() };
    parse_dimacs_bytes(&bytes, opts).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn resolve(t: &Target, command: &str, format: Format) -> Result<Problem, CliError> {
    if t.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if !(t.tolerance > 0.0) {
        return Err(CliError::Usage("--tolerance must be positive".into()));
    }
    if format == Format::Csv {
        return Err(CliError::Usage(format!("{command} supports text and json output")));
    }
    match (&t.cnf, t.m) {
        (Some(path), None) => {
            let formula = load_cnf(path, t.relaxed)?;
            let n = formula.num_vars;
            if let Some(given) = t.n {
                if given != n {
                    return Err(CliError::Usage(format!(
                        "--n {given} does not match the {n} variables of {}",
                        path.display()
                    )));
                }
            }
            if n == 0 {
                return Err(CliError::Input(format!("{}: formula has no variables", path.display())));
            }
            if n > width_cap() {
                return Err(CliError::Capacity(format!(
                    "{n} variables exceeds the simulator limit of {}",
                    width_cap()
                )));
            }
            let solutions = brute_force_solutions(&formula, usize::MAX)
                .map_err(|e| CliError::Capacity(e.to_string()))?;
            if solutions.len() != 1 {
                let reason = format!(
                    "formula has {} solutions; the reduction needs exactly one marked assignment",
                    solutions.len()
                );
                let refusal = Refusal {
                    command,
                    refused: true,
                    cnf: path.display().to_string(),
                    solutions: solutions.len(),
                    reason: reason.clone(),
                };
                let report = match format {
                    Format::Json => to_json(&refusal),
                    _ => format!("{} solutions found in {}; refusing\n", solutions.len(), path.display()),
                };
                return Err(CliError::Refusal { message: reason, report });
            }
            Ok(Problem {
                n,
                answer: solutions[0].bits,
                cnf: Some((path.clone(), formula)),
            })
        }
        (None, Some(m)) => {
            let n = t.n.ok_or_else(|| CliError::Usage("--m needs --n".into()))?;
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            if n > width_cap() {
                return Err(CliError::Capacity(format!(
                    "n = {n} exceeds the simulator limit of {}",
                    width_cap()
                )));
            }
            MarkedSpec::new(n, BasisLabel(m)).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Problem {
                n,
                answer: BasisLabel(m),
                cnf: None,
            })
        }
        _ => Err(CliError::Usage("give exactly one of --m or --cnf".into())),
    }
}

#[derive(Debug, Serialize)]
struct CnfCheck {
    path: String,
    solutions: usize,
    satisfied: bool,
}

#[derive(Debug, Serialize)]
struct SearchOutput {
    command: &'static str,
    #[serde(flatten)]
    report: RunReport,
    kn: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cnf: Option<CnfCheck>,
}

pub fn run_search(t: &Target, format: Format) -> Result<String, CliError> {
    let problem = resolve(t, "search", format)?;
    let n = problem.n;
    let oracle = problem.oracle();
    let mut sign = Omniscient { epsilon: t.tolerance };
    let run = recover_marked_state(&oracle, n, &mut sign, t.k).map_err(|e| match e {
        ReductionError::MalformedOracle { j } => CliError::CheckFailed {
            message: format!(
                "zero readout amplitude on bit {j}; the oracle does not mark exactly one label \
                 (screen the input for a unique solution)"
            ),
            report: String::new(),
        },
        other => CliError::CheckFailed {
            message: other.to_string(),
            report: String::new(),
        },
    })?;

    let cnf = problem.cnf.as_ref().map(|(path, f)| CnfCheck {
        path: path.display().to_string(),
        solutions: 1,
        satisfied: evaluate(f, Assignment::new(n, run.recovered.0)),
    });
    let out = SearchOutput {
        command: "search",
        report: RunReport::new(&run, Some(problem.answer)),
        kn: t.k * n as u64,
        cnf,
    };
    let text = match format {
        Format::Json => to_json(&out),
        _ => render_search(&out),
    };

    let mut problems = Vec::new();
    if out.report.oracle_calls != out.kn || oracle.calls() != out.kn {
        problems.push(format!("{} oracle calls, expected k*n = {}", out.report.oracle_calls, out.kn));
    }
    if run.recovered != problem.answer {
        problems.push(format!("recovered {} but the answer is {}", run.recovered, problem.answer));
    }
    if out.cnf.as_ref().is_some_and(|c| !c.satisfied) {
        problems.push("recovered assignment does not satisfy the formula".into());
    }
    if problems.is_empty() {
        Ok(text)
    } else {
        Err(CliError::CheckFailed {
            message: problems.join("; "),
            report: text,
        })
    }
}

fn render_search(o: &SearchOutput) -> String {
    let r = &o.report;
    let mut s = format!("recovered m = {} ({})\n", r.m_recovered, r.m_recovered_bits);
    if let (Some(m), Some(bits)) = (r.m_expected, &r.m_expected_bits) {
        s.push_str(&format!("expected  m = {m} ({bits})\n"));
    }
    s.push_str(&format!(
        "n = {}, k = {}, oracle calls = {} (k*n = {}), copies consumed = {}\n",
        r.n, r.k, r.oracle_calls, o.kn, r.copies_consumed
    ));
    s.push_str("bit  sign  copies\n");
    for b in &r.per_bit {
        s.push_str(&format!("{:>3}  {:>4}  {:>6}\n", b.j, b.sign.to_string(), b.copies));
    }
    if let Some(c) = &o.cnf {
        s.push_str(&format!(
            "cnf {}: recovered assignment {} the formula\n",
            c.path,
            if c.satisfied { "satisfies" } else { "does NOT satisfy" }
        ));
    }
    s
}

#[derive(Debug, Serialize)]
struct GroverOutput {
    command: &'static str,
    n: u32,
    expected: u64,
    expected_bits: String,
    measured: u64,
    measured_bits: String,
    success: bool,
    success_probability: f64,
    grover_calls: u64,
    k: u64,
    reduction_calls: u64,
}

pub fn run_grover(t: &Target, seed: u64, format: Format) -> Result<String, CliError> {
    let problem = resolve(t, "grover", format)?;
    let n = problem.n;
    if n < 2 {
        return Err(CliError::Usage("the Grover baseline needs n >= 2".into()));
    }
    let mut rng = RandomSource::new(seed).fork(GROVER_STREAM);
    let g = grover_search(&problem.oracle(), n, &mut rng).map_err(|e| CliError::CheckFailed {
        message: e.to_string(),
        report: String::new(),
    })?;
    let reduction = recover_marked_state(&problem.oracle(), n, &mut Omniscient { epsilon: t.tolerance }, t.k)
        .map_err(|e| CliError::CheckFailed {
            message: e.to_string(),
            report: String::new(),
        })?;

    let out = GroverOutput {
        command: "grover",
        n,
        expected: problem.answer.0,
        expected_bits: problem.answer.bit_string(n),
        measured: g.label.0,
        measured_bits: g.label.bit_string(n),
        success: problem.succeeded(g.label),
        success_probability: g.success_probability,
        grover_calls: g.oracle_calls,
        k: t.k,
        reduction_calls: reduction.ledger.oracle_calls,
    };
    Ok(match format {
        Format::Json => to_json(&out),
        _ => format!(
            "measured {} ({}), expected {} ({}), success {}\n\
             success probability {:.6}\n\
             grover oracle calls {} vs sign-query reduction {} (k = {})\n",
            out.measured,
            out.measured_bits,
            out.expected,
            out.expected_bits,
            out.success,
            out.success_probability,
            out.grover_calls,
            out.reduction_calls,
            out.k
        ),
    })
}
