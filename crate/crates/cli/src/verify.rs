//! `signlab verify`: exhaustive checks over every marked label and bit.

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use signlab::{
    marked_oracle, prepare_phi0, prepare_readout_state, recover_marked_state, BasisLabel, MarkedSpec,
    Omniscient, QubitIndex, QueryLedger, READOUT_LABEL,
};

use crate::error::to_json;
use crate::{CliError, Format};

/// Largest width `verify` will sweep exhaustively.
pub const MAX_VERIFY_WIDTH: u32 = 14;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Sweep every width from 1 up to this one.
    #[arg(long, default_value_t = 8)]
    n: u32,
    /// Largest accepted amplitude deviation.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct Failure {
    n: u32,
    m: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<u32>,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    name: &'static str,
    description: &'static str,
    cases: u64,
    max_deviation: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_failure: Option<Failure>,
}

impl CheckReport {
    fn new(name: &'static str, description: &'static str) -> Self {
        CheckReport {
            name,
            description,
            cases: 0,
            max_deviation: 0.0,
            passed: true,
            first_failure: None,
        }
    }

    fn record(&mut self, deviation: f64, ok: bool, at: Failure) {
        self.cases += 1;
        self.max_deviation = self.max_deviation.max(deviation);
        if !ok && self.passed {
            self.passed = false;
            self.first_failure = Some(at);
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    command: &'static str,
    n_max: u32,
    tolerance: f64,
    passed: bool,
    checks: Vec<CheckReport>,
}

struct LabelOutcome {
    m: u64,
    flagged_dev: f64,
    flagged_shape_ok: bool,
    readout: Vec<(u32, f64)>,
    calls: u64,
    recovered: u64,
}

fn check_label(n: u32, m: u64) -> LabelOutcome {
    let dim = 1u64 << n;
    let oracle = marked_oracle(MarkedSpec::new(n, BasisLabel(m)).expect("m < 2^n")).expect("valid arity");
    let mut ledger = QueryLedger::new(1);

    let phi0 = prepare_phi0(&oracle, &mut ledger).expect("width within capacity");
    let want = 1.0 / (dim as f64).sqrt();
    let amps = phi0.amplitudes();
    let support: Vec<usize> = (0..amps.len()).filter(|&i| amps[i] != 0.0).collect();
    let flagged_dev = support.iter().map(|&i| (amps[i] - want).abs()).fold(0.0, f64::max);
    let flagged_shape_ok = support.len() as u64 == dim
        && support
            .iter()
            .all(|&i| (i & 1 == 1) == ((i >> 1) as u64 == m))
        && ledger.oracle_calls == 1;

    let readout = (1..=n)
        .map(|j| {
            let s = prepare_readout_state(&oracle, QubitIndex(j), &mut ledger).expect("valid bit");
            let parity = if BasisLabel(m).bit(j, n) { -1.0 } else { 1.0 };
            let a = s.amplitude(READOUT_LABEL).expect("label 1 exists");
            (j, (a - parity / dim as f64).abs())
        })
        .collect();

    let run = recover_marked_state(&oracle, n, &mut Omniscient::default(), 1);
    let (calls, recovered) = match run {
        Ok(r) => (r.ledger.oracle_calls, r.recovered.0),
        Err(_) => (u64::MAX, u64::MAX),
    };
    LabelOutcome {
        m,
        flagged_dev,
        flagged_shape_ok,
        readout,
        calls,
        recovered,
    }
}

pub fn run(args: &VerifyArgs, format: Format) -> Result<String, CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if args.n > MAX_VERIFY_WIDTH {
        return Err(CliError::Capacity(format!(
            "exhaustive verify is limited to n <= {MAX_VERIFY_WIDTH}, got {}",
            args.n
        )));
    }
    if !(args.tolerance >= 0.0) {
        return Err(CliError::Usage("--tolerance must be non-negative".into()));
    }
    if format == Format::Csv {
        return Err(CliError::Usage("verify supports text and json output".into()));
    }
    let tol = args.tolerance;

    let mut flagged = CheckReport::new(
        "flagged-state",
        "one query prepares amplitude 1/sqrt(N) on |x>|0> for x != m and on |m>|1>, nothing else",
    );
    let mut readout = CheckReport::new(
        "readout-sign",
        "amplitude of |0..0>|1> after CZ(j, ancilla) and controlled H^n is (-1)^m_j / N",
    );
    let mut count = CheckReport::new(
        "query-count",
        "recovery with the omniscient sign oracle (k=1) returns m using exactly n oracle calls",
    );

    for n in 1..=args.n {
        let outcomes: Vec<LabelOutcome> = (0..1u64 << n).into_par_iter().map(|m| check_label(n, m)).collect();
        for o in outcomes {
            let at = Failure { n, m: o.m, j: None };
            flagged.record(o.flagged_dev, o.flagged_shape_ok && o.flagged_dev <= tol, at);
            for (j, dev) in o.readout {
                readout.record(dev, dev <= tol, Failure { j: Some(j), ..at });
            }
            let deviation = o.calls.abs_diff(n as u64) as f64;
            count.record(deviation, o.calls == n as u64 && o.recovered == o.m, at);
        }
    }

    let checks = vec![flagged, readout, count];
    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        command: "verify",
        n_max: args.n,
        tolerance: tol,
        passed,
        checks,
    };
    let out = match format {
        Format::Json => to_json(&report),
        _ => render_text(&report),
    };
    if passed {
        Ok(out)
    } else {
        let c = report.checks.iter().find(|c| !c.passed).expect("some check failed");
        let f = c.first_failure.expect("failed check records its case");
        let j = f.j.map(|j| format!(", j={j}")).unwrap_or_default();
        Err(CliError::CheckFailed {
            message: format!(
                "{} failed at (n={}, m={}{j}); max deviation {:.3e} vs tolerance {:.3e}",
                c.name, f.n, f.m, c.max_deviation, tol
            ),
            report: out,
        })
    }
}

fn render_text(r: &VerifyReport) -> String {
    let mut out = format!("verify: widths 1..={}, tolerance {:e}\n", r.n_max, r.tolerance);
    out.push_str(&format!("{:<15} {:>9} {:>14}  status\n", "check", "cases", "max_deviation"));
    for c in &r.checks {
        let status = match (&c.first_failure, c.passed) {
            (_, true) => "ok".to_string(),
            (Some(f), false) => match f.j {
                Some(j) => format!("FAILED at n={} m={} j={j}", f.n, f.m),
                None => format!("FAILED at n={} m={}", f.n, f.m),
            },
            (None, false) => "FAILED".to_string(),
        };
        out.push_str(&format!(
            "{:<15} {:>9} {:>14.3e}  {status}\n",
            c.name, c.cases, c.max_deviation
        ));
    }
    out.push_str(if r.passed { "all checks passed\n" } else { "verification failed\n" });
    out
}
