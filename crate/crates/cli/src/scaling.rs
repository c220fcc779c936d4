//! `signlab scaling`: copies-to-decision of the sampling sign estimator.

use clap::Args;
use serde::Serialize;

use signlab::scaling::MAX_STUDY_QUBITS;
use signlab::{scaling_study, RandomSource, ScalingTable};

use crate::error::to_json;
use crate::{CliError, Format, SCALING_STREAM};

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Smallest register width.
    #[arg(long, default_value_t = 4)]
    n_min: u32,
    /// Largest register width.
    #[arg(long, default_value_t = 10)]
    n: u32,
    /// Planted instances per width.
    #[arg(long, default_value_t = 31)]
    trials: usize,
    /// Confidence goal of each sign decision.
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
}

#[derive(Debug, Serialize)]
struct ScalingOutput {
    command: &'static str,
    seed: u64,
    #[serde(flatten)]
    table: ScalingTable,
    log2_slope: Option<f64>,
    monotone: bool,
}

pub fn run(args: &ScalingArgs, seed: u64, format: Format) -> Result<String, CliError> {
    if args.n_min == 0 || args.n_min > args.n {
        return Err(CliError::Usage(format!(
            "need 1 <= --n-min <= --n, got {}..{}",
            args.n_min, args.n
        )));
    }
    if args.n > MAX_STUDY_QUBITS {
        return Err(CliError::Capacity(format!(
            "scaling study is limited to n <= {MAX_STUDY_QUBITS}, got {}",
            args.n
        )));
    }
    if !(args.confidence > 0.0 && args.confidence < 1.0) {
        return Err(CliError::Usage("--confidence must lie strictly between 0 and 1".into()));
    }
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }

    let widths: Vec<u32> = (args.n_min..=args.n).collect();
    let rng = RandomSource::new(seed).fork(SCALING_STREAM);
    let table = scaling_study(&widths, args.confidence, args.trials, &rng).map_err(|e| CliError::CheckFailed {
        message: e.to_string(),
        report: String::new(),
    })?;
    let slope = table.log2_slope();

    Ok(match format {
        Format::Csv => {
            match slope {
                Some(s) => eprintln!("log2 slope of median copies vs n: {s:.3}"),
                None => eprintln!("log2 slope: n/a (single width)"),
            }
            table.to_csv()
        }
        Format::Json => to_json(&ScalingOutput {
            command: "scaling",
            seed,
            monotone: table.is_monotone(),
            log2_slope: slope,
            table,
        }),
        Format::Text => {
            let mut s = format!(
                "sampling sign estimator, confidence {}, {} trials per width\n",
                args.confidence, args.trials
            );
            s.push_str(&format!("{:>3} {:>14} {:>8} {:>6}\n", "n", "median_copies", "censored", "wrong"));
            for r in &table.rows {
                s.push_str(&format!(
                    "{:>3} {:>14.1} {:>8} {:>6}\n",
                    r.n, r.median_copies, r.censored, r.wrong
                ));
            }
            match slope {
                Some(v) => s.push_str(&format!("log2 slope: {v:.3}\n")),
                None => s.push_str("log2 slope: n/a\n"),
            }
            s
        }
    })
}
