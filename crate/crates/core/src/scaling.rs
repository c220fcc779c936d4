//! Copy-cost scaling of the sampling sign estimator.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::sign::{sampling_sign, Sign, SignError};
use crate::state::{BasisLabel, RandomSource, StateError, StateVector};

/// Per-trial copy budget is this many times the dimension 2^n.
pub const DEFAULT_BUDGET_FACTOR: u64 = 400;

/// Largest register the study will simulate by default.
pub const MAX_STUDY_QUBITS: u32 = 16;

pub const CSV_HEADER: &str = "n,median_copies,trials,censored";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: u32,
    /// Median copies to decision; censored trials count at the full budget.
    pub median_copies: f64,
    pub trials: usize,
    /// Trials that ran out of budget.
    pub censored: usize,
    /// Decided trials whose sign disagreed with the planted one.
    pub wrong: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ScalingTable {
    pub confidence_goal: f64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    /// Serializes as CSV with header `n,median_copies,trials,censored`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.n, r.median_copies, r.trials, r.censored).unwrap();
        }
        out
    }

    /// Least-squares slope of log2(median copies) against n. `None` with
    /// fewer than two distinct widths.
    pub fn log2_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.median_copies > 0.0)
            .map(|r| (r.n as f64, r.median_copies.log2()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        Some(sxy / sxx)
    }

    /// Whether medians never decrease as n grows.
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].median_copies >= w[0].median_copies)
    }
}

/// Planted ±1/sqrt(N) state with a positive reference label and a target.
fn plant(n: u32, rng: &mut RandomSource) -> Result<(StateVector, BasisLabel, BasisLabel, Sign), StateError> {
    let dim = 1u64 << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut amps: Vec<f64> = (0..dim)
        .map(|_| if rng.gen::<bool>() { scale } else { -scale })
        .collect();
    let reference = rng.gen_range(0..dim);
    let target = (reference + rng.gen_range(1..dim)) % dim;
    amps[reference as usize] = scale;
    let sign = Sign::of(amps[target as usize]);
    Ok((
        StateVector::from_amplitudes(amps)?,
        BasisLabel(target),
        BasisLabel(reference),
        sign,
    ))
}

enum TrialOutcome {
    Decided { copies: u64, correct: bool },
    Censored { budget: u64 },
}

fn run_trial(n: u32, confidence_goal: f64, budget: u64, mut rng: RandomSource) -> Result<TrialOutcome, SignError> {
    let (state, target, reference, planted) = plant(n, &mut rng)?;
    match sampling_sign(|| state.clone(), target, reference, budget, confidence_goal, &mut rng) {
        Ok(r) => Ok(TrialOutcome::Decided {
            copies: r.copies_used,
            correct: r.sign == planted,
        }),
        Err(SignError::Inconclusive { .. }) => Ok(TrialOutcome::Censored { budget }),
        Err(e) => Err(e),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// Runs `trials` planted sign queries per width with the default budget.
pub fn scaling_study(
    n_range: &[u32],
    confidence_goal: f64,
    trials: usize,
    rng: &RandomSource,
) -> Result<ScalingTable, SignError> {
    scaling_study_with_budget(n_range, confidence_goal, trials, DEFAULT_BUDGET_FACTOR, rng)
}

/// Trial `t` at width `n` draws from `rng.fork(n).fork(t)`, so the table is
/// identical however the trials are scheduled.
pub fn scaling_study_with_budget(
    n_range: &[u32],
    confidence_goal: f64,
    trials: usize,
    budget_factor: u64,
    rng: &RandomSource,
) -> Result<ScalingTable, SignError> {
    let mut table = ScalingTable {
        confidence_goal,
        rows: Vec::new(),
    };
    if trials == 0 {
        return Ok(table);
    }
    for &n in n_range {
        if n == 0 || n > MAX_STUDY_QUBITS {
            return Err(StateError::Capacity(n).into());
        }
        let budget = budget_factor.max(1) << n;
        let per_n = rng.fork(n as u64);
        let outcomes = (0..trials as u64)
            .into_par_iter()
            .map(|t| run_trial(n, confidence_goal, budget, per_n.fork(t)))
            .collect::<Result<Vec<_>, _>>()?;

        let mut censored = 0;
        let mut wrong = 0;
        let copies = outcomes
            .into_iter()
            .map(|o| match o {
                TrialOutcome::Decided { copies, correct } => {
                    wrong += usize::from(!correct);
                    copies as f64
                }
                TrialOutcome::Censored { budget } => {
                    censored += 1;
                    budget as f64
                }
            })
            .collect();
        table.rows.push(ScalingRow {
            n,
            median_copies: median(copies),
            trials,
            censored,
            wrong,
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_when_no_trials() {
        let t = scaling_study(&[3, 4], 0.99, 0, &RandomSource::new(1)).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.to_csv(), "n,median_copies,trials,censored\n");
        assert_eq!(t.log2_slope(), None);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = scaling_study(&[3, 4], 0.99, 9, &RandomSource::new(8)).unwrap();
        let b = scaling_study(&[3, 4], 0.99, 9, &RandomSource::new(8)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a, b);
    }

    #[test]
    fn cost_roughly_doubles_per_qubit() {
        let t = scaling_study(&[3, 4], 0.99, 41, &RandomSource::new(21)).unwrap();
        let ratio = t.rows[1].median_copies / t.rows[0].median_copies;
        assert!((1.5..=2.7).contains(&ratio), "ratio {ratio}");
        assert!(t.is_monotone());
        assert!(t.rows.iter().all(|r| r.censored == 0 && r.wrong == 0));
    }

    #[test]
    fn tight_budget_is_censored_not_dropped() {
        let t = scaling_study_with_budget(&[5], 0.99, 7, 1, &RandomSource::new(4)).unwrap();
        assert_eq!(t.rows[0].trials, 7);
        assert_eq!(t.rows[0].censored, 7);
        assert_eq!(t.rows[0].median_copies, 32.0);
    }

    #[test]
    fn slope_of_exact_doubling() {
        let rows = (2..6)
            .map(|n| ScalingRow {
                n,
                median_copies: 3.0 * (1u64 << n) as f64,
                trials: 1,
                censored: 0,
                wrong: 0,
            })
            .collect();
        let t = ScalingTable {
            confidence_goal: 0.9,
            rows,
        };
        assert!((t.log2_slope().unwrap() - 1.0).abs() < 1e-12);
        let single = ScalingTable {
            confidence_goal: 0.9,
            rows: t.rows[..1].to_vec(),
        };
        assert_eq!(single.log2_slope(), None);
    }

    #[test]
    fn rejects_oversized_widths() {
        assert!(scaling_study(&[17], 0.99, 1, &RandomSource::new(0)).is_err());
    }
}
