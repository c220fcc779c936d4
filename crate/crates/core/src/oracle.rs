//! Phase oracles and query accounting.
//!
//! Sign convention: `f(x) = +1` for unmarked labels and `f(x) = -1` for marked
//! ones. Applying the oracle multiplies the amplitude of `|x>` by `f(x)`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::state::BasisLabel;

/// Largest arity [`marked_count`] will enumerate.
pub const MAX_ENUMERATION_ARITY: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("marked label {m} does not fit in {n} bits")]
    LabelOutOfRange { n: u32, m: u64 },
    #[error("oracle arity {0} is not supported (1..=63)")]
    BadArity(u32),
    #[error("arity {0} is above the enumeration bound of {MAX_ENUMERATION_ARITY}")]
    Capacity(u32),
}

type Predicate = dyn Fn(u64) -> bool + Send + Sync;

/// A ±1 phase oracle over `arity`-bit labels with an invocation counter.
///
/// Clones share the counter: a clone is another handle to the same oracle.
#[derive(Clone)]
pub struct PhaseOracle {
    arity: u32,
    marked: Arc<Predicate>,
    calls: Arc<AtomicU64>,
}

impl PhaseOracle {
    /// Builds an oracle from a "is this label marked" predicate.
    pub fn from_predicate<F>(arity: u32, marked: F) -> Result<Self, OracleError>
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        if arity == 0 || arity > 63 {
            return Err(OracleError::BadArity(arity));
        }
        Ok(PhaseOracle {
            arity,
            marked: Arc::new(marked),
            calls: Arc::new(AtomicU64::new(0)),
        })
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    /// Whether `x` is marked. Evaluating the predicate directly is not a
    /// query; only statevector applications are counted.
    #[inline]
    pub fn is_marked(&self, x: u64) -> bool {
        (self.marked)(x)
    }

    /// f(x) as a real phase.
    #[inline]
    pub fn phase(&self, x: u64) -> f64 {
        if self.is_marked(x) {
            -1.0
        } else {
            1.0
        }
    }

    /// Number of statevector applications so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub(crate) fn record_invocation(&self) {
        self.calls.fetch_add(1, Ordering::SeqCst);
    }
}

impl fmt::Debug for PhaseOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseOracle")
            .field("arity", &self.arity)
            .field("calls", &self.calls())
            .finish_non_exhaustive()
    }
}

/// Register width and marked label of a single-target search problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkedSpec {
    n: u32,
    m: BasisLabel,
}

impl MarkedSpec {
    pub fn new(n: u32, m: BasisLabel) -> Result<Self, OracleError> {
        if n == 0 || n > 63 {
            return Err(OracleError::BadArity(n));
        }
        if m.0 >> n != 0 {
            return Err(OracleError::LabelOutOfRange { n, m: m.0 });
        }
        Ok(MarkedSpec { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> BasisLabel {
        self.m
    }
}

/// Oracle negating exactly `|m>`.
pub fn marked_oracle(spec: MarkedSpec) -> Result<PhaseOracle, OracleError> {
    let m = spec.m.0;
    PhaseOracle::from_predicate(spec.n, move |x| x == m)
}

/// Counts marked labels by enumeration. Diagnostic only: does not touch the
/// query counter.
pub fn marked_count(oracle: &PhaseOracle) -> Result<u64, OracleError> {
    if oracle.arity() > MAX_ENUMERATION_ARITY {
        return Err(OracleError::Capacity(oracle.arity()));
    }
    Ok((0..1u64 << oracle.arity())
        .filter(|&x| oracle.is_marked(x))
        .count() as u64)
}

/// Oracle-call and copy accounting for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct QueryLedger {
    /// Copies handed to each sign query.
    pub k: u64,
    pub oracle_calls: u64,
    pub copies_consumed: u64,
}

impl QueryLedger {
    pub fn new(k: u64) -> Self {
        QueryLedger {
            k,
            ..Default::default()
        }
    }

    pub fn record_oracle_call(&mut self) {
        self.oracle_calls += 1;
    }

    pub fn record_copies(&mut self, copies: u64) {
        self.copies_consumed += copies;
    }

    /// Folds in a ledger from a partitioned sub-run.
    pub fn merge(&mut self, other: &QueryLedger) {
        self.oracle_calls += other.oracle_calls;
        self.copies_consumed += other.copies_consumed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{QubitIndex, StateVector};
    use std::thread;

    #[test]
    fn marked_oracle_case_split() {
        let o = marked_oracle(MarkedSpec::new(2, BasisLabel(3)).unwrap()).unwrap();
        assert_eq!(o.phase(3), -1.0);
        for x in 0..3 {
            assert_eq!(o.phase(x), 1.0);
        }

        let o = marked_oracle(MarkedSpec::new(1, BasisLabel(0)).unwrap()).unwrap();
        assert_eq!(o.phase(0), -1.0);
        assert_eq!(o.phase(1), 1.0);
    }

    #[test]
    fn marked_spec_range() {
        assert_eq!(
            MarkedSpec::new(3, BasisLabel(8)),
            Err(OracleError::LabelOutOfRange { n: 3, m: 8 })
        );
        assert!(MarkedSpec::new(0, BasisLabel(0)).is_err());
    }

    #[test]
    fn marked_count_is_uncounted() {
        for n in 1..=6 {
            for m in 0..1u64 << n {
                let o = marked_oracle(MarkedSpec::new(n, BasisLabel(m)).unwrap()).unwrap();
                assert_eq!(marked_count(&o).unwrap(), 1);
                assert_eq!(o.calls(), 0);
            }
        }
        let none = PhaseOracle::from_predicate(4, |_| false).unwrap();
        assert_eq!(marked_count(&none).unwrap(), 0);
        let wide = PhaseOracle::from_predicate(25, |_| false).unwrap();
        assert_eq!(marked_count(&wide), Err(OracleError::Capacity(25)));
    }

    #[test]
    fn counter_matches_shadow_under_threads() {
        let o = marked_oracle(MarkedSpec::new(3, BasisLabel(5)).unwrap()).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let o = o.clone();
                thread::spawn(move || {
                    let mut shadow = 0;
                    let mut s = StateVector::new_basis(4, BasisLabel(0)).unwrap();
                    for _ in 0..25 {
                        s.apply_phase_oracle(&o, Some(QubitIndex(4))).unwrap();
                        shadow += 1;
                    }
                    shadow
                })
            })
            .collect();
        let shadow: u64 = handles.into_iter().map(|h| h.join().unwrap()).sum();
        assert_eq!(o.calls(), shadow);
    }

    #[test]
    fn ledger_merge() {
        let mut a = QueryLedger::new(2);
        a.record_oracle_call();
        a.record_copies(2);
        let mut b = QueryLedger::new(2);
        b.record_oracle_call();
        b.record_oracle_call();
        a.merge(&b);
        assert_eq!(a.oracle_calls, 3);
        assert_eq!(a.copies_consumed, 2);
        assert_eq!(a.k, 2);
    }
}
