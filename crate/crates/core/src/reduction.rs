//! Marked-state recovery through sign queries, plus a Grover baseline.
//!
//! Registers here are `n + 1` qubits: the search register on qubits `1..=n`
//! and one ancilla on qubit `n + 1` (the least significant bit).

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::oracle::{PhaseOracle, QueryLedger};
use crate::sign::{Sign, SignError, SignOracle};
use crate::state::{BasisLabel, QubitIndex, RandomSource, StateError, StateVector, MAX_QUBITS};

/// Basis label `|0...0>|1>` whose sign carries the readout bit.
pub const READOUT_LABEL: BasisLabel = BasisLabel(1);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("sign query on bit {j} saw a zero amplitude; the oracle does not mark exactly one label")]
    MalformedOracle { j: u32 },
    #[error("register width {n} does not match oracle arity {arity}")]
    ArityMismatch { n: u32, arity: u32 },
    #[error("bit index {j} outside 1..={n}")]
    BitOutOfRange { j: u32, n: u32 },
    #[error("need at least one copy per sign query")]
    NoCopies,
    #[error("register width {0} is outside the supported range")]
    Capacity(u32),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Sign(#[from] SignError),
}

fn check_width(oracle: &PhaseOracle, min: u32) -> Result<u32, ReductionError> {
    let n = oracle.arity();
    if n < min || n + 1 > MAX_QUBITS {
        return Err(ReductionError::Capacity(n));
    }
    Ok(n)
}

/// Prepares the flagged uniform state
/// `(1/sqrt N) sum_{x != m} |x>|0> + (1/sqrt N) |m>|1>`
/// with one controlled oracle application.
///
/// Assumes the oracle marks exactly one label; nothing here checks that, so
/// that the counted path is exactly the circuit.
pub fn prepare_phi0(oracle: &PhaseOracle, ledger: &mut QueryLedger) -> Result<StateVector, ReductionError> {
    let n = check_width(oracle, 1)?;
    let ancilla = QubitIndex(n + 1);
    let mut state = StateVector::new_basis(n + 1, BasisLabel(0))?;
    state.hadamard_range(1..=n)?;
    state.hadamard(ancilla)?;
    state.apply_phase_oracle(oracle, Some(ancilla))?;
    ledger.record_oracle_call();
    state.hadamard(ancilla)?;
    Ok(state)
}

/// Input to the sign query for bit `j`: CZ between qubit `j` and the
/// ancilla, then a Walsh-Hadamard over the search register controlled on the
/// ancilla. The amplitude at [`READOUT_LABEL`] is `(-1)^{m_j} / N`: the
/// ancilla-1 branch carries probability `1/N` and the transform spreads it
/// evenly over the search register.
pub fn prepare_readout_state(
    oracle: &PhaseOracle,
    j: QubitIndex,
    ledger: &mut QueryLedger,
) -> Result<StateVector, ReductionError> {
    let n = check_width(oracle, 1)?;
    if j.0 == 0 || j.0 > n {
        return Err(ReductionError::BitOutOfRange { j: j.0, n });
    }
    let ancilla = QubitIndex(n + 1);
    let mut state = prepare_phi0(oracle, ledger)?;
    state.cz(j, ancilla)?;
    state.controlled_hadamard_block(QubitIndex(1)..=QubitIndex(n), ancilla)?;
    Ok(state)
}

/// One bit of the marked label together with what the sign query reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitReadout {
    pub j: u32,
    pub bit: u8,
    pub sign: Sign,
    /// Copies the sign oracle actually used.
    pub copies: u64,
}

/// Reads bit `j` of the marked label: prepares `k` fresh copies of the
/// readout state (k queries) and asks the sign oracle about `|0...0>|1>`.
/// Plus reads as 0 and Minus as 1.
pub fn read_bit<S: SignOracle + ?Sized>(
    oracle: &PhaseOracle,
    j: QubitIndex,
    sign_oracle: &mut S,
    k: u64,
    ledger: &mut QueryLedger,
) -> Result<BitReadout, ReductionError> {
    if k == 0 {
        return Err(ReductionError::NoCopies);
    }
    let copies = (0..k)
        .map(|_| prepare_readout_state(oracle, j, ledger))
        .collect::<Result<Vec<_>, _>>()?;
    ledger.record_copies(k);
    let result = sign_oracle
        .query(&copies, READOUT_LABEL)
        .map_err(|e| match e {
            SignError::ZeroAmplitude { .. } => ReductionError::MalformedOracle { j: j.0 },
            other => other.into(),
        })?;
    Ok(BitReadout {
        j: j.0,
        bit: result.sign.bit(),
        sign: result.sign,
        copies: result.copies_used,
    })
}

/// Outcome of a full recovery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionRun {
    pub n: u32,
    pub recovered: BasisLabel,
    pub ledger: QueryLedger,
    pub per_bit: Vec<BitReadout>,
}

impl ReductionRun {
    pub fn per_bit_signs(&self) -> Vec<Sign> {
        self.per_bit.iter().map(|b| b.sign).collect()
    }
}

/// Recovers the marked label one bit at a time, `k` oracle queries per bit,
/// `k * n` in total.
pub fn recover_marked_state<S: SignOracle + ?Sized>(
    oracle: &PhaseOracle,
    n: u32,
    sign_oracle: &mut S,
    k: u64,
) -> Result<ReductionRun, ReductionError> {
    if n != oracle.arity() {
        return Err(ReductionError::ArityMismatch {
            n,
            arity: oracle.arity(),
        });
    }
    check_width(oracle, 1)?;
    let mut ledger = QueryLedger::new(k);
    let mut recovered = 0u64;
    let mut per_bit = Vec::with_capacity(n as usize);
    for j in 1..=n {
        let readout = read_bit(oracle, QubitIndex(j), sign_oracle, k, &mut ledger)?;
        recovered |= u64::from(readout.bit) << (n - j);
        per_bit.push(readout);
    }
    Ok(ReductionRun {
        n,
        recovered: BasisLabel(recovered),
        ledger,
        per_bit,
    })
}

/// Grover iterations for one marked item among 2^n: floor(pi/4 * sqrt(2^n)).
pub fn grover_iterations(n: u32) -> u64 {
    (PI / 4.0 * ((1u64 << n) as f64).sqrt()).floor() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroverRun {
    pub label: BasisLabel,
    pub iterations: u64,
    pub oracle_calls: u64,
    /// Probability mass on marked labels just before measurement, read from
    /// the simulator.
    pub success_probability: f64,
}

/// Amplified state after the fixed schedule, with the number of oracle calls.
pub fn grover_state(oracle: &PhaseOracle, n: u32) -> Result<(StateVector, u64), ReductionError> {
    if n != oracle.arity() {
        return Err(ReductionError::ArityMismatch {
            n,
            arity: oracle.arity(),
        });
    }
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(ReductionError::Capacity(n));
    }
    let mut state = StateVector::new_basis(n, BasisLabel(0))?;
    state.hadamard_range(1..=n)?;
    let iterations = grover_iterations(n);
    for _ in 0..iterations {
        state.apply_phase_oracle(oracle, None)?;
        state.reflect_about_uniform();
    }
    Ok((state, iterations))
}

/// Standard amplitude amplification from `|+>^n` with a single terminal
/// measurement. Success is probabilistic and reported, not enforced.
pub fn grover_search(oracle: &PhaseOracle, n: u32, rng: &mut RandomSource) -> Result<GroverRun, ReductionError> {
    let (state, iterations) = grover_state(oracle, n)?;
    let success_probability = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(x, _)| oracle.is_marked(*x as u64))
        .map(|(_, a)| a * a)
        .sum();
    let label = state.sample(rng)?;
    Ok(GroverRun {
        label,
        iterations,
        oracle_calls: iterations,
        success_probability,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitReport {
    pub j: u32,
    pub sign: Sign,
    pub copies: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub grover_calls: u64,
    pub success: bool,
    pub measured: u64,
    pub measured_bits: String,
    pub success_probability: f64,
}

/// Serializable summary of a recovery run. Labels appear both as integers
/// and as MSB-first bit strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_expected: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_expected_bits: Option<String>,
    pub m_recovered: u64,
    pub m_recovered_bits: String,
    pub k: u64,
    pub oracle_calls: u64,
    pub copies_consumed: u64,
    pub per_bit: Vec<BitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineReport>,
}

impl RunReport {
    pub fn new(run: &ReductionRun, expected: Option<BasisLabel>) -> Self {
        RunReport {
            n: run.n,
            m_expected: expected.map(|m| m.0),
            m_expected_bits: expected.map(|m| m.bit_string(run.n)),
            m_recovered: run.recovered.0,
            m_recovered_bits: run.recovered.bit_string(run.n),
            k: run.ledger.k,
            oracle_calls: run.ledger.oracle_calls,
            copies_consumed: run.ledger.copies_consumed,
            per_bit: run
                .per_bit
                .iter()
                .map(|b| BitReport {
                    j: b.j,
                    sign: b.sign,
                    copies: b.copies,
                })
                .collect(),
            baseline: None,
        }
    }

    pub fn with_baseline(mut self, grover: &GroverRun, success: bool) -> Self {
        self.baseline = Some(BaselineReport {
            grover_calls: grover.oracle_calls,
            success,
            measured: grover.label.0,
            measured_bits: grover.label.bit_string(self.n),
            success_probability: grover.success_probability,
        });
        self
    }
}
