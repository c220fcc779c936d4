//! Statevector laboratory for reducing unstructured search to sign
//! estimation.
//!
//! Given a phase oracle that marks one label `m` of an `n`-bit register, each
//! bit of `m` is encoded in the sign of a single amplitude of an `(n + 1)`-qubit
//! state prepared with one oracle query. A procedure that reads amplitude
//! signs from `k` copies therefore finds `m` with `k * n` queries. The crate
//! simulates the construction exactly, accounts for every query, and compares
//! against Grover search and a measurement-only sign estimator.
//!
//! Modules:
//! - [`state`]: real statevector and gate kernels.
//! - [`oracle`]: phase oracles and the query ledger.
//! - [`sign`]: sign queries (omniscient and sampling).
//! - [`scaling`]: copy-cost study of the sampling estimator.
//! - [`reduction`]: state preparation, bit readout, recovery, Grover baseline.
//! - [`sat`]: DIMACS CNF tooling and CNF-backed oracles.

pub mod oracle;
pub mod reduction;
pub mod sat;
pub mod scaling;
pub mod sign;
pub mod state;

pub use oracle::{marked_count, marked_oracle, MarkedSpec, OracleError, PhaseOracle, QueryLedger};
pub use reduction::{
    grover_iterations, grover_search, prepare_phi0, prepare_readout_state, read_bit,
    recover_marked_state, GroverRun, ReductionError, ReductionRun, RunReport, READOUT_LABEL,
};
pub use sat::{
    brute_force_solutions, compile_oracle, evaluate, generate_unique_instance, parse_dimacs,
    parse_dimacs_bytes, render_dimacs, Assignment, CnfFormula, DimacsError, Literal, ParseOptions,
    SatError,
};
pub use scaling::{scaling_study, ScalingRow, ScalingTable};
pub use sign::{omniscient_sign, sampling_sign, Omniscient, Sign, SignError, SignOracle, SignQueryResult};
pub use state::{BasisLabel, QubitIndex, RandomSource, StateError, StateVector};
