//! Sign-of-amplitude queries over copies of a real state.
//!
//! Two realizations live here. [`Omniscient`] reads the stored amplitude and
//! needs one copy. [`sampling_sign`] only measures copies, rotating each one in
//! the plane of the target and a reference label of known positive sign; its
//! copy cost grows linearly with the dimension.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{BasisLabel, RandomSource, StateError, StateVector};

/// Default zero-amplitude guard for [`Omniscient`].
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// The bit a sign query writes on its output qubit: Plus reads as 0.
    pub fn bit(self) -> u8 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn of(value: f64) -> Sign {
        if value < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignQueryResult {
    pub sign: Sign,
    pub copies_used: u64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignError {
    #[error("amplitude {amplitude:e} at label {label} is within {epsilon:e} of zero")]
    ZeroAmplitude {
        label: u64,
        amplitude: f64,
        epsilon: f64,
    },
    #[error("no decision after {copies_used} copies ({hits} hits)")]
    Inconclusive { copies_used: u64, hits: u64 },
    #[error("both rotations hit equally often after {copies_used} copies; reference amplitude looks like zero")]
    BadReference { copies_used: u64 },
    #[error("sign query received no copies")]
    NoCopies,
    #[error("invalid sign query: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Returns the sign of the amplitude at `target` given copies of a state.
pub trait SignOracle {
    fn query(
        &mut self,
        copies: &[StateVector],
        target: BasisLabel,
    ) -> Result<SignQueryResult, SignError>;
}

/// Reads the amplitude straight out of the simulator. Uses one copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omniscient {
    pub epsilon: f64,
}

impl Default for Omniscient {
    fn default() -> Self {
        Omniscient {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl SignOracle for Omniscient {
    fn query(
        &mut self,
        copies: &[StateVector],
        target: BasisLabel,
    ) -> Result<SignQueryResult, SignError> {
        let first = copies.first().ok_or(SignError::NoCopies)?;
        omniscient_sign(first, target, self.epsilon)
    }
}

pub fn omniscient_sign(
    state: &StateVector,
    target: BasisLabel,
    epsilon: f64,
) -> Result<SignQueryResult, SignError> {
    if !(epsilon > 0.0) {
        return Err(SignError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let amplitude = state.amplitude(target)?;
    let sign = if amplitude > epsilon {
        Sign::Plus
    } else if amplitude < -epsilon {
        Sign::Minus
    } else {
        return Err(SignError::ZeroAmplitude {
            label: target.0,
            amplitude,
            epsilon,
        });
    };
    Ok(SignQueryResult {
        sign,
        copies_used: 1,
        confidence: 1.0,
    })
}

/// Anytime two-sided deviation bound for a ±1 walk after `hits` steps at
/// overall error `delta`. The per-step error `delta / (h (h + 1))` sums to
/// `delta`, and Hoeffding gives `P(|S_h| >= d) <= 2 exp(-d^2 / 2h)`.
fn hoeffding_radius(hits: u64, delta: f64) -> f64 {
    let h = hits as f64;
    (2.0 * h * (2.0 * h * (h + 1.0) / delta).ln()).sqrt()
}

/// Error level at which a walk excursion `d` after `hits` steps becomes
/// significant; the inverse of [`hoeffding_radius`].
fn hoeffding_level(hits: u64, d: f64) -> f64 {
    let h = hits as f64;
    (2.0 * h * (h + 1.0) * (-d * d / (2.0 * h)).exp()).min(1.0)
}

/// Estimates the sign of the amplitude at `target` by measuring fresh copies.
///
/// The reference amplitude must be positive. Copies alternate between a
/// `+pi/4` and a `-pi/4` rotation in the (reference, target) plane, after
/// which the target is hit with probability `(a_t - a_r)^2 / 2` and
/// `(a_t + a_r)^2 / 2` respectively. Every hit is a ±1 step (+1 for the
/// `+pi/4` arm); the walk drifts up iff `a_t < 0`.
///
/// Stopping rule: after `h` hits with walk position `d`, decide as soon as
/// `|d| >= sqrt(2 h ln(2 h (h + 1) / delta))` with `delta = 1 - confidence_goal`.
/// If instead `|d| / h` plus that radius over `h` drops below 1/2, the two arms
/// hit at statistically equal rates and the query fails with
/// [`SignError::BadReference`]. Exhausting `budget` copies gives
/// [`SignError::Inconclusive`].
pub fn sampling_sign<F>(
    mut prepare: F,
    target: BasisLabel,
    reference: BasisLabel,
    budget: u64,
    confidence_goal: f64,
    rng: &mut RandomSource,
) -> Result<SignQueryResult, SignError>
where
    F: FnMut() -> StateVector,
{
    if target == reference {
        return Err(SignError::InvalidArgument(
            "target and reference must differ".into(),
        ));
    }
    if budget == 0 {
        return Err(SignError::InvalidArgument("budget must be at least 1".into()));
    }
    if !(confidence_goal > 0.0 && confidence_goal < 1.0) {
        return Err(SignError::InvalidArgument(format!(
            "confidence goal must lie in (0, 1), got {confidence_goal}"
        )));
    }
    let delta = 1.0 - confidence_goal;
    let (mut hits, mut walk) = (0u64, 0i64);

    for copy in 0..budget {
        let mut state = prepare();
        let plus_arm = copy % 2 == 0;
        let angle = if plus_arm { FRAC_PI_4 } else { -FRAC_PI_4 };
        state.givens(reference, target, angle)?;
        if state.sample(rng)? != target {
            continue;
        }
        hits += 1;
        walk += if plus_arm { 1 } else { -1 };

        let d = walk.unsigned_abs() as f64;
        let radius = hoeffding_radius(hits, delta);
        if d >= radius {
            return Ok(SignQueryResult {
                sign: if walk > 0 { Sign::Minus } else { Sign::Plus },
                copies_used: copy + 1,
                confidence: 1.0 - hoeffding_level(hits, d),
            });
        }
        if (d + radius) / (hits as f64) < 0.5 {
            return Err(SignError::BadReference {
                copies_used: copy + 1,
            });
        }
    }
    Err(SignError::Inconclusive {
        copies_used: budget,
        hits,
    })
}
