//! Real-amplitude statevector and the in-place gate kernels used by the
//! readout circuit.
//!
//! Qubits are numbered from 1. Qubit 1 is the most significant bit of a
//! basis label and qubit `q` (the ancilla, when one is present) is the least
//! significant bit, so `|0...0>|1>` has integer label 1.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::RangeInclusive;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::PhaseOracle;

/// Largest register the simulator will allocate (2^24 amplitudes, 128 MiB).
pub const MAX_QUBITS: u32 = 24;

/// Tolerance used when deciding whether a state is normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("basis label {label} out of range for a {num_qubits}-qubit register")]
    LabelOutOfRange { label: u64, num_qubits: u32 },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: u32, num_qubits: u32 },
    #[error("register of {0} qubits is not supported (1..={MAX_QUBITS})")]
    Capacity(u32),
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    SameQubit(u32),
    #[error("rotation needs distinct basis labels, got {0} twice")]
    SameLabel(u64),
    #[error("control qubit {control} lies inside the target range {first}..={last}")]
    ControlOverlapsTargets { control: u32, first: u32, last: u32 },
    #[error("oracle of arity {arity} does not fit a {num_qubits}-qubit register with control {control:?}")]
    OracleMismatch {
        arity: u32,
        num_qubits: u32,
        control: Option<u32>,
    },
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("amplitude vector contains a non-finite entry at {0}")]
    NonFinite(usize),
    #[error("state is not normalized (squared norm {0})")]
    Unnormalized(f64),
}

/// Integer label of a computational basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisLabel(pub u64);

impl BasisLabel {
    /// Renders the label as a bit string of the given width, most significant
    /// bit (qubit 1) first.
    pub fn bit_string(self, width: u32) -> String {
        (1..=width)
            .map(|i| if self.bit(i, width) { '1' } else { '0' })
            .collect()
    }

    /// Value of qubit `qubit` (1-based, MSB first) in a `width`-bit label.
    #[inline]
    pub fn bit(self, qubit: u32, width: u32) -> bool {
        (self.0 >> (width - qubit)) & 1 == 1
    }
}

impl From<u64> for BasisLabel {
    fn from(v: u64) -> Self {
        BasisLabel(v)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// 1-based qubit position. Validated against the register when a gate is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitIndex(pub u32);

impl fmt::Display for QubitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Seeded random stream. Identical seeds give identical sample streams.
///
/// Child streams are derived with [`RandomSource::fork`], which keeps every
/// component of a run reproducible from a single root seed.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child stream. The child seed is the first word
    /// of ChaCha8 keyed by this seed on stream `index`; it does not depend on
    /// how much of the parent stream has been consumed.
    pub fn fork(&self, index: u64) -> RandomSource {
        let mut keyed = ChaCha8Rng::seed_from_u64(self.seed);
        keyed.set_stream(index.wrapping_add(1));
        RandomSource::new(keyed.next_u64())
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Real amplitudes over the 2^q basis labels of a q-qubit register.
///
/// Every kernel here is a real orthogonal map, so the representation never
/// needs a complex component. This is deliberately not a general simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: u32,
    amps: Vec<f64>,
}

impl StateVector {
    /// Computational basis state `|label>` on `num_qubits` qubits.
    pub fn new_basis(num_qubits: u32, label: BasisLabel) -> Result<Self, StateError> {
        check_capacity(num_qubits)?;
        let dim = 1u64 << num_qubits;
        if label.0 >= dim {
            return Err(StateError::LabelOutOfRange {
                label: label.0,
                num_qubits,
            });
        }
        let mut amps = vec![0.0; dim as usize];
        amps[label.0 as usize] = 1.0;
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps an explicit amplitude vector. The length must be a power of two
    /// and every entry finite; normalization is the caller's business.
    pub fn from_amplitudes(amps: Vec<f64>) -> Result<Self, StateError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros();
        check_capacity(num_qubits)?;
        if let Some(i) = amps.iter().position(|a| !a.is_finite()) {
            return Err(StateError::NonFinite(i));
        }
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amps
    }

    pub fn amplitude(&self, label: BasisLabel) -> Result<f64, StateError> {
        self.check_label(label)?;
        Ok(self.amps[label.0 as usize])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    fn check_label(&self, label: BasisLabel) -> Result<(), StateError> {
        if label.0 >= self.amps.len() as u64 {
            return Err(StateError::LabelOutOfRange {
                label: label.0,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Bit mask of a qubit inside a label.
    fn mask(&self, qubit: QubitIndex) -> Result<usize, StateError> {
        if qubit.0 == 0 || qubit.0 > self.num_qubits {
            return Err(StateError::QubitOutOfRange {
                qubit: qubit.0,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1usize << (self.num_qubits - qubit.0))
    }

    pub fn hadamard(&mut self, qubit: QubitIndex) -> Result<(), StateError> {
        let stride = self.mask(qubit)?;
        butterfly(&mut self.amps, stride, |_| true);
        Ok(())
    }

    /// Hadamard on every qubit in `qubits`.
    pub fn hadamard_range(&mut self, qubits: RangeInclusive<u32>) -> Result<(), StateError> {
        for q in qubits {
            self.hadamard(QubitIndex(q))?;
        }
        Ok(())
    }

    /// Controlled-Z; symmetric in its two qubits.
    pub fn cz(&mut self, a: QubitIndex, b: QubitIndex) -> Result<(), StateError> {
        if a == b {
            return Err(StateError::SameQubit(a.0));
        }
        let both = self.mask(a)? | self.mask(b)?;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & both == both {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Walsh-Hadamard transform over the contiguous `targets`, applied only
    /// on the subspace where `control` is 1.
    pub fn controlled_hadamard_block(
        &mut self,
        targets: RangeInclusive<QubitIndex>,
        control: QubitIndex,
    ) -> Result<(), StateError> {
        let (first, last) = (targets.start().0, targets.end().0);
        let control_mask = self.mask(control)?;
        if (first..=last).contains(&control.0) {
            return Err(StateError::ControlOverlapsTargets {
                control: control.0,
                first,
                last,
            });
        }
        for q in first..=last {
            let stride = self.mask(QubitIndex(q))?;
            butterfly(&mut self.amps, stride, |i| i & control_mask != 0);
        }
        Ok(())
    }

    /// Multiplies each amplitude by the oracle phase f(x) of its main-register
    /// label. The main register is the top `oracle.arity()` qubits. With a
    /// control, only labels whose control bit is 1 are touched; the control
    /// has to sit below the main register.
    ///
    /// Counts as exactly one query regardless of register size or whether the
    /// control ever fires.
    pub fn apply_phase_oracle(
        &mut self,
        oracle: &PhaseOracle,
        control: Option<QubitIndex>,
    ) -> Result<(), StateError> {
        let arity = oracle.arity();
        let mismatch = || StateError::OracleMismatch {
            arity,
            num_qubits: self.num_qubits,
            control: control.map(|c| c.0),
        };
        if arity > self.num_qubits {
            return Err(mismatch());
        }
        let control_mask = match control {
            Some(c) if c.0 <= arity || c.0 > self.num_qubits => return Err(mismatch()),
            Some(c) => self.mask(c)?,
            None => 0,
        };
        let shift = self.num_qubits - arity;
        oracle.record_invocation();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & control_mask == control_mask && oracle.is_marked((i >> shift) as u64) {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Rotation in the plane of `|a>` and `|b>`:
    /// `a' = cos t * a + sin t * b`, `b' = -sin t * a + cos t * b`.
    pub fn givens(&mut self, a: BasisLabel, b: BasisLabel, angle: f64) -> Result<(), StateError> {
        if a == b {
            return Err(StateError::SameLabel(a.0));
        }
        self.check_label(a)?;
        self.check_label(b)?;
        let (s, c) = angle.sin_cos();
        let (ia, ib) = (a.0 as usize, b.0 as usize);
        let (va, vb) = (self.amps[ia], self.amps[ib]);
        self.amps[ia] = c * va + s * vb;
        self.amps[ib] = -s * va + c * vb;
        Ok(())
    }

    /// Reflection about the uniform superposition, `2|+><+| - I`.
    pub fn reflect_about_uniform(&mut self) {
        let mean = self.amps.iter().sum::<f64>() / self.amps.len() as f64;
        for amp in &mut self.amps {
            *amp = 2.0 * mean - *amp;
        }
    }

    /// Draws one measurement outcome in the computational basis. The state is
    /// left untouched; copy accounting belongs to the caller.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BasisLabel, StateError> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::Unnormalized(norm));
        }
        let u: f64 = rng.gen::<f64>() * norm;
        let mut acc = 0.0;
        let mut last_support = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a * a;
            if p == 0.0 {
                continue;
            }
            acc += p;
            last_support = i;
            if u < acc {
                return Ok(BasisLabel(i as u64));
            }
        }
        // rounding left u past the final partial sum
        Ok(BasisLabel(last_support as u64))
    }
}

fn check_capacity(num_qubits: u32) -> Result<(), StateError> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(StateError::Capacity(num_qubits));
    }
    Ok(())
}

/// Hadamard butterfly over pairs `(i, i + stride)` whose low index passes `keep`.
#[inline]
fn butterfly(amps: &mut [f64], stride: usize, keep: impl Fn(usize) -> bool) {
    for (block, chunk) in amps.chunks_exact_mut(2 * stride).enumerate() {
        let base = block * 2 * stride;
        let (lo, hi) = chunk.split_at_mut(stride);
        for (off, (x, y)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            if keep(base + off) {
                let (a, b) = (*x, *y);
                *x = (a + b) * FRAC_1_SQRT_2;
                *y = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{marked_oracle, MarkedSpec};
    use proptest::prelude::*;
    use rand::{Rng, RngCore};

    const EXACT: f64 = 1e-12;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn random_state(num_qubits: u32, rng: &mut RandomSource) -> StateVector {
        let mut amps: Vec<f64> = (0..1usize << num_qubits)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn basis_states() {
        assert_eq!(
            StateVector::new_basis(1, BasisLabel(0)).unwrap().amplitudes(),
            &[1.0, 0.0]
        );
        assert_eq!(
            StateVector::new_basis(2, BasisLabel(3)).unwrap().amplitudes(),
            &[0.0, 0.0, 0.0, 1.0]
        );
        assert!(matches!(
            StateVector::new_basis(3, BasisLabel(8)),
            Err(StateError::LabelOutOfRange { label: 8, .. })
        ));
        assert!(matches!(
            StateVector::new_basis(0, BasisLabel(0)),
            Err(StateError::Capacity(0))
        ));
    }

    #[test]
    fn hadamard_single_qubit() {
        let mut s = StateVector::new_basis(1, BasisLabel(0)).unwrap();
        s.hadamard(QubitIndex(1)).unwrap();
        assert!(close(s.amplitudes(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 0.0));

        let mut s = StateVector::new_basis(1, BasisLabel(1)).unwrap();
        s.hadamard(QubitIndex(1)).unwrap();
        assert!(close(s.amplitudes(), &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2], 0.0));

        let orig = s.clone();
        s.hadamard(QubitIndex(1)).unwrap();
        s.hadamard(QubitIndex(1)).unwrap();
        assert!(close(s.amplitudes(), orig.amplitudes(), EXACT));

        assert!(s.hadamard(QubitIndex(2)).is_err());
        assert!(s.hadamard(QubitIndex(0)).is_err());
    }

    #[test]
    fn hadamard_acts_on_msb_for_qubit_one() {
        // |00> -> H on qubit 1 -> (|00> + |10>)/sqrt2, labels 0 and 2
        let mut s = StateVector::new_basis(2, BasisLabel(0)).unwrap();
        s.hadamard(QubitIndex(1)).unwrap();
        assert!(close(
            s.amplitudes(),
            &[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0],
            0.0
        ));
    }

    #[test]
    fn cz_examples() {
        let mut s = StateVector::new_basis(2, BasisLabel(3)).unwrap();
        s.cz(QubitIndex(1), QubitIndex(2)).unwrap();
        assert_eq!(s.amplitudes(), &[0.0, 0.0, 0.0, -1.0]);

        let mut s = StateVector::new_basis(2, BasisLabel(2)).unwrap();
        s.cz(QubitIndex(1), QubitIndex(2)).unwrap();
        assert_eq!(s.amplitudes(), &[0.0, 0.0, 1.0, 0.0]);

        assert_eq!(
            s.cz(QubitIndex(2), QubitIndex(2)),
            Err(StateError::SameQubit(2))
        );
    }

    #[test]
    fn cz_is_symmetric() {
        let mut rng = RandomSource::new(11);
        for _ in 0..100 {
            let q = rng.gen_range(2..=6);
            let a = QubitIndex(rng.gen_range(1..=q));
            let b = loop {
                let b = QubitIndex(rng.gen_range(1..=q));
                if b != a {
                    break b;
                }
            };
            let s = random_state(q, &mut rng);
            let mut ab = s.clone();
            let mut ba = s;
            ab.cz(a, b).unwrap();
            ba.cz(b, a).unwrap();
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn controlled_block_on_marked_branch() {
        // |11>|1>, H^2 over qubits 1..2 controlled on qubit 3
        let mut s = StateVector::new_basis(3, BasisLabel(0b111)).unwrap();
        s.controlled_hadamard_block(QubitIndex(1)..=QubitIndex(2), QubitIndex(3))
            .unwrap();
        let want = [0.0, 0.5, 0.0, -0.5, 0.0, -0.5, 0.0, 0.5];
        assert!(close(s.amplitudes(), &want, EXACT));

        let twice = {
            let mut t = s.clone();
            t.controlled_hadamard_block(QubitIndex(1)..=QubitIndex(2), QubitIndex(3))
                .unwrap();
            t
        };
        assert!(close(
            twice.amplitudes(),
            StateVector::new_basis(3, BasisLabel(7))
                .unwrap()
                .amplitudes(),
            EXACT
        ));
    }

    #[test]
    fn controlled_block_idle_when_control_is_zero() {
        let mut rng = RandomSource::new(5);
        // random amplitudes restricted to ancilla = 0
        let mut amps = random_state(4, &mut rng).into_amplitudes();
        for (i, a) in amps.iter_mut().enumerate() {
            if i & 1 == 1 {
                *a = 0.0;
            }
        }
        let s = StateVector::from_amplitudes(amps).unwrap();
        let mut t = s.clone();
        t.controlled_hadamard_block(QubitIndex(1)..=QubitIndex(3), QubitIndex(4))
            .unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn controlled_block_rejects_overlap() {
        let mut s = StateVector::new_basis(3, BasisLabel(0)).unwrap();
        assert!(matches!(
            s.controlled_hadamard_block(QubitIndex(1)..=QubitIndex(3), QubitIndex(2)),
            Err(StateError::ControlOverlapsTargets { .. })
        ));
    }

    #[test]
    fn phase_oracle_examples() {
        let oracle = marked_oracle(MarkedSpec::new(2, BasisLabel(2)).unwrap()).unwrap();
        // |+>|+> over 3 qubits, controlled on the ancilla
        let mut s = StateVector::new_basis(3, BasisLabel(0)).unwrap();
        s.hadamard_range(1..=3).unwrap();
        let before = s.clone();
        s.apply_phase_oracle(&oracle, Some(QubitIndex(3))).unwrap();
        for i in 0..8 {
            let want = if i == 0b101 {
                -before.amplitudes()[i]
            } else {
                before.amplitudes()[i]
            };
            assert_eq!(s.amplitudes()[i], want);
        }
        assert_eq!(oracle.calls(), 1);

        // control never fires, query still spent
        let mut idle = StateVector::new_basis(3, BasisLabel(0b100)).unwrap();
        idle.apply_phase_oracle(&oracle, Some(QubitIndex(3))).unwrap();
        assert_eq!(idle.amplitudes()[0b100], 1.0);
        assert_eq!(oracle.calls(), 2);

        // involution, uncontrolled on the bare register
        let mut bare = StateVector::new_basis(2, BasisLabel(0)).unwrap();
        bare.hadamard_range(1..=2).unwrap();
        let orig = bare.clone();
        bare.apply_phase_oracle(&oracle, None).unwrap();
        assert_eq!(bare.amplitudes()[2], -orig.amplitudes()[2]);
        assert_eq!(bare.amplitudes()[0], orig.amplitudes()[0]);
        bare.apply_phase_oracle(&oracle, None).unwrap();
        assert_eq!(bare, orig);
        assert_eq!(oracle.calls(), 4);
    }

    #[test]
    fn phase_oracle_rejects_control_inside_register() {
        let oracle = marked_oracle(MarkedSpec::new(2, BasisLabel(1)).unwrap()).unwrap();
        let mut s = StateVector::new_basis(3, BasisLabel(0)).unwrap();
        assert!(s.apply_phase_oracle(&oracle, Some(QubitIndex(2))).is_err());
        let mut small = StateVector::new_basis(1, BasisLabel(0)).unwrap();
        assert!(small.apply_phase_oracle(&oracle, None).is_err());
        assert_eq!(oracle.calls(), 0);
    }

    #[test]
    fn amplitude_lookup() {
        let mut plus = StateVector::new_basis(1, BasisLabel(0)).unwrap();
        plus.hadamard(QubitIndex(1)).unwrap();
        assert_eq!(plus.amplitude(BasisLabel(0)).unwrap(), FRAC_1_SQRT_2);
        let b = StateVector::new_basis(2, BasisLabel(3)).unwrap();
        assert_eq!(b.amplitude(BasisLabel(0)).unwrap(), 0.0);
        assert!(b.amplitude(BasisLabel(4)).is_err());
    }

    #[test]
    fn givens_examples() {
        let mut rng = RandomSource::new(3);
        let s = random_state(3, &mut rng);
        let mut t = s.clone();
        t.givens(BasisLabel(1), BasisLabel(6), 0.0).unwrap();
        assert_eq!(s, t);

        let r = 1.0 / 8f64.sqrt();
        let mut amps = vec![r; 8];
        amps[5] = -r;
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.givens(BasisLabel(0), BasisLabel(5), std::f64::consts::FRAC_PI_4)
            .unwrap();
        let b = s.amplitude(BasisLabel(5)).unwrap();
        assert!((b * b - 0.25).abs() < EXACT);

        assert_eq!(
            s.givens(BasisLabel(2), BasisLabel(2), 1.0),
            Err(StateError::SameLabel(2))
        );
    }

    #[test]
    fn sampling() {
        let mut rng = RandomSource::new(1);
        let five = StateVector::new_basis(3, BasisLabel(5)).unwrap();
        for _ in 0..100 {
            assert_eq!(five.sample(&mut rng).unwrap(), BasisLabel(5));
        }

        let mut plus = StateVector::new_basis(1, BasisLabel(0)).unwrap();
        plus.hadamard(QubitIndex(1)).unwrap();
        let zeros = (0..100_000)
            .filter(|_| plus.sample(&mut rng).unwrap() == BasisLabel(0))
            .count();
        let freq = zeros as f64 / 1e5;
        assert!((freq - 0.5).abs() <= 0.01, "freq {freq}");

        let run = |seed| {
            let mut r = RandomSource::new(seed);
            (0..50)
                .map(|_| plus.sample(&mut r).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));

        let bad = StateVector::from_amplitudes(vec![1.0, 1.0]).unwrap();
        assert!(matches!(bad.sample(&mut rng), Err(StateError::Unnormalized(_))));
    }

    #[test]
    fn forks_are_stable_and_distinct() {
        let root = RandomSource::new(9);
        let mut consumed = root.clone();
        consumed.next_u64();
        assert_eq!(root.fork(3).seed(), consumed.fork(3).seed());
        assert_ne!(root.fork(3).seed(), root.fork(4).seed());
        assert_ne!(root.fork(0).seed(), root.seed());
    }

    #[test]
    fn walsh_hadamard_exhaustive() {
        for n in 1..=8u32 {
            let dim = 1u64 << n;
            let scale = 1.0 / (dim as f64).sqrt();
            for m in 0..dim {
                let mut s = StateVector::new_basis(n, BasisLabel(m)).unwrap();
                s.hadamard_range(1..=n).unwrap();
                for x in 0..dim {
                    let parity = (x & m).count_ones() % 2;
                    let want = if parity == 0 { scale } else { -scale };
                    let got = s.amplitudes()[x as usize];
                    assert!((got - want).abs() <= EXACT, "n={n} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn bit_string_is_msb_first() {
        assert_eq!(BasisLabel(1).bit_string(3), "001");
        assert_eq!(BasisLabel(37).bit_string(6), "100101");
        assert!(BasisLabel(4).bit(1, 3));
        assert!(!BasisLabel(4).bit(3, 3));
    }

    fn arb_state(max_qubits: u32) -> impl Strategy<Value = StateVector> {
        (1..=max_qubits)
            .prop_flat_map(|q| proptest::collection::vec(-1.0f64..1.0, 1usize << q))
            .prop_filter_map("zero vector", |mut v| {
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if norm < 1e-3 {
                    return None;
                }
                v.iter_mut().for_each(|a| *a /= norm);
                StateVector::from_amplitudes(v).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gates_preserve_norm_and_involute(s in arb_state(12), picks in any::<(u32, u32, u64, u64)>(), angle in -7.0f64..7.0) {
            let q = s.num_qubits();
            let a = QubitIndex(picks.0 % q + 1);
            let b = QubitIndex(picks.1 % q + 1);
            let dim = s.dim() as u64;

            let mut t = s.clone();
            t.hadamard(a).unwrap();
            prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            t.hadamard(a).unwrap();
            prop_assert!(close(t.amplitudes(), s.amplitudes(), EXACT));

            if a != b {
                let mut t = s.clone();
                t.cz(a, b).unwrap();
                prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
                t.cz(a, b).unwrap();
                prop_assert_eq!(&t, &s);
            }

            if q >= 2 {
                let mut t = s.clone();
                let ctrl = QubitIndex(q);
                t.controlled_hadamard_block(QubitIndex(1)..=QubitIndex(q - 1), ctrl).unwrap();
                prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
                t.controlled_hadamard_block(QubitIndex(1)..=QubitIndex(q - 1), ctrl).unwrap();
                prop_assert!(close(t.amplitudes(), s.amplitudes(), EXACT));
            }

            let m = picks.2 % dim;
            let oracle = marked_oracle(MarkedSpec::new(q, BasisLabel(m)).unwrap()).unwrap();
            let mut t = s.clone();
            t.apply_phase_oracle(&oracle, None).unwrap();
            prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
            t.apply_phase_oracle(&oracle, None).unwrap();
            prop_assert_eq!(&t, &s);

            let (ga, gb) = (picks.2 % dim, picks.3 % dim);
            if ga != gb {
                let mut t = s.clone();
                t.givens(BasisLabel(ga), BasisLabel(gb), angle).unwrap();
                prop_assert!((t.norm_sqr() - s.norm_sqr()).abs() < EXACT);
                prop_assert!(t.amplitudes().iter().all(|a| a.is_finite()));
            }

            let mut t = s.clone();
            t.reflect_about_uniform();
            prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        }
    }
}
