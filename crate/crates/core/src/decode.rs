//! Depolarizing sampling, the composite channel, syndrome extraction and
//! lookup-table correction.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::code::StabilizerCode;
use crate::error::{Error, Result};
use crate::pauli::{PauliKind, PauliOperator, SymplecticBasis};
use crate::state::{collective_z_phases, IndexedPauli, LogicalBasis, StateVector, MAX_DENSE_QUBITS};

/// Fidelity shortfall still counted as a perfect recovery.
pub const SUCCESS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelOrdering {
    /// Depolarizing noise first, then the collective rotation.
    CcAfterPauli,
    /// Collective rotation first, then depolarizing noise.
    PauliAfterCc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseConfig {
    pub p: f64,
    /// Collective rotation time in units where ħ/2 = 1.
    pub delta_t: f64,
    pub ordering: ChannelOrdering,
}

impl NoiseConfig {
    pub fn new(p: f64, delta_t: f64, ordering: ChannelOrdering) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
        }
        Ok(Self { p, delta_t, ordering })
    }
}

/// Syndrome bits, bit `i` for generator `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome {
    bits: u128,
    len: usize,
}

impl Syndrome {
    pub fn new(bits: u128, len: usize) -> Self {
        Self { bits, len }
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.bits == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }
}

impl std::ops::BitXor for Syndrome {
    type Output = Syndrome;
    fn bitxor(self, rhs: Syndrome) -> Syndrome {
        Syndrome::new(self.bits ^ rhs.bits, self.len.max(rhs.len))
    }
}

/// Printed generator 0 first.
impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Syndrome({self})")
    }
}

impl Serialize for Syndrome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Anticommutation pattern of `e` with the generators; signs are ignored.
pub fn pauli_syndrome(e: &PauliOperator, code: &StabilizerCode) -> Result<Syndrome> {
    if e.num_qubits() != code.n() {
        return Err(Error::SizeMismatch {
            left: e.num_qubits(),
            right: code.n(),
        });
    }
    Ok(syndrome_of(e, code.generators()))
}

pub(crate) fn syndrome_of(e: &PauliOperator, gens: &[PauliOperator]) -> Syndrome {
    let bits = gens
        .iter()
        .enumerate()
        .filter(|(_, g)| !e.commutes_unchecked(g))
        .fold(0u128, |acc, (i, _)| acc | 1 << i);
    Syndrome::new(bits, gens.len())
}

/// Projectively measures each signed generator in turn. Bit `i` is 0 for the
/// +1 eigenvalue. Returns the outcomes and the collapsed, renormalized state.
pub fn measure_syndrome<R: Rng + ?Sized>(
    state: &StateVector,
    code: &StabilizerCode,
    rng: &mut R,
) -> Result<(Syndrome, StateVector)> {
    if state.num_qubits() != code.n() {
        return Err(Error::SizeMismatch {
            left: state.num_qubits(),
            right: code.n(),
        });
    }
    let compiled: Vec<IndexedPauli> = code.generators().iter().map(IndexedPauli::new).collect();
    let mut amps = state.amplitudes().to_vec();
    let syndrome = measure_compiled(&mut amps, &compiled, rng)?;
    Ok((syndrome, StateVector::from_amplitudes(amps)?))
}

fn measure_compiled<R: Rng + ?Sized>(
    amps: &mut [Complex64],
    gens: &[IndexedPauli],
    rng: &mut R,
) -> Result<Syndrome> {
    let mut bits = 0u128;
    // each projection below renormalizes, so the norm is only summed once
    let mut norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    for (i, g) in gens.iter().enumerate() {
        let expectation = g.expectation(amps).re / norm;
        let p_plus = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
        let u: f64 = rng.gen();
        let (sign, p) = if u < p_plus { (1.0, p_plus) } else { (-1.0, 1.0 - p_plus) };
        if p <= 0.0 {
            return Err(Error::ZeroNormBranch);
        }
        if sign < 0.0 {
            bits |= 1 << i;
        }
        g.project_scaled(amps, sign, 0.5 / (norm * p).sqrt());
        norm = 1.0;
    }
    Ok(Syndrome::new(bits, gens.len()))
}

/// Syndrome → correction map for all weight-1 errors.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    entries: HashMap<Syndrome, PauliOperator>,
    syndrome_len: usize,
}

impl SyndromeTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn correction(&self, s: &Syndrome) -> Option<&PauliOperator> {
        self.entries.get(s)
    }

    pub fn contains(&self, s: &Syndrome) -> bool {
        self.entries.contains_key(s)
    }

    /// Entries sorted by syndrome string.
    pub fn entries(&self) -> Vec<(Syndrome, PauliOperator)> {
        let mut v: Vec<_> = self.entries.iter().map(|(s, p)| (*s, *p)).collect();
        v.sort_by_key(|(s, _)| s.to_string());
        v
    }

    pub fn syndrome_len(&self) -> usize {
        self.syndrome_len
    }
}

/// Enumerates weight-1 errors (qubit ascending, X < Y < Z); the first error
/// with a given syndrome becomes its correction.
pub fn build_lookup(code: &StabilizerCode) -> Result<SyndromeTable> {
    let n = code.n();
    let basis = code.stabilizer_basis();
    let m = code.generators().len();
    let mut entries = HashMap::new();
    entries.insert(Syndrome::new(0, m), PauliOperator::identity(n)?);
    for q in 0..n {
        for kind in PauliKind::NON_IDENTITY {
            let e = PauliOperator::single(n, q, kind)?;
            let s = syndrome_of(&e, code.generators());
            match entries.get(&s) {
                None => {
                    entries.insert(s, e);
                }
                Some(existing) => {
                    if !basis.contains_mod_phase(&existing.mul_unchecked(&e))? {
                        return Err(Error::NotWeightOneCorrecting {
                            first: existing.to_string(),
                            second: e.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(SyndromeTable {
        entries,
        syndrome_len: m,
    })
}

/// Independent per-qubit depolarizing draw: identity with probability `1-p`,
/// otherwise X, Y, Z with probability `p/3` each.
pub fn sample_depolarizing<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<PauliOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let (mut x, mut z) = (0u128, 0u128);
    for q in 0..n {
        let u: f64 = rng.gen();
        if u < p {
            let kind = PauliKind::NON_IDENTITY[((u / p) * 3.0).min(2.0) as usize];
            match kind {
                PauliKind::X => x |= 1 << q,
                PauliKind::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                _ => z |= 1 << q,
            }
        }
    }
    PauliOperator::from_masks(n, x, z, 0)
}

/// Logical input of a shot.
#[derive(Clone, Debug, PartialEq)]
pub enum LogicalInput {
    Basis(usize),
    /// One amplitude per logical basis state.
    Amplitudes(Vec<Complex64>),
}

impl LogicalInput {
    /// `α|0_L> + β|1_L>` for single-logical-qubit codes.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Self {
        LogicalInput::Amplitudes(vec![alpha, beta])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotResult {
    pub success: bool,
    pub heralded_uncorrectable: bool,
    pub sampled_error: PauliOperator,
    pub syndrome: Syndrome,
}

/// Everything a shot needs, precomputed once per code.
#[derive(Clone, Debug)]
pub struct ShotRunner {
    code: StabilizerCode,
    table: SyndromeTable,
    logical: LogicalBasis,
    compiled: Vec<IndexedPauli>,
}

impl ShotRunner {
    pub fn new(code: &StabilizerCode) -> Result<Self> {
        if code.n() > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { n: code.n() });
        }
        Ok(Self {
            code: code.clone(),
            table: build_lookup(code)?,
            logical: LogicalBasis::new(code)?,
            compiled: code.generators().iter().map(IndexedPauli::new).collect(),
        })
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn table(&self) -> &SyndromeTable {
        &self.table
    }

    pub fn logical_basis(&self) -> &LogicalBasis {
        &self.logical
    }

    pub fn ideal_state(&self, input: &LogicalInput) -> Result<StateVector> {
        match input {
            LogicalInput::Basis(b) => self
                .logical
                .states()
                .get(*b)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("logical basis index {b} out of range"))),
            LogicalInput::Amplitudes(c) => self.logical.encode(c),
        }
    }

    /// Samples a depolarizing error and runs the shot.
    pub fn run<R: Rng + ?Sized>(&self, input: &LogicalInput, noise: &NoiseConfig, rng: &mut R) -> Result<ShotResult> {
        let ideal = self.ideal_state(input)?;
        let error = sample_depolarizing(self.code.n(), noise.p, rng)?;
        self.run_prepared(&ideal, error, noise.delta_t, noise.ordering, rng)
    }

    /// Runs a shot with a given Pauli error in place of the sampled one.
    pub fn run_with_error<R: Rng + ?Sized>(
        &self,
        input: &LogicalInput,
        error: &PauliOperator,
        delta_t: f64,
        ordering: ChannelOrdering,
        rng: &mut R,
    ) -> Result<ShotResult> {
        if error.num_qubits() != self.code.n() {
            return Err(Error::SizeMismatch {
                left: error.num_qubits(),
                right: self.code.n(),
            });
        }
        let ideal = self.ideal_state(input)?;
        self.run_prepared(&ideal, *error, delta_t, ordering, rng)
    }

    pub(crate) fn run_prepared<R: Rng + ?Sized>(
        &self,
        ideal: &StateVector,
        error: PauliOperator,
        delta_t: f64,
        ordering: ChannelOrdering,
        rng: &mut R,
    ) -> Result<ShotResult> {
        let n = self.code.n();
        if error.num_qubits() != n || ideal.num_qubits() != n {
            return Err(Error::SizeMismatch {
                left: error.num_qubits(),
                right: n,
            });
        }
        let phases = collective_z_phases(n, delta_t);
        let rotate = |amps: &mut [Complex64]| {
            for (x, a) in amps.iter_mut().enumerate() {
                *a *= phases[x.count_ones() as usize];
            }
        };
        let mut amps = ideal.amplitudes().to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); amps.len()];
        if ordering == ChannelOrdering::PauliAfterCc {
            rotate(&mut amps);
        }
        IndexedPauli::new(&error).apply_into(&amps, &mut scratch);
        std::mem::swap(&mut amps, &mut scratch);
        if ordering == ChannelOrdering::CcAfterPauli {
            rotate(&mut amps);
        }
        let syndrome = measure_compiled(&mut amps, &self.compiled, rng)?;
        let (heralded, success) = match self.table.correction(&syndrome) {
            Some(c) => {
                IndexedPauli::new(c).apply_into(&amps, &mut scratch);
                let overlap: Complex64 = ideal
                    .amplitudes()
                    .iter()
                    .zip(&scratch)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                (false, overlap.norm() >= 1.0 - SUCCESS_TOLERANCE)
            }
            None => (true, false),
        };
        Ok(ShotResult {
            success,
            heralded_uncorrectable: heralded,
            sampled_error: error,
            syndrome,
        })
    }
}

/// One shot with a freshly built runner. Prefer [`ShotRunner`] in loops.
pub fn run_shot<R: Rng + ?Sized>(
    code: &StabilizerCode,
    input: &LogicalInput,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<ShotResult> {
    ShotRunner::new(code)?.run(input, noise, rng)
}

/// Outcome class of an error after lookup decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualClass {
    /// Correction times error lies in the stabilizer group.
    Stabilizer,
    /// Correction times error is a nontrivial logical operator.
    Logical,
    /// Syndrome missing from the table; identity applied.
    Heralded,
}

/// Decodes a Pauli error symbolically (no rotation).
pub fn classify_error(
    e: &PauliOperator,
    code: &StabilizerCode,
    table: &SyndromeTable,
    basis: &SymplecticBasis,
) -> Result<(Syndrome, Option<PauliOperator>, ResidualClass)> {
    let s = pauli_syndrome(e, code)?;
    match table.correction(&s) {
        None => Ok((s, None, ResidualClass::Heralded)),
        Some(c) => {
            let residual = c.mul_unchecked(e);
            let class = if basis.contains_mod_phase(&residual)? {
                ResidualClass::Stabilizer
            } else {
                ResidualClass::Logical
            };
            Ok((s, Some(*c), class))
        }
    }
}

/// Draws a rotation time uniformly from `[0, 2π)`.
pub fn uniform_delta_t<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>() * TAU
}
