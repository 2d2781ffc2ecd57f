//! Dense state-vector simulation for up to 16 qubits.
//!
//! Amplitude index bit `n - 1 - j` holds qubit `j`, so qubit 0 is the most
//! significant bit and basis labels read left to right like Pauli strings.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::code::{canonical_code_8_1_3, StabilizerCode};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

pub const MAX_DENSE_QUBITS: usize = 16;

/// Tolerance on the squared norm of states handed to public operations.
pub const NORM_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `i^k`
#[inline]
fn i_pow(k: u32) -> Complex64 {
    match k & 3 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    Zero,
    One,
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Cx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateOp {
    pub kind: GateKind,
    /// Target qubit, or (control, target) for `Cx`.
    pub targets: [usize; 2],
}

impl GateOp {
    pub fn single(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            targets: [q, q],
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cx,
            targets: [control, target],
        }
    }

    fn matrix(self) -> Option<[[Complex64; 2]; 2]> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let t = Complex64::from_polar(1.0, FRAC_PI_4);
        Some(match self.kind {
            GateKind::H => [[h, h], [h, -h]],
            GateKind::S => [[ONE, ZERO], [ZERO, I]],
            GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
            GateKind::T => [[ONE, ZERO], [ZERO, t]],
            GateKind::Tdg => [[ONE, ZERO], [ZERO, t.conj()]],
            GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Cx => return None,
        })
    }
}

/// A Pauli operator compiled to amplitude-index masks:
/// `P|x> = coeff · (-1)^{popcount(x & sign)} |x ^ flip>`.
#[derive(Clone, Copy, Debug)]
pub struct IndexedPauli {
    flip: usize,
    sign: usize,
    coeff: Complex64,
}

impl IndexedPauli {
    pub fn new(p: &PauliOperator) -> Self {
        let n = p.num_qubits();
        let (mut flip, mut sign) = (0usize, 0usize);
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if (p.x_mask() >> q) & 1 == 1 {
                flip |= bit;
            }
            if (p.z_mask() >> q) & 1 == 1 {
                sign |= bit;
            }
        }
        // Y|b> = i(-1)^b|b^1>, so each Y contributes a factor i.
        let ys = (p.x_mask() & p.z_mask()).count_ones();
        Self {
            flip,
            sign,
            coeff: i_pow(p.phase_exp() as u32 + ys),
        }
    }

    #[inline]
    fn factor(&self, x: usize) -> Complex64 {
        if (x & self.sign).count_ones() % 2 == 0 {
            self.coeff
        } else {
            -self.coeff
        }
    }

    /// `out = P·input`
    pub fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (x, a) in input.iter().enumerate() {
            out[x ^ self.flip] = self.factor(x) * a;
        }
    }

    /// `<ψ|P|ψ>`
    pub fn expectation(&self, amps: &[Complex64]) -> Complex64 {
        amps.iter()
            .enumerate()
            .map(|(x, a)| amps[x ^ self.flip].conj() * self.factor(x) * a)
            .sum()
    }

    /// Replaces `ψ` by `(ψ + s·Pψ)/2` for `s = ±1` (the eigenprojector).
    pub fn project(&self, amps: &mut [Complex64], s: f64) {
        self.project_scaled(amps, s, 0.5);
    }

    /// `ψ ← scale·(ψ + s·Pψ)`
    pub(crate) fn project_scaled(&self, amps: &mut [Complex64], s: f64, scale: f64) {
        if self.flip == 0 {
            for (x, a) in amps.iter_mut().enumerate() {
                *a = (*a + s * self.factor(x) * *a) * scale;
            }
            return;
        }
        for x in 0..amps.len() {
            let y = x ^ self.flip;
            if x < y {
                let (ax, ay) = (amps[x], amps[y]);
                // (Pψ)[y] = f(x) ψ[x], (Pψ)[x] = f(y) ψ[y]
                amps[x] = (ax + s * self.factor(y) * ay) * scale;
                amps[y] = (ay + s * self.factor(x) * ax) * scale;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    fn check_n(n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::UnsupportedQubitCount(0));
        }
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits { n });
        }
        Ok(())
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::InvalidArgument(format!(
                "{len} amplitudes is not 2^n"
            )));
        }
        let n = len.trailing_zeros() as usize;
        Self::check_n(n)?;
        Ok(Self { n, amps })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        s.amps[0] = ZERO;
        s.amps[index] = ONE;
        Ok(s)
    }

    /// Product state from per-qubit labels, qubit 0 first.
    pub fn prepare(inits: &[Init]) -> Result<Self> {
        let singles: Vec<[Complex64; 2]> = inits
            .iter()
            .map(|init| match init {
                Init::Zero => [ONE, ZERO],
                Init::One => [ZERO, ONE],
                Init::Plus => [Complex64::new(FRAC_1_SQRT_2, 0.0); 2],
            })
            .collect();
        Self::product(&singles)
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(singles: &[[Complex64; 2]]) -> Result<Self> {
        let n = singles.len();
        Self::check_n(n)?;
        let amps = (0..1usize << n)
            .map(|x| {
                singles
                    .iter()
                    .enumerate()
                    .map(|(q, s)| s[(x >> (n - 1 - q)) & 1])
                    .product()
            })
            .collect();
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::ZeroNormBranch);
        }
        let scale = 1.0 / norm.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(norm)
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        Ok(())
    }

    pub fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(q)?;
        let bit = self.bit(q);
        for x in 0..self.amps.len() {
            if x & bit == 0 {
                let (a0, a1) = (self.amps[x], self.amps[x | bit]);
                self.amps[x] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[x | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: GateOp) -> Result<()> {
        match gate.matrix() {
            Some(m) => self.apply_single(gate.targets[0], m),
            None => {
                let [c, t] = gate.targets;
                self.check_qubit(c)?;
                self.check_qubit(t)?;
                if c == t {
                    return Err(Error::InvalidArgument("CX control equals target".into()));
                }
                let (cb, tb) = (self.bit(c), self.bit(t));
                for x in 0..self.amps.len() {
                    if x & cb != 0 && x & tb == 0 {
                        self.amps.swap(x, x | tb);
                    }
                }
                Ok(())
            }
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        self.check_size(p.num_qubits())?;
        let compiled = IndexedPauli::new(p);
        let mut out = vec![ZERO; self.amps.len()];
        compiled.apply_into(&self.amps, &mut out);
        self.amps = out;
        Ok(())
    }

    pub fn expectation(&self, p: &PauliOperator) -> Result<f64> {
        self.check_size(p.num_qubits())?;
        Ok(IndexedPauli::new(p).expectation(&self.amps).re)
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::SizeMismatch {
                left: n,
                right: self.n,
            });
        }
        Ok(())
    }

    /// Applies `exp(-iθ Σ_j Z_j)`: basis state `|x>` picks up
    /// `exp(-iθ (n - 2 wt(x)))`.
    pub fn apply_collective_z(&mut self, theta: f64) {
        let phases = collective_z_phases(self.n, theta);
        self.apply_weight_phases(&phases);
    }

    pub(crate) fn apply_weight_phases(&mut self, phases: &[Complex64]) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            *a *= phases[x.count_ones() as usize];
        }
    }

    /// Probability mass per Hamming-weight sector.
    pub fn excitation_spectrum(&self) -> BTreeMap<usize, f64> {
        let mut spectrum = BTreeMap::new();
        for (x, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                *spectrum.entry(x.count_ones() as usize).or_insert(0.0) += p;
            }
        }
        spectrum
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_size(other.n)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Projects onto the joint +1 eigenspace of the signed generators.
    /// Returns the squared norm of the projection and, when it exceeds
    /// `1e-12`, the renormalized image.
    pub fn codespace_projection(&self, code: &StabilizerCode) -> Result<(f64, Option<StateVector>)> {
        self.project_onto(code.generators())
    }

    pub(crate) fn project_onto(&self, ops: &[PauliOperator]) -> Result<(f64, Option<StateVector>)> {
        let mut out = self.clone();
        for g in ops {
            self.check_size(g.num_qubits())?;
            IndexedPauli::new(g).project(&mut out.amps, 1.0);
        }
        let p = out.norm_sqr();
        if p > 1e-12 {
            out.normalize()?;
            Ok((p, Some(out)))
        } else {
            Ok((p, None))
        }
    }
}

pub(crate) fn collective_z_phases(n: usize, theta: f64) -> Vec<Complex64> {
    (0..=n)
        .map(|w| Complex64::from_polar(1.0, -theta * (n as f64 - 2.0 * w as f64)))
        .collect()
}

/// `|<a|b>|`
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

fn check_normalized(alpha: Complex64, beta: Complex64) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized(norm));
    }
    Ok(())
}

/// Order of the three single-qubit gates in the encoder's `S H T†` box,
/// written as a matrix product (rightmost acts first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GateOrder {
    #[serde(rename = "S*H*Tdg")]
    SHTdg,
    #[serde(rename = "Tdg*H*S")]
    TdgHS,
    #[serde(rename = "H*S*Tdg")]
    HSTdg,
    #[serde(rename = "S*Tdg*H")]
    STdgH,
    #[serde(rename = "Tdg*S*H")]
    TdgSH,
    #[serde(rename = "H*Tdg*S")]
    HTdgS,
}

impl GateOrder {
    /// Candidates in the order they are tried.
    pub const ALL: [GateOrder; 6] = [
        GateOrder::SHTdg,
        GateOrder::TdgHS,
        GateOrder::HSTdg,
        GateOrder::STdgH,
        GateOrder::TdgSH,
        GateOrder::HTdgS,
    ];

    /// Gates in application order.
    fn sequence(self) -> [GateKind; 3] {
        use GateKind::{Tdg, H, S};
        match self {
            GateOrder::SHTdg => [Tdg, H, S],
            GateOrder::TdgHS => [S, H, Tdg],
            GateOrder::HSTdg => [Tdg, S, H],
            GateOrder::STdgH => [H, Tdg, S],
            GateOrder::TdgSH => [H, S, Tdg],
            GateOrder::HTdgS => [S, Tdg, H],
        }
    }
}

/// Runs the [[8,1,3]] encoding circuit with a chosen gate order.
pub fn encode_8_1_3_with(alpha: Complex64, beta: Complex64, order: GateOrder) -> Result<StateVector> {
    check_normalized(alpha, beta)?;
    // second input is S·X|ψ> = S(β|0> + α|1>)
    let input = [beta, I * alpha];
    let zero = [ONE, ZERO];
    let one = [ZERO, ONE];
    let plus = [Complex64::new(FRAC_1_SQRT_2, 0.0); 2];
    let mut state = StateVector::product(&[plus, input, zero, zero, one, one, one, one])?;
    let mut circuit = vec![GateOp::cx(0, 3), GateOp::cx(1, 2), GateOp::cx(0, 1), GateOp::cx(0, 2)];
    for q in 0..4 {
        circuit.extend(order.sequence().map(|kind| GateOp::single(kind, q)));
    }
    circuit.extend((0..4).map(|q| GateOp::cx(q, q + 4)));
    for gate in circuit {
        state.apply_gate(gate)?;
    }
    Ok(state)
}

/// The first gate order whose circuit output lies in the [[8,1,3]] codespace
/// for a spanning set of inputs.
pub fn resolve_encoder_gate_order() -> Result<GateOrder> {
    static RESOLVED: OnceLock<Option<GateOrder>> = OnceLock::new();
    let code = canonical_code_8_1_3();
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let probes = [(ONE, ZERO), (ZERO, ONE), (h, h), (h, I * h)];
    let found = RESOLVED.get_or_init(|| {
        GateOrder::ALL.into_iter().find(|&order| {
            probes.iter().all(|&(a, b)| {
                encode_8_1_3_with(a, b, order)
                    .and_then(|s| s.codespace_projection(&code))
                    .is_ok_and(|(p, _)| p >= 1.0 - NORM_TOLERANCE)
            })
        })
    });
    found.ok_or_else(|| Error::ConstructionCheck("no gate order encodes into the codespace".into()))
}

/// `α|0_L> + β|1_L>` of the [[8,1,3]] code via the encoding circuit.
pub fn encode_8_1_3(alpha: Complex64, beta: Complex64) -> Result<StateVector> {
    encode_8_1_3_with(alpha, beta, resolve_encoder_gate_order()?)
}

/// The same logical state built directly from the outer `|±Y>` codewords
/// followed by the dual-rail pairing.
pub fn codeword_oracle_r2(alpha: Complex64, beta: Complex64) -> Result<StateVector> {
    check_normalized(alpha, beta)?;
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let plus_y = [h, I * h];
    let minus_y = [h, -I * h];
    let outer = |singles: [[Complex64; 2]; 4]| StateVector::product(&singles);
    let a = outer([plus_y, minus_y, minus_y, plus_y])?;
    let b = outer([minus_y, plus_y, plus_y, minus_y])?;
    let c = outer([plus_y; 4])?;
    let d = outer([minus_y; 4])?;
    let outer_amps: Vec<Complex64> = (0..16)
        .map(|x| {
            alpha * h * (a.amps[x] + b.amps[x]) + beta * h * (c.amps[x] - d.amps[x])
        })
        .collect();
    // append |1111>, then CX(i -> i+4): partner bit is the complement.
    let mut amps = vec![ZERO; 256];
    for (x, &amp) in outer_amps.iter().enumerate() {
        amps[(x << 4) | (!x & 0xF)] = amp;
    }
    let mut state = StateVector::from_amplitudes(amps)?;
    state.normalize()?;
    Ok(state)
}

/// Logical basis states `|b_L>` of a code (n ≤ 16), with `|b_L> =
/// X̄^b |0_L>` and `|0_L>` the joint +1 eigenstate of generators and logical Z.
#[derive(Clone, Debug)]
pub struct LogicalBasis {
    n: usize,
    k: usize,
    states: Vec<StateVector>,
}

impl LogicalBasis {
    pub fn new(code: &StabilizerCode) -> Result<Self> {
        let n = code.n();
        StateVector::check_n(n)?;
        if code.logical_x().len() != code.k() {
            return Err(Error::ConstructionCheck("code has no logical operators".into()));
        }
        let mut ops = code.generators().to_vec();
        ops.extend(code.logical_z().iter().map(|z| z.with_phase(0)));
        // A generic state overlaps every one-dimensional stabilizer space.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
        let mut zero = None;
        for _ in 0..8 {
            let amps = (0..1usize << n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let mut seed = StateVector::from_amplitudes(amps)?;
            seed.normalize()?;
            if let (p, Some(s)) = seed.project_onto(&ops)? {
                if p > 1e-8 {
                    zero = Some(s);
                    break;
                }
            }
        }
        let mut zero = zero.ok_or(Error::ZeroNormBranch)?;
        fix_global_phase(&mut zero);
        let k = code.k();
        let mut states = Vec::with_capacity(1 << k);
        for b in 0..1usize << k {
            let mut s = zero.clone();
            for (i, lx) in code.logical_x().iter().enumerate() {
                if (b >> i) & 1 == 1 {
                    s.apply_pauli(&lx.with_phase(0))?;
                }
            }
            states.push(s);
        }
        Ok(Self { n, k, states })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// `Σ_b c_b |b_L>`; coefficients must be normalized.
    pub fn encode(&self, coefficients: &[Complex64]) -> Result<StateVector> {
        if coefficients.len() != self.states.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} logical amplitudes, got {}",
                self.states.len(),
                coefficients.len()
            )));
        }
        let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(norm));
        }
        let mut amps = vec![ZERO; 1 << self.n];
        for (c, s) in coefficients.iter().zip(&self.states) {
            if *c != ZERO {
                for (a, b) in amps.iter_mut().zip(&s.amps) {
                    *a += c * b;
                }
            }
        }
        StateVector::from_amplitudes(amps)
    }
}

/// Rotates the global phase so the largest amplitude is real and positive.
fn fix_global_phase(s: &mut StateVector) {
    let Some(max) = s
        .amps
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
    else {
        return;
    };
    if max.norm() > 0.0 {
        let rot = max.conj() / max.norm();
        s.amps.iter_mut().for_each(|a| *a *= rot);
    }
}
