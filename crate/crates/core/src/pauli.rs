//! Signed n-qubit Pauli operators in binary-symplectic form.
//!
//! An operator is stored as `i^phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}` where each
//! `P_j` is one of the letters I, X, Y, Z and qubit `j` is bit `j` of the two
//! masks (`x` set for X or Y, `z` set for Z or Y). The letter Y is stored
//! literally, so `Y = i·X·Z` only enters when letters are multiplied.
//!
//! Qubit 0 is the leftmost character of the text form.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported qubit count (masks are `u128`).
pub const MAX_QUBITS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliKind {
    I,
    X,
    Y,
    Z,
}

impl PauliKind {
    /// The three non-identity letters in enumeration order.
    pub const NON_IDENTITY: [PauliKind; 3] = [PauliKind::X, PauliKind::Y, PauliKind::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            PauliKind::I => (false, false),
            PauliKind::X => (true, false),
            PauliKind::Y => (true, true),
            PauliKind::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliKind::I,
            (true, false) => PauliKind::X,
            (true, true) => PauliKind::Y,
            (false, true) => PauliKind::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliKind::I => 'I',
            PauliKind::X => 'X',
            PauliKind::Y => 'Y',
            PauliKind::Z => 'Z',
        }
    }
}

#[inline]
fn low_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: u128,
    z: u128,
    phase: u8,
}

impl PauliOperator {
    /// Builds an operator from raw masks. Bits at positions `>= n` must be clear.
    pub fn from_masks(n: usize, x: u128, z: u128, phase_exp: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(n));
        }
        let outside = !low_mask(n);
        if x & outside != 0 || z & outside != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits set beyond qubit count {n}"
            )));
        }
        Ok(Self {
            n,
            x,
            z,
            phase: phase_exp & 3,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_masks(n, 0, 0, 0)
    }

    /// A single letter on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, kind: PauliKind) -> Result<Self> {
        Self::from_sparse(n, &[(q, kind)])
    }

    /// Product of letters on distinct qubits, phase `+1`.
    pub fn from_sparse(n: usize, terms: &[(usize, PauliKind)]) -> Result<Self> {
        let mut p = Self::identity(n)?;
        for &(q, kind) in terms {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            if p.kind(q) != PauliKind::I {
                return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
            }
            let (xb, zb) = kind.bits();
            p.x |= (xb as u128) << q;
            p.z |= (zb as u128) << q;
        }
        Ok(p)
    }

    /// Parses a letter string over {I,X,Y,Z}; `sign` is +1 or -1.
    pub fn parse(text: &str, sign: i32) -> Result<Self> {
        let phase = match sign {
            1 => 0,
            -1 => 2,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "sign must be +1 or -1, got {other}"
                )))
            }
        };
        let n = text.chars().count();
        if n == 0 {
            return Err(Error::EmptyPauli);
        }
        if n > MAX_QUBITS {
            return Err(Error::UnsupportedQubitCount(n));
        }
        let (mut x, mut z) = (0u128, 0u128);
        for (position, symbol) in text.chars().enumerate() {
            let kind = match symbol {
                'I' => PauliKind::I,
                'X' => PauliKind::X,
                'Y' => PauliKind::Y,
                'Z' => PauliKind::Z,
                _ => return Err(Error::InvalidSymbol { position, symbol }),
            };
            let (xb, zb) = kind.bits();
            x |= (xb as u128) << position;
            z |= (zb as u128) << position;
        }
        Ok(Self { n, x, z, phase })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u128 {
        self.x
    }

    pub fn z_mask(&self) -> u128 {
        self.z
    }

    /// Global phase exponent: the operator carries `i^phase_exp`.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase_exp: u8) -> Self {
        self.phase = phase_exp & 3;
        self
    }

    pub fn negated(mut self) -> Self {
        self.phase = (self.phase + 2) & 3;
        self
    }

    pub fn kind(&self, q: usize) -> PauliKind {
        PauliKind::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    /// Letter string without the sign.
    pub fn letters(&self) -> String {
        (0..self.n).map(|q| self.kind(q).symbol()).collect()
    }

    pub fn support_mask(&self) -> u128 {
        self.x | self.z
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&q| (self.support_mask() >> q) & 1 == 1)
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Hermitian iff the phase is real (letters are all Hermitian).
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn same_masks(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let (ax, az, bx, bz) = (self.x, self.z, other.x, other.z);
        let (a_x, a_y, a_z) = (ax & !az, ax & az, !ax & az);
        let (b_x, b_y, b_z) = (bx & !bz, bx & bz, !bx & bz);
        // XY = iZ, YZ = iX, ZX = iY; reversed orders pick up -i.
        let plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x);
        let minus = (a_y & b_x) | (a_z & b_y) | (a_x & b_z);
        let local = plus.count_ones() as i64 - minus.count_ones() as i64;
        let phase = (self.phase as i64 + other.phase as i64 + local).rem_euclid(4) as u8;
        Self {
            n: self.n,
            x: ax ^ bx,
            z: az ^ bz,
            phase,
        }
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// Column `c` of the 2n-bit symplectic vector: x bits first, then z bits.
    pub(crate) fn column(&self, c: usize) -> bool {
        if c < self.n {
            (self.x >> c) & 1 == 1
        } else {
            (self.z >> (c - self.n)) & 1 == 1
        }
    }

    pub(crate) fn leading_column(&self) -> Option<usize> {
        if self.x != 0 {
            Some(self.x.trailing_zeros() as usize)
        } else if self.z != 0 {
            Some(self.n + self.z.trailing_zeros() as usize)
        } else {
            None
        }
    }
}

/// `P·Q` with exact phase.
pub fn multiply(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator> {
    p.check_size(q)?;
    Ok(p.mul_unchecked(q))
}

/// True iff the symplectic inner product vanishes.
pub fn commutes(p: &PauliOperator, q: &PauliOperator) -> Result<bool> {
    p.check_size(q)?;
    Ok(p.commutes_unchecked(q))
}

pub fn weight(p: &PauliOperator) -> usize {
    p.weight()
}

impl std::ops::Mul for PauliOperator {
    type Output = PauliOperator;

    /// Panics on a qubit-count mismatch; use [`multiply`] for a checked product.
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.n, rhs.n, "Pauli size mismatch");
        self.mul_unchecked(&rhs)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letters())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Accepts an optional prefix `+`, `-` (or `−`), `i`, `+i`, `-i`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i").or_else(|| s.strip_prefix("−i")) {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-').or_else(|| s.strip_prefix('−')) {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        Ok(Self::parse(body, 1)
            .map_err(|e| match e {
                // report positions relative to the full input
                Error::InvalidSymbol { position, symbol } => Error::InvalidSymbol {
                    position: position + (s.chars().count() - body.chars().count()),
                    symbol,
                },
                other => other,
            })?
            .with_phase(phase))
    }
}

/// GF(2) row space of a generator list, kept in reduced row-echelon form.
///
/// Rows keep their Pauli phase so that exact-phase membership can be decided
/// for commuting Hermitian generators.
#[derive(Clone, Debug)]
pub struct SymplecticBasis {
    n: usize,
    rows: Vec<PauliOperator>,
    pivots: Vec<usize>,
}

impl SymplecticBasis {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[PauliOperator] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Clears every pivot column of `p`; the residual has no pivot bits.
    pub fn reduce(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.n != self.n {
            return Err(Error::SizeMismatch {
                left: p.n,
                right: self.n,
            });
        }
        Ok(self.reduce_unchecked(p))
    }

    pub(crate) fn reduce_unchecked(&self, p: &PauliOperator) -> PauliOperator {
        let mut r = *p;
        for (row, &pivot) in self.rows.iter().zip(&self.pivots) {
            if r.column(pivot) {
                r = r.mul_unchecked(row);
            }
        }
        r
    }

    /// Adds `p` to the span. Returns false when it was already dependent.
    pub fn insert(&mut self, p: &PauliOperator) -> Result<bool> {
        let r = self.reduce(p)?;
        let Some(pivot) = r.leading_column() else {
            return Ok(false);
        };
        for row in self.rows.iter_mut() {
            if row.column(pivot) {
                *row = row.mul_unchecked(&r);
            }
        }
        let at = self.pivots.partition_point(|&c| c < pivot);
        self.rows.insert(at, r);
        self.pivots.insert(at, pivot);
        Ok(true)
    }

    pub fn contains_mod_phase(&self, p: &PauliOperator) -> Result<bool> {
        Ok(self.reduce(p)?.is_identity_up_to_phase())
    }

    /// Exact membership including phase. Meaningful when the spanning
    /// operators commute pairwise and are Hermitian (a stabilizer group).
    pub fn contains_exact(&self, p: &PauliOperator) -> Result<bool> {
        let r = self.reduce(p)?;
        Ok(r.is_identity_up_to_phase() && r.phase == 0)
    }
}

pub fn build_basis(n: usize, gens: &[PauliOperator]) -> Result<SymplecticBasis> {
    let mut basis = SymplecticBasis::new(n);
    for g in gens {
        basis.insert(g)?;
    }
    Ok(basis)
}

/// Membership of `e` in the group generated by `gens`.
pub fn in_group(e: &PauliOperator, gens: &[PauliOperator], mod_phase: bool) -> Result<bool> {
    let basis = build_basis(e.n, gens)?;
    if mod_phase {
        basis.contains_mod_phase(e)
    } else {
        basis.contains_exact(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    /// Bit string with qubit 0 leftmost.
    fn bits(mask: u128, n: usize) -> String {
        (0..n).map(|q| if (mask >> q) & 1 == 1 { '1' } else { '0' }).collect()
    }

    #[test]
    fn parse_masks_qubit_zero_leftmost() {
        let g0 = PauliOperator::parse("ZZXXIIXX", 1).unwrap();
        assert_eq!(bits(g0.x_mask(), 8), "00110011");
        assert_eq!(bits(g0.z_mask(), 8), "11000000");
        assert_eq!(g0.phase_exp(), 0);

        let id = PauliOperator::parse("IIII", 1).unwrap();
        assert_eq!((id.x_mask(), id.z_mask(), id.phase_exp()), (0, 0, 0));
        assert_eq!(id.num_qubits(), 4);

        let g3 = PauliOperator::parse("ZIIIZIII", -1).unwrap();
        assert_eq!(g3.x_mask(), 0);
        assert_eq!(bits(g3.z_mask(), 8), "10001000");
        assert_eq!(g3.phase_exp(), 2);
    }

    #[test]
    fn parse_errors_name_position() {
        assert_eq!(
            PauliOperator::parse("XXQX", 1),
            Err(Error::InvalidSymbol {
                position: 2,
                symbol: 'Q'
            })
        );
        assert_eq!(PauliOperator::parse("", 1), Err(Error::EmptyPauli));
        assert!(matches!(
            "-XA".parse::<PauliOperator>(),
            Err(Error::InvalidSymbol { position: 2, .. })
        ));
        assert!(PauliOperator::parse("X", 3).is_err());
    }

    #[test]
    fn sign_prefixes() {
        assert_eq!(p("-ZZ").phase_exp(), 2);
        assert_eq!(p("−ZZ").phase_exp(), 2);
        assert_eq!(p("+ZZ").phase_exp(), 0);
        assert_eq!(p("iX").phase_exp(), 1);
        assert_eq!(p("-iX").phase_exp(), 3);
        assert_eq!(p("-IIIZIIIZ").to_string(), "-IIIZIIIZ");
    }

    #[test]
    fn products() {
        assert_eq!(p("X") * p("Z"), p("-iY"));
        assert_eq!(p("Z") * p("X"), p("iY"));
        assert_eq!(p("X") * p("Y"), p("iZ"));
        assert_eq!(p("Y") * p("Y"), p("I"));
        let g3 = p("-ZIIIZIII");
        assert_eq!(g3 * g3, p("IIIIIIII"));
        assert_eq!(p("ZZXXIIXX") * p("XXZZXXII"), p("YYYYXXXX"));
        assert!(multiply(&p("XX"), &p("X")).is_err());
    }

    #[test]
    fn commutation() {
        assert!(!commutes(&p("X"), &p("Z")).unwrap());
        assert!(commutes(&p("ZZXXIIXX"), &p("XXZZXXII")).unwrap());
        assert!(!commutes(&p("IZZYIIIX"), &p("ZZZZIIII")).unwrap());
        assert!(commutes(&p("XX"), &p("XXX")).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(weight(&p("IIII")), 0);
        assert_eq!(weight(&p("IZZYIIIX")), 4);
        assert_eq!(weight(&p("ZZXXIIXX")), 6);
    }

    fn code_813() -> Vec<PauliOperator> {
        [
            "ZZXXIIXX", "XXZZXXII", "XZXZXIXI", "-ZIIIZIII", "-IZIIIZII", "-IIZIIIZI",
            "-IIIZIIIZ",
        ]
        .iter()
        .map(|s| p(s))
        .collect()
    }

    #[test]
    fn group_membership() {
        let gens = code_813();
        assert!(in_group(&gens[0], &gens, true).unwrap());
        assert!(in_group(&gens[0], &gens, false).unwrap());
        let x0 = p("XIIIIIII");
        assert!(!commutes(&x0, &gens[3]).unwrap());
        assert!(!in_group(&x0, &gens, true).unwrap());
        let z0z4 = p("ZIIIZIII");
        assert!(in_group(&z0z4, &gens, true).unwrap());
        assert!(!in_group(&z0z4, &gens, false).unwrap());
        assert!(in_group(&z0z4.negated(), &gens, false).unwrap());
        // product of two generators with its exact sign
        let prod = gens[3] * gens[4];
        assert!(in_group(&prod, &gens, false).unwrap());
        assert!(!in_group(&prod.negated(), &gens, false).unwrap());
    }

    #[test]
    fn basis_ranks() {
        let mut gens = code_813();
        assert_eq!(build_basis(8, &gens).unwrap().rank(), 7);
        gens.push(gens[2]);
        assert_eq!(build_basis(8, &gens).unwrap().rank(), 7);
        assert_eq!(build_basis(8, &[]).unwrap().rank(), 0);
    }

    #[test]
    fn basis_is_reduced_echelon() {
        let b = build_basis(8, &code_813()).unwrap();
        for (i, row) in b.rows().iter().enumerate() {
            assert_eq!(row.leading_column(), Some(b.pivots()[i]));
            for (j, &pivot) in b.pivots().iter().enumerate() {
                assert_eq!(row.column(pivot), i == j);
            }
        }
        assert!(b.pivots().windows(2).all(|w| w[0] < w[1]));
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (any::<u128>(), any::<u128>(), 0u8..4)
            .prop_map(move |(x, z, ph)| PauliOperator::from_masks(n, x & low_mask(n), z & low_mask(n), ph).unwrap())
    }

    fn arb_triple() -> impl Strategy<Value = (PauliOperator, PauliOperator, PauliOperator)> {
        (1usize..=8).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn multiplication_is_associative((a, b, c) in arb_triple()) {
            prop_assert_eq!((a * b) * c, a * (b * c));
        }

        #[test]
        fn commutation_matches_product_order((a, b, _c) in arb_triple()) {
            let ab = a * b;
            let ba = b * a;
            prop_assert!(ab.same_masks(&ba));
            let diff = (ab.phase_exp() + 4 - ba.phase_exp()) % 4;
            prop_assert_eq!(commutes(&a, &b).unwrap(), diff == 0);
            prop_assert!(diff == 0 || diff == 2);
        }

        #[test]
        fn weight_is_subadditive((a, b, _c) in arb_triple()) {
            prop_assert!((a * b).weight() <= a.weight() + b.weight());
        }

        #[test]
        fn text_round_trip(s in "[IXYZ]{1,64}", neg in any::<bool>()) {
            let op = PauliOperator::parse(&s, if neg { -1 } else { 1 }).unwrap();
            let text = op.to_string();
            prop_assert_eq!(text.parse::<PauliOperator>().unwrap(), op);
            prop_assert_eq!(op.letters(), s);
        }

        #[test]
        fn membership_invariant_under_row_operations(
            seeds in proptest::collection::vec((any::<u128>(), any::<u128>()), 1..5),
            mix in proptest::collection::vec((0usize..5, 0usize..5), 0..8),
            probe in (any::<u128>(), any::<u128>()),
            combo in any::<u8>(),
        ) {
            let n = 6;
            let mut gens: Vec<_> = seeds
                .iter()
                .map(|&(x, z)| PauliOperator::from_masks(n, x & low_mask(n), z & low_mask(n), 0).unwrap())
                .collect();
            let original = gens.clone();
            for (i, j) in mix {
                let (i, j) = (i % gens.len(), j % gens.len());
                if i != j {
                    gens[i] = gens[i] * gens[j];
                }
            }
            let random = PauliOperator::from_masks(n, probe.0 & low_mask(n), probe.1 & low_mask(n), 0).unwrap();
            let mut spanned = PauliOperator::identity(n).unwrap();
            for (k, g) in original.iter().enumerate() {
                if (combo >> k) & 1 == 1 {
                    spanned = spanned * *g;
                }
            }
            for e in [random, spanned] {
                prop_assert_eq!(in_group(&e, &original, true).unwrap(), in_group(&e, &gens, true).unwrap());
            }
            prop_assert!(in_group(&spanned, &gens, true).unwrap());
        }
    }
}
