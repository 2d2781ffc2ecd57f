//! Extended Hamming checks and the concatenated constant-excitation code family
//! `[[2^(r+1), 2^r - (r+1), 3]]`.
//!
//! Physical qubits `0..2^r` carry the outer code; qubit `m + 2^r` is the
//! complemented dual-rail partner of qubit `m`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pauli::{build_basis, PauliOperator, SymplecticBasis};

/// Largest family parameter whose codes fit in the Pauli masks.
pub const MAX_FAMILY_R: usize = 6;

fn check_family_r(r: usize) -> Result<()> {
    if !(2..=MAX_FAMILY_R).contains(&r) {
        return Err(Error::InvalidFamilyParameter(r));
    }
    Ok(())
}

/// Parity checks of the classical extended Hamming code on `2^r` bits.
///
/// Row 0 selects the positions whose top bit is set; row `i >= 1` selects the
/// positions whose bit `r - i` is clear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckMatrix {
    r: usize,
    rows: Vec<u128>,
}

impl CheckMatrix {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn block_length(&self) -> usize {
        1 << self.r
    }

    /// Row supports as bit masks (bit `m` = position `m`).
    pub fn rows(&self) -> &[u128] {
        &self.rows
    }

    pub fn support(&self, row: usize) -> Vec<usize> {
        (0..self.block_length())
            .filter(|&m| (self.rows[row] >> m) & 1 == 1)
            .collect()
    }

    /// Position `m`'s mirror image `2^r - 1 - m`.
    pub fn mirror(&self, m: usize) -> usize {
        self.block_length() - 1 - m
    }

    pub fn rank(&self) -> usize {
        gf2_rank(&self.rows)
    }

    /// Row `i` rendered with position 0 leftmost.
    pub fn row_string(&self, i: usize) -> String {
        (0..self.block_length())
            .map(|m| if (self.rows[i] >> m) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// All words orthogonal to every row. Exponential; only for `r <= 4`.
    pub fn codewords(&self) -> Result<Vec<u128>> {
        if self.r > 4 {
            return Err(Error::BudgetExceeded {
                patterns: 1u128 << self.block_length(),
                budget: 1 << 16,
            });
        }
        let len = self.block_length();
        Ok((0u128..(1u128 << len))
            .filter(|&w| self.rows.iter().all(|&row| (row & w).count_ones() % 2 == 0))
            .collect())
    }

    pub fn min_distance(&self) -> Result<usize> {
        Ok(self
            .codewords()?
            .into_iter()
            .filter(|&w| w != 0)
            .map(|w| w.count_ones() as usize)
            .min()
            .unwrap_or(0))
    }
}

pub(crate) fn gf2_rank(rows: &[u128]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for bit in 0..128 {
        let Some(pos) = (rank..rows.len()).find(|&i| (rows[i] >> bit) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pos);
        let pivot = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && (*row >> bit) & 1 == 1 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

pub fn extended_hamming_checks(r: usize) -> Result<CheckMatrix> {
    check_family_r(r)?;
    let len = 1usize << r;
    let mut rows = Vec::with_capacity(r + 1);
    rows.push(
        (0..len)
            .filter(|m| (m >> (r - 1)) & 1 == 1)
            .fold(0u128, |acc, m| acc | 1 << m),
    );
    for i in 1..=r {
        rows.push(
            (0..len)
                .filter(|m| (m >> (r - i)) & 1 == 0)
                .fold(0u128, |acc, m| acc | 1 << m),
        );
    }
    Ok(CheckMatrix { r, rows })
}

/// The combined outer checks `g_i = g_i^X ⊗ g_i^Z` on `2^r` qubits.
pub fn outer_checks(checks: &CheckMatrix) -> Vec<PauliOperator> {
    let n = checks.block_length();
    (0..checks.rows.len())
        .map(|i| {
            let (mut x, mut z) = (0u128, 0u128);
            for m in checks.support(i) {
                x |= 1 << m;
                z |= 1 << checks.mirror(m);
            }
            PauliOperator::from_masks(n, x, z, 0).expect("outer check within qubit range")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    r: Option<usize>,
    generators: Vec<PauliOperator>,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
    claimed_distance: usize,
}

impl StabilizerCode {
    /// Assembles a code without checking the stabilizer conditions; see
    /// [`StabilizerCode::check_structure`].
    pub fn from_parts(
        n: usize,
        r: Option<usize>,
        generators: Vec<PauliOperator>,
        logical_x: Vec<PauliOperator>,
        logical_z: Vec<PauliOperator>,
        claimed_distance: usize,
    ) -> Result<Self> {
        if generators.len() > n {
            return Err(Error::InvalidArgument(format!(
                "{} generators for {n} qubits",
                generators.len()
            )));
        }
        if logical_x.len() != logical_z.len() {
            return Err(Error::InvalidArgument(
                "logical X and Z lists differ in length".into(),
            ));
        }
        for op in generators.iter().chain(&logical_x).chain(&logical_z) {
            if op.num_qubits() != n {
                return Err(Error::SizeMismatch {
                    left: op.num_qubits(),
                    right: n,
                });
            }
        }
        Ok(Self {
            n,
            k: n - generators.len(),
            r,
            generators,
            logical_x,
            logical_z,
            claimed_distance,
        })
    }

    /// Builds a code from generators and derives its logical operators.
    pub fn from_generators(
        n: usize,
        r: Option<usize>,
        generators: Vec<PauliOperator>,
        claimed_distance: usize,
    ) -> Result<Self> {
        let mut code = Self::from_parts(n, r, generators, vec![], vec![], claimed_distance)?;
        let (lx, lz) = derive_logical_operators(&code)?;
        code.logical_x = lx;
        code.logical_z = lz;
        Ok(code)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> Option<usize> {
        self.r
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn logical_x(&self) -> &[PauliOperator] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOperator] {
        &self.logical_z
    }

    pub fn claimed_distance(&self) -> usize {
        self.claimed_distance
    }

    pub fn id(&self) -> String {
        format!("[[{},{},{}]]", self.n, self.k, self.claimed_distance)
    }

    pub fn stabilizer_basis(&self) -> SymplecticBasis {
        build_basis(self.n, &self.generators).expect("generator sizes checked at construction")
    }

    /// First non-commuting generator pair, if any.
    pub fn noncommuting_pair(&self) -> Option<(usize, usize)> {
        let g = &self.generators;
        (0..g.len())
            .flat_map(|i| (i + 1..g.len()).map(move |j| (i, j)))
            .find(|&(i, j)| !g[i].commutes_unchecked(&g[j]))
    }

    pub fn generator_rank(&self) -> usize {
        self.stabilizer_basis().rank()
    }

    /// Commutation, independence and Hermiticity of the generators.
    pub fn check_structure(&self) -> Result<()> {
        if let Some((i, j)) = self.noncommuting_pair() {
            return Err(Error::NonCommuting(i, j));
        }
        let rank = self.generator_rank();
        if rank != self.generators.len() {
            return Err(Error::DependentGenerators {
                rank,
                count: self.generators.len(),
            });
        }
        if let Some(g) = self.generators.iter().find(|g| !g.is_hermitian()) {
            return Err(Error::ConstructionCheck(format!(
                "generator {g} has an imaginary phase"
            )));
        }
        Ok(())
    }

    /// Checks the logical operators against the generators and each other.
    pub fn check_logicals(&self) -> Result<()> {
        if self.logical_x.len() != self.k {
            return Err(Error::ConstructionCheck(format!(
                "{} logical pairs for k = {}",
                self.logical_x.len(),
                self.k
            )));
        }
        for l in self.logical_x.iter().chain(&self.logical_z) {
            if let Some(g) = self.generators.iter().find(|g| !g.commutes_unchecked(l)) {
                return Err(Error::ConstructionCheck(format!(
                    "logical {l} anticommutes with generator {g}"
                )));
            }
        }
        for (i, lx) in self.logical_x.iter().enumerate() {
            for (j, other) in self.logical_x.iter().enumerate() {
                if !lx.commutes_unchecked(other) {
                    return Err(Error::ConstructionCheck(format!("X{i} and X{j} anticommute")));
                }
            }
            for (j, lz) in self.logical_z.iter().enumerate() {
                if lx.commutes_unchecked(lz) == (i == j) {
                    return Err(Error::ConstructionCheck(format!(
                        "X{i}/Z{j} commutation is wrong"
                    )));
                }
                for (jj, other) in self.logical_z.iter().enumerate() {
                    if j < jj && !lz.commutes_unchecked(other) {
                        return Err(Error::ConstructionCheck(format!("Z{j} and Z{jj} anticommute")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Text form: header `n k r`, then generators, logical X and logical Z,
    /// one signed Pauli string per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let r = self.r.map_or_else(|| "-".to_string(), |r| r.to_string());
        writeln!(out, "{} {} {}", self.n, self.k, r).unwrap();
        for op in self
            .generators
            .iter()
            .chain(&self.logical_x)
            .chain(&self.logical_z)
        {
            writeln!(out, "{op}").unwrap();
        }
        out
    }

    /// Parses the text form. Stabilizer conditions are not checked here.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, message: &str| Error::CodeFile {
            line,
            message: message.to_string(),
        };
        let (hline, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(hline, "header must be `n k r`"));
        }
        let n: usize = fields[0].parse().map_err(|_| bad(hline, "bad n"))?;
        let k: usize = fields[1].parse().map_err(|_| bad(hline, "bad k"))?;
        let r = match fields[2] {
            "-" => None,
            s => Some(s.parse::<usize>().map_err(|_| bad(hline, "bad r"))?),
        };
        if k > n {
            return Err(bad(hline, "k exceeds n"));
        }
        let mut ops = Vec::new();
        for (line, l) in lines {
            let op: PauliOperator = l.parse().map_err(|e: Error| bad(line, &e.to_string()))?;
            if op.num_qubits() != n {
                return Err(bad(line, "operator length differs from n"));
            }
            ops.push(op);
        }
        let m = n - k;
        if ops.len() != m + 2 * k {
            return Err(bad(
                hline,
                &format!("expected {} operators, found {}", m + 2 * k, ops.len()),
            ));
        }
        let logical_z = ops.split_off(m + k);
        let logical_x = ops.split_off(m);
        let distance = if r.is_some() { 3 } else { 0 };
        Self::from_parts(n, r, ops, logical_x, logical_z, distance)
    }
}

/// The concatenated CE stabilizer code for family parameter `r`.
pub fn build_ce_code(r: usize) -> Result<StabilizerCode> {
    let checks = extended_hamming_checks(r)?;
    let half = checks.block_length();
    let n = 2 * half;
    let mut generators = Vec::with_capacity(half + r + 1);
    for i in 0..checks.rows().len() {
        let (mut x, mut z) = (0u128, 0u128);
        for m in checks.support(i) {
            x |= 1 << m | 1 << (m + half);
            z |= 1 << checks.mirror(m);
        }
        if x & z != 0 {
            return Err(Error::ConstructionCheck(format!(
                "X and Z supports overlap in generator {i}"
            )));
        }
        generators.push(PauliOperator::from_masks(n, x, 0, 0)?.mul_unchecked(
            &PauliOperator::from_masks(n, 0, z, 0)?,
        ));
    }
    for m in 0..half {
        generators.push(PauliOperator::from_masks(n, 0, 1 << m | 1 << (m + half), 2)?);
    }
    let code = StabilizerCode::from_generators(n, Some(r), generators, 3)?;
    debug_assert_eq!(code.k(), half - (r + 1));
    Ok(code)
}

/// The bare outer code on `2^r` qubits (distance 2).
pub fn build_outer_code(r: usize) -> Result<StabilizerCode> {
    let checks = extended_hamming_checks(r)?;
    StabilizerCode::from_generators(checks.block_length(), Some(r), outer_checks(&checks), 2)
}

pub const CANONICAL_8_1_3_GENERATORS: [&str; 7] = [
    "ZZXXIIXX",
    "XXZZXXII",
    "XZXZXIXI",
    "-ZIIIZIII",
    "-IZIIIZII",
    "-IIZIIIZI",
    "-IIIZIIIZ",
];
pub const CANONICAL_8_1_3_LOGICAL_X: &str = "IZZYIIIX";
pub const CANONICAL_8_1_3_LOGICAL_Z: &str = "ZZZZIIII";

/// The [[8,1,3]] instance with its published generators and logicals.
pub fn canonical_code_8_1_3() -> StabilizerCode {
    let parse = |s: &str| s.parse::<PauliOperator>().expect("golden operator");
    StabilizerCode::from_parts(
        8,
        Some(2),
        CANONICAL_8_1_3_GENERATORS.iter().map(|s| parse(s)).collect(),
        vec![parse(CANONICAL_8_1_3_LOGICAL_X)],
        vec![parse(CANONICAL_8_1_3_LOGICAL_Z)],
        3,
    )
    .expect("golden code is well formed")
}

/// Completes the generators to a symplectic basis and returns `k` logical
/// pairs, each reduced against the stabilizer echelon form.
pub fn derive_logical_operators(
    code: &StabilizerCode,
) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>)> {
    if let Some((i, j)) = code.noncommuting_pair() {
        return Err(Error::NonCommuting(i, j));
    }
    let n = code.n;
    let stab = code.stabilizer_basis();
    if stab.rank() != code.generators.len() {
        return Err(Error::DependentGenerators {
            rank: stab.rank(),
            count: code.generators.len(),
        });
    }

    let normalizer = symplectic_complement(n, &code.generators);

    // Quotient the normalizer by the stabilizer span.
    let mut span = stab.clone();
    let mut quotient = Vec::new();
    for v in normalizer {
        if span.insert(&v)? {
            quotient.push(v);
        }
    }
    debug_assert_eq!(quotient.len(), 2 * code.k);

    // Symplectic Gram-Schmidt.
    let mut pool = quotient;
    let mut logical_x = Vec::with_capacity(code.k);
    let mut logical_z = Vec::with_capacity(code.k);
    while !pool.is_empty() {
        let a = pool.remove(0);
        let Some(pos) = pool.iter().position(|b| !a.commutes_unchecked(b)) else {
            return Err(Error::ConstructionCheck(
                "normalizer quotient is degenerate".into(),
            ));
        };
        let b = pool.remove(pos);
        for c in pool.iter_mut() {
            let mut v = *c;
            if !v.commutes_unchecked(&b) {
                v = v.mul_unchecked(&a);
            }
            if !v.commutes_unchecked(&a) {
                v = v.mul_unchecked(&b);
            }
            *c = v;
        }
        logical_x.push(a);
        logical_z.push(b);
    }

    let canonical = |p: &PauliOperator| stab.reduce_unchecked(p).with_phase(0);
    Ok((
        logical_x.iter().map(canonical).collect(),
        logical_z.iter().map(canonical).collect(),
    ))
}

/// Basis of all masks whose symplectic product with every generator is zero.
fn symplectic_complement(n: usize, gens: &[PauliOperator]) -> Vec<PauliOperator> {
    // A vector v is in the complement iff it is orthogonal (ordinary dot
    // product) to each generator with its x and z halves swapped.
    let swapped: Vec<PauliOperator> = gens
        .iter()
        .map(|g| PauliOperator::from_masks(n, g.z_mask(), g.x_mask(), 0).expect("same size"))
        .collect();
    let echelon = build_basis(n, &swapped).expect("same size");
    let pivots = echelon.pivots();
    let mut out = Vec::with_capacity(2 * n - pivots.len());
    for free in (0..2 * n).filter(|c| !pivots.contains(c)) {
        let (mut x, mut z) = (0u128, 0u128);
        let mut set = |c: usize| {
            if c < n {
                x ^= 1 << c;
            } else {
                z ^= 1 << (c - n);
            }
        };
        set(free);
        for (row, &pivot) in echelon.rows().iter().zip(pivots) {
            if row.column(free) {
                set(pivot);
            }
        }
        out.push(PauliOperator::from_masks(n, x, z, 0).expect("within range"));
    }
    out
}
