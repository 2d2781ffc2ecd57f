//! Exhaustive checks of the family's structural claims.

use serde::{Serialize, Serializer};

use crate::code::{build_ce_code, extended_hamming_checks, outer_checks, StabilizerCode};
use crate::error::{Error, Result};
use crate::pauli::{PauliKind, PauliOperator};
use crate::state::{LogicalBasis, MAX_DENSE_QUBITS};

/// Largest number of patterns the distance search will enumerate.
pub const ENUMERATION_BUDGET: u128 = 1_000_000_000;

/// Largest supported search weight.
pub const MAX_SEARCH_WEIGHT: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistanceResult {
    /// Minimum weight and the lexicographically first logical of that weight.
    Exact { distance: usize, witness: PauliOperator },
    /// No nontrivial logical of weight `<= w_max`.
    GreaterThan(usize),
}

impl DistanceResult {
    pub fn distance(&self) -> Option<usize> {
        match self {
            DistanceResult::Exact { distance, .. } => Some(*distance),
            DistanceResult::GreaterThan(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&PauliOperator> {
        match self {
            DistanceResult::Exact { witness, .. } => Some(witness),
            DistanceResult::GreaterThan(_) => None,
        }
    }
}

impl Serialize for DistanceResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DistanceResult::Exact { distance, .. } => s.serialize_u64(*distance as u64),
            DistanceResult::GreaterThan(w) => s.collect_str(&format_args!("greater than {w}")),
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of weight-`1..=w_max` Pauli patterns on `n` qubits.
pub fn pattern_count(n: usize, w_max: usize) -> u128 {
    (1..=w_max as u128)
        .map(|w| 3u128.pow(w as u32) * binomial(n as u128, w))
        .sum()
}

/// Refuses searches over more than [`ENUMERATION_BUDGET`] patterns.
pub fn check_budget(n: usize, w_max: usize) -> Result<u128> {
    let patterns = pattern_count(n, w_max);
    if patterns > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            patterns,
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(patterns)
}

/// Minimum weight of an operator that commutes with every generator and is
/// not in the stabilizer group, searched up to `w_max`.
pub fn compute_distance(code: &StabilizerCode, w_max: usize) -> Result<DistanceResult> {
    if !(1..=MAX_SEARCH_WEIGHT).contains(&w_max) {
        return Err(Error::InvalidArgument(format!(
            "w_max must be in 1..={MAX_SEARCH_WEIGHT}, got {w_max}"
        )));
    }
    let n = code.n();
    check_budget(n, w_max)?;
    let basis = code.stabilizer_basis();
    let gens: Vec<(u128, u128)> = code
        .generators()
        .iter()
        .map(|g| (g.x_mask(), g.z_mask()))
        .collect();
    let undetected = |x: u128, z: u128| {
        gens.iter()
            .all(|&(gx, gz)| ((x & gz) ^ (z & gx)).count_ones() % 2 == 0)
    };

    for w in 1..=w_max {
        let mut support: Vec<usize> = (0..w).collect();
        loop {
            // type codes 0=X, 1=Y, 2=Z; the last qubit varies fastest
            for t in 0..3usize.pow(w as u32) {
                let (mut x, mut z) = (0u128, 0u128);
                let mut code_t = t;
                for &q in support.iter().rev() {
                    match code_t % 3 {
                        0 => x |= 1 << q,
                        1 => {
                            x |= 1 << q;
                            z |= 1 << q;
                        }
                        _ => z |= 1 << q,
                    }
                    code_t /= 3;
                }
                if undetected(x, z) {
                    let op = PauliOperator::from_masks(n, x, z, 0)?;
                    if !basis.contains_mod_phase(&op)? {
                        return Ok(DistanceResult::Exact {
                            distance: w,
                            witness: op,
                        });
                    }
                }
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }
    Ok(DistanceResult::GreaterThan(w_max))
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let w = c.len();
    let Some(i) = (0..w).rev().find(|&i| c[i] < n - w + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..w {
        c[j] = c[j - 1] + 1;
    }
    true
}

fn commutes_with_all(op: &PauliOperator, gens: &[PauliOperator]) -> bool {
    gens.iter().all(|g| op.commutes_unchecked(g))
}

/// `X_{2^(r-1)-1} Z_{2^(r-1)} X_{2^(r-1)-1+2^r}`, checked to be a nontrivial
/// logical operator of `build_ce_code(r)`.
pub fn claimed_weight3_logical(r: usize) -> Result<PauliOperator> {
    let code = build_ce_code(r)?;
    let half = 1usize << r;
    let a = (1usize << (r - 1)) - 1;
    let op = PauliOperator::from_sparse(
        code.n(),
        &[(a, PauliKind::X), (a + 1, PauliKind::Z), (a + half, PauliKind::X)],
    )?;
    if !commutes_with_all(&op, code.generators()) {
        return Err(Error::ConstructionCheck(format!("{op} is detected by the code")));
    }
    if code.stabilizer_basis().contains_mod_phase(&op)? {
        return Err(Error::ConstructionCheck(format!("{op} is a stabilizer")));
    }
    Ok(op)
}

/// `X_{2^(r-1)-1} Z_{2^(r-1)}` on the bare outer code, checked to commute
/// with every combined outer check.
pub fn outer_code_undetectable(r: usize) -> Result<PauliOperator> {
    let checks = extended_hamming_checks(r)?;
    let gens = outer_checks(&checks);
    let a = (1usize << (r - 1)) - 1;
    let op = PauliOperator::from_sparse(
        checks.block_length(),
        &[(a, PauliKind::X), (a + 1, PauliKind::Z)],
    )?;
    if !commutes_with_all(&op, &gens) {
        return Err(Error::ConstructionCheck(format!("{op} is detected by the outer checks")));
    }
    Ok(op)
}

/// Number of excitations shared by every codeword.
///
/// Each signed pair check `-Z_m Z_{m+2^r}` forces exactly one excitation on
/// its pair, so the total is `2^r`. For `n <= 16` every logical basis state
/// is also scanned.
pub fn verify_constant_excitation(code: &StabilizerCode) -> Result<usize> {
    let r = code
        .r()
        .ok_or_else(|| Error::NotConstantExcitation("code has no family parameter".into()))?;
    let half = 1usize << r;
    if code.n() != 2 * half {
        return Err(Error::NotConstantExcitation(format!(
            "n = {} does not match r = {r}",
            code.n()
        )));
    }
    for m in 0..half {
        let pair = PauliOperator::from_masks(code.n(), 0, 1 << m | 1 << (m + half), 2)?;
        if !code.generators().contains(&pair) {
            return Err(Error::NotConstantExcitation(format!("missing pair check {pair}")));
        }
    }
    if code.n() <= MAX_DENSE_QUBITS {
        let basis = LogicalBasis::new(code)?;
        for (b, state) in basis.states().iter().enumerate() {
            let off_sector: f64 = state
                .excitation_spectrum()
                .iter()
                .filter(|(&w, _)| w != half)
                .map(|(_, p)| p)
                .sum();
            if off_sector > 1e-10 {
                return Err(Error::NotConstantExcitation(format!(
                    "logical state {b} has weight {off_sector} outside sector {half}"
                )));
            }
        }
    }
    Ok(half)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Excitation {
    Constant(usize),
    NonConstant,
}

impl Serialize for Excitation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Excitation::Constant(w) => s.serialize_u64(*w as u64),
            Excitation::NonConstant => s.serialize_str("non-constant"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub code: String,
    pub commutation_ok: bool,
    pub independence_ok: bool,
    pub distance: DistanceResult,
    pub witness: Option<PauliOperator>,
    pub excitation: Excitation,
}

impl VerificationReport {
    /// True when every structural claim of a family code holds.
    pub fn passed(&self, expected_distance: usize) -> bool {
        self.commutation_ok
            && self.independence_ok
            && self.distance.distance() == Some(expected_distance)
            && matches!(self.excitation, Excitation::Constant(_))
    }
}

pub fn verify_code(code: &StabilizerCode, w_max: usize) -> Result<VerificationReport> {
    let commutation_ok = code.noncommuting_pair().is_none();
    let independence_ok = code.generator_rank() == code.generators().len();
    let distance = compute_distance(code, w_max)?;
    let excitation = match verify_constant_excitation(code) {
        Ok(w) => Excitation::Constant(w),
        Err(_) => Excitation::NonConstant,
    };
    Ok(VerificationReport {
        code: code.id(),
        commutation_ok,
        independence_ok,
        witness: distance.witness().copied(),
        distance,
        excitation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_outer_code, canonical_code_8_1_3};
    use crate::pauli::commutes;

    #[test]
    fn distance_of_8_1_3() {
        let code = build_ce_code(2).unwrap();
        let d = compute_distance(&code, 3).unwrap();
        assert_eq!(d.distance(), Some(3));
        let w = d.witness().unwrap();
        assert_eq!(w.weight(), 3);
        assert!(code.generators().iter().all(|g| commutes(w, g).unwrap()));
        assert!(!code.stabilizer_basis().contains_mod_phase(w).unwrap());
        assert_eq!(compute_distance(&code, 2).unwrap(), DistanceResult::GreaterThan(2));
        assert_eq!(pattern_count(8, 2), 276);
    }

    #[test]
    fn witness_is_lexicographically_first() {
        let code = build_ce_code(2).unwrap();
        let w = compute_distance(&code, 3).unwrap().witness().copied().unwrap();
        // brute force over all weight-3 logicals, ordered by (support, types)
        let basis = code.stabilizer_basis();
        let mut best: Option<(Vec<usize>, Vec<PauliKind>)> = None;
        for x in 0u128..256 {
            for z in 0u128..256 {
                let op = PauliOperator::from_masks(8, x, z, 0).unwrap();
                if op.weight() != 3
                    || !code.generators().iter().all(|g| commutes(&op, g).unwrap())
                    || basis.contains_mod_phase(&op).unwrap()
                {
                    continue;
                }
                let support: Vec<usize> = op.support().collect();
                let kinds: Vec<PauliKind> = support.iter().map(|&q| op.kind(q)).collect();
                if best.as_ref().map_or(true, |b| (&support, &kinds) < (&b.0, &b.1)) {
                    best = Some((support, kinds));
                }
            }
        }
        let (support, kinds) = best.unwrap();
        assert_eq!(w.support().collect::<Vec<_>>(), support);
        assert_eq!(support.iter().map(|&q| w.kind(q)).collect::<Vec<_>>(), kinds);
    }

    #[test]
    fn distance_bounds_and_errors() {
        let code = build_ce_code(2).unwrap();
        assert!(compute_distance(&code, 0).is_err());
        assert!(compute_distance(&code, 5).is_err());
        assert_eq!(check_budget(8, 2).unwrap(), 276);
        assert!(check_budget(128, 4).is_ok());
        assert!(matches!(check_budget(200, 4), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn larger_family_distance() {
        let code = build_ce_code(3).unwrap();
        let d = compute_distance(&code, 3).unwrap();
        assert_eq!(d.distance(), Some(3));
        assert_eq!(d.witness().unwrap().weight(), claimed_weight3_logical(3).unwrap().weight());
    }

    #[test]
    fn claimed_logicals() {
        let l2 = claimed_weight3_logical(2).unwrap();
        assert_eq!(l2.to_string(), "IXZIIXII");
        assert_eq!(l2.weight(), 3);
        let l3 = claimed_weight3_logical(3).unwrap();
        assert_eq!(l3.support().collect::<Vec<_>>(), vec![3, 4, 11]);
        assert_eq!((l3.kind(3), l3.kind(4), l3.kind(11)), (PauliKind::X, PauliKind::Z, PauliKind::X));
        assert!(claimed_weight3_logical(1).is_err());
    }

    #[test]
    fn outer_undetectable() {
        assert_eq!(outer_code_undetectable(2).unwrap().to_string(), "IXZI");
        let op3 = outer_code_undetectable(3).unwrap();
        assert_eq!(op3.support().collect::<Vec<_>>(), vec![3, 4]);
        let gens = outer_checks(&extended_hamming_checks(2).unwrap());
        let x0: PauliOperator = "XIII".parse().unwrap();
        assert!(gens.iter().any(|g| !commutes(&x0, g).unwrap()));
    }

    #[test]
    fn concatenation_raises_distance() {
        for r in 2..=3 {
            let outer = build_outer_code(r).unwrap();
            assert_eq!(compute_distance(&outer, 3).unwrap().distance(), Some(2));
            assert_eq!(compute_distance(&build_ce_code(r).unwrap(), 3).unwrap().distance(), Some(3));
        }
    }

    #[test]
    fn constant_excitation() {
        assert_eq!(verify_constant_excitation(&build_ce_code(2).unwrap()).unwrap(), 4);
        assert_eq!(verify_constant_excitation(&canonical_code_8_1_3()).unwrap(), 4);
        for r in 4..=6 {
            assert_eq!(verify_constant_excitation(&build_ce_code(r).unwrap()).unwrap(), 1 << r);
        }
        let code = build_ce_code(2).unwrap();
        let mut gens = code.generators().to_vec();
        gens.pop();
        let broken = StabilizerCode::from_generators(8, Some(2), gens, 3).unwrap();
        assert!(matches!(
            verify_constant_excitation(&broken),
            Err(Error::NotConstantExcitation(_))
        ));
    }

    #[test]
    fn report_for_family() {
        let report = verify_code(&build_ce_code(2).unwrap(), 3).unwrap();
        assert!(report.passed(3));
        assert_eq!(report.excitation, Excitation::Constant(4));
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["distance"], 3);
        assert_eq!(json["excitation"], 4);
        let report = verify_code(&build_ce_code(2).unwrap(), 2).unwrap();
        assert_eq!(serde_json::to_value(&report).unwrap()["distance"], "greater than 2");
        assert!(!report.passed(3));
    }
}
