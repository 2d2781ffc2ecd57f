//! Exact low-weight analysis, Monte Carlo sweeps and the closed-form
//! rate and threshold expressions.

use std::fmt;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{build_ce_code, StabilizerCode};
use crate::decode::{
    sample_depolarizing, syndrome_of, uniform_delta_t, ChannelOrdering, LogicalInput, ShotRunner,
};
use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::verify::pattern_count;

/// Largest weight the exhaustive analysis enumerates.
pub const MAX_ANALYSIS_WEIGHT: usize = 2;

/// Pattern budget for the exhaustive analysis.
pub const ANALYSIS_BUDGET: u128 = 10_000_000;

/// Words of RNG output reserved per trial inside a stream.
const WORDS_PER_TRIAL: u128 = 1 << 12;

const CHUNK: u64 = 1 << 12;

/// Correctable-pattern counts by weight and the resulting fidelity polynomial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowWeightAnalysis {
    pub n: usize,
    /// `counts[w]`: weight-`w` Pauli patterns whose decoded residual is a stabilizer.
    pub counts: Vec<u64>,
    /// `totals[w] = 3^w C(n, w)`.
    pub totals: Vec<u64>,
    /// Exact `c` in `1 - S(p) = c p^2 + O(p^3)`.
    pub quadratic_coefficient: f64,
}

impl LowWeightAnalysis {
    /// `S(p) = Σ_w A_w (p/3)^w (1-p)^(n-w)` over the enumerated weights.
    pub fn success_probability(&self, p: f64) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .take(self.n + 1)
            .map(|(w, &a)| a as f64 * (p / 3.0).powi(w as i32) * (1.0 - p).powi((self.n - w) as i32))
            .sum()
    }

    /// `1 - S(p)`; weights beyond the enumeration count as failures.
    pub fn failure_probability(&self, p: f64) -> f64 {
        1.0 - self.success_probability(p)
    }
}

/// Weight-1 table where the first claimant of a syndrome wins and later
/// colliding patterns are simply left to fail.
fn first_claim_table(code: &StabilizerCode) -> Result<std::collections::HashMap<crate::decode::Syndrome, PauliOperator>> {
    let n = code.n();
    let mut table = std::collections::HashMap::new();
    table.insert(syndrome_of(&PauliOperator::identity(n)?, code.generators()), PauliOperator::identity(n)?);
    for q in 0..n {
        for kind in crate::pauli::PauliKind::NON_IDENTITY {
            let e = PauliOperator::single(n, q, kind)?;
            table.entry(syndrome_of(&e, code.generators())).or_insert(e);
        }
    }
    Ok(table)
}

/// Decodes every Pauli pattern of weight `<= w_max` with the lookup table
/// and counts those whose residual lies in the stabilizer group.
pub fn exhaustive_low_weight_analysis(code: &StabilizerCode, w_max: usize) -> Result<LowWeightAnalysis> {
    if w_max > MAX_ANALYSIS_WEIGHT {
        return Err(Error::InvalidArgument(format!(
            "w_max must be at most {MAX_ANALYSIS_WEIGHT}"
        )));
    }
    let n = code.n();
    let patterns = pattern_count(n, w_max);
    if patterns > ANALYSIS_BUDGET {
        return Err(Error::BudgetExceeded {
            patterns,
            budget: ANALYSIS_BUDGET,
        });
    }
    let table = first_claim_table(code)?;
    let basis = code.stabilizer_basis();
    let mut counts = vec![0u64; w_max + 1];
    let mut totals = vec![0u64; w_max + 1];
    let mut visit = |e: PauliOperator| -> Result<()> {
        let w = e.weight();
        totals[w] += 1;
        if let Some(c) = table.get(&syndrome_of(&e, code.generators())) {
            if basis.contains_mod_phase(&c.mul_unchecked(&e))? {
                counts[w] += 1;
            }
        }
        Ok(())
    };
    visit(PauliOperator::identity(n)?)?;
    if w_max >= 1 {
        for q in 0..n {
            for kind in crate::pauli::PauliKind::NON_IDENTITY {
                visit(PauliOperator::single(n, q, kind)?)?;
            }
        }
    }
    if w_max >= 2 {
        for a in 0..n {
            for b in a + 1..n {
                for ka in crate::pauli::PauliKind::NON_IDENTITY {
                    for kb in crate::pauli::PauliKind::NON_IDENTITY {
                        visit(PauliOperator::from_sparse(n, &[(a, ka), (b, kb)])?)?;
                    }
                }
            }
        }
    }
    let quadratic_coefficient = quadratic_coefficient(n, &counts);
    Ok(LowWeightAnalysis {
        n,
        counts,
        totals,
        quadratic_coefficient,
    })
}

/// Coefficient of `p^2` in `1 - Σ_w A_w (p/3)^w (1-p)^(n-w)`.
fn quadratic_coefficient(n: usize, counts: &[u64]) -> f64 {
    let choose = |m: usize, j: usize| -> f64 {
        if j > m {
            0.0
        } else {
            (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
        }
    };
    let in_success: f64 = counts
        .iter()
        .enumerate()
        .take(3)
        .filter(|&(w, _)| w <= n)
        .map(|(w, &a)| {
            let j = 2 - w;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            a as f64 / 3f64.powi(w as i32) * sign * choose(n - w, j)
        })
        .sum();
    -in_success
}

/// Smallest `p` in `(0, 0.5)` with `failure(p) = p`, by bisection to `1e-12`.
pub fn pseudo_threshold_for(failure: impl Fn(f64) -> f64) -> Option<f64> {
    let g = |p: f64| failure(p) - p;
    let steps = 10_000;
    let hi_end = 0.5;
    let mut lo = 1e-9;
    if g(lo) >= 0.0 {
        return None;
    }
    for i in 1..=steps {
        let hi = hi_end * i as f64 / steps as f64;
        if g(hi) >= 0.0 {
            let mut hi = hi;
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if g(mid) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        lo = hi;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PseudoThreshold {
    Crossing(f64),
    #[serde(serialize_with = "no_crossing")]
    NoCrossing,
}

fn no_crossing<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("no-crossing")
}

impl PseudoThreshold {
    pub fn value(&self) -> Option<f64> {
        match self {
            PseudoThreshold::Crossing(p) => Some(*p),
            PseudoThreshold::NoCrossing => None,
        }
    }
}

/// Pseudo-threshold of the exact truncated fidelity polynomial.
pub fn pseudo_threshold(analysis: &LowWeightAnalysis) -> PseudoThreshold {
    match pseudo_threshold_for(|p| analysis.failure_probability(p)) {
        Some(p) => PseudoThreshold::Crossing(p),
        None => PseudoThreshold::NoCrossing,
    }
}

/// `1 / (n (n - 2))`
pub fn threshold_bound(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("threshold bound needs n >= 3, got {n}")));
    }
    Ok(1.0 / (n as f64 * (n as f64 - 2.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Rate {
    pub numerator: u64,
    pub denominator: u64,
}

impl Rate {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(2^r - (r+1)) / 2^(r+1)` in lowest terms.
pub fn code_rate(r: usize) -> Result<Rate> {
    if !(2..=62).contains(&r) {
        return Err(Error::InvalidFamilyParameter(r));
    }
    let num = (1u64 << r) - (r as u64 + 1);
    let den = 1u64 << (r + 1);
    let g = gcd(num, den);
    Ok(Rate {
        numerator: num / g,
        denominator: den / g,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaTPolicy {
    Fixed(f64),
    /// Fresh uniform draw from `[0, 2π)` per shot.
    UniformRandom,
}

impl fmt::Display for DeltaTPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaTPolicy::Fixed(v) => write!(f, "{v}"),
            DeltaTPolicy::UniformRandom => f.write_str("random"),
        }
    }
}

impl Serialize for DeltaTPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DeltaTPolicy::Fixed(v) => s.serialize_f64(*v),
            DeltaTPolicy::UniformRandom => s.serialize_str("random"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub r: usize,
    pub p_grid: Vec<f64>,
    pub trials: u64,
    pub delta_t: DeltaTPolicy,
    pub seed: u64,
    pub ordering: ChannelOrdering,
    /// Logical state fed to every shot; `None` selects [`generic_logical_input`].
    pub input: Option<LogicalInput>,
}

impl SweepConfig {
    pub fn new(r: usize, p_grid: Vec<f64>, trials: u64, seed: u64) -> Self {
        Self {
            r,
            p_grid,
            trials,
            delta_t: DeltaTPolicy::UniformRandom,
            seed,
            ordering: ChannelOrdering::CcAfterPauli,
            input: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.p_grid.is_empty() {
            return Err(Error::InvalidArgument("empty p grid".into()));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!("grid value {p} outside [0, 1)")));
        }
        Ok(())
    }
}

/// Fixed logical state with unequal magnitudes and phases, so no nontrivial
/// logical Pauli leaves it invariant.
pub fn generic_logical_input(k: usize) -> LogicalInput {
    let raw: Vec<Complex64> = (0..1usize << k)
        .map(|b| Complex64::from_polar(1.0 + b as f64, 0.7 * (b as f64 + 1.0)))
        .collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    LogicalInput::Amplitudes(raw.into_iter().map(|c| c / norm).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub heralded: u64,
    pub fidelity: f64,
    pub stderr: f64,
}

impl PointRecord {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

/// Quadratic coefficients of `1 - F(p)` side by side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadraticComparison {
    /// The published `n (n - 2)`.
    pub published: f64,
    /// `C(n, 2)`: every weight-1 pattern corrected, no weight-2 pattern.
    pub without_weight2: f64,
    /// From the exhaustive decoder analysis.
    pub exact: f64,
    /// Set when the published value differs from the exact one.
    pub discrepancy: bool,
}

impl QuadraticComparison {
    pub fn new(analysis: &LowWeightAnalysis) -> Self {
        let n = analysis.n as f64;
        let published = n * (n - 2.0);
        Self {
            published,
            without_weight2: n * (n - 1.0) / 2.0,
            exact: analysis.quadratic_coefficient,
            discrepancy: (published - analysis.quadratic_coefficient).abs() > 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdSummary {
    pub pseudo_threshold: PseudoThreshold,
    /// `1 / (n (n - 2))`
    pub bound: f64,
    /// Pseudo-threshold of `1 - F = C(n,2) p^2`.
    pub without_weight2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub code: String,
    pub started_unix_secs: u64,
    pub elapsed_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub delta_t: DeltaTPolicy,
    pub ordering: ChannelOrdering,
    pub points: Vec<PointRecord>,
    pub analysis: LowWeightAnalysis,
    pub quadratic_coefficients: QuadraticComparison,
    pub thresholds: ThresholdSummary,
    pub metadata: RunMetadata,
}

impl ExperimentReport {
    /// CSV with header `p,trials,failures,heralded,fidelity,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,trials,failures,heralded,fidelity,stderr\n");
        for pt in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                round_sig(pt.p),
                pt.trials,
                pt.failures,
                pt.heralded,
                round_sig(pt.fidelity),
                round_sig(pt.stderr)
            ));
        }
        out
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// RNG for one trial: stream keyed by grid point, offset by trial index.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point);
    rng.set_word_pos(trial as u128 * WORDS_PER_TRIAL);
    rng
}

/// Failure and herald counts for grid point `point` of `config`.
pub fn run_point(
    runner: &ShotRunner,
    input: &LogicalInput,
    config: &SweepConfig,
    point: usize,
) -> Result<(u64, u64)> {
    let p = config.p_grid[point];
    let (trials, delta_t, ordering, seed) = (config.trials, config.delta_t, config.ordering, config.seed);
    let point = point as u64;
    let ideal = runner.ideal_state(input)?;
    let n = runner.code().n();
    let chunks = trials.div_ceil(CHUNK);
    let per_chunk: Vec<Result<(u64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut failures, mut heralded) = (0u64, 0u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(point);
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                rng.set_word_pos(t as u128 * WORDS_PER_TRIAL);
                let dt = match delta_t {
                    DeltaTPolicy::Fixed(v) => v,
                    DeltaTPolicy::UniformRandom => uniform_delta_t(&mut rng),
                };
                let error = sample_depolarizing(n, p, &mut rng)?;
                let shot = runner.run_prepared(&ideal, error, dt, ordering, &mut rng)?;
                failures += u64::from(!shot.success);
                heralded += u64::from(shot.heralded_uncorrectable);
            }
            Ok((failures, heralded))
        })
        .collect();
    per_chunk
        .into_iter()
        .try_fold((0, 0), |(f, h), r| r.map(|(a, b)| (f + a, h + b)))
}

pub fn monte_carlo_sweep(config: &SweepConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let started_unix_secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let code = build_ce_code(config.r)?;
    let runner = ShotRunner::new(&code)?;
    let input = config
        .input
        .clone()
        .unwrap_or_else(|| generic_logical_input(code.k()));

    let mut points = Vec::with_capacity(config.p_grid.len());
    for (i, &p) in config.p_grid.iter().enumerate() {
        let (failures, heralded) = run_point(&runner, &input, config, i)?;
        let rate = failures as f64 / config.trials as f64;
        points.push(PointRecord {
            p,
            trials: config.trials,
            failures,
            heralded,
            fidelity: 1.0 - rate,
            stderr: (rate * (1.0 - rate) / config.trials as f64).sqrt(),
        });
    }

    let analysis = exhaustive_low_weight_analysis(&code, 2)?;
    let quadratic_coefficients = QuadraticComparison::new(&analysis);
    let thresholds = ThresholdSummary {
        pseudo_threshold: pseudo_threshold(&analysis),
        bound: threshold_bound(code.n())?,
        without_weight2: 1.0 / quadratic_coefficients.without_weight2,
    };
    Ok(ExperimentReport {
        r: config.r,
        n: code.n(),
        k: code.k(),
        delta_t: config.delta_t,
        ordering: config.ordering,
        points,
        analysis,
        quadratic_coefficients,
        thresholds,
        metadata: RunMetadata {
            seed: config.seed,
            code: code.id(),
            started_unix_secs,
            elapsed_secs: started.elapsed().as_secs_f64(),
        },
    })
}
