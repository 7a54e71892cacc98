//! Exhaustive checks of the structural facts the quantum learner relies on.
//!
//! These recompute everything from raw polynomial evaluation and full-space
//! simulation; none of them goes through `derivative_fn` or the learners.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::learn::classical_query_count;
use crate::oracle::{HiddenOracle, Oracle};
use crate::poly::{MultilinearPoly, PointVec, SubsetIndex};
use crate::sim::{state_dim, QftMatrix, StateVector};

/// Default cap on `q^n` for the exhaustive `f_S` check.
pub const DEFAULT_POINT_BUDGET: u128 = 100_000;
/// Default cap on the number of polynomials enumerated by the counting check.
pub const DEFAULT_COUNT_BUDGET: u128 = 1_000_000;
/// Amplitude agreement required between the two kickback paths.
pub const KICKBACK_TOLERANCE: f64 = 1e-12;
/// Counterexamples kept verbatim in a report; the total is always counted.
const MAX_LISTED: usize = 32;

/// Per-trial seeds derived deterministically from a master seed.
pub fn trial_seeds(master: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..trials).map(|_| rng.random()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FsCounterexample {
    pub trial_seed: u64,
    pub subset: Vec<usize>,
    pub x: Vec<u32>,
    pub alternating_sum: u32,
    pub closed_form: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaFsReport {
    pub check: &'static str,
    pub field: String,
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub points_checked: u64,
    pub counterexample_count: u64,
    pub counterexamples: Vec<FsCounterexample>,
    pub wall_time_ms: f64,
}

impl LemmaFsReport {
    pub fn passed(&self) -> bool {
        self.counterexample_count == 0
    }
}

/// `Σ_{β ∈ {0,1}^k} (−1)^{k−|β|} f(x + Σ_j β_j e_{S_j})`, straight from the definition.
fn alternating_sum(ctx: &FieldCtx, f: &MultilinearPoly, s: SubsetIndex, x: &PointVec) -> Result<FieldElem> {
    let members = s.members();
    let k = members.len();
    let mut total = FieldElem::ZERO;
    for beta in 0u64..1 << k {
        let mut shifted = x.clone();
        for (j, &m) in members.iter().enumerate() {
            if beta >> j & 1 == 1 {
                shifted = shifted.add(ctx, &PointVec::basis(x.len(), m)?)?;
            }
        }
        let mut term = f.evaluate(&shifted)?;
        // (−1)^{k−|β|} as repeated negation
        for _ in 0..(k - beta.count_ones() as usize) {
            term = ctx.neg(term);
        }
        total = ctx.add(total, term);
    }
    Ok(total)
}

/// Checks `f_S(x) = α_S + Σ_{k∉S} α_{S∪{k}} x_k` for random `f` of degree `d`,
/// every `|S| = d − 1` and every `x ∈ F_q^n`.
pub fn verify_lemma_fs(
    ctx: Arc<FieldCtx>,
    n: usize,
    d: usize,
    trials: usize,
    seed: u64,
    budget: u128,
) -> Result<LemmaFsReport> {
    if d == 0 || d > n {
        return Err(Error::InvalidDegree { degree: d, max: n });
    }
    let q = ctx.order();
    let points = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if points > budget {
        return Err(Error::BudgetExceeded {
            requested: points,
            budget,
        });
    }
    let started = Instant::now();
    let subsets: Vec<SubsetIndex> = SubsetIndex::of_size(n, d - 1).collect();
    let per_trial: Vec<(u64, Vec<FsCounterexample>)> = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|trial_seed| -> Result<(u64, Vec<FsCounterexample>)> {
            let f = MultilinearPoly::random(ctx.clone(), n, d, trial_seed)?;
            let mut checked = 0u64;
            let mut bad = Vec::new();
            for &s in &subsets {
                for idx in 0..points as usize {
                    let x = PointVec::from_index(q, n, idx);
                    let lhs = alternating_sum(&ctx, &f, s, &x)?;
                    let mut rhs = f.coeff(s);
                    for k in (1..=n).filter(|&k| !s.contains(k)) {
                        rhs = ctx.add(rhs, ctx.mul(f.coeff(s.with(k)), x.get(k)));
                    }
                    checked += 1;
                    if lhs != rhs {
                        bad.push(FsCounterexample {
                            trial_seed,
                            subset: s.members(),
                            x: x.coords().iter().map(|c| c.value()).collect(),
                            alternating_sum: lhs.value(),
                            closed_form: rhs.value(),
                        });
                    }
                }
            }
            Ok((checked, bad))
        })
        .collect::<Result<_>>()?;

    let points_checked = per_trial.iter().map(|(c, _)| c).sum();
    let counterexample_count = per_trial.iter().map(|(_, b)| b.len() as u64).sum();
    let counterexamples = per_trial.into_iter().flat_map(|(_, b)| b).take(MAX_LISTED).collect();
    Ok(LemmaFsReport {
        check: "lemma-fs",
        field: ctx.to_string(),
        n,
        d,
        trials,
        seed,
        points_checked,
        counterexample_count,
        counterexamples,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KickbackCase {
    pub n: usize,
    pub c: u32,
    pub trial_seed: u64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KickbackReport {
    pub check: &'static str,
    pub field: String,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub cases: u64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub counterexamples: Vec<KickbackCase>,
    pub wall_time_ms: f64,
}

impl KickbackReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Largest deviation between `O_f` applied to `ψ ⊗ Q_q^{−1}|c⟩` and
/// `U_{c·f}ψ ⊗ Q_q^{−1}|c⟩`, each simulated on its own copy of the state.
pub fn kickback_deviation(oracle: &HiddenOracle, data: &StateVector<f64>, c: FieldElem) -> Result<f64> {
    let ctx = oracle.field().clone();
    let inverse = QftMatrix::<f64>::build(&ctx).inverse();
    let mut ancilla = StateVector::<f64>::basis(ctx, &PointVec::new(vec![c]), usize::MAX)?;
    ancilla.apply_single(inverse.as_slice(), 1)?;

    let mut full = data.tensor(&ancilla)?;
    oracle.apply_standard_oracle(&mut full)?;

    let mut direct = data.clone();
    oracle.apply_phase_oracle(&mut direct, c, &PointVec::zeros(data.num_registers()))?;
    full.max_deviation(&direct.tensor(&ancilla)?)
}

/// Dual-path kickback check for every `n ≤ n_max`, every `c ∈ F_q` and
/// `trials` random polynomials and input states each.
pub fn verify_kickback(
    ctx: Arc<FieldCtx>,
    n_max: usize,
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<KickbackReport> {
    let q = ctx.order();
    if let Err(Error::MemoryLimitExceeded { requested, cap }) = state_dim(q, n_max + 1, cap) {
        return Err(Error::BudgetExceeded {
            requested,
            budget: cap as u128,
        });
    }
    let started = Instant::now();
    let jobs: Vec<(usize, u64)> = (1..=n_max)
        .flat_map(|n| trial_seeds(seed ^ n as u64, trials).into_iter().map(move |s| (n, s)))
        .collect();
    let results: Vec<Vec<KickbackCase>> = jobs
        .into_par_iter()
        .map(|(n, trial_seed)| -> Result<Vec<KickbackCase>> {
            let f = MultilinearPoly::random(ctx.clone(), n, n, trial_seed)?;
            let oracle = HiddenOracle::new(f);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            ctx.elements()
                .map(|c| {
                    let data = StateVector::<f64>::random(ctx.clone(), n, cap, &mut rng)?;
                    Ok(KickbackCase {
                        n,
                        c: c.value(),
                        trial_seed,
                        deviation: kickback_deviation(&oracle, &data, c)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let all: Vec<KickbackCase> = results.into_iter().flatten().collect();
    let max_deviation = all.iter().map(|c| c.deviation).fold(0.0, f64::max);
    Ok(KickbackReport {
        check: "kickback",
        field: ctx.to_string(),
        n_max,
        trials,
        seed,
        cases: all.len() as u64,
        max_deviation,
        tolerance: KICKBACK_TOLERANCE,
        counterexamples: all
            .into_iter()
            .filter(|c| c.deviation.is_nan() || c.deviation >= KICKBACK_TOLERANCE)
            .take(MAX_LISTED)
            .collect(),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// Enumerate when the count fits the budget, otherwise report the formula.
    Auto,
    Exhaustive,
    Formula,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountingReport {
    pub check: &'static str,
    pub field: String,
    pub n: usize,
    pub d: usize,
    pub mode: &'static str,
    /// `q^{Σ_{i≤d} C(n,i)}` in decimal.
    pub expected_count: String,
    pub enumerated: Option<u64>,
    pub distinct_functions: Option<u64>,
    pub counterexamples: Vec<String>,
    pub wall_time_ms: f64,
}

impl CountingReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Counts multilinear polynomials of degree `≤ d` and, when enumerable,
/// confirms that distinct coefficient maps give distinct functions.
pub fn verify_counting(
    ctx: Arc<FieldCtx>,
    n: usize,
    d: usize,
    mode: CountMode,
    budget: u128,
) -> Result<CountingReport> {
    let started = Instant::now();
    let q = ctx.order();
    let d = d.min(n);
    let terms = classical_query_count(n, d);
    let expected = BigUint::from(q).pow(terms as u32);
    let count = u128::try_from(&expected).ok().filter(|&c| c <= budget);
    let exhaustive = match (mode, count) {
        (CountMode::Formula, _) | (CountMode::Auto, None) => false,
        (_, Some(_)) => true,
        (CountMode::Exhaustive, None) => {
            return Err(Error::BudgetExceeded {
                requested: u128::try_from(&expected).unwrap_or(u128::MAX),
                budget,
            })
        }
    };
    let mut report = CountingReport {
        check: "counting",
        field: ctx.to_string(),
        n,
        d,
        mode: if exhaustive { "exhaustive" } else { "formula" },
        expected_count: expected.to_string(),
        enumerated: None,
        distinct_functions: None,
        counterexamples: Vec::new(),
        wall_time_ms: 0.0,
    };
    if exhaustive {
        let subsets: Vec<SubsetIndex> = SubsetIndex::up_to(n, d).collect();
        let mut digits = vec![0u32; subsets.len()];
        let mut tables: HashSet<Vec<FieldElem>> = HashSet::new();
        let mut enumerated = 0u64;
        loop {
            let coeffs = subsets.iter().zip(&digits).map(|(&s, &v)| (s, FieldElem::from_raw(v)));
            let f = MultilinearPoly::from_coeffs(ctx.clone(), n, d, coeffs)?;
            tables.insert(f.truth_table());
            enumerated += 1;
            // mixed-radix increment over the coefficient vector
            let Some(pos) = digits.iter().position(|&v| v + 1 < q) else {
                break;
            };
            digits[pos] += 1;
            digits[..pos].iter_mut().for_each(|v| *v = 0);
        }
        if BigUint::from(enumerated) != expected {
            report
                .counterexamples
                .push(format!("enumerated {enumerated} maps, expected {expected}"));
        }
        if tables.len() as u64 != enumerated {
            report.counterexamples.push(format!(
                "{} distinct functions from {enumerated} coefficient maps",
                tables.len()
            ));
        }
        report.enumerated = Some(enumerated);
        report.distinct_functions = Some(tables.len() as u64);
    }
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::with_order(q).unwrap())
    }

    #[test]
    fn lemma_fs_holds() {
        for (q, n, d) in [(2, 3, 2), (5, 2, 2), (3, 3, 1), (4, 3, 3)] {
            let rep = verify_lemma_fs(field(q), n, d, 100, 1, DEFAULT_POINT_BUDGET).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert!(rep.points_checked > 0);
        }
    }

    #[test]
    fn alternating_sum_exposes_an_over_degree_polynomial() {
        // f = x1 x2 x3 breaks the closed form at |S| = 1: f_{1} = x2 x3
        let ctx = field(3);
        let top = SubsetIndex::from_members(&[1, 2, 3]).unwrap();
        let f = MultilinearPoly::from_coeffs(ctx.clone(), 3, 3, [(top, FieldElem::ONE)]).unwrap();
        let s = SubsetIndex::from_members(&[1]).unwrap();
        let mismatches = (0..27)
            .map(|idx| PointVec::from_index(3, 3, idx))
            .filter(|x| alternating_sum(&ctx, &f, s, x).unwrap() != FieldElem::ZERO)
            .count();
        // x2 x3 != 0 on 2 * 2 choices of (x2, x3), times 3 values of x1
        assert_eq!(mismatches, 12);
    }

    #[test]
    fn lemma_fs_guards() {
        assert!(matches!(
            verify_lemma_fs(field(5), 8, 2, 1, 0, DEFAULT_POINT_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            verify_lemma_fs(field(2), 3, 0, 1, 0, DEFAULT_POINT_BUDGET),
            Err(Error::InvalidDegree { .. })
        ));
    }

    #[test]
    fn kickback_holds() {
        let rep = verify_kickback(field(2), 2, 5, 3, 1 << 20).unwrap();
        assert!(rep.passed() && rep.max_deviation < KICKBACK_TOLERANCE);
        assert_eq!(rep.cases, 2 * 5 * 2);
        let rep4 = verify_kickback(field(4), 1, 5, 3, 1 << 20).unwrap();
        assert!(rep4.passed());
        assert!(matches!(
            verify_kickback(field(5), 12, 1, 0, 1 << 20),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn kickback_with_zero_constant_is_identity_on_data() {
        let ctx = field(3);
        let o = HiddenOracle::new(MultilinearPoly::random(ctx.clone(), 2, 2, 1).unwrap());
        let data = StateVector::<f64>::random(ctx, 2, 1 << 20, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut direct = data.clone();
        o.apply_phase_oracle(&mut direct, FieldElem::ZERO, &PointVec::zeros(2))
            .unwrap();
        assert_eq!(direct.max_deviation(&data).unwrap(), 0.0);
        assert!(kickback_deviation(&o, &data, FieldElem::ZERO).unwrap() < KICKBACK_TOLERANCE);
    }

    #[test]
    fn counting_examples() {
        let rep = verify_counting(field(2), 2, 1, CountMode::Auto, DEFAULT_COUNT_BUDGET).unwrap();
        assert_eq!(rep.expected_count, "8");
        assert_eq!(rep.distinct_functions, Some(8));
        assert!(rep.passed());

        // every Boolean function of two bits
        let rep = verify_counting(field(2), 2, 2, CountMode::Exhaustive, DEFAULT_COUNT_BUDGET).unwrap();
        assert_eq!(rep.distinct_functions, Some(16));

        let rep = verify_counting(field(3), 1, 1, CountMode::Auto, DEFAULT_COUNT_BUDGET).unwrap();
        assert_eq!(rep.enumerated, Some(9));

        let big = verify_counting(field(5), 6, 3, CountMode::Auto, DEFAULT_COUNT_BUDGET).unwrap();
        assert_eq!(big.mode, "formula");
        assert_eq!(big.expected_count, BigUint::from(5u32).pow(42).to_string());
        assert!(matches!(
            verify_counting(field(5), 6, 3, CountMode::Exhaustive, DEFAULT_COUNT_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn trial_seeds_are_reproducible() {
        assert_eq!(trial_seeds(7, 5), trial_seeds(7, 5));
        assert_ne!(trial_seeds(7, 5), trial_seeds(8, 5));
    }
}
