//! The learning algorithms.
//!
//! * [`classical_learn`] queries `f` on every 0/1 point of Hamming weight at
//!   most `d`, peeling off one degree at a time: `Σ_{i≤d} C(n,i)` queries.
//! * [`QuantumLearner::learn_linear`] recovers the linear part of an affine
//!   function with a single phase query followed by an inverse Fourier transform.
//! * [`QuantumLearner::learn`] learns the top-degree part from the `f_S`
//!   phase oracles for every `|S| = d − 1`, subtracts it, and recurses down to
//!   degree 1; a last classical query at `0^n` gives the constant. Total
//!   `1 + Σ_{i=1}^{d} 2^{i−1} C(n, i−1)` queries.

use std::collections::BTreeMap;
use std::marker::PhantomData;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::oracle::{reduce_oracle, Oracle};
use crate::poly::{binomial, check_dim, MultilinearPoly, PointVec, SubsetIndex};
use crate::scalar::SimFloat;
use crate::sim::{QftMatrix, StateVector, DEFAULT_MEM_CAP};

/// Result of one learning run.
#[derive(Clone, Debug)]
pub struct LearnReport {
    pub learned: MultilinearPoly,
    /// Ledger delta over the whole run.
    pub queries_used: u64,
    /// Queries spent per degree level, highest degree first, constant last.
    pub per_degree_queries: Vec<u64>,
}

/// `Σ_{i=0}^{d} C(n, i)`.
pub fn classical_query_count(n: usize, d: usize) -> u128 {
    (0..=d.min(n)).map(|i| binomial(n, i)).sum()
}

/// `1 + Σ_{i=1}^{d} 2^{i−1} C(n, i−1)`.
pub fn quantum_query_count(n: usize, d: usize) -> u128 {
    1 + (1..=d.min(n))
        .map(|i| (1u128 << (i - 1)) * binomial(n, i - 1))
        .sum::<u128>()
}

/// Learns `f` exactly from classical queries at 0/1 points of weight `≤ d`.
pub fn classical_learn<O: Oracle>(o: &O, n: usize, d: usize) -> Result<LearnReport> {
    check_dim(o.num_vars(), n)?;
    let start = o.queries();
    let mut learned = MultilinearPoly::zero(o.field().clone(), n, d)?;
    let d = learned.degree_bound();
    let ctx = o.field().clone();
    let mut per_degree = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let before = o.queries();
        let level: Vec<SubsetIndex> = SubsetIndex::of_size(n, k).collect();
        let mut found = Vec::with_capacity(level.len());
        for s in level {
            let x = PointVec::indicator(n, s);
            // f(1_S) = Σ_{T ⊆ S} α_T, and every T ⊊ S is already known.
            let value = o.classical_query(&x)?;
            found.push((s, ctx.sub(value, learned.evaluate(&x)?)));
        }
        for (s, alpha) in found {
            learned.set(s, alpha)?;
        }
        per_degree.push(o.queries() - before);
    }
    per_degree.reverse();
    Ok(LearnReport {
        learned,
        queries_used: o.queries() - start,
        per_degree_queries: per_degree,
    })
}

/// Outcome of a one-query linear learning run.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOutcome {
    /// The measured coefficient vector.
    pub a: PointVec,
    /// Probability of the measured outcome.
    pub probability: f64,
    /// Unit queries charged for the run.
    pub queries: u64,
}

/// The exact quantum learners, simulated with amplitudes of type `T`.
#[derive(Clone, Copy, Debug)]
pub struct QuantumLearner<T = f64> {
    mem_cap: usize,
    _scalar: PhantomData<T>,
}

impl<T: SimFloat> Default for QuantumLearner<T> {
    fn default() -> Self {
        Self::with_mem_cap(DEFAULT_MEM_CAP)
    }
}

impl<T: SimFloat> QuantumLearner<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_mem_cap(mem_cap: usize) -> Self {
        QuantumLearner {
            mem_cap,
            _scalar: PhantomData,
        }
    }

    pub fn mem_cap(&self) -> usize {
        self.mem_cap
    }

    /// Recovers `a` from an oracle promised to compute `a·x + β`, with one query.
    pub fn learn_linear<O: Oracle>(&self, o: &O, n: usize) -> Result<LinearOutcome> {
        check_dim(o.num_vars(), n)?;
        self.learn_fs_linear(o, SubsetIndex::EMPTY)
    }

    /// Runs the linear learner against the `f_S` phase oracle, costing `2^|S|`.
    ///
    /// When `f_S` is affine the measurement is deterministic and returns its
    /// linear coefficients; anything else is reported as `PromiseViolated`.
    pub fn learn_fs_linear<O: Oracle>(&self, o: &O, s: SubsetIndex) -> Result<LinearOutcome> {
        let ctx = o.field().clone();
        let mut psi = StateVector::<T>::prepare_uniform(ctx.clone(), o.num_vars(), self.mem_cap)?;
        o.apply_fs_phase_oracle(&mut psi, s, FieldElem::ONE)?;
        let inverse = QftMatrix::<T>::build(&ctx).inverse();
        psi.apply_all(inverse.as_slice())?;
        let (a, probability) = psi.measure_computational();
        let probability = probability.to_f64().unwrap_or(0.0);
        if probability < T::CERTAINTY {
            return Err(Error::PromiseViolated { probability });
        }
        Ok(LinearOutcome {
            a,
            probability,
            queries: 1 << s.len(),
        })
    }

    /// Learns the degree-`d` part of an oracle of degree `≤ d` from one `f_S`
    /// query per `(d−1)`-subset `S`, i.e. `2^{d−1} C(n, d−1)` queries.
    ///
    /// Each degree-`d` coefficient is determined once per `(d−1)`-subset of its
    /// support; all determinations must agree.
    pub fn learn_top_degree<O: Oracle>(&self, o: &O, n: usize, d: usize) -> Result<(MultilinearPoly, u64)> {
        check_dim(o.num_vars(), n)?;
        if d == 0 || d > n {
            return Err(Error::InvalidDegree { degree: d, max: n });
        }
        let before = o.queries();
        let subsets: Vec<SubsetIndex> = SubsetIndex::of_size(n, d - 1).collect();
        let outcomes: Vec<LinearOutcome> = subsets
            .par_iter()
            .map(|&s| self.learn_fs_linear(o, s))
            .collect::<Result<_>>()?;

        let mut determined: BTreeMap<SubsetIndex, FieldElem> = BTreeMap::new();
        for (s, outcome) in subsets.iter().zip(&outcomes) {
            for k in 1..=n {
                let a_k = outcome.a.get(k);
                if s.contains(k) {
                    if !a_k.is_zero() {
                        return Err(Error::InconsistentCoefficients(format!(
                            "f_S for S = {s:?} depends on x_{k}, a member of S"
                        )));
                    }
                    continue;
                }
                let t = s.with(k);
                match determined.get(&t) {
                    Some(&prev) if prev != a_k => {
                        return Err(Error::InconsistentCoefficients(format!(
                            "coefficient of {t:?} measured as {prev} and {a_k}"
                        )))
                    }
                    _ => {
                        determined.insert(t, a_k);
                    }
                }
            }
        }
        let top = MultilinearPoly::from_coeffs(o.field().clone(), n, d, determined)?;
        Ok((top, o.queries() - before))
    }

    /// Learns a multilinear polynomial of degree `≤ d` exactly.
    pub fn learn<O: Oracle>(&self, o: &O, n: usize, d: usize) -> Result<LearnReport> {
        check_dim(o.num_vars(), n)?;
        let start = o.queries();
        let mut known = MultilinearPoly::zero(o.field().clone(), n, d)?;
        let d = known.degree_bound();
        let mut per_degree = Vec::with_capacity(d + 1);
        for k in (1..=d).rev() {
            let view = reduce_oracle(o, known.clone())?;
            let before = o.queries();
            let (top, _) = self.learn_top_degree(&view, n, k)?;
            per_degree.push(o.queries() - before);
            known = known.add(&top)?;
        }
        let view = reduce_oracle(o, known.clone())?;
        let before = o.queries();
        let constant = view.classical_query(&PointVec::zeros(n))?;
        per_degree.push(o.queries() - before);
        known.set(SubsetIndex::EMPTY, constant)?;
        Ok(LearnReport {
            learned: known,
            queries_used: o.queries() - start,
            per_degree_queries: per_degree,
        })
    }
}

/// [`QuantumLearner::learn_linear`] in double precision with the default memory cap.
pub fn quantum_learn_linear<O: Oracle>(o: &O, n: usize) -> Result<LinearOutcome> {
    QuantumLearner::<f64>::new().learn_linear(o, n)
}

/// [`QuantumLearner::learn_top_degree`] in double precision with the default memory cap.
pub fn learn_top_degree<O: Oracle>(o: &O, n: usize, d: usize) -> Result<(MultilinearPoly, u64)> {
    QuantumLearner::<f64>::new().learn_top_degree(o, n, d)
}

/// [`QuantumLearner::learn`] in double precision with the default memory cap.
pub fn quantum_learn<O: Oracle>(o: &O, n: usize, d: usize) -> Result<LearnReport> {
    QuantumLearner::<f64>::new().learn(o, n, d)
}

/// Caveat attached to every lower-bound report.
pub const LOWER_BOUND_NOTE: &str = "formula reproduction only: asymptotic optimality is not verifiable at finite size";

/// Evaluation of the information-theoretic error bound for `r` queries.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LowerBoundReport {
    pub q: u32,
    pub n: usize,
    pub d: usize,
    pub r: u64,
    /// `1 − (2r(n+1) + 1/log₂q) / Σ_{i≤d} C(n,i)`.
    pub error_lower_bound: f64,
    /// Smallest `r` for which the bound drops to at most 1/3.
    pub min_queries_for_third: u64,
    pub note: &'static str,
}

/// `P_e ≥ 1 − (2r(n+1) + 1/log₂q) / Σ_{i≤d} C(n,i)`.
pub fn fano_error_bound(q: u32, n: usize, d: usize, r: u64) -> f64 {
    let total = classical_query_count(n, d) as f64;
    let numerator = 2.0 * r as f64 * (n as f64 + 1.0) + 1.0 / (q as f64).log2();
    1.0 - numerator / total
}

pub fn lower_bound_report(q: u32, n: usize, d: usize, r: u64) -> LowerBoundReport {
    let third = 1.0 / 3.0;
    let total = classical_query_count(n, d) as f64;
    let guess = ((2.0 / 3.0 * total - 1.0 / (q as f64).log2()) / (2.0 * (n as f64 + 1.0))).ceil();
    let mut min_r = if guess.is_finite() && guess > 0.0 {
        guess as u64
    } else {
        0
    };
    while min_r > 0 && fano_error_bound(q, n, d, min_r - 1) <= third {
        min_r -= 1;
    }
    while fano_error_bound(q, n, d, min_r) > third {
        min_r += 1;
    }
    LowerBoundReport {
        q,
        n,
        d,
        r,
        error_lower_bound: fano_error_bound(q, n, d, r),
        min_queries_for_third: min_r,
        note: LOWER_BOUND_NOTE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use crate::oracle::HiddenOracle;
    use std::sync::Arc;

    fn field(q: u32) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::with_order(q).unwrap())
    }

    fn s(members: &[usize]) -> SubsetIndex {
        SubsetIndex::from_members(members).unwrap()
    }

    fn poly(q: u32, n: usize, d: usize, terms: &[(&[usize], u32)]) -> MultilinearPoly {
        let ctx = field(q);
        let coeffs: Vec<_> = terms.iter().map(|(m, a)| (s(m), ctx.elem(*a).unwrap())).collect();
        MultilinearPoly::from_coeffs(ctx, n, d, coeffs).unwrap()
    }

    fn point(q: u32, coords: &[u32]) -> PointVec {
        let ctx = field(q);
        PointVec::new(coords.iter().map(|&c| ctx.elem(c).unwrap()).collect())
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(classical_query_count(4, 2), 11);
        assert_eq!(quantum_query_count(4, 2), 10);
        assert_eq!(quantum_query_count(7, 1), 2);
        assert_eq!(quantum_query_count(5, 3), 52);
        assert_eq!(quantum_query_count(3, 0), 1);
        assert_eq!(classical_query_count(3, 0), 1);
    }

    #[test]
    fn classical_learner_examples() {
        let f = MultilinearPoly::random(field(3), 4, 2, 5).unwrap();
        let o = HiddenOracle::new(f.clone());
        let report = classical_learn(&o, 4, 2).unwrap();
        assert_eq!(report.queries_used, 11);
        assert_eq!(report.per_degree_queries, vec![6, 4, 1]);
        assert!(report.learned.poly_equal(&f).unwrap());

        let c = poly(5, 3, 0, &[(&[], 4)]);
        let report = classical_learn(&HiddenOracle::new(c.clone()), 3, 0).unwrap();
        assert_eq!(report.queries_used, 1);
        assert_eq!(report.learned, c);
    }

    #[test]
    fn linear_learner_examples() {
        let g = HiddenOracle::new(poly(2, 3, 1, &[(&[1], 1), (&[3], 1)]));
        let out = quantum_learn_linear(&g, 3).unwrap();
        assert_eq!(out.a, point(2, &[1, 0, 1]));
        assert_eq!(g.queries(), 1);

        let constant = HiddenOracle::new(poly(5, 2, 1, &[(&[], 3)]));
        assert_eq!(quantum_learn_linear(&constant, 2).unwrap().a, PointVec::zeros(2));

        let g5 = HiddenOracle::new(poly(5, 2, 1, &[(&[1], 2), (&[2], 4), (&[], 3)]));
        let out = quantum_learn_linear(&g5, 2).unwrap();
        assert_eq!(out.a, point(5, &[2, 4]));
        assert!(out.probability > 1.0 - 1e-9);
        assert_eq!(g5.queries(), 1);

        // g = x1 + x2 + 1 over F_2
        let bv = HiddenOracle::new(poly(2, 2, 1, &[(&[1], 1), (&[2], 1), (&[], 1)]));
        let out = quantum_learn_linear(&bv, 2).unwrap();
        assert_eq!(out.a, point(2, &[1, 1]));
        assert!((out.probability - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_affine_oracle_violates_the_promise() {
        let o = HiddenOracle::new(poly(3, 2, 2, &[(&[1, 2], 1)]));
        assert!(matches!(
            quantum_learn_linear(&o, 2),
            Err(Error::PromiseViolated { .. })
        ));
    }

    #[test]
    fn top_degree_examples() {
        let f = MultilinearPoly::random(field(5), 3, 1, 9).unwrap();
        let o = HiddenOracle::new(f.clone());
        let (top, queries) = learn_top_degree(&o, 3, 1).unwrap();
        assert_eq!(queries, 1);
        assert_eq!(top, f.degree_part(1).unwrap());

        let g = poly(2, 3, 2, &[(&[1, 2], 1)]);
        let o = HiddenOracle::new(g.clone());
        let (top, queries) = learn_top_degree(&o, 3, 2).unwrap();
        assert_eq!(queries, 6);
        assert_eq!(top, g);

        let h = MultilinearPoly::random(field(2), 5, 3, 77).unwrap();
        let o = HiddenOracle::new(h.clone());
        let (top, queries) = learn_top_degree(&o, 5, 3).unwrap();
        assert_eq!(queries, 40);
        assert_eq!(top, h.degree_part(3).unwrap());
    }

    #[test]
    fn over_degree_oracle_is_rejected() {
        let f = poly(3, 3, 3, &[(&[1, 2, 3], 1)]);
        let o = HiddenOracle::new(f);
        let err = learn_top_degree(&o, 3, 2).unwrap_err();
        assert!(matches!(
            err,
            Error::PromiseViolated { .. } | Error::InconsistentCoefficients(_)
        ));
    }

    #[test]
    fn full_quantum_learner() {
        for seed in 0..100 {
            let f = MultilinearPoly::random(field(2), 5, 3, seed).unwrap();
            let o = HiddenOracle::new(f.clone());
            let report = quantum_learn(&o, 5, 3).unwrap();
            assert_eq!(report.queries_used, 52);
            assert_eq!(report.per_degree_queries, vec![40, 10, 1, 1]);
            assert_eq!(report.learned, f);
        }
        for q in [3, 4, 5, 7] {
            let f = MultilinearPoly::random(field(q), 4, 2, q as u64).unwrap();
            let o = HiddenOracle::new(f.clone());
            let report = quantum_learn(&o, 4, 2).unwrap();
            assert_eq!(report.queries_used, 10);
            assert_eq!(report.learned, f);
            let d1 = MultilinearPoly::random(field(q), 4, 1, 1).unwrap();
            assert_eq!(quantum_learn(&HiddenOracle::new(d1), 4, 1).unwrap().queries_used, 2);
        }
    }

    #[test]
    fn single_precision_learner() {
        let f = MultilinearPoly::random(field(3), 4, 2, 3).unwrap();
        let o = HiddenOracle::new(f.clone());
        let report = QuantumLearner::<f32>::new().learn(&o, 4, 2).unwrap();
        assert_eq!(report.learned, f);
    }

    #[test]
    fn memory_cap_is_enforced() {
        let f = MultilinearPoly::random(field(5), 6, 2, 3).unwrap();
        let o = HiddenOracle::new(f);
        let err = QuantumLearner::<f64>::with_mem_cap(1000).learn(&o, 6, 2).unwrap_err();
        assert!(err.is_resource_limit());
    }

    #[test]
    fn lower_bound_examples() {
        let rep = lower_bound_report(2, 10, 2, 2);
        assert!((rep.error_lower_bound - (1.0 - 45.0 / 56.0)).abs() < 1e-15);
        assert_eq!(rep.min_queries_for_third, 2);
        assert!((fano_error_bound(2, 10, 2, 1) - (1.0 - 23.0 / 56.0)).abs() < 1e-15);

        let mut prev = f64::INFINITY;
        for r in 0..50 {
            let b = fano_error_bound(3, 6, 3, r);
            assert!(b <= prev);
            prev = b;
        }
        assert!(fano_error_bound(2, 200, 3, 0) > 0.999_999);
        for (q, n, d) in [(2, 4, 2), (5, 12, 3), (4, 3, 1)] {
            let rep = lower_bound_report(q, n, d, 0);
            let m = rep.min_queries_for_third;
            assert!(fano_error_bound(q, n, d, m) <= 1.0 / 3.0);
            assert!(m == 0 || fano_error_bound(q, n, d, m - 1) > 1.0 / 3.0);
        }
    }
}
