//! Multilinear polynomials `f(x) = Σ_{|S| ≤ d} α_S ∏_{i ∈ S} x_i` over F_q^n.

mod json;
mod subset;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use self::json::{CoeffEntry, PolyFile};
pub use self::subset::{binomial, SubsetIndex, MAX_VARS};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};

/// A point of F_q^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointVec(Vec<FieldElem>);

impl PointVec {
    pub fn new(coords: Vec<FieldElem>) -> Self {
        PointVec(coords)
    }

    pub fn zeros(n: usize) -> Self {
        PointVec(vec![FieldElem::ZERO; n])
    }

    /// The standard basis vector `e_i` (1-based).
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        let mut v = Self::zeros(n);
        v.0[i - 1] = FieldElem::ONE;
        Ok(v)
    }

    /// The 0/1 vector with ones exactly on `s`.
    pub fn indicator(n: usize, s: SubsetIndex) -> Self {
        let mut v = Self::zeros(n);
        for i in s.iter().filter(|&i| i <= n) {
            v.0[i - 1] = FieldElem::ONE;
        }
        v
    }

    /// Decodes a mixed-radix index; coordinate 1 is the most significant digit.
    pub fn from_index(q: u32, n: usize, mut index: usize) -> Self {
        let mut coords = vec![FieldElem::ZERO; n];
        for c in coords.iter_mut().rev() {
            *c = FieldElem::from_raw(index as u32 % q);
            index /= q as usize;
        }
        PointVec(coords)
    }

    pub fn to_index(&self, q: u32) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, c| acc * q as usize + c.value() as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[FieldElem] {
        &self.0
    }

    /// Coordinate `i`, 1-based.
    pub fn get(&self, i: usize) -> FieldElem {
        self.0[i - 1]
    }

    pub fn add(&self, ctx: &FieldCtx, other: &PointVec) -> Result<PointVec> {
        check_dim(self.len(), other.len())?;
        Ok(PointVec(
            self.0.iter().zip(&other.0).map(|(&a, &b)| ctx.add(a, b)).collect(),
        ))
    }

    /// Number of nonzero coordinates.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn is_valid_in(&self, ctx: &FieldCtx) -> bool {
        self.0.iter().all(|&c| ctx.contains(c))
    }
}

impl std::fmt::Display for PointVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// A multilinear polynomial of degree at most `d` in `n` variables.
///
/// Coefficients are kept sparse; zero coefficients are never stored, so two
/// polynomials are equal exactly when their maps are.
#[derive(Clone, Debug)]
pub struct MultilinearPoly {
    ctx: Arc<FieldCtx>,
    n: usize,
    d: usize,
    coeffs: BTreeMap<SubsetIndex, FieldElem>,
}

impl MultilinearPoly {
    /// The zero polynomial. `d > n` is clamped to `n`.
    pub fn zero(ctx: Arc<FieldCtx>, n: usize, d: usize) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: MAX_VARS,
            });
        }
        let d = if d > n {
            log::warn!("degree bound {d} exceeds variable count {n}; clamping to {n}");
            n
        } else {
            d
        };
        Ok(MultilinearPoly {
            ctx,
            n,
            d,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn from_coeffs(
        ctx: Arc<FieldCtx>,
        n: usize,
        d: usize,
        coeffs: impl IntoIterator<Item = (SubsetIndex, FieldElem)>,
    ) -> Result<Self> {
        let mut f = Self::zero(ctx, n, d)?;
        for (s, a) in coeffs {
            f.set(s, a)?;
        }
        Ok(f)
    }

    /// Every coefficient drawn independently and uniformly from F_q.
    pub fn random(ctx: Arc<FieldCtx>, n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut f = Self::zero(ctx, n, d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = f.ctx.order();
        let subsets: Vec<_> = SubsetIndex::up_to(n, f.d).collect();
        for s in subsets {
            let a = f.ctx.elem(rng.random_range(0..q))?;
            f.set(s, a)?;
        }
        Ok(f)
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.d
    }

    /// Largest `|S|` with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn coeff(&self, s: SubsetIndex) -> FieldElem {
        self.coeffs.get(&s).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn set(&mut self, s: SubsetIndex, alpha: FieldElem) -> Result<()> {
        if s.max_member() > self.n {
            return Err(Error::IndexOutOfRange {
                index: s.max_member(),
                max: self.n,
            });
        }
        if s.len() > self.d {
            return Err(Error::InvalidDegree {
                degree: s.len(),
                max: self.d,
            });
        }
        if !self.ctx.contains(alpha) {
            return Err(Error::InvalidField(format!(
                "coefficient {alpha} outside [0, {})",
                self.ctx.order()
            )));
        }
        if alpha.is_zero() {
            self.coeffs.remove(&s);
        } else {
            self.coeffs.insert(s, alpha);
        }
        Ok(())
    }

    /// Nonzero coefficients in canonical subset order.
    pub fn terms(&self) -> impl Iterator<Item = (SubsetIndex, FieldElem)> + '_ {
        self.coeffs.iter().map(|(&s, &a)| (s, a))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn evaluate(&self, x: &PointVec) -> Result<FieldElem> {
        check_dim(self.n, x.len())?;
        let ctx = &*self.ctx;
        let mut acc = FieldElem::ZERO;
        for (s, &alpha) in &self.coeffs {
            let mut term = alpha;
            for i in s.iter() {
                term = ctx.mul(term, x.get(i));
                if term.is_zero() {
                    break;
                }
            }
            acc = ctx.add(acc, term);
        }
        Ok(acc)
    }

    /// The values of `f` on all of F_q^n, indexed as in [`PointVec::from_index`].
    ///
    /// Runs a per-variable transform from the `{0,1}^n` coefficient cube, so
    /// the cost is `O(n q^n)` independent of the number of terms.
    pub fn truth_table(&self) -> Vec<FieldElem> {
        let ctx = &*self.ctx;
        let q = ctx.order() as usize;
        let n = self.n;
        let mut cur = vec![FieldElem::ZERO; 1usize << n];
        for (s, &a) in &self.coeffs {
            let idx = s.iter().map(|i| 1usize << (n - i)).sum::<usize>();
            cur[idx] = a;
        }
        let values: Vec<FieldElem> = ctx.elements().collect();
        for j in 1..=n {
            let outer = q.pow(j as u32 - 1);
            let inner = 1usize << (n - j);
            let mut next = vec![FieldElem::ZERO; outer * q * inner];
            for o in 0..outer {
                let src = o * 2 * inner;
                let dst = o * q * inner;
                for (v, &val) in values.iter().enumerate() {
                    for k in 0..inner {
                        let c0 = cur[src + k];
                        let c1 = cur[src + inner + k];
                        next[dst + v * inner + k] = ctx.add(c0, ctx.mul(val, c1));
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// The part of `f` of exact degree `k`.
    pub fn degree_part(&self, k: usize) -> Result<Self> {
        if k > self.d {
            return Err(Error::InvalidDegree { degree: k, max: self.d });
        }
        Ok(MultilinearPoly {
            ctx: self.ctx.clone(),
            n: self.n,
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(s, _)| s.len() == k)
                .map(|(&s, &a)| (s, a))
                .collect(),
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx || self.n != other.n {
            Err(Error::ContextMismatch)
        } else {
            Ok(())
        }
    }

    /// Coefficient-wise combination; the degree bound is the larger of the two.
    fn combine(&self, other: &Self, op: impl Fn(FieldElem, FieldElem) -> FieldElem) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = MultilinearPoly {
            ctx: self.ctx.clone(),
            n: self.n,
            d: self.d.max(other.d),
            coeffs: self.coeffs.clone(),
        };
        for (&s, &b) in &other.coeffs {
            let v = op(out.coeff(s), b);
            out.set(s, v)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| self.ctx.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| self.ctx.sub(a, b))
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&s, &a)| (s, self.ctx.mul(c, a)))
            .filter(|(_, a)| !a.is_zero())
            .collect();
        MultilinearPoly { coeffs, ..self.clone() }
    }

    /// Coefficient equality; errors when the polynomials live in different spaces.
    pub fn poly_equal(&self, other: &Self) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.coeffs == other.coeffs)
    }

    /// `f_S(x) = Σ_{β ∈ {0,1}^k} (-1)^{k-|β|} f(x + Σ_j β_j e_{S_j})`.
    pub fn derivative_fn(&self, s: SubsetIndex) -> Result<DerivativeFn<'_>> {
        if s.max_member() > self.n {
            return Err(Error::IndexOutOfRange {
                index: s.max_member(),
                max: self.n,
            });
        }
        Ok(DerivativeFn { f: self, set: s })
    }

    /// The polynomial `Δ_i f = f(x + e_i) - f(x)`.
    ///
    /// For a multilinear `f` this keeps exactly the monomials containing `x_i`
    /// with `x_i` removed.
    pub fn discrete_derivative(&self, i: usize) -> Result<Self> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange { index: i, max: self.n });
        }
        Ok(MultilinearPoly {
            ctx: self.ctx.clone(),
            n: self.n,
            d: self.d.saturating_sub(1),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(s, _)| s.contains(i))
                .map(|(&s, &a)| (s.without(i), a))
                .collect(),
        })
    }
}

impl PartialEq for MultilinearPoly {
    fn eq(&self, other: &Self) -> bool {
        self.poly_equal(other).unwrap_or(false)
    }
}

/// The alternating-sum function `f_S`, evaluated by its defining formula.
#[derive(Clone, Copy, Debug)]
pub struct DerivativeFn<'a> {
    f: &'a MultilinearPoly,
    set: SubsetIndex,
}

impl DerivativeFn<'_> {
    /// Number of evaluations of `f` per evaluation of `f_S`: `2^|S|`.
    pub fn cost(&self) -> u64 {
        1u64 << self.set.len()
    }

    pub fn subset(&self) -> SubsetIndex {
        self.set
    }

    pub fn eval(&self, x: &PointVec) -> Result<FieldElem> {
        check_dim(self.f.n, x.len())?;
        let ctx = &*self.f.ctx;
        let members = self.set.members();
        let k = members.len();
        let mut acc = FieldElem::ZERO;
        for beta in 0u64..(1 << k) {
            let mut point = x.clone();
            for (j, &m) in members.iter().enumerate() {
                if beta >> j & 1 == 1 {
                    point.0[m - 1] = ctx.add(point.0[m - 1], FieldElem::ONE);
                }
            }
            let ones = beta.count_ones() as usize;
            let v = self.f.evaluate(&point)?;
            acc = ctx.add(acc, ctx.mul(ctx.sign(k - ones), v));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    /// Term-by-term evaluation with integer arithmetic, valid for prime q.
    fn naive_prime_eval(f: &MultilinearPoly, x: &[u32]) -> u32 {
        let q = f.field().order() as u64;
        f.terms()
            .map(|(s, a)| s.iter().fold(a.value() as u64, |acc, i| acc * x[i - 1] as u64 % q))
            .sum::<u64>() as u32
            % q as u32
    }

    #[test]
    fn evaluate_examples() {
        let f = poly(2, 2, 2, &[(&[], 1), (&[1, 2], 1)]);
        assert_eq!(f.evaluate(&point(2, &[1, 1])).unwrap().value(), 0);

        let g = poly(5, 3, 3, &[(&[1], 2), (&[1, 2], 4), (&[1, 2, 3], 1)]);
        let x = [1, 1, 1];
        assert_eq!(g.evaluate(&point(5, &x)).unwrap().value(), 2);
        assert_eq!(naive_prime_eval(&g, &x), 2);

        let h = MultilinearPoly::random(field(4), 3, 2, 7).unwrap();
        assert_eq!(h.evaluate(&PointVec::zeros(3)).unwrap(), h.coeff(SubsetIndex::EMPTY));

        assert!(matches!(
            g.evaluate(&PointVec::zeros(2)),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn truth_table_matches_pointwise_evaluation() {
        for q in [2, 3, 4, 5] {
            for n in 0..=3 {
                let f = MultilinearPoly::random(field(q), n, n, 11 + n as u64).unwrap();
                let table = f.truth_table();
                assert_eq!(table.len(), (q as usize).pow(n as u32));
                for (idx, &v) in table.iter().enumerate() {
                    let x = PointVec::from_index(q, n, idx);
                    assert_eq!(x.to_index(q), idx);
                    assert_eq!(f.evaluate(&x).unwrap(), v);
                }
            }
        }
    }

    #[test]
    fn degree_parts() {
        let f = poly(5, 2, 2, &[(&[], 1), (&[1], 1), (&[1, 2], 1)]);
        assert_eq!(f.degree_part(1).unwrap(), poly(5, 2, 2, &[(&[1], 1)]));
        assert_eq!(f.degree_part(0).unwrap(), poly(5, 2, 2, &[(&[], 1)]));
        assert!(matches!(f.degree_part(3), Err(Error::InvalidDegree { .. })));

        let g = poly(5, 3, 3, &[(&[1], 2), (&[1, 2], 4), (&[1, 2, 3], 1)]);
        assert_eq!(g.degree_part(3).unwrap(), poly(5, 3, 3, &[(&[1, 2, 3], 1)]));
    }

    #[test]
    fn derivative_fn_examples() {
        // f = x1 x2 over F_2, S = {1}: f_S = x2
        let f = poly(2, 2, 2, &[(&[1, 2], 1)]);
        let fs = f.derivative_fn(s(&[1])).unwrap();
        assert_eq!(fs.cost(), 2);
        for idx in 0..4 {
            let x = PointVec::from_index(2, 2, idx);
            assert_eq!(fs.eval(&x).unwrap(), x.get(2));
        }

        let g = MultilinearPoly::random(field(5), 3, 3, 3).unwrap();
        let g0 = g.derivative_fn(SubsetIndex::EMPTY).unwrap();
        assert_eq!(g0.cost(), 1);
        let ctx = g.field().clone();
        let (e1, e2) = (PointVec::basis(3, 1).unwrap(), PointVec::basis(3, 2).unwrap());
        let g12 = g.derivative_fn(s(&[1, 2])).unwrap();
        for idx in 0..125 {
            let x = PointVec::from_index(5, 3, idx);
            assert_eq!(g0.eval(&x).unwrap(), g.evaluate(&x).unwrap());
            // f(x) - f(x+e1) - f(x+e2) + f(x+e1+e2)
            let x1 = x.add(&ctx, &e1).unwrap();
            let x2 = x.add(&ctx, &e2).unwrap();
            let x12 = x1.add(&ctx, &e2).unwrap();
            let ev = |p: &PointVec| g.evaluate(p).unwrap();
            let expected = ctx.add(ctx.sub(ctx.sub(ev(&x), ev(&x1)), ev(&x2)), ev(&x12));
            assert_eq!(g12.eval(&x).unwrap(), expected);
        }
    }

    #[test]
    fn discrete_derivative_examples() {
        let f = poly(5, 3, 2, &[(&[1, 2], 1)]);
        assert_eq!(f.discrete_derivative(1).unwrap(), poly(5, 3, 2, &[(&[2], 1)]));
        assert!(f.discrete_derivative(3).unwrap().is_zero());
        assert!(matches!(f.discrete_derivative(4), Err(Error::IndexOutOfRange { .. })));

        for q in [2, 3, 4, 5, 7] {
            let ctx = field(q);
            let five = ctx.from_int(5);
            let g = MultilinearPoly::from_coeffs(
                ctx.clone(),
                2,
                2,
                [
                    (s(&[1, 2]), FieldElem::ONE),
                    (s(&[1]), FieldElem::ONE),
                    (SubsetIndex::EMPTY, five),
                ],
            )
            .unwrap();
            let dd = g.discrete_derivative(2).unwrap().discrete_derivative(1).unwrap();
            assert_eq!(dd.coeff(SubsetIndex::EMPTY), FieldElem::ONE);
            assert_eq!(dd.num_terms(), 1);
            let fs = g.derivative_fn(s(&[1, 2])).unwrap();
            for idx in 0..(q as usize).pow(2) {
                let x = PointVec::from_index(q, 2, idx);
                assert_eq!(fs.eval(&x).unwrap(), dd.evaluate(&x).unwrap());
            }
        }
    }

    #[test]
    fn random_is_deterministic_and_covers_the_space() {
        let ctx = field(3);
        let a = MultilinearPoly::random(ctx.clone(), 4, 2, 99).unwrap();
        let b = MultilinearPoly::random(ctx.clone(), 4, 2, 99).unwrap();
        assert_eq!(a, b);

        let f2 = field(2);
        let outcomes: std::collections::HashSet<u32> = (0..64)
            .map(|seed| {
                MultilinearPoly::random(f2.clone(), 1, 0, seed)
                    .unwrap()
                    .coeff(SubsetIndex::EMPTY)
                    .value()
            })
            .collect();
        assert_eq!(outcomes.len(), 2);
    }

    #[test]
    fn equality_and_zero_handling() {
        let f = MultilinearPoly::random(field(5), 3, 2, 1).unwrap();
        assert!(f.poly_equal(&f).unwrap());
        let mut g = f.clone();
        let t = s(&[1, 3]);
        g.set(t, f.field().add(f.coeff(t), FieldElem::ONE)).unwrap();
        assert!(!f.poly_equal(&g).unwrap());

        let mut h = poly(5, 2, 2, &[(&[1], 3)]);
        h.set(s(&[2]), FieldElem::ZERO).unwrap();
        assert!(h.poly_equal(&poly(5, 2, 2, &[(&[1], 3)])).unwrap());

        let other = MultilinearPoly::zero(field(3), 3, 2).unwrap();
        assert!(matches!(f.poly_equal(&other), Err(Error::ContextMismatch)));
    }

    #[test]
    fn degree_clamps_and_rejects_oversized_terms() {
        let f = MultilinearPoly::zero(field(2), 2, 5).unwrap();
        assert_eq!(f.degree_bound(), 2);
        let mut g = MultilinearPoly::zero(field(2), 3, 1).unwrap();
        assert!(matches!(
            g.set(s(&[1, 2]), FieldElem::ONE),
            Err(Error::InvalidDegree { .. })
        ));
        assert!(g.set(s(&[4]), FieldElem::ONE).is_err());
    }
}
