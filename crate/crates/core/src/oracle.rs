//! Counted access to a hidden polynomial.
//!
//! Every learner talks to the secret only through [`Oracle`]. Unit costs:
//! one classical evaluation, one standard-oracle application `O_f`, or one
//! phase-oracle application each charge 1 to the shared [`QueryLedger`]; an
//! `f_S` phase oracle is a composition of `2^|S|` phase oracles and is charged
//! accordingly.
//!
//! The phase oracle multiplies `|x⟩` by `ω^{Tr(c·f(x+shift))}`. It stands for
//! the kickback circuit: an ancilla prepared as `Q_q^{-1}|c⟩`, one `O_f`, with
//! the data register shifted by `shift` before and after. Neither the ancilla
//! preparation nor the shifts touch `f`, so the whole map costs one query.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::poly::{check_dim, MultilinearPoly, PointVec, SubsetIndex};
use crate::scalar::{roots_of_unity, SimFloat};
use crate::sim::StateVector;

/// Monotone count of unit-cost oracle invocations. Safe to share across threads.
#[derive(Debug, Default)]
pub struct QueryLedger(AtomicU64);

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }

    pub(crate) fn charge(&self, cost: u64) {
        self.0.fetch_add(cost, Ordering::SeqCst);
    }
}

/// Query access to some function `F_q^n → F_q`.
pub trait Oracle: Sync {
    fn field(&self) -> &Arc<FieldCtx>;

    fn num_vars(&self) -> usize;

    fn ledger(&self) -> &QueryLedger;

    /// `f(x)`; costs 1.
    fn classical_query(&self, x: &PointVec) -> Result<FieldElem>;

    /// `|x⟩|y⟩ ↦ |x⟩|y + f(x)⟩` on an `(n+1)`-register state whose last
    /// register is the ancilla; costs 1.
    fn apply_standard_oracle<T: SimFloat>(&self, psi: &mut StateVector<T>) -> Result<()>;

    /// `|x⟩ ↦ ω^{Tr(c·f(x+shift))}|x⟩` on an `n`-register state; costs 1.
    fn apply_phase_oracle<T: SimFloat>(&self, psi: &mut StateVector<T>, c: FieldElem, shift: &PointVec) -> Result<()>;

    /// `|x⟩ ↦ ω^{Tr(c·f_S(x))}|x⟩`, built from `2^|S|` phase-oracle calls.
    fn apply_fs_phase_oracle<T: SimFloat>(&self, psi: &mut StateVector<T>, s: SubsetIndex, c: FieldElem) -> Result<()> {
        for (coeff, shift) in fs_phase_terms(self.field(), self.num_vars(), s, c)? {
            self.apply_phase_oracle(psi, coeff, &shift)?;
        }
        Ok(())
    }

    fn queries(&self) -> u64 {
        self.ledger().count()
    }
}

/// The `(c·(−1)^{|S|−|β|}, Σ_j β_j e_{S_j})` pairs, one per `β ∈ {0,1}^{|S|}`,
/// whose phase oracles compose to the `f_S` phase oracle.
pub fn fs_phase_terms(ctx: &FieldCtx, n: usize, s: SubsetIndex, c: FieldElem) -> Result<Vec<(FieldElem, PointVec)>> {
    if s.max_member() > n {
        return Err(Error::IndexOutOfRange {
            index: s.max_member(),
            max: n,
        });
    }
    let members = s.members();
    let k = members.len();
    Ok((0u64..1 << k)
        .map(|beta| {
            let mut coords = vec![FieldElem::ZERO; n];
            for (j, &m) in members.iter().enumerate() {
                if beta >> j & 1 == 1 {
                    coords[m - 1] = FieldElem::ONE;
                }
            }
            let sign = ctx.sign(k - beta.count_ones() as usize);
            (ctx.mul(c, sign), PointVec::new(coords))
        })
        .collect())
}

/// `perm[index(x)] = index(x + shift)` over all of F_q^n.
fn shifted_indices(ctx: &FieldCtx, shift: &PointVec, dim: usize) -> Vec<usize> {
    let q = ctx.order() as usize;
    let n = shift.len();
    let mut perm: Vec<usize> = (0..dim).collect();
    for (j, &s) in shift.coords().iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        let weight = q.pow((n - 1 - j) as u32);
        let moved: Vec<usize> = ctx.elements().map(|v| ctx.add(v, s).value() as usize).collect();
        for (idx, slot) in perm.iter_mut().enumerate() {
            let digit = idx / weight % q;
            *slot = *slot + moved[digit] * weight - digit * weight;
        }
    }
    perm
}

/// `ω^{±Tr(c·v)}` for every field value `v`.
fn phase_by_value<T: SimFloat>(ctx: &FieldCtx, c: FieldElem, conjugate: bool) -> Vec<Complex<T>> {
    let p = ctx.characteristic();
    let roots = roots_of_unity::<T>(p);
    ctx.elements()
        .map(|v| {
            let t = ctx.trace(ctx.mul(c, v));
            roots[if conjugate { ((p - t) % p) as usize } else { t as usize }]
        })
        .collect()
}

/// Multiplies `|x⟩` by `ω^{±Tr(c·g(x+shift))}` where `table` holds the values of `g`.
fn apply_table_phase<T: SimFloat>(
    psi: &mut StateVector<T>,
    table: &[FieldElem],
    c: FieldElem,
    shift: &PointVec,
    conjugate: bool,
) -> Result<()> {
    check_dim(table.len(), psi.dim())?;
    check_dim(shift.len(), psi.num_registers())?;
    if c.is_zero() {
        return Ok(());
    }
    let ctx = psi.field().clone();
    let phases = phase_by_value::<T>(&ctx, c, conjugate);
    let perm = shifted_indices(&ctx, shift, table.len());
    for (amp, &src) in psi.amplitudes_mut().iter_mut().zip(&perm) {
        *amp = *amp * phases[table[src].value() as usize];
    }
    Ok(())
}

/// Adds `±g(x)` into the ancilla of `|x⟩|y⟩`, with `table` holding `g`.
fn apply_table_shift<T: SimFloat>(psi: &mut StateVector<T>, table: &[FieldElem], subtract: bool) -> Result<()> {
    let ctx = psi.field().clone();
    let q = ctx.order() as usize;
    check_dim(table.len() * q, psi.dim())?;
    let amps = psi.amplitudes_mut();
    let mut fiber = vec![Complex::new(T::zero(), T::zero()); q];
    for (x, &v) in table.iter().enumerate() {
        let v = if subtract { ctx.neg(v) } else { v };
        if v.is_zero() {
            continue;
        }
        let base = x * q;
        fiber.copy_from_slice(&amps[base..base + q]);
        for (y, &a) in ctx.elements().zip(&fiber) {
            amps[base + ctx.add(y, v).value() as usize] = a;
        }
    }
    Ok(())
}

/// The hidden polynomial behind a counted interface.
#[derive(Debug)]
pub struct HiddenOracle {
    secret: MultilinearPoly,
    table: OnceLock<Vec<FieldElem>>,
    ledger: QueryLedger,
}

impl HiddenOracle {
    pub fn new(secret: MultilinearPoly) -> Self {
        HiddenOracle {
            secret,
            table: OnceLock::new(),
            ledger: QueryLedger::new(),
        }
    }

    // The full truth table is the oracle's own machinery; building it is not a query.
    fn table(&self) -> &[FieldElem] {
        self.table.get_or_init(|| self.secret.truth_table())
    }
}

impl Oracle for HiddenOracle {
    fn field(&self) -> &Arc<FieldCtx> {
        self.secret.field()
    }

    fn num_vars(&self) -> usize {
        self.secret.num_vars()
    }

    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    fn classical_query(&self, x: &PointVec) -> Result<FieldElem> {
        let v = self.secret.evaluate(x)?;
        self.ledger.charge(1);
        Ok(v)
    }

    fn apply_standard_oracle<T: SimFloat>(&self, psi: &mut StateVector<T>) -> Result<()> {
        check_dim(self.num_vars() + 1, psi.num_registers())?;
        apply_table_shift(psi, self.table(), false)?;
        self.ledger.charge(1);
        Ok(())
    }

    fn apply_phase_oracle<T: SimFloat>(&self, psi: &mut StateVector<T>, c: FieldElem, shift: &PointVec) -> Result<()> {
        check_dim(self.num_vars(), psi.num_registers())?;
        apply_table_phase(psi, self.table(), c, shift, false)?;
        self.ledger.charge(1);
        Ok(())
    }
}

/// A view of `f − known`: queries go to the wrapped oracle and the known part
/// is subtracted classically, so costs are exactly those of the wrapped oracle.
#[derive(Debug)]
pub struct ReducedOracle<'a, O> {
    inner: &'a O,
    known: MultilinearPoly,
    table: OnceLock<Vec<FieldElem>>,
}

/// Wraps `o` so that it behaves as `f − known`.
pub fn reduce_oracle<O: Oracle>(o: &O, known: MultilinearPoly) -> Result<ReducedOracle<'_, O>> {
    if **known.field() != **o.field() || known.num_vars() != o.num_vars() {
        return Err(Error::ContextMismatch);
    }
    Ok(ReducedOracle {
        inner: o,
        known,
        table: OnceLock::new(),
    })
}

impl<O: Oracle> ReducedOracle<'_, O> {
    pub fn known(&self) -> &MultilinearPoly {
        &self.known
    }

    fn table(&self) -> &[FieldElem] {
        self.table.get_or_init(|| self.known.truth_table())
    }
}

impl<O: Oracle> Oracle for ReducedOracle<'_, O> {
    fn field(&self) -> &Arc<FieldCtx> {
        self.inner.field()
    }

    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn ledger(&self) -> &QueryLedger {
        self.inner.ledger()
    }

    fn classical_query(&self, x: &PointVec) -> Result<FieldElem> {
        let correction = self.known.evaluate(x)?;
        let v = self.inner.classical_query(x)?;
        Ok(self.field().sub(v, correction))
    }

    fn apply_standard_oracle<T: SimFloat>(&self, psi: &mut StateVector<T>) -> Result<()> {
        check_dim(self.num_vars() + 1, psi.num_registers())?;
        self.inner.apply_standard_oracle(psi)?;
        apply_table_shift(psi, self.table(), true)
    }

    fn apply_phase_oracle<T: SimFloat>(&self, psi: &mut StateVector<T>, c: FieldElem, shift: &PointVec) -> Result<()> {
        check_dim(self.num_vars(), psi.num_registers())?;
        // Tr is additive, so ω^{Tr(c(f−k))} = ω^{Tr(cf)} · ω^{−Tr(ck)}.
        apply_table_phase(psi, self.table(), c, shift, true)?;
        self.inner.apply_phase_oracle(psi, c, shift)
    }
}
