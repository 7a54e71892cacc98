//! Dense state vectors over registers of dimension `q`, and the Fourier
//! transform over F_q.
//!
//! A state on `n` registers has `q^n` amplitudes. Basis label `(x_1, …, x_n)`
//! lives at the mixed-radix index with register 1 as the most significant
//! digit, matching [`PointVec::from_index`].

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::poly::{check_dim, PointVec};
use crate::scalar::{roots_of_unity, SimFloat};

/// Default cap on the number of amplitudes in one state (`2^24`, 256 MiB at `f64`).
pub const DEFAULT_MEM_CAP: usize = 1 << 24;

/// `q^n`, or `MemoryLimitExceeded` when it is above `cap`.
pub fn state_dim(q: u32, n: usize, cap: usize) -> Result<usize> {
    let requested = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if requested > cap as u128 {
        return Err(Error::MemoryLimitExceeded { requested, cap });
    }
    Ok(requested as usize)
}

/// The `q × q` unitary `Q_q`, entry `(y, x) = ω^{Tr(xy)} / √q` with `ω = e^{2πi/p}`.
#[derive(Clone, Debug)]
pub struct QftMatrix<T> {
    q: usize,
    // row-major: entries[y * q + x]
    entries: Vec<Complex<T>>,
}

impl<T: SimFloat> QftMatrix<T> {
    pub fn build(ctx: &FieldCtx) -> Self {
        let q = ctx.order() as usize;
        let roots = roots_of_unity::<T>(ctx.characteristic());
        let scale = T::one() / T::of(q as f64).sqrt();
        let elems: Vec<_> = ctx.elements().collect();
        let mut entries = Vec::with_capacity(q * q);
        for &y in &elems {
            for &x in &elems {
                entries.push(roots[ctx.trace(ctx.mul(x, y)) as usize] * scale);
            }
        }
        QftMatrix { q, entries }
    }

    /// `Q_q^{-1} = Q_q^†`.
    pub fn inverse(&self) -> Self {
        let q = self.q;
        let mut entries = Vec::with_capacity(q * q);
        for y in 0..q {
            for x in 0..q {
                entries.push(self.entries[x * q + y].conj());
            }
        }
        QftMatrix { q, entries }
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn entry(&self, y: usize, x: usize) -> Complex<T> {
        self.entries[y * self.q + x]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// `‖Q†Q − I‖_max`.
    pub fn unitarity_error(&self) -> T {
        let q = self.q;
        let mut worst = T::zero();
        for i in 0..q {
            for j in 0..q {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..q {
                    acc = acc + self.entry(k, i).conj() * self.entry(k, j);
                }
                if i == j {
                    acc.re = acc.re - T::one();
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// `Σ_{x ∈ F_q^n} ω^{Tr((a − y)·x)}`, computed by direct summation.
pub fn character_sum<T: SimFloat>(ctx: &FieldCtx, a: &PointVec, y: &PointVec) -> Result<Complex<T>> {
    check_dim(a.len(), y.len())?;
    let n = a.len();
    let q = ctx.order();
    let roots = roots_of_unity::<T>(ctx.characteristic());
    let diff: Vec<_> = a
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(&ai, &yi)| ctx.sub(ai, yi))
        .collect();
    let mut acc = Complex::new(T::zero(), T::zero());
    for idx in 0..(q as usize).pow(n as u32) {
        let x = PointVec::from_index(q, n, idx);
        let dot = diff
            .iter()
            .zip(x.coords())
            .fold(crate::field::FieldElem::ZERO, |s, (&d, &xi)| ctx.add(s, ctx.mul(d, xi)));
        acc = acc + roots[ctx.trace(dot) as usize];
    }
    Ok(acc)
}

/// A pure state of `n` registers, each of dimension `q`.
#[derive(Clone, Debug)]
pub struct StateVector<T> {
    ctx: Arc<FieldCtx>,
    n_registers: usize,
    amps: Vec<Complex<T>>,
}

impl<T: SimFloat> StateVector<T> {
    /// The computational basis state `|x⟩`.
    pub fn basis(ctx: Arc<FieldCtx>, x: &PointVec, cap: usize) -> Result<Self> {
        let q = ctx.order();
        let dim = state_dim(q, x.len(), cap)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[x.to_index(q)] = Complex::new(T::one(), T::zero());
        Ok(StateVector {
            ctx,
            n_registers: x.len(),
            amps,
        })
    }

    /// All `q^n` amplitudes equal to `q^{-n/2}`.
    pub fn prepare_uniform(ctx: Arc<FieldCtx>, n: usize, cap: usize) -> Result<Self> {
        let dim = state_dim(ctx.order(), n, cap)?;
        let a = T::one() / T::of(dim as f64).sqrt();
        Ok(StateVector {
            ctx,
            n_registers: n,
            amps: vec![Complex::new(a, T::zero()); dim],
        })
    }

    pub fn from_amplitudes(ctx: Arc<FieldCtx>, n: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        let dim = state_dim(ctx.order(), n, usize::MAX)?;
        check_dim(dim, amps.len())?;
        Ok(StateVector {
            ctx,
            n_registers: n,
            amps,
        })
    }

    /// A normalized state with independent uniformly random real and imaginary parts.
    pub fn random<R: Rng>(ctx: Arc<FieldCtx>, n: usize, cap: usize, rng: &mut R) -> Result<Self> {
        let dim = state_dim(ctx.order(), n, cap)?;
        let amps: Vec<_> = (0..dim)
            .map(|_| Complex::new(T::of(rng.random::<f64>() - 0.5), T::of(rng.random::<f64>() - 0.5)))
            .collect();
        let mut psi = StateVector {
            ctx,
            n_registers: n,
            amps,
        };
        let norm = psi.norm();
        psi.amps.iter_mut().for_each(|a| *a = *a / norm);
        Ok(psi)
    }

    /// `self ⊗ other`; `other`'s registers come after (less significant than) `self`'s.
    pub fn tensor(&self, other: &StateVector<T>) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for &a in &self.amps {
            amps.extend(other.amps.iter().map(|&b| a * b));
        }
        Ok(StateVector {
            ctx: self.ctx.clone(),
            n_registers: self.n_registers + other.n_registers,
            amps,
        })
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn num_registers(&self) -> usize {
        self.n_registers
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest `|ψ_i − φ_i|` over all amplitudes.
    pub fn max_deviation(&self, other: &StateVector<T>) -> Result<T> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max))
    }

    /// Applies the `q × q` matrix `m` (row-major) to one register, 1-based.
    pub fn apply_single(&mut self, m: &[Complex<T>], register: usize) -> Result<()> {
        let q = self.ctx.order() as usize;
        check_dim(q * q, m.len())?;
        if register == 0 || register > self.n_registers {
            return Err(Error::IndexOutOfRange {
                index: register,
                max: self.n_registers,
            });
        }
        let stride = q.pow((self.n_registers - register) as u32);
        let block = q * stride;
        let zero = Complex::new(T::zero(), T::zero());
        let mut fiber = vec![zero; q];
        for base in (0..self.amps.len()).step_by(block) {
            for k in 0..stride {
                for (x, slot) in fiber.iter_mut().enumerate() {
                    *slot = self.amps[base + x * stride + k];
                }
                for y in 0..q {
                    let row = &m[y * q..(y + 1) * q];
                    let mut acc = zero;
                    for (coef, v) in row.iter().zip(&fiber) {
                        acc = acc + *coef * *v;
                    }
                    self.amps[base + y * stride + k] = acc;
                }
            }
        }
        Ok(())
    }

    /// Applies `m` to every register.
    pub fn apply_all(&mut self, m: &[Complex<T>]) -> Result<()> {
        for register in 1..=self.n_registers {
            self.apply_single(m, register)?;
        }
        Ok(())
    }

    pub fn probability(&self, index: usize) -> T {
        self.amps[index].norm_sqr()
    }

    /// The most likely computational-basis outcome and its probability.
    /// Ties go to the lowest index.
    pub fn measure_computational(&self) -> (PointVec, T) {
        let mut best = (0usize, T::neg_infinity());
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > best.1 {
                best = (i, p);
            }
        }
        (self.label(best.0), best.1)
    }

    /// Samples an outcome with the Born-rule distribution.
    pub fn sample_computational<R: Rng>(&self, rng: &mut R) -> (PointVec, T) {
        let total = self.norm().powi(2);
        let mut target = T::of(rng.random::<f64>()) * total;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if target < p {
                return (self.label(i), p);
            }
            target = target - p;
        }
        // rounding left a sliver past the end
        let last = self.amps.iter().rposition(|a| a.norm_sqr() > T::zero()).unwrap_or(0);
        (self.label(last), self.amps[last].norm_sqr())
    }

    pub fn label(&self, index: usize) -> PointVec {
        PointVec::from_index(self.ctx.order(), self.n_registers, index)
    }

    /// Debug dump: one `index,x-tuple,re,im` row per amplitude, the tuple space-separated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "index,x,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            let label: Vec<String> = self.label(i).coords().iter().map(|c| c.to_string()).collect();
            writeln!(w, "{},{},{:e},{:e}", i, label.join(" "), a.re, a.im)?;
        }
        Ok(())
    }
}
