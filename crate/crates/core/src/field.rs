//! Exact arithmetic in GF(p^r).
//!
//! An element is stored as a single integer in `[0, q)` whose base-`p` digits
//! are its coefficients in the power basis `1, t, …, t^{r-1}`, where `t` is a
//! root of the context's monic irreducible modulus. Addition is digit-wise
//! mod `p`; multiplication goes through discrete log tables built from a
//! primitive element found at construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported characteristic and field order.
pub const MAX_ORDER: u32 = 1 << 16;
/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 4;

/// Built-in moduli, constant term first. Each is re-validated on use.
const BUILTIN_MODULI: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),       // t^2 + t + 1
    (2, 3, &[1, 1, 0, 1]),    // t^3 + t + 1
    (2, 4, &[1, 1, 0, 0, 1]), // t^4 + t + 1
    (3, 2, &[1, 0, 1]),       // t^2 + 1
    (3, 3, &[1, 2, 0, 1]),    // t^3 + 2t + 1
    (5, 2, &[2, 1, 1]),       // t^2 + t + 2
];

/// An element of some `FieldCtx`, canonically encoded in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// Callers guarantee `value < q` for the field the element is used with.
    #[inline]
    pub(crate) fn from_raw(value: u32) -> Self {
        FieldElem(value)
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serialized description of a field: `{"p":2,"r":2,"modulus":[1,1,1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub r: u32,
    pub modulus: Vec<u32>,
}

/// The finite field GF(p^r) together with its lookup tables.
///
/// Immutable after construction; share it behind an `Arc`.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    // exp[i] = g^i for i in 0..2(q-1), log[x] = i with g^i = x (log[0] unused).
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    weights: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.r == other.r && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        write!(f, "{}^{}:{}", self.p, self.r, coeffs.join(","))
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Remainder of `a` modulo `b` over F_p; `b` must have a nonzero leading coefficient.
/// Both are coefficient lists, constant term first.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut rem: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let p64 = p as u64;
    let db = b.len() - 1;
    let lead_inv = pow_mod(b[db] as u64, p64 - 2, p64);
    while rem.len() > db {
        let top = *rem.last().unwrap() % p64;
        let shift = rem.len() - 1 - db;
        if top != 0 {
            let factor = top * lead_inv % p64;
            for (i, &bc) in b.iter().enumerate() {
                let sub = factor * bc as u64 % p64;
                rem[shift + i] = (rem[shift + i] + p64 - sub) % p64;
            }
        }
        rem.pop();
    }
    rem.into_iter().map(|c| (c % p64) as u32).collect()
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Exhaustive irreducibility test: no monic divisor of degree 1..=⌊r/2⌋.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let r = modulus.len() - 1;
    for deg in 1..=r / 2 {
        let count = (p as u64).pow(deg as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(deg + 1);
            let mut rest = idx;
            for _ in 0..deg {
                g.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            g.push(1);
            if poly_rem(modulus, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// Builds GF(p^r) from a monic modulus given constant term first.
    pub fn new(p: u32, r: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) || p > MAX_ORDER {
            return Err(Error::InvalidField(format!(
                "characteristic {p} is not a supported prime"
            )));
        }
        if r == 0 || r > MAX_DEGREE {
            return Err(Error::InvalidField(format!(
                "extension degree {r} outside 1..={MAX_DEGREE}"
            )));
        }
        let q = (p as u64).pow(r);
        if q > MAX_ORDER as u64 {
            return Err(Error::InvalidField(format!("order {p}^{r} exceeds {MAX_ORDER}")));
        }
        let q = q as u32;
        if modulus.len() != r as usize + 1 {
            return Err(Error::InvalidField(format!(
                "modulus must have {} coefficients, got {}",
                r + 1,
                modulus.len()
            )));
        }
        if modulus[r as usize] != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if let Some(c) = modulus.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidField(format!(
                "modulus coefficient {c} not reduced mod {p}"
            )));
        }
        if r > 1 && !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!(
                "modulus {modulus:?} is reducible over F_{p}"
            )));
        }

        let weights: Vec<u32> = (0..r).map(|i| p.pow(i)).collect();
        let mut ctx = FieldCtx {
            p,
            r,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
            weights,
        };
        ctx.build_tables();
        Ok(ctx)
    }

    /// The prime field F_p.
    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1, vec![0, 1])
    }

    /// GF(p^r) with the built-in modulus, if one exists.
    pub fn builtin(p: u32, r: u32) -> Result<Self> {
        if r == 1 {
            return Self::prime(p);
        }
        BUILTIN_MODULI
            .iter()
            .find(|(bp, br, _)| *bp == p && *br == r)
            .ok_or_else(|| Error::InvalidField(format!("no built-in modulus for {p}^{r}; supply one")))
            .and_then(|(_, _, m)| Self::new(p, r, m.to_vec()))
    }

    /// The field of order `q`, when `q` is prime or has a built-in modulus.
    pub fn with_order(q: u32) -> Result<Self> {
        if is_prime(q) {
            return Self::prime(q);
        }
        for &(p, r, _) in BUILTIN_MODULI {
            if p.pow(r) == q {
                return Self::builtin(p, r);
            }
        }
        Err(Error::InvalidField(format!(
            "{q} is neither prime nor a built-in prime power"
        )))
    }

    /// Orders of every field with a built-in modulus, plus the given primes.
    pub fn builtin_orders() -> Vec<u32> {
        BUILTIN_MODULI.iter().map(|(p, r, _)| p.pow(*r)).collect()
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.p,
            r: self.r,
            modulus: self.modulus.clone(),
        }
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        Self::new(spec.p, spec.r, spec.modulus.clone())
    }

    fn build_tables(&mut self) {
        let q = self.q;
        let order = q - 1;
        let factors = prime_factors(order);
        let generator = (1..q)
            .find(|&g| factors.iter().all(|&l| self.slow_pow(g, (order / l) as u64) != 1))
            .expect("multiplicative group of a field is cyclic");

        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for i in 0..order {
            exp[i as usize] = cur;
            exp[(i + order) as usize] = cur;
            log[cur as usize] = i;
            cur = self.slow_mul(cur, generator);
        }
        self.exp = exp;
        self.log = log;

        let mut trace = vec![0u32; q as usize];
        for x in 0..q {
            let mut acc = FieldElem(0);
            let mut term = FieldElem(x);
            for _ in 0..self.r {
                acc = self.add(acc, term);
                term = self.pow(term, self.p as u64);
            }
            debug_assert!(acc.0 < self.p, "trace must land in the prime subfield");
            trace[x as usize] = acc.0;
        }
        self.trace = trace;
    }

    fn digits(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.r as usize);
        let mut rest = v;
        for _ in 0..self.r {
            out.push(rest % self.p);
            rest /= self.p;
        }
        out
    }

    fn encode_digits(&self, digits: &[u32]) -> u32 {
        digits.iter().zip(&self.weights).map(|(d, w)| d * w).sum()
    }

    /// Schoolbook polynomial product reduced by the modulus; used to build the tables.
    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u32; 2 * self.r as usize - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % self.p as u64) as u32;
            }
        }
        let rem = poly_rem(&prod, &self.modulus, self.p);
        let mut digits = rem;
        digits.resize(self.r as usize, 0);
        self.encode_digits(&digits)
    }

    fn slow_pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.slow_mul(acc, b);
            }
            b = self.slow_mul(b, b);
            exp >>= 1;
        }
        acc
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.r
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Wraps an integer encoding, rejecting values outside `[0, q)`.
    pub fn elem(&self, value: u32) -> Result<FieldElem> {
        if value < self.q {
            Ok(FieldElem(value))
        } else {
            Err(Error::InvalidField(format!("element {value} outside [0, {})", self.q)))
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, value: i64) -> FieldElem {
        FieldElem(value.rem_euclid(self.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    #[inline]
    pub fn contains(&self, a: FieldElem) -> bool {
        a.0 < self.q
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.r == 1 {
            let s = a.0 + b.0;
            return FieldElem(if s >= self.p { s - self.p } else { s });
        }
        if self.p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        let (mut x, mut y, mut out) = (a.0, b.0, 0);
        for &w in &self.weights {
            let s = (x % self.p + y % self.p) % self.p;
            out += s * w;
            x /= self.p;
            y /= self.p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.p == 2 {
            return a;
        }
        if self.r == 1 {
            return FieldElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let (mut x, mut out) = (a.0, 0);
        for &w in &self.weights {
            let d = x % self.p;
            out += ((self.p - d) % self.p) * w;
            x /= self.p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem(0);
        }
        let i = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElem(self.exp[i as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let order = self.q - 1;
        let i = (order - self.log[a.0 as usize]) % order;
        Ok(FieldElem(self.exp[i as usize]))
    }

    pub fn pow(&self, a: FieldElem, k: u64) -> FieldElem {
        if k == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        let order = (self.q - 1) as u64;
        let i = (self.log[a.0 as usize] as u64 * (k % order)) % order;
        FieldElem(self.exp[i as usize])
    }

    /// Absolute trace to F_p, returned as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, x: FieldElem) -> u32 {
        self.trace[x.0 as usize]
    }

    /// `(-1)^k` as a field element: `p - 1` for odd `k`, `1` otherwise.
    #[inline]
    pub fn sign(&self, k: usize) -> FieldElem {
        if k % 2 == 1 {
            self.neg(FieldElem::ONE)
        } else {
            FieldElem::ONE
        }
    }
}

impl FromStr for FieldCtx {
    type Err = Error;

    /// Accepts `p^r:c0,c1,…,cr`, `p^r` (built-in modulus) or a bare order `q`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::Parse(format!("field spec `{s}`: {msg}"));
        let (head, modulus) = match s.split_once(':') {
            Some((h, m)) => {
                let coeffs = m
                    .split(',')
                    .map(|c| c.trim().parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("modulus must be a comma-separated list of integers"))?;
                (h, Some(coeffs))
            }
            None => (s, None),
        };
        match head.split_once('^') {
            Some((p, r)) => {
                let p = p.trim().parse::<u32>().map_err(|_| bad("bad characteristic"))?;
                let r = r.trim().parse::<u32>().map_err(|_| bad("bad extension degree"))?;
                match modulus {
                    Some(m) => FieldCtx::new(p, r, m),
                    None => FieldCtx::builtin(p, r),
                }
            }
            None => {
                let q = head
                    .parse::<u32>()
                    .map_err(|_| bad("expected `p^r:modulus` or an integer order"))?;
                match modulus {
                    Some(m) if is_prime(q) => FieldCtx::new(q, 1, m),
                    Some(_) => Err(bad("a modulus needs the `p^r` form")),
                    None => FieldCtx::with_order(q),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> FieldCtx {
        FieldCtx::new(2, 2, vec![1, 1, 1]).unwrap()
    }

    fn e(v: u32) -> FieldElem {
        FieldElem(v)
    }

    /// Supported fields with q <= 32, used for the exhaustive scans.
    fn small_fields() -> Vec<FieldCtx> {
        let mut out: Vec<FieldCtx> = (2..=31)
            .filter(|&p| is_prime(p))
            .map(|p| FieldCtx::prime(p).unwrap())
            .collect();
        for q in FieldCtx::builtin_orders() {
            if q <= 32 {
                out.push(FieldCtx::with_order(q).unwrap());
            }
        }
        out
    }

    #[test]
    fn small_examples() {
        let f2 = FieldCtx::prime(2).unwrap();
        let f3 = FieldCtx::prime(3).unwrap();
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(f2.add(e(1), e(1)), e(0));
        assert_eq!(f5.add(e(3), e(4)), e(2));
        assert_eq!(f3.mul(e(2), e(2)), e(1));
        assert_eq!(f2.neg(e(1)), e(1));
        assert_eq!(f5.inv(e(2)).unwrap(), e(3));
        assert_eq!(f5.trace(e(3)), 3);
    }

    #[test]
    fn gf4_tables() {
        let f = f4();
        // t + (t+1) = 1
        assert_eq!(f.add(e(2), e(3)), e(1));
        // t * t = t + 1
        assert_eq!(f.mul(e(2), e(2)), e(3));
        assert_eq!(f.inv(e(2)).unwrap(), e(3));
        assert_eq!(f.trace(e(0)), 0);
        assert_eq!(f.trace(e(2)), 1);
    }

    #[test]
    fn gf4_addition_table_is_digitwise_xor() {
        let f = f4();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(f.add(e(a), e(b)).value(), a ^ b);
            }
        }
    }

    #[test]
    fn slow_and_table_multiplication_agree() {
        for f in small_fields() {
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b).value(), f.slow_mul(a.value(), b.value()), "{f}");
                }
            }
        }
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert!(matches!(f4().inv(FieldElem::ZERO), Err(Error::DivisionByZero)));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for f in small_fields() {
            let (zero, one) = (FieldElem::ZERO, FieldElem::ONE);
            for a in f.elements() {
                assert_eq!(f.add(a, zero), a);
                assert_eq!(f.mul(a, one), a);
                assert_eq!(f.add(a, f.neg(a)), zero);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), one);
                }
                assert_eq!(f.pow(a, f.order() as u64), a, "Frobenius in {f}");
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.sub(f.add(a, b), b), a);
                    assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % f.characteristic());
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            assert!(f.elements().any(|x| f.trace(x) != 0), "trace vanishes on {f}");
        }
    }

    #[test]
    fn builtins_validate() {
        for q in FieldCtx::builtin_orders() {
            let f = FieldCtx::with_order(q).unwrap();
            assert_eq!(f.order(), q);
        }
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(FieldCtx::prime(4).is_err());
        assert!(FieldCtx::new(2, 2, vec![1, 0, 1]).is_err()); // (t+1)^2
        assert!(FieldCtx::new(2, 2, vec![1, 1, 0]).is_err()); // not monic
        assert!(FieldCtx::new(3, 4, vec![2, 0, 0, 0, 1]).is_err()); // t^4 + 2 = (t^2+1)(t^2+2)
        assert!(FieldCtx::new(2, 5, vec![1, 0, 1, 0, 0, 1]).is_err()); // r too large
        assert!(FieldCtx::prime(65537).is_err());
        assert!(FieldCtx::with_order(6).is_err());
    }

    #[test]
    fn reducible_quartic_without_roots_is_rejected() {
        // (t^2+t+1)^2 = t^4 + t^2 + 1 over F_2 has no roots but a quadratic factor.
        assert!(FieldCtx::new(2, 4, vec![1, 0, 1, 0, 1]).is_err());
    }

    #[test]
    fn parses_field_specs() {
        let f: FieldCtx = "2^2:1,1,1".parse().unwrap();
        assert_eq!(f, f4());
        assert_eq!("4".parse::<FieldCtx>().unwrap(), f4());
        assert_eq!("2^2".parse::<FieldCtx>().unwrap(), f4());
        assert_eq!("5".parse::<FieldCtx>().unwrap().order(), 5);
        assert_eq!("27".parse::<FieldCtx>().unwrap().degree(), 3);
        assert!("2^2:1,0,1".parse::<FieldCtx>().is_err());
        assert!("x".parse::<FieldCtx>().is_err());
        assert!("6".parse::<FieldCtx>().is_err());
        assert_eq!(f4().to_string().parse::<FieldCtx>().unwrap(), f4());
    }

    #[test]
    fn sign_is_minus_one_in_odd_characteristic() {
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(f5.sign(1), e(4));
        assert_eq!(f5.sign(2), e(1));
        assert_eq!(f4().sign(1), e(1));
    }
}
