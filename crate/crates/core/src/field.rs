//! Arithmetic in GF(p^m).
//!
//! Elements are handled as their ordering index: element `i` is the
//! polynomial whose coefficient vector is the base-`p` expansion of `i`
//! (lowest digit is the constant term). Zero is index 0, one is index 1,
//! and the reverse map from an element to its index is the identity on
//! this representation.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest field order accepted by [`Field::new`].
pub const MAX_FIELD_ORDER: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds the bound {bound}")]
    TooLarge { p: u32, m: u32, bound: u32 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("element index {index} out of range for GF({q})")]
    IndexOutOfRange { index: u64, q: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operands belong to different fields: GF({0}) and GF({1})")]
    Mismatch(u32, u32),
    #[error("cannot parse field spec {0:?}")]
    BadSpec(String),
}

/// A finite field GF(p^m) with its fixed element ordering.
///
/// Cheap to clone; the tables are shared.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Tables>,
}

struct Tables {
    p: u32,
    m: u32,
    q: u32,
    /// Monic modulus, coefficients low to high (length m + 1).
    modulus: Vec<u32>,
    primitive: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
}

/// A field element tagged with the field it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    p: u32,
    m: u32,
    index: u32,
}

impl FieldElement {
    /// Position of the element in the field ordering.
    pub fn index(&self) -> u32 {
        self.index
    }

    /// Coefficients in the polynomial basis, constant term first.
    pub fn coeffs(&self) -> Vec<u32> {
        digits(self.index, self.p, self.m as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.index == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
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

/// Splits `q = p^m`; `None` if `q` is not a prime power.
pub fn split_prime_power(q: u64) -> Option<(u32, u32)> {
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return None;
    }
    let p = factors[0];
    let mut m = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        m += 1;
    }
    Some((p as u32, m))
}

fn digits(mut x: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = x % p;
        x /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Polynomials over GF(p) as coefficient vectors, low to high.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p = p as u64;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut out);
        out
    }

    /// Remainder of `a` modulo the monic polynomial `m`.
    pub fn rem_monic(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let p64 = p as u64;
        while r.len() > dm && !r.is_empty() {
            let shift = r.len() - 1 - dm;
            let c = *r.last().unwrap() as u64;
            for (i, &mi) in m.iter().enumerate() {
                let t = (c * mi as u64) % p64;
                r[shift + i] = ((r[shift + i] as u64 + p64 - t) % p64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    /// True iff the monic polynomial `f` of degree >= 1 has no monic factor
    /// of degree 1..=deg/2, found by trial division.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let deg = f.len() - 1;
        for d in 1..=deg / 2 {
            let count = (p as u64).pow(d as u32);
            for c in 0..count {
                let mut g = Vec::with_capacity(d + 1);
                let mut x = c;
                for _ in 0..d {
                    g.push((x % p as u64) as u32);
                    x /= p as u64;
                }
                g.push(1);
                if rem_monic(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

impl Field {
    /// Builds GF(p^m) with the lexicographically smallest irreducible monic
    /// modulus (ordered by the base-p value of its lower coefficients).
    pub fn new(p: u32, m: u32) -> Result<Self, FieldError> {
        if !is_prime(p as u64) {
            return Err(FieldError::NotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64)
            .checked_pow(m)
            .filter(|&q| q <= MAX_FIELD_ORDER as u64)
            .ok_or(FieldError::TooLarge { p, m, bound: MAX_FIELD_ORDER })? as u32;

        let modulus = if m == 1 {
            // x; reduction is never triggered for constants.
            vec![0, 1]
        } else {
            (0..q)
                .map(|c| {
                    let mut f = digits(c, p, m as usize);
                    f.push(1);
                    f
                })
                .find(|f| poly::is_irreducible(f, p))
                .expect("an irreducible polynomial exists for every degree")
        };

        let mut tables = Tables {
            p,
            m,
            q,
            modulus,
            primitive: 1,
            exp: Vec::new(),
            log: Vec::new(),
            add: None,
        };
        tables.build_log_tables();
        if m > 1 && p != 2 && q <= 256 {
            let mut add = vec![0; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    add[(a * q + b) as usize] = tables.add_digits(a, b);
                }
            }
            tables.add = Some(add);
        }
        Ok(Field { inner: Arc::new(tables) })
    }

    /// Field with `q` elements.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        let (p, m) = split_prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Field::new(p, m)
    }

    /// Parses `"q"` or `"p^m"`.
    pub fn parse(spec: &str) -> Result<Self, FieldError> {
        let bad = || FieldError::BadSpec(spec.to_string());
        let spec_t = spec.trim();
        match spec_t.split_once('^') {
            Some((p, m)) => {
                let p: u32 = p.trim().parse().map_err(|_| bad())?;
                let m: u32 = m.trim().parse().map_err(|_| bad())?;
                Field::new(p, m)
            }
            None => {
                let q: u64 = spec_t.parse().map_err(|_| bad())?;
                Field::with_order(q)
            }
        }
    }

    pub fn p(&self) -> u32 {
        self.inner.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.m
    }

    pub fn q(&self) -> u32 {
        self.inner.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    /// `"q"` for prime fields, `"p^m"` otherwise.
    pub fn name(&self) -> String {
        if self.inner.m == 1 {
            self.inner.p.to_string()
        } else {
            format!("{}^{}", self.inner.p, self.inner.m)
        }
    }

    pub fn same_as(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p && self.inner.m == other.inner.m)
    }

    // Raw index arithmetic. Callers guarantee indices are in range.

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let t = &*self.inner;
        if t.p == 2 {
            a ^ b
        } else if t.m == 1 {
            let s = a + b;
            if s >= t.p {
                s - t.p
            } else {
                s
            }
        } else if let Some(add) = &t.add {
            add[(a * t.q + b) as usize]
        } else {
            t.add_digits(a, b)
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let t = &*self.inner;
        if t.p == 2 || a == 0 {
            a
        } else if t.m == 1 {
            t.p - a
        } else {
            let mut x = a;
            let mut out = 0;
            let mut place = 1;
            for _ in 0..t.m {
                let d = x % t.p;
                x /= t.p;
                out += ((t.p - d) % t.p) * place;
                place *= t.p;
            }
            out
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &*self.inner;
        let s = t.log[a as usize] + t.log[b as usize];
        let order = t.q - 1;
        t.exp[(if s >= order { s - order } else { s }) as usize]
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let t = &*self.inner;
        let order = t.q - 1;
        let l = t.log[a as usize];
        t.exp[((order - l) % order) as usize]
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let t = &*self.inner;
        let order = (t.q - 1) as u64;
        let l = (t.log[a as usize] as u64 * (e % order)) % order;
        t.exp[l as usize]
    }

    /// Product computed by polynomial multiplication and reduction by the
    /// modulus, bypassing the log tables.
    pub fn mul_poly(&self, a: u32, b: u32) -> u32 {
        self.inner.mul_poly(a, b)
    }

    /// Smallest-index element of multiplicative order q - 1.
    pub fn primitive(&self) -> u32 {
        self.inner.primitive
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u32) -> u64 {
        assert!(a != 0);
        let n = (self.q() - 1) as u64;
        let mut ord = n;
        for f in prime_factors(n) {
            while ord.is_multiple_of(f) && self.pow(a, ord / f) == 1 {
                ord /= f;
            }
        }
        ord
    }

    // Checked element API.

    pub fn element(&self, index: u64) -> Result<FieldElement, FieldError> {
        if index >= self.q() as u64 {
            return Err(FieldError::IndexOutOfRange { index, q: self.q() });
        }
        Ok(self.tag(index as u32))
    }

    pub fn element_from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        let t = &*self.inner;
        if coeffs.len() > t.m as usize || coeffs.iter().any(|&c| c >= t.p) {
            return Err(FieldError::BadSpec(format!("{coeffs:?}")));
        }
        Ok(self.tag(undigits(coeffs, t.p)))
    }

    /// Reverse of the element ordering.
    pub fn rho(&self, e: FieldElement) -> Result<u32, FieldError> {
        self.check(&e)?;
        Ok(e.index)
    }

    pub fn primitive_element(&self) -> FieldElement {
        self.tag(self.primitive())
    }

    pub fn try_add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.tag(self.add(a.index, b.index)))
    }

    pub fn try_sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.tag(self.sub(a.index, b.index)))
    }

    pub fn try_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.tag(self.mul(a.index, b.index)))
    }

    pub fn try_neg(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(&a)?;
        Ok(self.tag(self.neg(a.index)))
    }

    pub fn try_inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(&a)?;
        if a.index == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.tag(self.inv(a.index)))
    }

    fn tag(&self, index: u32) -> FieldElement {
        FieldElement { p: self.p(), m: self.degree(), index }
    }

    fn check(&self, e: &FieldElement) -> Result<(), FieldError> {
        if e.p != self.p() || e.m != self.degree() {
            let other = e.p.saturating_pow(e.m);
            return Err(FieldError::Mismatch(self.q(), other));
        }
        Ok(())
    }
}

impl Tables {
    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.m {
            let d = (a % self.p + b % self.p) % self.p;
            a /= self.p;
            b /= self.p;
            out += d * place;
            place *= self.p;
        }
        out
    }

    fn mul_poly(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let m = self.m as usize;
        let mut pa = digits(a, self.p, m);
        let mut pb = digits(b, self.p, m);
        poly::trim(&mut pa);
        poly::trim(&mut pb);
        let prod = poly::mul(&pa, &pb, self.p);
        let r = poly::rem_monic(&prod, &self.modulus, self.p);
        undigits(&r, self.p)
    }

    fn build_log_tables(&mut self) {
        let order = self.q - 1;
        if order == 1 {
            self.primitive = 1;
            self.exp = vec![1];
            self.log = vec![0, 0];
            return;
        }
        for g in 2..self.q {
            let mut exp = Vec::with_capacity(order as usize);
            let mut x = 1u32;
            loop {
                exp.push(x);
                x = self.mul_poly(x, g);
                if x == 1 {
                    break;
                }
            }
            if exp.len() as u32 == order {
                let mut log = vec![0u32; self.q as usize];
                for (i, &e) in exp.iter().enumerate() {
                    log[e as usize] = i as u32;
                }
                self.primitive = g;
                self.exp = exp;
                self.log = log;
                return;
            }
        }
        unreachable!("the multiplicative group of a finite field is cyclic");
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.name())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for Field {}
