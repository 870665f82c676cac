//! Arithmetic in GF(q), q = p^e, in a polynomial basis.
//!
//! Elements are encoded as integers `0..q`: the coefficient vector
//! `(c_0, .., c_{e-1})` of the residue polynomial maps to `sum c_i p^i`.
//! This order is the enumeration order of [`Field::elements`] and the basis
//! of every vertex numbering built on top of a field.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default upper bound on the field order accepted by [`Field::new`].
pub const DEFAULT_MAX_ORDER: u64 = 1 << 16;

/// Fields at most this large get precomputed addition and multiplication tables.
const TABLE_LIMIT: u32 = 256;

/// A field element encoded by its index in the canonical enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

#[derive(Debug)]
struct FieldData {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, little-endian, length e + 1.
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

/// The finite field GF(q). Cheap to clone; all clones share one table set.
#[derive(Debug, Clone)]
pub struct Field {
    data: Arc<FieldData>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.p == other.data.p && self.data.modulus == other.data.modulus)
    }
}

impl Eq for Field {}

impl Field {
    /// GF(q) with the lexicographically smallest monic irreducible modulus
    /// (coefficients compared from the constant term upward).
    pub fn new(q: u64) -> Result<Self> {
        Self::with_bound(q, DEFAULT_MAX_ORDER)
    }

    pub fn with_bound(q: u64, bound: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidOrder(q));
        }
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        if q > bound {
            return Err(Error::TooLarge { q, bound });
        }
        let (p, e, q) = (p as u32, e, q as u32);
        let modulus = smallest_irreducible(p, e);
        let mut data = FieldData {
            p,
            e,
            q,
            modulus,
            tables: None,
        };
        if e > 1 && q <= TABLE_LIMIT {
            data.tables = Some(build_tables(&data));
        }
        Ok(Field {
            data: Arc::new(data),
        })
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.data.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.data.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.data.e
    }

    /// Monic modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.data.modulus
    }

    /// Human-readable modulus, e.g. `x^2 + x + 1`.
    pub fn modulus_string(&self) -> String {
        poly_to_string(&self.data.modulus)
    }

    /// All q elements in canonical order: 0, 1, then ascending encodings.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.data.q).map(Elem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> + Clone {
        (1..self.data.q).map(Elem)
    }

    /// Embeds an integer through the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.data.p as i64) as u32)
    }

    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        let d = &self.data;
        let mut c = Vec::with_capacity(d.e as usize);
        let mut x = a.0;
        for _ in 0..d.e {
            c.push(x % d.p);
            x /= d.p;
        }
        c
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Elem {
        let d = &self.data;
        let mut x = 0u32;
        for i in (0..d.e as usize).rev() {
            let c = coeffs.get(i).copied().unwrap_or(0) % d.p;
            x = x * d.p + c;
        }
        Elem(x)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let d = &*self.data;
        if d.e == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= d.p { s - d.p } else { s });
        }
        if let Some(t) = &d.tables {
            return Elem(t.add[(a.0 * d.q + b.0) as usize]);
        }
        self.add_slow(a, b)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        let d = &*self.data;
        if d.e == 1 {
            return Elem(if a.0 == 0 { 0 } else { d.p - a.0 });
        }
        if let Some(t) = &d.tables {
            return Elem(t.neg[a.0 as usize]);
        }
        self.neg_slow(a)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        let d = &*self.data;
        if d.e == 1 {
            return Elem(((a.0 as u64 * b.0 as u64) % d.p as u64) as u32);
        }
        if let Some(t) = &d.tables {
            return Elem(t.mul[(a.0 * d.q + b.0) as usize]);
        }
        self.mul_slow(a, b)
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(t) = &self.data.tables {
            return Ok(Elem(t.inv[a.0 as usize]));
        }
        Ok(self.inv_slow(a))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, mut n: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// Checked element wrapper, for callers that mix fields.
    pub fn element(&self, a: Elem) -> FieldElement {
        debug_assert!(a.0 < self.data.q);
        FieldElement {
            field: self.clone(),
            value: a,
        }
    }

    fn add_slow(&self, a: Elem, b: Elem) -> Elem {
        let p = self.data.p;
        let ca = self.coeffs(a);
        let cb = self.coeffs(b);
        let c: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
        self.from_coeffs(&c)
    }

    fn neg_slow(&self, a: Elem) -> Elem {
        let p = self.data.p;
        let c: Vec<u32> = self.coeffs(a).iter().map(|x| (p - x) % p).collect();
        self.from_coeffs(&c)
    }

    fn mul_slow(&self, a: Elem, b: Elem) -> Elem {
        let d = &*self.data;
        let prod = poly_mul(&self.coeffs(a), &self.coeffs(b), d.p);
        let r = poly_rem(&prod, &d.modulus, d.p);
        self.from_coeffs(&r)
    }

    fn inv_slow(&self, a: Elem) -> Elem {
        let d = &*self.data;
        if d.e == 1 {
            return Elem(inv_mod_prime(a.0 as i64, d.p as i64) as u32);
        }
        let inv = poly_inv_mod(&self.coeffs(a), &d.modulus, d.p);
        self.from_coeffs(&inv)
    }
}

fn inv_mod_prime(a: i64, p: i64) -> i64 {
    let (mut r0, mut r1) = (p, a);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    t0.rem_euclid(p)
}

/// An element bundled with its field; arithmetic checks that operands agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: Elem,
}

impl FieldElement {
    pub fn value(&self) -> Elem {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.value)
    }

    fn same(&self, other: &FieldElement) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same(other)?;
        Ok(self.field.element(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same(other)?;
        Ok(self.field.element(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same(other)?;
        Ok(self.field.element(self.field.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> FieldElement {
        self.field.element(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(self.field.element(self.field.inv(self.value)?))
    }
}

fn build_tables(d: &FieldData) -> Tables {
    let f = Field {
        data: Arc::new(FieldData {
            p: d.p,
            e: d.e,
            q: d.q,
            modulus: d.modulus.clone(),
            tables: None,
        }),
    };
    let q = d.q;
    let mut add = Vec::with_capacity((q * q) as usize);
    let mut mul = Vec::with_capacity((q * q) as usize);
    for a in 0..q {
        for b in 0..q {
            add.push(f.add_slow(Elem(a), Elem(b)).0);
            mul.push(f.mul_slow(Elem(a), Elem(b)).0);
        }
    }
    let neg = (0..q).map(|a| f.neg_slow(Elem(a)).0).collect();
    let inv = (0..q)
        .map(|a| if a == 0 { 0 } else { f.inv_slow(Elem(a)).0 })
        .collect();
    Tables { add, mul, neg, inv }
}

/// Returns `(p, e)` with `q = p^e`, or `None` if q is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut e = 0;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut out: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
    trim(&mut out);
    out
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is prime, so a^(p-2) is the inverse.
    let mut base = a as u64 % p as u64;
    let mut n = p as u64 - 2;
    let mut acc = 1u64;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        n >>= 1;
    }
    acc as u32
}

/// Quotient and remainder of polynomial division over GF(p).
fn poly_divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let mut b = b.to_vec();
    trim(&mut b);
    let mut r = a.to_vec();
    trim(&mut r);
    assert!(!b.is_empty(), "polynomial division by zero");
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead_inv = inv_mod_p(*b.last().unwrap(), p);
    let mut quot = vec![0u32; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        quot[shift] = c;
        for (i, &bi) in b.iter().enumerate() {
            let sub = (c as u64 * bi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        trim(&mut r);
    }
    trim(&mut quot);
    (quot, r)
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    poly_divrem(a, b, p).1
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out: Vec<u32> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

/// Inverse of `a` modulo the irreducible `m` via the extended Euclidean algorithm.
fn poly_inv_mod(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut s0, mut s1) = (Vec::new(), vec![1u32]);
    while !r1.is_empty() {
        let (quot, rem) = poly_divrem(&r0, &r1, p);
        let s2 = poly_sub(&s0, &poly_mul(&quot, &s1, p), p);
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
    }
    // r0 is a nonzero constant because m is irreducible and a is nonzero mod m.
    debug_assert_eq!(r0.len(), 1);
    let c = inv_mod_p(r0[0], p);
    let mut out: Vec<u32> = s0
        .iter()
        .map(|&x| (x as u64 * c as u64 % p as u64) as u32)
        .collect();
    trim(&mut out);
    poly_rem(&out, m, p)
}

/// All monic polynomials of the given degree in the canonical enumeration
/// (non-leading coefficients read as base-p digits, constant term least significant).
fn monic_polys(p: u32, degree: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(degree);
    (0..count).map(move |mut idx| {
        let mut c = Vec::with_capacity(degree as usize + 1);
        for _ in 0..degree {
            c.push((idx % p as u64) as u32);
            idx /= p as u64;
        }
        c.push(1);
        c
    })
}

pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let degree = f.len() as u32 - 1;
    for d in 1..=degree / 2 {
        for g in monic_polys(p, d) {
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree `e`, comparing coefficient tuples
/// from the constant term upward. Degree 1 gives `x`.
fn smallest_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = (p as u64).pow(e);
    // Lexicographic low-degree-first order over (c_0, .., c_{e-1}).
    (0..count)
        .map(|mut idx| {
            let mut c = vec![0u32; e as usize + 1];
            for i in (0..e as usize).rev() {
                c[i] = (idx % p as u64) as u32;
                idx /= p as u64;
            }
            c[e as usize] = 1;
            c
        })
        .find(|c| is_irreducible(c, p))
        .expect("an irreducible polynomial exists in every degree")
}

fn poly_to_string(c: &[u32]) -> String {
    let mut terms = Vec::new();
    for (i, &x) in c.iter().enumerate().rev() {
        if x == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        terms.push(match (x, i) {
            (_, 0) => x.to_string(),
            (1, _) => mono,
            _ => format!("{x}{mono}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORDERS: [u64; 7] = [2, 3, 4, 5, 7, 8, 9];

    #[test]
    fn small_fields() {
        let f2 = Field::new(2).unwrap();
        assert_eq!(f2.elements().collect::<Vec<_>>(), vec![Elem(0), Elem(1)]);
        let f3 = Field::new(3).unwrap();
        assert_eq!(f3.elements().count(), 3);
        assert_eq!(f3.modulus(), &[0, 1]);
    }

    #[test]
    fn gf4_modulus_and_order() {
        // Exhaustive over the four monic quadratics over GF(2): only x^2+x+1 has no root.
        let irreducible: Vec<Vec<u32>> = monic_polys(2, 2)
            .filter(|c| (0..2u32).all(|x| (c[0] + c[1] * x + c[2] * x * x) % 2 != 0))
            .collect();
        assert_eq!(irreducible, vec![vec![1, 1, 1]]);
        let f = Field::new(4).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.modulus_string(), "x^2 + x + 1");
        let els: Vec<Vec<u32>> = f.elements().map(|a| f.coeffs(a)).collect();
        assert_eq!(els, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
        // x * x = x + 1
        let x = f.from_coeffs(&[0, 1]);
        assert_eq!(f.mul(x, x), f.from_coeffs(&[1, 1]));
    }

    #[test]
    fn other_moduli() {
        // x^3 + 1 = (x + 1)(x^2 + x + 1); x^3 + x^2 + 1 comes next in constant-term-first order.
        assert_eq!(Field::new(8).unwrap().modulus(), &[1, 0, 1, 1]);
        assert_eq!(Field::new(9).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(Field::new(27).unwrap().degree(), 3);
    }

    #[test]
    fn rejects_bad_orders() {
        assert_eq!(Field::new(6), Err(Error::NotPrimePower(6)));
        assert_eq!(Field::new(12), Err(Error::NotPrimePower(12)));
        assert_eq!(Field::new(1), Err(Error::InvalidOrder(1)));
        assert_eq!(
            Field::new(1 << 17),
            Err(Error::TooLarge {
                q: 1 << 17,
                bound: DEFAULT_MAX_ORDER
            })
        );
        assert!(Field::with_bound(16, 8).is_err());
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in ORDERS {
            let f = Field::new(q).unwrap();
            let els: Vec<Elem> = f.elements().collect();
            assert_eq!(els.len() as u64, q);
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
                assert_eq!(f.mul(a, Elem::ONE), a);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
                    assert_eq!(f.pow(a, q - 1), Elem::ONE, "q={q} a={a}");
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn table_and_polynomial_paths_agree() {
        // GF(16) is tabulated, GF(2^9) is not; compare against direct polynomial arithmetic.
        for q in [16u64, 512] {
            let f = Field::new(q).unwrap();
            let d = &f.data;
            for a in (0..d.q).step_by(7) {
                for b in (0..d.q).step_by(5) {
                    assert_eq!(f.mul(Elem(a), Elem(b)), f.mul_slow(Elem(a), Elem(b)));
                    assert_eq!(f.add(Elem(a), Elem(b)), f.add_slow(Elem(a), Elem(b)));
                }
                if a != 0 {
                    assert_eq!(f.mul(Elem(a), f.inv(Elem(a)).unwrap()), Elem::ONE);
                }
            }
        }
    }

    #[test]
    fn deterministic_construction() {
        for q in ORDERS {
            let a = Field::new(q).unwrap();
            let b = Field::new(q).unwrap();
            assert_eq!(a.modulus(), b.modulus());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn checked_elements() {
        let f4 = Field::new(4).unwrap();
        let f2 = Field::new(2).unwrap();
        let x = f4.element(Elem(2));
        assert_eq!(x.mul(&x).unwrap().coeffs(), vec![1, 1]);
        assert_eq!(x.add(&f2.element(Elem(1))), Err(Error::FieldMismatch));
        assert_eq!(f4.element(Elem::ZERO).inv(), Err(Error::DivisionByZero));
        assert_eq!(x.sub(&x).unwrap().value(), Elem::ZERO);
        assert_eq!(x.neg().add(&x).unwrap().value(), Elem::ZERO);
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(49), Some((7, 2)));
        assert_eq!(prime_power(65536), Some((2, 16)));
        assert_eq!(prime_power(65521), Some((65521, 1)));
        assert_eq!(prime_power(100), None);
    }
}
