//! Arithmetic in binary extension fields GF(2^m), 2 <= m <= 16.
//!
//! Elements are stored as `u16` bit vectors (bit i is the coefficient of
//! x^i). A [`FieldContext`] owns the reduction polynomial and, for m <= 12,
//! log/antilog tables that the dense linear algebra kernels use for their
//! inner loops. Larger fields fall back to carry-less shift-and-reduce.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use thiserror::Error;

/// Largest extension degree for which log/antilog tables are built.
pub const TABLE_MAX_DEGREE: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("extension degree {0} outside supported range 2..=16")]
    UnsupportedDegree(u32),
    #[error("reduction polynomial {poly:#x} has degree {actual}, expected {expected}")]
    DegreeMismatch {
        poly: u32,
        expected: u32,
        actual: u32,
    },
    #[error("reduction polynomial {0:#x} is reducible over GF(2)")]
    ReduciblePolynomial(u32),
    #[error("operands belong to different fields")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {value} out of range for GF(2^{m})")]
    OutOfRange { value: u32, m: u32 },
}

/// Default reduction polynomials, indexed by m. x^10+x^3+1 and x^11+x^2+1
/// are the ones used for the RLCE presets.
const DEFAULT_POLYS: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// Default reduction polynomial for GF(2^m).
pub fn default_reduction_poly(m: u32) -> Option<u32> {
    DEFAULT_POLYS
        .get(m as usize)
        .copied()
        .filter(|&p| p != 0)
}

#[derive(Clone)]
struct Tables {
    // exp holds two periods followed by a zero tail, so exp[log[a] + log[b]]
    // needs no modular reduction and log[0] = 2(q-1) lands in the tail
    // even when both operands are zero.
    exp: Vec<u16>,
    log: Vec<u32>,
}

/// GF(2^m) with a fixed reduction polynomial. Immutable once built.
#[derive(Clone)]
pub struct FieldContext {
    m: u32,
    poly: u32,
    mask: u16,
    tables: Option<Tables>,
}

/// Shared handle used by matrices and codes.
pub type Field = Arc<FieldContext>;

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.m, self.poly)
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly
    }
}

impl Eq for FieldContext {}

fn poly_degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of a GF(2)[x] polynomial division.
fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

fn poly_mulmod(a: u64, b: u64, modulus: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut b = b;
    let d = poly_degree(modulus);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if poly_degree(a) >= d {
            a ^= modulus;
        }
    }
    acc
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Rabin/Ben-Or test: p of degree m is irreducible iff
/// gcd(x^(2^i) - x, p) = 1 for every i <= m/2.
fn is_irreducible(poly: u32, m: u32) -> bool {
    let p = poly as u64;
    let mut power = 0b10u64; // x
    for _ in 1..=m / 2 {
        power = poly_mulmod(power, power, p);
        if poly_gcd(p, power ^ 0b10) != 1 {
            return false;
        }
    }
    true
}

fn clmul_reduce(a: u16, b: u16, m: u32, poly: u32) -> u16 {
    let mut acc: u32 = 0;
    let mut a = a as u32;
    let mut b = b as u32;
    let top = 1u32 << m;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc as u16
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
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

impl FieldContext {
    /// Builds GF(2^m) modulo `reduction_poly` (bit i = coefficient of x^i).
    pub fn new(m: u32, reduction_poly: u32) -> Result<Self, GfError> {
        if !(2..=16).contains(&m) {
            return Err(GfError::UnsupportedDegree(m));
        }
        let actual = poly_degree(reduction_poly as u64);
        if actual != m as i32 {
            return Err(GfError::DegreeMismatch {
                poly: reduction_poly,
                expected: m,
                actual: actual.max(0) as u32,
            });
        }
        if !is_irreducible(reduction_poly, m) {
            return Err(GfError::ReduciblePolynomial(reduction_poly));
        }
        let mut ctx = FieldContext {
            m,
            poly: reduction_poly,
            mask: ((1u32 << m) - 1) as u16,
            tables: None,
        };
        if m <= TABLE_MAX_DEGREE {
            ctx.tables = Some(ctx.build_tables());
        }
        Ok(ctx)
    }

    /// GF(2^m) with the default reduction polynomial for m.
    pub fn with_default_poly(m: u32) -> Result<Self, GfError> {
        let poly = default_reduction_poly(m).ok_or(GfError::UnsupportedDegree(m))?;
        Self::new(m, poly)
    }

    /// Shared handle with the default reduction polynomial.
    pub fn shared(m: u32) -> Result<Field, GfError> {
        Self::with_default_poly(m).map(Arc::new)
    }

    fn build_tables(&self) -> Tables {
        let order = self.order() - 1;
        let factors = prime_factors(order as u32);
        // The reduction polynomial need not be primitive, so search for a
        // generator of the multiplicative group.
        let generator = (2..self.order() as u32)
            .map(|g| g as u16)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&p| self.pow_slow(g, (order as u32 / p) as u64) != 1)
            })
            .unwrap_or(1);
        let zero_log = 2 * order;
        let mut exp = vec![0u16; 4 * order + 1];
        let mut log = vec![0u32; self.order()];
        let mut x: u16 = 1;
        for i in 0..order {
            exp[i] = x;
            exp[i + order] = x;
            log[x as usize] = i as u32;
            x = clmul_reduce(x, generator, self.m, self.poly);
        }
        log[0] = zero_log as u32;
        Tables { exp, log }
    }

    fn pow_slow(&self, mut base: u16, mut e: u64) -> u16 {
        let mut acc = 1u16;
        while e > 0 {
            if e & 1 == 1 {
                acc = clmul_reduce(acc, base, self.m, self.poly);
            }
            base = clmul_reduce(base, base, self.m, self.poly);
            e >>= 1;
        }
        acc
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn reduction_poly(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, q = 2^m.
    pub fn order(&self) -> usize {
        1usize << self.m
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    /// Log/antilog pair, exposed for table invariant checks.
    pub fn log_antilog(&self, a: u16) -> Option<(u32, u16)> {
        let t = self.tables.as_ref()?;
        if a == 0 {
            return None;
        }
        let l = t.log[a as usize];
        Some((l, t.exp[l as usize]))
    }

    pub fn contains(&self, v: u32) -> bool {
        v < (1u32 << self.m)
    }

    /// Validates a raw value and wraps it as an element of this field.
    pub fn element(&self, value: u32) -> Result<FieldElement<'_>, GfError> {
        if !self.contains(value) {
            return Err(GfError::OutOfRange { value, m: self.m });
        }
        Ok(FieldElement {
            value: value as u16,
            field: self,
        })
    }

    #[inline]
    pub fn mask(&self) -> u16 {
        self.mask
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        match &self.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => clmul_reduce(a, b, self.m, self.poly),
        }
    }

    #[inline]
    pub fn square(&self, a: u16) -> u16 {
        self.mul(a, a)
    }

    pub fn inv(&self, a: u16) -> Result<u16, GfError> {
        if a == 0 {
            return Err(GfError::DivisionByZero);
        }
        Ok(match &self.tables {
            Some(t) => {
                let order = self.order() as u32 - 1;
                let l = t.log[a as usize];
                t.exp[((order - l) % order) as usize]
            }
            None => self.pow(a, self.order() as u64 - 2),
        })
    }

    pub fn div(&self, a: u16, b: u16) -> Result<u16, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, base: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        if base == 0 {
            return 0;
        }
        match &self.tables {
            Some(t) => {
                let order = self.order() as u64 - 1;
                let l = t.log[base as usize] as u64;
                t.exp[((l * (e % order)) % order) as usize]
            }
            None => self.pow_slow(base, e),
        }
    }

    /// dst[j] += f * src[j].
    #[inline]
    pub fn axpy(&self, dst: &mut [u16], src: &[u16], f: u16) {
        debug_assert_eq!(dst.len(), src.len());
        if f == 0 {
            return;
        }
        if f == 1 {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d ^= s;
            }
            return;
        }
        match &self.tables {
            Some(t) => {
                let lf = t.log[f as usize];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d ^= t.exp[(t.log[s as usize] + lf) as usize];
                }
            }
            None => {
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d ^= clmul_reduce(s, f, self.m, self.poly);
                }
            }
        }
    }

    /// v[j] *= f.
    #[inline]
    pub fn scale(&self, v: &mut [u16], f: u16) {
        if f == 1 {
            return;
        }
        match &self.tables {
            Some(t) if f != 0 => {
                let lf = t.log[f as usize];
                for x in v.iter_mut() {
                    *x = t.exp[(t.log[*x as usize] + lf) as usize];
                }
            }
            _ => {
                for x in v.iter_mut() {
                    *x = self.mul(*x, f);
                }
            }
        }
    }

    /// Componentwise product, written into `out`.
    #[inline]
    pub fn hadamard(&self, a: &[u16], b: &[u16], out: &mut [u16]) {
        match &self.tables {
            Some(t) => {
                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                    *o = t.exp[(t.log[x as usize] + t.log[y as usize]) as usize];
                }
            }
            None => {
                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                    *o = self.mul(x, y);
                }
            }
        }
    }

    pub fn dot(&self, a: &[u16], b: &[u16]) -> u16 {
        a.iter()
            .zip(b)
            .fold(0u16, |acc, (&x, &y)| acc ^ self.mul(x, y))
    }
}

/// A field element tied to its context.
#[derive(Clone, Copy)]
pub struct FieldElement<'f> {
    value: u16,
    field: &'f FieldContext,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}

impl Eq for FieldElement<'_> {}

impl<'f> FieldElement<'f> {
    pub fn value(&self) -> u16 {
        self.value
    }

    pub fn field(&self) -> &'f FieldContext {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<(), GfError> {
        if std::ptr::eq(self.field, other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(GfError::ContextMismatch)
        }
    }

    pub fn checked_add(self, other: Self) -> Result<Self, GfError> {
        self.same_field(&other)?;
        Ok(Self {
            value: self.value ^ other.value,
            field: self.field,
        })
    }

    pub fn checked_mul(self, other: Self) -> Result<Self, GfError> {
        self.same_field(&other)?;
        Ok(Self {
            value: self.field.mul(self.value, other.value),
            field: self.field,
        })
    }

    pub fn inv(self) -> Result<Self, GfError> {
        Ok(Self {
            value: self.field.inv(self.value)?,
            field: self.field,
        })
    }
}

/// Panics when the operands live in different fields; use
/// [`FieldElement::checked_add`] to get an error instead.
impl<'f> Add for FieldElement<'f> {
    type Output = FieldElement<'f>;

    fn add(self, rhs: Self) -> Self::Output {
        self.checked_add(rhs).expect("field context mismatch")
    }
}

impl<'f> Mul for FieldElement<'f> {
    type Output = FieldElement<'f>;

    fn mul(self, rhs: Self) -> Self::Output {
        self.checked_mul(rhs).expect("field context mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Trial division by every polynomial of degree 1..=m/2.
    fn irreducible_by_trial_division(poly: u32, m: u32) -> bool {
        for d in 1..=m / 2 {
            for low in 0..(1u32 << d) {
                let divisor = (1u32 << d) | low;
                if poly_rem(poly as u64, divisor as u64) == 0 {
                    return false;
                }
            }
        }
        true
    }

    fn schoolbook_mul(a: u16, b: u16, poly: u32) -> u16 {
        let mut prod: u64 = 0;
        for i in 0..16 {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u64) << i;
            }
        }
        poly_rem(prod, poly as u64) as u16
    }

    #[test]
    fn accepts_default_polynomials() {
        for m in 2..=16 {
            let poly = default_reduction_poly(m).unwrap();
            assert!(irreducible_by_trial_division(poly, m), "m={m}");
            FieldContext::new(m, poly).unwrap();
        }
        let f10 = FieldContext::new(10, 0x409).unwrap();
        assert_eq!(f10.order(), 1024);
        FieldContext::new(3, 0b1011).unwrap();
    }

    #[test]
    fn rejects_reducible_and_wrong_degree() {
        assert_eq!(
            FieldContext::new(3, 0b1001).unwrap_err(),
            GfError::ReduciblePolynomial(0b1001)
        );
        assert!(matches!(
            FieldContext::new(4, 0b1011),
            Err(GfError::DegreeMismatch { .. })
        ));
        assert!(matches!(
            FieldContext::new(17, 0x20009),
            Err(GfError::UnsupportedDegree(17))
        ));
    }

    #[test]
    fn irreducibility_matches_trial_division() {
        for m in 2..=9 {
            for low in 0..(1u32 << m) {
                let poly = (1u32 << m) | low;
                assert_eq!(
                    FieldContext::new(m, poly).is_ok(),
                    irreducible_by_trial_division(poly, m),
                    "poly {poly:#b}"
                );
            }
        }
    }

    #[test]
    fn small_products() {
        let f = FieldContext::new(3, 0b1011).unwrap();
        assert_eq!(f.mul(0b011, 0b101), 0b100);
        assert_eq!(schoolbook_mul(0b011, 0b101, 0b1011), 0b100);
        for a in 0..8 {
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.mul(a, 0), 0);
        }
    }

    #[test]
    fn inverse_edge_cases() {
        let f = FieldContext::new(8, 0x11D).unwrap();
        assert_eq!(f.inv(1).unwrap(), 1);
        assert_eq!(f.inv(0), Err(GfError::DivisionByZero));
        for a in 1..256u16 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn tables_are_consistent() {
        for m in 2..=TABLE_MAX_DEGREE {
            let f = FieldContext::with_default_poly(m).unwrap();
            for a in 1..f.order() as u16 {
                let (_, back) = f.log_antilog(a).unwrap();
                assert_eq!(back, a);
            }
        }
        // a non-primitive irreducible polynomial still yields valid tables
        let f = FieldContext::new(4, 0b11111).unwrap();
        for a in 0..16u16 {
            for b in 0..16u16 {
                assert_eq!(f.mul(a, b), schoolbook_mul(a, b, 0b11111));
            }
        }
    }

    #[test]
    fn exhaustive_axioms_small_fields() {
        for m in 2..=6 {
            let f = FieldContext::with_default_poly(m).unwrap();
            let q = f.order() as u16;
            for a in 0..q {
                assert_eq!(a ^ a, 0);
                for b in 0..q {
                    assert_eq!(f.mul(a, b), schoolbook_mul(a, b, f.reduction_poly()));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.square(a ^ b), f.square(a) ^ f.square(b));
                    for c in 0..q {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn exhaustive_gf256() {
        let f = FieldContext::with_default_poly(8).unwrap();
        for a in 0..256u16 {
            for b in 0..256u16 {
                assert_eq!(f.mul(a, b), schoolbook_mul(a, b, 0x11D));
                assert_eq!(f.square(a ^ b), f.square(a) ^ f.square(b));
            }
        }
    }

    #[test]
    fn kernels_match_scalar_ops() {
        for m in [8, 10, 13] {
            let f = FieldContext::with_default_poly(m).unwrap();
            let src: Vec<u16> = (0..50).map(|i| ((i * 37 + 5) as u16) & f.mask()).collect();
            let mut dst: Vec<u16> = (0..50).map(|i| ((i * 11 + 3) as u16) & f.mask()).collect();
            let expect: Vec<u16> = dst
                .iter()
                .zip(&src)
                .map(|(&d, &s)| d ^ f.mul(s, 7))
                .collect();
            f.axpy(&mut dst, &src, 7);
            assert_eq!(dst, expect);
            let mut scaled = src.clone();
            f.scale(&mut scaled, 9);
            assert!(scaled.iter().zip(&src).all(|(&x, &s)| x == f.mul(s, 9)));
        }
    }

    #[test]
    fn element_wrapper() {
        let f = FieldContext::new(3, 0b1011).unwrap();
        let g = FieldContext::new(3, 0b1101).unwrap();
        let a = f.element(3).unwrap();
        let b = f.element(5).unwrap();
        assert_eq!((a * b).value(), 4);
        assert_eq!((a + b).value(), 6);
        assert_eq!(a.inv().unwrap().checked_mul(a).unwrap().value(), 1);
        assert_eq!(
            a.checked_mul(g.element(5).unwrap()),
            Err(GfError::ContextMismatch)
        );
        assert!(f.element(8).is_err());
        assert_eq!(f.element(0).unwrap().inv(), Err(GfError::DivisionByZero));
    }

    proptest! {
        #[test]
        fn sampled_axioms_large_fields(m in prop::sample::select(vec![10u32, 11, 16]),
                                       a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
            let f = FieldContext::with_default_poly(m).unwrap();
            let (a, b, c) = (a & f.mask(), b & f.mask(), c & f.mask());
            prop_assert_eq!(f.mul(a, b), schoolbook_mul(a, b, f.reduction_poly()));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
            prop_assert_eq!(f.square(a ^ b), f.square(a) ^ f.square(b));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }
}
