//! Generalised Reed-Solomon codes GRS_k(x, y) = {(y_j f(x_j))_j : deg f < k}.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::gf::Field;
use crate::linalg::{LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrsError {
    #[error("support entries must be pairwise distinct")]
    InvalidSupport,
    #[error("multiplier entries must be nonzero")]
    ZeroMultiplier,
    #[error("invalid dimension k={k} for length n={n}")]
    InvalidDimension { k: usize, n: usize },
    #[error("polynomial of degree {degree} does not fit dimension {k}")]
    DegreeTooLarge { degree: usize, k: usize },
    #[error("values are not the evaluation of a polynomial of degree < k")]
    Inconsistent,
    #[error("need at least {needed} known positions, got {got}")]
    TooFewPositions { needed: usize, got: usize },
    #[error("no codeword within distance {0}")]
    DecodeFailure(usize),
    #[error("error bound {t} exceeds half the minimum distance {max}")]
    BoundTooLarge { t: usize, max: usize },
    #[error("received word has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Polynomial over GF(2^m), coefficients low to high, no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    coeffs: Vec<u16>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl Poly {
    pub fn new(field: &Field, mut coeffs: Vec<u16>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &Field) -> Self {
        Self::new(field, Vec::new())
    }

    pub fn constant(field: &Field, c: u16) -> Self {
        Self::new(field, vec![c])
    }

    /// x - a (= x + a in characteristic 2).
    pub fn linear(field: &Field, root: u16) -> Self {
        Self::new(field, vec![root, 1])
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    /// Coefficients padded with zeros to `len`.
    pub fn padded(&self, len: usize) -> Vec<u16> {
        let mut v = self.coeffs.clone();
        v.resize(len.max(v.len()), 0);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> u16 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn eval(&self, x: u16) -> u16 {
        self.coeffs
            .iter()
            .rev()
            .fold(0u16, |acc, &c| self.field.mul(acc, x) ^ c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = self.padded(n);
        for (a, &b) in v.iter_mut().zip(&other.coeffs) {
            *a ^= b;
        }
        Poly::new(&self.field, v)
    }

    pub fn scale(&self, c: u16) -> Poly {
        let mut v = self.coeffs.clone();
        self.field.scale(&mut v, c);
        Poly::new(&self.field, v)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut v = vec![0u16; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            self.field
                .axpy(&mut v[i..i + other.coeffs.len()], &other.coeffs, a);
        }
        Poly::new(&self.field, v)
    }

    /// Euclidean division. Panics on division by the zero polynomial.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let inv_lead = self.field.inv(divisor.lead()).expect("nonzero lead");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(&self.field), self.clone());
        }
        let mut quot = vec![0u16; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            let q = self.field.mul(c, inv_lead);
            quot[i - dd] = q;
            self.field
                .axpy(&mut rem[i - dd..=i], &divisor.coeffs, q);
        }
        rem.truncate(dd);
        (Poly::new(&self.field, quot), Poly::new(&self.field, rem))
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let inv = self.field.inv(a.lead()).expect("nonzero lead");
        a.scale(inv)
    }
}

/// Support, multiplier and dimension of a GRS code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrsParams {
    field: Field,
    support: Vec<u16>,
    multiplier: Vec<u16>,
    k: usize,
}

impl GrsParams {
    pub fn new(field: &Field, support: Vec<u16>, multiplier: Vec<u16>, k: usize) -> Result<Self, GrsError> {
        let n = support.len();
        if multiplier.len() != n {
            return Err(GrsError::LengthMismatch {
                got: multiplier.len(),
                expected: n,
            });
        }
        if k == 0 || k > n || n > field.order() {
            return Err(GrsError::InvalidDimension { k, n });
        }
        let mut seen = vec![false; field.order()];
        for &x in &support {
            if !field.contains(x as u32) || std::mem::replace(&mut seen[x as usize], true) {
                return Err(GrsError::InvalidSupport);
            }
        }
        if multiplier.iter().any(|&y| y == 0 || !field.contains(y as u32)) {
            return Err(GrsError::ZeroMultiplier);
        }
        Ok(GrsParams {
            field: field.clone(),
            support,
            multiplier,
            k,
        })
    }

    /// Uniformly random distinct support and nonzero multiplier.
    pub fn random(field: &Field, n: usize, k: usize, rng: &mut impl Rng) -> Result<Self, GrsError> {
        if n > field.order() {
            return Err(GrsError::InvalidDimension { k, n });
        }
        let support = index::sample(rng, field.order(), n)
            .into_iter()
            .map(|v| v as u16)
            .collect();
        let multiplier = (0..n)
            .map(|_| rng.gen_range(1..field.order()) as u16)
            .collect();
        Self::new(field, support, multiplier, k)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn support(&self) -> &[u16] {
        &self.support
    }

    pub fn multiplier(&self) -> &[u16] {
        &self.multiplier
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.support.len()
    }

    pub fn with_dimension(&self, k: usize) -> Result<Self, GrsError> {
        Self::new(&self.field, self.support.clone(), self.multiplier.clone(), k)
    }

    /// Keeps the positions in `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<Self, GrsError> {
        Self::new(
            &self.field,
            idx.iter().map(|&i| self.support[i]).collect(),
            idx.iter().map(|&i| self.multiplier[i]).collect(),
            self.k.min(idx.len()),
        )
    }

    /// k x n matrix with rows (y_j x_j^i)_j, i = 0..k.
    pub fn generator(&self) -> Matrix {
        let n = self.n();
        let mut g = Matrix::zeros(&self.field, self.k, n);
        for j in 0..n {
            let mut v = self.multiplier[j];
            for i in 0..self.k {
                g.set(i, j, v);
                v = self.field.mul(v, self.support[j]);
            }
        }
        g
    }

    pub fn encode(&self, f: &Poly) -> Result<Vec<u16>, GrsError> {
        if let Some(d) = f.degree() {
            if d >= self.k {
                return Err(GrsError::DegreeTooLarge { degree: d, k: self.k });
            }
        }
        Ok(self
            .support
            .iter()
            .zip(&self.multiplier)
            .map(|(&x, &y)| self.field.mul(y, f.eval(x)))
            .collect())
    }

    /// The unique f with deg f < k and y_j f(x_j) = values[i] at every
    /// `positions[i]`, solved as a linear system in the k coefficients.
    pub fn interpolate(&self, positions: &[usize], values: &[u16]) -> Result<Poly, GrsError> {
        if positions.len() != values.len() {
            return Err(GrsError::LengthMismatch {
                got: values.len(),
                expected: positions.len(),
            });
        }
        if positions.len() < self.k {
            return Err(GrsError::TooFewPositions {
                needed: self.k,
                got: positions.len(),
            });
        }
        let sub = self.select(positions)?.with_dimension(self.k)?;
        match sub.generator().transpose().solve(values) {
            Ok(coeffs) => Ok(Poly::new(&self.field, coeffs)),
            Err(LinalgError::NoSolution) => Err(GrsError::Inconsistent),
            Err(e) => Err(e.into()),
        }
    }

    /// Berlekamp-Welch: finds E monic of degree t and N of degree < k + t
    /// with N(x_j) = (r_j / y_j) E(x_j) for all j, then f = N / E.
    pub fn decode(&self, received: &[u16], t: usize) -> Result<(Poly, Vec<usize>), GrsError> {
        let n = self.n();
        let k = self.k;
        if received.len() != n {
            return Err(GrsError::LengthMismatch {
                got: received.len(),
                expected: n,
            });
        }
        let max = (n - k) / 2;
        if t > max {
            return Err(GrsError::BoundTooLarge { t, max });
        }
        let f = &self.field;
        let unknowns = k + 2 * t;
        let mut system = Matrix::zeros(f, n, unknowns);
        let mut rhs = vec![0u16; n];
        for j in 0..n {
            let x = self.support[j];
            let z = f.div(received[j], self.multiplier[j]).expect("nonzero multiplier");
            let row = system.row_mut(j);
            let mut p = 1u16;
            for i in 0..k + t {
                row[i] = p;
                if i < t {
                    row[k + t + i] = f.mul(z, p);
                }
                p = f.mul(p, x);
            }
            // p = x^(k+t); the monic term of E contributes z * x^t
            rhs[j] = f.mul(z, f.pow(x, t as u64));
        }
        let sol = system.solve(&rhs).map_err(|_| GrsError::DecodeFailure(t))?;
        let numerator = Poly::new(f, sol[..k + t].to_vec());
        let mut e = sol[k + t..].to_vec();
        e.push(1);
        let locator = Poly::new(f, e);
        let (msg, rem) = numerator.div_rem(&locator);
        if !rem.is_zero() || msg.degree().is_some_and(|d| d >= k) {
            return Err(GrsError::DecodeFailure(t));
        }
        let codeword = self.encode(&msg)?;
        let errors: Vec<usize> = (0..n).filter(|&j| codeword[j] != received[j]).collect();
        if errors.len() > t {
            return Err(GrsError::DecodeFailure(t));
        }
        Ok((msg, errors))
    }
}

/// Precomputed interpolation on a fixed set of k positions of a GRS code:
/// maps the values at those positions to polynomial coefficients by a
/// single matrix product.
#[derive(Clone, Debug)]
pub struct Interpolator {
    params: GrsParams,
    positions: Vec<usize>,
    inverse: Matrix,
}

impl Interpolator {
    pub fn new(params: &GrsParams, positions: &[usize]) -> Result<Self, GrsError> {
        if positions.len() != params.k() {
            return Err(GrsError::TooFewPositions {
                needed: params.k(),
                got: positions.len(),
            });
        }
        let sub = params.select(positions)?;
        // rows y_j x_j^i; values = coeffs * sub, so coeffs = values * sub^{-1}
        let inverse = sub.generator().inverse()?;
        Ok(Interpolator {
            params: params.clone(),
            positions: positions.to_vec(),
            inverse,
        })
    }

    pub fn params(&self) -> &GrsParams {
        &self.params
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Coefficient vectors (length k) of the polynomials behind each row of
    /// `words`, whose columns are indexed like the GRS positions.
    pub fn coefficients(&self, words: &Matrix) -> Matrix {
        words
            .select_columns(&self.positions)
            .mul(&self.inverse)
            .expect("shapes agree")
    }
}
