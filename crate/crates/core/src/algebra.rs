//! Exact arithmetic for Gaussian integers and the finite field `F_{p^2}`
//! realized as residues of `Z[j]` modulo a prime `p = 3 (mod 4)`.
//!
//! Elements of `F_{p^2}` are stored in canonical form with both
//! components in `[0, p)`. The natural map `g` embeds a field element as
//! the Gaussian integer with the same components; its inverse reduces a
//! Gaussian integer componentwise mod `p`.

use num_complex::Complex64;
use thiserror::Error;

/// Largest admissible field modulus. Keeps exhaustive inverse tables and
/// coset enumerations at desk scale.
pub const MAX_MODULUS: u32 = 251;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("modulus {0} is not an odd prime = 3 (mod 4) at most {MAX_MODULUS}")]
    InvalidModulus(u32),
    #[error("zero has no multiplicative inverse")]
    InversionOfZero,
    #[error("precoding requires a nonzero leading coefficient")]
    InvalidCoefficient,
    #[error("message lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Checks that `p` is a prime with `p = 3 (mod 4)` and `p <= MAX_MODULUS`,
/// the condition under which `Z[j]/pZ[j]` is the field with `p^2` elements.
pub fn validate_modulus(p: u32) -> Result<(), AlgebraError> {
    if !(3..=MAX_MODULUS).contains(&p) || p % 4 != 3 {
        return Err(AlgebraError::InvalidModulus(p));
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return Err(AlgebraError::InvalidModulus(p));
        }
        d += 1;
    }
    Ok(())
}

/// An element of the ring `Z[j]` of Gaussian integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussianInteger {
    pub re: i64,
    pub im: i64,
}

impl GaussianInteger {
    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub const ZERO: Self = Self::new(0, 0);
    pub const ONE: Self = Self::new(1, 0);

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    /// Algebraic norm `re^2 + im^2`; zero iff the element is zero.
    pub fn norm(&self) -> i64 {
        self.re * self.re + self.im * self.im
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.re + other.re, self.im + other.im)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.re - other.re, self.im - other.im)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.re, -self.im)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }

    /// The `F_{p^2}` residue of this Gaussian integer (componentwise
    /// reduction into `[0, p)`).
    pub fn residue(&self, p: u32) -> Result<FieldElement, AlgebraError> {
        validate_modulus(p)?;
        Ok(FieldElement {
            re: self.re.rem_euclid(p as i64) as u32,
            im: self.im.rem_euclid(p as i64) as u32,
            p,
        })
    }
}

/// An element of `F_{p^2}` in canonical form: components in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    re: u32,
    im: u32,
    p: u32,
}

impl FieldElement {
    /// Builds the element `re + im*j` of `F_{p^2}`, reducing the
    /// components mod `p`.
    pub fn new(re: i64, im: i64, p: u32) -> Result<Self, AlgebraError> {
        GaussianInteger::new(re, im).residue(p)
    }

    pub fn zero(p: u32) -> Result<Self, AlgebraError> {
        Self::new(0, 0, p)
    }

    pub fn one(p: u32) -> Result<Self, AlgebraError> {
        Self::new(1, 0, p)
    }

    pub fn re(&self) -> u32 {
        self.re
    }

    pub fn im(&self) -> u32 {
        self.im
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.p != other.p {
            return Err(AlgebraError::ModulusMismatch(self.p, other.p));
        }
        Ok(())
    }

    /// The natural map `g` into `Z[j]`: same components, read as integers.
    pub fn to_gaussian(&self) -> GaussianInteger {
        GaussianInteger::new(self.re as i64, self.im as i64)
    }

    /// The natural map `g` into the complex plane.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        Ok(Self {
            re: (self.re + other.re) % self.p,
            im: (self.im + other.im) % self.p,
            p: self.p,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        Ok(Self {
            re: (self.re + self.p - other.re) % self.p,
            im: (self.im + self.p - other.im) % self.p,
            p: self.p,
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            re: (self.p - self.re) % self.p,
            im: (self.p - self.im) % self.p,
            p: self.p,
        }
    }

    /// Gaussian-integer product reduced mod `p` (with `j^2 = -1`).
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let prod = self.to_gaussian().mul(&other.to_gaussian());
        prod.residue(self.p)
    }

    /// Multiplicative inverse via the conjugate: `(a + bj)^{-1} =
    /// (a - bj) / (a^2 + b^2)`, where the norm is invertible mod `p`
    /// because `p = 3 (mod 4)` makes it nonzero for nonzero elements.
    pub fn inv(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::InversionOfZero);
        }
        let p = self.p as u64;
        let norm = (self.re as u64 * self.re as u64 + self.im as u64 * self.im as u64) % p;
        let ninv = mod_pow(norm, p - 2, p);
        let re = (self.re as u64 * ninv) % p;
        let im = ((p - self.im as u64) % p * ninv) % p;
        Ok(Self {
            re: re as u32,
            im: im as u32,
            p: self.p,
        })
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}+{}j mod {})", self.re, self.im, self.p)
    }
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// The precoding coefficient `b` solving `q1*b + q2 = 0` in `F_{p^2}`,
/// i.e. `b = q1^{-1} * (-q2)`. Requires `q1 != 0`.
pub fn precoding_coefficient(
    q1: &FieldElement,
    q2: &FieldElement,
) -> Result<FieldElement, AlgebraError> {
    if q1.is_zero() {
        return Err(AlgebraError::InvalidCoefficient);
    }
    q1.inv()?.mul(&q2.neg())
}

/// A vector of `F_{p^2}` symbols sharing one modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageVector {
    symbols: Vec<FieldElement>,
    p: u32,
}

impl MessageVector {
    pub fn new(symbols: Vec<FieldElement>) -> Result<Self, AlgebraError> {
        let p = match symbols.first() {
            Some(s) => s.modulus(),
            None => return Err(AlgebraError::LengthMismatch(0, 1)),
        };
        for s in &symbols {
            if s.modulus() != p {
                return Err(AlgebraError::ModulusMismatch(p, s.modulus()));
            }
        }
        Ok(Self { symbols, p })
    }

    pub fn zero(len: usize, p: u32) -> Result<Self, AlgebraError> {
        let z = FieldElement::zero(p)?;
        Ok(Self {
            symbols: vec![z; len],
            p,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn symbols(&self) -> &[FieldElement] {
        &self.symbols
    }

    /// Extends with zero symbols up to `len`. Used to bring two messages
    /// of unequal rate to a common block length before combining.
    pub fn zero_padded(&self, len: usize) -> Result<Self, AlgebraError> {
        if len < self.len() {
            return Err(AlgebraError::LengthMismatch(self.len(), len));
        }
        let mut symbols = self.symbols.clone();
        symbols.resize(len, FieldElement::zero(self.p)?);
        Ok(Self { symbols, p: self.p })
    }

    /// Componentwise sum over `F_{p^2}`.
    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.len() != other.len() {
            return Err(AlgebraError::LengthMismatch(self.len(), other.len()));
        }
        let symbols = self
            .symbols
            .iter()
            .zip(&other.symbols)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(symbols)
    }

    /// Componentwise scaling by a field element.
    pub fn scale(&self, c: &FieldElement) -> Result<Self, AlgebraError> {
        let symbols = self
            .symbols
            .iter()
            .map(|s| s.mul(c))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(symbols)
    }
}
