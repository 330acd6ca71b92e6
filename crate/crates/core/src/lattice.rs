//! Nested lattice codebooks over the complex hypercube lattice.
//!
//! The coarse shaping lattice is `tau * Z[j]^n`, whose square Voronoi cell
//! gives closed-form quantization, exact uniform dithering, and second
//! moment `tau^2 / 6` per complex dimension. The fine lattice lifts a
//! linear code `C` over `F_{p^2}` with generator `G` (dimension `r`,
//! length `n`): `fine = (tau/p) * g(C) + coarse`, a chain
//! `coarse <= fine <= (1/p) * coarse` with `p^{2r}` cosets. The codebook
//! is the set of coset representatives inside the coarse cell, labeled by
//! messages through `f(w) = [(tau/p) * g(wG)] mod coarse`.
//!
//! The codebook is a `Z[j]`-module mod the coarse lattice: scaling labels
//! by Gaussian integers and adding points commutes with the corresponding
//! finite-field operations on messages. That identity is what the
//! transceiver chain relies on, and is exercised heavily by the tests.

use crate::algebra::{self, AlgebraError, FieldElement, GaussianInteger, MessageVector};
use num_complex::Complex64;
use rand::Rng;
use std::collections::HashMap;
use thiserror::Error;

/// Decoding by coset enumeration is kept at desk scale.
pub const MAX_COSETS: u64 = 6561;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point does not belong to the fine lattice")]
    NotACodeword,
}

/// Which of the two nested lattices an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeLayer {
    Coarse,
    Fine,
}

/// A point of `C^n`, usually produced by a mod-coarse reduction, in which
/// case every coordinate lies in the half-open square cell
/// `[-tau/2, tau/2)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    coords: Vec<Complex64>,
}

impl LatticePoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coords.iter().map(|a| a * c).collect())
    }

    /// Squared Euclidean norm over all real components.
    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }
}

enum FineDecoder {
    /// `r = n`: the fine lattice is `(tau/p) Z[j]^n`, decoded by rounding.
    /// Holds the inverse generator for mapping code digits back to the
    /// message (identity generator stores the identity).
    Rounding { inverse: Vec<Vec<FieldElement>> },
    /// `r < n`: exhaustive search over the `p^{2r}` cosets.
    Cosets {
        messages: Vec<MessageVector>,
        codewords: Vec<LatticePoint>,
        by_digits: HashMap<Vec<(u32, u32)>, usize>,
    },
}

/// A nested lattice codebook from Construction A over the hypercube
/// shaping lattice `tau * Z[j]^n`.
pub struct NestedLatticeCode {
    p: u32,
    n: usize,
    r: usize,
    tau: f64,
    generator: Vec<Vec<FieldElement>>,
    decoder: FineDecoder,
}

impl NestedLatticeCode {
    /// Full-dimension code with the identity generator: the fine lattice
    /// is `(tau/p) Z[j]^n` and every length-`n` message is a codeword.
    pub fn uncoded(p: u32, n: usize, tau: f64) -> Result<Self, LatticeError> {
        let one = FieldElement::one(p)?;
        let zero = FieldElement::zero(p)?;
        let generator = (0..n)
            .map(|i| (0..n).map(|k| if i == k { one } else { zero }).collect())
            .collect();
        Self::new(p, n, tau, generator)
    }

    /// Uncoded codebook whose coarse cell has second moment `power` per
    /// complex dimension (`tau = sqrt(6 * power)`).
    pub fn uncoded_for_power(p: u32, n: usize, power: f64) -> Result<Self, LatticeError> {
        Self::uncoded(p, n, (6.0 * power).sqrt())
    }

    /// General Construction-A codebook with generator `G` of size `r x n`
    /// over `F_{p^2}`. `G` must have full rank `r` so the labeling is
    /// injective; for `r < n` the coset count `p^{2r}` must stay within
    /// `MAX_COSETS`.
    pub fn new(
        p: u32,
        n: usize,
        tau: f64,
        generator: Vec<Vec<FieldElement>>,
    ) -> Result<Self, LatticeError> {
        algebra::validate_modulus(p)?;
        if n == 0 {
            return Err(LatticeError::InvalidCode(
                "blocklength must be positive".into(),
            ));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(LatticeError::InvalidCode(
                "shaping scale must be positive".into(),
            ));
        }
        let r = generator.len();
        if r == 0 || r > n {
            return Err(LatticeError::InvalidCode(format!(
                "code dimension {r} out of range [1, {n}]"
            )));
        }
        for row in &generator {
            if row.len() != n {
                return Err(LatticeError::InvalidCode(
                    "generator rows must have length n".into(),
                ));
            }
            for e in row {
                if e.modulus() != p {
                    return Err(AlgebraError::ModulusMismatch(p, e.modulus()).into());
                }
            }
        }

        let decoder = if r == n {
            let inverse = invert_matrix(&generator, p)
                .ok_or_else(|| LatticeError::InvalidCode("generator is singular".into()))?;
            FineDecoder::Rounding { inverse }
        } else {
            if rank(&generator) != r {
                return Err(LatticeError::InvalidCode(
                    "generator does not have full rank".into(),
                ));
            }
            let cosets = (p as u64 * p as u64).checked_pow(r as u32);
            match cosets {
                Some(c) if c <= MAX_COSETS => {}
                _ => {
                    return Err(LatticeError::InvalidCode(format!(
                        "coset count p^(2r) exceeds {MAX_COSETS}"
                    )))
                }
            }
            FineDecoder::Cosets {
                messages: Vec::new(),
                codewords: Vec::new(),
                by_digits: HashMap::new(),
            }
        };

        let mut code = Self {
            p,
            n,
            r,
            tau,
            generator,
            decoder,
        };
        if let FineDecoder::Cosets { .. } = code.decoder {
            code.build_coset_table()?;
        }
        Ok(code)
    }

    /// Draws generator rows uniformly until they have full rank.
    pub fn random(
        p: u32,
        n: usize,
        r: usize,
        tau: f64,
        rng: &mut impl Rng,
    ) -> Result<Self, LatticeError> {
        algebra::validate_modulus(p)?;
        loop {
            let generator: Vec<Vec<FieldElement>> = (0..r)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            FieldElement::new(
                                rng.gen_range(0..p) as i64,
                                rng.gen_range(0..p) as i64,
                                p,
                            )
                            .expect("modulus already validated")
                        })
                        .collect()
                })
                .collect();
            if rank(&generator) == r {
                return Self::new(p, n, tau, generator);
            }
        }
    }

    fn build_coset_table(&mut self) -> Result<(), LatticeError> {
        let mut messages = Vec::new();
        let mut codewords = Vec::new();
        let mut by_digits = HashMap::new();
        let q = self.p as u64 * self.p as u64;
        let total = q.pow(self.r as u32);
        for idx in 0..total {
            let w = self.message_from_index(idx)?;
            let digits = self.codeword_digits(&w)?;
            let key: Vec<(u32, u32)> = digits.iter().map(|d| (d.re(), d.im())).collect();
            let point = self.point_from_digits(&digits);
            by_digits.insert(key, messages.len());
            messages.push(w);
            codewords.push(point);
        }
        self.decoder = FineDecoder::Cosets {
            messages,
            codewords,
            by_digits,
        };
        Ok(())
    }

    fn message_from_index(&self, mut idx: u64) -> Result<MessageVector, LatticeError> {
        let p = self.p as u64;
        let mut symbols = Vec::with_capacity(self.r);
        for _ in 0..self.r {
            let re = (idx % p) as i64;
            idx /= p;
            let im = (idx % p) as i64;
            idx /= p;
            symbols.push(FieldElement::new(re, im, self.p)?);
        }
        Ok(MessageVector::new(symbols)?)
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn code_dim(&self) -> usize {
        self.r
    }

    pub fn shaping_scale(&self) -> f64 {
        self.tau
    }

    /// Second moment of the coarse cell per complex dimension.
    pub fn second_moment(&self) -> f64 {
        self.tau * self.tau / 6.0
    }

    /// Number of codewords `p^{2r}`.
    pub fn codebook_size(&self) -> u64 {
        (self.p as u64 * self.p as u64).pow(self.r as u32)
    }

    fn check_dim(&self, v: &LatticePoint) -> Result<(), LatticeError> {
        if v.dim() != self.n {
            return Err(LatticeError::DimensionMismatch {
                expected: self.n,
                got: v.dim(),
            });
        }
        Ok(())
    }

    /// Nearest point of the requested lattice. For the coarse hypercube
    /// this is componentwise rounding with the half-open tie rule (ties
    /// go to the larger multiple, keeping cells `[-tau/2, tau/2)`); the
    /// fine lattice adds a coset search when `r < n`.
    pub fn quantize(
        &self,
        v: &LatticePoint,
        layer: LatticeLayer,
    ) -> Result<LatticePoint, LatticeError> {
        self.check_dim(v)?;
        match layer {
            LatticeLayer::Coarse => Ok(quantize_scaled(v, self.tau)),
            LatticeLayer::Fine => match &self.decoder {
                FineDecoder::Rounding { .. } => Ok(quantize_scaled(v, self.tau / self.p as f64)),
                FineDecoder::Cosets { codewords, .. } => {
                    let (best, _) = nearest_coset(v, codewords, self.tau);
                    // nearest fine point = codeword + coarse part of the gap
                    let gap = v.sub(&codewords[best]);
                    let coarse = quantize_scaled(&gap, self.tau);
                    Ok(codewords[best].add(&coarse))
                }
            },
        }
    }

    /// `v - Q_coarse(v)`: the representative of `v` inside the coarse cell.
    pub fn mod_coarse(&self, v: &LatticePoint) -> Result<LatticePoint, LatticeError> {
        self.check_dim(v)?;
        Ok(mod_scaled(v, self.tau))
    }

    fn codeword_digits(&self, w: &MessageVector) -> Result<Vec<FieldElement>, LatticeError> {
        if w.len() != self.r {
            return Err(LatticeError::DimensionMismatch {
                expected: self.r,
                got: w.len(),
            });
        }
        if w.modulus() != self.p {
            return Err(AlgebraError::ModulusMismatch(self.p, w.modulus()).into());
        }
        // c = w G over F_{p^2}
        let mut digits = vec![FieldElement::zero(self.p)?; self.n];
        for (wi, row) in w.symbols().iter().zip(&self.generator) {
            for (d, gk) in digits.iter_mut().zip(row) {
                *d = d.add(&wi.mul(gk)?)?;
            }
        }
        Ok(digits)
    }

    fn point_from_digits(&self, digits: &[FieldElement]) -> LatticePoint {
        let scale = self.tau / self.p as f64;
        let lifted = LatticePoint::new(digits.iter().map(|d| d.to_complex() * scale).collect());
        mod_scaled(&lifted, self.tau)
    }

    /// Natural labeling `f(w) = [(tau/p) g(wG)] mod coarse`.
    pub fn encode_label(&self, w: &MessageVector) -> Result<LatticePoint, LatticeError> {
        let digits = self.codeword_digits(w)?;
        Ok(self.point_from_digits(&digits))
    }

    /// Inverse of the natural labeling. Errors with `NotACodeword` when
    /// `v` is not a fine-lattice point (up to a small numerical slack).
    pub fn decode_label(&self, v: &LatticePoint) -> Result<MessageVector, LatticeError> {
        self.check_dim(v)?;
        let digits = self.exact_digits(v)?;
        match &self.decoder {
            FineDecoder::Rounding { inverse } => self.apply_inverse(inverse, &digits),
            FineDecoder::Cosets {
                messages,
                by_digits,
                ..
            } => {
                let key: Vec<(u32, u32)> = digits.iter().map(|d| (d.re(), d.im())).collect();
                match by_digits.get(&key) {
                    Some(&idx) => Ok(messages[idx].clone()),
                    None => Err(LatticeError::NotACodeword),
                }
            }
        }
    }

    /// Residues of `v * p / tau` when `v` lies on the fine lattice grid.
    fn exact_digits(&self, v: &LatticePoint) -> Result<Vec<FieldElement>, LatticeError> {
        let scale = self.p as f64 / self.tau;
        let tol = 1e-6;
        let mut digits = Vec::with_capacity(self.n);
        for c in v.coords() {
            let re = c.re * scale;
            let im = c.im * scale;
            let (kre, kim) = (re.round(), im.round());
            if (re - kre).abs() > tol || (im - kim).abs() > tol {
                return Err(LatticeError::NotACodeword);
            }
            digits.push(GaussianInteger::new(kre as i64, kim as i64).residue(self.p)?);
        }
        Ok(digits)
    }

    fn apply_inverse(
        &self,
        inverse: &[Vec<FieldElement>],
        digits: &[FieldElement],
    ) -> Result<MessageVector, LatticeError> {
        // w = c G^{-1}
        let mut symbols = vec![FieldElement::zero(self.p)?; self.r];
        for (ci, row) in digits.iter().zip(inverse) {
            for (s, e) in symbols.iter_mut().zip(row) {
                *s = s.add(&ci.mul(e)?)?;
            }
        }
        Ok(MessageVector::new(symbols)?)
    }

    /// Nearest-codeword decoding of an arbitrary (noisy) point: the label
    /// of the fine-lattice coset closest to `y` mod the coarse lattice.
    pub fn decode_fine(&self, y: &LatticePoint) -> Result<MessageVector, LatticeError> {
        self.check_dim(y)?;
        match &self.decoder {
            FineDecoder::Rounding { inverse } => {
                let scale = self.p as f64 / self.tau;
                let digits = y
                    .coords()
                    .iter()
                    .map(|c| {
                        let kre = (c.re * scale + 0.5).floor() as i64;
                        let kim = (c.im * scale + 0.5).floor() as i64;
                        GaussianInteger::new(kre, kim).residue(self.p)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply_inverse(inverse, &digits)
            }
            FineDecoder::Cosets {
                messages,
                codewords,
                ..
            } => {
                let (best, _) = nearest_coset(y, codewords, self.tau);
                Ok(messages[best].clone())
            }
        }
    }

    /// Draws a dither uniformly over the coarse Voronoi cell, one square
    /// per complex coordinate.
    pub fn sample_dither(&self, rng: &mut impl Rng) -> LatticePoint {
        let coords = (0..self.n)
            .map(|_| {
                let re = (rng.gen::<f64>() - 0.5) * self.tau;
                let im = (rng.gen::<f64>() - 0.5) * self.tau;
                Complex64::new(re, im)
            })
            .collect();
        LatticePoint::new(coords)
    }

    /// Scales a codebook point by a field element through the natural
    /// map: `[g(c) * t] mod coarse`. When `t = f(w)` this equals
    /// `f(c * w)` because precoding and encoding commute.
    pub fn scale_label(
        &self,
        c: &FieldElement,
        t: &LatticePoint,
    ) -> Result<LatticePoint, LatticeError> {
        self.check_dim(t)?;
        if c.modulus() != self.p {
            return Err(AlgebraError::ModulusMismatch(self.p, c.modulus()).into());
        }
        Ok(mod_scaled(&t.scale(c.to_complex()), self.tau))
    }
}

/// Componentwise nearest multiple of `step`, ties toward the larger
/// multiple so residues live in `[-step/2, step/2)`.
fn quantize_scaled(v: &LatticePoint, step: f64) -> LatticePoint {
    LatticePoint::new(
        v.coords()
            .iter()
            .map(|c| {
                let kre = (c.re / step + 0.5).floor();
                let kim = (c.im / step + 0.5).floor();
                Complex64::new(kre * step, kim * step)
            })
            .collect(),
    )
}

fn mod_scaled(v: &LatticePoint, step: f64) -> LatticePoint {
    v.sub(&quantize_scaled(v, step))
}

/// Index and distance of the coset representative nearest to `y` in the
/// mod-coarse metric.
fn nearest_coset(y: &LatticePoint, codewords: &[LatticePoint], tau: f64) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, c) in codewords.iter().enumerate() {
        let d = mod_scaled(&y.sub(c), tau).norm_sq();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, best_d)
}

/// Scales `row` so its pivot becomes 1, then clears `col` from every
/// other row. Rows are small, so the pivot row is cloned for simplicity.
fn eliminate_column(m: &mut [Vec<FieldElement>], pivot_row: usize, col: usize) {
    let inv = m[pivot_row][col].inv().expect("pivot is nonzero");
    for cell in m[pivot_row].iter_mut() {
        *cell = cell.mul(&inv).expect("same modulus");
    }
    let pivot = m[pivot_row].clone();
    for (i, row) in m.iter_mut().enumerate() {
        if i == pivot_row || row[col].is_zero() {
            continue;
        }
        let factor = row[col];
        for (cell, pv) in row.iter_mut().zip(&pivot) {
            let t = factor.mul(pv).expect("same modulus");
            *cell = cell.sub(&t).expect("same modulus");
        }
    }
}

fn rank(g: &[Vec<FieldElement>]) -> usize {
    let mut m: Vec<Vec<FieldElement>> = g.to_vec();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        eliminate_column(&mut m, rank, col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn invert_matrix(g: &[Vec<FieldElement>], p: u32) -> Option<Vec<Vec<FieldElement>>> {
    let n = g.len();
    let one = FieldElement::one(p).ok()?;
    let zero = FieldElement::zero(p).ok()?;
    // augmented [G | I]
    let mut m: Vec<Vec<FieldElement>> = g
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|k| if k == i { one } else { zero }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, pivot);
        eliminate_column(&mut m, col, col);
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}
