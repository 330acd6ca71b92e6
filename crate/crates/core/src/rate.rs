//! Rate analysis for the two-user network-coded cognitive interference
//! channel: the compute-and-forward computation rate, the achievable rate
//! pair of the precoded scheme, closed-form alignment of the primary
//! transmitter's scaling, search over integer coefficient vectors,
//! converse bounds, and finite-SNR GDoF estimates.
//!
//! Internally the engine folds the transmit powers into the channel
//! gains: the cognitive transmitter reaches its receiver at `h11*sqrt(SNR)`
//! and the primary's cross link carries `h21*sqrt(INR)` with `INR =
//! SNR^rho`, while the codebooks have unit power. All rates are base-2
//! logarithms per complex channel use.

use crate::algebra::{AlgebraError, FieldElement, GaussianInteger};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RateError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid scheme choice: {0}")]
    InvalidScheme(String),
    #[error("alignment is degenerate: presubtraction cancels the primary's effective link")]
    DegenerateAlignment,
    #[error("invalid evaluation grid: {0}")]
    InvalidGrid(String),
    #[error("scheme search produced no admissible candidate")]
    SearchExhausted,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// One evaluation point of the interference channel: complex gains plus
/// the SNR/INR (equivalently rho) power parameterization.
#[derive(Debug, Clone, Copy)]
pub struct ChannelInstance {
    h11: Complex64,
    h12: Complex64,
    h21: Complex64,
    h22: Complex64,
    snr: f64,
    inr: f64,
    rho: f64,
}

impl ChannelInstance {
    /// Channel from explicit SNR and INR. `h11` and `h21` must be nonzero
    /// (the receiver mappings divide by them); the powers must be
    /// positive and finite.
    pub fn new(
        h11: Complex64,
        h12: Complex64,
        h21: Complex64,
        h22: Complex64,
        snr: f64,
        inr: f64,
    ) -> Result<Self, RateError> {
        if !(snr.is_finite() && snr > 0.0 && inr.is_finite() && inr > 0.0) {
            return Err(RateError::InvalidChannel(
                "snr and inr must be positive and finite".into(),
            ));
        }
        if h11.norm_sqr() == 0.0 || h21.norm_sqr() == 0.0 {
            return Err(RateError::InvalidChannel(
                "h11 and h21 must be nonzero".into(),
            ));
        }
        if ![h11, h12, h21, h22].iter().all(|h| h.is_finite()) {
            return Err(RateError::InvalidChannel("gains must be finite".into()));
        }
        let rho = if (snr - 1.0).abs() < f64::EPSILON {
            f64::NAN
        } else {
            inr.ln() / snr.ln()
        };
        Ok(Self {
            h11,
            h12,
            h21,
            h22,
            snr,
            inr,
            rho,
        })
    }

    /// Channel parameterized by `rho`, i.e. `INR = SNR^rho`.
    pub fn from_rho(
        h11: Complex64,
        h12: Complex64,
        h21: Complex64,
        h22: Complex64,
        snr: f64,
        rho: f64,
    ) -> Result<Self, RateError> {
        if !rho.is_finite() {
            return Err(RateError::InvalidChannel("rho must be finite".into()));
        }
        let mut ch = Self::new(h11, h12, h21, h22, snr, snr.powf(rho))?;
        ch.rho = rho;
        Ok(ch)
    }

    /// Both transmitters at the same power (`INR = SNR`), matching the
    /// formulation that carries the power in the inputs rather than the
    /// gains.
    pub fn with_equal_power(
        h11: Complex64,
        h12: Complex64,
        h21: Complex64,
        h22: Complex64,
        snr: f64,
    ) -> Result<Self, RateError> {
        Self::from_rho(h11, h12, h21, h22, snr, 1.0)
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn inr(&self) -> f64 {
        self.inr
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gains(&self) -> [Complex64; 4] {
        [self.h11, self.h12, self.h21, self.h22]
    }

    // Effective gains with the powers folded in (unit-power codebooks).
    pub fn g11(&self) -> Complex64 {
        self.h11 * self.snr.sqrt()
    }

    pub fn g12(&self) -> Complex64 {
        self.h12 * self.inr.sqrt()
    }

    pub fn g21(&self) -> Complex64 {
        self.h21 * self.inr.sqrt()
    }

    pub fn g22(&self) -> Complex64 {
        self.h22 * self.snr.sqrt()
    }

    /// MMSE scaling of the dirty-paper stage at receiver 1.
    pub fn alpha1(&self) -> f64 {
        alpha_mmse(self.h11, self.snr)
    }

    /// Effective gain from the primary transmitter to receiver 2 after
    /// the cognitive transmitter's presubtraction (before the primary's
    /// own scaling): `g22 - alpha1 * g12 * g21 / g11`.
    pub fn tilde_h22(&self) -> Complex64 {
        self.g22() - self.g12() * self.g21() / self.g11() * self.alpha1()
    }

    /// Ratio whose ceiling sets the alignment integer: `g21 / tilde_h22`.
    pub fn alignment_ratio(&self) -> Result<Complex64, RateError> {
        let t = self.tilde_h22();
        if t.norm_sqr() == 0.0 || !t.is_finite() {
            return Err(RateError::DegenerateAlignment);
        }
        Ok(self.g21() / t)
    }
}

/// Draws unit-magnitude gains with i.i.d. uniform phases.
pub fn random_unit_gains(rng: &mut impl Rng) -> [Complex64; 4] {
    let mut draw = || {
        let phase = rng.gen::<f64>() * std::f64::consts::TAU;
        Complex64::from_polar(1.0, phase)
    };
    [draw(), draw(), draw(), draw()]
}

/// The scheme's free parameters: the integer coefficient pair used by
/// receiver 2 and the primary transmitter's scaling `beta` (unit disk).
/// `gamma` records the alignment integer when the closed-form scaling
/// produced the choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeChoice {
    pub a1: GaussianInteger,
    pub a2: GaussianInteger,
    pub beta: Complex64,
    pub gamma: Option<u64>,
}

impl SchemeChoice {
    pub fn new(a1: GaussianInteger, a2: GaussianInteger, beta: Complex64) -> Self {
        Self {
            a1,
            a2,
            beta,
            gamma: None,
        }
    }

    /// Coefficient residues in `F_{p^2}` (`q1`, `q2`).
    pub fn residues(&self, p: u32) -> Result<(FieldElement, FieldElement), AlgebraError> {
        Ok((self.a1.residue(p)?, self.a2.residue(p)?))
    }

    /// Both residues must be nonzero for the finite-field precoder to
    /// exist and for receiver 2's message term to survive.
    pub fn validate_residues(&self, p: u32) -> Result<(), RateError> {
        let (q1, q2) = self.residues(p)?;
        if q1.is_zero() || q2.is_zero() {
            return Err(RateError::InvalidScheme(format!(
                "coefficient residues mod {p} must be nonzero"
            )));
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), RateError> {
        if self.a1.is_zero() || self.a2.is_zero() {
            return Err(RateError::InvalidScheme(
                "integer coefficients must be nonzero".into(),
            ));
        }
        if self.beta.norm() > 1.0 + 1e-9 || !self.beta.is_finite() {
            return Err(RateError::InvalidScheme(
                "beta must lie in the unit disk".into(),
            ));
        }
        Ok(())
    }
}

/// Converse values: symmetric-rate bound, max-rate bound, and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseBounds {
    pub r_sym_upper: f64,
    pub r_max_upper: f64,
    pub sum_upper: f64,
}

/// Achievable rate pair with the matching converse values and, when the
/// channel is rho-parameterized with `SNR > 1`, the log-SNR-normalized
/// rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub r1: f64,
    pub r2: f64,
    pub sum: f64,
    pub bounds: ConverseBounds,
    pub gdof: Option<(f64, f64, f64)>,
}

fn log2_pos(x: f64) -> f64 {
    if x > 1.0 {
        x.log2()
    } else {
        0.0
    }
}

/// Computation rate of decoding the integer combination `a` from a
/// two-user lattice MAC with gains `h`, receiver scaling `alpha`, and
/// codebook power `power`:
/// `log2+( power / (|alpha|^2 + ||alpha*h - a||^2 * power) )`.
pub fn computation_rate(
    h: [Complex64; 2],
    alpha: Complex64,
    a: [GaussianInteger; 2],
    power: f64,
) -> f64 {
    debug_assert!(power > 0.0);
    let mismatch = (alpha * h[0] - a[0].to_complex()).norm_sqr()
        + (alpha * h[1] - a[1].to_complex()).norm_sqr();
    let den = alpha.norm_sqr() + mismatch * power;
    log2_pos(power / den)
}

/// MMSE coefficient of the dirty-paper stage:
/// `snr*|h11|^2 / (1 + snr*|h11|^2)`.
pub fn alpha_mmse(h11: Complex64, snr: f64) -> f64 {
    let s = snr * h11.norm_sqr();
    s / (1.0 + s)
}

/// Effective two-user channel seen by receiver 2 once the cognitive
/// transmitter presubtracts the (scaled) primary signal:
/// `[g21, beta * tilde_h22]`.
pub fn effective_channel(ch: &ChannelInstance, beta: Complex64) -> [Complex64; 2] {
    [ch.g21(), beta * ch.tilde_h22()]
}

/// Closed-form scaling that turns the effective channel into the exact
/// integer ratio `(g21, g21/gamma)`: `beta* = ratio / gamma` with
/// `gamma = ceil(|ratio|)`, which keeps `beta*` inside the unit disk and
/// makes the coefficient pair `(gamma, 1)` incur zero mismatch.
pub fn aligned_beta(ch: &ChannelInstance) -> Result<(Complex64, u64), RateError> {
    let ratio = ch.alignment_ratio()?;
    let gamma = ratio.norm().ceil().max(1.0);
    if !gamma.is_finite() || gamma > 9.0e15 {
        return Err(RateError::DegenerateAlignment);
    }
    Ok((ratio / gamma, gamma as u64))
}

/// Rate pair achieved by a given scheme choice: the dirty-paper rate of
/// the cognitive pair and the computation rate of receiver 2 with the
/// scaling pinned to `a1 / g21` (which lets the presubtraction's coarse
/// quantization term drop out of the modulo receiver mapping).
pub fn achievable_rates(
    ch: &ChannelInstance,
    choice: &SchemeChoice,
) -> Result<RateResult, RateError> {
    choice.validate()?;
    let r1 = (1.0 + ch.g11().norm_sqr()).log2();
    let h_eff = effective_channel(ch, choice.beta);
    let alpha2 = choice.a1.to_complex() / ch.g21();
    let r2 = computation_rate(h_eff, alpha2, [choice.a1, choice.a2], 1.0);
    let bounds = converse_bounds(ch);
    let gdof = if ch.snr > 1.0 {
        let l = ch.snr.log2();
        Some((r1 / l, r2 / l, (r1 + r2) / l))
    } else {
        None
    };
    Ok(RateResult {
        r1,
        r2,
        sum: r1 + r2,
        bounds,
        gdof,
    })
}

/// Upper bounds from the cut-set style converse: the symmetric rate is
/// limited by the weaker of the two direct decoding cuts, and the larger
/// individual rate by the total received power at either receiver.
pub fn converse_bounds(ch: &ChannelInstance) -> ConverseBounds {
    let a = (1.0 + ch.g11().norm_sqr()).log2();
    let b = (1.0 + ch.g21().norm_sqr()).log2();
    let rx1 = (1.0 + ch.g11().norm_sqr() + ch.g12().norm_sqr()).log2();
    let rx2 = (1.0 + ch.g21().norm_sqr() + ch.g22().norm_sqr()).log2();
    let r_sym_upper = a.min(b);
    let r_max_upper = rx1.max(rx2);
    ConverseBounds {
        r_sym_upper,
        r_max_upper,
        sum_upper: r_sym_upper + r_max_upper,
    }
}

/// Search space for `optimize_scheme`.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Field modulus used to reject coefficient pairs whose residues
    /// vanish (those would break the finite-field precoder).
    pub p: u32,
    /// Component range of the dense coefficient enumeration:
    /// both components of both coefficients run over `[-box_bound, box_bound]`.
    pub box_bound: i64,
    /// Upper limit on the alignment-ratio magnitude up to which the
    /// annulus of near-minimal aligning coefficients is enumerated.
    /// Beyond it only the closed-form candidate covers large ratios (the
    /// extra rate available there is below `2*log2(1 + 1/ratio)` bits).
    pub annulus_cap: f64,
    /// Polar beta-grid resolution (magnitudes x phases).
    pub beta_mags: usize,
    pub beta_phases: usize,
    /// When set, every coefficient pair is additionally evaluated on the
    /// polar grid. The per-pair best beta is the projection of the exact
    /// aligning point onto the unit disk and is always evaluated, so the
    /// grid can only confirm, never improve, the returned rate; it is off
    /// by default and exists for verification.
    pub evaluate_grid: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            p: 3,
            box_bound: 3,
            annulus_cap: 4096.0,
            beta_mags: 64,
            beta_phases: 256,
            evaluate_grid: false,
        }
    }
}

struct Candidate {
    choice: SchemeChoice,
    r2: f64,
    norm: i128,
    lex: [i64; 4],
}

/// `||a||^2` in wide arithmetic; the aligned coefficient can be huge for
/// near-degenerate channels.
fn pair_norm(a1: &GaussianInteger, a2: &GaussianInteger) -> i128 {
    let sq = |v: i64| v as i128 * v as i128;
    sq(a1.re) + sq(a1.im) + sq(a2.re) + sq(a2.im)
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        if self.r2 != other.r2 {
            return self.r2 > other.r2;
        }
        if self.norm != other.norm {
            return self.norm < other.norm;
        }
        self.lex < other.lex
    }
}

/// Maximizes receiver 2's rate over coefficient pairs and primary
/// scalings with the cognitive rate held fixed. The candidate set is the
/// closed-form aligned choice, a dense box of small coefficient pairs,
/// and (for large alignment ratios) the annulus of minimal-magnitude
/// aligning coefficients; every pair is scored at its disk-optimal beta.
/// The result therefore dominates the closed-form candidate whenever the
/// latter is admissible.
pub fn optimize_scheme(
    ch: &ChannelInstance,
    cfg: &SearchConfig,
) -> Result<(SchemeChoice, RateResult), RateError> {
    crate::algebra::validate_modulus(cfg.p)?;
    let g21 = ch.g21();
    let t22 = ch.tilde_h22();
    // Pairs beyond this norm have zero rate even with a free scaling:
    // min over alpha of |alpha|^2 + P*||alpha*h - a||^2 equals
    // P*||a||^2 / (1 + P*||h||^2), so the rate argument P/den is at most
    // (1 + P*||h||^2) / ||a||^2 and the pinned-scaling rate is no larger.
    let norm_cap = 1.0 + g21.norm_sqr() + t22.norm_sqr();

    let mut best: Option<Candidate> = None;
    let consider = |choice: SchemeChoice, best: &mut Option<Candidate>| {
        let h_eff = effective_channel(ch, choice.beta);
        let alpha2 = choice.a1.to_complex() / g21;
        let r2 = computation_rate(h_eff, alpha2, [choice.a1, choice.a2], 1.0);
        let cand = Candidate {
            choice,
            r2,
            norm: pair_norm(&choice.a1, &choice.a2),
            lex: [choice.a1.re, choice.a1.im, choice.a2.re, choice.a2.im],
        };
        if best.as_ref().is_none_or(|b| cand.better_than(b)) {
            *best = Some(cand);
        }
    };

    let residues_ok = |a1: &GaussianInteger, a2: &GaussianInteger| -> bool {
        let q1 = a1.residue(cfg.p).expect("modulus validated");
        let q2 = a2.residue(cfg.p).expect("modulus validated");
        !q1.is_zero() && !q2.is_zero()
    };

    // Closed-form aligned candidate.
    if let Ok((beta_star, gamma)) = aligned_beta(ch) {
        let a1 = GaussianInteger::new(gamma as i64, 0);
        let a2 = GaussianInteger::ONE;
        if residues_ok(&a1, &a2) {
            let choice = SchemeChoice {
                a1,
                a2,
                beta: beta_star,
                gamma: Some(gamma),
            };
            consider(choice, &mut best);
        }
    }

    let best_beta = |a1: &GaussianInteger, a2: &GaussianInteger| -> Complex64 {
        // The mismatch |(a1/g21) * beta * t22 - a2| is minimized over the
        // unit disk by projecting the exact aligning point onto it.
        let w = a1.to_complex() * t22 / g21;
        if w.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let target = a2.to_complex() / w;
        if target.norm() <= 1.0 {
            target
        } else {
            target / target.norm()
        }
    };

    let grid: Vec<Complex64> = if cfg.evaluate_grid {
        let mut pts = Vec::with_capacity(cfg.beta_mags * cfg.beta_phases);
        for mi in 1..=cfg.beta_mags {
            let mag = mi as f64 / cfg.beta_mags as f64;
            for pi in 0..cfg.beta_phases {
                let phase = std::f64::consts::TAU * pi as f64 / cfg.beta_phases as f64;
                pts.push(Complex64::from_polar(mag, phase));
            }
        }
        pts
    } else {
        Vec::new()
    };

    let b = cfg.box_bound;
    for a1re in -b..=b {
        for a1im in -b..=b {
            let a1 = GaussianInteger::new(a1re, a1im);
            if a1.is_zero() {
                continue;
            }
            for a2re in -b..=b {
                for a2im in -b..=b {
                    let a2 = GaussianInteger::new(a2re, a2im);
                    if a2.is_zero() || !residues_ok(&a1, &a2) {
                        continue;
                    }
                    if (a1.norm() + a2.norm()) as f64 > norm_cap {
                        continue;
                    }
                    let beta = best_beta(&a1, &a2);
                    consider(SchemeChoice::new(a1, a2, beta), &mut best);
                    for &g in &grid {
                        consider(SchemeChoice::new(a1, a2, g), &mut best);
                    }
                }
            }
        }
    }

    // Annulus of minimal-magnitude aligning coefficients paired with a
    // unit second coefficient, for ratios beyond the dense box.
    if let Ok(ratio) = ch.alignment_ratio() {
        let mu = ratio.norm();
        if mu > b as f64 && mu <= cfg.annulus_cap {
            let lo2 = mu * mu;
            let hi = mu + 2.0;
            let hi2 = hi * hi;
            let m_max = hi.ceil() as i64;
            let a2 = GaussianInteger::ONE;
            for m in -m_max..=m_max {
                let rem_lo = lo2 - (m * m) as f64;
                let rem_hi = hi2 - (m * m) as f64;
                if rem_hi < 0.0 {
                    continue;
                }
                let n_hi = rem_hi.sqrt().floor() as i64;
                let n_lo = if rem_lo > 0.0 {
                    rem_lo.sqrt().ceil() as i64
                } else {
                    0
                };
                for n_abs in n_lo..=n_hi {
                    for n in [n_abs, -n_abs] {
                        let a1 = GaussianInteger::new(m, n);
                        if a1.is_zero() || (a1.norm() as f64) < lo2 {
                            continue;
                        }
                        if !residues_ok(&a1, &a2) {
                            continue;
                        }
                        let beta = best_beta(&a1, &a2);
                        consider(SchemeChoice::new(a1, a2, beta), &mut best);
                        if n == 0 {
                            break;
                        }
                    }
                }
            }
        }
    }

    let best = best.ok_or(RateError::SearchExhausted)?;
    let result = achievable_rates(ch, &best.choice)?;
    Ok((best.choice, result))
}

/// A channel family for GDoF sweeps: fixed gains, power scaled along an
/// SNR grid with `INR = SNR^rho`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelFamily {
    pub h: [Complex64; 4],
    pub rho: f64,
}

/// One finite-SNR GDoF sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdofPoint {
    pub snr: f64,
    pub d1: f64,
    pub d2: f64,
    pub d_sum: f64,
}

/// Normalized rates `R / log2(SNR)` along an increasing SNR grid, using
/// the optimized achievability at each point.
pub fn gdof_estimate(
    family: &ChannelFamily,
    snr_grid: &[f64],
    cfg: &SearchConfig,
) -> Result<Vec<GdofPoint>, RateError> {
    if snr_grid.len() < 2 {
        return Err(RateError::InvalidGrid(
            "need at least two SNR points".into(),
        ));
    }
    if !snr_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(RateError::InvalidGrid("SNR grid must be increasing".into()));
    }
    if snr_grid.iter().any(|&s| s <= 1.0) {
        return Err(RateError::InvalidGrid(
            "SNR points must exceed 1 for log-SNR normalization".into(),
        ));
    }
    let [h11, h12, h21, h22] = family.h;
    snr_grid
        .iter()
        .map(|&snr| {
            let ch = ChannelInstance::from_rho(h11, h12, h21, h22, snr, family.rho)?;
            let (_, rr) = optimize_scheme(&ch, cfg)?;
            let (d1, d2, d_sum) = rr.gdof.expect("snr > 1 guarantees normalization");
            Ok(GdofPoint { snr, d1, d2, d_sum })
        })
        .collect()
}
