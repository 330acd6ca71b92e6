//! Monte-Carlo simulation of the full transceiver chain: finite-field
//! precoding and lattice encoding at the cognitive transmitter with
//! dirty-paper presubtraction, scaling at the primary transmitter, the
//! two-user channel, the inflated-lattice receiver mapping at receiver 1,
//! and the compute-and-forward receiver mapping at receiver 2.
//!
//! The channel gains are the effective (power-folded) ones from
//! [`ChannelInstance`], so the codebook should be built at unit power
//! (`NestedLatticeCode::uncoded_for_power(p, n, 1.0)`) unless a test
//! deliberately scales things differently. Noise samples are unit-variance
//! circular Gaussians.
//!
//! With the closed-form aligned scaling and its coefficient pair, the
//! chain cancels both the cross interference and the non-integer
//! mismatch exactly: in noiseless runs both receivers recover their
//! messages with probability one, and the residual at receiver 2 is
//! exactly the scaled channel noise.

use crate::algebra::{precoding_coefficient, AlgebraError, FieldElement, MessageVector};
use crate::lattice::{LatticeError, LatticePoint, NestedLatticeCode};
use crate::rate::{ChannelInstance, RateError, SchemeChoice};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Configuration of a batch of Monte-Carlo trials.
#[derive(Clone, Copy)]
pub struct TrialConfig<'a> {
    pub code: &'a NestedLatticeCode,
    pub ch: ChannelInstance,
    pub choice: SchemeChoice,
    pub noise_on: bool,
    pub trials: u64,
    pub seed: u64,
}

impl<'a> TrialConfig<'a> {
    pub fn new(
        code: &'a NestedLatticeCode,
        ch: ChannelInstance,
        choice: SchemeChoice,
        noise_on: bool,
        trials: u64,
        seed: u64,
    ) -> Result<Self, SimError> {
        if trials == 0 {
            return Err(SimError::InvalidConfig("need at least one trial".into()));
        }
        if choice.beta.norm() > 1.0 + 1e-9 {
            return Err(SimError::InvalidConfig(
                "beta must lie in the unit disk".into(),
            ));
        }
        choice.validate_residues(code.modulus())?;
        Ok(Self {
            code,
            ch,
            choice,
            noise_on,
            trials,
            seed,
        })
    }
}

/// Aggregated outcome of a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rx1_message_errors: u64,
    pub rx2_message_errors: u64,
    /// Mean squared residual per complex dimension at receiver 2, taken
    /// before fine-lattice quantization.
    pub empirical_effective_noise_power_rx2: f64,
    pub trials: u64,
}

impl TrialOutcome {
    pub fn rx1_error_rate(&self) -> f64 {
        self.rx1_message_errors as f64 / self.trials as f64
    }

    pub fn rx2_error_rate(&self) -> f64 {
        self.rx2_message_errors as f64 / self.trials as f64
    }
}

/// Brings two messages to a common length by zero-padding the shorter.
pub fn zero_pad_pair(
    w1: &MessageVector,
    w2: &MessageVector,
) -> Result<(MessageVector, MessageVector), AlgebraError> {
    let len = w1.len().max(w2.len());
    Ok((w1.zero_padded(len)?, w2.zero_padded(len)?))
}

/// Primary transmitter: encodes the finite-field combination of the two
/// messages and dithers it, `x2 = [f(w1 + w2) + d2] mod coarse`. The
/// scaling toward the unit disk is applied afterwards by the caller.
pub fn tx_primary(
    w1: &MessageVector,
    w2: &MessageVector,
    code: &NestedLatticeCode,
    d2: &LatticePoint,
) -> Result<LatticePoint, SimError> {
    let (w1, w2) = zero_pad_pair(w1, w2)?;
    let v2 = code.encode_label(&w1.add(&w2)?)?;
    Ok(code.mod_coarse(&v2.add(d2))?)
}

/// Cognitive transmitter: precodes its message by `b`, encodes, and
/// presubtracts the known (already scaled) primary signal with the MMSE
/// coefficient: `x1 = [f(b*w1) - alpha1*(g12/g11)*x2 + d1] mod coarse`.
pub fn tx_cognitive(
    w1: &MessageVector,
    b: &FieldElement,
    x2: &LatticePoint,
    ch: &ChannelInstance,
    code: &NestedLatticeCode,
    d1: &LatticePoint,
) -> Result<LatticePoint, SimError> {
    let v1 = code.encode_label(&w1.scale(b)?)?;
    let presub = x2.scale(ch.g12() / ch.g11() * ch.alpha1());
    Ok(code.mod_coarse(&v1.sub(&presub).add(d1))?)
}

/// Receiver 1: inflated-lattice mapping `[alpha1*y1/g11 - d1] mod coarse`,
/// nearest-codeword decoding, then unprecoding by `b^{-1}`.
pub fn rx1_decode(
    y1: &LatticePoint,
    ch: &ChannelInstance,
    code: &NestedLatticeCode,
    d1: &LatticePoint,
    b: &FieldElement,
) -> Result<MessageVector, SimError> {
    let scaled = y1.scale(Complex64::new(ch.alpha1(), 0.0) / ch.g11());
    let mapped = code.mod_coarse(&scaled.sub(d1))?;
    let label = code.decode_fine(&mapped)?;
    Ok(label.scale(&b.inv()?)?)
}

/// Receiver 2's pre-quantization observation: the compute-and-forward
/// mapping `[alpha2*y2 - a1*d1 - a2*d2] mod coarse` with `alpha2 = a1/g21`.
pub fn rx2_map(
    y2: &LatticePoint,
    ch: &ChannelInstance,
    choice: &SchemeChoice,
    code: &NestedLatticeCode,
    d1: &LatticePoint,
    d2: &LatticePoint,
) -> Result<LatticePoint, SimError> {
    let alpha2 = choice.a1.to_complex() / ch.g21();
    let combined = y2
        .scale(alpha2)
        .sub(&d1.scale(choice.a1.to_complex()))
        .sub(&d2.scale(choice.a2.to_complex()));
    Ok(code.mod_coarse(&combined)?)
}

/// Receiver 2: applies the receiver mapping, decodes the nearest
/// codeword (which carries `q2 * w2`; the other message is absent by the
/// precoding identity), and unscales by `q2^{-1}`.
pub fn rx2_decode(
    y2: &LatticePoint,
    ch: &ChannelInstance,
    choice: &SchemeChoice,
    code: &NestedLatticeCode,
    d1: &LatticePoint,
    d2: &LatticePoint,
) -> Result<MessageVector, SimError> {
    let mapped = rx2_map(y2, ch, choice, code, d1, d2)?;
    let label = code.decode_fine(&mapped)?;
    let (_, q2) = choice.residues(code.modulus())?;
    Ok(label.scale(&q2.inv()?)?)
}

/// Unit-variance circular complex Gaussian via Box-Muller.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let u1 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2 = rng.gen::<f64>();
    let radius = (-u1.ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    Complex64::new(radius * angle.cos(), radius * angle.sin())
}

fn noise_vector(n: usize, rng: &mut impl Rng) -> LatticePoint {
    LatticePoint::new((0..n).map(|_| complex_gaussian(rng)).collect())
}

fn random_message(code: &NestedLatticeCode, rng: &mut impl Rng) -> MessageVector {
    let p = code.modulus();
    let symbols = (0..code.code_dim())
        .map(|_| {
            FieldElement::new(rng.gen_range(0..p) as i64, rng.gen_range(0..p) as i64, p)
                .expect("code modulus is valid")
        })
        .collect();
    MessageVector::new(symbols).expect("nonempty message")
}

/// Runs the full chain for one message pair with explicit dithers and
/// noise, returning the decoded pair and the receiver-2 residual power
/// accumulated per complex dimension.
#[allow(clippy::too_many_arguments)]
fn run_chain(
    cfg: &TrialConfig,
    b: &FieldElement,
    w1: &MessageVector,
    w2: &MessageVector,
    d1: &LatticePoint,
    d2: &LatticePoint,
    z1: Option<&LatticePoint>,
    z2: Option<&LatticePoint>,
) -> Result<(MessageVector, MessageVector, f64), SimError> {
    let code = cfg.code;
    let ch = &cfg.ch;
    let x2_unit = tx_primary(w1, w2, code, d2)?;
    let x2 = x2_unit.scale(cfg.choice.beta);
    let x1 = tx_cognitive(w1, b, &x2, ch, code, d1)?;

    let mut y1 = x1.scale(ch.g11()).add(&x2.scale(ch.g12()));
    let mut y2 = x1.scale(ch.g21()).add(&x2.scale(ch.g22()));
    if let Some(z) = z1 {
        y1 = y1.add(z);
    }
    if let Some(z) = z2 {
        y2 = y2.add(z);
    }

    let w1_hat = rx1_decode(&y1, ch, code, d1, b)?;
    let w2_hat = rx2_decode(&y2, ch, &cfg.choice, code, d1, d2)?;

    // Residual once the decoded combination's codeword is removed; with
    // exact alignment this is the scaled channel noise.
    let mapped = rx2_map(&y2, ch, &cfg.choice, code, d1, d2)?;
    let t2 = code.encode_label(w2)?;
    let expected = t2.scale(cfg.choice.a2.to_complex());
    let residual = code.mod_coarse(&mapped.sub(&expected))?;
    Ok((w1_hat, w2_hat, residual.norm_sq()))
}

/// Runs `cfg.trials` independent trials. Trial `t` draws everything from
/// stream `t` of a counter-based generator seeded with `cfg.seed`, so
/// results do not depend on execution order.
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialOutcome, SimError> {
    let (q1, q2) = cfg.choice.residues(cfg.code.modulus())?;
    let b = precoding_coefficient(&q1, &q2)?;
    let n = cfg.code.blocklength();

    let mut rx1_errors = 0u64;
    let mut rx2_errors = 0u64;
    let mut residual_power = 0.0f64;

    for trial in 0..cfg.trials {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial);

        let w1 = random_message(cfg.code, &mut rng);
        let w2 = random_message(cfg.code, &mut rng);
        let d1 = cfg.code.sample_dither(&mut rng);
        let d2 = cfg.code.sample_dither(&mut rng);
        let (z1, z2) = if cfg.noise_on {
            (
                Some(noise_vector(n, &mut rng)),
                Some(noise_vector(n, &mut rng)),
            )
        } else {
            (None, None)
        };

        let (w1_hat, w2_hat, res) =
            run_chain(cfg, &b, &w1, &w2, &d1, &d2, z1.as_ref(), z2.as_ref())?;
        if w1_hat != w1 {
            rx1_errors += 1;
        }
        if w2_hat != w2 {
            rx2_errors += 1;
        }
        residual_power += res;
    }

    Ok(TrialOutcome {
        rx1_message_errors: rx1_errors,
        rx2_message_errors: rx2_errors,
        empirical_effective_noise_power_rx2: residual_power / (n as f64 * cfg.trials as f64),
        trials: cfg.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GaussianInteger;
    use crate::rate::aligned_beta;

    fn fe(re: i64, im: i64, p: u32) -> FieldElement {
        FieldElement::new(re, im, p).unwrap()
    }

    fn msg(pairs: &[(i64, i64)], p: u32) -> MessageVector {
        MessageVector::new(pairs.iter().map(|&(re, im)| fe(re, im, p)).collect()).unwrap()
    }

    fn unit_gains() -> [Complex64; 4] {
        [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]
    }

    fn benign_channel(snr: f64) -> ChannelInstance {
        let [h11, h12, h21, h22] = unit_gains();
        ChannelInstance::from_rho(h11, h12, h21, h22, snr, 1.0).unwrap()
    }

    fn aligned_choice(ch: &ChannelInstance) -> SchemeChoice {
        let (beta, gamma) = aligned_beta(ch).unwrap();
        SchemeChoice {
            a1: GaussianInteger::new(gamma as i64, 0),
            a2: GaussianInteger::ONE,
            beta,
            gamma: Some(gamma),
        }
    }

    #[test]
    fn tx_primary_examples() {
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let zero = LatticePoint::zero(1);
        let w0 = msg(&[(0, 0)], 3);
        let x2 = tx_primary(&w0, &w0, &code, &zero).unwrap();
        assert!(x2.norm_sq() < 1e-20);

        // additive-inverse messages combine to the zero codeword
        let x2 = tx_primary(&msg(&[(1, 0)], 3), &msg(&[(2, 0)], 3), &code, &zero).unwrap();
        assert!(x2.norm_sq() < 1e-20);

        // definitional round trip, random draws
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..100 {
            let w1 = random_message(&code, &mut rng);
            let w2 = random_message(&code, &mut rng);
            let d2 = code.sample_dither(&mut rng);
            let x2 = tx_primary(&w1, &w2, &code, &d2).unwrap();
            let recovered = code.mod_coarse(&x2.sub(&d2)).unwrap();
            let v2 = code.encode_label(&w1.add(&w2).unwrap()).unwrap();
            let diff = code.mod_coarse(&recovered.sub(&v2)).unwrap();
            assert!(diff.norm_sq() < 1e-18);
        }
    }

    #[test]
    fn tx_primary_zero_pads() {
        let code = NestedLatticeCode::uncoded_for_power(3, 2, 1.0).unwrap();
        let zero = LatticePoint::zero(2);
        let w1 = msg(&[(1, 0)], 3); // shorter message
        let w2 = msg(&[(2, 0), (1, 1)], 3);
        let x2 = tx_primary(&w1, &w2, &code, &zero).unwrap();
        let expect = code.encode_label(&msg(&[(0, 0), (1, 1)], 3)).unwrap();
        assert!(x2.sub(&expect).norm_sq() < 1e-18);
    }

    #[test]
    fn tx_cognitive_examples() {
        // no cross link: nothing to presubtract
        let one = Complex64::new(1.0, 0.0);
        let ch = ChannelInstance::with_equal_power(one, Complex64::new(0.0, 0.0), one, one, 1e4)
            .unwrap();
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let zero = LatticePoint::zero(1);
        let b = fe(2, 0, 3);
        let w1 = msg(&[(1, 0)], 3);
        let x1 = tx_cognitive(&w1, &b, &zero, &ch, &code, &zero).unwrap();
        let expect = code.encode_label(&w1.scale(&b).unwrap()).unwrap();
        assert!(x1.sub(&expect).norm_sq() < 1e-18);

        // vanishing power sends the presubtraction term to zero
        let ch_low = benign_channel(1e-9);
        let x2 = LatticePoint::new(vec![Complex64::new(0.3, -0.2)]);
        let x1 = tx_cognitive(&w1, &b, &x2, &ch_low, &code, &zero).unwrap();
        let expect = code.encode_label(&w1.scale(&b).unwrap()).unwrap();
        assert!(x1.sub(&expect).norm_sq() < 1e-12);
    }

    #[test]
    fn transmit_power_within_cell_second_moment() {
        // 25k trials at n = 4 give 1e5 coordinate samples
        let code = NestedLatticeCode::uncoded_for_power(3, 4, 1.0).unwrap();
        let ch = benign_channel(1e6);
        let choice = aligned_choice(&ch);
        let (q1, q2) = choice.residues(3).unwrap();
        let b = precoding_coefficient(&q1, &q2).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let trials = 25_000usize;
        let (mut p1, mut p2) = (0.0f64, 0.0f64);
        for _ in 0..trials {
            let w1 = random_message(&code, &mut rng);
            let w2 = random_message(&code, &mut rng);
            let d1 = code.sample_dither(&mut rng);
            let d2 = code.sample_dither(&mut rng);
            let x2 = tx_primary(&w1, &w2, &code, &d2).unwrap().scale(choice.beta);
            let x1 = tx_cognitive(&w1, &b, &x2, &ch, &code, &d1).unwrap();
            p1 += x1.norm_sq() / code.blocklength() as f64;
            p2 += x2.norm_sq() / code.blocklength() as f64;
        }
        p1 /= trials as f64;
        p2 /= trials as f64;
        let sigma = code.second_moment();
        // the dithered cognitive input is uniform on the cell; the
        // primary input is the same shrunk by |beta| <= 1
        assert!(
            (p1 - sigma).abs() <= 0.02 * sigma,
            "cognitive power {p1} vs second moment {sigma}"
        );
        assert!(
            p1 <= 1.02 * sigma && p2 <= 1.02 * sigma,
            "power constraint violated"
        );
        let beta_sq = choice.beta.norm_sqr();
        assert!(
            (p2 - beta_sq * sigma).abs() <= 0.02 * sigma,
            "primary power {p2} vs {}",
            beta_sq * sigma
        );
    }

    #[test]
    fn rx1_decodes_exactly_without_noise() {
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let ch = benign_channel(1e8);
        let choice = aligned_choice(&ch);
        let (q1, q2) = choice.residues(3).unwrap();
        let b = precoding_coefficient(&q1, &q2).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for re in 0..3 {
            for im in 0..3 {
                let w1 = msg(&[(re, im)], 3);
                let w2 = random_message(&code, &mut rng);
                let d1 = code.sample_dither(&mut rng);
                let d2 = code.sample_dither(&mut rng);
                let x2 = tx_primary(&w1, &w2, &code, &d2).unwrap().scale(choice.beta);
                let x1 = tx_cognitive(&w1, &b, &x2, &ch, &code, &d1).unwrap();
                let y1 = x1.scale(ch.g11()).add(&x2.scale(ch.g12()));
                let got = rx1_decode(&y1, &ch, &code, &d1, &b).unwrap();
                assert_eq!(got, w1);
            }
        }
    }

    #[test]
    fn rx1_unprecoding_is_identity_when_b_is_one() {
        // q1 = -q2 makes b = 1; transmit the raw message
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let ch = benign_channel(1e8);
        let one = fe(1, 0, 3);
        assert_eq!(
            precoding_coefficient(&fe(1, 0, 3), &fe(2, 0, 3)).unwrap(),
            one
        );
        let w1 = msg(&[(2, 1)], 3);
        let zero = LatticePoint::zero(1);
        let x1 = tx_cognitive(&w1, &one, &zero, &ch, &code, &zero).unwrap();
        let y1 = x1.scale(ch.g11());
        let got = rx1_decode(&y1, &ch, &code, &zero, &one).unwrap();
        assert_eq!(got, w1);

        // zero message, zero everything
        let w0 = msg(&[(0, 0)], 3);
        let x1 = tx_cognitive(&w0, &one, &zero, &ch, &code, &zero).unwrap();
        let got = rx1_decode(&x1.scale(ch.g11()), &ch, &code, &zero, &one).unwrap();
        assert_eq!(got, w0);
    }

    #[test]
    fn rx2_decodes_exactly_for_all_message_pairs() {
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let ch = benign_channel(1e8);
        let choice = aligned_choice(&ch);
        assert_eq!(choice.gamma, Some(1));
        let (q1, q2) = choice.residues(3).unwrap();
        let b = precoding_coefficient(&q1, &q2).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for w1re in 0..3 {
            for w1im in 0..3 {
                for w2re in 0..3 {
                    for w2im in 0..3 {
                        let w1 = msg(&[(w1re, w1im)], 3);
                        let w2 = msg(&[(w2re, w2im)], 3);
                        let d1 = code.sample_dither(&mut rng);
                        let d2 = code.sample_dither(&mut rng);
                        let x2 = tx_primary(&w1, &w2, &code, &d2).unwrap().scale(choice.beta);
                        let x1 = tx_cognitive(&w1, &b, &x2, &ch, &code, &d1).unwrap();
                        let y2 = x1.scale(ch.g21()).add(&x2.scale(ch.g22()));
                        let got = rx2_decode(&y2, &ch, &choice, &code, &d1, &d2).unwrap();
                        assert_eq!(got, w2, "w1=({w1re},{w1im}) w2=({w2re},{w2im})");
                    }
                }
            }
        }
    }

    #[test]
    fn rx2_is_interference_free_for_zero_message() {
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let ch = benign_channel(1e8);
        let choice = aligned_choice(&ch);
        let (q1, q2) = choice.residues(3).unwrap();
        let b = precoding_coefficient(&q1, &q2).unwrap();
        let w2 = msg(&[(0, 0)], 3);
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for re in 0..3 {
            for im in 0..3 {
                let w1 = msg(&[(re, im)], 3);
                let d1 = code.sample_dither(&mut rng);
                let d2 = code.sample_dither(&mut rng);
                let x2 = tx_primary(&w1, &w2, &code, &d2).unwrap().scale(choice.beta);
                let x1 = tx_cognitive(&w1, &b, &x2, &ch, &code, &d1).unwrap();
                let y2 = x1.scale(ch.g21()).add(&x2.scale(ch.g22()));
                let got = rx2_decode(&y2, &ch, &choice, &code, &d1, &d2).unwrap();
                assert_eq!(got, w2, "leakage from w1=({re},{im})");
            }
        }
    }

    #[test]
    fn presubtraction_quantization_term_is_coarse_lattice_point() {
        // alpha2 * g21 equals a1 exactly, so the coarse quantization term
        // from the cognitive modulo operation scales into the coarse
        // lattice and drops out of the receiver mapping.
        let code = NestedLatticeCode::uncoded_for_power(3, 2, 1.0).unwrap();
        let ch = benign_channel(1e4);
        let choice = aligned_choice(&ch);
        let (q1, q2) = choice.residues(3).unwrap();
        let b = precoding_coefficient(&q1, &q2).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(14);
        for _ in 0..50 {
            let w1 = random_message(&code, &mut rng);
            let w2 = random_message(&code, &mut rng);
            let d1 = code.sample_dither(&mut rng);
            let d2 = code.sample_dither(&mut rng);
            let x2 = tx_primary(&w1, &w2, &code, &d2).unwrap().scale(choice.beta);
            // reconstruct the pre-mod argument and its quantization term
            let v1 = code.encode_label(&w1.scale(&b).unwrap()).unwrap();
            let arg = v1
                .sub(&x2.scale(ch.g12() / ch.g11() * ch.alpha1()))
                .add(&d1);
            let x1 = tx_cognitive(&w1, &b, &x2, &ch, &code, &d1).unwrap();
            let lambda = arg.sub(&x1);
            let scaled = lambda.scale(choice.a1.to_complex());
            let reduced = code.mod_coarse(&scaled).unwrap();
            assert!(
                reduced.norm_sq() < 1e-16,
                "a1*lambda escaped the coarse lattice"
            );
        }
    }

    #[test]
    fn run_trials_is_deterministic_and_error_free_without_noise() {
        let code = NestedLatticeCode::uncoded_for_power(7, 4, 1.0).unwrap();
        let ch = benign_channel(1e8);
        let choice = aligned_choice(&ch);
        let cfg = TrialConfig::new(&code, ch, choice, false, 500, 99).unwrap();
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rx1_message_errors, 0);
        assert_eq!(a.rx2_message_errors, 0);
        assert!(a.empirical_effective_noise_power_rx2 < 1e-18);
    }

    #[test]
    fn run_trials_rejects_bad_configs() {
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let ch = benign_channel(1e4);
        let choice = aligned_choice(&ch);
        assert!(TrialConfig::new(&code, ch, choice, false, 0, 1).is_err());
        // gamma = 3 has zero residue mod 3
        let bad = SchemeChoice::new(
            GaussianInteger::new(3, 0),
            GaussianInteger::ONE,
            Complex64::new(0.5, 0.0),
        );
        assert!(TrialConfig::new(&code, ch, bad, false, 10, 1).is_err());
    }

    #[test]
    fn effective_noise_power_matches_prediction() {
        let code = NestedLatticeCode::uncoded_for_power(3, 1, 1.0).unwrap();
        let ch = benign_channel(100.0);
        let choice = aligned_choice(&ch);
        let cfg = TrialConfig::new(&code, ch, choice, true, 20_000, 7).unwrap();
        let out = run_trials(&cfg).unwrap();
        let gamma = choice.gamma.unwrap() as f64;
        let predicted = gamma * gamma / ch.g21().norm_sqr();
        let got = out.empirical_effective_noise_power_rx2;
        assert!(
            (got - predicted).abs() <= 0.05 * predicted,
            "measured {got} vs predicted {predicted}"
        );
    }

    #[test]
    fn complex_gaussian_moments() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let n = 200_000;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pow = 0.0;
        for _ in 0..n {
            let z = complex_gaussian(&mut rng);
            sum += z;
            pow += z.norm_sqr();
        }
        let mean = sum / n as f64;
        let var = pow / n as f64;
        assert!(mean.norm() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }
}
