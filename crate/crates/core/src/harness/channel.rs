//! Binary symmetric channel realized in key space.

use rand::Rng as _;

use crate::seed::Rng;

/// Crossover probability of hard-decision BPSK at the given SNR:
/// `Q(sqrt(10^(snr_db / 10)))`, clamped into the open interval `(0, 0.5)`.
pub fn snr_to_ber(snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    let e = 0.5 * libm::erfc(snr.sqrt() / std::f64::consts::SQRT_2);
    e.clamp(f64::MIN_POSITIVE, 0.5 - f64::EPSILON)
}

/// A correlated key pair: Alice's uniform key and Bob's copy with independent
/// flips of probability `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
    pub flips: usize,
}

pub fn gen_key_pair(n: usize, e: f64, rng: &mut Rng) -> KeyPair {
    let alice: Vec<u8> = (0..n).map(|_| rng.gen::<u8>() & 1).collect();
    let mut flips = 0;
    let bob = alice
        .iter()
        .map(|&b| {
            if rng.gen::<f64>() < e {
                flips += 1;
                b ^ 1
            } else {
                b
            }
        })
        .collect();
    KeyPair { alice, bob, flips }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    /// Gaussian tail by composite Simpson quadrature on [x, x + 12].
    fn q_quadrature(x: f64) -> f64 {
        let (a, b, steps) = (x, x + 12.0, 200_000);
        let h = (b - a) / steps as f64;
        let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut sum = pdf(a) + pdf(b);
        for k in 1..steps {
            sum += pdf(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    }

    #[test]
    fn ber_matches_quadrature() {
        for &snr in &[3.51, 5.0, 7.48] {
            let oracle = q_quadrature(10f64.powf(snr / 10.0).sqrt());
            assert!((snr_to_ber(snr) - oracle).abs() < 1e-12, "{snr}");
        }
        assert!((snr_to_ber(3.51) - 0.0670).abs() < 1e-4);
        assert!((snr_to_ber(7.48) - 0.0089).abs() < 1e-4);
        assert!(snr_to_ber(60.0) > 0.0 && snr_to_ber(60.0) < 1e-300);
        assert!(snr_to_ber(-300.0) < 0.5);
    }

    #[test]
    fn flip_fraction_within_three_sigma() {
        let (n, e) = (1_000_000, 0.03);
        let kp = gen_key_pair(n, e, &mut seed::rng(1, &[]));
        let sigma = (e * (1.0 - e) / n as f64).sqrt();
        let frac = kp.flips as f64 / n as f64;
        assert!((frac - e).abs() < 3.0 * sigma);
        assert_eq!(crate::bits::hamming(&kp.alice, &kp.bob), kp.flips);
    }

    #[test]
    fn seeded_pairs_repeat() {
        let a = gen_key_pair(500, 0.05, &mut seed::rng(4, &[]));
        let b = gen_key_pair(500, 0.05, &mut seed::rng(4, &[]));
        assert_eq!(a, b);
        let none = gen_key_pair(500, 1e-300, &mut seed::rng(4, &[]));
        assert_eq!(none.flips, 0);
    }
}
