//! Hard-decision channel models.
//!
//! * [`AwgnChannel`]: antipodal signalling over AWGN followed by a sign
//!   decision, which is a binary symmetric channel with crossover
//!   `p = Q(sqrt(2 Eb/N0))`. `Eb/N0` is taken per transmitted bit.
//! * [`VlcIsiChannel`]: on-off keying where each received intensity picks up
//!   leakage from both neighbours, `y(t) = h x(t-1) + x(t) + h x(t+1)`, with
//!   idle (zero) guard symbols outside the frame, optional Gaussian intensity
//!   noise and a fixed decision threshold.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

use crate::codeword::Codeword;
use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// BSC crossover probability of hard-decision antipodal signalling at
/// `ebn0_db`.
pub fn awgn_crossover(ebn0_db: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    q_function((2.0 * ebn0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnChannel {
    ebn0_db: f64,
    crossover: f64,
}

impl AwgnChannel {
    pub fn new(ebn0_db: f64) -> Result<Self> {
        if ebn0_db.is_nan() {
            return Err(Error::Invalid("Eb/N0 must be a number".into()));
        }
        Ok(Self {
            ebn0_db,
            crossover: awgn_crossover(ebn0_db),
        })
    }

    /// A binary symmetric channel given directly by its crossover probability.
    pub fn from_crossover(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::Invalid(format!("crossover probability {p} outside [0, 0.5]")));
        }
        // Invert p = Q(sqrt(2 Eb/N0)) for reporting only.
        let ebn0_db = if p == 0.0 {
            f64::INFINITY
        } else if p == 0.5 {
            f64::NEG_INFINITY
        } else {
            let x = statrs::distribution::ContinuousCDF::inverse_cdf(
                &statrs::distribution::Normal::standard(),
                1.0 - p,
            );
            10.0 * (x * x / 2.0).log10()
        };
        Ok(Self { ebn0_db, crossover: p })
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn crossover(&self) -> f64 {
        self.crossover
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlcIsiChannel {
    h: f64,
    noise_sigma: f64,
    threshold: f64,
}

impl VlcIsiChannel {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;
    pub const DEFAULT_NOISE_SIGMA: f64 = 0.1;

    pub fn new(h: f64, noise_sigma: f64, threshold: f64) -> Result<Self> {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::Invalid(format!("interference coefficient h={h} must be >= 0")));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(Error::Invalid(format!("noise sigma {noise_sigma} must be >= 0")));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Invalid(format!("threshold {threshold} must lie in (0, 1)")));
        }
        Ok(Self {
            h,
            noise_sigma,
            threshold,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Noise-free received intensities `y(1..n)`.
    pub fn intensities(&self, c: &Codeword) -> Vec<f64> {
        let n = c.len();
        let x = |i: isize| -> f64 {
            if i < 0 || i as usize >= n {
                0.0
            } else {
                c.bit(i as usize) as u8 as f64
            }
        };
        (0..n as isize)
            .map(|t| self.h * x(t - 1) + x(t) + self.h * x(t + 1))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Awgn(AwgnChannel),
    Vlc(VlcIsiChannel),
}

impl ChannelModel {
    pub fn transmit<R: Rng + ?Sized>(&self, c: &Codeword, rng: &mut R) -> Codeword {
        match self {
            ChannelModel::Awgn(ch) => transmit_awgn(c, ch, rng),
            ChannelModel::Vlc(ch) => transmit_vlc(c, ch, rng),
        }
    }

    /// Swept parameter: Eb/N0 in dB or the interference coefficient.
    pub fn parameter(&self) -> f64 {
        match self {
            ChannelModel::Awgn(ch) => ch.ebn0_db(),
            ChannelModel::Vlc(ch) => ch.h(),
        }
    }
}

/// Flips every bit independently with the channel's crossover probability.
pub fn transmit_awgn<R: Rng + ?Sized>(c: &Codeword, ch: &AwgnChannel, rng: &mut R) -> Codeword {
    let mut out = *c;
    if ch.crossover == 0.0 {
        return out;
    }
    for i in 0..c.len() {
        if rng.random_bool(ch.crossover) {
            out.flip(i);
        }
    }
    out
}

/// Thresholds the (optionally noisy) ISI intensities.
pub fn transmit_vlc<R: Rng + ?Sized>(c: &Codeword, ch: &VlcIsiChannel, rng: &mut R) -> Codeword {
    let noise = (ch.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, ch.noise_sigma).expect("sigma validated"));
    let mut bits = Vec::with_capacity(c.len());
    for y in ch.intensities(c) {
        let y = match &noise {
            Some(n) => y + n.sample(rng),
            None => y,
        };
        bits.push((y > ch.threshold) as u8);
    }
    Codeword::from_bits(&bits).expect("same blocklength")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cw(s: &str) -> Codeword {
        s.parse().unwrap()
    }

    fn noiseless(h: f64) -> VlcIsiChannel {
        VlcIsiChannel::new(h, 0.0, 0.5).unwrap()
    }

    /// Q(x) from the Maclaurin series of erf, independent of `statrs`.
    fn q_series(x: f64) -> f64 {
        let z = x / std::f64::consts::SQRT_2;
        let mut term = z;
        let mut sum = z;
        for k in 1..200 {
            term *= -z * z / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        let erf = 2.0 / std::f64::consts::PI.sqrt() * sum;
        0.5 * (1.0 - erf)
    }

    #[test]
    fn crossover_at_zero_db() {
        let p = AwgnChannel::new(0.0).unwrap().crossover();
        let oracle = q_series(2f64.sqrt());
        assert!((p - oracle).abs() < 1e-10, "{p} vs {oracle}");
        assert!((p - 0.0786).abs() < 5e-5);
        for db in [-4.0, 2.0, 6.0] {
            let p = awgn_crossover(db);
            let oracle = q_series((2.0 * 10f64.powf(db / 10.0)).sqrt());
            assert!((p - oracle).abs() < 1e-10, "db={db}");
        }
    }

    #[test]
    fn from_crossover_inverts() {
        let ch = AwgnChannel::from_crossover(awgn_crossover(3.0)).unwrap();
        assert!((ch.ebn0_db() - 3.0).abs() < 1e-6);
        assert!(AwgnChannel::from_crossover(0.7).is_err());
    }

    #[test]
    fn zero_crossover_is_identity() {
        let ch = AwgnChannel::from_crossover(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = cw("1011001110");
        for _ in 0..100 {
            assert_eq!(transmit_awgn(&c, &ch, &mut rng), c);
        }
    }

    #[test]
    fn flip_rate_matches_crossover() {
        let ch = AwgnChannel::new(0.0).unwrap();
        let p = ch.crossover();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = Codeword::zeros(100).unwrap();
        let blocks = 10_000;
        let flips: usize = (0..blocks).map(|_| transmit_awgn(&c, &ch, &mut rng).weight()).sum();
        let bits = (blocks * 100) as f64;
        let sigma = (p * (1.0 - p) / bits).sqrt();
        let rate = flips as f64 / bits;
        assert!((rate - p).abs() < 3.0 * sigma, "rate {rate} vs p {p}");
    }

    #[test]
    fn vlc_examples() {
        let x = cw("101");
        let ch = noiseless(0.3);
        let y = ch.intensities(&x);
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 0.6).abs() < 1e-12 && (y[2] - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(transmit_vlc(&x, &ch, &mut rng), cw("111"));
        assert_eq!(transmit_vlc(&x, &noiseless(0.2), &mut rng), cw("101"));
        assert_eq!(transmit_vlc(&cw("010"), &noiseless(0.4), &mut rng), cw("010"));
    }

    #[test]
    fn vlc_parameters_are_validated() {
        assert!(VlcIsiChannel::new(-0.1, 0.0, 0.5).is_err());
        assert!(VlcIsiChannel::new(0.1, -1.0, 0.5).is_err());
        assert!(VlcIsiChannel::new(0.1, 0.0, 1.0).is_err());
        assert!(VlcIsiChannel::new(0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn noisy_vlc_is_seed_deterministic() {
        let ch = VlcIsiChannel::new(0.3, 0.1, 0.5).unwrap();
        let c = cw("101101001011010010110");
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| transmit_vlc(&c, &ch, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
    }
}
