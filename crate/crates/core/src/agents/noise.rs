//! Exploration noise for continuous actions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ornstein–Uhlenbeck process, one independent coordinate per action dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
    state: Vec<f64>,
}

impl OuNoise {
    pub fn new(dim: usize, theta: f64, sigma: f64, mu: f64) -> Result<Self> {
        if dim == 0 || !(theta.is_finite() && sigma.is_finite() && mu.is_finite()) || theta < 0.0 || sigma < 0.0 {
            return Err(Error::InvalidArgument("OU noise needs dim > 0 and finite non-negative theta, sigma".into()));
        }
        Ok(Self {
            theta,
            sigma,
            mu,
            state: vec![mu; dim],
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|x| *x = self.mu);
    }

    /// `x ← x + θ(μ − x) + σ·z` with `z` supplied by the caller.
    pub fn advance(&mut self, z: &[f64]) -> Result<&[f64]> {
        if z.len() != self.state.len() {
            return Err(Error::dim("ou innovation", self.state.len(), z.len()));
        }
        for (x, &zi) in self.state.iter_mut().zip(z) {
            *x += self.theta * (self.mu - *x) + self.sigma * zi;
        }
        Ok(&self.state)
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.state.len()).map(|_| StandardNormal.sample(rng)).collect();
        self.advance(&z).expect("matching width").to_vec()
    }
}

/// Standalone OU update: returns the next state for innovation `z`.
pub fn ou_sample(state: f64, theta: f64, sigma: f64, mu: f64, z: f64) -> f64 {
    state + theta * (mu - state) + sigma * z
}

/// Zero-mean Gaussian with clipping, as used for target-policy smoothing.
pub fn clipped_noise(sample: f64, clip: f64) -> f64 {
    sample.clamp(-clip, clip)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExplorationSpec {
    Ou { theta: f64, sigma: f64, mu: f64 },
    Gaussian { sigma: f64 },
}

impl ExplorationSpec {
    pub fn scale(&self) -> f64 {
        match *self {
            ExplorationSpec::Ou { sigma, .. } | ExplorationSpec::Gaussian { sigma } => sigma,
        }
    }
}

/// Stateful exploration source built from an [`ExplorationSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Exploration {
    Ou(OuNoise),
    Gaussian { sigma: f64, dim: usize },
}

impl Exploration {
    pub fn new(spec: ExplorationSpec, dim: usize) -> Result<Self> {
        match spec {
            ExplorationSpec::Ou { theta, sigma, mu } => Ok(Exploration::Ou(OuNoise::new(dim, theta, sigma, mu)?)),
            ExplorationSpec::Gaussian { sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) || dim == 0 {
                    return Err(Error::InvalidArgument("gaussian sigma must be finite and non-negative".into()));
                }
                Ok(Exploration::Gaussian { sigma, dim })
            }
        }
    }

    pub fn reset(&mut self) {
        if let Exploration::Ou(ou) = self {
            ou.reset();
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        match self {
            Exploration::Ou(ou) => ou.sample(rng),
            Exploration::Gaussian { sigma, dim } => (0..*dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    *sigma * z
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn ou_update_examples() {
        assert_eq!(ou_sample(0.0, 0.15, 0.2, 0.0, 0.0), 0.0);
        assert!((ou_sample(1.0, 0.15, 0.2, 0.0, 0.0) - 0.85).abs() < 1e-15);
        assert!((ou_sample(0.0, 0.15, 0.2, 0.0, 1.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ou_reset_returns_to_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ou = OuNoise::new(2, 0.15, 0.2, 0.3).unwrap();
        for _ in 0..10 {
            ou.sample(&mut rng);
        }
        assert_ne!(ou.state(), &[0.3, 0.3]);
        ou.reset();
        assert_eq!(ou.state(), &[0.3, 0.3]);
    }

    #[test]
    fn clipping_bounds_noise() {
        assert_eq!(clipped_noise(0.9, 0.5), 0.5);
        assert_eq!(clipped_noise(-2.0, 0.5), -0.5);
        assert_eq!(clipped_noise(0.1, 0.5), 0.1);
    }

    #[test]
    fn gaussian_is_centered_with_requested_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = Exploration::new(ExplorationSpec::Gaussian { sigma: 0.1 }, 2).unwrap();
        let n = 50_000;
        let xs: Vec<f64> = (0..n).flat_map(|_| g.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.002);
        assert!((var.sqrt() - 0.1).abs() < 0.002);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(OuNoise::new(0, 0.15, 0.2, 0.0).is_err());
        assert!(OuNoise::new(2, -0.1, 0.2, 0.0).is_err());
        assert!(Exploration::new(ExplorationSpec::Gaussian { sigma: f64::NAN }, 2).is_err());
    }
}
