//! Target-network maintenance.

use super::mlp::Mlp;
use crate::{Error, Result};

/// `p′ ← τ p + (1 − τ) p′` for every parameter of `target`.
pub fn soft_update(target: &mut Mlp, source: &Mlp, tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!("tau {tau} outside [0, 1]")));
    }
    if !target.same_architecture(source) {
        return Err(Error::Architecture("soft update between different architectures".into()));
    }
    if tau == 1.0 {
        return target.copy_from(source);
    }
    if tau == 0.0 {
        return Ok(());
    }
    for (dst, src) in target.params_mut().into_iter().zip(source.params()) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = tau * s + (1.0 - tau) * *d;
        }
    }
    Ok(())
}

/// Hard copy `θ⁻ ← θ`.
pub fn hard_update(target: &mut Mlp, source: &Mlp) -> Result<()> {
    target.copy_from(source)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::nn::{Activation, LayerSpec};

    fn pair(seed: u64) -> (Mlp, Mlp) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Mlp::dense(&[3, 5, 2], Activation::Relu, Activation::Linear, &mut rng).unwrap();
        let b = Mlp::dense(&[3, 5, 2], Activation::Relu, Activation::Linear, &mut rng).unwrap();
        (a, b)
    }

    #[test]
    fn tau_one_copies_and_tau_zero_keeps() {
        let (mut target, source) = pair(0);
        let original = target.clone();
        soft_update(&mut target, &source, 0.0).unwrap();
        assert_eq!(target, original);
        soft_update(&mut target, &source, 1.0).unwrap();
        assert_eq!(target, source);
    }

    #[test]
    fn scalar_blend() {
        let spec = [LayerSpec::new(1, 1, Activation::Linear)];
        let mut target = Mlp::zeros(&spec, None).unwrap();
        let mut source = Mlp::zeros(&spec, None).unwrap();
        source.layers_mut()[0].weights_mut()[0] = 2.0;
        soft_update(&mut target, &source, 0.001).unwrap();
        assert_eq!(target.layers()[0].weights()[0], 0.002);
    }

    #[test]
    fn rejects_mismatch_and_bad_tau() {
        let (mut target, source) = pair(1);
        assert!(soft_update(&mut target, &source, 1.5).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let other = Mlp::dueling(&[3, 5], Activation::Relu, 2, &mut rng).unwrap();
        assert!(soft_update(&mut target, &other, 0.5).is_err());
        assert!(hard_update(&mut target, &other).is_err());
    }
}
