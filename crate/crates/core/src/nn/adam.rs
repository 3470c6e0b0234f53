//! Bias-corrected Adam.

use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, ParamGrads};
use crate::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Zero moments shaped like `net`'s parameters, default betas.
    pub fn new(net: &Mlp) -> Self {
        Self::with_betas(net, BETA1, BETA2, EPSILON)
    }

    pub fn with_betas(net: &Mlp, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros: Vec<Vec<f64>> = net.params().iter().map(|p| vec![0.0; p.len()]).collect();
        Self {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step_count: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }

    /// Applies one update to `net` in place. Non-finite gradients leave both the
    /// network and the optimiser state untouched.
    pub fn step(&mut self, net: &mut Mlp, grads: &ParamGrads, lr: f64) -> Result<()> {
        let tensors = grads.tensors();
        if tensors.len() != self.first_moment.len() {
            return Err(Error::dim("adam tensors", self.first_moment.len(), tensors.len()));
        }
        for (g, m) in tensors.iter().zip(&self.first_moment) {
            if g.len() != m.len() {
                return Err(Error::dim("adam tensor", m.len(), g.len()));
            }
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradients"));
        }
        if !lr.is_finite() || lr < 0.0 {
            return Err(Error::InvalidArgument(format!("learning rate {lr}")));
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);

        let params = net.params_mut();
        if params.len() != tensors.len() {
            return Err(Error::dim("adam parameters", params.len(), tensors.len()));
        }
        for (((p, g), m), v) in params
            .into_iter()
            .zip(tensors)
            .zip(self.first_moment.iter_mut())
            .zip(self.second_moment.iter_mut())
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
