use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates for one weight tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub first: Array2<f64>,
    pub second: Array2<f64>,
}

impl Moments {
    pub fn zeros(shape: (usize, usize)) -> Self {
        Self {
            first: Array2::zeros(shape),
            second: Array2::zeros(shape),
        }
    }

    /// Applies one bias-corrected update to `weight`. `step` is the 1-based
    /// index of this update.
    pub fn update(
        &mut self,
        weight: &mut Array2<f64>,
        grad: &Array2<f64>,
        lr: f64,
        step: u64,
        cfg: &AdamConfig,
    ) -> Result<()> {
        if weight.dim() != grad.dim() {
            return Err(Error::Shape(format!(
                "gradient {:?} for weight {:?}",
                grad.dim(),
                weight.dim()
            )));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let bc1 = 1.0 - cfg.beta1.powi(step as i32);
        let bc2 = 1.0 - cfg.beta2.powi(step as i32);
        ndarray::Zip::from(weight)
            .and(&mut self.first)
            .and(&mut self.second)
            .and(grad)
            .for_each(|w, m, v, &g| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
            });
        Ok(())
    }
}
