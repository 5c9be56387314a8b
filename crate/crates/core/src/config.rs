use crate::error::{Error, Result};

/// Hyperparameters shared by every training regime. The curriculum-only
/// fields are ignored by the baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct RclConfig {
    /// Weight of the edge reconstruction term.
    pub beta: f64,
    /// Proximal weight tying each mask update to the previous mask.
    pub gamma: f64,
    /// 1..=5; the training structure reaches the input structure after
    /// `epochs / pace` iterations.
    pub pace: u32,
    pub epochs: u32,
    pub lr: f64,
    pub hidden: usize,
    /// Mask saturation tolerance.
    pub epsilon_conv: f64,
    /// Target fraction of edges selected by the initial mask.
    pub init_frac: f64,
    /// Include the reconstruction term in the model-weight gradient.
    pub recon_in_wstep: bool,
    /// Edge reweighting by selection history and node confidence.
    pub smoothing: bool,
    /// Decay of the running average of per-node losses that sets node
    /// confidence during reweighting; 0 uses the latest epoch only.
    pub loss_decay: f64,
    /// When false the mask is pinned to 1 on every edge.
    pub learn_mask: bool,
    pub seed: u64,
}

impl Default for RclConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            gamma: 0.0,
            pace: 3,
            epochs: 300,
            lr: 0.005,
            hidden: 64,
            epsilon_conv: 1e-3,
            init_frac: 0.1,
            recon_in_wstep: false,
            smoothing: true,
            loss_decay: 0.5,
            learn_mask: true,
            seed: 0,
        }
    }
}

impl RclConfig {
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &str); 9] = [
            (self.beta > 0.0 && self.beta.is_finite(), "beta must be positive"),
            (self.gamma >= 0.0 && self.gamma.is_finite(), "gamma must be non-negative"),
            ((1..=5).contains(&self.pace), "pace must be in 1..=5"),
            (self.epochs > 0, "epochs must be positive"),
            (self.lr > 0.0 && self.lr.is_finite(), "lr must be positive"),
            (self.hidden > 0, "hidden must be positive"),
            (
                self.epsilon_conv > 0.0 && self.epsilon_conv < 1.0,
                "epsilon_conv must be in (0, 1)",
            ),
            (
                self.init_frac > 0.0 && self.init_frac < 1.0,
                "init_frac must be in (0, 1)",
            ),
            (
                (0.0..1.0).contains(&self.loss_decay),
                "loss_decay must be in [0, 1)",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::param(*msg)),
            None => Ok(()),
        }
    }
}
