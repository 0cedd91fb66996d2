use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Functional form of the content benefit v.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenefitKind {
    /// v(y) = scale * ln(1 + y)
    Log1p,
}

/// Benefit function applied to a user's perceived amount of contents.
///
/// The contract is: v(0) = 0, v strictly increasing, strictly concave,
/// v'(0) finite and v'(y) -> 0 as y -> infinity. `marginal_at_zero` is the
/// constant usually written as alpha; configs must keep it above the
/// marginal production cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenefitSpec {
    pub kind: BenefitKind,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

impl Default for BenefitSpec {
    fn default() -> Self {
        Self::log1p(1.0)
    }
}

impl BenefitSpec {
    pub fn log1p(scale: f64) -> Self {
        BenefitSpec {
            kind: BenefitKind::Log1p,
            scale,
        }
    }

    /// v(y)
    pub fn value(&self, y: f64) -> f64 {
        match self.kind {
            BenefitKind::Log1p => self.scale * y.ln_1p(),
        }
    }

    /// v'(y)
    pub fn deriv(&self, y: f64) -> f64 {
        match self.kind {
            BenefitKind::Log1p => self.scale / (1.0 + y),
        }
    }

    /// alpha = v'(0)
    pub fn marginal_at_zero(&self) -> f64 {
        self.deriv(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "benefit scale must be a positive real, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}
