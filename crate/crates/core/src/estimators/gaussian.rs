//! Standard normal helpers and the Gaussian isoperimetric function.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy)]
pub struct GaussianKit {
    normal: Normal,
}

impl Default for GaussianKit {
    fn default() -> Self {
        GaussianKit {
            normal: Normal::standard(),
        }
    }
}

impl GaussianKit {
    pub fn new() -> Self {
        Self::default()
    }

    /// `φ`
    pub fn phi(&self, x: f64) -> f64 {
        self.normal.pdf(x)
    }

    /// `Φ`
    pub fn cdf(&self, x: f64) -> f64 {
        self.normal.cdf(x)
    }

    /// `Φ⁻¹`, with `Φ⁻¹(0) = -∞` and `Φ⁻¹(1) = +∞`.
    pub fn quantile(&self, t: f64) -> f64 {
        if t <= 0.0 {
            f64::NEG_INFINITY
        } else if t >= 1.0 {
            f64::INFINITY
        } else {
            self.normal.inverse_cdf(t)
        }
    }

    /// `I(t) = φ(Φ⁻¹(t))`, zero at both ends.
    pub fn iso(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            self.phi(self.quantile(t))
        }
    }

    /// `I_var(t) = t(1 - t)`
    pub fn iso_var(&self, t: f64) -> f64 {
        t * (1.0 - t)
    }
}
