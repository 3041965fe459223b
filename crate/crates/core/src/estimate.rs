//! Monte Carlo estimates, streaming moment accumulation, and paired reports.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Number of pooled standard errors allowed between the two sides of a
/// checked equality, or the slack allowed on an inequality.
pub const TOLERANCE_SIGMAS: f64 = 4.0;

/// Absolute slack for comparisons of zero-variance quantities.
pub const EXACT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub ci_level: f64,
}

impl Estimate {
    pub fn new(mean: f64, stderr: f64, n: usize, ci_level: f64) -> Self {
        Estimate {
            mean,
            stderr,
            n,
            ci_level,
        }
    }

    pub fn exact(value: f64) -> Self {
        Estimate::new(value, 0.0, 0, 0.95)
    }

    pub fn half_width(&self) -> f64 {
        z_value(self.ci_level) * self.stderr
    }

    pub fn ci(&self) -> (f64, f64) {
        let h = self.half_width();
        (self.mean - h, self.mean + h)
    }

    /// `|mean - target| <= k·stderr` (plus a tiny absolute slack).
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr + EXACT_SLACK * (1.0 + target.abs())
    }
}

/// Two-sided standard normal quantile for a confidence level.
pub fn z_value(ci_level: f64) -> f64 {
    let normal = Normal::standard();
    normal.inverse_cdf(0.5 + ci_level / 2.0)
}

/// Streaming mean and co-moment matrix of a `K`-vector of statistics.
///
/// Merging follows Chan et al.; folding batch results in index order makes
/// serial and parallel runs bit-identical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<const K: usize> {
    n: usize,
    mean: [f64; K],
    comoment: [[f64; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Moments {
            n: 0,
            mean: [0.0; K],
            comoment: [[0.0; K]; K],
        }
    }
}

impl<const K: usize> Moments<K> {
    pub fn push(&mut self, x: &[f64; K]) {
        self.n += 1;
        let n = self.n as f64;
        let mut delta = [0.0; K];
        for i in 0..K {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / n;
        }
        for i in 0..K {
            for j in 0..K {
                self.comoment[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    pub fn merge(&mut self, other: &Moments<K>) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        let mut delta = [0.0; K];
        for i in 0..K {
            delta[i] = other.mean[i] - self.mean[i];
        }
        for i in 0..K {
            for j in 0..K {
                self.comoment[i][j] += other.comoment[i][j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..K {
            self.mean[i] += delta[i] * nb / n;
        }
        self.n += other.n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn means(&self) -> [f64; K] {
        self.mean
    }

    /// Sample covariance (denominator `n - 1`).
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let c = self.comoment[i][j] / (self.n - 1) as f64;
        if i == j {
            c.max(0.0)
        } else {
            c
        }
    }

    pub fn estimate(&self, i: usize, ci_level: f64) -> Estimate {
        let se = (self.covariance(i, i) / self.n.max(1) as f64).sqrt();
        Estimate::new(self.mean[i], se, self.n, ci_level)
    }

    /// Estimate of `Σ c_i E[X_i]` with its exact paired standard error.
    pub fn combination(&self, coeffs: &[f64; K], ci_level: f64) -> Estimate {
        let mean: f64 = coeffs.iter().zip(&self.mean).map(|(c, m)| c * m).sum();
        let mut var = 0.0;
        for i in 0..K {
            for j in 0..K {
                var += coeffs[i] * coeffs[j] * self.covariance(i, j);
            }
        }
        Estimate::new(mean, (var.max(0.0) / self.n.max(1) as f64).sqrt(), self.n, ci_level)
    }

    /// Delta-method estimate of `g(E[X])`, with the gradient taken by central
    /// differences.
    pub fn function<G>(&self, g: G, ci_level: f64) -> Estimate
    where
        G: Fn(&[f64; K]) -> f64,
    {
        let value = g(&self.mean);
        let mut grad = [0.0; K];
        for i in 0..K {
            let h = 1e-6 * self.mean[i].abs().max(1e-3);
            let mut up = self.mean;
            let mut down = self.mean;
            up[i] += h;
            down[i] -= h;
            grad[i] = (g(&up) - g(&down)) / (2.0 * h);
        }
        let mut var = 0.0;
        for i in 0..K {
            for j in 0..K {
                var += grad[i] * grad[j] * self.covariance(i, j);
            }
        }
        let se = (var.max(0.0) / self.n.max(1) as f64).sqrt();
        Estimate::new(value, if se.is_finite() { se } else { f64::INFINITY }, self.n, ci_level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `left = right`
    Equal,
    /// `left <= right`
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    Holds,
    Fails,
    /// Informational row; never fails a run.
    Reported,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        matches!(self, Verdict::Violated | Verdict::Fails)
    }
}

/// Paired comparison of two estimated sides. `difference` is `left - right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub left: Estimate,
    pub right: Estimate,
    pub difference: Estimate,
    pub relation: Relation,
    pub verdict: Verdict,
}

impl IdentityReport {
    pub fn new(left: Estimate, right: Estimate, difference: Estimate, relation: Relation) -> Self {
        let slack = TOLERANCE_SIGMAS * difference.stderr
            + EXACT_SLACK * (1.0 + left.mean.abs().max(right.mean.abs()));
        let verdict = match relation {
            Relation::Equal if difference.mean.abs() <= slack => Verdict::Consistent,
            Relation::Equal => Verdict::Violated,
            Relation::AtMost if difference.mean <= slack => Verdict::Holds,
            Relation::AtMost => Verdict::Fails,
        };
        IdentityReport {
            left,
            right,
            difference,
            relation,
            verdict,
        }
    }

    /// Build from accumulated moments where `left` and `right` are linear in
    /// the component means.
    pub fn from_moments<const K: usize>(
        m: &Moments<K>,
        left: &[f64; K],
        right: &[f64; K],
        relation: Relation,
        ci_level: f64,
    ) -> Self {
        let mut diff = [0.0; K];
        for i in 0..K {
            diff[i] = left[i] - right[i];
        }
        IdentityReport::new(
            m.combination(left, ci_level),
            m.combination(right, ci_level),
            m.combination(&diff, ci_level),
            relation,
        )
    }

    pub fn passed(&self) -> bool {
        !self.verdict.is_failure()
    }
}
