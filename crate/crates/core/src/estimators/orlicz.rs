//! Young functions and Orlicz norms.

use std::fmt;
use std::sync::Arc;

use crate::calculus::Functional;
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::space::PointSpace;

use super::{samples, McSpec};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Convex, even, nonnegative `N` with `N(0) = 0`, `N(x) > 0` for `x ≠ 0`,
/// and finite `C_N = sup_{x>0} x N'(x) / N(x)`.
#[derive(Clone)]
pub struct YoungFunction {
    label: String,
    n: RealFn,
    dn: RealFn,
    c_n: f64,
}

impl fmt::Debug for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("YoungFunction")
            .field("label", &self.label)
            .field("c_n", &self.c_n)
            .finish()
    }
}

fn log_grid() -> impl Iterator<Item = f64> {
    (0..=1200).map(|i| 10f64.powf(-6.0 + i as f64 * 0.01))
}

impl YoungFunction {
    /// Validates `N` on a grid and computes `C_N` as a grid supremum.
    pub fn new<N, D>(label: impl Into<String>, n: N, dn: D) -> Result<Self>
    where
        N: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let bad = |why: &str| Err(Error::InvalidYoung(format!("{label}: {why}")));
        if n(0.0) != 0.0 {
            return bad("N(0) != 0");
        }
        let mut c_n: f64 = 0.0;
        for x in log_grid() {
            let v = n(x);
            if !(v > 0.0 && v.is_finite()) {
                return bad("N(x) must be positive and finite for x != 0");
            }
            if (n(-x) - v).abs() > 1e-12 * v {
                return bad("N is not even");
            }
            let h = 0.5 * x;
            if n(x - h) + n(x + h) < 2.0 * v * (1.0 - 1e-12) {
                return bad("N is not convex");
            }
            c_n = c_n.max(x * dn(x) / v);
        }
        if !c_n.is_finite() {
            return bad("C_N is infinite");
        }
        Ok(YoungFunction {
            label,
            n: Arc::new(n),
            dn: Arc::new(dn),
            c_n,
        })
    }

    /// `N(x) = |x|^p`, `C_N = p`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        let mut y = YoungFunction::new(
            format!("|x|^{p}"),
            move |x: f64| x.abs().powf(p),
            move |x: f64| p * x.abs().powf(p - 1.0) * x.signum(),
        )?;
        y.c_n = p;
        Ok(y)
    }

    /// `N(x) = √(1 + x²) - 1`, `C_N = 2` (attained as `x → 0`).
    pub fn sqrt_quadratic() -> Self {
        let mut y = YoungFunction::new(
            "sqrt(1+x^2)-1",
            |x: f64| x * x / ((1.0 + x * x).sqrt() + 1.0),
            |x: f64| x / (1.0 + x * x).sqrt(),
        )
        .expect("valid Young function");
        y.c_n = 2.0;
        y
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.n)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.dn)(x)
    }

    pub fn c_n(&self) -> f64 {
        self.c_n
    }
}

/// `‖F‖_N` over fixed samples: the `κ > 0` with `mean N(F/κ) = 1`, found by
/// bisection on `log κ` within `[2⁻³⁰, 2³⁰]`. The standard error is the
/// delta-method error of the root.
pub fn orlicz_norm_of_samples(xs: &[f64], n: &YoungFunction, ci_level: f64) -> Result<Estimate> {
    if xs.is_empty() || xs.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("Orlicz norm of an a.s. zero variable".into()));
    }
    let g = |k: f64| xs.iter().map(|&x| n.eval(x / k)).sum::<f64>() / xs.len() as f64;
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    let (glo, ghi) = (g(lo.exp2()), g(hi.exp2()));
    if !(glo >= 1.0 && ghi <= 1.0) {
        return Err(Error::NoRoot(format!(
            "no Orlicz bracket in [2^-30, 2^30] for {}",
            n.label()
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid.exp2()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let kappa = (0.5 * (lo + hi)).exp2();
    let m = xs.len() as f64;
    let vals: Vec<f64> = xs.iter().map(|&x| n.eval(x / kappa)).collect();
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let slope: f64 = xs
        .iter()
        .map(|&x| -x / (kappa * kappa) * n.derivative(x / kappa))
        .sum::<f64>()
        / m;
    let se = if slope != 0.0 {
        (var / m).sqrt() / slope.abs()
    } else {
        f64::INFINITY
    };
    Ok(Estimate::new(kappa, se, xs.len(), ci_level))
}

/// `‖F‖_N` under `π_λ`.
pub fn orlicz_norm(
    f: &Functional,
    n: &YoungFunction,
    space: &PointSpace,
    intensity: f64,
    mc: &McSpec,
) -> Result<Estimate> {
    let xs = samples(f, space, intensity, mc)?;
    orlicz_norm_of_samples(&xs, n, mc.ci_level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn young_constants() {
        assert_eq!(YoungFunction::power(3.0).unwrap().c_n(), 3.0);
        let s = YoungFunction::sqrt_quadratic();
        assert_eq!(s.c_n(), 2.0);
        let (a, b) = (s.clone(), s.clone());
        let grid = YoungFunction::new("copy", move |x: f64| a.eval(x), move |x| b.derivative(x))
        .unwrap();
        assert!((grid.c_n() - 2.0).abs() < 1e-6);
        assert!(YoungFunction::new("not convex", |x: f64| x.abs().sqrt(), |x: f64| 0.5 / x.sqrt()).is_err());
        assert!(YoungFunction::new("odd", |x: f64| x, |_| 1.0).is_err());
        assert!(YoungFunction::power(0.5).is_err());
    }

    #[test]
    fn quadratic_norm_is_root_mean_square() {
        let xs = [1.0, -2.0, 0.0, 3.5, 0.25];
        let n2 = YoungFunction::power(2.0).unwrap();
        let k = orlicz_norm_of_samples(&xs, &n2, 0.95).unwrap().mean;
        let rms = (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt();
        assert!((k - rms).abs() < 1e-9);
        let doubled: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let k2 = orlicz_norm_of_samples(&doubled, &n2, 0.95).unwrap().mean;
        assert!((k2 - 2.0 * k).abs() < 1e-9);
        assert!((orlicz_norm_of_samples(&[1.0; 4], &n2, 0.95).unwrap().mean - 1.0).abs() < 1e-12);
        assert!(orlicz_norm_of_samples(&[0.0; 4], &n2, 0.95).is_err());
    }
}
