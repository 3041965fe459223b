//! Deterministic batched Monte Carlo engine.
//!
//! Samples are split into batches of [`BATCH_SIZE`]; batch `b` draws from
//! `ChaCha8Rng` seeded with `seed` on stream `b`. Batch results are folded in
//! index order, so the output does not depend on the execution mode or the
//! number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::configuration::{sample_configuration, Configuration};
use crate::error::{Error, Result};
use crate::estimate::Moments;
use crate::space::{PointSpace, QuadSpec, SigmaSample};

pub const BATCH_SIZE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Serial,
    /// Falls back to serial execution when built without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub n_outer: usize,
    pub seed: u64,
    pub ci_level: f64,
    #[serde(default)]
    pub exec: Exec,
}

impl McSpec {
    pub fn new(n_outer: usize, seed: u64) -> Result<Self> {
        let mc = McSpec {
            n_outer,
            seed,
            ci_level: 0.95,
            exec: Exec::default(),
        };
        mc.validate()?;
        Ok(mc)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_ci_level(mut self, ci_level: f64) -> Self {
        self.ci_level = ci_level;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_outer(mut self, n_outer: usize) -> Self {
        self.n_outer = n_outer;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_outer < 2 {
            return Err(Error::InvalidMc(format!(
                "n_outer must be >= 2, got {}",
                self.n_outer
            )));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidMc(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }

    fn n_batches(&self) -> usize {
        self.n_outer.div_ceil(BATCH_SIZE)
    }

    fn batch_len(&self, b: usize) -> usize {
        BATCH_SIZE.min(self.n_outer - b * BATCH_SIZE)
    }
}

pub fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

fn run_batches<T, F>(mc: &McSpec, job: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let n = mc.n_batches();
    match mc.exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(job).collect()
        }
        _ => (0..n).map(job).collect(),
    }
}

/// Streams `mc.n_outer` draws of a `K`-vector statistic into [`Moments`].
pub fn accumulate<const K: usize, F>(mc: &McSpec, sample: F) -> Result<Moments<K>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<[f64; K]> + Sync + Send,
{
    mc.validate()?;
    let parts = run_batches(mc, |b| {
        let mut rng = batch_rng(mc.seed, b);
        let mut m = Moments::<K>::default();
        for _ in 0..mc.batch_len(b) {
            let x = sample(&mut rng)?;
            if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "sample".into(),
                    value: *bad,
                    context: format!("batch {b}"),
                });
            }
            m.push(&x);
        }
        Ok(m)
    });
    let mut total = Moments::<K>::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Ordered draws of a scalar statistic.
pub fn collect<F>(mc: &McSpec, sample: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync + Send,
{
    mc.validate()?;
    let parts = run_batches(mc, |b| {
        let mut rng = batch_rng(mc.seed, b);
        (0..mc.batch_len(b))
            .map(|_| sample(&mut rng))
            .collect::<Result<Vec<f64>>>()
    });
    let mut out = Vec::with_capacity(mc.n_outer);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// `σ` rescaled to `λσ`; a Poisson measure of intensity `λσ` is then
/// sampled at unit intensity on the returned space.
pub fn intensity_space(space: &PointSpace, intensity: f64) -> Result<PointSpace> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::InvalidIntensity(intensity));
    }
    if intensity == 1.0 {
        Ok(space.clone())
    } else {
        space.scaled(intensity)
    }
}

/// A configuration from `π` and its `σ`-nodes, drawn in that order from `rng`.
pub fn draw(space: &PointSpace, quad: &QuadSpec, rng: &mut ChaCha8Rng) -> Result<(Configuration, SigmaSample)> {
    let w = sample_configuration(space, 1.0, rng)?;
    let nodes = SigmaSample::draw(space, quad, rng)?;
    Ok((w, nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let mc = McSpec::new(5000, 9).unwrap();
        let f = |rng: &mut ChaCha8Rng| -> Result<[f64; 2]> {
            let u: f64 = rng.random();
            Ok([u, u * u])
        };
        let a = accumulate(&mc.with_exec(Exec::Serial), f).unwrap();
        let b = accumulate(&mc.with_exec(Exec::Parallel), f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.count(), 5000);
        let xs = collect(&mc.with_exec(Exec::Serial), |r| Ok(r.random())).unwrap();
        let ys = collect(&mc.with_exec(Exec::Parallel), |r| Ok(r.random())).unwrap();
        assert_eq!(xs, ys);
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(McSpec::new(0, 1).is_err());
        assert!(McSpec::new(1, 1).is_err());
        assert!(McSpec::new(10, 1).unwrap().with_ci_level(1.0).validate().is_err());
        assert!(intensity_space(&PointSpace::unit_interval(), -1.0).is_err());
    }

    #[test]
    fn non_finite_sample_is_an_error() {
        let mc = McSpec::new(10, 1).unwrap();
        assert!(accumulate(&mc, |_| Ok([f64::NAN])).is_err());
    }
}
