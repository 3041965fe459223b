//! The base space `X`: an axis-aligned box carrying a uniform finite measure
//! `σ`, together with the σ-node sets used for every integral against `σ`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::estimate::Estimate;

/// A point of `X`. Points are compared by exact coordinate equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub SmallVec<[f64; 2]>);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Point(SmallVec::from_slice(coords))
    }

    pub fn scalar(x: f64) -> Self {
        Point(smallvec::smallvec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Lexicographic total order on coordinates.
    pub fn total_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Axis-aligned closed sub-box `[lower, upper]` of `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite()) || l > u)
        {
            return Err(Error::RegionOutside {
                region: format!("{lower:?}..{upper:?}"),
            });
        }
        Ok(Region { lower, upper })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Region::new(vec![lo], vec![hi])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.0.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(c, (l, u))| *l <= *c && *c <= *u)
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }

    /// True when the two boxes share no set of positive volume.
    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .zip(other.lower.iter().zip(&other.upper))
            .any(|((l1, u1), (l2, u2))| u1 <= l2 || u2 <= l1)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{l},{u}]")?;
        }
        Ok(())
    }
}

/// `X = [0,L_1] x ... x [0,L_d]` with `σ` of constant density
/// `total_mass / volume`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpace {
    sides: Vec<f64>,
    total_mass: f64,
}

impl PointSpace {
    pub fn new_box(dimension: usize, sides: &[f64], total_mass: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSpace("dimension must be >= 1".into()));
        }
        if sides.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: sides.len(),
            });
        }
        if sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidSpace(format!(
                "side lengths must be finite and > 0, got {sides:?}"
            )));
        }
        if !(total_mass.is_finite() && total_mass > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "total mass must be finite and > 0, got {total_mass}"
            )));
        }
        Ok(PointSpace {
            sides: sides.to_vec(),
            total_mass,
        })
    }

    /// `[0,1]` with Lebesgue measure.
    pub fn unit_interval() -> Self {
        PointSpace {
            sides: vec![1.0],
            total_mass: 1.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    pub fn density(&self) -> f64 {
        self.total_mass / self.volume()
    }

    /// Same box with `σ` replaced by `factor · σ`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        PointSpace::new_box(self.dimension(), &self.sides, self.total_mass * factor)
    }

    pub fn full_region(&self) -> Region {
        Region {
            lower: vec![0.0; self.dimension()],
            upper: self.sides.clone(),
        }
    }

    pub fn contains_region(&self, region: &Region) -> bool {
        region.dimension() == self.dimension()
            && region
                .lower
                .iter()
                .zip(&region.upper)
                .zip(&self.sides)
                .all(|((l, u), s)| *l >= 0.0 && *u <= *s)
    }

    pub fn check_region(&self, region: &Region) -> Result<()> {
        if region.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: region.dimension(),
            });
        }
        if !self.contains_region(region) {
            return Err(Error::RegionOutside {
                region: region.to_string(),
            });
        }
        Ok(())
    }

    /// `σ(region)`, exact.
    pub fn sigma_measure(&self, region: &Region) -> Result<f64> {
        self.check_region(region)?;
        Ok(self.density() * region.volume())
    }

    /// `σ(region) / σ(X)`.
    pub fn region_fraction(&self, region: &Region) -> Result<f64> {
        Ok(self.sigma_measure(region)? / self.total_mass)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point(self.sides.iter().map(|s| rng.random::<f64>() * s).collect())
    }

    /// `n` i.i.d. points with law `σ / σ(X)`.
    pub fn sample_sigma<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        (0..n).map(|_| self.sample_point(rng)).collect()
    }

    /// Estimate of `∫ f dσ` as `σ(X)` times the node mean of `f`.
    pub fn integrate_sigma<F>(&self, f: F, quad: &QuadSpec) -> Result<Estimate>
    where
        F: Fn(&Point) -> f64,
    {
        let nodes = SigmaSample::from_spec(self, quad)?;
        let n = nodes.len();
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, x) in nodes.points().iter().enumerate() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "integrand".into(),
                    value: v,
                    context: x.to_string(),
                });
            }
            let delta = v - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (v - mean);
        }
        let stderr = if n > 1 && quad.mode == QuadMode::MonteCarlo {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Estimate::new(
            self.total_mass * mean,
            self.total_mass * stderr,
            n,
            0.95,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadMode {
    /// i.i.d. `σ`-samples; valid in every dimension.
    #[default]
    MonteCarlo,
    /// Deterministic midpoint rule, only for `d = 1`.
    Midpoint,
}

/// How integrals against `σ` are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub n_sigma_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: QuadMode,
}

impl QuadSpec {
    pub fn new(n_sigma_samples: usize, seed: u64) -> Result<Self> {
        let q = QuadSpec {
            n_sigma_samples,
            seed,
            mode: QuadMode::MonteCarlo,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn midpoint(n_sigma_samples: usize) -> Result<Self> {
        let q = QuadSpec {
            n_sigma_samples,
            seed: 0,
            mode: QuadMode::Midpoint,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sigma_samples == 0 {
            return Err(Error::InvalidQuadrature("n_sigma_samples must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            n_sigma_samples: 16,
            seed: 0,
            mode: QuadMode::MonteCarlo,
        }
    }
}

/// One realized set of `σ`-nodes with equal weights summing to `σ(X)`.
///
/// Every `σ`-side integral evaluated at a given configuration goes through a
/// single `SigmaSample`, so paired quantities share their quadrature noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSample {
    points: Vec<Point>,
    weight: f64,
    total_mass: f64,
}

impl SigmaSample {
    pub fn draw<R: Rng + ?Sized>(space: &PointSpace, quad: &QuadSpec, rng: &mut R) -> Result<Self> {
        quad.validate()?;
        let n = quad.n_sigma_samples;
        let points = match quad.mode {
            QuadMode::MonteCarlo => space.sample_sigma(n, rng),
            QuadMode::Midpoint => {
                if space.dimension() != 1 {
                    return Err(Error::InvalidQuadrature(
                        "midpoint quadrature is only available for d = 1".into(),
                    ));
                }
                let side = space.sides()[0];
                (0..n)
                    .map(|i| Point::scalar((i as f64 + 0.5) / n as f64 * side))
                    .collect()
            }
        };
        Ok(SigmaSample {
            points,
            weight: space.total_mass() / n as f64,
            total_mass: space.total_mass(),
        })
    }

    /// Nodes seeded from the spec's own seed.
    pub fn from_spec(space: &PointSpace, quad: &QuadSpec) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(quad.seed);
        SigmaSample::draw(space, quad, &mut rng)
    }

    /// Explicit nodes, each carrying weight `total_mass / points.len()`.
    pub fn from_points(points: Vec<Point>, total_mass: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidQuadrature("need at least one node".into()));
        }
        let weight = total_mass / points.len() as f64;
        Ok(SigmaSample {
            points,
            weight,
            total_mass,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `σ(X)` of the space the nodes were drawn from.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_construction() {
        let s = PointSpace::new_box(1, &[1.0], 1.0).unwrap();
        assert_eq!(s.density(), 1.0);
        let s = PointSpace::new_box(2, &[1.0, 1.0], 0.25).unwrap();
        assert_eq!(s.total_mass(), 0.25);
        let s = PointSpace::new_box(1, &[2.0], 1.0).unwrap();
        assert_eq!(s.density(), 0.5);
    }

    #[test]
    fn box_construction_errors() {
        assert!(PointSpace::new_box(0, &[], 1.0).is_err());
        assert!(PointSpace::new_box(1, &[0.0], 1.0).is_err());
        assert!(PointSpace::new_box(1, &[1.0], 0.0).is_err());
        assert!(PointSpace::new_box(1, &[1.0], -1.0).is_err());
        assert!(PointSpace::new_box(1, &[1.0], f64::INFINITY).is_err());
        assert!(PointSpace::new_box(2, &[1.0], 1.0).is_err());
    }

    #[test]
    fn sigma_measure_examples() {
        let unit = PointSpace::unit_interval();
        assert_eq!(unit.sigma_measure(&Region::interval(0.0, 1.0).unwrap()).unwrap(), 1.0);
        assert_eq!(unit.sigma_measure(&Region::interval(0.0, 0.5).unwrap()).unwrap(), 0.5);
        let wide = PointSpace::new_box(1, &[2.0], 1.0).unwrap();
        assert_eq!(wide.sigma_measure(&Region::interval(0.0, 0.5).unwrap()).unwrap(), 0.25);
        assert!(unit.sigma_measure(&Region::interval(0.5, 1.5).unwrap()).is_err());
    }

    #[test]
    fn sample_sigma_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(PointSpace::unit_interval().sample_sigma(0, &mut rng).is_empty());
    }

    #[test]
    fn integrate_constant_is_exact() {
        let q = QuadSpec::new(64, 3).unwrap();
        let e = PointSpace::unit_interval().integrate_sigma(|_| 1.0, &q).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn integrate_reports_non_finite() {
        let q = QuadSpec::new(8, 3).unwrap();
        let err = PointSpace::unit_interval()
            .integrate_sigma(|_| f64::NAN, &q)
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn midpoint_only_in_one_dimension() {
        let sq = PointSpace::new_box(2, &[1.0, 1.0], 1.0).unwrap();
        let q = QuadSpec::midpoint(10).unwrap();
        assert!(SigmaSample::from_spec(&sq, &q).is_err());
        let e = PointSpace::unit_interval()
            .integrate_sigma(|x| x.coords()[0], &q)
            .unwrap();
        assert!((e.mean - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(QuadSpec::new(0, 1).is_err());
    }
}
