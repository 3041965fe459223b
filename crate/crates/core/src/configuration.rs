//! Finite point configurations and Poisson sampling.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Point, PointSpace, Region};

/// A finite set of distinct points, stored in lexicographic order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    points: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    Add,
    Remove,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration::default()
    }

    /// Builds a configuration, rejecting duplicate points.
    pub fn from_points(mut points: Vec<Point>) -> Result<Self> {
        points.sort_by(|a, b| a.total_cmp(b));
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint {
                point: w[0].to_string(),
            });
        }
        Ok(Configuration { points })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Configuration::from_points(xs.iter().map(|&x| Point::scalar(x)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// `ω(X)`
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn position(&self, x: &Point) -> std::result::Result<usize, usize> {
        self.points.binary_search_by(|p| p.total_cmp(x))
    }

    /// Exact membership: coordinates must match bit for bit.
    pub fn contains(&self, x: &Point) -> bool {
        self.position(x).is_ok()
    }

    /// `ω + δ_x` for `x ∉ ω`.
    pub fn with_point(&self, x: &Point) -> Result<Self> {
        match self.position(x) {
            Ok(_) => Err(Error::DuplicatePoint {
                point: x.to_string(),
            }),
            Err(i) => {
                let mut points = Vec::with_capacity(self.points.len() + 1);
                points.extend_from_slice(&self.points[..i]);
                points.push(x.clone());
                points.extend_from_slice(&self.points[i..]);
                Ok(Configuration { points })
            }
        }
    }

    /// `ω - δ_x` for `x ∈ ω`.
    pub fn without_point(&self, x: &Point) -> Result<Self> {
        match self.position(x) {
            Ok(i) => Ok(self.without_index(i)),
            Err(_) => Err(Error::MissingPoint {
                point: x.to_string(),
            }),
        }
    }

    /// Removes the `i`-th stored point.
    pub fn without_index(&self, i: usize) -> Self {
        let mut points = Vec::with_capacity(self.points.len().saturating_sub(1));
        points.extend_from_slice(&self.points[..i]);
        points.extend_from_slice(&self.points[i + 1..]);
        Configuration { points }
    }

    pub fn perturb(&self, x: &Point, direction: Perturbation) -> Result<Self> {
        match direction {
            Perturbation::Add => self.with_point(x),
            Perturbation::Remove => self.without_point(x),
        }
    }

    /// `ω(B)`
    pub fn count(&self, region: &Region) -> usize {
        self.points.iter().filter(|p| region.contains(p)).count()
    }

    /// Points of `ω` satisfying a predicate, e.g. the past before time `t`.
    pub fn restrict<F: Fn(&Point) -> bool>(&self, keep: F) -> Self {
        Configuration {
            points: self.points.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }

    /// Superposition of two configurations; fails on a shared point.
    pub fn union(&self, other: &Configuration) -> Result<Self> {
        let mut points = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.points.len() && j < other.points.len() {
            match self.points[i].total_cmp(&other.points[j]) {
                Ordering::Less => {
                    points.push(self.points[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    points.push(other.points[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    return Err(Error::DuplicatePoint {
                        point: self.points[i].to_string(),
                    })
                }
            }
        }
        points.extend_from_slice(&self.points[i..]);
        points.extend_from_slice(&other.points[j..]);
        Ok(Configuration { points })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let points: Vec<Point> =
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Configuration::from_points(points)
    }
}

/// Draws `ω ~ π_λ`: `N ~ Poisson(λσ(X))`, then `N` i.i.d. points of law
/// `σ/σ(X)`.
pub fn sample_configuration<R: Rng + ?Sized>(
    space: &PointSpace,
    intensity: f64,
    rng: &mut R,
) -> Result<Configuration> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(Error::InvalidIntensity(intensity));
    }
    let mean = intensity * space.total_mass();
    let n = if mean == 0.0 {
        0
    } else {
        let law = Poisson::new(mean).map_err(|_| Error::InvalidIntensity(intensity))?;
        law.sample(rng) as usize
    };
    let points = space.sample_sigma(n, rng);
    Configuration::from_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(xs: &[f64]) -> Configuration {
        Configuration::from_scalars(xs).unwrap()
    }

    #[test]
    fn perturb_examples() {
        let w = cfg(&[0.3]);
        let x = Point::scalar(0.7);
        let added = w.perturb(&x, Perturbation::Add).unwrap();
        assert_eq!(added, cfg(&[0.3, 0.7]));
        let removed = added.perturb(&x, Perturbation::Remove).unwrap();
        assert_eq!(removed, w);
        assert_eq!(w, cfg(&[0.3]), "original untouched");
    }

    #[test]
    fn perturb_preconditions() {
        let w = cfg(&[0.3, 0.7]);
        assert!(matches!(
            w.perturb(&Point::scalar(0.3), Perturbation::Add),
            Err(Error::DuplicatePoint { .. })
        ));
        assert!(matches!(
            w.perturb(&Point::scalar(0.5), Perturbation::Remove),
            Err(Error::MissingPoint { .. })
        ));
        assert!(Configuration::from_scalars(&[0.1, 0.1]).is_err());
    }

    #[test]
    fn count_examples() {
        let half = Region::interval(0.0, 0.5).unwrap();
        assert_eq!(Configuration::empty().count(&half), 0);
        assert_eq!(cfg(&[0.3, 0.7]).count(&half), 1);
    }

    #[test]
    fn zero_intensity_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = PointSpace::unit_interval();
        for _ in 0..100 {
            assert!(sample_configuration(&s, 0.0, &mut rng).unwrap().is_empty());
        }
        assert!(sample_configuration(&s, -1.0, &mut rng).is_err());
    }

    #[test]
    fn union_rejects_shared_points() {
        let a = cfg(&[0.1, 0.5]);
        assert_eq!(a.union(&cfg(&[0.3])).unwrap(), cfg(&[0.1, 0.3, 0.5]));
        assert!(a.union(&cfg(&[0.5])).is_err());
    }

    #[test]
    fn json_dump_round_trips() {
        let w = Configuration::from_points(vec![Point::new(&[0.1, 0.2]), Point::new(&[0.0, 0.9])])
            .unwrap();
        let s = w.to_json();
        assert_eq!(s, "[[0.0,0.9],[0.1,0.2]]");
        assert_eq!(Configuration::from_json(&s).unwrap(), w);
    }
}
