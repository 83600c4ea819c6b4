use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Entries below this value are clamped to zero before renormalizing.
pub const CLAMP_FLOOR: f64 = 1e-12;

/// Index of a latent MDP within its family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatentVar(pub usize);

impl LatentVar {
    pub fn new(index: usize, count: usize) -> Result<Self> {
        if index < count {
            Ok(Self(index))
        } else {
            Err(CoreError::LatentOutOfRange { index, count })
        }
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// A state paired with the latent variable that generates its dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperState<S> {
    pub state: S,
    pub latent: LatentVar,
}

/// A probability vector over the latent variables.
///
/// Construction clamps entries below [`CLAMP_FLOOR`] to zero and renormalizes,
/// so every stored belief sums to one up to rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    weights: Vec<f64>,
}

impl Belief {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CoreError::InvalidBelief("no latents".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(CoreError::InvalidBelief(format!(
                "entry {w} is not a nonnegative number"
            )));
        }
        Self::normalized(weights)
    }

    fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(CoreError::InvalidBelief(format!("total mass {total}")));
        }
        for w in weights.iter_mut() {
            *w /= total;
            if *w < CLAMP_FLOOR {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(Self { weights })
    }

    pub fn uniform(count: usize) -> Self {
        assert!(count > 0, "a belief needs at least one latent");
        Self {
            weights: vec![1.0 / count as f64; count],
        }
    }

    pub fn one_hot(count: usize, latent: LatentVar) -> Self {
        assert!(
            latent.0 < count,
            "latent {} out of range for {count}",
            latent.0
        );
        let mut weights = vec![0.0; count];
        weights[latent.0] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, latent: LatentVar) -> f64 {
        self.weights[latent.0]
    }

    pub fn l1_distance(&self, other: &Belief) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// L1 distance to the vertex `e_latent` of the simplex.
    pub fn distance_to_vertex(&self, latent: LatentVar) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                if i == latent.0 {
                    (1.0 - w).abs()
                } else {
                    w.abs()
                }
            })
            .sum()
    }

    /// Closest simplex vertex in L1, ties broken by the smallest index.
    pub fn nearest_vertex(&self) -> (LatentVar, f64) {
        let mut best = (LatentVar(0), self.distance_to_vertex(LatentVar(0)));
        for i in 1..self.len() {
            let d = self.distance_to_vertex(LatentVar(i));
            if d < best.1 {
                best = (LatentVar(i), d);
            }
        }
        best
    }

    /// Latents with weight above `floor`.
    pub fn support(&self, floor: f64) -> impl Iterator<Item = LatentVar> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(move |(_, w)| **w > floor)
            .map(|(i, _)| LatentVar(i))
    }

    /// Posterior from unnormalized likelihood-weighted masses.
    pub(crate) fn from_masses(masses: Vec<f64>) -> Result<Self> {
        Self::normalized(masses)
    }

    /// Sample a latent index by inverse CDF on a uniform draw in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> LatentVar {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w <= 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if u < acc {
                return LatentVar(i);
            }
        }
        LatentVar(last)
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = CoreError;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.weights
    }
}
