//! Seeds, (a, b) sampling models, Hausdorff distances and covering simulations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complexes::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::dist2;
use crate::shapes::Shape;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream seed: first eight bytes of
/// `sha256(master_le || label || index_le)`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().unwrap())
}

/// Lower bound `P(B(x, eps)) >= a * eps^b` for `x` on the shape and `eps < eps0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingModel {
    pub shape: Shape,
    pub a: f64,
    pub b: f64,
    pub eps0: f64,
}

impl SamplingModel {
    /// Uniform measure on a circle of radius R: arc length gives `a = 1/(pi R)`, `b = 1`.
    /// On the 2-sphere of radius R the cap area gives exactly `a = 1/(4 R^2)`, `b = 2`.
    pub fn uniform(shape: &Shape) -> Result<Self> {
        match shape {
            Shape::Circle { radius } => Ok(Self {
                shape: shape.clone(),
                a: 1.0 / (std::f64::consts::PI * radius),
                b: 1.0,
                eps0: 2.0 * radius,
            }),
            Shape::Sphere { dim: 3, radius } => Ok(Self {
                shape: shape.clone(),
                a: 1.0 / (4.0 * radius * radius),
                b: 2.0,
                eps0: 2.0 * radius,
            }),
            _ => Err(Error::Unsupported("no closed-form (a, b) constants for this shape".into())),
        }
    }

    /// Checks the lower bound on a grid of centers and radii; returns the worst ratio
    /// `P(B(x, eps)) / (a eps^b)`, which must be at least 1.
    pub fn spot_validate(&self, centers: usize, radii: usize) -> Result<f64> {
        let pts = self.shape.sample_uniform(centers, 17)?;
        let mut worst = f64::INFINITY;
        for p in pts.points() {
            for k in 1..=radii {
                let eps = self.eps0 * k as f64 / (radii + 1) as f64;
                let prob = self.shape.ball_probability(p, eps)?;
                worst = worst.min(prob / (self.a * eps.powf(self.b)));
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    /// Largest distance from a sample to the shape.
    pub eps: f64,
    /// Largest distance from a reference point to the nearest sample.
    pub delta: f64,
    /// Spacing of the reference points; the true covering radius is at most `delta + reference_spacing`.
    pub reference_spacing: f64,
    pub hausdorff: f64,
}

/// Dense reference points with at least `count` members, and their spacing.
pub fn reference_sample(shape: &Shape, count: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let (lo, hi) = shape.bounding_box();
    let mut h = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max).max(1e-6);
    loop {
        let pts = shape.reference_points(h)?;
        if pts.len() >= count {
            return Ok((pts, h));
        }
        h *= 0.8;
    }
}

fn nearest_sample_dist2(x: &[f64], cloud: &PointCloud) -> f64 {
    cloud.points().iter().map(|p| dist2(p, x)).fold(f64::INFINITY, f64::min)
}

pub fn hausdorff_distance(cloud: &PointCloud, shape: &Shape, reference_n: usize) -> Result<HausdorffReport> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput);
    }
    if reference_n < 1000 {
        return Err(Error::InvalidArgument("need at least 1000 reference points".into()));
    }
    let eps = cloud
        .points()
        .iter()
        .map(|p| shape.distance_to(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let (refs, h) = reference_sample(shape, reference_n)?;
    let delta = refs
        .par_iter()
        .map(|q| nearest_sample_dist2(q, cloud))
        .reduce(|| 0.0, f64::max)
        .sqrt();
    Ok(HausdorffReport { eps, delta, reference_spacing: h, hausdorff: eps.max(delta) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RadiusRule {
    Constant { r: f64 },
    /// Each point draws its radius uniformly from `[min, max]`.
    Uniform { min: f64, max: f64 },
}

impl RadiusRule {
    pub fn r_min(&self) -> f64 {
        match self {
            RadiusRule::Constant { r } => *r,
            RadiusRule::Uniform { min, .. } => *min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringTrial {
    pub trial: usize,
    pub covered: bool,
    pub r_min: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub empirical: f64,
    pub bound: f64,
    pub stderr: f64,
    pub passed: bool,
    pub reference_points: usize,
    pub reference_spacing: f64,
    pub trials: Vec<CoveringTrial>,
}

/// Smallest admissible radius `2 (log n / (a n))^(1/b)`.
pub fn min_covering_radius(model: &SamplingModel, n: usize) -> f64 {
    let n = n as f64;
    2.0 * (n.ln() / (model.a * n)).powf(1.0 / model.b)
}

/// Fraction of trials in which `n` uniform samples with the given radii cover
/// every reference point (spacing at most `r_min / 10`) of the shape.
pub fn covering_probability_sim(
    model: &SamplingModel,
    n: usize,
    rule: RadiusRule,
    trials: usize,
    seed: u64,
) -> Result<CoveringReport> {
    if n < 2 || trials == 0 {
        return Err(Error::InvalidArgument("need n >= 2 and at least one trial".into()));
    }
    let r_min = rule.r_min();
    let lower = min_covering_radius(model, n);
    if r_min < lower * (1.0 - 1e-12) || r_min > 2.0 * model.eps0 {
        return Err(Error::Precondition(format!(
            "r_min = {r_min} must lie in [{lower}, {}]",
            2.0 * model.eps0
        )));
    }
    if let RadiusRule::Uniform { min, max } = rule {
        if !(min > 0.0 && max >= min) {
            return Err(Error::InvalidArgument("need 0 < min <= max".into()));
        }
    }
    let h = r_min / 10.0;
    let refs = model.shape.reference_points(h)?;
    let rows: Vec<CoveringTrial> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(seed, "covering-sim", t as u64);
            let cloud = model.shape.sample_uniform(n, s)?;
            let mut rng = rng_from_seed(derive_seed(seed, "covering-sim-radii", t as u64));
            let radii: Vec<f64> = (0..n)
                .map(|_| match rule {
                    RadiusRule::Constant { r } => r,
                    RadiusRule::Uniform { min, max } => rng.gen_range(min..=max),
                })
                .collect();
            let covered = refs.iter().all(|q| {
                cloud.points().iter().zip(&radii).any(|(p, r)| dist2(p, q) < r * r)
            });
            Ok(CoveringTrial { trial: t, covered, r_min, n })
        })
        .collect::<Result<_>>()?;
    let hits = rows.iter().filter(|r| r.covered).count();
    let empirical = hits as f64 / trials as f64;
    let bound = 1.0 - 1.0 / (2f64.powf(model.b) * (n as f64).ln());
    let stderr = (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(CoveringReport {
        empirical,
        bound,
        stderr,
        passed: empirical >= bound - 3.0 * stderr,
        reference_points: refs.len(),
        reference_spacing: h,
        trials: rows,
    })
}

/// Covering-number bound `1 / (a eps^b)` for `2 eps`-coverings.
pub fn covering_number_bound(model: &SamplingModel, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < model.eps0) {
        return Err(Error::Precondition(format!("eps must lie in (0, {})", model.eps0)));
    }
    Ok(1.0 / (model.a * eps.powf(model.b)))
}

/// Maximal `2 eps`-separated subset of the reference points, chosen greedily.
/// It is also a `2 eps`-covering of the reference points.
pub fn greedy_net(shape: &Shape, eps: f64, spacing: f64) -> Result<Vec<Vec<f64>>> {
    let refs = shape.reference_points(spacing)?;
    let sep2 = 4.0 * eps * eps;
    let mut net: Vec<Vec<f64>> = Vec::new();
    for q in refs {
        if net.iter().all(|p| dist2(p, &q) >= sep2) {
            net.push(q);
        }
    }
    Ok(net)
}
