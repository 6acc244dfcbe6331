//! End-to-end runs: sample a shape, check the hypotheses, build a complex and
//! compare its Betti numbers with the target's. Also the two worked scenarios
//! where the ambient union and the restricted nerve go wrong, and grid offsets.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::complexes::{build_cech_ambient, build_cech_restricted, build_rips, PointCloud, RestrictedMethod};
use crate::conditions::{check_cech_theorem, check_rips_theorem, nerve_radius_bound, ConditionReport, Inequality, ReconstructionInput};
use crate::error::{Error, Result};
use crate::geometry::{dist, dist2, Point};
use crate::homology::{betti_grid_2d, betti_simplicial, BettiVector};
use crate::sampling::{hausdorff_distance, HausdorffReport};
use crate::shapes::{critical_mu, double_offset_field, estimate_mu_reach, offset_field, GridField, Shape};

/// Betti numbers over GF(2) are compared in place of homotopy equivalence.
pub const PROXY_NOTE: &str = "homotopy equivalence is checked through GF(2) Betti numbers";

const REFERENCE_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexChoice {
    Rips,
    Cech,
    RestrictedCech,
}

impl std::str::FromStr for ComplexChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rips" => Ok(Self::Rips),
            "cech" => Ok(Self::Cech),
            "restricted-cech" => Ok(Self::RestrictedCech),
            _ => Err(Error::InvalidArgument(format!("unknown complex {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radii {
    Constant(f64),
    PerPoint(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructConfig {
    pub shape: Shape,
    pub n: usize,
    /// Noise amplitude along the normal.
    pub eps: f64,
    pub radii: Radii,
    pub complex: ComplexChoice,
    pub max_dim: usize,
    pub seed: u64,
}

impl ReconstructConfig {
    pub fn new(shape: Shape, n: usize, eps: f64, r: f64, complex: ComplexChoice, seed: u64) -> Self {
        let max_dim = shape.intrinsic_dim() + 1;
        Self { shape, n, eps, radii: Radii::Constant(r), complex, max_dim, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub config: ReconstructConfig,
    pub seed: u64,
    pub input_hash: String,
    pub samples: Vec<Vec<f64>>,
    pub sampling: HausdorffReport,
    pub conditions: Option<ConditionReport>,
    /// Why the hypotheses could not be evaluated, if they could not.
    pub condition_error: Option<String>,
    pub simplex_counts: Vec<usize>,
    pub indeterminate: usize,
    pub betti_computed: BettiVector,
    pub betti_expected: Option<BettiVector>,
    #[serde(rename = "match")]
    pub matches: bool,
    pub note: String,
}

/// Hex SHA-256 of `blob <len>\0<bytes>`, the way git names objects.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn hash_of<T: Serialize>(value: &T) -> Result<String> {
    let json = serde_json::to_vec(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(content_hash(&json))
}

fn restricted_conditions(shape: &Shape, cloud: &PointCloud, delta: f64) -> Result<ConditionReport> {
    let tau = shape.reach();
    let r = cloud.radii()?;
    let mut worst = f64::NEG_INFINITY;
    for (p, ri) in cloud.points().iter().zip(r) {
        worst = worst.max(ri - nerve_radius_bound(tau, shape.distance_to(p)?)?);
    }
    let r_min = r.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConditionReport::new(
        "restricted-cech",
        vec![Inequality::new("radius", worst, 0.0), Inequality::new("covering", delta, r_min)],
    ))
}

fn conditions_for(config: &ReconstructConfig, cloud: &PointCloud, hd: &HausdorffReport) -> Result<ConditionReport> {
    let delta = hd.delta + hd.reference_spacing;
    if config.complex == ComplexChoice::RestrictedCech {
        return restricted_conditions(&config.shape, cloud, delta);
    }
    let r = cloud.radii()?;
    let input = ReconstructionInput {
        tau: config.shape.reach(),
        dim: config.shape.ambient_dim(),
        eps: hd.eps,
        delta,
        r_min: r.iter().copied().fold(f64::INFINITY, f64::min),
        r_max: r.iter().copied().fold(0.0, f64::max),
    };
    match config.complex {
        ComplexChoice::Rips => check_rips_theorem(&input),
        _ => check_cech_theorem(&input),
    }
}

/// Samples the shape, builds the chosen complex and compares Betti numbers.
/// Failed hypotheses are reported and do not stop the run.
pub fn reconstruct(config: &ReconstructConfig) -> Result<ReconstructReport> {
    if config.max_dim == 0 {
        return Err(Error::InvalidArgument("max_dim must be at least 1".into()));
    }
    let cloud = config.shape.sample_with_noise(config.n, config.eps, config.seed)?;
    let cloud = match &config.radii {
        Radii::Constant(r) => cloud.with_constant_radius(*r)?,
        Radii::PerPoint(r) => cloud.with_radii(r.clone())?,
    };
    let sampling = hausdorff_distance(&cloud, &config.shape, REFERENCE_POINTS)?;
    let (conditions, condition_error) = match conditions_for(config, &cloud, &sampling) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let complex = match config.complex {
        ComplexChoice::Rips => build_rips(&cloud, config.max_dim)?,
        ComplexChoice::Cech => build_cech_ambient(&cloud, config.max_dim)?,
        ComplexChoice::RestrictedCech => build_cech_restricted(&cloud, &config.shape, config.max_dim, RestrictedMethod::Auto)?,
    };
    let up_to = config.shape.intrinsic_dim().min(config.max_dim - 1);
    let betti_computed = betti_simplicial(&complex, up_to)?;
    let betti_expected = config.shape.expected_betti().map(BettiVector);
    let matches = betti_expected.as_ref().is_some_and(|e| betti_computed.matches(&e.0));
    Ok(ReconstructReport {
        config: config.clone(),
        seed: config.seed,
        input_hash: hash_of(config)?,
        samples: cloud.points().iter().map(|p| p.coords().to_vec()).collect(),
        sampling,
        conditions,
        condition_error,
        simplex_counts: complex.counts(),
        indeterminate: complex.indeterminate,
        betti_computed,
        betti_expected,
        matches,
        note: PROXY_NOTE.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub eps: f64,
    /// Distance between the two wide balls.
    pub chord: f64,
    /// Distance from the intersection of the two wide balls to the semicircle.
    pub lens_gap: f64,
    /// Radius of the dense balls, half of `lens_gap`.
    pub rho: f64,
    pub cloud: PointCloud,
    pub betti_union: BettiVector,
    pub betti_target: BettiVector,
    #[serde(rename = "match")]
    pub matches: bool,
    pub note: String,
}

/// Two balls of radius `eps` centered on the unit semicircle whose intersection
/// misses it, plus dense small balls covering it. The ambient Cech complex then
/// has a loop that the semicircle does not.
pub fn semicircle_counterexample(eps: f64) -> Result<CounterexampleReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    let shape = Shape::semicircle(1.0)?;
    let chord = 0.5 * (eps * (4.0 - eps * eps).sqrt() + 2.0 * eps);
    let half = (0.5 * chord).asin();
    let x1 = vec![half.sin(), half.cos()];
    let x2 = vec![-half.sin(), half.cos()];

    // the lens is convex, so its nearest point to the arc lies on its boundary
    let steps = 20_000;
    let mut lens_gap = f64::INFINITY;
    for (c, other) in [(&x1, &x2), (&x2, &x1)] {
        for k in 0..steps {
            let t = 2.0 * PI * k as f64 / steps as f64;
            let p = [c[0] + eps * t.cos(), c[1] + eps * t.sin()];
            if dist2(&p, other) <= eps * eps {
                lens_gap = lens_gap.min(shape.distance_to(&p)?);
            }
        }
    }
    if !(lens_gap > 0.0 && lens_gap.is_finite()) {
        return Err(Error::Precondition("the two balls must meet away from the semicircle".into()));
    }
    let rho = 0.5 * lens_gap;
    let m = (PI / rho).ceil() as usize;
    let mut pts = vec![Point::new(x1)?, Point::new(x2)?];
    let mut radii = vec![eps, eps];
    for k in 0..=m {
        let t = PI * k as f64 / m as f64;
        pts.push(Point::new(vec![t.cos(), t.sin()])?);
        radii.push(rho);
    }
    let cloud = PointCloud::new(pts, Some(radii))?;
    let betti_union = betti_simplicial(&build_cech_ambient(&cloud, 2)?, 1)?;
    let betti_target = BettiVector(shape.expected_betti().unwrap_or_default());
    let matches = betti_union.matches(&betti_target.0);
    Ok(CounterexampleReport {
        eps,
        chord,
        lens_gap,
        rho,
        cloud,
        betti_union,
        betti_target,
        matches,
        note: PROXY_NOTE.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedNerveReport {
    pub eps: f64,
    pub r: f64,
    /// Largest radius for which restricted balls around the samples are contractible.
    pub radius_bound: f64,
    pub cloud: PointCloud,
    pub betti: BettiVector,
    /// Whether the restricted balls cover the circle.
    pub covers: bool,
    pub note: String,
}

/// Every reference point of the shape lies in some restricted ball, with room
/// for the reference spacing.
pub fn restricted_balls_cover(shape: &Shape, cloud: &PointCloud, spacing: f64) -> Result<bool> {
    let refs = shape.reference_points(spacing)?;
    let r = cloud.radii()?;
    Ok(refs.iter().all(|q| cloud.points().iter().zip(r).any(|(p, ri)| dist(p, q) < ri - spacing)))
}

fn restricted_nerve(points: Vec<Vec<f64>>, eps: f64, r: f64) -> Result<RestrictedNerveReport> {
    let shape = Shape::circle(1.0)?;
    let pts = points.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
    let cloud = PointCloud::new(pts, None)?.with_constant_radius(r)?;
    let complex = build_cech_restricted(&cloud, &shape, 2, RestrictedMethod::Auto)?;
    if complex.indeterminate > 0 {
        return Err(Error::Unsupported("restricted intersection could not be certified".into()));
    }
    Ok(RestrictedNerveReport {
        eps,
        r,
        radius_bound: nerve_radius_bound(1.0, eps)?,
        betti: betti_simplicial(&complex, 1)?,
        covers: restricted_balls_cover(&shape, &cloud, 1e-3)?,
        cloud,
        note: PROXY_NOTE.into(),
    })
}

/// Two samples at `(1 - eps, 0)` and `(-1 + eps, 0)` with restricted balls of
/// radius `r` on the unit circle.
pub fn two_point_tightness(eps: f64, r: f64) -> Result<RestrictedNerveReport> {
    if !((0.0..1.0).contains(&eps) && r > eps) {
        return Err(Error::InvalidArgument(format!("need 0 <= eps < 1 and r > eps, got eps={eps} r={r}")));
    }
    restricted_nerve(vec![vec![1.0 - eps, 0.0], vec![-1.0 + eps, 0.0]], eps, r)
}

/// `n` evenly spaced samples at distance `eps` inside the unit circle.
pub fn ring_below_bound(eps: f64, n: usize, r: f64) -> Result<RestrictedNerveReport> {
    if !((0.0..1.0).contains(&eps) && r > eps && n >= 3) {
        return Err(Error::InvalidArgument("need 0 <= eps < 1, r > eps and n >= 3".into()));
    }
    let pts = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            vec![(1.0 - eps) * t.cos(), (1.0 - eps) * t.sin()]
        })
        .collect();
    restricted_nerve(pts, eps, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondRadius {
    /// Plain offset only.
    None,
    Fixed(f64),
    /// `s = mu * r` with the largest `mu` whose estimated mu-reach is at least `r`.
    AutoMu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetReport {
    pub shape: Shape,
    pub r: f64,
    pub s: Option<f64>,
    pub mu_hat: Option<f64>,
    /// Grid estimate of the mu-reach at `mu = 0.5`, when `s` was chosen automatically.
    pub half_mu_reach: Option<f64>,
    pub resolution: usize,
    pub spacing: f64,
    pub betti: BettiVector,
    pub betti_expected: Option<BettiVector>,
    #[serde(rename = "match")]
    pub matches: bool,
    pub note: String,
}

const MU_RESOLUTION: usize = 201;

/// Cubical Betti numbers of the offset, or of the double offset when a second
/// radius is given, for planar shapes.
pub fn offset_betti(shape: &Shape, r: f64, second: SecondRadius, resolution: usize) -> Result<OffsetReport> {
    if shape.ambient_dim() != 2 {
        return Err(Error::Unsupported("cubical Betti numbers are planar only".into()));
    }
    let (mut s, mut mu_hat, mut half_mu_reach) = (None, None, None);
    match second {
        SecondRadius::None => {}
        SecondRadius::Fixed(v) => s = Some(v),
        SecondRadius::AutoMu => {
            let est = estimate_mu_reach(shape, 0.5, MU_RESOLUTION)?;
            if est.value < r {
                return Err(Error::Precondition(format!("mu-reach at 0.5 is {} < r = {r}", est.value)));
            }
            let mu = critical_mu(shape, r, MU_RESOLUTION)?;
            half_mu_reach = Some(est.value);
            mu_hat = Some(mu);
            s = Some(mu * r);
        }
    }
    let field: GridField = match s {
        Some(s) => double_offset_field(shape, r, s, resolution)?,
        None => offset_field(shape, r, resolution)?,
    };
    let mask: Vec<bool> = field.values().iter().map(|v| *v > 0.5).collect();
    let betti = betti_grid_2d(&mask, [field.dims()[0], field.dims()[1]])?;
    let betti_expected = shape.expected_betti().map(BettiVector);
    let matches = betti_expected.as_ref().is_some_and(|e| betti.matches(&e.0));
    Ok(OffsetReport {
        shape: shape.clone(),
        r,
        s,
        mu_hat,
        half_mu_reach,
        resolution,
        spacing: field.spacing(),
        betti,
        betti_expected,
        matches,
        note: PROXY_NOTE.into(),
    })
}
