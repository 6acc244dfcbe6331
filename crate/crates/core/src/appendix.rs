//! Numeric checks of the projection inequalities for sets of positive reach,
//! with Monte Carlo drivers that count violations on random admissible inputs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{
    axpy, claim_a1_identity, dist, dist2, dot, min_scaled_ball, norm, pair_sum, scale, sub, ConvexCombination, Point,
};
use crate::sampling::{derive_seed, rng_from_seed};
use crate::shapes::Shape;

/// Margins below this count as violations.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCase {
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the inequality holds.
    pub margin: f64,
    /// Margin under an alternative reading of the bound, where one exists.
    pub alternate_margin: Option<f64>,
}

impl InequalityCase {
    fn upper(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, margin: rhs - lhs, alternate_margin: None }
    }
}

fn reach_of(shape: &Shape) -> Result<f64> {
    let tau = shape.reach();
    if tau > 0.0 && tau.is_finite() {
        Ok(tau)
    } else {
        Err(Error::Unsupported(format!("needs finite positive reach, got {tau}")))
    }
}

fn precondition(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what.into()))
    }
}

fn sqrt_pos(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

/// Distance from a convex combination `u` of the points to the set, against
/// `tau - sqrt((sum l_i (tau - d_i)^2 - sum_{i<j} l_i l_j |x_i - x_j|^2)_+)`.
pub fn lemma_a2_segment_bound(shape: &Shape, points: &[Point], comb: &ConvexCombination) -> Result<InequalityCase> {
    let tau = reach_of(shape)?;
    let d: Vec<f64> = points.iter().map(|p| shape.distance_to(p)).collect::<Result<_>>()?;
    precondition(d.iter().all(|v| *v < tau), "every point within the reach")?;
    let u = comb.apply(points)?;
    let du = shape.distance_to(&u)?;
    precondition(du < tau, "combination within the reach")?;
    let w = comb.weights();
    let s: f64 = w.iter().zip(&d).map(|(l, di)| l * (tau - di).powi(2)).sum::<f64>() - pair_sum(points, w);
    Ok(InequalityCase::upper(du, tau - sqrt_pos(s)))
}

/// Lower bound on `<y - p(y), p(y) - x>`. The main margin uses `d(y)` in the first
/// numerator; the alternate margin uses `d(x)`.
pub fn federer_extension_inner_product(shape: &Shape, x: &[f64], y: &[f64]) -> Result<InequalityCase> {
    let tau = reach_of(shape)?;
    shape.project(x)?;
    let py = shape.project(y)?;
    let (dx, dy) = (shape.distance_to(x)?, shape.distance_to(y)?);
    precondition(dx < tau, "d(x) below the reach")?;
    let lhs = dot(&sub(y, &py), &sub(&py, x));
    let sq = dist2(&py, x);
    let tail = dx * dy * (1.0 - dx / (2.0 * tau));
    let rhs = -sq * dy / (2.0 * tau) - tail;
    let stated = -sq * dx / (2.0 * tau) - tail;
    Ok(InequalityCase { lhs, rhs, margin: lhs - rhs, alternate_margin: Some(lhs - stated) })
}

/// `|x - p(y)|` against `sqrt(tau / (tau - d(y)) (|x - y|^2 - d(y)(d(y) - 2 d(x) + d(x)^2 / tau)))`.
pub fn lemma_a4_projection_bound(shape: &Shape, x: &[f64], y: &[f64]) -> Result<InequalityCase> {
    let tau = reach_of(shape)?;
    let py = shape.project(y)?;
    let (dx, dy) = (shape.distance_to(x)?, shape.distance_to(y)?);
    precondition(dx < tau && dy < tau, "both points within the reach")?;
    let inner = dist2(x, y) - dy * (dy - 2.0 * dx + dx * dx / tau);
    Ok(InequalityCase::upper(dist(x, &py), sqrt_pos(tau / (tau - dy) * inner)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCase {
    pub lhs: f64,
    /// The tightest bound first, then the looser ones it is claimed to sit below.
    pub bounds: Vec<f64>,
    /// `min(bounds[0] - lhs, bounds[k] - bounds[0])`.
    pub margin: f64,
}

impl ChainCase {
    fn new(lhs: f64, bounds: Vec<f64>) -> Self {
        let mut margin = bounds[0] - lhs;
        for b in &bounds[1..] {
            margin = margin.min(b - bounds[0]);
        }
        Self { lhs, bounds, margin }
    }
}

/// `|x - p(u)|` for `|x - u| <= tau - d(x)`, against three chained bounds.
pub fn lemma_a5_close_bound(shape: &Shape, x: &[f64], u: &[f64]) -> Result<ChainCase> {
    let tau = reach_of(shape)?;
    shape.project(x)?;
    let pu = shape.project(u)?;
    let dx = shape.distance_to(x)?;
    let r2 = dist2(x, u);
    precondition(dx < tau && r2.sqrt() <= tau - dx, "|x - u| <= tau - d(x)")?;
    let e = dx * (2.0 * tau - dx);
    let m = r2 + e;
    let root = sqrt_pos(tau * tau - m);
    let b1 = sqrt_pos(2.0 * tau * m / (tau + root) - e);
    let b2 = (tau * (2.0 * r2 + e) / (tau + root)).sqrt();
    let b3 = sqrt_pos((m.sqrt() + (2f64.sqrt() - 1.0) / tau * m).powi(2) - e);
    Ok(ChainCase::new(dist(x, &pu), vec![b1, b2, b3]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterCase {
    pub lhs: f64,
    /// `sqrt(sum l_i (|x_i - x|^2 + d_i (2 tau - d_i)))`
    pub bound_spread: f64,
    /// `sqrt(2 |x - u|^2 + d(x)(2 tau - d(x)))`
    pub bound_center: f64,
    /// Final refined bound and the one stated with the lemma, when the extra hypothesis holds.
    pub refined: Option<(f64, f64)>,
    pub margin: f64,
    pub alternate_margin: Option<f64>,
}

/// `|x - p(u)|` for the convex combination `u`, against the two general bounds
/// and, under the extra hypothesis, the refined one.
pub fn lemma_a6_center_bound(shape: &Shape, x: &[f64], points: &[Point], comb: &ConvexCombination) -> Result<CenterCase> {
    let tau = reach_of(shape)?;
    let dx = shape.distance_to(x)?;
    let d: Vec<f64> = points.iter().map(|p| shape.distance_to(p)).collect::<Result<_>>()?;
    precondition(dx <= tau && d.iter().all(|v| *v <= tau), "points within the reach")?;
    let admissible = points
        .iter()
        .zip(&d)
        .all(|(p, di)| dist(x, p) < ((tau - dx).powi(2) + (tau - di).powi(2)).sqrt());
    precondition(admissible, "|x - x_i| < sqrt((tau - d(x))^2 + (tau - d_i)^2)")?;
    let u = comb.apply(points)?;
    let pu = shape.project(&u)?;
    let lhs = dist(x, &pu);
    let w = comb.weights();
    let noise = |di: f64| di * (2.0 * tau - di);
    let spread: f64 = points.iter().zip(&d).zip(w).map(|((p, di), l)| l * (dist2(p, x) + noise(*di))).sum();
    let bound_spread = spread.sqrt();
    let bound_center = (2.0 * dist2(x, &u) + noise(dx)).sqrt();
    let mut margin = bound_spread.min(bound_center) - lhs;

    let to_u: f64 = points.iter().zip(&d).zip(w).map(|((p, di), l)| l * (dist2(p, &u) + noise(*di))).sum();
    let mut refined = None;
    let mut alternate_margin = None;
    if to_u <= dist2(x, &u) + noise(dx) {
        let den2 = w.iter().zip(&d).map(|(l, di)| l * (tau - di).powi(2)).sum::<f64>()
            - points.iter().zip(w).map(|(p, l)| l * dist2(p, &u)).sum::<f64>();
        if den2 > 0.0 {
            let factor = tau / den2.sqrt() - 1.0;
            let fin = sqrt_pos(spread - (tau * tau - spread) * factor);
            let gap = (tau - dx).powi(2)
                + points.iter().zip(&d).zip(w).map(|((p, di), l)| l * ((tau - di).powi(2) - dist2(p, x))).sum::<f64>();
            let stated = sqrt_pos(spread - gap * factor);
            refined = Some((fin, stated));
            margin = margin.min(fin - lhs);
            alternate_margin = Some(stated - lhs);
        }
    }
    Ok(CenterCase { lhs, bound_spread, bound_center, refined, margin, alternate_margin })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterCase {
    /// Smallest slack of `|x_i - y_sigma| < bound + covering` over the vertices.
    pub vertex_margin: f64,
    /// Slack of the two-sided bound between the nearest samples of a face and the simplex.
    pub face_margin: f64,
    /// `face_margin` with `+ covering` in place of `+ 2 covering` and the looser root form.
    pub alternate_face_margin: f64,
    /// Slack of the chain between the two displayed forms of the vertex bound.
    pub chain_margin: f64,
    pub margin: f64,
}

fn nearest_sample(cloud: &PointCloud, y: &[f64]) -> usize {
    let pts = cloud.points();
    (0..pts.len()).min_by(|&a, &b| dist2(&pts[a], y).total_cmp(&dist2(&pts[b], y))).unwrap()
}

/// Center of the smallest enclosing ball of the given vertices, with its radius.
fn enclosing(cloud: &PointCloud, simplex: &[usize]) -> Result<(Vec<f64>, f64)> {
    let pts: Vec<Point> = simplex.iter().map(|&i| cloud.points()[i].clone()).collect();
    let ball = min_scaled_ball(&pts, &vec![1.0; pts.len()], 1e-12)?;
    Ok((ball.center.into_vec(), ball.value))
}

/// Bounds on the distance from simplex vertices and from nearest samples of faces
/// to the sample nearest the projected circumcenter. `covering` must be a radius
/// at which the cloud covers the shape; `face` must be a subset of `simplex`.
pub fn claim_d3_diameter_bounds(
    shape: &Shape,
    cloud: &PointCloud,
    covering: f64,
    simplex: &[usize],
    face: &[usize],
) -> Result<DiameterCase> {
    let tau = reach_of(shape)?;
    precondition(!face.is_empty() && face.iter().all(|v| simplex.contains(v)), "face inside the simplex")?;
    let pts = cloud.points();
    let (b, r) = enclosing(cloud, simplex)?;
    let eps_s = simplex.iter().map(|&i| shape.distance_to(&pts[i])).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    precondition(r < tau - eps_s, "simplex radius below tau - eps")?;
    let pb = shape.project(&b)?;
    let y = &pts[nearest_sample(cloud, &pb)];
    if dist(y, &pb) > covering {
        return Err(Error::InvalidArgument(format!("covering radius {covering} too small")));
    }
    let e = eps_s * (2.0 * tau - eps_s);
    let m = r * r + e;
    let root = sqrt_pos(tau * tau - m);
    let vertex_bound = sqrt_pos(2.0 * tau * m / (tau + root) - e);
    let loose = sqrt_pos((m.sqrt() + (2f64.sqrt() - 1.0) / tau * m).powi(2) - e);
    let vertex_margin = simplex.iter().map(|&i| vertex_bound + covering - dist(&pts[i], y)).fold(f64::INFINITY, f64::min);

    let (bf, _) = enclosing(cloud, face)?;
    let pf = shape.project(&bf)?;
    let yf = &pts[nearest_sample(cloud, &pf)];
    let gap = dist(yf, y);
    let face_bound = (2.0 * tau * m / (tau + root)).sqrt();
    let face_margin = face_bound + 2.0 * covering - gap;
    let alternate_face_margin = m.sqrt() + (2f64.sqrt() - 1.0) / tau * m + covering - gap;
    let chain_margin = loose - vertex_bound;
    Ok(DiameterCase {
        vertex_margin,
        face_margin,
        alternate_face_margin,
        chain_margin,
        margin: vertex_margin.min(face_margin).min(chain_margin),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    A1,
    A2,
    Federer,
    A4,
    A5,
    A6,
    D3,
}

impl Lemma {
    pub const ALL: [Lemma; 7] = [Lemma::A1, Lemma::A2, Lemma::Federer, Lemma::A4, Lemma::A5, Lemma::A6, Lemma::D3];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::A1 => "a1",
            Lemma::A2 => "a2",
            Lemma::Federer => "federer",
            Lemma::A4 => "a4",
            Lemma::A5 => "a5",
            Lemma::A6 => "a6",
            Lemma::D3 => "d3",
        }
    }
}

impl std::str::FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lemma {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub lemma: Lemma,
    pub cases: usize,
    /// Sampling attempts, including those rejected by the preconditions.
    pub attempts: usize,
    pub violations: usize,
    pub worst_margin: f64,
    /// Violations under the alternative reading, for lemmas that have one.
    pub alternate_violations: Option<usize>,
}

const MAX_ATTEMPTS: usize = 200;

fn unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&g);
        if n > 1e-12 {
            return scale(&g, 1.0 / n);
        }
    }
}

fn near(base: &[f64], radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v = unit_vector(base.len(), rng);
    axpy(base, radius * rng.gen::<f64>(), &v)
}

fn random_comb(k: usize, rng: &mut ChaCha8Rng) -> ConvexCombination {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
    ConvexCombination::normalized(&raw).unwrap()
}

fn points(v: Vec<Vec<f64>>) -> Result<Vec<Point>> {
    v.into_iter().map(Point::new).collect()
}

/// One case: the main margin and the alternate one, or a precondition failure.
type Outcome = Result<(f64, Option<f64>)>;

fn one_case(lemma: Lemma, shape: &Shape, tau: f64, rng: &mut ChaCha8Rng, cover: Option<&[(PointCloud, f64)]>) -> Outcome {
    let p = shape.sample_point(rng)?;
    let spread = tau * rng.gen::<f64>();
    match lemma {
        Lemma::A1 => {
            let k = rng.gen_range(1..=5);
            let pts = points((0..k).map(|_| near(&p, 2.0 * tau, rng)).collect())?;
            let x = Point::new(near(&p, 2.0 * tau, rng))?;
            let (l, r) = claim_a1_identity(&x, &pts, &random_comb(k, rng))?;
            Ok((-(l - r).abs() / (1.0 + l), None))
        }
        Lemma::A2 => {
            let k = rng.gen_range(2..=4);
            let pts = points((0..k).map(|_| near(&p, spread, rng)).collect())?;
            let c = lemma_a2_segment_bound(shape, &pts, &random_comb(k, rng))?;
            Ok((c.margin, None))
        }
        Lemma::Federer => {
            let x = near(&p, tau, rng);
            let q = if rng.gen_bool(0.5) { p.clone() } else { shape.sample_point(rng)? };
            let y = near(&q, 1.5 * tau, rng);
            let c = federer_extension_inner_product(shape, &x, &y)?;
            Ok((c.margin, c.alternate_margin))
        }
        Lemma::A4 => {
            let x = near(&p, tau, rng);
            let y = near(&p, spread + tau * 0.05, rng);
            let c = lemma_a4_projection_bound(shape, &x, &y)?;
            Ok((c.margin, None))
        }
        Lemma::A5 => {
            let x = near(&p, tau, rng);
            let dx = shape.distance_to(&x)?;
            let u = near(&x, (tau - dx).max(0.0), rng);
            Ok((lemma_a5_close_bound(shape, &x, &u)?.margin, None))
        }
        Lemma::A6 => {
            let k = rng.gen_range(2..=4);
            let x = near(&p, spread, rng);
            let pts = points((0..k).map(|_| near(&p, spread, rng)).collect())?;
            let c = lemma_a6_center_bound(shape, &x, &pts, &random_comb(k, rng))?;
            Ok((c.margin, c.alternate_margin))
        }
        Lemma::D3 => {
            let clouds = cover.expect("clouds are prepared for this lemma");
            let (cloud, covering) = &clouds[rng.gen_range(0..clouds.len())];
            let n = cloud.len();
            let v = rng.gen_range(0..n);
            let mut by_dist: Vec<usize> = (0..n).filter(|&j| j != v).collect();
            by_dist.sort_by(|&a, &b| dist2(&cloud.points()[a], &cloud.points()[v]).total_cmp(&dist2(&cloud.points()[b], &cloud.points()[v])));
            let k = rng.gen_range(2..=4);
            let mut simplex = vec![v];
            while simplex.len() < k {
                let c = by_dist[rng.gen_range(0..12.min(by_dist.len()))];
                if !simplex.contains(&c) {
                    simplex.push(c);
                }
            }
            let f = rng.gen_range(1..=k);
            let face: Vec<usize> = simplex[..f].to_vec();
            let c = claim_d3_diameter_bounds(shape, cloud, *covering, &simplex, &face)?;
            Ok((c.margin, Some(c.alternate_face_margin)))
        }
    }
}

/// Noisy clouds on the shape with a certified covering radius each.
fn d3_clouds(shape: &Shape, seed: u64) -> Result<Vec<(PointCloud, f64)>> {
    let tau = reach_of(shape)?;
    let n = if shape.intrinsic_dim() <= 1 { 120 } else { 500 };
    let h = if shape.intrinsic_dim() <= 1 { 1e-3 * tau } else { 0.02 * tau };
    let refs = shape.reference_points(h)?;
    (0..6)
        .map(|c| {
            let eps = 0.02 * tau * (c % 3) as f64;
            let cloud = shape.sample_with_noise(n, eps, derive_seed(seed, "d3-cloud", c))?;
            let worst = refs
                .par_iter()
                .map(|q| cloud.points().iter().map(|p| dist2(p, q)).fold(f64::INFINITY, f64::min))
                .reduce(|| 0.0, f64::max)
                .sqrt();
            Ok((cloud, worst + h))
        })
        .collect()
}

/// Random admissible cases for `lemma` on `shape`, each with its own derived seed.
pub fn run_monte_carlo(lemma: Lemma, shape: &Shape, cases: usize, seed: u64) -> Result<MonteCarloReport> {
    let tau = reach_of(shape)?;
    let clouds = if lemma == Lemma::D3 { Some(d3_clouds(shape, seed)?) } else { None };
    let results: Vec<(usize, Option<(f64, Option<f64>)>)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, lemma.name(), i as u64));
            for attempt in 1..=MAX_ATTEMPTS {
                match one_case(lemma, shape, tau, &mut rng, clouds.as_deref()) {
                    Ok(m) => return Ok((attempt, Some(m))),
                    Err(Error::Precondition(_) | Error::NonUniqueProjection) => continue,
                    Err(e) => return Err(e),
                }
            }
            Ok((MAX_ATTEMPTS, None))
        })
        .collect::<Result<_>>()?;
    let attempts = results.iter().map(|r| r.0).sum();
    let accepted: Vec<(f64, Option<f64>)> = results.into_iter().filter_map(|r| r.1).collect();
    let violations = accepted.iter().filter(|m| m.0 < -VIOLATION_TOL).count();
    let worst_margin = accepted.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let alternate_violations = accepted
        .iter()
        .any(|m| m.1.is_some())
        .then(|| accepted.iter().filter(|m| m.1.is_some_and(|a| a < -VIOLATION_TOL)).count());
    Ok(MonteCarloReport { lemma, cases: accepted.len(), attempts, violations, worst_margin, alternate_violations })
}
