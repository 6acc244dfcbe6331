//! Target spaces with exact distance and projection oracles.

mod grid;
mod mu_reach;

pub use grid::{double_offset_field, offset_field, GridField};
pub use mu_reach::{critical_mu, estimate_mu_reach, gradient, GradientEstimate, MuReachEstimate};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::complexes::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{axpy, dist, dist2, dot, norm, scale, sub, Point};
use crate::sampling::rng_from_seed;

/// Points closer than this to each other are treated as one nearest point.
const SAME_POINT: f64 = 1e-9;
/// Relative slack for deciding that two candidate distances tie.
const PROJECTION_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Round sphere of the given radius centered at the origin of R^dim.
    Sphere { dim: usize, radius: f64 },
    Circle { radius: f64 },
    /// Upper half of the circle, endpoints included.
    Semicircle { radius: f64 },
    Segment { a: Vec<f64>, b: Vec<f64> },
    /// Boundary of the axis-aligned square centered at the origin.
    SquareBoundary { side: f64 },
    /// Unit segments from the origin to (1, 0) and to (cos angle, sin angle).
    TwoSegments { angle: f64 },
    /// Zero level set of a sampled unsigned distance field.
    Grid { field: GridField },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

impl Shape {
    pub fn circle(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Shape::Circle { radius })
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        if dim < 2 {
            return Err(Error::InvalidArgument("sphere needs ambient dimension >= 2".into()));
        }
        Ok(Shape::Sphere { dim, radius })
    }

    pub fn semicircle(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Shape::Semicircle { radius })
    }

    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        if dist(&a, &b) == 0.0 {
            return Err(Error::InvalidArgument("segment endpoints coincide".into()));
        }
        Ok(Shape::Segment { a, b })
    }

    pub fn square_boundary(side: f64) -> Result<Self> {
        positive("side", side)?;
        Ok(Shape::SquareBoundary { side })
    }

    pub fn two_segments(angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle <= PI) {
            return Err(Error::InvalidArgument(format!("angle must lie in (0, pi], got {angle}")));
        }
        Ok(Shape::TwoSegments { angle })
    }

    pub fn from_grid(field: GridField) -> Result<Self> {
        if field.dims().len() != 2 {
            return Err(Error::Unsupported("grid shapes must be two-dimensional".into()));
        }
        Ok(Shape::Grid { field })
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Shape::Sphere { dim, .. } => *dim,
            Shape::Segment { a, .. } => a.len(),
            Shape::Grid { field } => field.dims().len(),
            _ => 2,
        }
    }

    /// Dimension of the space as a manifold (or 1 for the graph-like curves).
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Shape::Sphere { dim, .. } => dim - 1,
            Shape::Grid { .. } => 1,
            _ => 1,
        }
    }

    /// Known GF(2) Betti numbers up to the intrinsic dimension.
    pub fn expected_betti(&self) -> Option<Vec<usize>> {
        match self {
            Shape::Sphere { dim, .. } => {
                let mut b = vec![0; *dim];
                b[0] = 1;
                b[dim - 1] += 1;
                Some(b)
            }
            Shape::Circle { .. } | Shape::SquareBoundary { .. } => Some(vec![1, 1]),
            Shape::Semicircle { .. } | Shape::Segment { .. } | Shape::TwoSegments { .. } => Some(vec![1, 0]),
            Shape::Grid { .. } => None,
        }
    }

    /// Reach of the shape; zero for shapes with corners, and for grids where it is unknown.
    pub fn reach(&self) -> f64 {
        match self {
            Shape::Sphere { radius, .. } | Shape::Circle { radius } | Shape::Semicircle { radius } => *radius,
            Shape::Segment { .. } => f64::INFINITY,
            Shape::TwoSegments { angle } if *angle == PI => f64::INFINITY,
            Shape::SquareBoundary { .. } | Shape::TwoSegments { .. } | Shape::Grid { .. } => 0.0,
        }
    }

    /// Closed-form mu-reach where it is known.
    pub fn known_mu_reach(&self, mu: f64) -> Option<f64> {
        if !(mu > 0.0 && mu <= 1.0) {
            return None;
        }
        match self {
            Shape::Sphere { radius, .. } | Shape::Circle { radius } | Shape::Semicircle { radius } => Some(*radius),
            Shape::Segment { .. } => Some(f64::INFINITY),
            Shape::SquareBoundary { side } => Some(if mu <= 0.5f64.sqrt() { side / 2.0 } else { 0.0 }),
            Shape::TwoSegments { angle } => Some(if mu <= (angle / 2.0).sin() { f64::INFINITY } else { 0.0 }),
            Shape::Grid { .. } => None,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Shape::Sphere { dim, radius } => (vec![-radius; *dim], vec![*radius; *dim]),
            Shape::Circle { radius } => (vec![-radius; 2], vec![*radius; 2]),
            Shape::Semicircle { radius } => (vec![-radius, 0.0], vec![*radius, *radius]),
            Shape::Segment { a, b } => (
                a.iter().zip(b).map(|(x, y)| x.min(*y)).collect(),
                a.iter().zip(b).map(|(x, y)| x.max(*y)).collect(),
            ),
            Shape::SquareBoundary { side } => (vec![-side / 2.0; 2], vec![side / 2.0; 2]),
            Shape::TwoSegments { angle } => {
                let (c, s) = (angle.cos(), angle.sin());
                (vec![c.min(0.0), 0.0], vec![1.0, s])
            }
            Shape::Grid { field } => field.extent(),
        }
    }

    fn segments(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        match self {
            Shape::Segment { a, b } => vec![(a.clone(), b.clone())],
            Shape::SquareBoundary { side } => {
                let h = side / 2.0;
                let c = [[-h, -h], [h, -h], [h, h], [-h, h]];
                (0..4).map(|i| (c[i].to_vec(), c[(i + 1) % 4].to_vec())).collect()
            }
            Shape::TwoSegments { angle } => vec![
                (vec![0.0, 0.0], vec![1.0, 0.0]),
                (vec![0.0, 0.0], vec![angle.cos(), angle.sin()]),
            ],
            _ => Vec::new(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn distance_to(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            Shape::Sphere { radius, .. } | Shape::Circle { radius } => (norm(x) - radius).abs(),
            Shape::Semicircle { radius } => {
                let r = *radius;
                let ends = dist(x, &[r, 0.0]).min(dist(x, &[-r, 0.0]));
                if x[1] >= 0.0 {
                    (norm(x) - r).abs().min(ends)
                } else {
                    ends
                }
            }
            Shape::Grid { field } => field.interpolate(x)?.max(0.0),
            _ => self
                .segments()
                .iter()
                .map(|(a, b)| dist(x, &closest_on_segment(x, a, b)))
                .fold(f64::INFINITY, f64::min),
        })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance_to(x)? <= tol)
    }

    /// Nearest points of the shape to `x` within `tol` of the minimal distance,
    /// deduplicated. Whole-circle or whole-sphere ties are represented by a
    /// symmetric finite subset with the same smallest enclosing ball.
    pub fn nearest_set(&self, x: &[f64], tol: f64) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        let mut cands: Vec<Vec<f64>> = Vec::new();
        match self {
            Shape::Sphere { dim, radius } => {
                let n = norm(x);
                if n <= tol / 2.0 {
                    for k in 0..*dim {
                        for s in [-1.0, 1.0] {
                            let mut e = vec![0.0; *dim];
                            e[k] = s * radius;
                            cands.push(e);
                        }
                    }
                } else {
                    cands.push(scale(x, radius / n));
                }
            }
            Shape::Circle { radius } => {
                let n = norm(x);
                if n <= tol / 2.0 {
                    cands.extend(arc_points(*radius, 0.0, 2.0 * PI, 64, false));
                } else {
                    cands.push(scale(x, radius / n));
                }
            }
            Shape::Semicircle { radius } => {
                let r = *radius;
                let n = norm(x);
                cands.push(vec![r, 0.0]);
                cands.push(vec![-r, 0.0]);
                if n <= tol / 2.0 {
                    cands.extend(arc_points(r, 0.0, PI, 64, true));
                } else if x[1] >= 0.0 {
                    cands.push(scale(x, r / n));
                }
            }
            Shape::Grid { .. } => {
                return Err(Error::Unsupported("nearest points of a grid shape".into()));
            }
            _ => {
                for (a, b) in self.segments() {
                    cands.push(closest_on_segment(x, &a, &b));
                }
            }
        }
        let dmin = cands.iter().map(|c| dist(c, x)).fold(f64::INFINITY, f64::min);
        let mut out: Vec<Vec<f64>> = Vec::new();
        for c in cands {
            if dist(&c, x) <= dmin + tol && !out.iter().any(|o| dist(o, &c) <= SAME_POINT) {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Unique nearest point of the shape, or an error on the medial axis.
    pub fn project(&self, x: &[f64]) -> Result<Point> {
        let d = self.distance_to(x)?;
        let set = self.nearest_set(x, PROJECTION_TIE * (1.0 + d))?;
        if set.len() != 1 {
            return Err(Error::NonUniqueProjection);
        }
        Point::new(set.into_iter().next().unwrap())
    }

    /// Unit normal direction used by the noise model at a point of the shape.
    fn normal_at(&self, p: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Shape::Sphere { .. } | Shape::Circle { .. } | Shape::Semicircle { .. } => {
                let n = norm(p);
                scale(p, 1.0 / n)
            }
            Shape::Segment { a, b } => {
                let t = sub(b, a);
                let tn = norm(&t);
                let t = scale(&t, 1.0 / tn);
                // random unit vector orthogonal to the segment
                loop {
                    let g: Vec<f64> = (0..a.len()).map(|_| StandardNormal.sample(rng)).collect();
                    let v = axpy(&g, -dot(&g, &t), &t);
                    let vn = norm(&v);
                    if vn > 1e-9 {
                        return scale(&v, 1.0 / vn);
                    }
                    if a.len() == 1 {
                        return vec![0.0];
                    }
                }
            }
            _ => {
                let segs = self.segments();
                let (a, b) = segs
                    .iter()
                    .min_by(|s, t| {
                        let ds = dist(p, &closest_on_segment(p, &s.0, &s.1));
                        let dt = dist(p, &closest_on_segment(p, &t.0, &t.1));
                        ds.total_cmp(&dt)
                    })
                    .unwrap();
                let t = sub(b, a);
                let tn = norm(&t);
                vec![-t[1] / tn, t[0] / tn]
            }
        }
    }

    pub(crate) fn sample_point(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(match self {
            Shape::Sphere { dim, radius } => loop {
                let g: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(rng)).collect();
                let n = norm(&g);
                if n > 1e-12 {
                    break scale(&g, radius / n);
                }
            },
            Shape::Circle { radius } => {
                let t = rng.gen_range(0.0..2.0 * PI);
                vec![radius * t.cos(), radius * t.sin()]
            }
            Shape::Semicircle { radius } => {
                let t = rng.gen_range(0.0..=PI);
                vec![radius * t.cos(), radius * t.sin()]
            }
            Shape::Grid { .. } => return Err(Error::Unsupported("sampling a grid shape".into())),
            _ => {
                let segs = self.segments();
                let lens: Vec<f64> = segs.iter().map(|(a, b)| dist(a, b)).collect();
                let total: f64 = lens.iter().sum();
                let mut u = rng.gen_range(0.0..total);
                let mut out = segs[segs.len() - 1].1.clone();
                for ((a, b), l) in segs.iter().zip(&lens) {
                    if u <= *l {
                        out = axpy(a, u / l, &sub(b, a));
                        break;
                    }
                    u -= l;
                }
                out
            }
        })
    }

    /// Independent points uniform with respect to arc length or surface area.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> Result<PointCloud> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let mut rng = rng_from_seed(seed);
        let pts = (0..n)
            .map(|_| self.sample_point(&mut rng).and_then(Point::new))
            .collect::<Result<Vec<_>>>()?;
        PointCloud::new(pts, None)
    }

    /// Uniform points displaced along the normal direction by an amount uniform
    /// in `[-eps, eps]`, so every sample stays within `eps` of the shape.
    pub fn sample_with_noise(&self, n: usize, eps: f64, seed: u64) -> Result<PointCloud> {
        if n == 0 || !(eps >= 0.0) {
            return Err(Error::InvalidArgument("need n >= 1 and eps >= 0".into()));
        }
        let mut rng = rng_from_seed(seed);
        let mut pts = Vec::with_capacity(n);
        for _ in 0..n {
            let p = self.sample_point(&mut rng)?;
            let nrm = self.normal_at(&p, &mut rng);
            let t: f64 = rng.gen_range(-1.0..=1.0) * eps;
            pts.push(Point::new(axpy(&p, t, &nrm))?);
        }
        PointCloud::new(pts, None)
    }

    /// Dense deterministic points of the shape with spacing at most `h`.
    pub fn reference_points(&self, h: f64) -> Result<Vec<Vec<f64>>> {
        positive("spacing", h)?;
        Ok(match self {
            Shape::Circle { radius } => {
                let n = ((2.0 * PI * radius / h).ceil() as usize).max(8);
                arc_points(*radius, 0.0, 2.0 * PI, n, false)
            }
            Shape::Semicircle { radius } => {
                let n = ((PI * radius / h).ceil() as usize).max(8);
                arc_points(*radius, 0.0, PI, n, true)
            }
            Shape::Sphere { dim, radius } => sphere_reference(*dim, *radius, h),
            Shape::Grid { .. } => return Err(Error::Unsupported("reference points of a grid shape".into())),
            _ => {
                let mut out: Vec<Vec<f64>> = Vec::new();
                for (a, b) in self.segments() {
                    let n = ((dist(&a, &b) / h).ceil() as usize).max(1);
                    for i in 0..=n {
                        let p = axpy(&a, i as f64 / n as f64, &sub(&b, &a));
                        if !out.iter().rev().take(2).any(|o| dist(o, &p) <= SAME_POINT) {
                            out.push(p);
                        }
                    }
                }
                out
            }
        })
    }

    /// Measure of `B(x, r)` intersected with the shape, normalized to a probability.
    /// Closed forms for circles and 2-spheres in R^3.
    pub fn ball_probability(&self, x: &[f64], r: f64) -> Result<f64> {
        let d = self.distance_to(x)?;
        if d > 1e-12 {
            return Err(Error::Precondition("ball center must lie on the shape".into()));
        }
        match self {
            Shape::Circle { radius } => {
                if r >= 2.0 * radius {
                    return Ok(1.0);
                }
                Ok(2.0 * (r / (2.0 * radius)).asin() / PI)
            }
            Shape::Sphere { dim: 3, radius } => {
                // a chord of length r cuts a cap of height r^2 / (2R)
                let h = (r * r / (2.0 * radius)).min(2.0 * radius);
                Ok(h / (2.0 * radius))
            }
            _ => Err(Error::Unsupported("ball probability for this shape".into())),
        }
    }
}

pub(crate) fn closest_on_segment(x: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = sub(b, a);
    let t = (dot(&sub(x, a), &ab) / dot(&ab, &ab)).clamp(0.0, 1.0);
    axpy(a, t, &ab)
}

fn arc_points(r: f64, from: f64, to: f64, n: usize, closed: bool) -> Vec<Vec<f64>> {
    let steps = if closed { n } else { n.max(1) };
    let count = if closed { n + 1 } else { n };
    (0..count)
        .map(|i| {
            let t = from + (to - from) * i as f64 / steps as f64;
            vec![r * t.cos(), r * t.sin()]
        })
        .collect()
}

fn sphere_reference(dim: usize, radius: f64, h: f64) -> Vec<Vec<f64>> {
    // cube-map grid: every point of the sphere is within R * w * sqrt(dim - 1) of a node
    let per = ((2.0 * radius * ((dim - 1) as f64).sqrt() / h).ceil() as usize).max(2);
    let mut out = Vec::new();
    for axis in 0..dim {
        for sign in [-1.0, 1.0] {
            let total = (per + 1).pow((dim - 1) as u32);
            for idx in 0..total {
                let mut rem = idx;
                let mut v = vec![0.0; dim];
                v[axis] = sign;
                for k in (0..dim).filter(|&k| k != axis) {
                    let i = rem % (per + 1);
                    rem /= per + 1;
                    v[k] = -1.0 + 2.0 * i as f64 / per as f64;
                }
                let n = norm(&v);
                out.push(scale(&v, radius / n));
            }
        }
    }
    out
}

/// Brute-force distance by scanning a dense reference sample; used as a test oracle.
pub fn brute_force_distance(shape: &Shape, x: &[f64], h: f64) -> Result<f64> {
    let pts = shape.reference_points(h)?;
    Ok(pts.iter().map(|p| dist2(p, x)).fold(f64::INFINITY, f64::min).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, prop_assume, proptest};

    fn all_parametric() -> Vec<Shape> {
        vec![
            Shape::circle(1.0).unwrap(),
            Shape::circle(2.5).unwrap(),
            Shape::sphere(3, 1.0).unwrap(),
            Shape::sphere(4, 0.7).unwrap(),
            Shape::semicircle(1.0).unwrap(),
            Shape::segment(vec![-1.0, 0.0], vec![1.0, 0.0]).unwrap(),
            Shape::square_boundary(2.0).unwrap(),
            Shape::two_segments(1.2).unwrap(),
        ]
    }

    #[test]
    fn circle_distance_and_projection() {
        let c = Shape::circle(1.0).unwrap();
        assert_eq!(c.distance_to(&[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(c.project(&[2.0, 0.0]).unwrap().coords(), &[1.0, 0.0]);
        assert_eq!(c.project(&[0.0, 0.0]), Err(Error::NonUniqueProjection));
    }

    #[test]
    fn semicircle_below_axis_is_ambiguous() {
        let s = Shape::semicircle(1.0).unwrap();
        let x = [0.0, -1.0];
        let d = s.distance_to(&x).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!((brute_force_distance(&s, &x, 1e-4).unwrap() - d).abs() < 1e-8);
        assert_eq!(s.project(&x), Err(Error::NonUniqueProjection));
        assert_eq!(s.nearest_set(&x, 1e-6).unwrap().len(), 2);
    }

    #[test]
    fn sphere_center_is_ambiguous() {
        let s = Shape::sphere(3, 1.0).unwrap();
        assert_eq!(s.project(&[0.0, 0.0, 0.0]), Err(Error::NonUniqueProjection));
    }

    #[test]
    fn reach_values() {
        assert_eq!(Shape::sphere(3, 2.0).unwrap().reach(), 2.0);
        assert_eq!(Shape::circle(1.5).unwrap().reach(), 1.5);
        assert_eq!(Shape::segment(vec![0.0], vec![1.0]).unwrap().reach(), f64::INFINITY);
        assert_eq!(Shape::square_boundary(2.0).unwrap().reach(), 0.0);
    }

    #[test]
    fn circle_samples_lie_on_circle() {
        let c = Shape::circle(1.0).unwrap();
        let cloud = c.sample_uniform(4, 42).unwrap();
        assert_eq!(cloud.len(), 4);
        for p in cloud.points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(cloud, c.sample_uniform(4, 42).unwrap());
    }

    #[test]
    fn exact_samples_are_contained() {
        for s in all_parametric() {
            for p in s.sample_with_noise(200, 0.0, 3).unwrap().points() {
                assert!(s.contains(p, 1e-12).unwrap(), "{s:?}");
            }
        }
    }

    #[test]
    fn noise_bound_is_tight() {
        let c = Shape::circle(1.0).unwrap();
        let cloud = c.sample_with_noise(10_000, 0.05, 9).unwrap();
        let worst = cloud.points().iter().map(|p| c.distance_to(p).unwrap()).fold(0.0, f64::max);
        assert!(worst <= 0.05 + 1e-15);
        assert!(worst >= 0.04);
    }

    #[test]
    fn distances_match_brute_force() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in all_parametric() {
            let (lo, hi) = s.bounding_box();
            for _ in 0..50 {
                let x: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| rng.gen_range(a - 0.5..b + 0.5)).collect();
                let exact = s.distance_to(&x).unwrap();
                let h = 0.02;
                let brute = brute_force_distance(&s, &x, h).unwrap();
                assert!(brute >= exact - 1e-12 && brute <= exact + h, "{s:?} {x:?}");
            }
        }
    }

    #[test]
    fn ball_probability_circle() {
        let c = Shape::circle(1.0).unwrap();
        let p = c.ball_probability(&[1.0, 0.0], 0.1).unwrap();
        assert!(p >= 0.1 / PI);
        assert_eq!(c.ball_probability(&[1.0, 0.0], 3.0).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn projection_realizes_distance(which in 0usize..8, raw in prop::collection::vec(-3.0f64..3.0, 4), t in 0.0f64..0.9) {
            let s = all_parametric()[which].clone();
            let x = &raw[..s.ambient_dim()];
            let d = s.distance_to(x).unwrap();
            prop_assume!(d < s.reach());
            if let Ok(p) = s.project(x) {
                prop_assert!((p.dist(x) - d).abs() <= 1e-12 * (1.0 + d));
                // moving toward the projection keeps the projection fixed
                let y = axpy(x, t, &sub(&p, x));
                let q = s.project(&y).unwrap();
                prop_assert!(q.dist(&p) <= 1e-9);
            }
        }
    }
}
