//! Euclidean primitives: points, convex combinations, the smallest
//! scaled enclosing ball and open-ball intersection tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{Error, Result};

/// Default margin for deciding that a family of open balls meets.
pub const INTERSECTION_TOL: f64 = 1e-7;
/// Default accuracy target for [`min_scaled_ball`].
pub const SOLVER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        dist(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point(c.to_vec())
    }
}

impl From<[f64; 3]> for Point {
    fn from(c: [f64; 3]) -> Self {
        Point(c.to_vec())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| x * c).collect()
}

/// `a + c * b`
pub fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub(crate) fn check_dims<P: Deref<Target = [f64]>>(points: &[P]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let d = first.len();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCombination {
    weights: Vec<f64>,
}

impl ConvexCombination {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidWeights("weights must lie in [0, 1]".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    /// Normalizes nonnegative weights so that they sum to one.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if raw.iter().any(|w| *w < 0.0 || !w.is_finite()) || total <= 0.0 {
            return Err(Error::InvalidWeights("need nonnegative weights with positive sum".into()));
        }
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        // absorb rounding into the largest weight so the sum is 1 to machine precision
        let err: f64 = 1.0 - weights.iter().sum::<f64>();
        let imax = (0..weights.len()).max_by(|&a, &b| weights[a].total_cmp(&weights[b])).unwrap();
        weights[imax] = (weights[imax] + err).clamp(0.0, 1.0);
        Self::new(weights)
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

    pub fn apply<P: Deref<Target = [f64]>>(&self, points: &[P]) -> Result<Vec<f64>> {
        if points.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), got: points.len() });
        }
        let d = check_dims(points)?;
        let mut out = vec![0.0; d];
        for (p, w) in points.iter().zip(&self.weights) {
            for (o, c) in out.iter_mut().zip(p.iter()) {
                *o += w * c;
            }
        }
        Ok(out)
    }
}

/// Weighted pair sum `sum_{i<j} l_i l_j |x_i - x_j|^2`.
pub fn pair_sum<P: Deref<Target = [f64]>>(points: &[P], weights: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            s += weights[i] * weights[j] * dist2(&points[i], &points[j]);
        }
    }
    s
}

/// Both sides of the distance identity for a convex combination:
/// `|sum l_i x_i - x|` computed directly, and
/// `sqrt(sum l_i |x_i - x|^2 - sum_{i<j} l_i l_j |x_i - x_j|^2)`.
pub fn claim_a1_identity(x: &Point, points: &[Point], comb: &ConvexCombination) -> Result<(f64, f64)> {
    let d = check_dims(points)?;
    if x.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.dim() });
    }
    let u = comb.apply(points)?;
    let lhs = dist(&u, x);
    let w = comb.weights();
    let first: f64 = points.iter().zip(w).map(|(p, l)| l * dist2(p, x)).sum();
    let rhs = (first - pair_sum(points, w)).max(0.0).sqrt();
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinScaledBall {
    pub center: Point,
    /// `max_i |x_i - center| / r_i`
    pub value: f64,
    /// Gap between `value` and a dual lower bound on the true minimum.
    pub certified_tol: f64,
    /// Indices of the points on the boundary of the optimal scaled balls.
    pub support: Vec<usize>,
    /// Barycentric weights of `center` with respect to `support`.
    pub weights: Vec<f64>,
}

fn objective(points: &[&[f64]], radii: &[f64], y: &[f64]) -> f64 {
    points.iter().zip(radii).map(|(p, r)| dist(p, y) / r).fold(0.0, f64::max)
}

struct Candidate {
    center: Vec<f64>,
    weights: Vec<f64>,
}

/// Point with every member of `subset` on the boundary of its scaled ball at the
/// smallest common scale, restricted to the affine hull of the subset.
fn boundary_solution(points: &[&[f64]], radii: &[f64], subset: &[usize]) -> Option<Candidate> {
    let x0 = points[subset[0]];
    let r0 = radii[subset[0]];
    let m = subset.len() - 1;
    if m == 0 {
        return Some(Candidate { center: x0.to_vec(), weights: vec![1.0] });
    }
    let vs: Vec<Vec<f64>> = subset[1..].iter().map(|&j| sub(points[j], x0)).collect();
    let g = DMatrix::from_fn(m, m, |i, j| dot(&vs[i], &vs[j]));
    let b = DVector::from_fn(m, |i, _| dot(&vs[i], &vs[i]));
    let c = DVector::from_fn(m, |i, _| radii[subset[i + 1]].powi(2) - r0 * r0);
    let scale = g.diagonal().max();
    if scale <= 0.0 {
        return None;
    }
    let chol = g.clone().cholesky()?;
    let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min_pivot * min_pivot < 1e-13 * scale {
        return None;
    }
    let p = chol.solve(&b) * 0.5;
    let q = chol.solve(&c) * 0.5;
    let gq = &g * &q;
    let qa = q.dot(&gq);
    let qb = -2.0 * p.dot(&gq) - r0 * r0;
    let qc = p.dot(&(&g * &p));
    let s = smallest_nonnegative_root(qa, qb, qc)?;
    let a = &p - &q * s;
    let mut center = x0.to_vec();
    for (k, v) in vs.iter().enumerate() {
        for (o, comp) in center.iter_mut().zip(v) {
            *o += a[k] * comp;
        }
    }
    let mut weights = Vec::with_capacity(m + 1);
    weights.push(1.0 - a.sum());
    weights.extend(a.iter().copied());
    Some(Candidate { center, weights })
}

fn smallest_nonnegative_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if c <= 0.0 {
        return Some(0.0);
    }
    let lin_scale = b.abs().max(c.abs());
    if a.abs() <= 1e-14 * lin_scale {
        if b >= 0.0 {
            return None;
        }
        return Some(-c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|r| r.is_finite() && *r >= 0.0)
}

fn for_each_subset(n: usize, max_size: usize, mut f: impl FnMut(&[usize])) {
    let mut stack: Vec<usize> = Vec::new();
    fn rec(start: usize, n: usize, max_size: usize, stack: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        for i in start..n {
            stack.push(i);
            f(stack);
            if stack.len() < max_size {
                rec(i + 1, n, max_size, stack, f);
            }
            stack.pop();
        }
    }
    rec(0, n, max_size, &mut stack, &mut f);
}

struct Best {
    value: f64,
    center: Vec<f64>,
    support: Vec<usize>,
    weights: Vec<f64>,
}

/// Exhaustive search over affinely independent support sets of `active`.
fn solve_exhaustive(points: &[&[f64]], radii: &[f64], active: &[usize], dim: usize) -> Best {
    let sub_pts: Vec<&[f64]> = active.iter().map(|&i| points[i]).collect();
    let sub_r: Vec<f64> = active.iter().map(|&i| radii[i]).collect();
    let mut best = Best {
        value: f64::INFINITY,
        center: Vec::new(),
        support: Vec::new(),
        weights: Vec::new(),
    };
    for_each_subset(active.len(), dim + 1, |subset| {
        if let Some(cand) = boundary_solution(&sub_pts, &sub_r, subset) {
            let v = objective(&sub_pts, &sub_r, &cand.center);
            let better = v < best.value
                || (v == best.value && cand.weights.iter().all(|w| *w >= -1e-12) && best.weights.iter().any(|w| *w < -1e-12));
            if better {
                best = Best {
                    value: v,
                    center: cand.center,
                    support: subset.iter().map(|&k| active[k]).collect(),
                    weights: cand.weights,
                };
            }
        }
    });
    best
}

fn validate(points: &[Point], radii: &[f64]) -> Result<usize> {
    let d = check_dims(points)?;
    if radii.len() != points.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: radii.len() });
    }
    for (index, &value) in radii.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveRadius { index, value });
        }
    }
    Ok(d)
}

/// Minimizes `f(y) = max_i |x_i - y| / r_i` over `y` in R^d.
///
/// Small inputs are solved by enumerating candidate support sets; larger ones
/// by an active-set loop that adds the worst violator until none remain. The
/// reported value is always `f(center)`, so it never underestimates the minimum.
pub fn min_scaled_ball(points: &[Point], radii: &[f64], tol: f64) -> Result<MinScaledBall> {
    let d = validate(points, radii)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let pts: Vec<&[f64]> = points.iter().map(|p| p.coords()).collect();
    let best = if pts.len() <= 10 {
        let all: Vec<usize> = (0..pts.len()).collect();
        solve_exhaustive(&pts, radii, &all, d)
    } else {
        solve_active_set(&pts, radii, d)
    };
    let value = objective(&pts, radii, &best.center);
    let lower = dual_lower_bound(&pts, radii, &best.support, &best.weights);
    Ok(MinScaledBall {
        center: Point(best.center),
        value,
        certified_tol: (value - lower).max(0.0),
        support: best.support,
        weights: best.weights,
    })
}

fn solve_active_set(pts: &[&[f64]], radii: &[f64], d: usize) -> Best {
    let mut active: Vec<usize> = (0..pts.len().min(d + 1)).collect();
    let mut best = solve_exhaustive(pts, radii, &active, d);
    for _ in 0..10 * pts.len() {
        let (worst, worst_val) = (0..pts.len())
            .map(|i| (i, dist(pts[i], &best.center) / radii[i]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if worst_val <= best.value * (1.0 + 1e-13) || active.contains(&worst) {
            break;
        }
        active = best.support.clone();
        active.push(worst);
        best = solve_exhaustive(pts, radii, &active, d);
    }
    best
}

/// `f(y)^2 >= sum_j m_j |x_j - y|^2 / r_j^2` for any probability vector `m`;
/// the right side is a quadratic whose minimum is a certified lower bound.
fn dual_lower_bound(pts: &[&[f64]], radii: &[f64], support: &[usize], weights: &[f64]) -> f64 {
    let mut mu: Vec<f64> = support
        .iter()
        .zip(weights)
        .map(|(&j, &w)| w.max(0.0) * radii[j] * radii[j])
        .collect();
    let total: f64 = mu.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    mu.iter_mut().for_each(|m| *m /= total);
    let kappa: Vec<f64> = support.iter().zip(&mu).map(|(&j, m)| m / (radii[j] * radii[j])).collect();
    let ksum: f64 = kappa.iter().sum();
    let d = pts[0].len();
    let mut y = vec![0.0; d];
    for (&j, k) in support.iter().zip(&kappa) {
        for (o, c) in y.iter_mut().zip(pts[j]) {
            *o += k * c / ksum;
        }
    }
    let lb: f64 = support.iter().zip(&kappa).map(|(&j, k)| k * dist2(pts[j], &y)).sum();
    lb.max(0.0).sqrt()
}

/// True iff the open balls `B(x_i, r_i)` have a common point, certified by a margin:
/// the smallest common scale must be below `1 - tol`.
pub fn balls_have_common_point(points: &[Point], radii: &[f64], tol: f64) -> Result<bool> {
    Ok(min_scaled_ball(points, radii, SOLVER_TOL)?.value < 1.0 - tol)
}

/// Like [`balls_have_common_point`] for borrowed coordinates, skipping validation.
pub(crate) fn scaled_ball_value(points: &[&[f64]], radii: &[f64]) -> (f64, Vec<f64>) {
    let d = points[0].len();
    let all: Vec<usize> = (0..points.len()).collect();
    let best = if points.len() <= 10 {
        solve_exhaustive(points, radii, &all, d)
    } else {
        solve_active_set(points, radii, d)
    };
    (objective(points, radii, &best.center), best.center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Nested one-dimensional bracket refinement, one coordinate at a time.
    /// Partial minima of a convex function are convex, so every level is unimodal.
    pub(crate) fn grid_oracle(points: &[Point], radii: &[f64]) -> f64 {
        let d = points[0].dim();
        let pts: Vec<&[f64]> = points.iter().map(|p| p.coords()).collect();
        let lo: Vec<f64> = (0..d).map(|k| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..d).map(|k| pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let mut y = vec![0.0; d];
        nested(&pts, radii, &lo, &hi, &mut y, 0)
    }

    fn nested(pts: &[&[f64]], radii: &[f64], lo: &[f64], hi: &[f64], y: &mut Vec<f64>, k: usize) -> f64 {
        if k == y.len() {
            return objective(pts, radii, y);
        }
        let eval = |t: f64, y: &mut Vec<f64>| {
            y[k] = t;
            nested(pts, radii, lo, hi, y, k + 1)
        };
        let (mut a, mut b) = (lo[k], hi[k]);
        if b - a < 1e-15 {
            return eval(a, y);
        }
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut e = a + g * (b - a);
        let mut fc = eval(c, y);
        let mut fe = eval(e, y);
        for _ in 0..70 {
            if fc <= fe {
                b = e;
                e = c;
                fe = fc;
                c = b - g * (b - a);
                fc = eval(c, y);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + g * (b - a);
                fe = eval(e, y);
            }
        }
        fc.min(fe)
    }

    fn random_instance(rng: &mut ChaCha8Rng, k: usize, d: usize) -> (Vec<Point>, Vec<f64>) {
        let pts = (0..k)
            .map(|_| Point::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        let radii = (0..k).map(|_| rng.gen_range(0.1..2.0)).collect();
        (pts, radii)
    }

    #[test]
    fn identity_on_symmetric_pair() {
        let x = Point::from([0.0, 1.0]);
        let pts = vec![Point::from([-1.0, 0.0]), Point::from([1.0, 0.0])];
        let comb = ConvexCombination::new(vec![0.5, 0.5]).unwrap();
        let (lhs, rhs) = claim_a1_identity(&x, &pts, &comb).unwrap();
        assert!((lhs - 1.0).abs() < 1e-15);
        assert!((rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_single_point() {
        let x = Point::from([0.3, -2.0, 1.0]);
        let p = Point::from([1.0, 1.0, 1.0]);
        let comb = ConvexCombination::new(vec![1.0]).unwrap();
        let (lhs, rhs) = claim_a1_identity(&x, std::slice::from_ref(&p), &comb).unwrap();
        assert!((lhs - p.dist(&x)).abs() < 1e-15);
        assert!((rhs - lhs).abs() < 1e-12);
    }

    #[test]
    fn identity_rejects_bad_input() {
        assert!(ConvexCombination::new(vec![0.5, 0.6]).is_err());
        assert!(ConvexCombination::new(vec![-0.5, 1.5]).is_err());
        let comb = ConvexCombination::new(vec![1.0]).unwrap();
        let r = claim_a1_identity(&Point::from([0.0, 0.0]), &[Point::from([1.0, 0.0, 0.0])], &comb);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn identity_random_4_points_r3() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let pts: Vec<Point> = (0..4)
                .map(|_| Point::new((0..3).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap())
                .collect();
            let x = Point::new((0..3).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            let raw: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
            let comb = ConvexCombination::normalized(&raw).unwrap();
            let (lhs, rhs) = claim_a1_identity(&x, &pts, &comb).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs));
        }
    }

    #[test]
    fn symmetric_pair_on_line() {
        let pts = vec![Point::new(vec![-1.0]).unwrap(), Point::new(vec![1.0]).unwrap()];
        let b = min_scaled_ball(&pts, &[1.0, 1.0], SOLVER_TOL).unwrap();
        assert!(b.center[0].abs() < 1e-12);
        assert!((b.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_triangle_circumradius() {
        let pts = vec![
            Point::from([0.0, 0.0]),
            Point::from([1.0, 0.0]),
            Point::from([0.5, 3f64.sqrt() / 2.0]),
        ];
        let b = min_scaled_ball(&pts, &[1.0; 3], SOLVER_TOL).unwrap();
        assert!((b.value - 0.577350269189626).abs() < 1e-12);
        assert!((grid_oracle(&pts, &[1.0; 3]) - 0.577350269189626).abs() < 1e-9);
    }

    #[test]
    fn single_point_has_zero_value() {
        let p = Point::from([2.0, -1.0]);
        let b = min_scaled_ball(std::slice::from_ref(&p), &[5.0], SOLVER_TOL).unwrap();
        assert_eq!(b.center, p);
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn solver_errors() {
        assert_eq!(min_scaled_ball(&[], &[], SOLVER_TOL), Err(Error::EmptyInput));
        let r = min_scaled_ball(&[Point::from([0.0, 0.0])], &[0.0], SOLVER_TOL);
        assert!(matches!(r, Err(Error::NonPositiveRadius { index: 0, .. })));
    }

    #[test]
    fn weighted_pair_closed_form() {
        // on a line the optimum splits the gap in proportion to the radii
        let pts = vec![Point::new(vec![0.0]).unwrap(), Point::new(vec![3.0]).unwrap()];
        let b = min_scaled_ball(&pts, &[1.0, 2.0], SOLVER_TOL).unwrap();
        assert!((b.center[0] - 1.0).abs() < 1e-12);
        assert!((b.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_triple_uses_two_point_support() {
        let pts = vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([2.0, 0.0])];
        let b = min_scaled_ball(&pts, &[0.6; 3], SOLVER_TOL).unwrap();
        assert!((b.value - 1.0 / 0.6).abs() < 1e-12);
        assert!(!balls_have_common_point(&pts, &[0.6; 3], INTERSECTION_TOL).unwrap());
    }

    #[test]
    fn tangent_balls_do_not_meet() {
        let a = vec![Point::from([0.0, 0.0]), Point::from([1.9, 0.0])];
        assert!(balls_have_common_point(&a, &[1.0, 1.0], INTERSECTION_TOL).unwrap());
        let b = vec![Point::from([0.0, 0.0]), Point::from([2.0, 0.0])];
        assert!(!balls_have_common_point(&b, &[1.0, 1.0], INTERSECTION_TOL).unwrap());
    }

    #[test]
    fn active_set_matches_exhaustive_on_large_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let (pts, radii) = random_instance(&mut rng, 40, 3);
            let fast = min_scaled_ball(&pts, &radii, SOLVER_TOL).unwrap();
            let slow = grid_oracle(&pts, &radii);
            assert!((fast.value - slow).abs() < 1e-6, "{} vs {}", fast.value, slow);
        }
    }

    #[test]
    fn matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let k = rng.gen_range(1..=6);
            let d = rng.gen_range(1..=3);
            let (pts, radii) = random_instance(&mut rng, k, d);
            let b = min_scaled_ball(&pts, &radii, SOLVER_TOL).unwrap();
            let oracle = grid_oracle(&pts, &radii);
            assert!((b.value - oracle).abs() < 1e-6, "{} vs {}", b.value, oracle);
            assert!(b.certified_tol < 1e-9, "gap {}", b.certified_tol);
            assert!(b.weights.iter().all(|w| *w >= -1e-9), "center outside hull");
        }
    }

    fn family(max_d: usize) -> impl Strategy<Value = (Vec<Point>, Vec<f64>)> {
        (1..=max_d, 1usize..=6).prop_flat_map(|(d, k)| {
            (
                prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), k),
                prop::collection::vec(0.1f64..2.0, k),
            )
                .prop_map(|(pts, r)| (pts.into_iter().map(|c| Point::new(c).unwrap()).collect(), r))
        })
    }

    proptest! {
        #[test]
        fn identity_holds((pts, _r) in family(5), raw in prop::collection::vec(0.01f64..1.0, 6),
                          x in prop::collection::vec(-2.0f64..2.0, 5)) {
            let d = pts[0].dim();
            let comb = ConvexCombination::normalized(&raw[..pts.len()]).unwrap();
            let x = Point::new(x[..d].to_vec()).unwrap();
            let (lhs, rhs) = claim_a1_identity(&x, &pts, &comb).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs));
        }

        #[test]
        fn scale_equivariance((pts, r) in family(3), c in 0.05f64..20.0) {
            let b = min_scaled_ball(&pts, &r, SOLVER_TOL).unwrap();
            let scaled: Vec<Point> = pts.iter().map(|p| Point::new(scale(p, c)).unwrap()).collect();
            let rs: Vec<f64> = r.iter().map(|x| x * c).collect();
            let bs = min_scaled_ball(&scaled, &rs, SOLVER_TOL).unwrap();
            prop_assert!((b.value - bs.value).abs() < 1e-9 * (1.0 + b.value));
            prop_assert!(dist(&scale(&b.center, c), &bs.center) < 1e-7 * (1.0 + c));
        }

        #[test]
        fn monotone_in_radii((pts, r) in family(3), which in 0usize..6, grow in 1.0f64..3.0) {
            let before = balls_have_common_point(&pts, &r, INTERSECTION_TOL).unwrap();
            let mut r2 = r.clone();
            let i = which % r2.len();
            r2[i] *= grow;
            let after = balls_have_common_point(&pts, &r2, INTERSECTION_TOL).unwrap();
            prop_assert!(!before || after);
        }

        #[test]
        fn pairwise_meeting_balls_meet_after_scaling((pts, r) in family(4)) {
            let d = pts[0].dim() as f64;
            let pairwise = (0..pts.len()).all(|i| (i + 1..pts.len()).all(|j| pts[i].dist(&pts[j]) < r[i] + r[j]));
            prop_assume!(pairwise);
            let f = (2.0 * d / (d + 1.0)).sqrt();
            let rs: Vec<f64> = r.iter().map(|x| x * f).collect();
            let b = min_scaled_ball(&pts, &rs, SOLVER_TOL).unwrap();
            prop_assert!(b.value < 1.0);
        }
    }
}
