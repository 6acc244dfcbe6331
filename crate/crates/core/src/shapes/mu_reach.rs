use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GridField, Shape};
use crate::error::{Error, Result};
use crate::geometry::{dist, scaled_ball_value, Point};

/// Nearest points within this much of the minimum distance count as ties.
pub const NEAREST_SET_TOL: f64 = 1e-6;

/// Relative slack when comparing gradient norms against `mu`.
const GRADIENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub point: Point,
    pub nearest_set: Vec<Point>,
    /// Center of the smallest ball enclosing `nearest_set`.
    pub center: Point,
    pub grad_norm: f64,
}

/// Generalized gradient of the distance function at `x`, off the shape.
pub fn gradient(shape: &Shape, x: &[f64]) -> Result<GradientEstimate> {
    let d = shape.distance_to(x)?;
    if d <= 0.0 {
        return Err(Error::InvalidArgument("gradient is undefined on the shape".into()));
    }
    let near = shape.nearest_set(x, NEAREST_SET_TOL)?;
    let refs: Vec<&[f64]> = near.iter().map(|p| p.as_slice()).collect();
    let center = if refs.len() == 1 {
        refs[0].to_vec()
    } else {
        scaled_ball_value(&refs, &vec![1.0; refs.len()]).1
    };
    let grad_norm = (dist(x, &center) / d).min(1.0);
    Ok(GradientEstimate {
        point: Point::new(x.to_vec())?,
        nearest_set: near.into_iter().map(Point::new).collect::<Result<_>>()?,
        center: Point::new(center)?,
        grad_norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuReachEstimate {
    pub mu: f64,
    /// Smallest distance to the shape among grid nodes with gradient norm below `mu`,
    /// or the distance from the shape to the window boundary when `censored`.
    pub value: f64,
    /// True when no qualifying node was found or the minimum sits on the window boundary.
    pub censored: bool,
    pub spacing: f64,
    pub nodes: usize,
}

/// Minimum number of nodes along the longest grid axis.
pub const MIN_MU_RESOLUTION: usize = 101;

/// Grid estimate of the mu-reach on the bounding box padded by its longest side.
pub fn estimate_mu_reach(shape: &Shape, mu: f64, resolution: usize) -> Result<MuReachEstimate> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidArgument(format!("mu must lie in (0, 1], got {mu}")));
    }
    if resolution < MIN_MU_RESOLUTION {
        return Err(Error::ResolutionTooCoarse(format!(
            "need at least {MIN_MU_RESOLUTION} nodes per axis for two-digit accuracy, got {resolution}"
        )));
    }
    let (lo, hi) = shape.bounding_box();
    let pad = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max).max(1e-3);
    let (origin, h, dims) = GridField::covering(&lo, &hi, pad, resolution)?;
    let n: usize = dims.iter().product();
    let grid = GridField::new(origin, h, dims, vec![0.0; n])?;
    let found: Vec<Option<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let d = shape.distance_to(&x)?;
            if d <= 1e-12 {
                return Ok(None);
            }
            let g = gradient(shape, &x)?;
            Ok((g.grad_norm < mu * (1.0 - GRADIENT_TOL)).then_some((d, i)))
        })
        .collect::<Result<_>>()?;
    let best = found.into_iter().flatten().min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    // nothing in the window: every point up to the window boundary is admissible
    let window: f64 = (0..n)
        .filter(|&i| grid.is_boundary_node(i))
        .map(|i| shape.distance_to(&grid.node(i)).unwrap_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min);
    Ok(match best {
        Some((d, i)) => MuReachEstimate {
            mu,
            value: d,
            censored: grid.is_boundary_node(i),
            spacing: h,
            nodes: n,
        },
        None => MuReachEstimate { mu, value: window, censored: true, spacing: h, nodes: n },
    })
}

/// Largest `mu` whose estimated mu-reach is at least `r`, by bisection.
pub fn critical_mu(shape: &Shape, r: f64, resolution: usize) -> Result<f64> {
    let ok = |mu: f64| -> Result<bool> { Ok(estimate_mu_reach(shape, mu, resolution)?.value >= r) };
    if ok(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1e-3, 1.0);
    if !ok(lo)? {
        return Err(Error::Precondition(format!("mu-reach is below {r} for every mu >= {lo}")));
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Gradient norm from a brute-force nearest set over dense reference points.
#[cfg(test)]
pub(crate) fn brute_grad_norm(shape: &Shape, x: &[f64], h: f64) -> f64 {
    let refs = shape.reference_points(h).unwrap();
    let d = refs.iter().map(|p| dist(p, x)).fold(f64::INFINITY, f64::min);
    let near: Vec<&[f64]> = refs.iter().filter(|p| dist(p, x) <= d + 2.0 * h).map(|p| p.as_slice()).collect();
    let (_, c) = scaled_ball_value(&near, &vec![1.0; near.len()]);
    crate::geometry::norm(&crate::geometry::sub(x, &c)) / d
}
