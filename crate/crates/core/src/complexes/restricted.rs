use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, norm, scale, scaled_ball_value, INTERSECTION_TOL};
use crate::shapes::Shape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certified {
    Yes,
    No,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RestrictedMethod {
    /// Exact arcs or segment intervals for curves, branch and bound on spheres,
    /// grid scan on grid shapes.
    #[default]
    Auto,
    ExactArcs,
    BranchAndBound,
    GridScan,
}

/// Cell budget for the sphere search before giving up.
const MAX_CELLS: usize = 400_000;

/// Decides whether some `y` on the shape has `|y - x_i| < (1 - INTERSECTION_TOL) r_i`
/// for every `i`; the margin matches the ambient test so restricted simplices are
/// always ambient simplices.
pub fn restricted_intersection(shape: &Shape, pts: &[&[f64]], radii: &[f64], method: RestrictedMethod) -> Result<Certified> {
    let shrunk: Vec<f64> = radii.iter().map(|r| r * (1.0 - INTERSECTION_TOL)).collect();
    let (ambient, _) = scaled_ball_value(pts, &shrunk);
    if ambient >= 1.0 {
        return Ok(Certified::No);
    }
    let method = match method {
        RestrictedMethod::Auto => match shape {
            Shape::Sphere { dim, .. } if *dim > 2 => RestrictedMethod::BranchAndBound,
            Shape::Grid { .. } => RestrictedMethod::GridScan,
            _ => RestrictedMethod::ExactArcs,
        },
        m => m,
    };
    match (method, shape) {
        (RestrictedMethod::ExactArcs, Shape::Circle { radius } | Shape::Sphere { dim: 2, radius }) => {
            Ok(arcs(pts, &shrunk, *radius, false))
        }
        (RestrictedMethod::ExactArcs, Shape::Semicircle { radius }) => Ok(arcs(pts, &shrunk, *radius, true)),
        (RestrictedMethod::ExactArcs, Shape::Segment { .. } | Shape::SquareBoundary { .. } | Shape::TwoSegments { .. }) => {
            Ok(segment_intervals(shape, pts, &shrunk))
        }
        (RestrictedMethod::BranchAndBound, Shape::Sphere { dim, radius }) => Ok(sphere_search(pts, &shrunk, *dim, *radius)),
        (RestrictedMethod::BranchAndBound, Shape::Circle { radius }) => Ok(sphere_search(pts, &shrunk, 2, *radius)),
        (RestrictedMethod::GridScan, Shape::Grid { field }) => {
            let tol = field.spacing();
            for i in 0..field.len() {
                if field.values()[i] <= tol {
                    let y = field.node(i);
                    if pts.iter().zip(&shrunk).all(|(p, r)| dist(p, &y) < *r) {
                        return Ok(Certified::Yes);
                    }
                }
            }
            Ok(Certified::No)
        }
        (m, s) => Err(Error::Unsupported(format!("restricted test {m:?} on {s:?}"))),
    }
}

/// Open angular intervals inside `(0, 2 pi)`.
fn arc_pieces(x: &[f64], s: f64, big_r: f64) -> Vec<(f64, f64)> {
    let full = vec![(0.0, 2.0 * PI)];
    let rho = norm(x);
    let c = (big_r * big_r + rho * rho - s * s) / (2.0 * big_r);
    if rho <= 1e-300 {
        return if c < 0.0 { full } else { Vec::new() };
    }
    let kappa = c / rho;
    if kappa < -1.0 {
        return full;
    }
    if kappa >= 1.0 {
        return Vec::new();
    }
    let alpha = kappa.acos();
    let phi = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
    let (lo, hi) = (phi - alpha, phi + alpha);
    if lo < 0.0 {
        vec![(lo + 2.0 * PI, 2.0 * PI), (0.0, hi)]
    } else if hi > 2.0 * PI {
        vec![(lo, 2.0 * PI), (0.0, hi - 2.0 * PI)]
    } else {
        vec![(lo, hi)]
    }
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
    out
}

fn arcs(pts: &[&[f64]], radii: &[f64], big_r: f64, upper_half: bool) -> Certified {
    let mut cur = vec![(0.0, 2.0 * PI)];
    for (p, r) in pts.iter().zip(radii) {
        cur = intersect(&cur, &arc_pieces(p, *r, big_r));
        if cur.is_empty() {
            return Certified::No;
        }
    }
    let hit = if upper_half { cur.iter().any(|&(lo, _)| lo < PI) } else { !cur.is_empty() };
    if hit {
        Certified::Yes
    } else {
        Certified::No
    }
}

fn segment_intervals(shape: &Shape, pts: &[&[f64]], radii: &[f64]) -> Certified {
    for (a, b) in shape_segments(shape) {
        let v: Vec<f64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
        let aa = v.iter().map(|c| c * c).sum::<f64>();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (p, r) in pts.iter().zip(radii) {
            let w: Vec<f64> = a.iter().zip(p.iter()).map(|(x, y)| x - y).collect();
            let bb = 2.0 * v.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>();
            let cc = w.iter().map(|c| c * c).sum::<f64>() - r * r;
            let disc = bb * bb - 4.0 * aa * cc;
            if disc <= 0.0 {
                lo = f64::INFINITY;
                break;
            }
            let sq = disc.sqrt();
            lo = lo.max((-bb - sq) / (2.0 * aa));
            hi = hi.min((-bb + sq) / (2.0 * aa));
        }
        if lo < hi && lo < 1.0 && hi > 0.0 {
            return Certified::Yes;
        }
    }
    Certified::No
}

fn shape_segments(shape: &Shape) -> Vec<(Vec<f64>, Vec<f64>)> {
    match shape {
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

struct Cell {
    lower: f64,
    axis: usize,
    sign: f64,
    center: Vec<f64>,
    half: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on the lower bound
        other.lower.total_cmp(&self.lower)
    }
}

fn lift(axis: usize, sign: f64, face: &[f64], dim: usize, big_r: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(dim);
    let mut it = face.iter();
    for k in 0..dim {
        v.push(if k == axis { sign } else { *it.next().unwrap() });
    }
    let n = norm(&v);
    scale(&v, big_r / n)
}

fn objective(pts: &[&[f64]], radii: &[f64], y: &[f64]) -> f64 {
    pts.iter().zip(radii).map(|(p, r)| dist(p, y) / r).fold(0.0, f64::max)
}

/// Best-first branch and bound over the cube-map faces of the sphere. The map from
/// a face to the sphere is `R`-Lipschitz, and the objective is `1/min r`-Lipschitz.
fn sphere_search(pts: &[&[f64]], radii: &[f64], dim: usize, big_r: f64) -> Certified {
    let lip = 1.0 / radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = ((dim - 1) as f64).sqrt() * big_r * lip;

    // the radial projection of the ambient optimum is usually a witness
    let (_, y0) = scaled_ball_value(pts, radii);
    let n0 = norm(&y0);
    if n0 > 0.0 && objective(pts, radii, &scale(&y0, big_r / n0)) < 1.0 {
        return Certified::Yes;
    }

    let mut heap = BinaryHeap::new();
    for axis in 0..dim {
        for sign in [-1.0, 1.0] {
            let center = vec![0.0; dim - 1];
            let y = lift(axis, sign, &center, dim, big_r);
            let g = objective(pts, radii, &y);
            if g < 1.0 {
                return Certified::Yes;
            }
            heap.push(Cell { lower: g - spread, axis, sign, center, half: 1.0 });
        }
    }
    let mut visited = 0;
    while let Some(cell) = heap.pop() {
        if cell.lower >= 1.0 {
            return Certified::No;
        }
        visited += 1;
        if visited > MAX_CELLS {
            return Certified::Indeterminate;
        }
        let h = cell.half / 2.0;
        for child in 0..(1usize << (dim - 1)) {
            let center: Vec<f64> = cell
                .center
                .iter()
                .enumerate()
                .map(|(k, c)| if child >> k & 1 == 1 { c + h } else { c - h })
                .collect();
            let y = lift(cell.axis, cell.sign, &center, dim, big_r);
            let g = objective(pts, radii, &y);
            if g < 1.0 {
                return Certified::Yes;
            }
            let lower = g - spread * h;
            if lower < 1.0 {
                heap.push(Cell { lower, axis: cell.axis, sign: cell.sign, center, half: h });
            }
        }
    }
    Certified::No
}
