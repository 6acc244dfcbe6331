//! Weighted Rips, ambient Čech and restricted Čech complexes.

mod restricted;

pub use restricted::{restricted_intersection, Certified, RestrictedMethod};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{check_dims, dist, scaled_ball_value, Point, INTERSECTION_TOL};
use crate::shapes::Shape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Point>,
    radii: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>, radii: Option<Vec<f64>>) -> Result<Self> {
        check_dims(&points)?;
        if let Some(r) = &radii {
            if r.len() != points.len() {
                return Err(Error::DimensionMismatch { expected: points.len(), got: r.len() });
            }
            if let Some((index, &value)) = r.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::NonPositiveRadius { index, value });
            }
        }
        Ok(Self { points, radii })
    }

    pub fn with_radii(self, radii: Vec<f64>) -> Result<Self> {
        Self::new(self.points, Some(radii))
    }

    pub fn with_constant_radius(self, r: f64) -> Result<Self> {
        let n = self.points.len();
        self.with_radii(vec![r; n])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn radii(&self) -> Result<&[f64]> {
        self.radii.as_deref().ok_or(Error::MissingRadii)
    }

    pub fn has_radii(&self) -> bool {
        self.radii.is_some()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// One point per line, whitespace-separated; the last column is the radius
    /// when `radii_inline` is set. Lines starting with `#` are comments.
    pub fn from_text(text: &str, radii_inline: bool) -> Result<Self> {
        let mut pts = Vec::new();
        let mut radii = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let mut vals = vals.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            if radii_inline {
                let r = vals.pop().ok_or(Error::Parse { line: i + 1, msg: "missing radius".into() })?;
                radii.push(r);
            }
            pts.push(Point::new(vals).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?);
        }
        if pts.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::new(pts, radii_inline.then_some(radii))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, p) in self.points.iter().enumerate() {
            let mut cols: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
            if let Some(r) = &self.radii {
                cols.push(format!("{:?}", r[i]));
            }
            s.push_str(&cols.join(" "));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    n_vertices: usize,
    /// Sorted by dimension, then lexicographically.
    simplices: Vec<Vec<usize>>,
    max_dim: usize,
    /// Intersection tests that could not be certified either way (treated as absent).
    pub indeterminate: usize,
}

impl SimplicialComplex {
    /// Validates face closure, duplicates and vertex coverage, then sorts.
    pub fn new(n_vertices: usize, mut simplices: Vec<Vec<usize>>, max_dim: usize) -> Result<Self> {
        for s in simplices.iter_mut() {
            s.sort_unstable();
            if s.is_empty() || s.windows(2).any(|w| w[0] == w[1]) || s[s.len() - 1] >= n_vertices {
                return Err(Error::InvalidArgument(format!("bad simplex {s:?}")));
            }
            if s.len() > max_dim + 1 {
                return Err(Error::InvalidArgument(format!("simplex {s:?} exceeds max_dim {max_dim}")));
            }
        }
        simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        if simplices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate simplex".into()));
        }
        let set: HashSet<&[usize]> = simplices.iter().map(|s| s.as_slice()).collect();
        for v in 0..n_vertices {
            if !set.contains(&[v][..]) {
                return Err(Error::NotFaceClosed(vec![v]));
            }
        }
        for s in &simplices {
            if s.len() > 1 {
                for k in 0..s.len() {
                    let face: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
                    if !set.contains(face.as_slice()) {
                        return Err(Error::NotFaceClosed(face));
                    }
                }
            }
        }
        Ok(Self { n_vertices, simplices, max_dim, indeterminate: 0 })
    }

    fn from_sorted(n_vertices: usize, mut simplices: Vec<Vec<usize>>, max_dim: usize) -> Self {
        simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Self { n_vertices, simplices, max_dim, indeterminate: 0 }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Number of simplices of each dimension `0..=max_dim`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.max_dim + 1];
        for s in &self.simplices {
            c[s.len() - 1] += 1;
        }
        c
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        let key = (simplex.len(), simplex);
        self.simplices
            .binary_search_by(|s| (s.len(), s.as_slice()).cmp(&key))
            .is_ok()
    }

    /// Header `complex n=<vertices> maxdim=<k>`, then one simplex per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "complex n={} maxdim={}", self.n_vertices, self.max_dim).unwrap();
        for simplex in &self.simplices {
            let cols: Vec<String> = simplex.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{}", cols.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.into() };
        let mut toks = header.split_whitespace();
        if toks.next() != Some("complex") {
            return Err(perr(hl, "header must start with 'complex'"));
        }
        let mut n = None;
        let mut k = None;
        for t in toks {
            if let Some(v) = t.strip_prefix("n=") {
                n = Some(v.parse::<usize>().map_err(|_| perr(hl, "bad n"))?);
            } else if let Some(v) = t.strip_prefix("maxdim=") {
                k = Some(v.parse::<usize>().map_err(|_| perr(hl, "bad maxdim"))?);
            }
        }
        let n = n.ok_or_else(|| perr(hl, "missing n"))?;
        let k = k.ok_or_else(|| perr(hl, "missing maxdim"))?;
        let mut simplices = Vec::new();
        for (i, l) in lines {
            let s: std::result::Result<Vec<usize>, _> = l.split_whitespace().map(str::parse::<usize>).collect();
            simplices.push(s.map_err(|_| perr(i, "bad vertex index"))?);
        }
        Self::new(n, simplices, k)
    }
}

/// Neighbor lists (higher indices only) of the weighted Rips graph.
fn rips_graph(cloud: &PointCloud) -> Result<Vec<Vec<usize>>> {
    let r = cloud.radii()?;
    let pts = cloud.points();
    Ok((0..pts.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..pts.len())
                .filter(|&j| dist(&pts[i], &pts[j]) < (r[i] + r[j]) * (1.0 - INTERSECTION_TOL))
                .collect()
        })
        .collect())
}

/// Depth-first clique expansion; `accept` is consulted for every candidate of
/// size at least two and must be closed under taking faces.
fn expand_cliques<F>(n: usize, up: &[Vec<usize>], max_dim: usize, accept: F) -> (Vec<Vec<usize>>, usize)
where
    F: Fn(&[usize]) -> Certified + Sync,
{
    let adj: Vec<HashSet<usize>> = up.iter().map(|v| v.iter().copied().collect()).collect();
    let per_root: Vec<(Vec<Vec<usize>>, usize)> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut out = vec![vec![v]];
            let mut undecided = 0;
            let mut sigma = vec![v];
            if max_dim > 0 {
                grow(&mut sigma, &up[v], &adj, max_dim, &accept, &mut out, &mut undecided);
            }
            (out, undecided)
        })
        .collect();
    let undecided = per_root.iter().map(|p| p.1).sum();
    (per_root.into_iter().flat_map(|p| p.0).collect(), undecided)
}

fn grow<F>(
    sigma: &mut Vec<usize>,
    cands: &[usize],
    adj: &[HashSet<usize>],
    max_dim: usize,
    accept: &F,
    out: &mut Vec<Vec<usize>>,
    undecided: &mut usize,
) where
    F: Fn(&[usize]) -> Certified,
{
    for (k, &v) in cands.iter().enumerate() {
        sigma.push(v);
        match accept(sigma) {
            Certified::Yes => {
                out.push(sigma.clone());
                if sigma.len() <= max_dim {
                    let next: Vec<usize> = cands[k + 1..].iter().copied().filter(|w| adj[v].contains(w)).collect();
                    if !next.is_empty() {
                        grow(sigma, &next, adj, max_dim, accept, out, undecided);
                    }
                }
            }
            Certified::Indeterminate => *undecided += 1,
            Certified::No => {}
        }
        sigma.pop();
    }
}

/// Clique complex of the graph with edges `|x_i - x_j| < r_i + r_j`, with margin [`INTERSECTION_TOL`].
pub fn build_rips(cloud: &PointCloud, max_dim: usize) -> Result<SimplicialComplex> {
    let up = rips_graph(cloud)?;
    let (s, _) = expand_cliques(cloud.len(), &up, max_dim, |_| Certified::Yes);
    Ok(SimplicialComplex::from_sorted(cloud.len(), s, max_dim))
}

/// Simplices whose open balls share a point of R^d, with margin [`INTERSECTION_TOL`].
pub fn build_cech_ambient(cloud: &PointCloud, max_dim: usize) -> Result<SimplicialComplex> {
    let up = rips_graph(cloud)?;
    let r = cloud.radii()?;
    let pts: Vec<&[f64]> = cloud.points().iter().map(|p| p.coords()).collect();
    let (s, _) = expand_cliques(cloud.len(), &up, max_dim, |sigma| {
        let sp: Vec<&[f64]> = sigma.iter().map(|&i| pts[i]).collect();
        let sr: Vec<f64> = sigma.iter().map(|&i| r[i]).collect();
        if scaled_ball_value(&sp, &sr).0 < 1.0 - INTERSECTION_TOL {
            Certified::Yes
        } else {
            Certified::No
        }
    });
    Ok(SimplicialComplex::from_sorted(cloud.len(), s, max_dim))
}

/// Simplices whose restricted balls `{y in X : |y - x_i| < r_i}` share a point.
/// Tests that cannot be certified are left out and counted in `indeterminate`.
pub fn build_cech_restricted(
    cloud: &PointCloud,
    shape: &Shape,
    max_dim: usize,
    method: RestrictedMethod,
) -> Result<SimplicialComplex> {
    let r = cloud.radii()?;
    for (index, (p, ri)) in cloud.points().iter().zip(r).enumerate() {
        if shape.distance_to(p)? >= *ri {
            return Err(Error::EmptyRestrictedBall { index });
        }
    }
    let up = rips_graph(cloud)?;
    let pts: Vec<&[f64]> = cloud.points().iter().map(|p| p.coords()).collect();
    let (s, undecided) = expand_cliques(cloud.len(), &up, max_dim, |sigma| {
        let sp: Vec<&[f64]> = sigma.iter().map(|&i| pts[i]).collect();
        let sr: Vec<f64> = sigma.iter().map(|&i| r[i]).collect();
        restricted_intersection(shape, &sp, &sr, method).unwrap_or(Certified::Indeterminate)
    });
    let mut c = SimplicialComplex::from_sorted(cloud.len(), s, max_dim);
    c.indeterminate = undecided;
    Ok(c)
}

pub fn is_subcomplex(a: &SimplicialComplex, b: &SimplicialComplex) -> Result<bool> {
    if a.n_vertices != b.n_vertices {
        return Err(Error::VertexMismatch(a.n_vertices, b.n_vertices));
    }
    Ok(a.simplices.iter().all(|s| b.contains(s)))
}

/// First simplex of `a` missing from `b`, for diagnostics.
pub fn first_missing(a: &SimplicialComplex, b: &SimplicialComplex) -> Option<Vec<usize>> {
    a.simplices.iter().find(|s| !b.contains(s)).cloned()
}
