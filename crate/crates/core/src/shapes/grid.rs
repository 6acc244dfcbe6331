use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::Shape;
use crate::error::{Error, Result};

/// Values on a regular grid; the first axis varies fastest in `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    origin: Vec<f64>,
    spacing: f64,
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(origin: Vec<f64>, spacing: f64, dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!("spacing must be positive, got {spacing}")));
        }
        if origin.len() != dims.len() || dims.is_empty() {
            return Err(Error::DimensionMismatch { expected: dims.len(), got: origin.len() });
        }
        let n: usize = dims.iter().product();
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: values.len() });
        }
        if values.iter().chain(&origin).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { origin, spacing, dims, values })
    }

    /// Grid with an odd number of nodes per axis, centered on the middle of the box.
    pub(crate) fn covering(lo: &[f64], hi: &[f64], pad: f64, resolution: usize) -> Result<(Vec<f64>, f64, Vec<usize>)> {
        if resolution < 3 {
            return Err(Error::ResolutionTooCoarse(format!("resolution {resolution} < 3")));
        }
        let ext: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a + 2.0 * pad).collect();
        let longest = ext.iter().cloned().fold(0.0, f64::max);
        let h = longest / (resolution - 1) as f64;
        let dims: Vec<usize> = ext
            .iter()
            .map(|e| {
                let half = (e / (2.0 * h)).ceil() as usize;
                2 * half + 1
            })
            .collect();
        let origin: Vec<f64> = lo
            .iter()
            .zip(hi)
            .zip(&dims)
            .map(|((a, b), n)| 0.5 * (a + b) - h * ((n - 1) / 2) as f64)
            .collect();
        Ok((origin, h, dims))
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|n| {
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).rev().fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + self.spacing * i as f64)
            .collect()
    }

    pub fn is_boundary_node(&self, flat: usize) -> bool {
        self.multi_index(flat).iter().zip(&self.dims).any(|(&i, &n)| i == 0 || i + 1 == n)
    }

    pub fn get2(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix + self.dims[0] * iy]
    }

    pub(crate) fn extent(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = self
            .origin
            .iter()
            .zip(&self.dims)
            .map(|(o, n)| o + self.spacing * (n - 1) as f64)
            .collect();
        (self.origin.clone(), hi)
    }

    /// Bilinear interpolation of a two-dimensional field; clamps outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        if self.dims.len() != 2 || x.len() != 2 {
            return Err(Error::Unsupported("interpolation is two-dimensional only".into()));
        }
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..2 {
            let t = ((x[k] - self.origin[k]) / self.spacing).clamp(0.0, (self.dims[k] - 1) as f64);
            let i = (t.floor() as usize).min(self.dims[k].saturating_sub(2));
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let (i, j) = (base[0], base[1]);
        let i1 = (i + 1).min(self.dims[0] - 1);
        let j1 = (j + 1).min(self.dims[1] - 1);
        let (fx, fy) = (frac[0], frac[1]);
        Ok(self.get2(i, j) * (1.0 - fx) * (1.0 - fy)
            + self.get2(i1, j) * fx * (1.0 - fy)
            + self.get2(i, j1) * (1.0 - fx) * fy
            + self.get2(i1, j1) * fx * fy)
    }

    /// Text form: a header `grid <n1> <n2> ... spacing=<h> origin=<o1>,<o2>,...`,
    /// then one line per row of the first axis.
    pub fn to_text(&self) -> String {
        let mut s = String::from("grid");
        for n in &self.dims {
            write!(s, " {n}").unwrap();
        }
        let origin: Vec<String> = self.origin.iter().map(|o| format!("{o:?}")).collect();
        writeln!(s, " spacing={:?} origin={}", self.spacing, origin.join(",")).unwrap();
        for row in self.values.chunks(self.dims[0]) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        let mut toks = header.split_whitespace();
        if toks.next() != Some("grid") {
            return Err(perr(hline, "header must start with 'grid'"));
        }
        let mut dims = Vec::new();
        let mut spacing = None;
        let mut origin = None;
        for t in toks {
            if let Some(v) = t.strip_prefix("spacing=") {
                spacing = Some(v.parse::<f64>().map_err(|_| perr(hline, "bad spacing"))?);
            } else if let Some(v) = t.strip_prefix("origin=") {
                let o: std::result::Result<Vec<f64>, _> = v.split(',').map(str::parse::<f64>).collect();
                origin = Some(o.map_err(|_| perr(hline, "bad origin"))?);
            } else {
                dims.push(t.parse::<usize>().map_err(|_| perr(hline, "bad dimension"))?);
            }
        }
        let spacing = spacing.ok_or_else(|| perr(hline, "missing spacing"))?;
        let origin = origin.ok_or_else(|| perr(hline, "missing origin"))?;
        let mut values = Vec::new();
        for (i, l) in lines {
            for t in l.split_whitespace() {
                values.push(t.parse::<f64>().map_err(|_| perr(i, "bad value"))?);
            }
        }
        GridField::new(origin, spacing, dims, values)
    }

    /// Squared Euclidean distance (in world units) from each node to the nearest
    /// node where `mask` is false. Separable exact transform.
    pub(crate) fn distance_to_false(&self, mask: &[bool]) -> Vec<f64> {
        let big = 1e30;
        let mut f: Vec<f64> = mask.iter().map(|&m| if m { big } else { 0.0 }).collect();
        let mut stride = 1;
        for &n in &self.dims {
            let total = f.len();
            let block = stride * n;
            let lines: Vec<usize> = (0..total).filter(|i| (i % block) < stride).collect();
            let updates: Vec<(usize, Vec<f64>)> = lines
                .par_iter()
                .map(|&start| {
                    let col: Vec<f64> = (0..n).map(|k| f[start + k * stride]).collect();
                    (start, squared_dt_1d(&col))
                })
                .collect();
            for (start, col) in updates {
                for (k, v) in col.into_iter().enumerate() {
                    f[start + k * stride] = v;
                }
            }
            stride = block;
        }
        let h2 = self.spacing * self.spacing;
        f.into_iter().map(|v| v * h2).collect()
    }
}

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas).
fn squared_dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let cross = |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for q in 1..n {
        let mut s = cross(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = cross(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *out = (q as f64 - p as f64).powi(2) + f[p];
    }
    d
}

fn bounded(shape: &Shape) -> Result<()> {
    let (lo, hi) = shape.bounding_box();
    if lo.iter().chain(&hi).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("shape must be bounded".into()))
    }
}

fn distance_grid(shape: &Shape, pad: f64, resolution: usize) -> Result<(GridField, Vec<f64>)> {
    bounded(shape)?;
    let (lo, hi) = shape.bounding_box();
    let (origin, h, dims) = GridField::covering(&lo, &hi, pad, resolution)?;
    let n: usize = dims.iter().product();
    let template = GridField::new(origin, h, dims, vec![0.0; n])?;
    let dist: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| shape.distance_to(&template.node(i)))
        .collect::<Result<_>>()?;
    Ok((template, dist))
}

/// Occupancy (1 inside, 0 outside) of the open offset `{x : d(x) < r}` on a grid
/// whose longest axis has `resolution` nodes.
pub fn offset_field(shape: &Shape, r: f64, resolution: usize) -> Result<GridField> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("offset radius must be positive, got {r}")));
    }
    let (mut grid, dist) = distance_grid(shape, 1.5 * r, resolution)?;
    if grid.spacing > r / 8.0 {
        return Err(Error::ResolutionTooCoarse(format!("spacing {} exceeds r/8 = {}", grid.spacing, r / 8.0)));
    }
    grid.values = dist.iter().map(|&d| if d < r { 1.0 } else { 0.0 }).collect();
    Ok(grid)
}

/// Occupancy of the double offset: points of the `r`-offset whose distance to its
/// complement is at least `s`.
pub fn double_offset_field(shape: &Shape, r: f64, s: f64, resolution: usize) -> Result<GridField> {
    if !(s > 0.0 && s <= r) {
        return Err(Error::InvalidArgument(format!("need 0 < s <= r, got s={s}, r={r}")));
    }
    let (mut grid, dist) = distance_grid(shape, 1.5 * r, resolution)?;
    if grid.spacing > r / 8.0 {
        return Err(Error::ResolutionTooCoarse(format!("spacing {} exceeds r/8 = {}", grid.spacing, r / 8.0)));
    }
    let inside: Vec<bool> = dist.iter().map(|&d| d < r).collect();
    let to_outside = grid.distance_to_false(&inside);
    grid.values = inside
        .iter()
        .zip(&to_outside)
        .map(|(&ins, &d2)| if ins && d2 >= s * s { 1.0 } else { 0.0 })
        .collect();
    Ok(grid)
}
