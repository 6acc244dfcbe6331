use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complexes::SimplicialComplex;
use crate::error::{Error, Result};

/// Betti numbers over GF(2), indexed by dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Alternating sum.
    pub fn euler_characteristic(&self) -> i64 {
        self.0.iter().enumerate().map(|(k, b)| if k % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum()
    }

    /// Compares against `expected`, padding the shorter vector with zeros.
    pub fn matches(&self, expected: &[usize]) -> bool {
        let n = self.0.len().max(expected.len());
        (0..n).all(|k| self.0.get(k).copied().unwrap_or(0) == expected.get(k).copied().unwrap_or(0))
    }
}

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Symmetric difference of two sorted index lists.
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Rank of the matrix given by sorted columns; columns listed in `skip` are known
/// to reduce to zero. Returns the rank and the pivot rows found.
fn reduce(columns: &[Vec<usize>], skip: &[bool]) -> (usize, Vec<usize>) {
    let mut reduced: Vec<Vec<usize>> = Vec::new();
    let mut by_pivot: HashMap<usize, usize> = HashMap::new();
    let mut pivots = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if skip[j] || col.is_empty() {
            continue;
        }
        let mut c = col.clone();
        while let Some(&low) = c.last() {
            match by_pivot.get(&low) {
                Some(&k) => c = add_columns(&c, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = c.last() {
            by_pivot.insert(low, reduced.len());
            reduced.push(c);
            pivots.push(low);
        }
    }
    (reduced.len(), pivots)
}

/// Betti numbers `b_0..=b_up_to` of `complex` over GF(2).
///
/// Reduction runs on coboundary matrices from low to high dimension with clearing.
/// `b_k` only accounts for simplices up to the complex's `max_dim`, so it is the
/// Betti number of the full complex when `k < max_dim`.
pub fn betti_simplicial(complex: &SimplicialComplex, up_to: usize) -> Result<BettiVector> {
    let top = complex.max_dim();
    let mut by_dim: Vec<Vec<&[usize]>> = vec![Vec::new(); top + 1];
    for s in complex.simplices() {
        by_dim[s.len() - 1].push(s.as_slice());
    }
    let index: Vec<HashMap<&[usize], usize>> =
        by_dim.iter().map(|ss| ss.iter().enumerate().map(|(i, s)| (*s, i)).collect()).collect();

    // cofaces[k][i]: indices of (k+1)-simplices having simplex i of dim k as a facet
    let mut cofaces: Vec<Vec<Vec<usize>>> = by_dim.iter().map(|ss| vec![Vec::new(); ss.len()]).collect();
    let mut face = Vec::with_capacity(top + 1);
    for k in 1..=top {
        for (t, s) in by_dim[k].iter().enumerate() {
            for drop in 0..s.len() {
                face.clear();
                face.extend(s.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, v)| *v));
                let f = *index[k - 1].get(face.as_slice()).ok_or_else(|| Error::NotFaceClosed(face.clone()))?;
                cofaces[k - 1][f].push(t);
            }
        }
    }

    // rank[k] = rank of the boundary map from dimension k to k - 1
    let mut rank = vec![0usize; top + 2];
    let mut cleared = vec![false; by_dim[0].len()];
    let last = (up_to + 1).min(top);
    for k in 0..last {
        let (r, pivots) = reduce(&cofaces[k], &cleared);
        rank[k + 1] = r;
        cleared = vec![false; by_dim[k + 1].len()];
        for p in pivots {
            cleared[p] = true;
        }
    }
    let betti = (0..=up_to)
        .map(|k| {
            let n = by_dim.get(k).map_or(0, |s| s.len());
            n - rank.get(k).copied().unwrap_or(0) - rank.get(k + 1).copied().unwrap_or(0)
        })
        .collect();
    Ok(BettiVector(betti))
}

/// Betti numbers of a planar set given as a node mask, using the cubical complex
/// with a vertex per node, an edge per pair of axis neighbours and a square per
/// fully present 2x2 block.
pub fn betti_grid_2d(mask: &[bool], dims: [usize; 2]) -> Result<BettiVector> {
    let [nx, ny] = dims;
    if mask.len() != nx * ny {
        return Err(Error::DimensionMismatch { expected: nx * ny, got: mask.len() });
    }
    let at = |i: usize, j: usize| mask[i + nx * j];
    let mut parent: Vec<usize> = (0..mask.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let (mut v, mut e, mut f) = (0i64, 0i64, 0i64);
    let mut components = 0usize;
    for j in 0..ny {
        for i in 0..nx {
            if !at(i, j) {
                continue;
            }
            v += 1;
            components += 1;
            let me = i + nx * j;
            let mut link = |other: usize, p: &mut Vec<usize>| {
                let (a, b) = (find(p, me), find(p, other));
                if a != b {
                    p[a] = b;
                    components -= 1;
                }
            };
            if i > 0 && at(i - 1, j) {
                e += 1;
                link(me - 1, &mut parent);
            }
            if j > 0 && at(i, j - 1) {
                e += 1;
                link(me - nx, &mut parent);
            }
            if i > 0 && j > 0 && at(i - 1, j) && at(i, j - 1) && at(i - 1, j - 1) {
                f += 1;
            }
        }
    }
    let chi = v - e + f;
    let b1 = components as i64 - chi;
    Ok(BettiVector(vec![components, b1 as usize]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{build_cech_ambient, build_rips, PointCloud};
    use crate::geometry::Point;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense GF(2) rank by Gaussian elimination.
    fn dense_rank(mut rows: Vec<Vec<bool>>) -> usize {
        let mut rank = 0;
        let ncols = rows.first().map_or(0, |r| r.len());
        for c in 0..ncols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r][c] {
                    let pivot = rows[rank].clone();
                    for (x, y) in rows[r].iter_mut().zip(pivot) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn dense_betti(c: &SimplicialComplex) -> Vec<usize> {
        let top = c.max_dim();
        let by_dim: Vec<Vec<&Vec<usize>>> =
            (0..=top).map(|k| c.simplices().iter().filter(|s| s.len() == k + 1).collect()).collect();
        let mut rank = vec![0; top + 2];
        for k in 1..=top {
            let rows: Vec<Vec<bool>> = by_dim[k - 1]
                .iter()
                .map(|f| by_dim[k].iter().map(|s| f.iter().all(|v| s.contains(v))).collect())
                .collect();
            rank[k] = dense_rank(rows);
        }
        (0..top).map(|k| by_dim[k].len() - rank[k] - rank[k + 1]).collect()
    }

    fn complex(n: usize, faces: &[&[usize]], max_dim: usize) -> SimplicialComplex {
        let mut all = std::collections::BTreeSet::new();
        for f in faces {
            for mask in 1u32..(1 << f.len()) {
                let s: Vec<usize> = f.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).collect();
                all.insert(s);
            }
        }
        for v in 0..n {
            all.insert(vec![v]);
        }
        SimplicialComplex::new(n, all.into_iter().collect(), max_dim).unwrap()
    }

    #[test]
    fn classic_spaces() {
        let circle = complex(4, &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]], 2);
        assert_eq!(betti_simplicial(&circle, 1).unwrap().0, vec![1, 1]);
        let disk = complex(3, &[&[0, 1, 2]], 2);
        assert_eq!(betti_simplicial(&disk, 1).unwrap().0, vec![1, 0]);
        let sphere = complex(4, &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]], 3);
        assert_eq!(betti_simplicial(&sphere, 2).unwrap().0, vec![1, 0, 1]);
        let two_points = complex(2, &[], 1);
        assert_eq!(betti_simplicial(&two_points, 0).unwrap().0, vec![2]);
    }

    #[test]
    fn torus_and_projective_plane() {
        // 7-vertex torus
        let torus: Vec<[usize; 3]> = (0..7)
            .flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 2) % 7, (i + 3) % 7]])
            .collect();
        let faces: Vec<&[usize]> = torus.iter().map(|f| f.as_slice()).collect();
        let t = complex(7, &faces, 3);
        assert_eq!(betti_simplicial(&t, 2).unwrap().0, vec![1, 2, 1]);
        // 6-vertex projective plane has b1 = b2 = 1 over GF(2)
        let rp2: [[usize; 3]; 10] = [
            [0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 1, 5],
            [1, 2, 4], [2, 3, 5], [1, 3, 4], [2, 4, 5], [1, 3, 5],
        ];
        let faces: Vec<&[usize]> = rp2.iter().map(|f| f.as_slice()).collect();
        let p = complex(6, &faces, 3);
        assert_eq!(betti_simplicial(&p, 2).unwrap().0, vec![1, 1, 1]);
    }

    #[test]
    fn rips_of_circle_sample() {
        let pts = (0..40)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 40.0;
                Point::from([t.cos(), t.sin()])
            })
            .collect();
        let thin = PointCloud::new(pts, Some(vec![0.1; 40])).unwrap();
        assert_eq!(betti_simplicial(&build_rips(&thin, 2).unwrap(), 1).unwrap().0, vec![1, 1]);
        let fat = thin.with_constant_radius(1.05).unwrap();
        assert_eq!(betti_simplicial(&build_rips(&fat, 2).unwrap(), 1).unwrap().0, vec![1, 0]);
    }

    #[test]
    fn grid_annulus() {
        let n = 41;
        let mut mask = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 - 20.0, j as f64 - 20.0);
                let r = (x * x + y * y).sqrt();
                mask[i + n * j] = (8.0..15.0).contains(&r);
            }
        }
        assert_eq!(betti_grid_2d(&mask, [n, n]).unwrap().0, vec![1, 1]);
        let disk: Vec<bool> = (0..n * n).map(|k| ((k % n) as f64 - 20.0).hypot((k / n) as f64 - 20.0) < 10.0).collect();
        assert_eq!(betti_grid_2d(&disk, [n, n]).unwrap().0, vec![1, 0]);
        assert!(betti_grid_2d(&disk, [n, n + 1]).is_err());
    }

    #[test]
    fn display_and_matches() {
        let b = BettiVector(vec![1, 1, 0]);
        assert_eq!(b.to_string(), "(1, 1, 0)");
        assert!(b.matches(&[1, 1]));
        assert!(!b.matches(&[1, 0]));
        assert_eq!(b.euler_characteristic(), 0);
    }

    fn random_cloud(seed: u64, n: usize, r: f64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n).map(|_| Point::new(vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).unwrap()).collect();
        PointCloud::new(pts, Some(vec![r; n])).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sparse_matches_dense(seed in 0u64..10_000, n in 3usize..14, r in 0.05f64..0.4) {
            let k = build_rips(&random_cloud(seed, n, r), 3).unwrap();
            prop_assert_eq!(betti_simplicial(&k, 2).unwrap().0, dense_betti(&k));
        }

        #[test]
        fn euler_characteristic_agrees(seed in 0u64..10_000, n in 3usize..25, r in 0.05f64..0.3, top in 1usize..4) {
            let k = build_cech_ambient(&random_cloud(seed, n, r), top).unwrap();
            let b = betti_simplicial(&k, top).unwrap();
            let chi: i64 = k.counts().iter().enumerate().map(|(d, c)| if d % 2 == 0 { *c as i64 } else { -(*c as i64) }).sum();
            prop_assert_eq!(b.euler_characteristic(), chi);
        }
    }
}
