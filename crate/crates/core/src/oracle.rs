//! Independent ground truth: grid coverage, raster connectivity and
//! brute-force homology ranks. Shares no code with the persistence engine.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::geometry::{ConvexPolygon, Point};
use crate::rips::FilteredComplex;
use crate::scenario::Scenario;

/// Largest complex handed to the brute-force rank computation.
pub const BRUTE_FORCE_MAX_SIMPLICES: usize = 2000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("no raster cell survives in the restricted domain (r_hat = {r_hat})")]
    EmptyRestrictedDomain { r_hat: f64 },
    #[error("connectivity of an empty mask")]
    EmptyMask,
    #[error("grid step {step} exceeds the allowed maximum {max}")]
    GridTooCoarse { step: f64, max: f64 },
    #[error("complex has {got} simplices, brute force is limited to {max}")]
    SizeExceeded { got: usize, max: usize },
}

/// Raster of cell centers `origin + (i + ½, j + ½)·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMask {
    origin: Point,
    step: f64,
    nx: usize,
    ny: usize,
    cells: Vec<bool>,
}

impl GridMask {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.nx + i]
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + (i as f64 + 0.5) * self.step,
            self.origin[1] + (j as f64 + 0.5) * self.step,
        ]
    }

    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.ny)
            .flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
            .map(|(i, j)| self.center(i, j))
    }

    /// Mask from explicit cells, row-major with `ny` rows of `nx`.
    pub fn from_cells(origin: Point, step: f64, nx: usize, ny: usize, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), nx * ny);
        GridMask { origin, step, nx, ny, cells }
    }
}

/// Cells of `D − N_r̂(∂D)`: centers inside `D` at boundary distance `> r̂`.
pub fn restricted_mask(domain: &ConvexPolygon, r_hat: f64, step: f64) -> Result<GridMask, OracleError> {
    let (lo, hi) = domain.bounding_box();
    let nx = ((hi[0] - lo[0]) / step).ceil().max(1.0) as usize;
    let ny = ((hi[1] - lo[1]) / step).ceil().max(1.0) as usize;
    let mut m = GridMask { origin: lo, step, nx, ny, cells: vec![false; nx * ny] };
    for j in 0..ny {
        for i in 0..nx {
            let c = m.center(i, j);
            m.cells[j * nx + i] = domain.contains(c) && domain.boundary_distance(c) > r_hat;
        }
    }
    if m.count() == 0 {
        return Err(OracleError::EmptyRestrictedDomain { r_hat });
    }
    Ok(m)
}

/// Single 4-connected component.
pub fn connectivity_check(mask: &GridMask) -> Result<bool, OracleError> {
    let start = mask.cells.iter().position(|&c| c).ok_or(OracleError::EmptyMask)?;
    let mut seen = vec![false; mask.cells.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut reached = 1usize;
    while let Some(k) = queue.pop_front() {
        let (i, j) = (k % mask.nx, k / mask.nx);
        let mut nbrs = [None; 4];
        if i > 0 {
            nbrs[0] = Some(k - 1);
        }
        if i + 1 < mask.nx {
            nbrs[1] = Some(k + 1);
        }
        if j > 0 {
            nbrs[2] = Some(k - mask.nx);
        }
        if j + 1 < mask.ny {
            nbrs[3] = Some(k + mask.nx);
        }
        for n in nbrs.into_iter().flatten() {
            if mask.cells[n] && !seen[n] {
                seen[n] = true;
                reached += 1;
                queue.push_back(n);
            }
        }
    }
    Ok(reached == mask.count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub cells: usize,
    pub uncovered: Vec<Point>,
    pub step: f64,
}

impl CoverageReport {
    /// Covered at grid resolution: no uncovered cell center.
    pub fn covered(&self) -> bool {
        self.uncovered.is_empty()
    }

    /// Uncovered centers as CSV `x,y`.
    pub fn witness_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.uncovered {
            let _ = writeln!(out, "{},{}", p[0], p[1]);
        }
        out
    }
}

/// Rasterizes `D − N_r̂(∂D)` and marks cells whose centers lie within `r_c`
/// of some position.
pub fn grid_coverage_check(positions: &[Point], r_c: f64, s: &Scenario, grid_step: f64) -> Result<CoverageReport, OracleError> {
    let max = r_c / 20.0;
    if !(grid_step > 0.0 && grid_step <= max * (1.0 + 1e-12)) {
        return Err(OracleError::GridTooCoarse { step: grid_step, max });
    }
    let mask = restricted_mask(s.domain(), s.r_hat(), grid_step)?;
    let mut covered = vec![false; mask.cells.len()];
    let r2 = r_c * r_c * (1.0 + 1e-12);
    for p in positions {
        let i0 = (((p[0] - r_c - mask.origin[0]) / grid_step).floor().max(0.0)) as usize;
        let j0 = (((p[1] - r_c - mask.origin[1]) / grid_step).floor().max(0.0)) as usize;
        let i1 = (((p[0] + r_c - mask.origin[0]) / grid_step).ceil().max(0.0) as usize).min(mask.nx);
        let j1 = (((p[1] + r_c - mask.origin[1]) / grid_step).ceil().max(0.0) as usize).min(mask.ny);
        for j in j0..j1 {
            for i in i0..i1 {
                let c = mask.center(i, j);
                let (dx, dy) = (c[0] - p[0], c[1] - p[1]);
                if dx * dx + dy * dy <= r2 {
                    covered[j * mask.nx + i] = true;
                }
            }
        }
    }
    let mut uncovered = Vec::new();
    for j in 0..mask.ny {
        for i in 0..mask.nx {
            let k = j * mask.nx + i;
            if mask.cells[k] && !covered[k] {
                uncovered.push(mask.center(i, j));
            }
        }
    }
    Ok(CoverageReport { cells: mask.count(), uncovered, step: grid_step })
}

type Vector = Vec<BigRational>;

/// Row echelon basis of the span of `vectors`, each of length `dim`.
fn echelon(vectors: impl IntoIterator<Item = Vector>) -> Vec<(usize, Vector)> {
    let mut basis: Vec<(usize, Vector)> = Vec::new();
    for mut v in vectors {
        for (piv, b) in &basis {
            if !v[*piv].is_zero() {
                let f = v[*piv].clone() / b[*piv].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        if let Some(piv) = v.iter().position(|x| !x.is_zero()) {
            basis.push((piv, v));
        }
    }
    basis
}

fn rank(vectors: impl IntoIterator<Item = Vector>) -> usize {
    echelon(vectors).len()
}

/// Kernel basis of the linear map whose columns are `cols` (each of length `rows`).
fn kernel(cols: &[Vector], rows: usize) -> Vec<Vector> {
    let n = cols.len();
    // reduced row echelon form of the rows × n matrix
    let mut m: Vec<Vector> = (0..rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = BigRational::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (row_r, row_i) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (x, y) in row_i.iter_mut().zip(row_r) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let mut out = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); n];
        v[free] = BigRational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row][free].clone();
        }
        out.push(v);
    }
    out
}

/// Rank of `H_p(slice s) → H_p(slice w)`, as `dim(Z_s + B_w) − dim B_w`
/// in the chain group of the slice at `w`. Relative mode quotients by the
/// simplices whose vertices all lie in the fence set.
pub fn brute_force_induced_rank(k: &FilteredComplex, p: usize, s: f64, w: f64, relative: bool) -> Result<usize, OracleError> {
    if k.len() > BRUTE_FORCE_MAX_SIMPLICES {
        return Err(OracleError::SizeExceeded { got: k.len(), max: BRUTE_FORCE_MAX_SIMPLICES });
    }
    let fence = k.fence_vertices();
    let in_slice = |vs: &[usize], value: f64, a: f64| {
        if a < 0.0 {
            vs.len() == 1
        } else {
            value <= a + 1e-12 * a.abs().max(1.0)
        }
    };
    let mut simplices: Vec<(Vec<usize>, f64)> = k
        .simplices()
        .map(|sr| (sr.vertices.iter().map(|&v| v as usize).collect::<Vec<_>>(), sr.value))
        .filter(|(vs, _)| !(relative && vs.iter().all(|v| fence.contains(v))))
        .collect();
    simplices.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
    let chains = |q: usize, a: f64| -> Vec<Vec<usize>> {
        simplices
            .iter()
            .filter(|(vs, val)| vs.len() == q + 1 && in_slice(vs, *val, a))
            .map(|(vs, _)| vs.clone())
            .collect()
    };
    let cp_w = chains(p, w);
    let index: HashMap<Vec<usize>, usize> = cp_w.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let boundary = |sigma: &[usize], target: &HashMap<Vec<usize>, usize>, len: usize| -> Vector {
        let mut v = vec![BigRational::zero(); len];
        if sigma.len() < 2 {
            return v;
        }
        for i in 0..sigma.len() {
            let mut face = sigma.to_vec();
            face.remove(i);
            if let Some(&r) = target.get(&face) {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                v[r] += BigRational::from_integer(BigInt::from(sign));
            }
        }
        v
    };
    // Z_s: kernel of ∂_p on the slice at s, embedded in C_p(slice w)
    let cp_s = chains(p, s);
    let z_s: Vec<Vector> = if p == 0 {
        cp_s.iter()
            .map(|vs| {
                let mut v = vec![BigRational::zero(); cp_w.len()];
                v[index[vs]] = BigRational::one();
                v
            })
            .collect()
    } else {
        let cm_s = chains(p - 1, s);
        let idx_m: HashMap<Vec<usize>, usize> = cm_s.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let cols: Vec<Vector> = cp_s.iter().map(|vs| boundary(vs, &idx_m, cm_s.len())).collect();
        kernel(&cols, cm_s.len())
            .into_iter()
            .map(|coef| {
                let mut v = vec![BigRational::zero(); cp_w.len()];
                for (c, vs) in coef.into_iter().zip(&cp_s) {
                    v[index[vs]] = c;
                }
                v
            })
            .collect()
    };
    let b_w: Vec<Vector> = chains(p + 1, w).iter().map(|vs| boundary(vs, &index, cp_w.len())).collect();
    let rb = rank(b_w.iter().cloned());
    let rzb = rank(b_w.into_iter().chain(z_s));
    Ok(rzb - rb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FiniteMetric;
    use crate::rips::build_filtered_rips;
    use crate::scenario::{Radii, Scenario};
    use std::collections::BTreeSet;

    fn square_complex() -> FilteredComplex {
        let d = FiniteMetric::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        build_filtered_rips(&d, &BTreeSet::new(), 3, 3.0).unwrap()
    }

    #[test]
    fn square_ranks() {
        let k = square_complex();
        assert_eq!(brute_force_induced_rank(&k, 1, 1.1, 1.3, false).unwrap(), 1);
        assert_eq!(brute_force_induced_rank(&k, 1, 1.1, 1.5, false).unwrap(), 0);
        assert_eq!(brute_force_induced_rank(&k, 1, 0.9, 0.9, false).unwrap(), 0);
        assert_eq!(brute_force_induced_rank(&k, 0, 0.5, 0.5, false).unwrap(), 4);
        assert_eq!(brute_force_induced_rank(&k, 0, 0.5, 1.0, false).unwrap(), 1);
        assert_eq!(brute_force_induced_rank(&k, 0, -1.0, -1.0, false).unwrap(), 4);
    }

    #[test]
    fn empty_complex_rank() {
        let k = FilteredComplex::from_simplices(0, &[], &BTreeSet::new()).unwrap();
        assert_eq!(brute_force_induced_rank(&k, 1, 0.0, 1.0, false).unwrap(), 0);
    }

    #[test]
    fn relative_h0_with_fence() {
        let d = FiniteMetric::new(3, (0..9).map(|k| if k / 3 == k % 3 { 0.0 } else { 1.0 }).collect()).unwrap();
        let fence: BTreeSet<usize> = [0, 1].into_iter().collect();
        let k = build_filtered_rips(&d, &fence, 2, 2.0).unwrap();
        assert_eq!(brute_force_induced_rank(&k, 0, 0.0, 0.5, true).unwrap(), 1);
        assert_eq!(brute_force_induced_rank(&k, 0, 0.0, 1.0, true).unwrap(), 0);
    }

    fn disk_scenario(side: f64, sensors: Vec<Point>, r_c: f64) -> Scenario {
        let radii = Radii { r_c, r_s: 0.01, r_w: 0.01 * 10f64.sqrt(), r_f: 0.2 };
        Scenario::new(ConvexPolygon::square(side), radii, 0.0, sensors).unwrap()
    }

    #[test]
    fn single_sensor_coverage() {
        let s = disk_scenario(1.0, vec![[0.5, 0.5]], 0.8);
        let rep = grid_coverage_check(s.sensors(), 0.8, &s, 0.02).unwrap();
        assert!(rep.covered());
        let rep = grid_coverage_check(&[], 0.8, &s, 0.02).unwrap();
        assert_eq!(rep.uncovered.len(), rep.cells);
        assert!(grid_coverage_check(s.sensors(), 0.8, &s, 0.05).is_err());
    }

    fn hex(side: f64, spacing: f64) -> Vec<Point> {
        let dy = spacing * 3f64.sqrt() / 2.0;
        let mut out = Vec::new();
        let mut row = 0;
        let mut y = 0.0;
        while y <= side {
            let mut x = if row % 2 == 0 { 0.0 } else { spacing / 2.0 };
            while x <= side {
                out.push([x, y]);
                x += spacing;
            }
            y += dy;
            row += 1;
        }
        out
    }

    #[test]
    fn hex_packing_threshold() {
        let r_c = 0.1;
        let side = 2.0;
        let dense = disk_scenario(side, hex(side, 3f64.sqrt() * r_c * 0.98), r_c);
        assert!(grid_coverage_check(dense.sensors(), r_c, &dense, 0.005).unwrap().covered());
        let sparse = disk_scenario(side, hex(side, 2.2 * r_c), r_c);
        let rep = grid_coverage_check(sparse.sensors(), r_c, &sparse, 0.005).unwrap();
        assert!(!rep.covered());
        assert!(rep.witness_csv().starts_with("x,y\n"));
    }

    #[test]
    fn connectivity_examples() {
        let full = GridMask::from_cells([0.0, 0.0], 1.0, 3, 3, vec![true; 9]);
        assert!(connectivity_check(&full).unwrap());
        let split = GridMask::from_cells([0.0, 0.0], 1.0, 3, 1, vec![true, false, true]);
        assert!(!connectivity_check(&split).unwrap());
        let diag = GridMask::from_cells([0.0, 0.0], 1.0, 2, 2, vec![true, false, false, true]);
        assert!(!connectivity_check(&diag).unwrap());
        let empty = GridMask::from_cells([0.0, 0.0], 1.0, 1, 1, vec![false]);
        assert_eq!(connectivity_check(&empty), Err(OracleError::EmptyMask));
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [4.0, 0.0], [1.0, 3.0]]).unwrap();
        assert!(connectivity_check(&restricted_mask(&tri, 0.2, 0.05).unwrap()).unwrap());
    }
}
