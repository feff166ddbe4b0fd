//! Finite metric spaces, correspondences and their distortion.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{dist, Point, GEOM_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("distance matrix has {got} entries, expected {n}x{n}")]
    Shape { n: usize, got: usize },
    #[error("d({i},{j}) = {value} is negative or not finite")]
    BadEntry { i: usize, j: usize, value: f64 },
    #[error("d({0},{0}) is not zero")]
    NonzeroDiagonal(usize),
    #[error("d({i},{j}) != d({j},{i})")]
    Asymmetric { i: usize, j: usize },
    #[error("triangle inequality fails at ({i},{j},{k})")]
    Triangle { i: usize, j: usize, k: usize },
    #[error("pair ({0},{1}) is out of range")]
    PairOutOfRange(usize, usize),
    #[error("source index {0} has no partner")]
    UncoveredSource(usize),
    #[error("target index {0} has no partner")]
    UncoveredTarget(usize),
    #[error("relative constraint violated: {0}")]
    RelativeViolated(String),
    #[error("composition needs matching middle sets ({0} vs {1})")]
    Incompatible(usize, usize),
    #[error("map collides a = {a} in A with x = {x} outside A")]
    Collision { a: usize, x: usize },
    #[error("Hausdorff distance of an empty set")]
    EmptySet,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Symmetric distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<f64>,
}

/// Exact triangle-inequality validation up to this many points; sampled above.
pub const EXACT_TRIANGLE_CHECK_MAX: usize = 64;
const TRIANGLE_SAMPLES: usize = 20_000;

impl FiniteMetric {
    /// Validates a row-major `n×n` matrix.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self, MetricError> {
        if d.len() != n * n {
            return Err(MetricError::Shape { n, got: d.len() });
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal(i));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(MetricError::BadEntry { i, j, value: v });
                }
                if v != d[j * n + i] {
                    return Err(MetricError::Asymmetric { i, j });
                }
            }
        }
        let m = FiniteMetric { n, d };
        m.check_triangles()?;
        Ok(m)
    }

    pub fn from_points(points: &[Point]) -> Self {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = dist(points[i], points[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        FiniteMetric { n, d }
    }

    fn check_triangles(&self) -> Result<(), MetricError> {
        let n = self.n;
        let ok = |i: usize, j: usize, k: usize| {
            let lhs = self.get(i, k);
            lhs <= self.get(i, j) + self.get(j, k) + GEOM_TOL * lhs.max(1.0)
        };
        if n <= EXACT_TRIANGLE_CHECK_MAX {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if !ok(i, j, k) {
                            return Err(MetricError::Triangle { i, j, k });
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..TRIANGLE_SAMPLES {
                let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if !ok(i, j, k) {
                    return Err(MetricError::Triangle { i, j, k });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Sub-metric on `indices`, re-indexed in the given order.
    pub fn restrict(&self, indices: &[usize]) -> FiniteMetric {
        let m = indices.len();
        let mut d = vec![0.0; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                d[a * m + b] = self.get(i, j);
            }
        }
        FiniteMetric { n: m, d }
    }
}

/// A relation between index sets `0..n_source` and `0..n_target` that covers
/// both sides, optionally constrained as a map of pairs `(X, A) ⇉ (Y, B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    n_source: usize,
    n_target: usize,
    pairs: BTreeSet<(usize, usize)>,
    relative: Option<(BTreeSet<usize>, BTreeSet<usize>)>,
}

impl Correspondence {
    pub fn new(
        n_source: usize,
        n_target: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
        relative: Option<(BTreeSet<usize>, BTreeSet<usize>)>,
    ) -> Result<Self, MetricError> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        let mut seen_s = vec![false; n_source];
        let mut seen_t = vec![false; n_target];
        for &(i, j) in &pairs {
            if i >= n_source || j >= n_target {
                return Err(MetricError::PairOutOfRange(i, j));
            }
            seen_s[i] = true;
            seen_t[j] = true;
        }
        if let Some(i) = seen_s.iter().position(|s| !s) {
            return Err(MetricError::UncoveredSource(i));
        }
        if let Some(j) = seen_t.iter().position(|s| !s) {
            return Err(MetricError::UncoveredTarget(j));
        }
        let c = Correspondence { n_source, n_target, pairs, relative: None };
        match relative {
            None => Ok(c),
            Some((a, b)) => c.with_relative(a, b),
        }
    }

    pub fn identity(n: usize) -> Self {
        Correspondence {
            n_source: n,
            n_target: n,
            pairs: (0..n).map(|i| (i, i)).collect(),
            relative: None,
        }
    }

    /// Attaches the constraint `C(A) ⊆ B`, `Cᵀ(B) ⊆ A`.
    pub fn with_relative(mut self, a: BTreeSet<usize>, b: BTreeSet<usize>) -> Result<Self, MetricError> {
        if let Some(&x) = a.iter().find(|&&x| x >= self.n_source) {
            return Err(MetricError::RelativeViolated(format!("A contains {x}, out of range")));
        }
        if let Some(&y) = b.iter().find(|&&y| y >= self.n_target) {
            return Err(MetricError::RelativeViolated(format!("B contains {y}, out of range")));
        }
        for &(x, y) in &self.pairs {
            if a.contains(&x) && !b.contains(&y) {
                return Err(MetricError::RelativeViolated(format!("C(A) not in B: ({x},{y})")));
            }
            if b.contains(&y) && !a.contains(&x) {
                return Err(MetricError::RelativeViolated(format!("C^T(B) not in A: ({x},{y})")));
            }
        }
        self.relative = Some((a, b));
        Ok(self)
    }

    pub fn n_source(&self) -> usize {
        self.n_source
    }

    pub fn n_target(&self) -> usize {
        self.n_target
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn relative(&self) -> Option<&(BTreeSet<usize>, BTreeSet<usize>)> {
        self.relative.as_ref()
    }

    /// `C(σ)`.
    pub fn image(&self, sigma: &[usize]) -> BTreeSet<usize> {
        let set: BTreeSet<usize> = sigma.iter().copied().collect();
        self.pairs
            .iter()
            .filter(|(x, _)| set.contains(x))
            .map(|&(_, y)| y)
            .collect()
    }

    /// Partners of each source index, sorted.
    pub fn partners(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_source];
        for &(x, y) in &self.pairs {
            out[x].push(y);
        }
        out
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    /// The subordinate map picking the smallest partner of every source index.
    pub fn first_subordinate_map(&self) -> Vec<usize> {
        self.partners().into_iter().map(|p| p[0]).collect()
    }

    /// Number of distinct maps `f` with `G(f) ⊆ C`.
    pub fn subordinate_map_count(&self) -> u128 {
        self.partners()
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128))
    }

    pub fn to_json(&self) -> CorrespondenceJson {
        CorrespondenceJson {
            pairs: self.pairs.iter().map(|&(i, j)| [i, j]).collect(),
            relative: self.relative.as_ref().map(|(a, b)| RelativeJson {
                a: a.iter().copied().collect(),
                b: b.iter().copied().collect(),
            }),
        }
    }

    pub fn from_json(j: &CorrespondenceJson, n_source: usize, n_target: usize) -> Result<Self, MetricError> {
        Correspondence::new(
            n_source,
            n_target,
            j.pairs.iter().map(|p| (p[0], p[1])),
            j.relative
                .as_ref()
                .map(|r| (r.a.iter().copied().collect(), r.b.iter().copied().collect())),
        )
    }
}

/// Wire form: `{"pairs":[[i,j],...], "relative":{"A":[...],"B":[...]}|null}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceJson {
    pub pairs: Vec<[usize; 2]>,
    pub relative: Option<RelativeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeJson {
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
}

/// `max |d_X(x,x') − d_Y(y,y')|` over pairs of related pairs.
pub fn distortion(c: &Correspondence, dx: &FiniteMetric, dy: &FiniteMetric) -> f64 {
    let pairs: Vec<(usize, usize)> = c.pairs.iter().copied().collect();
    let mut worst = 0.0f64;
    for (k, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[k + 1..] {
            worst = worst.max((dx.get(x, x2) - dy.get(y, y2)).abs());
        }
    }
    worst
}

/// Upper bound `d_GH(X, Y) ≤ dis(C)/2`.
pub fn gromov_hausdorff_upper_bound(c: &Correspondence, dx: &FiniteMetric, dy: &FiniteMetric) -> f64 {
    distortion(c, dx, dy) / 2.0
}

pub fn transpose(c: &Correspondence) -> Correspondence {
    Correspondence {
        n_source: c.n_target,
        n_target: c.n_source,
        pairs: c.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        relative: c.relative.as_ref().map(|(a, b)| (b.clone(), a.clone())),
    }
}

/// `D ∘ C`. The relative constraint composes when both carry one and the
/// middle sets agree.
pub fn compose(c: &Correspondence, d: &Correspondence) -> Result<Correspondence, MetricError> {
    if c.n_target != d.n_source {
        return Err(MetricError::Incompatible(c.n_target, d.n_source));
    }
    let mut by_middle: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(y, z) in &d.pairs {
        by_middle.entry(y).or_default().push(z);
    }
    let mut pairs = BTreeSet::new();
    for &(x, y) in &c.pairs {
        if let Some(zs) = by_middle.get(&y) {
            pairs.extend(zs.iter().map(|&z| (x, z)));
        }
    }
    let relative = match (&c.relative, &d.relative) {
        (Some((a, b1)), Some((b2, e))) if b1 == b2 => Some((a.clone(), e.clone())),
        _ => None,
    };
    Correspondence::new(c.n_source, d.n_target, pairs, relative)
}

/// Graph of `f` as a correspondence `(X, A) ⇉ (f(X), f(A))`.
///
/// `f(X)` is indexed by the sorted distinct values of `f`; the returned vector
/// maps each target index back to its value in the codomain of `f`.
pub fn graph_correspondence(f: &[usize], a: &BTreeSet<usize>) -> Result<(Correspondence, Vec<usize>), MetricError> {
    let mut image: Vec<usize> = f.to_vec();
    image.sort_unstable();
    image.dedup();
    let pos: BTreeMap<usize, usize> = image.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let fa: BTreeSet<usize> = a.iter().map(|&x| f[x]).collect();
    for (x, &fx) in f.iter().enumerate() {
        if !a.contains(&x) && fa.contains(&fx) {
            let witness = a.iter().find(|&&y| f[y] == fx).copied().expect("fx in f(A)");
            return Err(MetricError::Collision { a: witness, x });
        }
    }
    let pairs = f.iter().enumerate().map(|(x, fx)| (x, pos[fx]));
    let b: BTreeSet<usize> = fa.iter().map(|v| pos[v]).collect();
    let c = Correspondence::new(f.len(), image.len(), pairs, Some((a.clone(), b)))?;
    Ok((c, image))
}

/// Hausdorff distance between two index subsets of one metric.
pub fn hausdorff_distance(m: &FiniteMetric, p: &[usize], q: &[usize]) -> Result<f64, MetricError> {
    if p.is_empty() || q.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let directed = |u: &[usize], v: &[usize]| {
        u.iter()
            .map(|&i| v.iter().map(|&j| m.get(i, j)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(p, q).max(directed(q, p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    First,
    Second,
}

/// Correspondence `(X₁ ⊔ X₂, X_j) ⇉ (Y₁ ⊔ Y₂, Y_j)` built from the pairs at
/// distance `≤ ε/2` inside each block.
///
/// All four sets are index lists into `z`. Source indices are `X₁` followed by
/// `X₂`, target indices `Y₁` followed by `Y₂`.
pub fn collar_correspondence(
    z: &FiniteMetric,
    x1: &[usize],
    x2: &[usize],
    y1: &[usize],
    y2: &[usize],
    eps: f64,
    block: Block,
) -> Result<Correspondence, MetricError> {
    let disjoint = |u: &[usize], v: &[usize]| {
        let s: BTreeSet<usize> = u.iter().copied().collect();
        v.iter().all(|i| !s.contains(i))
    };
    if !disjoint(x1, x2) {
        return Err(MetricError::PreconditionViolated("X1 and X2 intersect".into()));
    }
    if !disjoint(y1, y2) {
        return Err(MetricError::PreconditionViolated("Y1 and Y2 intersect".into()));
    }
    let half = eps / 2.0;
    let tol = GEOM_TOL * half.max(1.0);
    for (k, (xs, ys)) in [(x1, y1), (x2, y2)].into_iter().enumerate() {
        let h = hausdorff_distance(z, xs, ys)?;
        if h > half + tol {
            return Err(MetricError::PreconditionViolated(format!(
                "d_H(X{0}, Y{0}) = {h} exceeds eps/2 = {half}",
                k + 1
            )));
        }
    }
    let mut pairs = Vec::new();
    for (xs, ys, xo, yo) in [(x1, y1, 0, 0), (x2, y2, x1.len(), y1.len())] {
        for (a, &xi) in xs.iter().enumerate() {
            for (b, &yi) in ys.iter().enumerate() {
                if z.get(xi, yi) <= half + tol {
                    pairs.push((xo + a, yo + b));
                }
            }
        }
    }
    let (a, b): (BTreeSet<usize>, BTreeSet<usize>) = match block {
        Block::First => ((0..x1.len()).collect(), (0..y1.len()).collect()),
        Block::Second => (
            (x1.len()..x1.len() + x2.len()).collect(),
            (y1.len()..y1.len() + y2.len()).collect(),
        ),
    };
    Correspondence::new(x1.len() + x2.len(), y1.len() + y2.len(), pairs, Some((a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(ts: &[f64]) -> FiniteMetric {
        FiniteMetric::from_points(&ts.iter().map(|&t| [t, 0.0]).collect::<Vec<_>>())
    }

    #[test]
    fn metric_validation() {
        assert!(FiniteMetric::new(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(matches!(FiniteMetric::new(2, vec![0.0, 1.0, 2.0, 0.0]), Err(MetricError::Asymmetric { .. })));
        assert!(matches!(FiniteMetric::new(2, vec![1.0, 1.0, 1.0, 0.0]), Err(MetricError::NonzeroDiagonal(0))));
        let bad = vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        assert!(matches!(FiniteMetric::new(3, bad), Err(MetricError::Triangle { .. })));
    }

    #[test]
    fn distortion_examples() {
        let m = line(&[0.0, 1.0, 3.0]);
        assert_eq!(distortion(&Correspondence::identity(3), &m, &m), 0.0);
        let one = line(&[0.0]);
        let two = line(&[0.0, 2.0]);
        let full = Correspondence::new(1, 2, [(0, 0), (0, 1)], None).unwrap();
        assert_eq!(distortion(&full, &one, &two), 2.0);
    }

    #[test]
    fn transpose_examples() {
        let id = Correspondence::identity(3);
        assert_eq!(transpose(&id), id);
        let swap = Correspondence::new(2, 2, [(0, 1), (1, 0)], None).unwrap();
        assert_eq!(transpose(&swap).pairs(), &[(1, 0), (0, 1)].into_iter().collect());
    }

    #[test]
    fn compose_examples() {
        let c = Correspondence::new(3, 2, [(0, 0), (1, 0), (2, 1)], None).unwrap();
        assert_eq!(compose(&c, &Correspondence::identity(2)).unwrap(), c);
        let ctc = compose(&c, &transpose(&c)).unwrap();
        assert!((0..3).all(|i| ctc.contains(i, i)));
        // G(g)∘G(f) = G(g∘f)
        let f = [1usize, 2, 0, 2];
        let g = [2usize, 0, 1];
        let gf = Correspondence::new(4, 3, f.iter().enumerate().map(|(x, &y)| (x, g[y])), None).unwrap();
        let cf = Correspondence::new(4, 3, f.iter().enumerate().map(|(x, &y)| (x, y)), None).unwrap();
        let cg = Correspondence::new(3, 3, g.iter().enumerate().map(|(x, &y)| (x, y)), None).unwrap();
        assert_eq!(compose(&cf, &cg).unwrap(), gf);
    }

    #[test]
    fn graph_correspondence_examples() {
        let a: BTreeSet<usize> = [0, 1].into_iter().collect();
        assert!(graph_correspondence(&[3, 1, 2], &a).is_ok());
        assert_eq!(graph_correspondence(&[0, 1, 0], &a).unwrap_err(), MetricError::Collision { a: 0, x: 2 });
        // f(A) ⊆ B, f(X−A) ⊆ Y−B, non-injective inside each part
        let (c, image) = graph_correspondence(&[5, 5, 7, 7], &a).unwrap();
        assert_eq!(image, vec![5, 7]);
        assert_eq!(c.relative().unwrap().1, [0].into_iter().collect());
    }

    #[test]
    fn hausdorff_examples() {
        let m = line(&[0.0, 0.7, 2.5]);
        assert_eq!(hausdorff_distance(&m, &[0, 1], &[0, 1]).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&m, &[0], &[2]).unwrap(), 2.5);
        assert_eq!(
            hausdorff_distance(&m, &[0], &[1, 2]).unwrap(),
            hausdorff_distance(&m, &[1, 2], &[0]).unwrap()
        );
        assert_eq!(hausdorff_distance(&m, &[], &[0]), Err(MetricError::EmptySet));
    }

    #[test]
    fn collar_identity_blocks() {
        let m = line(&[0.0, 1.0, 2.0, 3.0]);
        let c = collar_correspondence(&m, &[0, 1], &[2, 3], &[0, 1], &[2, 3], 0.0, Block::First).unwrap();
        assert_eq!(c.pairs(), Correspondence::identity(4).pairs());
    }

    #[test]
    fn collar_worked_example() {
        // Z = {(0,0), (0.1,0), (1,0)}; X1={(0,0)}, Y1={(0.1,0)}, X2=Y2={(1,0)}
        let z = FiniteMetric::from_points(&[[0.0, 0.0], [0.1, 0.0], [1.0, 0.0]]);
        let c = collar_correspondence(&z, &[0], &[2], &[1], &[2], 0.2, Block::First).unwrap();
        assert_eq!(c.pairs(), &[(0, 0), (1, 1)].into_iter().collect());
        let dx = z.restrict(&[0, 2]);
        let dy = z.restrict(&[1, 2]);
        // enumerate the four pair-of-pairs values: |0-0|, |1-0.9|, |1-0.9|, |0-0|
        let by_hand = [0.0f64, (1.0f64 - 0.9).abs(), (1.0f64 - 0.9).abs(), 0.0]
            .into_iter()
            .fold(0.0, f64::max);
        let got = distortion(&c, &dx, &dy);
        assert!((got - by_hand).abs() < 1e-15 && (got - 0.1).abs() < 1e-12);
        assert!(got <= 0.2);
    }

    #[test]
    fn collar_rejects_overlap() {
        let z = line(&[0.0, 1.0, 2.0]);
        let r = collar_correspondence(&z, &[0, 1], &[1, 2], &[0], &[2], 1.0, Block::First);
        assert!(matches!(r, Err(MetricError::PreconditionViolated(_))));
        let r = collar_correspondence(&z, &[0], &[2], &[1], &[2], 0.5, Block::Second);
        assert!(matches!(r, Err(MetricError::PreconditionViolated(_))));
    }

    #[test]
    fn relative_constraint_enforced() {
        let c = Correspondence::new(2, 2, [(0, 0), (1, 1), (1, 0)], None).unwrap();
        let a: BTreeSet<usize> = [0].into_iter().collect();
        assert!(c.clone().with_relative(a.clone(), a.clone()).is_err());
        let c = Correspondence::new(2, 2, [(0, 0), (1, 1)], None).unwrap();
        assert!(c.with_relative(a.clone(), a).is_ok());
    }

    fn arb_points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..max)
    }

    fn arb_corr(ns: usize, nt: usize, extra: Vec<(usize, usize)>) -> Correspondence {
        let mut pairs: Vec<(usize, usize)> = (0..ns.max(nt)).map(|k| (k % ns, k % nt)).collect();
        pairs.extend(extra.into_iter().map(|(a, b)| (a % ns, b % nt)));
        Correspondence::new(ns, nt, pairs, None).unwrap()
    }

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| [x, y]).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn distortion_of_transpose(p in arb_points(8), q in arb_points(8), extra in prop::collection::vec((0usize..8, 0usize..8), 0..10)) {
            let (dx, dy) = (FiniteMetric::from_points(&pts(&p)), FiniteMetric::from_points(&pts(&q)));
            let c = arb_corr(p.len(), q.len(), extra);
            prop_assert_eq!(distortion(&c, &dx, &dy), distortion(&transpose(&c), &dy, &dx));
            prop_assert_eq!(transpose(&transpose(&c)), c);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn distortion_subadditive(p in arb_points(7), q in arb_points(7), r in arb_points(7),
                                  e1 in prop::collection::vec((0usize..7, 0usize..7), 0..6),
                                  e2 in prop::collection::vec((0usize..7, 0usize..7), 0..6)) {
            let (dx, dy, dz) = (
                FiniteMetric::from_points(&pts(&p)),
                FiniteMetric::from_points(&pts(&q)),
                FiniteMetric::from_points(&pts(&r)),
            );
            let c = arb_corr(p.len(), q.len(), e1);
            let d = arb_corr(q.len(), r.len(), e2);
            let dc = compose(&c, &d).unwrap();
            prop_assert!(distortion(&dc, &dx, &dz) <= distortion(&c, &dx, &dy) + distortion(&d, &dy, &dz) + 1e-12);
        }

        #[test]
        fn step_bounded_map_has_small_distortion(p in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..12),
                                                 moves in prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), 12),
                                                 eps in 0.0f64..1.0) {
            let xs = pts(&p);
            let ys: Vec<Point> = xs.iter().zip(&moves)
                .map(|(x, &(r, t))| [x[0] + 0.5 * eps * r * t.cos(), x[1] + 0.5 * eps * r * t.sin()])
                .collect();
            let g = Correspondence::new(xs.len(), ys.len(), (0..xs.len()).map(|i| (i, i)), None).unwrap();
            let d = distortion(&g, &FiniteMetric::from_points(&xs), &FiniteMetric::from_points(&ys));
            prop_assert!(d <= eps + 1e-12);
        }

        #[test]
        fn collar_relative_invariant(x1 in arb_points(5), x2 in arb_points(5), jit in prop::collection::vec((-0.1f64..0.1, -0.1f64..0.1), 10), second in any::<bool>()) {
            let (n1, n2) = (x1.len(), x2.len());
            let mut all = pts(&x1);
            all.extend(pts(&x2));
            let moved: Vec<Point> = all.iter().zip(jit.iter().cycle()).map(|(p, &(a, b))| [p[0] + a, p[1] + b]).collect();
            let mut z = all.clone();
            z.extend(moved);
            let m = FiniteMetric::from_points(&z);
            let n = n1 + n2;
            let ix1: Vec<usize> = (0..n1).collect();
            let ix2: Vec<usize> = (n1..n).collect();
            let iy1: Vec<usize> = (n..n + n1).collect();
            let iy2: Vec<usize> = (n + n1..2 * n).collect();
            let eps = 2.0 * 0.1 * std::f64::consts::SQRT_2;
            let block = if second { Block::Second } else { Block::First };
            let c = collar_correspondence(&m, &ix1, &ix2, &iy1, &iy2, eps, block).unwrap();
            let (a, b) = c.relative().unwrap().clone();
            for &(x, y) in c.pairs() {
                prop_assert_eq!(a.contains(&x), b.contains(&y));
            }
            let mut src = ix1.clone(); src.extend(&ix2);
            let mut dst = iy1.clone(); dst.extend(&iy2);
            prop_assert!(distortion(&c, &m.restrict(&src), &m.restrict(&dst)) <= eps + 1e-12);
        }
    }
}
