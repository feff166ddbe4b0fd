//! Filtered Rips complexes with fence flags.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use smallvec::SmallVec;

use crate::metric::{Correspondence, FiniteMetric};

pub const DEFAULT_SIMPLEX_BUDGET: usize = 5_000_000;
pub const DEFAULT_MAX_DIM: usize = 3;
/// Slack added to the pipeline cutoff `r_w + ε`.
pub const CUTOFF_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RipsError {
    #[error("simplex count exceeds the budget of {budget}")]
    CombinatorialBlowup { budget: usize },
    #[error("max_dim must be at least 1")]
    BadMaxDim,
    #[error("cutoff must be positive, got {0}")]
    BadCutoff(f64),
    #[error("simplex {0:?} is not sorted, repeated or out of range")]
    BadSimplex(Vec<usize>),
    #[error("face {face:?} of {simplex:?} is missing")]
    MissingFace { simplex: Vec<usize>, face: Vec<usize> },
    #[error("face {face:?} has a larger value than {simplex:?}")]
    NonMonotone { simplex: Vec<usize>, face: Vec<usize> },
}

/// Relative tolerance for slice membership, so parameters computed as
/// `r_s − ε` or `r_s·√10` do not drop simplices sitting exactly on them.
pub fn slice_tolerance(a: f64) -> f64 {
    1e-12 * a.abs().max(1.0)
}

/// Simplices sorted by `(value, dim, lexicographic vertices)`. Ids are
/// positions in that order, so every slice is a prefix.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    n_vertices: usize,
    max_dim: usize,
    cutoff: f64,
    verts: Vec<u32>,
    offs: Vec<u32>,
    dims: Vec<u8>,
    values: Vec<f64>,
    fence: Vec<bool>,
    facets: Vec<u32>,
    /// Per dimension, ids in lexicographic vertex order.
    by_dim: Vec<Vec<u32>>,
    /// Packed vertex keys aligned with `by_dim`, when they fit in 64 bits.
    keys: Option<(u32, Vec<Vec<u64>>)>,
    /// Per dimension, ids in filtration order.
    in_order: Vec<Vec<u32>>,
    fence_vertices: BTreeSet<usize>,
}

/// Borrowed view of one simplex.
#[derive(Debug, Clone, Copy)]
pub struct SimplexRef<'a> {
    pub id: usize,
    pub vertices: &'a [u32],
    pub value: f64,
    pub fence: bool,
}

impl<'a> SimplexRef<'a> {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

struct Raw {
    verts: SmallVec<[u32; 4]>,
    value: f64,
}

fn pack(bits: u32, vs: &[u32]) -> u64 {
    vs.iter().fold(0u64, |k, &v| (k << bits) | v as u64)
}

impl FilteredComplex {
    fn assemble(
        n_vertices: usize,
        max_dim: usize,
        cutoff: f64,
        mut raw: Vec<Raw>,
        fence_vertices: BTreeSet<usize>,
    ) -> Result<Self, RipsError> {
        raw.sort_by(|x, y| {
            x.value
                .partial_cmp(&y.value)
                .unwrap_or(Ordering::Equal)
                .then(x.verts.len().cmp(&y.verts.len()))
                .then_with(|| x.verts.cmp(&y.verts))
        });
        let total: usize = raw.iter().map(|r| r.verts.len()).sum();
        let mut k = FilteredComplex {
            n_vertices,
            max_dim,
            cutoff,
            verts: Vec::with_capacity(total),
            offs: Vec::with_capacity(raw.len() + 1),
            dims: Vec::with_capacity(raw.len()),
            values: Vec::with_capacity(raw.len()),
            fence: Vec::with_capacity(raw.len()),
            facets: Vec::new(),
            by_dim: vec![Vec::new(); max_dim + 1],
            keys: None,
            in_order: vec![Vec::new(); max_dim + 1],
            fence_vertices,
        };
        for r in &raw {
            k.offs.push(k.verts.len() as u32);
            k.dims.push((r.verts.len() - 1) as u8);
            k.values.push(r.value);
            k.fence.push(r.verts.iter().all(|v| k.fence_vertices.contains(&(*v as usize))));
            k.verts.extend_from_slice(&r.verts);
        }
        k.offs.push(k.verts.len() as u32);
        drop(raw);
        for id in 0..k.len() {
            k.in_order[k.dims[id] as usize].push(id as u32);
        }
        k.by_dim = k.in_order.clone();
        for ids in &mut k.by_dim {
            let verts = &k.verts;
            let offs = &k.offs;
            ids.sort_unstable_by(|&a, &b| {
                let sa = &verts[offs[a as usize] as usize..offs[a as usize + 1] as usize];
                let sb = &verts[offs[b as usize] as usize..offs[b as usize + 1] as usize];
                sa.cmp(sb)
            });
        }
        let bits = (usize::BITS - n_vertices.max(2).saturating_sub(1).leading_zeros()).max(1);
        if bits as usize * (max_dim + 1) <= 64 {
            let keys = k
                .by_dim
                .iter()
                .map(|ids| ids.iter().map(|&id| pack(bits, k.vertices(id as usize))).collect())
                .collect();
            k.keys = Some((bits, keys));
        }
        let mut facets = vec![u32::MAX; total];
        let mut face = Vec::with_capacity(max_dim + 1);
        for id in 0..k.len() {
            let vs = k.vertices(id);
            if vs.len() < 2 {
                continue;
            }
            for i in 0..vs.len() {
                face.clear();
                face.extend(vs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v));
                match k.find(&face) {
                    Some(f) => {
                        if k.values[f] > k.values[id] {
                            return Err(RipsError::NonMonotone {
                                simplex: vs.iter().map(|&v| v as usize).collect(),
                                face: face.iter().map(|&v| v as usize).collect(),
                            });
                        }
                        facets[k.offs[id] as usize + i] = f as u32;
                    }
                    None => {
                        return Err(RipsError::MissingFace {
                            simplex: vs.iter().map(|&v| v as usize).collect(),
                            face: face.iter().map(|&v| v as usize).collect(),
                        })
                    }
                }
            }
        }
        k.facets = facets;
        Ok(k)
    }

    /// Complex from an explicit face-closed list of `(sorted vertices, value)`.
    pub fn from_simplices(
        n_vertices: usize,
        simplices: &[(Vec<usize>, f64)],
        fence_vertices: &BTreeSet<usize>,
    ) -> Result<Self, RipsError> {
        let mut raw = Vec::with_capacity(simplices.len());
        let mut max_dim = 0;
        let mut seen = BTreeSet::new();
        for (vs, value) in simplices {
            let sorted = vs.windows(2).all(|w| w[0] < w[1]);
            if vs.is_empty() || !sorted || vs.iter().any(|&v| v >= n_vertices) || !seen.insert(vs.clone()) {
                return Err(RipsError::BadSimplex(vs.clone()));
            }
            max_dim = max_dim.max(vs.len() - 1);
            raw.push(Raw { verts: vs.iter().map(|&v| v as u32).collect(), value: *value });
        }
        let present: BTreeSet<usize> = simplices.iter().filter(|(v, _)| v.len() == 1).map(|(v, _)| v[0]).collect();
        if let Some(v) = (0..n_vertices).find(|v| !present.contains(v)) {
            return Err(RipsError::MissingFace { simplex: vec![v], face: vec![v] });
        }
        FilteredComplex::assemble(n_vertices, max_dim.max(1), f64::INFINITY, raw, fence_vertices.clone())
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Largest parameter for which slices are complete.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn fence_vertices(&self) -> &BTreeSet<usize> {
        &self.fence_vertices
    }

    #[inline]
    pub fn dim(&self, id: usize) -> usize {
        self.dims[id] as usize
    }

    #[inline]
    pub fn value(&self, id: usize) -> f64 {
        self.values[id]
    }

    #[inline]
    pub fn is_fence(&self, id: usize) -> bool {
        self.fence[id]
    }

    #[inline]
    pub fn vertices(&self, id: usize) -> &[u32] {
        &self.verts[self.offs[id] as usize..self.offs[id + 1] as usize]
    }

    /// Facet ids; facet `i` omits vertex `i` and carries sign `(−1)^i`.
    #[inline]
    pub fn facets(&self, id: usize) -> &[u32] {
        if self.dims[id] == 0 {
            &[]
        } else {
            &self.facets[self.offs[id] as usize..self.offs[id + 1] as usize]
        }
    }

    pub fn simplex(&self, id: usize) -> SimplexRef<'_> {
        SimplexRef { id, vertices: self.vertices(id), value: self.values[id], fence: self.fence[id] }
    }

    pub fn simplices(&self) -> impl Iterator<Item = SimplexRef<'_>> + '_ {
        (0..self.len()).map(move |id| self.simplex(id))
    }

    /// Ids of `p`-simplices in filtration order.
    pub fn ids_of_dim(&self, p: usize) -> Vec<usize> {
        if p > self.max_dim {
            return Vec::new();
        }
        self.in_order[p].iter().map(|&i| i as usize).collect()
    }

    pub fn count_of_dim(&self, p: usize) -> usize {
        self.by_dim.get(p).map_or(0, Vec::len)
    }

    pub fn find(&self, vertices: &[u32]) -> Option<usize> {
        let p = vertices.len().checked_sub(1)?;
        let ids = self.by_dim.get(p)?;
        if let Some((bits, keys)) = &self.keys {
            if vertices.iter().any(|&v| v as usize >= self.n_vertices) {
                return None;
            }
            let key = pack(*bits, vertices);
            return keys[p].binary_search(&key).ok().map(|k| ids[k] as usize);
        }
        ids.binary_search_by(|&id| self.vertices(id as usize).cmp(vertices))
            .ok()
            .map(|k| ids[k] as usize)
    }

    pub fn find_usize(&self, vertices: &[usize]) -> Option<usize> {
        let v: Vec<u32> = vertices.iter().map(|&x| x as u32).collect();
        self.find(&v)
    }

    /// Number of simplices in the slice at `a` (a prefix of the id order).
    pub fn slice_len(&self, a: f64) -> usize {
        if a < 0.0 {
            return self.n_vertices;
        }
        let lim = a + slice_tolerance(a);
        self.values.partition_point(|&v| v <= lim)
    }

    pub fn slice(&self, a: f64) -> Slice<'_> {
        Slice { complex: self, len: self.slice_len(a) }
    }

    /// Debug dump, rows `dim,filtration,fence,v0,v1,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,filtration,fence,vertices\n");
        for s in self.simplices() {
            let _ = write!(out, "{},{},{}", s.dim(), s.value, s.fence);
            for v in s.vertices {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Prefix view of a complex.
#[derive(Debug, Clone, Copy)]
pub struct Slice<'a> {
    complex: &'a FilteredComplex,
    len: usize,
}

impl<'a> Slice<'a> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, id: usize) -> bool {
        id < self.len
    }

    pub fn simplices(&self) -> impl Iterator<Item = SimplexRef<'a>> + 'a {
        let k = self.complex;
        (0..self.len).map(move |id| k.simplex(id))
    }

    pub fn vertex_sets(&self) -> BTreeSet<Vec<u32>> {
        self.simplices().map(|s| s.vertices.to_vec()).collect()
    }
}

/// Every simplex of dimension `≤ max_dim` and diameter `≤ cutoff`, fence
/// flags from `a`.
pub fn build_filtered_rips(
    d: &FiniteMetric,
    a: &BTreeSet<usize>,
    max_dim: usize,
    cutoff: f64,
) -> Result<FilteredComplex, RipsError> {
    build_filtered_rips_with_budget(d, a, max_dim, cutoff, DEFAULT_SIMPLEX_BUDGET)
}

pub fn build_filtered_rips_with_budget(
    d: &FiniteMetric,
    a: &BTreeSet<usize>,
    max_dim: usize,
    cutoff: f64,
    budget: usize,
) -> Result<FilteredComplex, RipsError> {
    if max_dim < 1 {
        return Err(RipsError::BadMaxDim);
    }
    if !(cutoff > 0.0) {
        return Err(RipsError::BadCutoff(cutoff));
    }
    let n = d.len();
    let mut adj = vec![false; n * n];
    let mut up: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if d.get(i, j) <= cutoff {
                adj[i * n + j] = true;
                adj[j * n + i] = true;
                up[i].push(j as u32);
            }
        }
    }
    let mut raw: Vec<Raw> = Vec::new();
    let mut clique: Vec<u32> = Vec::with_capacity(max_dim + 1);
    struct Ctx<'a> {
        d: &'a FiniteMetric,
        adj: &'a [bool],
        n: usize,
        max_dim: usize,
        budget: usize,
    }
    fn expand(ctx: &Ctx, clique: &mut Vec<u32>, cands: &[u32], diam: f64, raw: &mut Vec<Raw>) -> Result<(), RipsError> {
        if raw.len() >= ctx.budget {
            return Err(RipsError::CombinatorialBlowup { budget: ctx.budget });
        }
        raw.push(Raw { verts: SmallVec::from_slice(clique), value: diam });
        if clique.len() > ctx.max_dim {
            return Ok(());
        }
        for (k, &c) in cands.iter().enumerate() {
            let cd = clique.iter().map(|&v| ctx.d.get(v as usize, c as usize)).fold(diam, f64::max);
            let next: Vec<u32> = cands[k + 1..]
                .iter()
                .copied()
                .filter(|&u| ctx.adj[c as usize * ctx.n + u as usize])
                .collect();
            clique.push(c);
            expand(ctx, clique, &next, cd, raw)?;
            clique.pop();
        }
        Ok(())
    }
    let ctx = Ctx { d, adj: &adj, n, max_dim, budget };
    for v in 0..n {
        clique.clear();
        clique.push(v as u32);
        expand(&ctx, &mut clique, &up[v], 0.0, &mut raw)?;
    }
    FilteredComplex::assemble(n, max_dim, cutoff, raw, a.clone())
}

/// `(non-fence, fence)` `p`-simplices in filtration order.
pub fn relative_basis(k: &FilteredComplex, p: usize) -> (Vec<usize>, Vec<usize>) {
    k.ids_of_dim(p).into_iter().partition(|&id| !k.is_fence(id))
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpsSimplicialCheck {
    Pass,
    Fail {
        /// Source simplex (vertex indices of `S`).
        source: Vec<usize>,
        /// Subset of `C(σ)` that is not a simplex of `T` at `value + ε`.
        image: Vec<usize>,
        value: f64,
        /// The failing subset exists but violates the fence clause.
        relative: bool,
    },
}

impl EpsSimplicialCheck {
    pub fn passed(&self) -> bool {
        matches!(self, EpsSimplicialCheck::Pass)
    }
}

fn combinations(items: &[usize], k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            if !go(items, k, i + 1, cur, f) {
                return false;
            }
            cur.pop();
        }
        true
    }
    go(items, k, 0, &mut Vec::with_capacity(k), f)
}

/// Checks that every subset of `C(σ)` (up to `T.max_dim + 1` vertices) is a
/// simplex of `T` at `value(σ) + ε`, and of `T`'s fence part when `σ` is a
/// fence simplex and `C` carries a relative constraint.
pub fn check_eps_simplicial(c: &Correspondence, s: &FilteredComplex, t: &FilteredComplex, eps: f64) -> EpsSimplicialCheck {
    check_eps_simplicial_partners(&c.partners(), c.relative().is_some(), s, t, eps)
}

/// As [`check_eps_simplicial`], with the relation given by partner lists.
pub fn check_eps_simplicial_partners(
    partners: &[Vec<usize>],
    relative: bool,
    s: &FilteredComplex,
    t: &FilteredComplex,
    eps: f64,
) -> EpsSimplicialCheck {
    for sig in s.simplices() {
        let mut image: Vec<usize> = sig.vertices.iter().flat_map(|&v| partners[v as usize].iter().copied()).collect();
        image.sort_unstable();
        image.dedup();
        let k = image.len().min(t.max_dim() + 1);
        let lim = sig.value + eps;
        let lim = lim + slice_tolerance(lim);
        let mut failure = None;
        // faces of a present subset are present with smaller values
        combinations(&image, k, &mut |sub| {
            let v: Vec<u32> = sub.iter().map(|&x| x as u32).collect();
            match t.find(&v) {
                Some(id) if t.value(id) <= lim => {
                    if relative && sig.fence && !t.is_fence(id) {
                        failure = Some((sub.to_vec(), true));
                        false
                    } else {
                        true
                    }
                }
                _ => {
                    failure = Some((sub.to_vec(), false));
                    false
                }
            }
        });
        if let Some((sub, rel)) = failure {
            return EpsSimplicialCheck::Fail {
                source: sig.vertices.iter().map(|&v| v as usize).collect(),
                image: sub,
                value: sig.value,
                relative: rel,
            };
        }
    }
    EpsSimplicialCheck::Pass
}
