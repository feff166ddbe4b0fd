//! Chains, persistence of (relative) Rips filtrations, induced maps and
//! interleaving checks.
//!
//! Persistence in degree `p` runs three reductions. A cohomology-style
//! reduction of the coboundary `δ_p` (columns of positive `p`-simplices in
//! reverse filtration order, negative ones cleared) yields the pairs. The
//! boundary columns of the negative `(p+1)`-simplices, reduced, give the
//! representatives `R_τ` of finite bars. The boundary columns of negative
//! `p`-simplices, reduced with the basis change tracked, give the cycles
//! `V_σ` of essential bars. The representatives `rep(σ)` of all positive
//! `σ ≤ a` form a triangular basis of the cycles at `a`, so any cycle is
//! expressed in it by eliminating its latest simplex first.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::metric::{transpose, Correspondence};
use crate::rips::{check_eps_simplicial_partners, slice_tolerance, EpsSimplicialCheck, FilteredComplex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HomologyError {
    #[error("parameter {param} lies beyond the complex cutoff {cutoff}")]
    ParameterBeyondCutoff { param: f64, cutoff: f64 },
    #[error("degree {p} needs simplices of dimension {} but max_dim is {max_dim}", p + 1)]
    BadDegree { p: usize, max_dim: usize },
    #[error("s = {s} exceeds w = {w}")]
    BadParameters { s: f64, w: f64 },
    #[error("chain is not a (relative) cycle")]
    NotACycle,
    #[error("vertex map is not simplicial: {0}")]
    NotSimplicial(String),
    #[error("simplex {0:?} is not in the complex")]
    UnknownSimplex(Vec<usize>),
    #[error("bad coefficient {0:?}")]
    BadCoefficient(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

type Col<F> = Vec<(u32, F)>;

/// `a + λ·b` on sorted sparse columns.
fn axpy<F: Field>(a: &[(u32, F)], lambda: &F, b: &[(u32, F)]) -> Col<F> {
    if lambda.is_zero() {
        return a.to_vec();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, lambda.mul(&b[j].1)));
            j += 1;
        } else {
            let v = a[i].1.add(&lambda.mul(&b[j].1));
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Sparse `p`-chain over the simplex ids of one complex, with the
/// orientation of sorted vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain<F> {
    degree: usize,
    terms: Col<F>,
}

impl<F: Field> Chain<F> {
    pub fn zero(degree: usize) -> Self {
        Chain { degree, terms: Vec::new() }
    }

    /// Sums repeated ids and drops zero coefficients.
    pub fn new(degree: usize, terms: impl IntoIterator<Item = (usize, F)>) -> Self {
        let mut acc: BTreeMap<u32, F> = BTreeMap::new();
        for (id, c) in terms {
            let e = acc.entry(id as u32).or_insert_with(F::zero);
            *e = e.add(&c);
        }
        Chain { degree, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &F)> + '_ {
        self.terms.iter().map(|(i, c)| (*i as usize, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, id: usize) -> F {
        match self.terms.binary_search_by_key(&(id as u32), |t| t.0) {
            Ok(k) => self.terms[k].1.clone(),
            Err(_) => F::zero(),
        }
    }

    /// Latest simplex in filtration order.
    pub fn last_id(&self) -> Option<usize> {
        self.terms.last().map(|t| t.0 as usize)
    }

    pub fn add_scaled(&self, lambda: &F, other: &Chain<F>) -> Chain<F> {
        Chain { degree: self.degree, terms: axpy(&self.terms, lambda, &other.terms) }
    }

    pub fn scale(&self, lambda: &F) -> Chain<F> {
        if lambda.is_zero() {
            return Chain::zero(self.degree);
        }
        Chain { degree: self.degree, terms: self.terms.iter().map(|(i, c)| (*i, c.mul(lambda))).collect() }
    }

    pub fn sub(&self, other: &Chain<F>) -> Chain<F> {
        self.add_scaled(&F::one().neg(), other)
    }

    /// Drops terms on fence simplices.
    pub fn quotient(&self, k: &FilteredComplex) -> Chain<F> {
        Chain { degree: self.degree, terms: self.terms.iter().filter(|(i, _)| !k.is_fence(*i as usize)).cloned().collect() }
    }

    /// Vertices of simplices with nonzero coefficient.
    pub fn support_vertices(&self, k: &FilteredComplex) -> BTreeSet<usize> {
        self.terms.iter().flat_map(|(i, _)| k.vertices(*i as usize).iter().map(|&v| v as usize)).collect()
    }

    /// Largest filtration value in the support (`0` for the zero chain).
    pub fn max_value(&self, k: &FilteredComplex) -> f64 {
        self.terms.iter().map(|(i, _)| k.value(*i as usize)).fold(0.0, f64::max)
    }

    pub fn to_json(&self, k: &FilteredComplex) -> ChainJson {
        ChainJson {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| TermJson {
                    simplex: k.vertices(*i as usize).iter().map(|&v| v as usize).collect(),
                    coeff: c.to_string(),
                })
                .collect(),
        }
    }
}

impl<F: Field + FromStr> Chain<F> {
    /// Unsorted vertex lists are sorted and the coefficient signed accordingly.
    pub fn from_json(k: &FilteredComplex, j: &ChainJson) -> Result<Chain<F>, HomologyError> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            if t.simplex.len() != j.degree + 1 {
                return Err(HomologyError::UnknownSimplex(t.simplex.clone()));
            }
            let c: F = t.coeff.parse().map_err(|_| HomologyError::BadCoefficient(t.coeff.clone()))?;
            let (sorted, odd) = sort_with_parity(&t.simplex);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(HomologyError::UnknownSimplex(t.simplex.clone()));
            }
            let id = k.find_usize(&sorted).ok_or_else(|| HomologyError::UnknownSimplex(t.simplex.clone()))?;
            terms.push((id, if odd { c.neg() } else { c }));
        }
        Ok(Chain::new(j.degree, terms))
    }
}

/// `{"degree":p,"terms":[{"simplex":[v...],"coeff":"num/den"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainJson {
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub simplex: Vec<usize>,
    pub coeff: String,
}

fn sort_with_parity(vs: &[usize]) -> (Vec<usize>, bool) {
    let mut v = vs.to_vec();
    let mut odd = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    (v, odd)
}

/// Boundary of one simplex; relative mode drops fence faces.
pub fn boundary_of<F: Field>(k: &FilteredComplex, id: usize, relative: bool) -> Chain<F> {
    let terms = k
        .facets(id)
        .iter()
        .enumerate()
        .filter(|(_, &f)| !(relative && k.is_fence(f as usize)))
        .map(|(i, &f)| (f as usize, F::from_i64(if i % 2 == 0 { 1 } else { -1 })));
    Chain::new(k.dim(id).saturating_sub(1), terms)
}

pub fn boundary<F: Field>(k: &FilteredComplex, c: &Chain<F>, relative: bool) -> Chain<F> {
    let mut terms = Vec::new();
    for (id, coef) in c.terms() {
        for (i, &f) in k.facets(id).iter().enumerate() {
            if relative && k.is_fence(f as usize) {
                continue;
            }
            let s = if i % 2 == 0 { coef.clone() } else { coef.neg() };
            terms.push((f as usize, s));
        }
    }
    Chain::new(c.degree().saturating_sub(1), terms)
}

/// Sparse boundary matrix `∂_p`, integer entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    /// `(p−1)`-simplex ids, filtration order.
    pub rows: Vec<usize>,
    /// `p`-simplex ids, filtration order.
    pub cols: Vec<usize>,
    /// Per column, `(row position, coefficient)` sorted by row.
    pub entries: Vec<Vec<(usize, i64)>>,
}

pub fn boundary_matrix(k: &FilteredComplex, p: usize, relative: bool) -> BoundaryMatrix {
    let keep = |id: &usize| !(relative && k.is_fence(*id));
    let cols: Vec<usize> = k.ids_of_dim(p).into_iter().filter(keep).collect();
    let rows: Vec<usize> = if p == 0 { Vec::new() } else { k.ids_of_dim(p - 1).into_iter().filter(keep).collect() };
    let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(r, &id)| (id, r)).collect();
    let entries = cols
        .iter()
        .map(|&c| {
            let mut e: Vec<(usize, i64)> = k
                .facets(c)
                .iter()
                .enumerate()
                .filter_map(|(i, &f)| pos.get(&(f as usize)).map(|&r| (r, if i % 2 == 0 { 1 } else { -1 })))
                .collect();
            e.sort_unstable();
            e
        })
        .collect();
    BoundaryMatrix { rows, cols, entries }
}

/// One bar per positive simplex, zero-length ones included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub birth_simplex: usize,
    pub death_simplex: Option<usize>,
    pub birth: f64,
    pub death: Option<f64>,
}

impl Bar {
    pub fn persistence(&self) -> f64 {
        self.death.unwrap_or(f64::INFINITY) - self.birth
    }
}

#[derive(Debug, Clone)]
pub struct Persistence<F> {
    degree: usize,
    relative: bool,
    cutoff: f64,
    n_vertices: usize,
    bars: Vec<Bar>,
    reps: Vec<Chain<F>>,
    bar_of: HashMap<u32, usize>,
    slice_ends: Vec<f64>,
}

/// Positive/negative status and pairs from the coboundary reduction of degree `q`.
struct DualResult {
    pairs: Vec<(u32, u32)>,
    essential: Vec<u32>,
}

fn dual_reduction<F: Field>(k: &FilteredComplex, q: usize, relative: bool, negative: &BTreeSet<u32>) -> DualResult {
    let n = k.len();
    let keep = |id: usize| !(relative && k.is_fence(id));
    let qs: Vec<usize> = k.ids_of_dim(q).into_iter().filter(|&i| keep(i)).collect();
    let mut local = vec![u32::MAX; n];
    for (l, &id) in qs.iter().enumerate() {
        local[id] = l as u32;
    }
    // coboundary lists, keyed by n−1−id so that the pivot is the largest key
    let mut cob: Vec<Vec<(u32, i8)>> = vec![Vec::new(); qs.len()];
    if q < k.max_dim() {
        for tau in k.ids_of_dim(q + 1) {
            if !keep(tau) {
                continue;
            }
            for (i, &f) in k.facets(tau).iter().enumerate() {
                let l = local[f as usize];
                if l != u32::MAX {
                    cob[l as usize].push(((n - 1 - tau) as u32, if i % 2 == 0 { 1 } else { -1 }));
                }
            }
        }
    }
    let mut owner = vec![u32::MAX; n];
    let mut reduced: Vec<Col<F>> = Vec::new();
    let mut pairs = Vec::new();
    let mut essential = Vec::new();
    for l in (0..qs.len()).rev() {
        let sigma = qs[l] as u32;
        if negative.contains(&sigma) {
            continue;
        }
        let mut col: Col<F> = std::mem::take(&mut cob[l]).into_iter().map(|(r, s)| (r, F::from_i64(s as i64))).collect();
        col.sort_unstable_by_key(|t| t.0);
        while let Some((piv, c)) = col.last().cloned() {
            let j = owner[piv as usize];
            if j == u32::MAX {
                break;
            }
            let other = &reduced[j as usize];
            let lambda = c.div(&other.last().unwrap().1).neg();
            col = axpy(&col, &lambda, other);
        }
        match col.last() {
            Some(&(piv, _)) => {
                owner[piv as usize] = reduced.len() as u32;
                pairs.push((sigma, (n as u32 - 1) - piv));
                reduced.push(col);
            }
            None => essential.push(sigma),
        }
    }
    DualResult { pairs, essential }
}

/// Reduces the boundary columns of `ids` (increasing), optionally tracking
/// the basis change. Returns reduced columns and basis columns in order.
fn boundary_reduction<F: Field>(
    k: &FilteredComplex,
    ids: &[u32],
    relative: bool,
    track: bool,
) -> (Vec<Col<F>>, Vec<Col<F>>, HashMap<u32, usize>) {
    let mut owner: HashMap<u32, usize> = HashMap::new();
    let mut reduced: Vec<Col<F>> = Vec::with_capacity(ids.len());
    let mut basis: Vec<Col<F>> = Vec::new();
    for &id in ids {
        let mut col = boundary_of::<F>(k, id as usize, relative).terms;
        let mut v: Col<F> = if track { vec![(id, F::one())] } else { Vec::new() };
        while let Some((piv, c)) = col.last().cloned() {
            match owner.get(&piv) {
                Some(&j) => {
                    let lambda = c.div(&reduced[j].last().unwrap().1).neg();
                    col = axpy(&col, &lambda, &reduced[j]);
                    if track {
                        v = axpy(&v, &lambda, &basis[j]);
                    }
                }
                None => break,
            }
        }
        if let Some(&(piv, _)) = col.last() {
            owner.insert(piv, reduced.len());
        }
        reduced.push(col);
        if track {
            basis.push(v);
        }
    }
    (reduced, basis, owner)
}

/// Reduces `col` against the owned pivots; returns the residue and the
/// accumulated basis combination.
fn reduce_against<F: Field>(
    mut col: Col<F>,
    mut v: Col<F>,
    reduced: &[Col<F>],
    basis: &[Col<F>],
    owner: &HashMap<u32, usize>,
) -> (Col<F>, Col<F>) {
    while let Some((piv, c)) = col.last().cloned() {
        match owner.get(&piv) {
            Some(&j) => {
                let lambda = c.div(&reduced[j].last().unwrap().1).neg();
                col = axpy(&col, &lambda, &reduced[j]);
                v = axpy(&v, &lambda, &basis[j]);
            }
            None => break,
        }
    }
    (col, v)
}

/// Negative `p`-simplices: deaths of degree `p−1` bars.
fn negatives<F: Field>(k: &FilteredComplex, p: usize, relative: bool) -> BTreeSet<u32> {
    let mut neg = BTreeSet::new();
    for q in 0..p {
        let r = dual_reduction::<F>(k, q, relative, &neg);
        neg = r.pairs.into_iter().map(|(_, t)| t).collect();
    }
    neg
}

/// Persistence of `H_p` of the filtration, with representatives.
pub fn persistence<F: Field>(k: &FilteredComplex, p: usize, relative: bool) -> Result<Persistence<F>, HomologyError> {
    if p + 1 > k.max_dim() {
        return Err(HomologyError::BadDegree { p, max_dim: k.max_dim() });
    }
    let neg_p = negatives::<F>(k, p, relative);
    let dual = dual_reduction::<F>(k, p, relative, &neg_p);

    // finite bars: reduced boundaries of the negative (p+1)-simplices
    let mut taus: Vec<u32> = dual.pairs.iter().map(|&(_, t)| t).collect();
    taus.sort_unstable();
    let (r_cols, _, _) = boundary_reduction::<F>(k, &taus, relative, false);
    let mut rep_of_tau: HashMap<u32, Col<F>> = HashMap::with_capacity(taus.len());
    for (t, col) in taus.iter().zip(r_cols) {
        rep_of_tau.insert(*t, col);
    }

    // essential bars: cycles from the reduction of the negative p-simplices
    let neg_ids: Vec<u32> = neg_p.iter().copied().collect();
    let (red, basis, owner) = boundary_reduction::<F>(k, &neg_ids, relative, true);

    let mut bars = Vec::with_capacity(dual.pairs.len() + dual.essential.len());
    let mut reps = Vec::with_capacity(bars.capacity());
    for &(sigma, tau) in &dual.pairs {
        let col = rep_of_tau.remove(&tau).expect("tau reduced");
        if col.last().map(|t| t.0) != Some(sigma) {
            return Err(HomologyError::Inconsistent(format!(
                "boundary reduction pairs {tau} with {:?}, coboundary reduction with {sigma}",
                col.last().map(|t| t.0)
            )));
        }
        bars.push(Bar {
            birth_simplex: sigma as usize,
            death_simplex: Some(tau as usize),
            birth: k.value(sigma as usize),
            death: Some(k.value(tau as usize)),
        });
        reps.push(Chain { degree: p, terms: col });
    }
    for &sigma in &dual.essential {
        let col = boundary_of::<F>(k, sigma as usize, relative).terms;
        let (res, v) = reduce_against(col, vec![(sigma, F::one())], &red, &basis, &owner);
        if !res.is_empty() {
            return Err(HomologyError::Inconsistent(format!("essential simplex {sigma} has a nonzero reduced boundary")));
        }
        bars.push(Bar { birth_simplex: sigma as usize, death_simplex: None, birth: k.value(sigma as usize), death: None });
        reps.push(Chain { degree: p, terms: v });
    }
    let mut order: Vec<usize> = (0..bars.len()).collect();
    order.sort_by_key(|&i| bars[i].birth_simplex);
    let bars: Vec<Bar> = order.iter().map(|&i| bars[i]).collect();
    let mut reps_sorted = Vec::with_capacity(reps.len());
    let mut reps: Vec<Option<Chain<F>>> = reps.into_iter().map(Some).collect();
    for &i in &order {
        reps_sorted.push(reps[i].take().unwrap());
    }
    let bar_of = bars.iter().enumerate().map(|(b, bar)| (bar.birth_simplex as u32, b)).collect();
    let slice_ends = (0..k.len()).map(|i| k.value(i)).collect();
    Ok(Persistence {
        degree: p,
        relative,
        cutoff: k.cutoff(),
        n_vertices: k.n_vertices(),
        bars,
        reps: reps_sorted,
        bar_of,
        slice_ends,
    })
}

/// Interval with a representative relative cycle at its birth.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<F> {
    pub birth: f64,
    pub death: Option<f64>,
    pub representative: Chain<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barcode<F> {
    pub degree: usize,
    pub intervals: Vec<Interval<F>>,
}

impl<F: Field> Barcode<F> {
    /// Rows `degree,birth,death`, `inf` for an infinite death.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,birth,death\n");
        for i in &self.intervals {
            let death = i.death.map_or("inf".to_string(), |d| d.to_string());
            let _ = writeln!(out, "{},{},{}", self.degree, i.birth, death);
        }
        out
    }
}

/// Witness of a nonzero induced map.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<F> {
    pub bar: usize,
    pub birth: f64,
    pub death: Option<f64>,
    pub cycle: Chain<F>,
}

impl<F: Field> Persistence<F> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn relative(&self) -> bool {
        self.relative
    }

    /// All bars, zero-length ones included, ordered by birth simplex.
    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn representative(&self, bar: usize) -> &Chain<F> {
        &self.reps[bar]
    }

    pub fn barcode(&self) -> Barcode<F> {
        let intervals = self
            .bars
            .iter()
            .zip(&self.reps)
            .filter(|(b, _)| b.death.is_none_or(|d| b.birth < d))
            .map(|(b, r)| Interval { birth: b.birth, death: b.death, representative: r.clone() })
            .collect();
        Barcode { degree: self.degree, intervals }
    }

    fn slice_len(&self, a: f64) -> usize {
        if a < 0.0 {
            return self.n_vertices;
        }
        let lim = a + slice_tolerance(a);
        self.slice_ends.partition_point(|&v| v <= lim)
    }

    fn check_param(&self, a: f64) -> Result<(), HomologyError> {
        if a > self.cutoff + slice_tolerance(self.cutoff) {
            return Err(HomologyError::ParameterBeyondCutoff { param: a, cutoff: self.cutoff });
        }
        Ok(())
    }

    /// Bars whose class is nonzero in `H_p` of the slice at `a`.
    pub fn alive_at(&self, a: f64) -> Result<Vec<usize>, HomologyError> {
        self.check_param(a)?;
        let len = self.slice_len(a);
        Ok((0..self.bars.len()).filter(|&b| self.alive_len(b, len)).collect())
    }

    fn alive_len(&self, b: usize, len: usize) -> bool {
        let bar = &self.bars[b];
        bar.birth_simplex < len && bar.death_simplex.is_none_or(|t| t >= len)
    }

    /// Rank of `H_p(slice s) → H_p(slice w)`.
    pub fn induced_rank(&self, s: f64, w: f64) -> Result<usize, HomologyError> {
        if s > w {
            return Err(HomologyError::BadParameters { s, w });
        }
        self.check_param(w)?;
        let (ls, lw) = (self.slice_len(s), self.slice_len(w));
        Ok((0..self.bars.len()).filter(|&b| self.alive_len(b, ls) && self.alive_len(b, lw)).count())
    }

    /// Coordinates of a relative cycle in the representative basis, as
    /// `(bar, coefficient)`. Bars dead at the chain's level contribute
    /// boundaries.
    pub fn coordinates(&self, k: &FilteredComplex, c: &Chain<F>) -> Result<Vec<(usize, F)>, HomologyError> {
        if c.degree != self.degree {
            return Err(HomologyError::NotACycle);
        }
        let mut work = if self.relative { c.quotient(k).terms } else { c.terms.clone() };
        let mut out = Vec::new();
        while let Some((id, coef)) = work.last().cloned() {
            let &b = self.bar_of.get(&id).ok_or(HomologyError::NotACycle)?;
            let rep = &self.reps[b].terms;
            let lambda = coef.div(&rep.last().unwrap().1);
            work = axpy(&work, &lambda.neg(), rep);
            out.push((b, lambda));
        }
        out.reverse();
        Ok(out)
    }

    /// Whether `[c]` is nonzero in the slice at `w`.
    pub fn class_nonzero_at(&self, k: &FilteredComplex, c: &Chain<F>, w: f64) -> Result<bool, HomologyError> {
        self.check_param(w)?;
        let len = self.slice_len(w);
        Ok(self.coordinates(k, c)?.iter().any(|(b, _)| self.alive_len(*b, len)))
    }

    /// Nonzero test for `H_p(slice s) → H_p(slice w)` with the surviving bar
    /// of latest death (earliest birth on ties) as witness.
    pub fn induced_map_nonzero(&self, s: f64, w: f64) -> Result<Option<Witness<F>>, HomologyError> {
        if s > w {
            return Err(HomologyError::BadParameters { s, w });
        }
        self.check_param(w)?;
        let (ls, lw) = (self.slice_len(s), self.slice_len(w));
        let best = (0..self.bars.len())
            .filter(|&b| self.alive_len(b, ls) && self.alive_len(b, lw))
            .max_by(|&x, &y| {
                let (bx, by) = (&self.bars[x], &self.bars[y]);
                let dx = bx.death.unwrap_or(f64::INFINITY);
                let dy = by.death.unwrap_or(f64::INFINITY);
                dx.partial_cmp(&dy)
                    .unwrap()
                    .then(by.birth_simplex.cmp(&bx.birth_simplex))
            });
        Ok(best.map(|b| Witness {
            bar: b,
            birth: self.bars[b].birth,
            death: self.bars[b].death,
            cycle: self.reps[b].clone(),
        }))
    }
}

/// Dense matrix of an induced map in the alive-bar bases.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMatrix<F> {
    /// Target bars alive at the target parameter.
    pub rows: Vec<usize>,
    /// Source bars alive at the source parameter.
    pub cols: Vec<usize>,
    /// Row-major, `rows.len() × cols.len()`.
    pub data: Vec<Vec<F>>,
}

impl<F: Field> InducedMatrix<F> {
    fn compose(&self, first: &InducedMatrix<F>) -> InducedMatrix<F> {
        debug_assert_eq!(self.cols, first.rows);
        let data = (0..self.rows.len())
            .map(|i| {
                (0..first.cols.len())
                    .map(|j| {
                        (0..self.cols.len()).fold(F::zero(), |acc, m| acc.add(&self.data[i][m].mul(&first.data[m][j])))
                    })
                    .collect()
            })
            .collect();
        InducedMatrix { rows: self.rows.clone(), cols: first.cols.clone(), data }
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self.data.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() }))
    }
}

/// Image of an oriented simplex under a vertex map: `None` when degenerate,
/// else the sorted image and whether the sort was odd.
pub fn map_simplex(f: &[usize], vertices: &[u32]) -> Option<(Vec<usize>, bool)> {
    let img: Vec<usize> = vertices.iter().map(|&v| f[v as usize]).collect();
    let (sorted, odd) = sort_with_parity(&img);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sorted, odd))
}

/// Chain map of a vertex map `S → T`. Degenerate images vanish; in
/// relative mode images inside `T`'s fence vanish too. Fails when an image
/// simplex is absent from `T` or exceeds `limit`.
pub fn push_forward<F: Field>(
    f: &[usize],
    s: &FilteredComplex,
    t: &FilteredComplex,
    c: &Chain<F>,
    relative: bool,
    limit: f64,
) -> Result<Chain<F>, HomologyError> {
    let lim = limit + slice_tolerance(limit);
    let mut terms = Vec::with_capacity(c.len());
    for (id, coef) in c.terms() {
        let vs = s.vertices(id);
        let Some((img, odd)) = map_simplex(f, vs) else { continue };
        let tid = t
            .find_usize(&img)
            .filter(|&tid| t.value(tid) <= lim)
            .ok_or_else(|| HomologyError::NotSimplicial(format!("image {img:?} of {vs:?} is not a simplex at {limit}")))?;
        if relative && t.is_fence(tid) {
            continue;
        }
        terms.push((tid, if odd { coef.neg() } else { coef.clone() }));
    }
    Ok(Chain::new(c.degree(), terms))
}

fn map_partners(f: &[usize]) -> Vec<Vec<usize>> {
    f.iter().map(|&y| vec![y]).collect()
}

/// Matrix of `H_p(S_a) → H_p(T_{a+ε})` induced by a vertex map.
/// Independent of the subordinate map only for `a ≥ 0`; below that the
/// vertex-only slice convention is not a Rips complex.
#[allow(clippy::too_many_arguments)]
pub fn induced_map_of_subordinate<F: Field>(
    f: &[usize],
    s: &FilteredComplex,
    t: &FilteredComplex,
    ps: &Persistence<F>,
    pt: &Persistence<F>,
    eps: f64,
    a: f64,
) -> Result<InducedMatrix<F>, HomologyError> {
    if let EpsSimplicialCheck::Fail { source, image, .. } =
        check_eps_simplicial_partners(&map_partners(f), ps.relative, s, t, eps)
    {
        return Err(HomologyError::NotSimplicial(format!("{source:?} maps to {image:?}")));
    }
    induced_matrix_unchecked(f, s, t, ps, pt, eps, a)
}

fn induced_matrix_unchecked<F: Field>(
    f: &[usize],
    s: &FilteredComplex,
    t: &FilteredComplex,
    ps: &Persistence<F>,
    pt: &Persistence<F>,
    eps: f64,
    a: f64,
) -> Result<InducedMatrix<F>, HomologyError> {
    let cols = ps.alive_at(a)?;
    let rows = pt.alive_at(a + eps)?;
    let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut data = vec![vec![F::zero(); cols.len()]; rows.len()];
    for (j, &b) in cols.iter().enumerate() {
        let img = push_forward(f, s, t, ps.representative(b), ps.relative, a.max(0.0) + eps)?;
        for (tb, coef) in pt.coordinates(t, &img)? {
            if let Some(&i) = pos.get(&tb) {
                data[i][j] = coef;
            }
        }
    }
    Ok(InducedMatrix { rows, cols, data })
}

fn shift_matrix<F: Field>(p: &Persistence<F>, a: f64, b: f64) -> Result<InducedMatrix<F>, HomologyError> {
    let cols = p.alive_at(a)?;
    let rows = p.alive_at(b)?;
    let data = rows.iter().map(|r| cols.iter().map(|c| if r == c { F::one() } else { F::zero() }).collect()).collect();
    Ok(InducedMatrix { rows, cols, data })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagram {
    /// `Ψ_{a+ε} ∘ Φ_a = shift by 2ε` on the source.
    SourceRoundTrip,
    /// `Φ_{a+ε} ∘ Ψ_a = shift by 2ε` on the target.
    TargetRoundTrip,
    /// `Φ` commutes with the shifts.
    PhiNatural,
    /// `Ψ` commutes with the shifts.
    PsiNatural,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterleavingCheck {
    Pass { pairs_checked: usize },
    Fail { diagram: Diagram, a: f64, b: f64 },
}

impl InterleavingCheck {
    pub fn passed(&self) -> bool {
        matches!(self, InterleavingCheck::Pass { .. })
    }
}

/// Critical values of both modules shifted by `0, ±ε, ±2ε`, with
/// midpoints of consecutive values. Negative values are left out: the Rips
/// complex is empty there and every diagram commutes trivially.
pub fn interleaving_params<F: Field>(ps: &Persistence<F>, pt: &Persistence<F>, eps: f64) -> Vec<f64> {
    let mut crit: Vec<f64> = Vec::new();
    for b in ps.bars.iter().chain(&pt.bars) {
        if b.death.is_none_or(|d| b.birth < d) {
            crit.push(b.birth);
            crit.extend(b.death);
        }
    }
    let mut params: Vec<f64> = crit
        .iter()
        .flat_map(|&c| [c - 2.0 * eps, c - eps, c, c + eps, c + 2.0 * eps])
        .chain(std::iter::once(0.0))
        .filter(|&x| x >= 0.0)
        .collect();
    params.sort_by(|x, y| x.partial_cmp(y).unwrap());
    params.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    let mids: Vec<f64> = params.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    params.extend(mids);
    params.sort_by(|x, y| x.partial_cmp(y).unwrap());
    params
}

/// Verifies the four interleaving diagrams for `Φ = H(C)`, `Ψ = H(Cᵀ)`
/// built from the first subordinate maps, at every pair `a ≤ b` of `params`.
pub fn check_interleaving<F: Field>(
    s: &FilteredComplex,
    t: &FilteredComplex,
    c: &Correspondence,
    eps: f64,
    p: usize,
    relative: bool,
    params: Option<&[f64]>,
) -> Result<InterleavingCheck, HomologyError> {
    let ct = transpose(c);
    for (corr, from, to) in [(c, s, t), (&ct, t, s)] {
        if let EpsSimplicialCheck::Fail { source, image, .. } = check_eps_simplicial_partners(&corr.partners(), relative, from, to, eps) {
            return Err(HomologyError::NotSimplicial(format!("{source:?} relates to {image:?}")));
        }
    }
    let f = c.first_subordinate_map();
    let g = ct.first_subordinate_map();
    let ps = persistence::<F>(s, p, relative)?;
    let pt = persistence::<F>(t, p, relative)?;
    let owned;
    let params: &[f64] = match params {
        Some(x) => {
            owned = x.iter().copied().filter(|&a| a >= 0.0).collect::<Vec<f64>>();
            &owned
        }
        None => {
            owned = interleaving_params(&ps, &pt, eps);
            &owned
        }
    };
    let mut phi: HashMap<u64, InducedMatrix<F>> = HashMap::new();
    let mut psi: HashMap<u64, InducedMatrix<F>> = HashMap::new();
    let get = |cache: &mut HashMap<u64, InducedMatrix<F>>, map: &[usize], from, to, pf, pt_, a: f64| -> Result<InducedMatrix<F>, HomologyError> {
        if let Some(m) = cache.get(&a.to_bits()) {
            return Ok(m.clone());
        }
        let m = induced_matrix_unchecked(map, from, to, pf, pt_, eps, a)?;
        cache.insert(a.to_bits(), m.clone());
        Ok(m)
    };
    let mut checked = 0;
    for (i, &a) in params.iter().enumerate() {
        let phi_a = get(&mut phi, &f, s, t, &ps, &pt, a)?;
        let psi_a = get(&mut psi, &g, t, s, &pt, &ps, a)?;
        let phi_ae = get(&mut phi, &f, s, t, &ps, &pt, a + eps)?;
        let psi_ae = get(&mut psi, &g, t, s, &pt, &ps, a + eps)?;
        if psi_ae.compose(&phi_a) != shift_matrix(&ps, a, a + 2.0 * eps)? {
            return Ok(InterleavingCheck::Fail { diagram: Diagram::SourceRoundTrip, a, b: a });
        }
        if phi_ae.compose(&psi_a) != shift_matrix(&pt, a, a + 2.0 * eps)? {
            return Ok(InterleavingCheck::Fail { diagram: Diagram::TargetRoundTrip, a, b: a });
        }
        for &b in &params[i..] {
            let phi_b = get(&mut phi, &f, s, t, &ps, &pt, b)?;
            let psi_b = get(&mut psi, &g, t, s, &pt, &ps, b)?;
            let lhs = shift_matrix(&pt, a + eps, b + eps)?.compose(&phi_a);
            if lhs != phi_b.compose(&shift_matrix(&ps, a, b)?) {
                return Ok(InterleavingCheck::Fail { diagram: Diagram::PhiNatural, a, b });
            }
            let lhs = shift_matrix(&ps, a + eps, b + eps)?.compose(&psi_a);
            if lhs != psi_b.compose(&shift_matrix(&pt, a, b)?) {
                return Ok(InterleavingCheck::Fail { diagram: Diagram::PsiNatural, a, b });
            }
            checked += 1;
        }
    }
    Ok(InterleavingCheck::Pass { pairs_checked: checked })
}
