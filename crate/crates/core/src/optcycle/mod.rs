//! L1-optimal homologous cycles and sensor coverage sets.

pub mod lp;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::field::{Field, Rational};
use crate::homology::{boundary, boundary_of, Chain, ChainJson};
use crate::rips::FilteredComplex;
use lp::{lp_solve, Bound, LpError, LpProblem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptError {
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("chain is not a relative cycle")]
    NotARelativeCycle,
    #[error("simplex {0} lies outside the slice at {1}")]
    OutsideSlice(usize, f64),
    #[error("chain is zero")]
    ZeroChain,
    #[error("optimum is not homologous to the input")]
    NotHomologous,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Whether fence slack coordinates count towards the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FenceCost {
    /// `‖x̂‖₁` over all rows.
    #[default]
    Charged,
    Free,
}

/// One instance of the L1 optimal homologous cycle problem on a slice.
///
/// Rows are the `p`-simplices of the slice with fence rows first; columns of
/// `B` are the `(p+1)`-simplices with the frozen (fence) ones first.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Problem {
    pub degree: usize,
    pub param: f64,
    pub rows: Vec<usize>,
    /// Number of leading fence rows (slack `a_i`).
    pub free_rows: usize,
    pub columns: Vec<usize>,
    /// Number of leading fence columns (excluded from `y`).
    pub frozen: usize,
    pub input: Vec<Rational>,
    pub fence_cost: FenceCost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Solution {
    /// `x̂` over all rows, fence rows included.
    pub chain: Chain<Rational>,
    pub l1_norm: Rational,
    pub input_norm: Rational,
    /// Coefficients on the free columns.
    pub y: Vec<Rational>,
    /// Slack on the fence rows.
    pub slack: Vec<Rational>,
    pub pivots: usize,
}

fn l1(c: &Chain<Rational>) -> Rational {
    c.terms().fold(Rational::zero(), |acc, (_, v)| acc.add(&v.abs()))
}

fn ordered(k: &FilteredComplex, p: usize, len: usize, relative: bool) -> (Vec<usize>, usize) {
    let ids = (0..len).filter(|&i| k.dim(i) == p);
    if !relative {
        return (ids.collect(), 0);
    }
    let (fence, rest): (Vec<usize>, Vec<usize>) = ids.partition(|&i| k.is_fence(i));
    let s = fence.len();
    (fence.into_iter().chain(rest).collect(), s)
}

impl L1Problem {
    fn build(k: &FilteredComplex, z: &Chain<Rational>, param: f64, relative: bool) -> Result<Self, OptError> {
        let p = z.degree();
        let len = k.slice_len(param);
        if let Some((id, _)) = z.terms().find(|(id, _)| *id >= len) {
            return Err(OptError::OutsideSlice(id, param));
        }
        let (rows, free_rows) = ordered(k, p, len, relative);
        let (columns, frozen) = ordered(k, p + 1, len, relative);
        let input = rows.iter().map(|&r| z.coeff(r)).collect();
        Ok(L1Problem { degree: p, param, rows, free_rows, columns, frozen, input, fence_cost: FenceCost::Charged })
    }

    /// Problem over the slice at `param` with no fence.
    pub fn absolute(k: &FilteredComplex, z: &Chain<Rational>, param: f64) -> Result<Self, OptError> {
        if !boundary(k, z, false).is_zero() {
            return Err(OptError::NotACycle);
        }
        Self::build(k, z, param, false)
    }

    /// Problem over the slice at `param` relative to the fence. Fence terms
    /// of `z` are discarded first.
    pub fn relative(k: &FilteredComplex, z: &Chain<Rational>, param: f64, fence_cost: FenceCost) -> Result<Self, OptError> {
        let z = z.quotient(k);
        if !boundary(k, &z, true).is_zero() {
            return Err(OptError::NotARelativeCycle);
        }
        let mut prob = Self::build(k, &z, param, true)?;
        prob.fence_cost = fence_cost;
        Ok(prob)
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Variables `x⁺ (m) | x⁻ (m) | y (n − t) | a (s)`; rows `x⁺ − x⁻ − By − Ea = z`.
    pub fn to_lp<T: lp::LpScalar>(&self, k: &FilteredComplex) -> LpProblem<T> {
        let m = self.m();
        let ny = self.n() - self.frozen;
        let row_of: HashMap<usize, usize> = self.rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut rows: Vec<Vec<(usize, T)>> = (0..m).map(|i| vec![(i, T::one()), (m + i, T::one().neg())]).collect();
        for (j, &col) in self.columns[self.frozen..].iter().enumerate() {
            for (f, c) in boundary_of::<Rational>(k, col, false).terms() {
                if let Some(&i) = row_of.get(&f) {
                    rows[i].push((2 * m + j, T::from_rational(c).neg()));
                }
            }
        }
        for (i, row) in rows.iter_mut().take(self.free_rows).enumerate() {
            row.push((2 * m + ny + i, T::one().neg()));
        }
        let mut costs = vec![T::one(); 2 * m];
        if self.fence_cost == FenceCost::Free {
            for i in 0..self.free_rows {
                costs[i] = T::zero();
                costs[m + i] = T::zero();
            }
        }
        costs.extend(std::iter::repeat_n(T::zero(), ny + self.free_rows));
        let mut bounds = vec![Bound::NonNegative; 2 * m];
        bounds.extend(std::iter::repeat_n(Bound::Free, ny + self.free_rows));
        LpProblem { costs, rows, rhs: self.input.iter().map(T::from_rational).collect(), bounds }
    }

    pub fn solve(&self, k: &FilteredComplex) -> Result<L1Solution, OptError> {
        let m = self.m();
        let ny = self.n() - self.frozen;
        let sol = lp_solve::<Rational>(&self.to_lp(k))?;
        let chain = Chain::new(self.degree, (0..m).map(|i| (self.rows[i], sol.x[i].sub(&sol.x[m + i]))));
        let input = Chain::new(self.degree, self.rows.iter().zip(&self.input).map(|(&r, c)| (r, c.clone())));
        Ok(L1Solution {
            chain,
            l1_norm: sol.objective,
            input_norm: l1(&input),
            y: sol.x[2 * m..2 * m + ny].to_vec(),
            slack: sol.x[2 * m + ny..].to_vec(),
            pivots: sol.pivots,
        })
    }

    /// Objective of the floating-point solve, for cross-checking.
    pub fn solve_f64(&self, k: &FilteredComplex) -> Result<f64, OptError> {
        Ok(lp_solve::<f64>(&self.to_lp(k))?.objective)
    }
}

/// Minimizes `‖z + By‖₁` over the slice at `param`.
pub fn l1_optimal_cycle(k: &FilteredComplex, z: &Chain<Rational>, param: f64) -> Result<L1Solution, OptError> {
    L1Problem::absolute(k, z, param)?.solve(k)
}

/// As [`l1_optimal_cycle`] with `B` restricted to non-fence columns and free
/// slack on fence rows.
pub fn l1_optimal_relative_cycle(
    k: &FilteredComplex,
    z: &Chain<Rational>,
    param: f64,
    fence_cost: FenceCost,
) -> Result<L1Solution, OptError> {
    L1Problem::relative(k, z, param, fence_cost)?.solve(k)
}

/// Whether `diff` lies in the span of the slice's `(p+1)`-boundaries, plus
/// fence `p`-simplices in relative mode. Exact elimination.
pub fn in_boundary_span(k: &FilteredComplex, diff: &Chain<Rational>, param: f64, relative: bool) -> bool {
    let p = diff.degree();
    let len = k.slice_len(param);
    let target = if relative { diff.quotient(k) } else { diff.clone() };
    if target.terms().any(|(id, _)| id >= len) {
        return false;
    }
    let mut pivots: HashMap<usize, Chain<Rational>> = HashMap::new();
    let reduce = |mut c: Chain<Rational>, pivots: &HashMap<usize, Chain<Rational>>| {
        while let Some(low) = c.last_id() {
            let Some(piv) = pivots.get(&low) else { break };
            let lambda = c.coeff(low).div(&piv.coeff(low));
            c = c.add_scaled(&lambda.neg(), piv);
        }
        c
    };
    for id in (0..len).filter(|&i| k.dim(i) == p + 1 && !(relative && k.is_fence(i))) {
        let c = reduce(boundary_of(k, id, relative), &pivots);
        if let Some(low) = c.last_id() {
            pivots.insert(low, c);
        }
    }
    reduce(target, &pivots).is_zero()
}

/// Sensors whose balls of radius `r_c` make up the coverage of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSet {
    pub active: BTreeSet<usize>,
    pub r_c: f64,
}

impl CoverageSet {
    /// Sensors outside the coverage set, safe to power down.
    pub fn deactivated(&self, n_sensors: usize) -> Vec<usize> {
        (0..n_sensors).filter(|i| !self.active.contains(i)).collect()
    }
}

pub fn coverage_of_chain<F: Field>(k: &FilteredComplex, z: &Chain<F>, r_c: f64) -> Result<CoverageSet, OptError> {
    if z.is_zero() {
        return Err(OptError::ZeroChain);
    }
    Ok(CoverageSet { active: z.support_vertices(k), r_c })
}

/// Relative optimum of a transported witness on the perturbed complex at
/// `r_s`, with its coverage set. Certified homologous to the input before
/// returning.
pub fn minimal_coverage_cycle(
    k: &FilteredComplex,
    fz: &Chain<Rational>,
    r_s: f64,
    r_c: f64,
    fence_cost: FenceCost,
) -> Result<(L1Solution, CoverageSet), OptError> {
    let sol = l1_optimal_relative_cycle(k, fz, r_s, fence_cost)?;
    if !in_boundary_span(k, &sol.chain.sub(fz), r_s, true) {
        return Err(OptError::NotHomologous);
    }
    let cov = coverage_of_chain(k, &sol.chain.quotient(k), r_c)?;
    Ok((sol, cov))
}

/// `{"chain":..,"l1_norm":"num/den","active_sensors":[..],"deactivated":[..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleJson {
    pub chain: ChainJson,
    pub l1_norm: String,
    pub active_sensors: Vec<usize>,
    pub deactivated: Vec<usize>,
}

impl CycleJson {
    pub fn new(k: &FilteredComplex, sol: &L1Solution, cov: &CoverageSet, n_sensors: usize) -> Self {
        CycleJson {
            chain: sol.chain.quotient(k).to_json(k),
            l1_norm: sol.l1_norm.to_string(),
            active_sensors: cov.active.iter().copied().collect(),
            deactivated: cov.deactivated(n_sensors),
        }
    }
}
