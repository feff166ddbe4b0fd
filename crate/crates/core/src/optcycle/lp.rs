//! Dense-tableau simplex method with Bland's rule.
//!
//! Rows that own a singleton column of matching sign start from that column
//! (a crash basis); the remaining rows get artificial variables and a first
//! phase. Exact over [`Rational`], approximate over `f64`.

use crate::field::{Field, Rational};

pub trait LpScalar: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn lt(&self, o: &Self) -> bool;
    fn to_f64(&self) -> f64;
    fn from_rational(q: &Rational) -> Self;
    /// Whether equalities between computed values are exact.
    const EXACT: bool;
}

impl LpScalar for Rational {
    fn zero() -> Self {
        <Rational as Field>::zero()
    }
    fn one() -> Self {
        <Rational as Field>::one()
    }
    fn from_i64(v: i64) -> Self {
        <Rational as Field>::from_i64(v)
    }
    fn add(&self, o: &Self) -> Self {
        Field::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Field::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Field::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Field::div(self, o)
    }
    fn neg(&self) -> Self {
        Field::neg(self)
    }
    fn is_zero(&self) -> bool {
        Field::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Rational::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Rational::is_negative(self)
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_f64(&self) -> f64 {
        Field::to_f64(self)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    const EXACT: bool = true;
}

/// Entries below this magnitude count as zero in floating point.
pub const F64_EPS: f64 = 1e-11;

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.abs() <= F64_EPS
    }
    fn is_positive(&self) -> bool {
        *self > F64_EPS
    }
    fn is_negative(&self) -> bool {
        *self < -F64_EPS
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_rational(q: &Rational) -> Self {
        Field::to_f64(q)
    }
    const EXACT: bool = false;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    NonNegative,
    Free,
}

/// `min cᵀx` subject to `Ax = b` and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<T> {
    pub costs: Vec<T>,
    /// Sparse rows of `A` as `(column, value)`.
    pub rows: Vec<Vec<(usize, T)>>,
    pub rhs: Vec<T>,
    pub bounds: Vec<Bound>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// Equality-row multipliers certifying optimality.
    pub duals: Vec<T>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("malformed problem: {0}")]
    Shape(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("tableau of {rows} rows by {cols} columns exceeds the budget of {budget} entries")]
    TooLarge { rows: usize, cols: usize, budget: usize },
}

/// Largest dense tableau `lp_solve` will allocate.
pub const MAX_TABLEAU_ENTRIES: usize = 4_000_000;

/// Duality gap tolerated by the floating-point path.
pub const F64_GAP_TOL: f64 = 1e-9;

struct Tableau<T> {
    /// `m` rows over `ncols` columns.
    t: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    /// Reduced costs.
    obj: Vec<T>,
    pivots: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.t[r][q].clone();
        if !piv.sub(&T::one()).is_zero() || !T::EXACT {
            let inv = T::one().div(&piv);
            for x in self.t[r].iter_mut() {
                if !x.is_zero() {
                    *x = x.mul(&inv);
                } else if !T::EXACT {
                    *x = T::zero();
                }
            }
            self.rhs[r] = self.rhs[r].mul(&inv);
        }
        self.t[r][q] = T::one();
        let nz: Vec<usize> = (0..self.t[r].len()).filter(|&j| !self.t[r][j].is_zero()).collect();
        let prow = self.t[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][q].is_zero() {
                continue;
            }
            let f = self.t[i][q].clone();
            for &j in &nz {
                self.t[i][j] = self.t[i][j].sub(&f.mul(&prow[j]));
            }
            self.t[i][q] = T::zero();
            self.rhs[i] = self.rhs[i].sub(&f.mul(&prhs));
        }
        if !self.obj[q].is_zero() {
            let f = self.obj[q].clone();
            for &j in &nz {
                self.obj[j] = self.obj[j].sub(&f.mul(&prow[j]));
            }
            self.obj[q] = T::zero();
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Bland: lowest-index improving column, lowest-index leaving basic variable on ratio ties.
    fn run(&mut self, eligible: &dyn Fn(usize) -> bool) -> Result<(), LpError> {
        loop {
            let Some(q) = (0..self.obj.len()).find(|&j| eligible(j) && self.obj[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = ratio.sub(&br).is_zero();
                        if (!tie && ratio.lt(&br)) || (tie && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else { return Err(LpError::Unbounded) };
            self.pivot(r, q);
        }
    }

    fn set_objective(&mut self, costs: &[T]) {
        self.obj = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, x) in self.t[i].iter().enumerate() {
                if !x.is_zero() {
                    self.obj[j] = self.obj[j].sub(&cb.mul(x));
                }
            }
        }
    }
}

pub fn lp_solve<T: LpScalar>(p: &LpProblem<T>) -> Result<LpSolution<T>, LpError> {
    let n = p.costs.len();
    let m = p.rows.len();
    if p.bounds.len() != n || p.rhs.len() != m {
        return Err(LpError::Shape(format!("{n} costs, {} bounds, {m} rows, {} rhs", p.bounds.len(), p.rhs.len())));
    }
    if let Some((i, j)) = p.rows.iter().enumerate().find_map(|(i, r)| r.iter().find(|(j, _)| *j >= n).map(|(j, _)| (i, *j))) {
        return Err(LpError::Shape(format!("row {i} references column {j}")));
    }
    // standard form: free variables become x⁺ − x⁻
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut ncols = 0;
    for b in &p.bounds {
        match b {
            Bound::NonNegative => {
                col_of.push((ncols, None));
                ncols += 1;
            }
            Bound::Free => {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
    }
    // room for one artificial per row and the right-hand side
    let width = ncols + m + 1;
    if m.saturating_mul(width) > MAX_TABLEAU_ENTRIES {
        return Err(LpError::TooLarge { rows: m, cols: width, budget: MAX_TABLEAU_ENTRIES });
    }
    let mut costs = vec![T::zero(); ncols];
    for (j, &(pos, neg)) in col_of.iter().enumerate() {
        costs[pos] = p.costs[j].clone();
        if let Some(neg) = neg {
            costs[neg] = p.costs[j].neg();
        }
    }
    let mut a = vec![vec![T::zero(); ncols]; m];
    for (i, row) in p.rows.iter().enumerate() {
        for (j, v) in row {
            let (pos, neg) = col_of[*j];
            a[i][pos] = a[i][pos].add(v);
            if let Some(neg) = neg {
                a[i][neg] = a[i][neg].sub(v);
            }
        }
    }
    // crash basis from singleton columns
    let mut singleton: Vec<Option<usize>> = vec![None; ncols];
    let mut count = vec![0usize; ncols];
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_zero() {
                count[j] += 1;
                singleton[j] = Some(i);
            }
        }
    }
    let mut basis: Vec<Option<usize>> = vec![None; m];
    for j in 0..ncols {
        if count[j] != 1 {
            continue;
        }
        let i = singleton[j].unwrap();
        let aij = &a[i][j];
        let ok = p.rhs[i].is_zero() || (aij.is_positive() == p.rhs[i].is_positive());
        if basis[i].is_none() && ok {
            basis[i] = Some(j);
        }
    }
    let mut flip = vec![false; m];
    let mut rhs = p.rhs.clone();
    let mut art_row = Vec::new();
    for i in 0..m {
        if basis[i].is_none() {
            if rhs[i].is_negative() {
                flip[i] = true;
                for x in a[i].iter_mut() {
                    *x = x.neg();
                }
                rhs[i] = rhs[i].neg();
            }
            art_row.push(i);
        }
    }
    let total = ncols + art_row.len();
    for row in a.iter_mut() {
        row.resize(total, T::zero());
    }
    for (k, &i) in art_row.iter().enumerate() {
        a[i][ncols + k] = T::one();
        basis[i] = Some(ncols + k);
    }
    let basis: Vec<usize> = basis.into_iter().map(|b| b.unwrap()).collect();
    let init_col = basis.clone();
    // B is diagonal with entries a[i][basis[i]]
    for i in 0..m {
        let d = a[i][basis[i]].clone();
        if !d.sub(&T::one()).is_zero() {
            let inv = T::one().div(&d);
            for x in a[i].iter_mut() {
                if !x.is_zero() {
                    *x = x.mul(&inv);
                }
            }
            rhs[i] = rhs[i].mul(&inv);
        }
    }
    let mut tab = Tableau { t: a, rhs, basis, obj: Vec::new(), pivots: 0 };
    if !art_row.is_empty() {
        let mut c1 = vec![T::zero(); total];
        for c in c1.iter_mut().skip(ncols) {
            *c = T::one();
        }
        tab.set_objective(&c1);
        tab.run(&|_| true)?;
        let infeasibility = (0..m)
            .filter(|&i| tab.basis[i] >= ncols)
            .fold(T::zero(), |acc, i| acc.add(&tab.rhs[i]));
        if infeasibility.is_positive() {
            return Err(LpError::Infeasible);
        }
        for i in 0..m {
            if tab.basis[i] >= ncols {
                if let Some(q) = (0..ncols).find(|&j| !tab.t[i][j].is_zero()) {
                    tab.pivot(i, q);
                }
            }
        }
    }
    let mut c2 = costs.clone();
    c2.resize(total, T::zero());
    tab.set_objective(&c2);
    tab.run(&|j| j < ncols)?;

    let mut xs = vec![T::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        xs[b] = tab.rhs[i].clone();
    }
    let x: Vec<T> = col_of
        .iter()
        .map(|&(pos, neg)| match neg {
            Some(neg) => xs[pos].sub(&xs[neg]),
            None => xs[pos].clone(),
        })
        .collect();
    let objective = x.iter().zip(&p.costs).fold(T::zero(), |acc, (x, c)| acc.add(&x.mul(c)));
    // π_i from the reduced cost of the column that started basic in row i
    let orig_diag: Vec<T> = (0..m)
        .map(|i| {
            let j = init_col[i];
            if j >= ncols {
                T::one()
            } else {
                let raw = p.rows[i].iter().fold(T::zero(), |acc, (jj, v)| {
                    let (pos, neg) = col_of[*jj];
                    if pos == j {
                        acc.add(v)
                    } else if neg == Some(j) {
                        acc.sub(v)
                    } else {
                        acc
                    }
                });
                if flip[i] {
                    raw.neg()
                } else {
                    raw
                }
            }
        })
        .collect();
    let duals: Vec<T> = (0..m)
        .map(|i| {
            let j = init_col[i];
            let pi = c2[j].sub(&tab.obj[j]).div(&orig_diag[i]);
            if flip[i] {
                pi.neg()
            } else {
                pi
            }
        })
        .collect();
    let sol = LpSolution { x, objective, duals, pivots: tab.pivots };
    certify(p, &sol)?;
    Ok(sol)
}

/// Primal feasibility, dual feasibility and zero duality gap.
pub fn certify<T: LpScalar>(p: &LpProblem<T>, s: &LpSolution<T>) -> Result<(), LpError> {
    let close = |a: &T, b: &T| {
        if T::EXACT {
            a == b
        } else {
            (a.to_f64() - b.to_f64()).abs() <= F64_GAP_TOL * (1.0 + a.to_f64().abs().max(b.to_f64().abs()))
        }
    };
    for (i, row) in p.rows.iter().enumerate() {
        let lhs = row.iter().fold(T::zero(), |acc, (j, v)| acc.add(&v.mul(&s.x[*j])));
        if !close(&lhs, &p.rhs[i]) {
            return Err(LpError::NumericalFailure(format!("row {i} violated")));
        }
    }
    for (j, b) in p.bounds.iter().enumerate() {
        if *b == Bound::NonNegative && s.x[j].is_negative() {
            return Err(LpError::NumericalFailure(format!("x[{j}] negative")));
        }
    }
    // reduced costs c − Aᵀπ: zero on free variables, nonnegative otherwise
    let mut rc = p.costs.clone();
    for (i, row) in p.rows.iter().enumerate() {
        for (j, v) in row {
            rc[*j] = rc[*j].sub(&v.mul(&s.duals[i]));
        }
    }
    for (j, b) in p.bounds.iter().enumerate() {
        let bad = if T::EXACT {
            match b {
                Bound::Free => !rc[j].is_zero(),
                Bound::NonNegative => rc[j].is_negative(),
            }
        } else {
            let v = rc[j].to_f64();
            match b {
                Bound::Free => v.abs() > F64_GAP_TOL,
                Bound::NonNegative => v < -F64_GAP_TOL,
            }
        };
        if bad {
            return Err(LpError::NumericalFailure(format!("dual infeasible at column {j}")));
        }
    }
    let dual_obj = s.duals.iter().zip(&p.rhs).fold(T::zero(), |acc, (y, b)| acc.add(&y.mul(b)));
    if !close(&dual_obj, &s.objective) {
        return Err(LpError::NumericalFailure(format!(
            "duality gap {} vs {}",
            dual_obj.to_f64(),
            s.objective.to_f64()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        <Rational as LpScalar>::from_i64(v)
    }

    #[test]
    fn abs_with_free_shift() {
        // min x⁺ + x⁻ s.t. x⁺ − x⁻ − y = 5
        let p = LpProblem {
            costs: vec![q(1), q(1), q(0)],
            rows: vec![vec![(0, q(1)), (1, q(-1)), (2, q(-1))]],
            rhs: vec![q(5)],
            bounds: vec![Bound::NonNegative, Bound::NonNegative, Bound::Free],
        };
        let s = lp_solve(&p).unwrap();
        assert_eq!(s.objective, q(0));
        assert_eq!(s.x[2], q(-5));
    }

    #[test]
    fn fixed_vector_norm() {
        let p = LpProblem {
            costs: vec![q(1); 4],
            rows: vec![vec![(0, q(1)), (1, q(-1))], vec![(2, q(1)), (3, q(-1))]],
            rhs: vec![q(1), q(1)],
            bounds: vec![Bound::NonNegative; 4],
        };
        assert_eq!(lp_solve(&p).unwrap().objective, q(2));
    }

    #[test]
    fn oversized_tableau_is_refused() {
        let m = 2100;
        let p = LpProblem {
            costs: vec![1.0; m],
            rows: (0..m).map(|i| vec![(i, 1.0)]).collect(),
            rhs: vec![1.0; m],
            bounds: vec![Bound::NonNegative; m],
        };
        assert!(matches!(lp_solve(&p), Err(LpError::TooLarge { rows: 2100, .. })));
    }

    #[test]
    fn phase_one_and_infeasible() {
        // min x + y s.t. x + y = 2, x − y = 0
        let p = LpProblem {
            costs: vec![q(1), q(1)],
            rows: vec![vec![(0, q(1)), (1, q(1))], vec![(0, q(1)), (1, q(-1))]],
            rhs: vec![q(2), q(0)],
            bounds: vec![Bound::NonNegative; 2],
        };
        let s = lp_solve(&p).unwrap();
        assert_eq!(s.x, vec![q(1), q(1)]);
        let bad = LpProblem {
            costs: vec![q(1)],
            rows: vec![vec![(0, q(1))]],
            rhs: vec![q(-1)],
            bounds: vec![Bound::NonNegative],
        };
        assert_eq!(lp_solve(&bad), Err(LpError::Infeasible));
        let unb = LpProblem {
            costs: vec![q(-1), q(0)],
            rows: vec![vec![(0, q(1)), (1, q(-1))]],
            rhs: vec![q(0)],
            bounds: vec![Bound::NonNegative; 2],
        };
        assert_eq!(lp_solve(&unb), Err(LpError::Unbounded));
    }

    #[test]
    fn float_path_agrees() {
        let p = LpProblem {
            costs: vec![1.0, 1.0, 0.0],
            rows: vec![vec![(0, 1.0), (1, -1.0), (2, -1.0)]],
            rhs: vec![5.0],
            bounds: vec![Bound::NonNegative, Bound::NonNegative, Bound::Free],
        };
        assert!(lp_solve(&p).unwrap().objective.abs() < 1e-12);
    }
}
