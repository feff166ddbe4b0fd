use ripscover::field::{Field, Rational};
use ripscover::homology::{boundary_of, Chain};
use ripscover::rips::FilteredComplex;

fn q(v: i64) -> Rational {
    <Rational as Field>::from_i64(v)
}

pub fn norm(v: &[Rational]) -> Rational {
    v.iter().fold(q(0), |acc, x| acc.add(&x.abs()))
}

/// Solves the square system `a y = b`; `None` when singular.
pub fn solve_square(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    let mut m: Vec<Vec<Rational>> = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].inv();
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].mul(&inv);
                for j in c..=n {
                    let d = m[c][j].mul(&f);
                    m[r][j] = m[r][j].sub(&d);
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n].div(&m[i][i])).collect())
}

/// Indices of a maximal independent subset of the columns of `b`.
pub fn column_basis(b: &[Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut keep = Vec::new();
    for j in 0..ncols {
        let mut v: Vec<Rational> = b.iter().map(|r| r[j].clone()).collect();
        for (bv, &p) in basis.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let f = v[p].div(&bv[p]);
                v = v.iter().zip(bv).map(|(x, y)| x.sub(&y.mul(&f))).collect();
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            basis.push(v);
            pivots.push(p);
            keep.push(j);
        }
    }
    keep
}

pub fn subsets(n: usize, r: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, r, cur, f);
            cur.pop();
        }
    }
    go(0, n, r, &mut Vec::new(), f)
}

/// `min_y ‖z + B y‖₁` by enumerating the vertices of the hyperplane
/// arrangement `(B y)_i = −z_i`.
pub fn vertex_enumeration(b: &[Vec<Rational>], ncols: usize, z: &[Rational]) -> Rational {
    let cols = column_basis(b, ncols);
    let r = cols.len();
    if r == 0 {
        return norm(z);
    }
    let bb: Vec<Vec<Rational>> = b.iter().map(|row| cols.iter().map(|&j| row[j].clone()).collect()).collect();
    let eval = |y: &[Rational]| {
        let v: Vec<Rational> =
            bb.iter().zip(z).map(|(row, zi)| row.iter().zip(y).fold(zi.clone(), |acc, (a, yj)| acc.add(&a.mul(yj)))).collect();
        norm(&v)
    };
    let mut best: Option<Rational> = None;
    subsets(b.len(), r, &mut |rows| {
        let a: Vec<Vec<Rational>> = rows.iter().map(|&i| bb[i].clone()).collect();
        let rhs: Vec<Rational> = rows.iter().map(|&i| z[i].neg()).collect();
        if let Some(y) = solve_square(&a, &rhs) {
            let v = eval(&y);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    });
    best.expect("full column rank system has a vertex")
}

/// Dense `(rows, B)` of the absolute or relative problem with fence rows and columns
/// dropped in relative mode.
pub fn dense(k: &FilteredComplex, z: &Chain<Rational>, a: f64, relative: bool) -> (Vec<Vec<Rational>>, usize, Vec<Rational>) {
    let p = z.degree();
    let len = k.slice_len(a);
    let keep = |i: &usize| !(relative && k.is_fence(*i));
    let rows: Vec<usize> = (0..len).filter(|&i| k.dim(i) == p).filter(keep).collect();
    let cols: Vec<usize> = (0..len).filter(|&i| k.dim(i) == p + 1).filter(keep).collect();
    let bnd: Vec<Chain<Rational>> = cols.iter().map(|&c| boundary_of(k, c, false)).collect();
    let b = rows.iter().map(|&r| bnd.iter().map(|c| c.coeff(r)).collect()).collect();
    (b, cols.len(), rows.iter().map(|&r| z.coeff(r)).collect())
}

pub fn oracle_norm(k: &FilteredComplex, z: &Chain<Rational>, a: f64, relative: bool) -> Rational {
    let z = if relative { z.quotient(k) } else { z.clone() };
    let (b, n, zz) = dense(k, &z, a, relative);
    vertex_enumeration(&b, n, &zz)
}

/// `min ‖z + By‖₁` with `y ∈ {−1,0,1}ⁿ`, fence rows ignored.
pub fn unit_coset_min(k: &FilteredComplex, z: &Chain<Rational>, a: f64) -> Rational {
    let (b, n, zz) = dense(k, z, a, true);
    let mut best: Option<Rational> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let y: Vec<i64> = (0..n)
            .map(|_| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                d
            })
            .collect();
        let v: Vec<Rational> = b
            .iter()
            .zip(&zz)
            .map(|(row, zi)| row.iter().zip(&y).fold(zi.clone(), |acc, (x, &yj)| acc.add(&x.mul(&q(yj)))))
            .collect();
        let v = norm(&v);
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    best.unwrap()
}
