//! Exact linear algebra over rationals.

use num_traits::{One, Zero};

use crate::pddl::Rational;

pub type Vector = Vec<Rational>;

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Reduces `m` in place to reduced row echelon form and returns the pivot columns.
/// Zero rows are dropped.
pub fn rref(m: &mut Vec<Vector>) -> Vec<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, p) in m[i][c..cols].iter_mut().zip(&pivot_row[c..cols]) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    pivots
}

/// Basis of { x : m x = 0 } for a matrix with `cols` columns.
pub fn nullspace(m: &[Vector], cols: usize) -> Vec<Vector> {
    let mut r: Vec<Vector> = m.to_vec();
    let pivots = rref(&mut r);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (row, &p) in r.iter().zip(&pivots) {
            v[p] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Row space kept in reduced form so that rank increases can be tested one row at a time.
#[derive(Debug, Clone, Default)]
pub struct RowBasis {
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl RowBasis {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Remainder of `v` after eliminating against the basis.
    fn reduce(&self, v: &[Rational]) -> Vector {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v` if it is independent of the basis; returns whether it was added.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].recip();
        for x in r.iter_mut() {
            *x *= &inv;
        }
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&r) {
                    *x -= &f * y;
                }
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }
}

/// Unique solution of the square system `a x = b`, if `a` is non-singular.
pub fn solve_square(a: &[Vector], b: &[Rational]) -> Option<Vector> {
    let n = a.len();
    let mut m: Vec<Vector> = a
        .iter()
        .zip(b)
        .map(|(row, y)| {
            let mut r = row.clone();
            r.push(y.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(m.iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::rat;

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn rref_finds_rank() {
        let mut m = vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])];
        let p = rref(&mut m);
        assert_eq!(p, vec![0, 1]);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn nullspace_is_orthogonal_to_rows() {
        let m = vec![v(&[1, 2, 3]), v(&[0, 1, 1])];
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        for row in &m {
            assert!(dot(row, &ns[0]).is_zero());
        }
    }

    #[test]
    fn row_basis_detects_dependence() {
        let mut b = RowBasis::default();
        assert!(b.insert(&v(&[1, 0, 1])));
        assert!(b.insert(&v(&[0, 1, 1])));
        assert!(!b.insert(&v(&[2, 3, 5])));
        assert!(b.contains(&v(&[1, 1, 2])));
        assert_eq!(b.rank(), 2);
    }

    #[test]
    fn solves_two_by_two() {
        // 10 w + b = 9, 7 w + b = 6
        let x = solve_square(&[v(&[10, 1]), v(&[7, 1])], &v(&[9, 6])).unwrap();
        assert_eq!(x, v(&[1, -1]));
        assert!(solve_square(&[v(&[1, 1]), v(&[2, 2])], &v(&[1, 2])).is_none());
    }
}
