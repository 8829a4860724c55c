//! Smith normal form over the integers with unimodular transforms.
//!
//! Pivoting picks the smallest nonzero absolute value in the active
//! submatrix, ties broken by row-major position. Work is carried out in
//! checked `i128`; any overflow aborts with [`Error::Overflow`].

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Elementary divisors `d_1 | d_2 | ... | d_r`, all positive.
    pub diagonal: Vec<i64>,
    pub rank: usize,
    /// `left * A * right` is the diagonal embedding of `diagonal`.
    pub left: IntMatrix,
    pub right: IntMatrix,
}

struct Work {
    rows: usize,
    cols: usize,
    a: Vec<Vec<i128>>,
    u: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
}

const OVERFLOW: Error = Error::Overflow("Smith normal form");

fn axpy(dst: &mut [i128], src: &[i128], q: i128) -> Result<()> {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = s
            .checked_mul(q)
            .and_then(|p| d.checked_sub(p))
            .ok_or(OVERFLOW)?;
    }
    Ok(())
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.u.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
    }

    /// row_i -= q * row_t (on A and U)
    fn row_sub(&mut self, i: usize, t: usize, q: i128) -> Result<()> {
        let (src, dst) = pair(&mut self.a, t, i);
        axpy(dst, src, q)?;
        let (src, dst) = pair(&mut self.u, t, i);
        axpy(dst, src, q)
    }

    /// col_j -= q * col_t (on A and V)
    fn col_sub(&mut self, j: usize, t: usize, q: i128) -> Result<()> {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row[j] = row[t]
                .checked_mul(q)
                .and_then(|p| row[j].checked_sub(p))
                .ok_or(OVERFLOW)?;
        }
        Ok(())
    }

    fn negate_row(&mut self, t: usize) {
        for x in self.a[t].iter_mut().chain(self.u[t].iter_mut()) {
            *x = -*x;
        }
    }

    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(i128, usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = self.a[i][j].unsigned_abs() as i128;
                if x != 0 && best.map_or(true, |(b, _, _)| x < b) {
                    best = Some((x, i, j));
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    fn undivisible(&self, t: usize) -> Option<usize> {
        let d = self.a[t][t];
        (t + 1..self.rows).find(|&i| (t + 1..self.cols).any(|j| self.a[i][j] % d != 0))
    }
}

/// Two distinct rows, the first immutably borrowed.
fn pair(m: &mut [Vec<i128>], src: usize, dst: usize) -> (&[i128], &mut [i128]) {
    if src < dst {
        let (lo, hi) = m.split_at_mut(dst);
        (&lo[src], &mut hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(src);
        (&hi[0], &mut lo[dst])
    }
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn narrow(m: &[Vec<i128>], rows: usize, cols: usize) -> Result<IntMatrix> {
    let mut out = IntMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            out[(i, j)] = i64::try_from(m[i][j]).map_err(|_| OVERFLOW)?;
        }
    }
    Ok(out)
}

pub fn smith_normal_form(matrix: &IntMatrix) -> Result<SmithForm> {
    let (rows, cols) = (matrix.nrows(), matrix.ncols());
    let mut w = Work {
        rows,
        cols,
        a: (0..rows)
            .map(|i| matrix.row(i).iter().map(|&x| x as i128).collect())
            .collect(),
        u: identity(rows),
        v: identity(cols),
    };
    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let Some((pi, pj)) = w.pivot(t) else {
                break;
            };
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);
            if w.a[t][t] < 0 {
                w.negate_row(t);
            }
            let d = w.a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = w.a[i][t] / d;
                if q != 0 {
                    w.row_sub(i, t, q)?;
                }
                clean &= w.a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = w.a[t][j] / d;
                if q != 0 {
                    w.col_sub(j, t, q)?;
                }
                clean &= w.a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            match w.undivisible(t) {
                Some(i) => {
                    // row_t += row_i, then re-reduce
                    w.row_sub(t, i, -1)?;
                }
                None => break,
            }
        }
        if w.a[t][t] == 0 {
            break;
        }
        diagonal.push(i64::try_from(w.a[t][t]).map_err(|_| OVERFLOW)?);
    }
    Ok(SmithForm {
        rank: diagonal.len(),
        diagonal,
        left: narrow(&w.u, rows, rows)?,
        right: narrow(&w.v, cols, cols)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn check_transforms(a: &IntMatrix, snf: &SmithForm) {
        let d = snf.left.checked_mul(a).unwrap().checked_mul(&snf.right).unwrap();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                let want = if i == j && i < snf.rank { snf.diagonal[i] } else { 0 };
                assert_eq!(d[(i, j)], want, "entry ({i},{j}) of {d:?}");
            }
        }
    }

    #[test]
    fn identity_matrix() {
        let a = IntMatrix::identity(2);
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(snf.diagonal, vec![1, 1]);
        check_transforms(&a, &snf);
    }

    #[test]
    fn two_by_two() {
        let a = m(&[&[2, 4], &[6, 8]]);
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(snf.diagonal, vec![2, 4]);
        check_transforms(&a, &snf);
    }

    #[test]
    fn zero_matrix() {
        let a = IntMatrix::zeros(3, 2);
        let snf = smith_normal_form(&a).unwrap();
        assert!(snf.diagonal.is_empty());
        assert_eq!(snf.rank, 0);
        check_transforms(&a, &snf);
    }

    #[test]
    fn needs_divisibility_fix() {
        let a = m(&[&[2, 0], &[0, 3]]);
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(snf.diagonal, vec![1, 6]);
        check_transforms(&a, &snf);
    }

    #[test]
    fn empty_shapes() {
        for a in [IntMatrix::zeros(0, 3), IntMatrix::zeros(2, 0), IntMatrix::zeros(0, 0)] {
            let snf = smith_normal_form(&a).unwrap();
            assert_eq!(snf.rank, 0);
            assert_eq!(snf.left.nrows(), a.nrows());
            assert_eq!(snf.right.nrows(), a.ncols());
        }
    }

    #[test]
    fn overflow_detected() {
        // divisors (1, 3^25 * 2^40) cannot be represented in i64
        let a = m(&[&[3i64.pow(25), 0], &[0, 1 << 40]]);
        assert!(matches!(smith_normal_form(&a), Err(Error::Overflow(_))));
    }
}
