//! Independent oracles shared by the integration tests. Nothing here calls
//! into the Smith normal form code.
#![allow(dead_code)]

use morsehb::complex::GradedComplex;
use morsehb::homology::{HomologyGroup, HomologyResult};
use morsehb::IntMatrix;
use rand::Rng;

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Determinant by cofactor expansion along the first row.
pub fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut total = 0;
            for j in 0..n {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                total += sign * m[0][j] * det(&minor);
            }
            total
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Determinantal divisors `d_1, d_2, ...` (gcd of all k by k minors), stopping
/// at the first zero.
pub fn determinantal_divisors(a: &IntMatrix) -> Vec<i128> {
    let rows = a.to_rows();
    let (m, n) = (a.nrows(), a.ncols());
    let mut out = Vec::new();
    for k in 1..=m.min(n) {
        let mut g = 0i128;
        for rs in subsets(m, k) {
            for cs in subsets(n, k) {
                let sub: Vec<Vec<i128>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| rows[r][c] as i128).collect())
                    .collect();
                g = gcd(g, det(&sub));
            }
        }
        if g == 0 {
            break;
        }
        out.push(g);
    }
    out
}

/// Elementary divisors from the gcd-of-minors characterisation.
pub fn elementary_divisors(a: &IntMatrix) -> Vec<i64> {
    let d = determinantal_divisors(a);
    let mut prev = 1i128;
    d.iter()
        .map(|&x| {
            let e = x / prev;
            prev = x;
            e as i64
        })
        .collect()
}

/// Rank over the rationals via fraction-free (Bareiss) elimination.
pub fn rational_rank(a: &IntMatrix) -> usize {
    let mut m: Vec<Vec<i128>> = a.to_rows().iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                m[r][j] = (m[r][j] * m[rank][c] - m[r][c] * m[rank][j]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
    }
    rank
}

pub fn random_matrix(rng: &mut impl Rng, max_dim: usize, entry: i64) -> IntMatrix {
    let r = rng.gen_range(0..=max_dim);
    let c = rng.gen_range(0..=max_dim);
    let body: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-entry..=entry)).collect()).collect();
    IntMatrix::from_rows_shaped(r, c, &body).unwrap()
}

/// A random unimodular matrix together with its inverse.
pub fn random_unimodular(rng: &mut impl Rng, n: usize, ops: usize) -> (IntMatrix, IntMatrix) {
    let mut u = vec![vec![0i64; n]; n];
    let mut inv = u.clone();
    for i in 0..n {
        u[i][i] = 1;
        inv[i][i] = 1;
    }
    if n == 0 {
        return (IntMatrix::zeros(0, 0), IntMatrix::zeros(0, 0));
    }
    for _ in 0..ops {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        match rng.gen_range(0..3) {
            0 if i != j => {
                // row_i += q row_j on u; column_j -= q column_i on the inverse
                let q = rng.gen_range(-2..=2);
                for c in 0..n {
                    u[i][c] += q * u[j][c];
                }
                for r in 0..n {
                    inv[r][j] -= q * inv[r][i];
                }
            }
            1 => {
                u.swap(i, j);
                for row in inv.iter_mut() {
                    row.swap(i, j);
                }
            }
            _ => {
                for c in 0..n {
                    u[i][c] = -u[i][c];
                }
                for row in inv.iter_mut() {
                    row[i] = -row[i];
                }
            }
        }
    }
    (
        IntMatrix::from_rows_shaped(n, n, &u).unwrap(),
        IntMatrix::from_rows_shaped(n, n, &inv).unwrap(),
    )
}

/// A random chain complex with known homology: a sum of free cycles and
/// two-term pieces `Z --t--> Z`, conjugated by random unimodular bases.
pub fn random_complex(rng: &mut impl Rng, dimension: usize) -> (GradedComplex, HomologyResult) {
    let free: Vec<usize> = (0..=dimension).map(|_| rng.gen_range(0..3)).collect();
    // pieces[k] lists the multipliers of two-term pieces from degree k to k - 1
    let mut pieces: Vec<Vec<i64>> = vec![Vec::new(); dimension + 1];
    for k in 1..=dimension {
        pieces[k] = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(1..=4)).collect();
    }
    // generators of degree k: free, then targets of pieces[k + 1], then sources of pieces[k]
    let sizes: Vec<usize> = (0..=dimension)
        .map(|k| free[k] + pieces.get(k + 1).map_or(0, Vec::len) + pieces[k].len())
        .collect();
    let mut maps = Vec::new();
    for k in 1..=dimension {
        let mut d = vec![vec![0i64; sizes[k]]; sizes[k - 1]];
        let row0 = free[k - 1];
        let col0 = free[k] + pieces.get(k + 1).map_or(0, Vec::len);
        for (i, &t) in pieces[k].iter().enumerate() {
            d[row0 + i][col0 + i] = t;
        }
        maps.push(IntMatrix::from_rows_shaped(sizes[k - 1], sizes[k], &d).unwrap());
    }
    let bases: Vec<(IntMatrix, IntMatrix)> = sizes.iter().map(|&n| random_unimodular(rng, n, 3 * n)).collect();
    let conjugated: Vec<IntMatrix> = (1..=dimension)
        .map(|k| {
            let d = &maps[k - 1];
            bases[k - 1].0.checked_mul(d).unwrap().checked_mul(&bases[k].1).unwrap()
        })
        .collect();
    let generators = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| (0..n).map(|i| format!("x{k}_{i}")).collect())
        .collect();
    let cx = GradedComplex::new(dimension, generators, conjugated).unwrap();
    let groups = (0..=dimension)
        .map(|k| {
            let ts = pieces.get(k + 1).cloned().unwrap_or_default();
            let diag: Vec<Vec<i64>> = (0..ts.len())
                .map(|i| (0..ts.len()).map(|j| if i == j { ts[i] } else { 0 }).collect())
                .collect();
            let torsion = elementary_divisors(&IntMatrix::from_rows_shaped(ts.len(), ts.len(), &diag).unwrap())
                .into_iter()
                .filter(|&e| e > 1)
                .map(|e| e as u64)
                .collect();
            HomologyGroup {
                degree: k,
                betti: free[k] as u64,
                torsion,
            }
        })
        .collect();
    (cx, HomologyResult { groups })
}

/// First nonzero entry of `lower * upper` in row-major order, computed naively.
pub fn first_nonzero_product(lower: &IntMatrix, upper: &IntMatrix) -> Option<(usize, usize, i128)> {
    for i in 0..lower.nrows() {
        for j in 0..upper.ncols() {
            let v: i128 = (0..lower.ncols()).map(|t| lower.row(i)[t] as i128 * upper.row(t)[j] as i128).sum();
            if v != 0 {
                return Some((i, j, v));
            }
        }
    }
    None
}
