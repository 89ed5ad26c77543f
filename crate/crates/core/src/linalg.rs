//! Small exact linear algebra over Z and Q: rank, determinants, normals,
//! null spaces and Hermite normal form. Sizes here are tiny (d <= 6), so the
//! routines favour clarity over asymptotics.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn to_rational(rows: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m = to_rational(rows);
    rref(&mut m).len()
}

/// Determinant of a square integer matrix (Bareiss fraction-free elimination).
pub fn determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Divides out the content of an integer vector. The zero vector is returned as is.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Generalised cross product of `d - 1` vectors in Z^d: a vector orthogonal
/// to all of them, zero iff they are linearly dependent.
pub fn normal_vector(vectors: &[Vec<BigInt>], d: usize) -> Vec<BigInt> {
    debug_assert_eq!(vectors.len() + 1, d);
    (0..d)
        .map(|skip| {
            let minor: Vec<Vec<BigInt>> = vectors
                .iter()
                .map(|v| {
                    v.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let det = determinant(&minor);
            if skip % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

/// Integer basis of the orthogonal complement of the row span.
pub fn orthogonal_complement(rows: &[Vec<BigInt>], d: usize) -> Vec<Vec<BigInt>> {
    let mut m = to_rational(rows);
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); d];
            v[f] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            let den = v
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
            primitive(&ints)
        })
        .collect()
}

/// Solves the square system `M x = b` exactly; `None` when singular.
pub fn solve(m: &[Vec<BigInt>], b: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let mut aug: Vec<Vec<BigRational>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            row.iter()
                .chain(std::iter::once(bi))
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.iter().map(|row| row[n].clone()).collect())
}

/// Row-style Hermite normal form of the lattice spanned by `rows`. Nonzero
/// rows come first, each with a positive pivot strictly right of the pivot
/// above it, and entries above a pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<BigInt>], d: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut r = 0;
    for c in 0..d {
        if r == m.len() {
            break;
        }
        // Euclid on column c among rows r.. until a single nonzero entry remains.
        loop {
            let nonzero: Vec<usize> = (r..m.len()).filter(|&i| !m[i][c].is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            let best = *nonzero
                .iter()
                .min_by(|&&i, &&j| m[i][c].abs().cmp(&m[j][c].abs()))
                .expect("nonempty");
            m.swap(r, best);
            let mut done = true;
            for i in r + 1..m.len() {
                if !m[i][c].is_zero() {
                    let f = m[i][c].div_floor(&m[r][c]);
                    for j in 0..d {
                        let delta = &f * &m[r][j];
                        m[i][j] -= delta;
                    }
                    if !m[i][c].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for x in m[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            for i in 0..r {
                let f = m[i][c].div_floor(&m[r][c]);
                if !f.is_zero() {
                    for j in 0..d {
                        let delta = &f * &m[r][j];
                        m[i][j] -= delta;
                    }
                }
            }
            r += 1;
        }
    }
    m.truncate(r);
    m
}

/// True when the integer span of `rows` is all of Z^d.
pub fn spans_full_lattice(rows: &[Vec<BigInt>], d: usize) -> bool {
    let h = hermite_normal_form(rows, d);
    h.len() == d && (0..d).all(|i| h[i][i].is_one())
}
