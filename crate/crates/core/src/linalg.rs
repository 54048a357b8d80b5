//! Exact Gaussian elimination over the rationals.

use num_rational::BigRational;
use num_traits::Zero;

pub type Q = BigRational;

/// Row-reduces in place and returns the pivot columns.
fn eliminate(rows: &mut [Vec<Q>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let (pivot, other) = if i < r {
                    let (lo, hi) = rows.split_at_mut(r);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = rows.split_at_mut(i);
                    (&lo[r], &mut hi[0])
                };
                for (x, y) in other.iter_mut().zip(pivot.iter()) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let cols = a.first().map_or(0, Vec::len);
    let mut rows = a.to_vec();
    eliminate(&mut rows, cols).len()
}

/// Solves the square system A x = b; None when A is singular.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut rows: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    if eliminate(&mut rows, n).len() < n {
        return None;
    }
    Some(rows.into_iter().map(|r| r[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    #[test]
    fn solves_small_system() {
        let a = vec![vec![q(-5), q(1)], vec![q(1), q(-2)]];
        let x = solve(&a, &[q(3), q(0)]).unwrap();
        assert_eq!(
            x,
            vec![Q::new((-2).into(), 3.into()), Q::new((-1).into(), 3.into())]
        );
    }

    #[test]
    fn rank_of_degenerate() {
        let a = vec![vec![q(1), q(1)], vec![q(1), q(1)]];
        assert_eq!(rank(&a), 1);
        assert!(solve(&a, &[q(0), q(0)]).is_none());
        assert_eq!(rank(&[vec![q(-3)]]), 1);
    }
}
