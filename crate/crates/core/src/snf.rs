//! Smith normal form over the integers with tracked unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// `U · M · V = D` with `D = diag(d_1, …, d_r, 0, …)`, `d_i > 0`,
/// `d_i | d_{i+1}`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diagonal: Vec<BigInt>,
    /// Row transform, present when requested.
    pub u: Option<IntMatrix>,
    pub v: IntMatrix,
    /// Extra columns carried through the row operations, i.e. `U · rhs`.
    pub transformed_rhs: Vec<Vec<BigInt>>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }
}

struct State {
    a: IntMatrix,
    u: Option<IntMatrix>,
    v: IntMatrix,
    rhs: Vec<Vec<BigInt>>,
}

impl State {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(u) = &mut self.u {
            u.swap(i, j);
        }
        for r in &mut self.rhs {
            r.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
    }

    /// row_i += k · row_j
    fn add_row(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        add_scaled(&mut self.a, i, j, k);
        if let Some(u) = &mut self.u {
            add_scaled(u, i, j, k);
        }
        for r in &mut self.rhs {
            let t = &r[j] * k;
            r[i] += t;
        }
    }

    /// col_i += k · col_j
    fn add_col(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            let t = &row[j] * k;
            row[i] += t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        negate(&mut self.a[i]);
        if let Some(u) = &mut self.u {
            negate(&mut u[i]);
        }
        for r in &mut self.rhs {
            r[i] = -&r[i];
        }
    }
}

fn add_scaled(m: &mut IntMatrix, i: usize, j: usize, k: &BigInt) {
    let (src, dst) = if i < j {
        let (lo, hi) = m.split_at_mut(j);
        (&hi[0], &mut lo[i])
    } else {
        let (lo, hi) = m.split_at_mut(i);
        (&lo[j], &mut hi[0])
    };
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d += s * k;
        }
    }
}

fn negate(row: &mut [BigInt]) {
    for x in row {
        *x = -&*x;
    }
}

fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Computes the Smith form of `m` (rows × cols). Each `rhs` column is
/// transformed alongside the rows; `track_u` additionally materializes `U`.
pub fn smith_normal_form(m: &IntMatrix, cols: usize, rhs: Vec<Vec<BigInt>>, track_u: bool) -> Smith {
    let rows = m.len();
    let mut st = State { a: m.clone(), u: track_u.then(|| identity(rows)), v: identity(cols), rhs };
    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        // smallest nonzero entry in the trailing block
        let Some((pi, pj)) = smallest(&st.a, t..rows, t..cols) else { break };
        st.swap_rows(t, pi);
        st.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if st.a[i][t].is_zero() {
                    continue;
                }
                let q = st.a[i][t].div_floor(&st.a[t][t]);
                st.add_row(i, t, &-q);
                dirty |= !st.a[i][t].is_zero();
            }
            if dirty {
                let (pi, _) = smallest(&st.a, t..rows, t..t + 1).expect("nonzero column");
                st.swap_rows(t, pi);
                continue;
            }
            for j in t + 1..cols {
                if st.a[t][j].is_zero() {
                    continue;
                }
                let q = st.a[t][j].div_floor(&st.a[t][t]);
                st.add_col(j, t, &-q);
                dirty |= !st.a[t][j].is_zero();
            }
            if dirty {
                let (_, pj) = smallest(&st.a, t..t + 1, t..cols).expect("nonzero row");
                st.swap_cols(t, pj);
                continue;
            }
            let pivot = st.a[t][t].clone();
            let offender = (t + 1..rows).find(|&i| st.a[i][t + 1..].iter().any(|x| !x.is_multiple_of(&pivot)));
            match offender {
                Some(i) => st.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if st.a[t][t].is_negative() {
            st.negate_row(t);
        }
        diagonal.push(st.a[t][t].clone());
    }
    Smith { diagonal, u: st.u, v: st.v, transformed_rhs: st.rhs }
}

fn smallest(
    a: &IntMatrix,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in rows {
        for j in cols.clone() {
            let x = a[i][j].abs();
            if x.is_zero() {
                continue;
            }
            if best.as_ref().is_none_or(|(_, _, b)| x < *b) {
                let one = x.is_one();
                best = Some((i, j, x));
                if one {
                    return best.map(|(i, j, _)| (i, j));
                }
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

pub fn mat_vec(m: &IntMatrix, x: &[BigInt]) -> Vec<BigInt> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        let k = b.len();
        let n = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|row| (0..n).map(|j| (0..k).map(|t| &row[t] * &b[t][j]).sum()).collect())
            .collect()
    }

    fn check(m: IntMatrix, cols: usize, expected: &[i64]) {
        let s = smith_normal_form(&m, cols, Vec::new(), true);
        let d = mul(&mul(s.u.as_ref().unwrap(), &m), &s.v);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j && i < s.rank() { s.diagonal[i].clone() } else { BigInt::zero() };
                assert_eq!(*x, want, "entry ({i},{j})");
            }
        }
        let got: Vec<BigInt> = s.diagonal.clone();
        assert_eq!(got, expected.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
    }

    #[test]
    fn classic_examples() {
        check(int(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]), 3, &[2, 6, 12]);
        check(int(&[&[2, 0], &[0, 3]]), 2, &[1, 6]);
        check(int(&[&[0, 0], &[0, 0]]), 2, &[]);
        check(int(&[&[1, 1], &[1, 1], &[0, 2]]), 2, &[1, 2]);
    }

    #[test]
    fn rhs_follows_rows() {
        let m = int(&[&[2, 0], &[0, 3], &[1, 1]]);
        let rhs = vec![vec![BigInt::from(1), BigInt::from(2), BigInt::from(3)]];
        let s = smith_normal_form(&m, 2, rhs.clone(), true);
        assert_eq!(s.transformed_rhs[0], mat_vec(s.u.as_ref().unwrap(), &rhs[0]));
    }
}
