//! Cofactor determinants over an arbitrary commutative ring.
//!
//! Only used for the small Sylvester-type matrices of the resultant code, so
//! Laplace expansion (no division) is both adequate and exact over ℚ or ℤ[X].

use crate::scalar::Ring;

/// Determinant of a square matrix given as rows, by Laplace expansion along
/// the row with the most zero entries. Panics on a non-square input.
pub fn determinant<T: Ring>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    let cols: Vec<usize> = (0..n).collect();
    let rws: Vec<usize> = (0..n).collect();
    minor(rows, &rws, &cols)
}

pub fn determinant4<T: Ring>(m: &[[T; 4]; 4]) -> T {
    let rows: Vec<Vec<T>> = m.iter().map(|r| r.to_vec()).collect();
    determinant(&rows)
}

fn minor<T: Ring>(m: &[Vec<T>], rows: &[usize], cols: &[usize]) -> T {
    match rows.len() {
        0 => T::one(),
        1 => m[rows[0]][cols[0]].clone(),
        2 => {
            let (r0, r1) = (rows[0], rows[1]);
            let (c0, c1) = (cols[0], cols[1]);
            m[r0][c0].clone() * m[r1][c1].clone() - m[r0][c1].clone() * m[r1][c0].clone()
        }
        _ => {
            // expand along the sparsest remaining row
            let pivot = (0..rows.len())
                .max_by_key(|&i| cols.iter().filter(|&&c| m[rows[i]][c].is_zero()).count())
                .expect("nonempty");
            let sub_rows: Vec<usize> = rows
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pivot)
                .map(|(_, &r)| r)
                .collect();
            let mut acc = T::zero();
            for (j, &c) in cols.iter().enumerate() {
                let entry = &m[rows[pivot]][c];
                if entry.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = cols
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &c)| c)
                    .collect();
                let term = entry.clone() * minor(m, &sub_rows, &sub_cols);
                if (pivot + j) % 2 == 0 {
                    acc = acc + term;
                } else {
                    acc = acc - term;
                }
            }
            acc
        }
    }
}
