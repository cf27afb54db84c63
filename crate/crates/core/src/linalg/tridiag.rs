//! Symmetric tridiagonal matrices and their eigenproblems.
//!
//! Two routes are provided and used side by side:
//!
//! * implicit QL sweeps for the full set of eigenvalues,
//! * Sturm-sequence counts, bisection and inverse iteration for windowed
//!   queries (counts in an interval, a few eigenpairs near an energy).

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::SplitMix64;

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal and `off[i]`
/// coupling rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T = f64> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Shape("tridiagonal matrix must be nonempty".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::Shape(format!(
                "off-diagonal length {} does not match dimension {}",
                off.len(),
                diag.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    pub fn is_finite(&self) -> bool {
        self.diag.iter().chain(&self.off).all(|x| x.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Numeric("non-finite matrix entry".into()))
        }
    }

    pub fn trace(&self) -> T {
        self.diag.iter().fold(T::zero(), |acc, &d| acc + d)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> T {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s = s + self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s = s + self.off[i].abs();
                }
                s
            })
            .fold(T::zero(), T::max)
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s = s + self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s = s + self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    fn pivmin(&self) -> T {
        let emax = self.off.iter().fold(T::one(), |m, &e| m.max(e * e));
        T::min_positive_value() * emax
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence / LDLᵀ
    /// inertia). A pivot that vanishes exactly is replaced by `-pivmin`.
    pub fn count_below(&self, x: T) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = (self.diag[i] - x) - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues in ascending order by implicit QL sweeps.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        self.check_finite()?;
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Ok(d)
    }

    /// Eigenvalues and orthonormal eigenvectors (columns, ascending order).
    /// Cubic cost; intended for small matrices and cross-checks.
    pub fn eigen_dense(&self) -> Result<(Vec<T>, Vec<Vec<T>>)> {
        self.check_finite()?;
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        let mut z = vec![vec![T::zero(); n]; n];
        for (i, row) in z.iter_mut().enumerate() {
            row[i] = T::one();
        }
        ql_implicit(&mut d, &mut e, Some(&mut z))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
        let values = order.iter().map(|&k| d[k]).collect();
        let vectors = order
            .iter()
            .map(|&k| (0..n).map(|i| z[i][k]).collect())
            .collect();
        Ok((values, vectors))
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on Sturm counts.
    pub fn kth_eigenvalue(&self, k: usize) -> Result<T> {
        if k >= self.dim() {
            return Err(Error::OutOfRange {
                what: "eigenvalue index",
                detail: format!("{k} >= {}", self.dim()),
            });
        }
        self.check_finite()?;
        let (g_lo, g_hi) = self.gershgorin();
        let slack = T::lit(2.0) * T::epsilon() * (g_lo.abs().max(g_hi.abs())) + self.pivmin();
        let mut lo = g_lo - slack;
        let mut hi = g_hi + slack;
        let two = T::lit(2.0);
        loop {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            let tol = two * T::epsilon() * lo.abs().max(hi.abs()) + self.pivmin();
            if hi - lo <= tol {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((lo + hi) / two)
    }

    /// Eigenvalues in the closed interval `[a, b]`, by bisection.
    pub fn eigenvalues_in(&self, a: T, b: T) -> Result<Vec<T>> {
        let first = self.count_below(a);
        let last = self.count_below(next_above(b));
        (first..last).map(|k| self.kth_eigenvalue(k)).collect()
    }

    /// Eigenvector for the (approximate) eigenvalue `lambda` by inverse
    /// iteration from a seeded start vector, orthogonalized against `against`.
    pub fn inverse_iteration(&self, lambda: T, seed: u64, against: &[&[T]]) -> Result<Vec<T>> {
        self.check_finite()?;
        let n = self.dim();
        if n == 1 {
            return Ok(vec![T::one()]);
        }
        let scale = self.norm_one().max(T::one());
        let mut rng = SplitMix64::new(seed);
        let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.next_f64() - 0.5)).collect();
        let shift = lambda + T::lit(4.0) * T::epsilon() * scale;
        let lu = TridiagLu::factor(self, shift);
        for _ in 0..4 {
            orthogonalize(&mut x, against);
            normalize(&mut x)?;
            lu.solve_in_place(&mut x);
        }
        orthogonalize(&mut x, against);
        normalize(&mut x)?;
        fix_sign(&mut x);
        Ok(x)
    }
}

/// Smallest representable value strictly above `x` (for closed upper ends).
fn next_above<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        return T::min_positive_value();
    }
    let step = x.abs() * T::epsilon();
    let y = x + step;
    if y > x {
        y
    } else {
        x + T::min_positive_value()
    }
}

/// Implicit QL with Wilkinson-type shifts on (d, e) where `e[i]` couples i and
/// i+1 and `e[n-1]` is scratch. Optionally accumulates rotations into `z`.
fn ql_implicit<T: Scalar>(d: &mut [T], e: &mut [T], mut z: Option<&mut Vec<Vec<T>>>) -> Result<()> {
    let n = d.len();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numeric("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for row in z.iter_mut() {
                        let f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// LU factorization of `T - shift·I` with partial pivoting.
struct TridiagLu<T> {
    // upper factor: main, first and second superdiagonals
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
    // multipliers and row swaps
    mult: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Scalar> TridiagLu<T> {
    fn factor(t: &Tridiagonal<T>, shift: T) -> Self {
        let n = t.dim();
        let tiny = T::epsilon() * t.norm_one().max(T::min_positive_value());
        let mut u0: Vec<T> = t.diag.iter().map(|&d| d - shift).collect();
        let mut u1: Vec<T> = t.off.clone();
        u1.push(T::zero());
        let mut u2 = vec![T::zero(); n];
        let mut sub: Vec<T> = t.off.clone();
        let mut mult = vec![T::zero(); n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if sub[i].abs() > u0[i].abs() {
                // swap rows i and i+1
                swapped[i] = true;
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = sub[i];
                u1[i] = u0[i + 1];
                u2[i] = u1[i + 1];
                let m = a0 / u0[i];
                mult[i] = m;
                u0[i + 1] = a1 - m * u1[i];
                u1[i + 1] = a2 - m * u2[i];
                sub[i] = T::zero();
            } else {
                if u0[i] == T::zero() {
                    u0[i] = tiny;
                }
                let m = sub[i] / u0[i];
                mult[i] = m;
                u0[i + 1] = u0[i + 1] - m * u1[i];
                u1[i + 1] = u1[i + 1] - m * u2[i];
            }
        }
        if u0[n - 1] == T::zero() {
            u0[n - 1] = tiny;
        }
        for v in u0.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < T::zero() { -tiny } else { tiny };
            }
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] = x[i + 1] - self.mult[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s = s - self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s = s - self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}

fn orthogonalize<T: Scalar>(x: &mut [T], against: &[&[T]]) {
    for v in against {
        let dot = x.iter().zip(v.iter()).fold(T::zero(), |a, (&p, &q)| a + p * q);
        for (xi, &vi) in x.iter_mut().zip(v.iter()) {
            *xi = *xi - dot * vi;
        }
    }
}

fn normalize<T: Scalar>(x: &mut [T]) -> Result<()> {
    let amax = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if !(amax > T::zero()) || !amax.is_finite() {
        return Err(Error::Numeric("inverse iteration collapsed".into()));
    }
    for v in x.iter_mut() {
        *v = *v / amax;
    }
    let norm = x.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
    for v in x.iter_mut() {
        *v = *v / norm;
    }
    Ok(())
}

/// Largest-magnitude component made positive (first one on ties).
pub(crate) fn fix_sign<T: Scalar>(x: &mut [T]) {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i].abs() > x[best].abs() {
            best = i;
        }
    }
    if x[best] < T::zero() {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn free(n: usize) -> Tridiagonal<f64> {
        Tridiagonal::new(vec![0.0; n], vec![-1.0; n - 1]).unwrap()
    }

    fn exact_free(n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (1..=n)
            .map(|k| -2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn free_chain_matches_closed_form() {
        for n in [1, 2, 3, 7, 40] {
            let ev = free(n).eigenvalues().unwrap();
            for (a, b) in ev.iter().zip(exact_free(n)) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn bisection_agrees_with_ql() {
        let t = Tridiagonal::new(
            vec![0.3, -1.2, 2.5, 0.0, 0.7, 1.1],
            vec![-1.0, 0.4, -0.9, -1.0, 0.2],
        )
        .unwrap();
        let ql = t.eigenvalues().unwrap();
        for (k, &v) in ql.iter().enumerate() {
            assert_abs_diff_eq!(t.kth_eigenvalue(k).unwrap(), v, epsilon = 1e-13);
        }
    }

    #[test]
    fn single_precision_path() {
        let t = Tridiagonal::<f32>::new(vec![0.0; 3], vec![-1.0; 2]).unwrap();
        let ev = t.eigenvalues().unwrap();
        assert!((ev[0] + 2f32.sqrt()).abs() < 1e-5);
        assert!(ev[1].abs() < 1e-5);
        assert_eq!(t.count_below(0.5), 2);
    }

    #[test]
    fn inverse_iteration_residual() {
        let t = Tridiagonal::new(
            (0..30).map(|i| ((i * 7) % 11) as f64 * 0.3).collect(),
            vec![-1.0; 29],
        )
        .unwrap();
        let ev = t.eigenvalues().unwrap();
        for &lam in &ev {
            let v = t.inverse_iteration(lam, 1, &[]).unwrap();
            let hv = t.matvec(&v);
            let res: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lam * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-12 * (t.norm_one() + lam.abs()), "residual {res}");
        }
    }

    #[test]
    fn dense_vectors_orthonormal() {
        let t = Tridiagonal::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.5, 0.5, 0.5]).unwrap();
        let (_, vecs) = t.eigen_dense().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                assert_abs_diff_eq!(dot, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_rejected() {
        let t = Tridiagonal::new(vec![f64::NAN, 0.0], vec![1.0]).unwrap();
        assert!(matches!(t.eigenvalues(), Err(Error::Numeric(_))));
    }
}
